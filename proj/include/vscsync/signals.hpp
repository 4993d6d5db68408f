#pragma once

#include <Eigen/Dense>

namespace vscsync {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

inline constexpr double kPi = 3.14159265358979323846;

/// Quarter-turn generator J = [[0, -1], [1, 0]].
inline const Mat2 kJ = (Mat2() << 0.0, -1.0, 1.0, 0.0).finished();

/// Instantaneous three-phase quantity (volts or amperes depending on use).
struct ThreePhase {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double sum() const { return a + b + c; }
    double dot(const ThreePhase& o) const { return a * o.a + b * o.b + c * o.c; }
};

/// Rotating-frame quantity.
struct DqVec {
    double d = 0.0;
    double q = 0.0;

    Vec2 vec() const { return {d, q}; }
    static DqVec from(const Vec2& v) { return {v.x(), v.y()}; }
};

/// e^{J angle}.
Mat2 rotation(double angle);

/// Power-invariant Park transform. Row d uses cos, row q uses sin, so a
/// balanced source sampled at angle wt - pi/2 + delta maps to V e^{J delta} e1.
DqVec dq_transform(const ThreePhase& s, double angle);

/// Right inverse of dq_transform (zero-sequence free).
ThreePhase inverse_dq(const DqVec& v, double angle);

/// sqrt(2/3) V [sin wt, sin(wt - 2pi/3), sin(wt + 2pi/3)].
ThreePhase balanced_source(double amplitude, double omega, double t);

/// Reduce to [-pi, pi).
double wrap_to_pi(double angle);

}  // namespace vscsync
