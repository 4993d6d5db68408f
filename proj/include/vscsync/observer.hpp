#pragma once

#include "vscsync/plant.hpp"
#include "vscsync/signals.hpp"

namespace vscsync {

/// The observer's own copy of the grid impedance plus the LRE filter pole.
/// Kept apart from SystemParams so a stale model can be simulated.
struct ObserverModel {
    double r_g = 10.24;
    double L_g = 0.33;
    double lambda = 100.0;  // rad/s, pole of F(p) = lambda / (p + lambda)
    /// Project Phi onto the nearest rotation after every step.
    bool renormalize_phi = false;
};

/// GPEBO dynamic extension z, principal matrix Phi and the LTI filter states
/// that produce the regressor pair.
struct ObserverState {
    Vec2 z12 = Vec2::Zero();
    Vec2 z34 = Vec2::Zero();
    Mat2 phi = Mat2::Identity();
    Vec2 fy = Vec2::Zero();    // F[y12]
    Vec2 fq = Vec2::Zero();    // F[q]
    Mat23 fw = Mat23::Zero();  // F[W]

    /// Phi(0) = I, z as given, fy seeded with the first measurement so the
    /// filter starts without an initial-condition transient on Y.
    static ObserverState initial(const MeasuredOutput& y0, const Vec2& z12 = Vec2::Zero(),
                                 const Vec2& z34 = Vec2::Zero());
};

/// Y = Omega theta + eps_t.
struct RegressorPair {
    Vec2 Y = Vec2::Zero();
    Mat23 omega = Mat23::Zero();
};

/// q = -(r_g/L_g) i_g + v/L_g + J i_g u1, so that d(i_g)/dt = q - x.
Vec2 q_signal(const MeasuredOutput& y, double u1, const ObserverModel& m);

ObserverState observer_deriv(const ObserverState& o, const MeasuredOutput& y, double u1,
                             const ObserverModel& m);

/// Nearest rotation matrix in the Frobenius sense.
Mat2 nearest_rotation(const Mat2& a);

/// W = [-(z12 + z34 - J i_g) | Phi].
Mat23 w_matrix(const ObserverState& o, const MeasuredOutput& y);

/// Y = lambda (y12 - F[y12]) - F[q]  (pF(p) realized without differentiation),
/// Omega = -F[W].
RegressorPair regressor(const ObserverState& o, const MeasuredOutput& y, double lambda);

struct GridEstimate {
    Vec2 xhat = Vec2::Zero();  // estimate of v_g,dq / L_g
    double amplitude = 0.0;    // L_g |xhat|, volts
    double omega = 0.0;        // theta_1, rad/s
};

GridEstimate reconstruct(const Mat23& w, const Vec3& theta, double L_g);

/// Ground-truth parameter vector col(omega, Phi^T e) with
/// e = omega (z12 + z34 - J i_g) + x. Constant along exact trajectories, so it
/// can be evaluated at any instant. Test and metrics use only.
Vec3 true_theta(const ObserverState& o, const MeasuredOutput& y, const Vec2& x, double omega);

}  // namespace vscsync
