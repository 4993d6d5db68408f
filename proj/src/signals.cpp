#include "vscsync/signals.hpp"

#include <cmath>

namespace vscsync {

namespace {
constexpr double kTwoThirdsPi = 2.0 * kPi / 3.0;
const double kParkScale = std::sqrt(2.0 / 3.0);
}  // namespace

Mat2 rotation(double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat2 r;
    r << c, -s, s, c;
    return r;
}

DqVec dq_transform(const ThreePhase& s, double angle)
{
    const double ca = std::cos(angle);
    const double cb = std::cos(angle - kTwoThirdsPi);
    const double cc = std::cos(angle + kTwoThirdsPi);
    const double sa = std::sin(angle);
    const double sb = std::sin(angle - kTwoThirdsPi);
    const double sc = std::sin(angle + kTwoThirdsPi);
    return {kParkScale * (ca * s.a + cb * s.b + cc * s.c),
            kParkScale * (sa * s.a + sb * s.b + sc * s.c)};
}

ThreePhase inverse_dq(const DqVec& v, double angle)
{
    auto phase = [&](double shift) {
        return kParkScale * (std::cos(angle + shift) * v.d + std::sin(angle + shift) * v.q);
    };
    return {phase(0.0), phase(-kTwoThirdsPi), phase(kTwoThirdsPi)};
}

ThreePhase balanced_source(double amplitude, double omega, double t)
{
    const double wt = omega * t;
    return {kParkScale * amplitude * std::sin(wt),
            kParkScale * amplitude * std::sin(wt - kTwoThirdsPi),
            kParkScale * amplitude * std::sin(wt + kTwoThirdsPi)};
}

double wrap_to_pi(double angle)
{
    double w = std::fmod(angle + kPi, 2.0 * kPi);
    if (w < 0.0) {
        w += 2.0 * kPi;
    }
    return w - kPi;
}

}  // namespace vscsync
