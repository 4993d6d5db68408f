#include "vscsync/control.hpp"

#include <cmath>

#include "vscsync/errors.hpp"

namespace vscsync {

std::optional<double> phase_detector_atan(const Vec2& xhat, double phi_ref, double x_min)
{
    if (!(xhat.norm() >= x_min)) {
        return std::nullopt;
    }
    return wrap_to_pi(std::atan2(xhat.y(), xhat.x()) - phi_ref);
}

double phase_detector_srf(const Vec2& xhat, double phi_ref)
{
    return std::cos(phi_ref) * xhat.y() - std::sin(phi_ref) * xhat.x();
}

std::optional<double> phase_detector(const Vec2& signal, double phi_ref, DetectorKind kind,
                                     double x_min)
{
    if (kind == DetectorKind::Atan) {
        return phase_detector_atan(signal, phi_ref, x_min);
    }
    return phase_detector_srf(signal, phi_ref);
}

std::optional<double> baseline_detector(const DqVec& v_measured, double phi_ref, DetectorKind kind,
                                        double x_min)
{
    return phase_detector(v_measured.vec(), phi_ref, kind, x_min);
}

void PllGains::validate() const
{
    if (!(kp > 0.0) || !(ki > 0.0)) {
        throw ConfigError("PLL gains must be > 0");
    }
}

PllOutput pll_update(double xc, double e, const PllGains& g)
{
    return {e, -g.kp * e - g.ki * xc};
}

void CurrentGains::validate() const
{
    auto pd = [](const Mat2& k, const char* name) {
        const Mat2 sym = 0.5 * (k + k.transpose());
        Eigen::SelfAdjointEigenSolver<Mat2> es(sym, Eigen::EigenvaluesOnly);
        if (!(es.eigenvalues()(0) > 0.0)) {
            throw ConfigError(std::string("current gain ") + name + " must be positive definite");
        }
    };
    pd(kp, "K_P");
    pd(ki, "K_I");
}

CurrentOutput current_controller(const Vec2& xc, const MeasuredOutput& y, const Vec2& i_ref,
                                 double u1, const CurrentGains& g, const ConverterModel& m)
{
    const Vec2 err = y.i - i_ref;
    CurrentOutput out;
    out.xc_dot = err;
    out.u = m.L * (-g.kp * err - g.ki * xc) + m.r * y.i + y.v - m.L * u1 * (kJ * y.i);
    return out;
}

}  // namespace vscsync
