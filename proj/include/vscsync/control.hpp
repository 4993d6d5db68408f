#pragma once

#include <optional>

#include "vscsync/plant.hpp"
#include "vscsync/signals.hpp"

namespace vscsync {

enum class DetectorKind { Srf, Atan };

/// wrap(atan2(x2, x1) - phi_ref). Empty when |xhat| < x_min (atan2 is
/// undefined at the origin).
std::optional<double> phase_detector_atan(const Vec2& xhat, double phi_ref, double x_min);

/// cos(phi_ref) x2 - sin(phi_ref) x1 = |xhat| sin(angle - phi_ref).
double phase_detector_srf(const Vec2& xhat, double phi_ref);

/// Same detectors applied to the measured PCC voltage instead of the estimate.
std::optional<double> baseline_detector(const DqVec& v_measured, double phi_ref, DetectorKind kind,
                                        double x_min);

std::optional<double> phase_detector(const Vec2& signal, double phi_ref, DetectorKind kind,
                                     double x_min);

struct PllGains {
    double kp = 200.0;   // 1/s
    double ki = 1000.0;  // 1/s^2

    void validate() const;
};

struct PllOutput {
    double xc_dot = 0.0;
    double u1 = 0.0;
};

/// x_c' = e, u1 = -K_P e - K_I x_c.
PllOutput pll_update(double xc, double e, const PllGains& g);

/// Gains of the current loop, normalized by the converter inductance so the
/// closed loop is exactly (p^2 + K_P p + K_I)[error] = 0.
struct CurrentGains {
    Mat2 kp = 250.0 * Mat2::Identity();    // 1/s
    Mat2 ki = 50e3 * Mat2::Identity();     // 1/s^2

    /// Throws ConfigError unless the symmetric parts are positive definite.
    void validate() const;
};

/// Converter-side constants the controller is allowed to know.
struct ConverterModel {
    double r = 1.02;
    double L = 0.065;
};

struct CurrentOutput {
    Vec2 xc_dot = Vec2::Zero();
    Vec2 u = Vec2::Zero();  // u_dq, volts
};

/// e = i - i_ref, x_c' = e,
/// u = L(-K_P e - K_I x_c) + r i + v - L J i u1.
CurrentOutput current_controller(const Vec2& xc, const MeasuredOutput& y, const Vec2& i_ref,
                                 double u1, const CurrentGains& g, const ConverterModel& m);

}  // namespace vscsync
