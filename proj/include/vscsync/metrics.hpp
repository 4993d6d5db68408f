#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vscsync/signals.hpp"

namespace vscsync {

/// One recorded instant. The first block mirrors the CSV schema; the rest is
/// ground truth and diagnostics for the metrics layer.
struct Sample {
    double t = 0.0;
    Vec2 i_g = Vec2::Zero();
    Vec2 v = Vec2::Zero();
    Vec2 i = Vec2::Zero();
    double delta = 0.0;
    double u1 = 0.0;
    Vec2 u = Vec2::Zero();
    double e_detector = 0.0;
    Vec2 xhat = Vec2::Zero();
    Vec3 theta = Vec3::Zero();
    double norm_F = 0.0;
    double vg_hat = 0.0;
    double omega_hat_hz = 0.0;
    double pe_min_eig = 0.0;  // NaN until the PE window is filled

    double phi_ref = 0.0;
    Vec2 i_ref = Vec2::Zero();
    Vec2 x_true = Vec2::Zero();
    Vec3 theta_true = Vec3::Zero();
    double gpebo_rel_err = 0.0;  // |x - W theta_true| / |x|
    double lre_residual = 0.0;   // |Y - Omega theta_true|
    double y_norm = 0.0;         // |Y|
    double phi_orth_err = 0.0;   // max(|Phi^T Phi - I|, |det Phi - 1|)
    double F_min_eig = 0.0;
    bool degenerate = false;
    bool saturated = false;
};

struct MetricsOptions {
    double sync_band_deg = 1.0;
    double current_band_frac = 0.01;  // of rated current
    double omega_band_hz = 0.05;
    double vg_band_frac = 0.01;
    /// The run counts as converged when it stays in band over this tail.
    double settle_window = 0.1;
};

struct SignalMetrics {
    double final_value = 0.0;
    std::optional<double> settling_time;  // from the first sample
    double overshoot = 0.0;               // fraction of the initial offset
    double steady_state_error = 0.0;      // |final - target| (target given)
};

struct Metrics {
    SignalMetrics delta_error_deg;  // wrap(delta - phi_ref)
    SignalMetrics current_error;    // |i - i_ref|, A
    SignalMetrics omega_hat_hz;
    SignalMetrics vg_hat;
    bool diverged = false;
    std::optional<double> divergence_time;
    bool converged = false;
    bool oscillating = false;
    double pe_min_eig_min = 0.0;
    double pe_min_eig_final = 0.0;
    double max_norm_F = 0.0;
    double max_phi_orth_err = 0.0;
    double final_time = 0.0;
};

/// Time from t[begin] after which |x - target| <= band holds up to end - 1.
/// Empty if the last sample in range is outside the band.
std::optional<double> settle_time(std::span<const double> t, std::span<const double> x, double target,
                                  double band, std::size_t begin, std::size_t end);

/// Settling relative to the final value, overshoot, final value.
SignalMetrics analyze_signal(std::span<const double> t, std::span<const double> x, double band,
                             double target);

/// Per-signal projections of a series.
std::vector<double> times(std::span<const Sample> s);
std::vector<double> delta_error_deg(std::span<const Sample> s);
std::vector<double> current_error(std::span<const Sample> s);

Metrics compute_metrics(std::span<const Sample> series, const MetricsOptions& opt,
                        double rated_current, double nominal_vg);

std::string metrics_to_json(const Metrics& m, int indent = 2);

}  // namespace vscsync
