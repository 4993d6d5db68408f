#include "vscsync/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace vscsync {

std::optional<double> settle_time(std::span<const double> t, std::span<const double> x, double target,
                                  double band, std::size_t begin, std::size_t end)
{
    end = std::min(end, x.size());
    if (begin >= end) {
        return std::nullopt;
    }
    std::size_t k = end;
    while (k > begin && std::abs(x[k - 1] - target) <= band) {
        --k;
    }
    if (k == end) {
        return std::nullopt;
    }
    return t[k] - t[begin];
}

SignalMetrics analyze_signal(std::span<const double> t, std::span<const double> x, double band,
                             double target)
{
    SignalMetrics m;
    if (x.empty()) {
        return m;
    }
    m.final_value = x.back();
    m.steady_state_error = std::abs(m.final_value - target);
    m.settling_time = settle_time(t, x, m.final_value, band, 0, x.size());

    const double offset = x.front() - m.final_value;
    if (std::abs(offset) > 0.0) {
        double excess = 0.0;
        for (double v : x) {
            // Overshoot is travel past the final value, away from the start.
            excess = std::max(excess, -(v - m.final_value) * (offset > 0 ? 1.0 : -1.0));
        }
        m.overshoot = excess / std::abs(offset);
    }
    return m;
}

std::vector<double> times(std::span<const Sample> s)
{
    std::vector<double> out(s.size());
    std::transform(s.begin(), s.end(), out.begin(), [](const Sample& x) { return x.t; });
    return out;
}

std::vector<double> delta_error_deg(std::span<const Sample> s)
{
    std::vector<double> out(s.size());
    std::transform(s.begin(), s.end(), out.begin(), [](const Sample& x) {
        return wrap_to_pi(x.delta - x.phi_ref) * 180.0 / kPi;
    });
    return out;
}

std::vector<double> current_error(std::span<const Sample> s)
{
    std::vector<double> out(s.size());
    std::transform(s.begin(), s.end(), out.begin(),
                   [](const Sample& x) { return (x.i - x.i_ref).norm(); });
    return out;
}

Metrics compute_metrics(std::span<const Sample> series, const MetricsOptions& opt,
                        double rated_current, double nominal_vg)
{
    Metrics m;
    if (series.empty()) {
        return m;
    }
    const auto t = times(series);
    const auto de = delta_error_deg(series);
    const auto ie = current_error(series);
    std::vector<double> w(series.size());
    std::vector<double> vg(series.size());
    for (std::size_t k = 0; k < series.size(); ++k) {
        w[k] = series[k].omega_hat_hz;
        vg[k] = series[k].vg_hat;
    }

    m.delta_error_deg = analyze_signal(t, de, opt.sync_band_deg, 0.0);
    m.current_error = analyze_signal(t, ie, opt.current_band_frac * rated_current, 0.0);
    m.omega_hat_hz = analyze_signal(t, w, opt.omega_band_hz, w.back());
    m.vg_hat = analyze_signal(t, vg, opt.vg_band_frac * nominal_vg, vg.back());
    m.final_time = t.back();

    m.pe_min_eig_min = std::numeric_limits<double>::infinity();
    bool any_pe = false;
    for (const auto& s : series) {
        m.max_norm_F = std::max(m.max_norm_F, s.norm_F);
        m.max_phi_orth_err = std::max(m.max_phi_orth_err, s.phi_orth_err);
        if (std::isfinite(s.pe_min_eig)) {
            m.pe_min_eig_min = std::min(m.pe_min_eig_min, s.pe_min_eig);
            m.pe_min_eig_final = s.pe_min_eig;
            any_pe = true;
        }
    }
    if (!any_pe) {
        m.pe_min_eig_min = std::numeric_limits<double>::quiet_NaN();
        m.pe_min_eig_final = std::numeric_limits<double>::quiet_NaN();
    }

    // Converged: in band for both synchronization and current over the tail.
    const double tail_start = t.back() - opt.settle_window;
    bool in_band = t.back() - t.front() >= opt.settle_window;
    for (std::size_t k = 0; k < series.size() && in_band; ++k) {
        if (t[k] < tail_start) {
            continue;
        }
        if (!(std::abs(de[k]) <= opt.sync_band_deg) ||
            !(ie[k] <= opt.current_band_frac * rated_current)) {
            in_band = false;
        }
    }
    m.converged = in_band;
    m.oscillating = !in_band;
    return m;
}

namespace {

nlohmann::json signal_json(const SignalMetrics& s)
{
    nlohmann::json j;
    j["final"] = s.final_value;
    j["settling_time_s"] = s.settling_time ? nlohmann::json(*s.settling_time) : nlohmann::json();
    j["overshoot"] = s.overshoot;
    j["steady_state_error"] = s.steady_state_error;
    return j;
}

nlohmann::json number_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
}

}  // namespace

std::string metrics_to_json(const Metrics& m, int indent)
{
    nlohmann::ordered_json j;
    auto flat = [&](const std::string& prefix, const SignalMetrics& s) {
        const auto sj = signal_json(s);
        for (const auto& [key, value] : sj.items()) {
            j[prefix + "_" + key] = value;
        }
    };
    j["converged"] = m.converged;
    j["diverged"] = m.diverged;
    j["divergence_time_s"] = m.divergence_time ? nlohmann::json(*m.divergence_time) : nlohmann::json();
    j["oscillating"] = m.oscillating;
    j["final_time_s"] = m.final_time;
    flat("delta_error_deg", m.delta_error_deg);
    flat("current_error_a", m.current_error);
    flat("omega_hat_hz", m.omega_hat_hz);
    flat("vg_hat_v", m.vg_hat);
    j["pe_min_eig_min"] = number_or_null(m.pe_min_eig_min);
    j["pe_min_eig_final"] = number_or_null(m.pe_min_eig_final);
    j["max_norm_F"] = m.max_norm_F;
    j["max_phi_orth_err"] = m.max_phi_orth_err;
    return j.dump(indent);
}

}  // namespace vscsync
