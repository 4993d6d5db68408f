#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vscsync/simulation.hpp"

namespace vscsync {

/// Ranges for randomized initial conditions.
struct Dispersion {
    double delta_min = -kPi;  // delta(0) - phi_ref uniform in [min, max)
    double delta_max = kPi;
    double theta1_hz_min = 45.0;
    double theta1_hz_max = 55.0;
    double theta_tail_scale = 1e6;   // theta_2,3(0) uniform in +-scale
    double z_scale = 1e3;            // z(0) entries uniform in +-scale
    double pll_xc_rel = 0.2;         // x_c(0) = lock * (1 + U(-rel, rel))
};

struct SweepRun {
    int index = 0;
    std::uint64_t seed = 0;
    double delta_offset = 0.0;
    bool converged = false;
    bool diverged = false;
    std::optional<double> settling_time;
    double final_delta_error_deg = 0.0;
};

struct SweepReport {
    int n = 0;
    int converged = 0;
    double fraction = 0.0;
    std::optional<double> worst_settling_time;
    std::vector<SweepRun> runs;
};

/// Draws the randomized configuration of run `index`.
ScenarioConfig randomized_config(const ScenarioConfig& cfg, int index, const Dispersion& d,
                                 std::uint64_t* seed_out = nullptr, double* offset_out = nullptr);

/// n seeded runs fanned out over `threads` workers (0: hardware concurrency).
/// The report does not depend on the thread count.
SweepReport sweep_random_init(const ScenarioConfig& cfg, int n, const Dispersion& d = {},
                              unsigned threads = 0);

struct OrderCheck {
    double error_coarse = 0.0;  // |x(dt) - x(dt/2)|
    double error_fine = 0.0;    // |x(dt/2) - x(dt/4)|
    double observed_order = 0.0;
};

/// Richardson order estimate from final states at dt, dt/2, dt/4.
OrderCheck order_check(const ScenarioConfig& cfg);

}  // namespace vscsync
