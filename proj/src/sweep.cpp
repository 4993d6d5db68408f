#include "vscsync/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "vscsync/errors.hpp"

namespace vscsync {

ScenarioConfig randomized_config(const ScenarioConfig& cfg, int index, const Dispersion& d,
                                 std::uint64_t* seed_out, double* offset_out)
{
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(cfg.seed >> 32), static_cast<std::uint32_t>(index)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    const std::uint64_t run_seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    std::mt19937_64 rng(run_seed);
    auto uniform = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    ScenarioConfig c = cfg;
    c.init.delta_offset = uniform(d.delta_min, d.delta_max);
    c.init.theta_matched = false;
    c.init.theta0 = Vec3(2.0 * kPi * uniform(d.theta1_hz_min, d.theta1_hz_max),
                         uniform(-d.theta_tail_scale, d.theta_tail_scale),
                         uniform(-d.theta_tail_scale, d.theta_tail_scale));
    c.init.z12 = Vec2(uniform(-d.z_scale, d.z_scale), uniform(-d.z_scale, d.z_scale));
    c.init.z34 = Vec2(uniform(-d.z_scale, d.z_scale), uniform(-d.z_scale, d.z_scale));
    c.init.pll_xc = -cfg.omega_nominal / cfg.pll.ki * (1.0 + uniform(-d.pll_xc_rel, d.pll_xc_rel));
    c.record_stride = std::max(cfg.record_stride, 10);
    if (seed_out) {
        *seed_out = run_seed;
    }
    if (offset_out) {
        *offset_out = c.init.delta_offset;
    }
    return c;
}

SweepReport sweep_random_init(const ScenarioConfig& cfg, int n, const Dispersion& d, unsigned threads)
{
    if (n < 1) {
        throw ConfigError("sweep requires n >= 1");
    }
    cfg.validate();
    SweepReport report;
    report.n = n;
    report.runs.resize(static_cast<std::size_t>(n));

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next++; i < n; i = next++) {
            SweepRun& run = report.runs[static_cast<std::size_t>(i)];
            run.index = i;
            const ScenarioConfig c = randomized_config(cfg, i, d, &run.seed, &run.delta_offset);
            const RunOutput out = integrate(c);
            run.converged = out.metrics.converged;
            run.diverged = out.metrics.diverged;
            run.settling_time = out.metrics.delta_error_deg.settling_time;
            run.final_delta_error_deg = out.metrics.delta_error_deg.final_value;
        }
    };
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }

    for (const auto& run : report.runs) {
        if (run.converged) {
            ++report.converged;
            if (run.settling_time &&
                (!report.worst_settling_time || *run.settling_time > *report.worst_settling_time)) {
                report.worst_settling_time = run.settling_time;
            }
        }
    }
    report.fraction = static_cast<double>(report.converged) / n;
    return report;
}

namespace {

/// Block boundaries of StateVector, for per-block scaling.
constexpr int kBlocks[] = {0, 2, 4, 6, 7, 9, 11, 15, 17, 19, 25, 28, 37, 38, 40};

StateVector block_scale(const StateVector& x)
{
    StateVector s;
    for (std::size_t b = 0; b + 1 < std::size(kBlocks); ++b) {
        const int lo = kBlocks[b];
        const int len = kBlocks[b + 1] - lo;
        const double m = x.segment(lo, len).cwiseAbs().maxCoeff();
        for (int j = lo; j < lo + len; ++j) {
            s(j) = std::max({std::abs(x(j)), 1e-3 * m, 1e-300});
        }
    }
    return s;
}

}  // namespace

OrderCheck order_check(const ScenarioConfig& cfg)
{
    auto final_state = [&](double dt) {
        ScenarioConfig c = cfg;
        c.dt = dt;
        c.record_stride = std::numeric_limits<int>::max();
        const RunOutput out = integrate(c);
        if (out.metrics.diverged) {
            throw NonConvergence("order check run diverged");
        }
        return pack(out.final_state);
    };
    const StateVector x1 = final_state(cfg.dt);
    const StateVector x2 = final_state(cfg.dt / 2);
    const StateVector x4 = final_state(cfg.dt / 4);
    const StateVector scale = block_scale(x4);

    OrderCheck oc;
    oc.error_coarse = ((x1 - x2).array() / scale.array()).matrix().norm();
    oc.error_fine = ((x2 - x4).array() / scale.array()).matrix().norm();
    oc.observed_order = std::log2(oc.error_coarse / oc.error_fine);
    return oc;
}

}  // namespace vscsync
