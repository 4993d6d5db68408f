#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vscsync/control.hpp"
#include "vscsync/equilibrium.hpp"
#include "vscsync/estimator.hpp"
#include "vscsync/metrics.hpp"
#include "vscsync/observer.hpp"
#include "vscsync/plant.hpp"

namespace vscsync {

enum class DetectorMode { Srf, Atan, BaselineSrf, BaselineAtan };

enum class ControlTiming { Continuous, ZeroOrderHold };

struct ExplicitReference {
    double phi_ref = 0.0;
    Vec2 i_ref = Vec2::Zero();
    /// PCC voltage angle used by the baseline PLL; derived from the target
    /// equilibrium when absent.
    std::optional<double> phi_pcc;
};

struct ReferenceStep {
    double t = 0.0;
    std::variant<ReferenceRequest, ExplicitReference> target;
};

/// Disturbance: at time t set (or scale) the parameter named by path, e.g.
/// "plant.V_g" or "observer.L_g".
struct ParameterEvent {
    double t = 0.0;
    std::string path;
    double value = 0.0;
    bool scale = false;
};

struct InitSpec {
    /// Empty: equilibrium of the first reference under the plant parameters.
    std::optional<PlantState> plant;
    double delta_offset = 0.0;
    Vec2 z12 = Vec2::Zero();
    Vec2 z34 = Vec2::Zero();
    /// Empty: col(omega_nominal, 0, 0).
    std::optional<Vec3> theta0;
    /// Start the estimator at the true parameter vector.
    bool theta_matched = false;
    /// Empty: lock value -omega_nominal / K_I.
    std::optional<double> pll_xc;
    Vec2 current_xc = Vec2::Zero();
    /// Seed F[y12] with y12(0); otherwise all filter states start at zero.
    bool seed_filter = true;
};

struct ScenarioConfig {
    std::string name = "custom";
    SystemParams plant;
    ObserverModel observer;
    ConverterModel converter;
    /// Controller-side prior knowledge: PLL centre frequency and the scale
    /// of the degenerate-estimate threshold.
    double omega_nominal = 100 * kPi;
    double V_g_nominal = 261e3;
    double x_min_rel = 1e-6;

    PllGains pll;
    CurrentGains current;
    EstimatorGains estimator;
    DetectorMode detector = DetectorMode::Atan;
    ControlTiming timing = ControlTiming::Continuous;

    std::vector<ReferenceStep> references;
    std::vector<ParameterEvent> events;

    double dt = 20e-6;
    double t_end = 2.0;
    InitSpec init;
    std::uint64_t seed = 1;

    PowerFlowOptions power_flow;
    double rated_power = 1e9;
    double pe_window = 0.1;
    int record_stride = 1;
    bool require_convergence = false;
    MetricsOptions metrics;

    /// Throws ConfigError.
    void validate() const;
    /// Nominal V_ref = sqrt(3/2) V_g_nominal.
    double nominal_v_ref() const;
    /// rated_power / (power_scale * V_ref).
    double rated_current() const;
};

/// References after power-flow resolution.
struct ActiveReference {
    double t = 0.0;
    double phi_ref = 0.0;
    Vec2 i_ref = Vec2::Zero();
    double phi_pcc = 0.0;
};

std::vector<ActiveReference> resolve_references(const ScenarioConfig& cfg);

/// Complete monolithic state integrated by RK4.
struct ClosedLoopState {
    PlantState plant;
    ObserverState observer;
    EstimatorState estimator;
    double pll_xc = 0.0;
    Vec2 current_xc = Vec2::Zero();
};

inline constexpr int kStateDim = 40;
using StateVector = Eigen::Matrix<double, kStateDim, 1>;

StateVector pack(const ClosedLoopState& s);
ClosedLoopState unpack(const StateVector& v);

struct RunOutput {
    std::vector<Sample> series;
    Metrics metrics;
    std::vector<ActiveReference> references;
    ClosedLoopState final_state;
};

/// Initial closed-loop state per cfg.init.
ClosedLoopState initial_state(const ScenarioConfig& cfg, const std::vector<ActiveReference>& refs);

/// Fixed-step RK4 over plant + observer + estimator + controllers. Events and
/// reference switches are applied at step boundaries. Never throws on
/// divergence: the run stops and the metrics carry the flag.
RunOutput integrate(const ScenarioConfig& cfg);

}  // namespace vscsync
