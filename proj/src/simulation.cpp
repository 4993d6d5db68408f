#include "vscsync/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "vscsync/errors.hpp"
#include "vscsync/integrator.hpp"

namespace vscsync {

namespace {

const std::set<std::string>& known_paths()
{
    static const std::set<std::string> paths = {
        "plant.r_g",    "plant.L_g",    "plant.C",      "plant.r",      "plant.L",
        "plant.V_g",    "plant.omega",  "plant.V_dc",   "observer.r_g", "observer.L_g",
        "converter.r",  "converter.L",
    };
    return paths;
}

double* parameter_slot(const std::string& path, SystemParams& plant, ObserverModel& obs,
                       ConverterModel& conv)
{
    if (path == "plant.r_g") return &plant.r_g;
    if (path == "plant.L_g") return &plant.L_g;
    if (path == "plant.C") return &plant.C;
    if (path == "plant.r") return &plant.r;
    if (path == "plant.L") return &plant.L;
    if (path == "plant.V_g") return &plant.V_g;
    if (path == "plant.omega") return &plant.omega;
    if (path == "plant.V_dc") return &plant.V_dc;
    if (path == "observer.r_g") return &obs.r_g;
    if (path == "observer.L_g") return &obs.L_g;
    if (path == "converter.r") return &conv.r;
    if (path == "converter.L") return &conv.L;
    return nullptr;
}

/// Parameters that may change while the run is in flight.
struct Runtime {
    SystemParams plant;
    ObserverModel observer;
    ConverterModel converter;
};

struct ControlSignals {
    Mat23 w = Mat23::Zero();
    RegressorPair reg;
    GridEstimate estimate;
    double e = 0.0;
    bool degenerate = false;
    PllOutput pll;
    CurrentOutput current;
};

/// Everything the controller computes. Reads measurements and controller
/// states only; the plant angle and the true grid source are not inputs here.
ControlSignals evaluate_controls(const MeasuredOutput& y, const ObserverState& obs,
                                 const EstimatorState& est, double pll_xc, const Vec2& current_xc,
                                 const ActiveReference& ref, const ScenarioConfig& cfg,
                                 const ObserverModel& model, const ConverterModel& conv)
{
    ControlSignals c;
    c.w = w_matrix(obs, y);
    c.reg = regressor(obs, y, model.lambda);
    c.estimate = reconstruct(c.w, est.theta, model.L_g);

    std::optional<double> e;
    switch (cfg.detector) {
        case DetectorMode::Atan:
            e = phase_detector_atan(c.estimate.xhat, ref.phi_ref,
                                    cfg.x_min_rel * cfg.V_g_nominal / model.L_g);
            break;
        case DetectorMode::Srf:
            e = phase_detector_srf(c.estimate.xhat, ref.phi_ref);
            break;
        case DetectorMode::BaselineAtan:
            e = baseline_detector(DqVec::from(y.v), ref.phi_pcc, DetectorKind::Atan,
                                  cfg.x_min_rel * cfg.V_g_nominal);
            break;
        case DetectorMode::BaselineSrf:
            e = baseline_detector(DqVec::from(y.v), ref.phi_pcc, DetectorKind::Srf, 0.0);
            break;
    }
    c.degenerate = !e.has_value();
    c.e = e.value_or(0.0);
    c.pll = pll_update(pll_xc, c.e, cfg.pll);
    c.current = current_controller(current_xc, y, ref.i_ref, c.pll.u1, cfg.current, conv);
    return c;
}

struct HeldInputs {
    PlantInput u;
    double pll_dot = 0.0;
    Vec2 current_dot = Vec2::Zero();
};

double orthogonality_error(const Mat2& phi)
{
    const double a = (phi.transpose() * phi - Mat2::Identity()).cwiseAbs().maxCoeff();
    return std::max(a, std::abs(phi.determinant() - 1.0));
}

Vec2 true_x(const PlantState& s, const SystemParams& p)
{
    return p.V_g * Vec2(std::cos(s.delta), std::sin(s.delta)) / p.L_g;
}

long long step_index(double t, double dt)
{
    return std::llround(t / dt);
}

}  // namespace

void ScenarioConfig::validate() const
{
    plant.validate();
    pll.validate();
    current.validate();
    estimator.validate();
    if (!(observer.lambda > 0.0) || !(observer.L_g > 0.0) || !(observer.r_g > 0.0)) {
        throw ConfigError("observer model requires lambda, r_g, L_g > 0");
    }
    if (!(converter.L > 0.0) || !(converter.r >= 0.0)) {
        throw ConfigError("converter model requires L > 0, r >= 0");
    }
    if (!(dt > 0.0) || !(t_end > dt)) {
        throw ConfigError("integrator requires dt > 0 and t_end > dt");
    }
    if (!(omega_nominal > 0.0) || !(V_g_nominal > 0.0) || !(rated_power > 0.0)) {
        throw ConfigError("omega_nominal, V_g_nominal and rated_power must be > 0");
    }
    if (record_stride < 1) {
        throw ConfigError("record_stride must be >= 1");
    }
    if (!(pe_window > 0.0)) {
        throw ConfigError("pe_window must be > 0");
    }
    if (references.empty()) {
        throw ConfigError("at least one reference is required");
    }
    if (references.front().t != 0.0) {
        throw ConfigError("the first reference must start at t = 0");
    }
    double last = -1.0;
    for (const auto& r : references) {
        if (r.t < last || r.t < 0.0 || r.t > t_end) {
            throw ConfigError("reference times must be sorted and within [0, t_end]");
        }
        last = r.t;
        if (const auto* req = std::get_if<ReferenceRequest>(&r.target)) {
            if (std::abs(req->P_ref) > rated_power) {
                throw ConfigError("P_ref outside +- rated power");
            }
            if (!(req->V_ref > 0.0)) {
                throw ConfigError("V_ref must be > 0");
            }
        }
    }
    for (const auto& e : events) {
        if (e.t < 0.0 || e.t > t_end) {
            throw ConfigError("event time outside [0, t_end]");
        }
        if (!known_paths().contains(e.path)) {
            throw ConfigError("unknown event parameter path: " + e.path);
        }
        if (!std::isfinite(e.value)) {
            throw ConfigError("event value must be finite");
        }
    }
}

double ScenarioConfig::nominal_v_ref() const
{
    return std::sqrt(1.5) * V_g_nominal;
}

double ScenarioConfig::rated_current() const
{
    return rated_power / (power_flow.power_scale * nominal_v_ref());
}

std::vector<ActiveReference> resolve_references(const ScenarioConfig& cfg)
{
    // The operator solves the power flow with its own model of the grid.
    SystemParams model = cfg.plant;
    model.r_g = cfg.observer.r_g;
    model.L_g = cfg.observer.L_g;
    model.V_g = cfg.V_g_nominal;

    std::vector<ActiveReference> out;
    for (const auto& step : cfg.references) {
        ActiveReference a;
        a.t = step.t;
        if (const auto* req = std::get_if<ReferenceRequest>(&step.target)) {
            const ReferenceSolution s = solve_references(*req, model, cfg.omega_nominal, cfg.power_flow);
            a.phi_ref = s.phi_ref;
            a.i_ref = s.i_ref;
            a.phi_pcc = s.phi_pcc;
        } else {
            const auto& ex = std::get<ExplicitReference>(step.target);
            a.phi_ref = ex.phi_ref;
            a.i_ref = ex.i_ref;
            if (ex.phi_pcc) {
                a.phi_pcc = *ex.phi_pcc;
            } else {
                const auto eq = assignable_equilibrium(ex.phi_ref, ex.i_ref, model, cfg.omega_nominal);
                a.phi_pcc = std::atan2(eq.state.v.y(), eq.state.v.x());
            }
        }
        out.push_back(a);
    }
    return out;
}

StateVector pack(const ClosedLoopState& s)
{
    StateVector v;
    int k = 0;
    auto put2 = [&](const Vec2& x) {
        v(k++) = x(0);
        v(k++) = x(1);
    };
    put2(s.plant.i_g);
    put2(s.plant.v);
    put2(s.plant.i);
    v(k++) = s.plant.delta;
    put2(s.observer.z12);
    put2(s.observer.z34);
    for (int j = 0; j < 4; ++j) v(k++) = s.observer.phi(j);
    put2(s.observer.fy);
    put2(s.observer.fq);
    for (int j = 0; j < 6; ++j) v(k++) = s.observer.fw(j);
    for (int j = 0; j < 3; ++j) v(k++) = s.estimator.theta(j);
    for (int j = 0; j < 9; ++j) v(k++) = s.estimator.F(j);
    v(k++) = s.pll_xc;
    put2(s.current_xc);
    return v;
}

ClosedLoopState unpack(const StateVector& v)
{
    ClosedLoopState s;
    int k = 0;
    auto get2 = [&]() {
        Vec2 x(v(k), v(k + 1));
        k += 2;
        return x;
    };
    s.plant.i_g = get2();
    s.plant.v = get2();
    s.plant.i = get2();
    s.plant.delta = v(k++);
    s.observer.z12 = get2();
    s.observer.z34 = get2();
    for (int j = 0; j < 4; ++j) s.observer.phi(j) = v(k++);
    s.observer.fy = get2();
    s.observer.fq = get2();
    for (int j = 0; j < 6; ++j) s.observer.fw(j) = v(k++);
    for (int j = 0; j < 3; ++j) s.estimator.theta(j) = v(k++);
    for (int j = 0; j < 9; ++j) s.estimator.F(j) = v(k++);
    s.pll_xc = v(k++);
    s.current_xc = get2();
    return s;
}

ClosedLoopState initial_state(const ScenarioConfig& cfg, const std::vector<ActiveReference>& refs)
{
    ClosedLoopState s;
    const ActiveReference& r0 = refs.front();
    if (cfg.init.plant) {
        s.plant = *cfg.init.plant;
    } else {
        s.plant = assignable_equilibrium(r0.phi_ref, r0.i_ref, cfg.plant, cfg.plant.omega).state;
    }
    s.plant.delta += cfg.init.delta_offset;

    const MeasuredOutput y0 = MeasuredOutput::from(s.plant);
    s.observer = ObserverState::initial(y0, cfg.init.z12, cfg.init.z34);
    if (!cfg.init.seed_filter) {
        s.observer.fy.setZero();
    }

    Vec3 theta0(cfg.omega_nominal, 0.0, 0.0);
    if (cfg.init.theta_matched) {
        theta0 = true_theta(s.observer, y0, true_x(s.plant, cfg.plant), cfg.plant.omega);
    } else if (cfg.init.theta0) {
        theta0 = *cfg.init.theta0;
    }
    s.estimator = EstimatorState::initial(theta0, cfg.estimator);
    s.pll_xc = cfg.init.pll_xc.value_or(-cfg.omega_nominal / cfg.pll.ki);
    s.current_xc = cfg.init.current_xc;
    return s;
}

RunOutput integrate(const ScenarioConfig& cfg)
{
    cfg.validate();
    RunOutput out;
    out.references = resolve_references(cfg);
    const auto& refs = out.references;

    Runtime rt{cfg.plant, cfg.observer, cfg.converter};
    ClosedLoopState state = initial_state(cfg, refs);
    lsff_post_step(state.estimator, cfg.estimator, cfg.dt);
    StateVector xv = pack(state);

    const double dt = cfg.dt;
    const long long n_steps = step_index(cfg.t_end, dt);

    std::vector<ParameterEvent> events = cfg.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
    std::size_t next_event = 0;
    std::size_t ref_index = 0;

    auto truth_theta = [&]() {
        return true_theta(state.observer, MeasuredOutput::from(state.plant),
                          true_x(state.plant, rt.plant), rt.plant.omega);
    };
    Vec3 theta_true = truth_theta();

    PeMonitor pe(cfg.pe_window);
    const double current_limit = 1e3 * cfg.rated_current();
    const double voltage_limit = 1e3 * cfg.V_g_nominal;
    if (cfg.record_stride == 1) {
        out.series.reserve(static_cast<std::size_t>(n_steps) + 1);
    }

    for (long long k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;

        bool plant_changed = false;
        while (next_event < events.size() && step_index(events[next_event].t, dt) <= k) {
            const auto& ev = events[next_event++];
            double* slot = parameter_slot(ev.path, rt.plant, rt.observer, rt.converter);
            *slot = ev.scale ? *slot * ev.value : ev.value;
            plant_changed = plant_changed || ev.path.starts_with("plant.");
        }
        if (plant_changed) {
            theta_true = truth_theta();
        }
        while (ref_index + 1 < refs.size() && step_index(refs[ref_index + 1].t, dt) <= k) {
            ++ref_index;
        }
        const ActiveReference& ref = refs[ref_index];

        const MeasuredOutput y = MeasuredOutput::from(state.plant);
        const ControlSignals c =
            evaluate_controls(y, state.observer, state.estimator, state.pll_xc, state.current_xc, ref,
                              cfg, rt.observer, rt.converter);
        pe.push(t, c.reg.omega);

        const bool last = k >= n_steps;
        if (k % cfg.record_stride == 0 || last) {
            Sample s;
            s.t = t;
            s.i_g = state.plant.i_g;
            s.v = state.plant.v;
            s.i = state.plant.i;
            s.delta = state.plant.delta;
            s.u1 = c.pll.u1;
            s.u = c.current.u;
            s.e_detector = c.e;
            s.xhat = c.estimate.xhat;
            s.theta = state.estimator.theta;
            s.norm_F = gain_norm(state.estimator.F, cfg.estimator.norm);
            s.vg_hat = c.estimate.amplitude;
            s.omega_hat_hz = c.estimate.omega / (2.0 * kPi);
            const auto g = pe.current();
            s.pe_min_eig = g ? g->min_eig : std::numeric_limits<double>::quiet_NaN();

            s.phi_ref = ref.phi_ref;
            s.i_ref = ref.i_ref;
            s.x_true = true_x(state.plant, rt.plant);
            s.theta_true = theta_true;
            s.gpebo_rel_err = (s.x_true - c.w * theta_true).norm() / s.x_true.norm();
            s.y_norm = c.reg.Y.norm();
            s.lre_residual = (c.reg.Y - c.reg.omega * theta_true).norm();
            s.phi_orth_err = orthogonality_error(state.observer.phi);
            s.F_min_eig = min_eigenvalue(state.estimator.F);
            s.degenerate = c.degenerate;
            s.saturated = modulation_indices(DqVec::from(c.current.u), rt.plant).saturated;
            out.series.push_back(s);
        }
        if (last) {
            break;
        }

        std::optional<HeldInputs> held;
        if (cfg.timing == ControlTiming::ZeroOrderHold) {
            held = HeldInputs{{c.pll.u1, c.current.u}, c.pll.xc_dot, c.current.xc_dot};
        }
        const bool capped = state.estimator.capped;
        auto deriv = [&](double, const StateVector& v) -> StateVector {
            ClosedLoopState s = unpack(v);
            s.estimator.capped = capped;
            const MeasuredOutput ys = MeasuredOutput::from(s.plant);
            const ControlSignals cs = evaluate_controls(ys, s.observer, s.estimator, s.pll_xc,
                                                        s.current_xc, ref, cfg, rt.observer,
                                                        rt.converter);
            PlantInput u{cs.pll.u1, cs.current.u};
            double pll_dot = cs.pll.xc_dot;
            Vec2 current_dot = cs.current.xc_dot;
            if (held) {
                u = held->u;
                pll_dot = held->pll_dot;
                current_dot = held->current_dot;
            }
            ClosedLoopState d;
            d.plant = plant_deriv_dq(s.plant, u, rt.plant);
            d.observer = observer_deriv(s.observer, ys, u.u1, rt.observer);
            d.estimator = lsff_deriv(s.estimator, cs.reg, cfg.estimator);
            d.pll_xc = pll_dot;
            d.current_xc = current_dot;
            return pack(d);
        };
        xv = rk4_step(deriv, t, xv, dt);

        state = unpack(xv);
        state.estimator.capped = capped;
        lsff_post_step(state.estimator, cfg.estimator, dt);
        if (rt.observer.renormalize_phi) {
            state.observer.phi = nearest_rotation(state.observer.phi);
        }
        xv = pack(state);

        const bool finite = xv.allFinite();
        const bool bounded = finite && state.plant.i.norm() < current_limit &&
                             state.plant.i_g.norm() < current_limit &&
                             state.plant.v.norm() < voltage_limit;
        if (!bounded) {
            out.metrics.diverged = true;
            out.metrics.divergence_time = static_cast<double>(k + 1) * dt;
            break;
        }
    }

    const bool diverged = out.metrics.diverged;
    const auto divergence_time = out.metrics.divergence_time;
    out.metrics = compute_metrics(out.series, cfg.metrics, cfg.rated_current(), cfg.V_g_nominal);
    out.metrics.diverged = diverged;
    out.metrics.divergence_time = divergence_time;
    if (diverged) {
        out.metrics.converged = false;
        out.metrics.oscillating = false;
    }
    out.final_state = state;
    return out;
}

}  // namespace vscsync
