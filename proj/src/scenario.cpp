#include "vscsync/scenario.hpp"

#include <fstream>
#include <map>

#include "vscsync/errors.hpp"

namespace vscsync {

using nlohmann::json;

namespace {

ReferenceStep request_at(double t, double power, double v_ref)
{
    return ReferenceStep{t, ReferenceRequest{power, v_ref}};
}

/// Steady 0.75 p.u. operation with a single disturbance at t = 1 s.
ScenarioConfig disturbed(const std::string& name, std::vector<ParameterEvent> events)
{
    ScenarioConfig c;
    c.name = name;
    c.references = {request_at(0.0, 0.75e9, c.nominal_v_ref())};
    c.events = std::move(events);
    return c;
}

template <class Enum>
Enum enum_from(const json& j, const std::map<std::string, Enum>& names, const char* what)
{
    const auto s = j.get<std::string>();
    const auto it = names.find(s);
    if (it == names.end()) {
        throw ConfigError(std::string("unknown ") + what + ": " + s);
    }
    return it->second;
}

template <class Enum>
std::string enum_name(Enum v, const std::map<std::string, Enum>& names)
{
    for (const auto& [k, e] : names) {
        if (e == v) return k;
    }
    return "?";
}

const std::map<std::string, DetectorMode> kDetectors = {
    {"srf", DetectorMode::Srf},
    {"atan", DetectorMode::Atan},
    {"baseline_srf", DetectorMode::BaselineSrf},
    {"baseline_atan", DetectorMode::BaselineAtan},
};
const std::map<std::string, ControlTiming> kTimings = {
    {"continuous", ControlTiming::Continuous},
    {"zoh", ControlTiming::ZeroOrderHold},
};
const std::map<std::string, GainNorm> kNorms = {
    {"frobenius", GainNorm::Frobenius},
    {"spectral", GainNorm::Spectral},
};
const std::map<std::string, FreezeMode> kFreezes = {
    {"literal", FreezeMode::Literal},
    {"hysteresis", FreezeMode::Hysteresis},
};

void read(const json& j, const char* key, double& out)
{
    if (j.contains(key)) out = j.at(key).get<double>();
}

void read(const json& j, const char* key, int& out)
{
    if (j.contains(key)) out = j.at(key).get<int>();
}

void read(const json& j, const char* key, bool& out)
{
    if (j.contains(key)) out = j.at(key).get<bool>();
}

Vec2 vec2(const json& j)
{
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError("expected a 2-vector");
    return Vec2(v[0], v[1]);
}

Vec3 vec3(const json& j)
{
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("expected a 3-vector");
    return Vec3(v[0], v[1], v[2]);
}

/// Scalar k means k I.
Mat2 mat2(const json& j)
{
    if (j.is_number()) {
        return j.get<double>() * Mat2::Identity();
    }
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.size() != 2 || rows[0].size() != 2 || rows[1].size() != 2) {
        throw ConfigError("expected a scalar or 2x2 matrix");
    }
    Mat2 m;
    m << rows[0][0], rows[0][1], rows[1][0], rows[1][1];
    return m;
}

json to_json(const Vec2& v) { return json::array({v(0), v(1)}); }
json to_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }
json to_json(const Mat2& m)
{
    return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

PlantState plant_state(const json& j)
{
    PlantState s;
    if (j.contains("i_g")) s.i_g = vec2(j.at("i_g"));
    if (j.contains("v")) s.v = vec2(j.at("v"));
    if (j.contains("i")) s.i = vec2(j.at("i"));
    read(j, "delta", s.delta);
    return s;
}

void apply_plant(const json& j, ScenarioConfig& c)
{
    SystemParams& p = c.plant;
    read(j, "r_g", p.r_g);
    read(j, "L_g", p.L_g);
    read(j, "C", p.C);
    read(j, "r", p.r);
    read(j, "L", p.L);
    read(j, "V_g", p.V_g);
    read(j, "omega", p.omega);
    read(j, "V_dc", p.V_dc);
    if (j.contains("m_min")) p.m_min = j.at("m_min").get<double>();
    if (j.contains("m_max")) p.m_max = j.at("m_max").get<double>();
}

void apply_init(const json& j, InitSpec& init)
{
    if (j.contains("plant")) {
        const auto& p = j.at("plant");
        if (p.is_string()) {
            if (p.get<std::string>() != "equilibrium") {
                throw ConfigError("init.plant must be \"equilibrium\" or an object");
            }
            init.plant.reset();
        } else {
            init.plant = plant_state(p);
        }
    }
    read(j, "delta_offset", init.delta_offset);
    if (j.contains("z12")) init.z12 = vec2(j.at("z12"));
    if (j.contains("z34")) init.z34 = vec2(j.at("z34"));
    if (j.contains("theta0")) {
        const auto& t = j.at("theta0");
        init.theta_matched = false;
        init.theta0.reset();
        if (t.is_string()) {
            const auto s = t.get<std::string>();
            if (s == "matched") {
                init.theta_matched = true;
            } else if (s != "nominal") {
                throw ConfigError("init.theta0 must be \"nominal\", \"matched\" or a 3-vector");
            }
        } else {
            init.theta0 = vec3(t);
        }
    }
    if (j.contains("pll_xc")) {
        if (j.at("pll_xc").is_null()) {
            init.pll_xc.reset();
        } else {
            init.pll_xc = j.at("pll_xc").get<double>();
        }
    }
    if (j.contains("current_xc")) init.current_xc = vec2(j.at("current_xc"));
    read(j, "seed_filter", init.seed_filter);
}

ReferenceStep reference_step(const json& j, double default_v_ref)
{
    ReferenceStep r;
    read(j, "t", r.t);
    if (j.contains("P_ref")) {
        ReferenceRequest req{j.at("P_ref").get<double>(), default_v_ref};
        read(j, "V_ref", req.V_ref);
        r.target = req;
    } else if (j.contains("phi_ref") && j.contains("i_ref")) {
        ExplicitReference ex;
        ex.phi_ref = j.at("phi_ref").get<double>();
        ex.i_ref = vec2(j.at("i_ref"));
        if (j.contains("phi_pcc")) ex.phi_pcc = j.at("phi_pcc").get<double>();
        r.target = ex;
    } else {
        throw ConfigError("a reference needs P_ref, or phi_ref and i_ref");
    }
    return r;
}

ParameterEvent parameter_event(const json& j)
{
    ParameterEvent e;
    e.t = j.at("t").get<double>();
    e.path = j.at("path").get<std::string>();
    if (j.contains("scale")) {
        e.value = j.at("scale").get<double>();
        e.scale = true;
    } else {
        e.value = j.at("value").get<double>();
    }
    return e;
}

ScenarioConfig apply(const json& j, ScenarioConfig c)
{
    if (!j.is_object()) {
        throw ConfigError("scenario must be a JSON object");
    }
    if (j.contains("name")) c.name = j.at("name").get<std::string>();

    if (j.contains("plant")) {
        const auto& p = j.at("plant");
        apply_plant(p, c);
        // Unless given separately, the controller-side models follow the plant.
        const json none = json::object();
        const auto& o = j.contains("observer") ? j.at("observer") : none;
        const auto& v = j.contains("converter") ? j.at("converter") : none;
        if (p.contains("r_g") && !o.contains("r_g")) c.observer.r_g = c.plant.r_g;
        if (p.contains("L_g") && !o.contains("L_g")) c.observer.L_g = c.plant.L_g;
        if (p.contains("r") && !v.contains("r")) c.converter.r = c.plant.r;
        if (p.contains("L") && !v.contains("L")) c.converter.L = c.plant.L;
        if (p.contains("V_g") && !j.contains("V_g_nominal")) c.V_g_nominal = c.plant.V_g;
        if (p.contains("omega") && !j.contains("omega_nominal")) c.omega_nominal = c.plant.omega;
    }
    if (j.contains("observer")) {
        const auto& o = j.at("observer");
        read(o, "r_g", c.observer.r_g);
        read(o, "L_g", c.observer.L_g);
        read(o, "lambda", c.observer.lambda);
        read(o, "renormalize_phi", c.observer.renormalize_phi);
    }
    if (j.contains("converter")) {
        read(j.at("converter"), "r", c.converter.r);
        read(j.at("converter"), "L", c.converter.L);
    }
    read(j, "omega_nominal", c.omega_nominal);
    read(j, "V_g_nominal", c.V_g_nominal);
    read(j, "x_min_rel", c.x_min_rel);

    if (j.contains("pll")) {
        read(j.at("pll"), "kp", c.pll.kp);
        read(j.at("pll"), "ki", c.pll.ki);
    }
    if (j.contains("current")) {
        const auto& g = j.at("current");
        if (g.contains("kp")) c.current.kp = mat2(g.at("kp"));
        if (g.contains("ki")) c.current.ki = mat2(g.at("ki"));
    }
    if (j.contains("estimator")) {
        const auto& g = j.at("estimator");
        read(g, "alpha", c.estimator.alpha);
        read(g, "beta", c.estimator.beta);
        read(g, "M", c.estimator.M);
        read(g, "f0", c.estimator.f0);
        if (g.contains("norm")) c.estimator.norm = enum_from(g.at("norm"), kNorms, "norm");
        if (g.contains("freeze")) c.estimator.freeze = enum_from(g.at("freeze"), kFreezes, "freeze mode");
    }
    if (j.contains("detector")) c.detector = enum_from(j.at("detector"), kDetectors, "detector");
    if (j.contains("timing")) c.timing = enum_from(j.at("timing"), kTimings, "timing");

    read(j, "dt", c.dt);
    read(j, "t_end", c.t_end);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    read(j, "rated_power", c.rated_power);
    read(j, "pe_window", c.pe_window);
    read(j, "record_stride", c.record_stride);
    read(j, "require_convergence", c.require_convergence);

    if (j.contains("power_flow")) {
        const auto& pf = j.at("power_flow");
        read(pf, "power_scale", c.power_flow.power_scale);
        read(pf, "delta_min", c.power_flow.delta_min);
        read(pf, "delta_max", c.power_flow.delta_max);
        read(pf, "grid_points", c.power_flow.grid_points);
        read(pf, "max_iterations", c.power_flow.max_iterations);
    }
    if (j.contains("metrics")) {
        const auto& m = j.at("metrics");
        read(m, "sync_band_deg", c.metrics.sync_band_deg);
        read(m, "current_band_frac", c.metrics.current_band_frac);
        read(m, "omega_band_hz", c.metrics.omega_band_hz);
        read(m, "vg_band_frac", c.metrics.vg_band_frac);
        read(m, "settle_window", c.metrics.settle_window);
    }
    if (j.contains("init")) apply_init(j.at("init"), c.init);

    // After everything else so that V_ref defaults to the final nominal voltage.
    if (j.contains("references")) {
        c.references.clear();
        for (const auto& r : j.at("references")) {
            c.references.push_back(reference_step(r, c.nominal_v_ref()));
        }
    }
    if (j.contains("events")) {
        c.events.clear();
        for (const auto& e : j.at("events")) {
            c.events.push_back(parameter_event(e));
        }
    }
    return c;
}

}  // namespace

std::vector<std::string> preset_names()
{
    return {"nominal", "voltage_drop", "frequency_drop", "scr_trip", "baseline_comparison"};
}

ScenarioConfig preset(const std::string& name)
{
    if (name == "nominal") {
        ScenarioConfig c;
        c.name = name;
        const double v = c.nominal_v_ref();
        c.references = {request_at(0.0, 0.0, v),      request_at(0.25, 0.4e9, v),
                        request_at(0.6, 0.9e9, v),    request_at(0.95, 0.1e9, v),
                        request_at(1.3, -0.5e9, v),   request_at(1.65, 0.75e9, v)};
        return c;
    }
    if (name == "voltage_drop") {
        return disturbed(name, {{1.0, "plant.V_g", 0.7, true}});
    }
    if (name == "frequency_drop") {
        return disturbed(name, {{1.0, "plant.omega", 98.0 * kPi, false}});
    }
    if (name == "scr_trip") {
        return disturbed(name, {{1.0, "plant.L_g", 4.0 / 3.0, true}, {1.0, "plant.r_g", 4.0 / 3.0, true}});
    }
    if (name == "baseline_comparison") {
        ScenarioConfig c;
        c.name = name;
        c.detector = DetectorMode::BaselineAtan;
        const double v = c.nominal_v_ref();
        c.references = {request_at(0.0, 0.4e9, v), request_at(1.0, 0.9e9, v)};
        return c;
    }
    throw ConfigError("unknown scenario preset: " + name);
}

ScenarioConfig config_from_json(const json& j, ScenarioConfig base)
{
    try {
        if (j.is_object() && j.contains("preset")) {
            base = preset(j.at("preset").get<std::string>());
        }
        ScenarioConfig c = apply(j, std::move(base));
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed scenario: ") + e.what());
    }
}

json config_to_json(const ScenarioConfig& c)
{
    json j;
    j["name"] = c.name;
    json p = {{"r_g", c.plant.r_g}, {"L_g", c.plant.L_g}, {"C", c.plant.C},     {"r", c.plant.r},
              {"L", c.plant.L},     {"V_g", c.plant.V_g}, {"omega", c.plant.omega}, {"V_dc", c.plant.V_dc}};
    if (c.plant.m_min) p["m_min"] = *c.plant.m_min;
    if (c.plant.m_max) p["m_max"] = *c.plant.m_max;
    j["plant"] = p;
    j["observer"] = {{"r_g", c.observer.r_g}, {"L_g", c.observer.L_g}, {"lambda", c.observer.lambda},
                      {"renormalize_phi", c.observer.renormalize_phi}};
    j["converter"] = {{"r", c.converter.r}, {"L", c.converter.L}};
    j["omega_nominal"] = c.omega_nominal;
    j["V_g_nominal"] = c.V_g_nominal;
    j["x_min_rel"] = c.x_min_rel;
    j["pll"] = {{"kp", c.pll.kp}, {"ki", c.pll.ki}};
    j["current"] = {{"kp", to_json(c.current.kp)}, {"ki", to_json(c.current.ki)}};
    j["estimator"] = {{"alpha", c.estimator.alpha}, {"beta", c.estimator.beta},
                      {"M", c.estimator.M},         {"f0", c.estimator.f0},
                      {"norm", enum_name(c.estimator.norm, kNorms)},
                      {"freeze", enum_name(c.estimator.freeze, kFreezes)}};
    j["detector"] = enum_name(c.detector, kDetectors);
    j["timing"] = enum_name(c.timing, kTimings);

    json refs = json::array();
    for (const auto& r : c.references) {
        json e = {{"t", r.t}};
        if (const auto* req = std::get_if<ReferenceRequest>(&r.target)) {
            e["P_ref"] = req->P_ref;
            e["V_ref"] = req->V_ref;
        } else {
            const auto& ex = std::get<ExplicitReference>(r.target);
            e["phi_ref"] = ex.phi_ref;
            e["i_ref"] = to_json(ex.i_ref);
            if (ex.phi_pcc) e["phi_pcc"] = *ex.phi_pcc;
        }
        refs.push_back(e);
    }
    j["references"] = refs;
    json events = json::array();
    for (const auto& e : c.events) {
        events.push_back({{"t", e.t}, {"path", e.path}, {e.scale ? "scale" : "value", e.value}});
    }
    j["events"] = events;

    j["dt"] = c.dt;
    j["t_end"] = c.t_end;
    j["seed"] = c.seed;
    j["rated_power"] = c.rated_power;
    j["pe_window"] = c.pe_window;
    j["record_stride"] = c.record_stride;
    j["require_convergence"] = c.require_convergence;
    j["power_flow"] = {{"power_scale", c.power_flow.power_scale},
                       {"delta_min", c.power_flow.delta_min},
                       {"delta_max", c.power_flow.delta_max},
                       {"grid_points", c.power_flow.grid_points},
                       {"max_iterations", c.power_flow.max_iterations}};
    j["metrics"] = {{"sync_band_deg", c.metrics.sync_band_deg},
                    {"current_band_frac", c.metrics.current_band_frac},
                    {"omega_band_hz", c.metrics.omega_band_hz},
                    {"vg_band_frac", c.metrics.vg_band_frac},
                    {"settle_window", c.metrics.settle_window}};

    json init;
    if (c.init.plant) {
        init["plant"] = {{"i_g", to_json(c.init.plant->i_g)},
                         {"v", to_json(c.init.plant->v)},
                         {"i", to_json(c.init.plant->i)},
                         {"delta", c.init.plant->delta}};
    } else {
        init["plant"] = "equilibrium";
    }
    init["delta_offset"] = c.init.delta_offset;
    init["z12"] = to_json(c.init.z12);
    init["z34"] = to_json(c.init.z34);
    if (c.init.theta_matched) {
        init["theta0"] = "matched";
    } else if (c.init.theta0) {
        init["theta0"] = to_json(*c.init.theta0);
    } else {
        init["theta0"] = "nominal";
    }
    init["pll_xc"] = c.init.pll_xc ? json(*c.init.pll_xc) : json();
    init["current_xc"] = to_json(c.init.current_xc);
    init["seed_filter"] = c.init.seed_filter;
    j["init"] = init;
    return j;
}

ScenarioConfig load_scenario(const std::string& preset_or_path)
{
    for (const auto& n : preset_names()) {
        if (n == preset_or_path) {
            return preset(n);
        }
    }
    std::ifstream in(preset_or_path);
    if (!in) {
        throw ConfigError("no preset or readable file named " + preset_or_path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(preset_or_path + ": " + e.what());
    }
    return config_from_json(j);
}

RunOutput run_scenario(const std::string& name, const json& overrides)
{
    return integrate(config_from_json(overrides, preset(name)));
}

}  // namespace vscsync
