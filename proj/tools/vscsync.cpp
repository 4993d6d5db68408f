// Command-line front end: simulate, equilibrium, sweep, order-check.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vscsync/csv.hpp"
#include "vscsync/errors.hpp"
#include "vscsync/scenario.hpp"
#include "vscsync/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vscsync;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct Overrides {
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<std::uint64_t> seed;
};

ScenarioConfig configure(const std::string& scenario, const Overrides& o)
{
    ScenarioConfig cfg = load_scenario(scenario);
    if (o.dt) cfg.dt = *o.dt;
    if (o.t_end) cfg.t_end = *o.t_end;
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();
    return cfg;
}

fs::path prepare_dir(const std::string& out)
{
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw ConfigError("cannot create output directory " + out);
    }
    return dir;
}

json vec(const Vec2& v) { return json::array({v(0), v(1)}); }

int cmd_simulate(const std::string& scenario, const Overrides& o, const std::string& out,
                 bool require)
{
    ScenarioConfig cfg = configure(scenario, o);
    cfg.require_convergence = cfg.require_convergence || require;
    const fs::path dir = prepare_dir(out);
    const RunOutput run = integrate(cfg);

    std::ofstream csv(dir / "series.csv");
    write_csv(csv, run.series);
    std::ofstream(dir / "metrics.json") << metrics_to_json(run.metrics, 2) << '\n';
    std::ofstream(dir / "config.json") << config_to_json(cfg).dump(2) << '\n';

    std::cout << metrics_to_json(run.metrics, 2) << '\n';
    if (cfg.require_convergence && !run.metrics.converged) {
        std::cerr << "scenario " << cfg.name << " did not converge\n";
        return kExitDiverged;
    }
    return 0;
}

int cmd_equilibrium(double power, double voltage, const std::string& params_file)
{
    ScenarioConfig cfg;
    if (!params_file.empty()) {
        std::ifstream in(params_file);
        if (!in) throw ConfigError("cannot read " + params_file);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError(params_file + ": " + e.what());
        }
        // Accept either a bare parameter object or a scenario with a "plant" block.
        if (!j.contains("plant")) j = json{{"plant", j}};
        j.erase("references");
        json with_ref = j;
        with_ref["references"] = json::array({json{{"t", 0.0}, {"P_ref", 0.0}}});
        cfg = config_from_json(with_ref);
    }
    cfg.plant.validate();
    const ReferenceSolution s =
        solve_references(ReferenceRequest{power, voltage}, cfg.plant, cfg.plant.omega, cfg.power_flow);
    const auto& eq = s.equilibrium;

    nlohmann::ordered_json j;
    j["P_ref_w"] = power;
    j["V_ref_v"] = voltage;
    j["phi_ref_rad"] = s.phi_ref;
    j["phi_ref_deg"] = s.phi_ref * 180.0 / kPi;
    j["i_dq_ref"] = vec(s.i_ref);
    j["phi_pcc_rad"] = s.phi_pcc;
    j["iterations"] = s.iterations;
    j["equilibrium"] = {{"i_g", vec(eq.state.i_g)},
                        {"v", vec(eq.state.v)},
                        {"i", vec(eq.state.i)},
                        {"delta", eq.state.delta},
                        {"u1", eq.input.u1},
                        {"u_dq", vec(eq.input.u_dq)}};
    j["pcc_power_w"] = pcc_power(eq.state, cfg.power_flow);
    j["pcc_voltage_v"] = eq.state.v.norm();
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_sweep(const std::string& scenario, const Overrides& o, int n, unsigned threads,
              const std::string& out)
{
    const ScenarioConfig cfg = configure(scenario, o);
    const fs::path dir = prepare_dir(out);
    const SweepReport r = sweep_random_init(cfg, n, Dispersion{}, threads);

    std::ofstream runs(dir / "runs.csv");
    runs << "index,seed,delta_offset,converged,diverged,settling_time_s,final_delta_error_deg\n";
    for (const auto& run : r.runs) {
        runs << run.index << ',' << run.seed << ',' << format_number(run.delta_offset) << ','
             << run.converged << ',' << run.diverged << ','
             << (run.settling_time ? format_number(*run.settling_time) : std::string()) << ','
             << format_number(run.final_delta_error_deg) << '\n';
    }
    nlohmann::ordered_json j;
    j["scenario"] = cfg.name;
    j["n"] = r.n;
    j["converged"] = r.converged;
    j["fraction"] = r.fraction;
    j["worst_settling_time_s"] = r.worst_settling_time ? json(*r.worst_settling_time) : json();
    std::ofstream(dir / "sweep.json") << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_order_check(const std::string& scenario, const Overrides& o)
{
    const ScenarioConfig cfg = configure(scenario, o);
    const OrderCheck oc = order_check(cfg);
    nlohmann::ordered_json j;
    j["scenario"] = cfg.name;
    j["dt"] = cfg.dt;
    j["t_end"] = cfg.t_end;
    j["error_coarse"] = oc.error_coarse;
    j["error_fine"] = oc.error_fine;
    j["observed_order"] = oc.observed_order;
    std::cout << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive grid synchronization of a voltage source converter"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out;
    Overrides ov;
    auto add_overrides = [&](CLI::App* sub) {
        sub->add_option("--dt", ov.dt, "integration step, s");
        sub->add_option("--t-end", ov.t_end, "final time, s");
        sub->add_option("--seed", ov.seed, "random seed");
    };

    auto* sim = app.add_subcommand("simulate", "run one scenario, write series.csv and metrics.json");
    sim->add_option("--scenario", scenario, "preset name or JSON file")->required();
    add_overrides(sim);
    sim->add_option("--out", out, "output directory")->required();
    bool require = false;
    sim->add_flag("--require-convergence", require, "exit 3 unless the run converges");

    auto* eq = app.add_subcommand("equilibrium", "solve the power flow for a reference request");
    double power = 0.0;
    double voltage = 0.0;
    std::string params;
    eq->add_option("--power", power, "active power at the PCC, W")->required();
    eq->add_option("--voltage", voltage, "PCC voltage dq magnitude, V")->required();
    eq->add_option("--params", params, "JSON file with plant parameters");

    auto* sw = app.add_subcommand("sweep", "randomized initial conditions");
    sw->add_option("--scenario", scenario, "preset name or JSON file")->required();
    int n = 100;
    unsigned threads = 0;
    sw->add_option("--n", n, "number of runs")->required();
    sw->add_option("--threads", threads, "worker threads (0: all cores)");
    add_overrides(sw);
    sw->add_option("--out", out, "output directory")->required();

    auto* oc = app.add_subcommand("order-check", "observed RK4 order from dt, dt/2, dt/4");
    oc->add_option("--scenario", scenario, "preset name or JSON file")->required();
    add_overrides(oc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(scenario, ov, out, require);
        if (*eq) return cmd_equilibrium(power, voltage, params);
        if (*sw) return cmd_sweep(scenario, ov, n, threads, out);
        if (*oc) return cmd_order_check(scenario, ov);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InfeasibleRequest& e) {
        std::cerr << "infeasible request: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
