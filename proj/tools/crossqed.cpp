// crossqed — configuration-driven front end for the crossed-cavity solvers.
//
// Subcommands reproduce the standard tables: frequency response, the
// cross-method comparison sweep, CNOT success vs cooperativity, the Fredkin
// truth table, the single- vs crossed-cavity failure comparison, and direct
// time-bin oracle runs. Output is CSV (or JSON records with --json) with a
// leading comment line that records the fully resolved configuration.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "crossqed/analytic.hpp"
#include "crossqed/errors.hpp"
#include "crossqed/gates.hpp"
#include "crossqed/hierarchy.hpp"
#include "crossqed/params.hpp"
#include "crossqed/semiclassical.hpp"
#include "crossqed/single_excitation.hpp"
#include "crossqed/timebin.hpp"

using json = nlohmann::json;
using namespace crossqed;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    json config;

    void write(std::ostream& os, bool as_json) const {
        if (as_json) {
            json out;
            out["config"] = config;
            json records = json::array();
            for (const auto& r : rows) {
                json rec;
                for (std::size_t i = 0; i < columns.size(); ++i) rec[columns[i]] = r[i];
                records.push_back(rec);
            }
            out["rows"] = records;
            os << out.dump(2) << "\n";
            return;
        }
        os << "# config: " << config.dump() << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) {
            os << columns[i] << (i + 1 < columns.size() ? "," : "\n");
        }
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << r[i] << (i + 1 < r.size() ? "," : "\n");
        }
    }
};

void emit(const Table& t, const std::string& out_path, bool as_json) {
    if (out_path.empty()) {
        t.write(std::cout, as_json);
        return;
    }
    std::ofstream f(out_path);
    if (!f) throw ConfigError("cannot open output file: " + out_path);
    t.write(f, as_json);
}

struct Config {
    json j;

    double num(const std::string& key, double def) const {
        if (!j.contains(key)) return def;
        const auto& v = j.at(key);
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) return std::stod(v.get<std::string>());
        throw ConfigError("config field '" + key + "' must be numeric");
    }
    int integer(const std::string& key, int def) const {
        return static_cast<int>(std::llround(num(key, def)));
    }
    std::string str(const std::string& key, const std::string& def) const {
        if (!j.contains(key)) return def;
        return j.at(key).get<std::string>();
    }
    bool flag(const std::string& key, bool def) const {
        if (!j.contains(key)) return def;
        const auto& v = j.at(key);
        if (v.is_boolean()) return v.get<bool>();
        if (v.is_string()) return v.get<std::string>() == "true" || v.get<std::string>() == "1";
        if (v.is_number()) return v.get<double>() != 0.0;
        throw ConfigError("config field '" + key + "' must be boolean");
    }
};

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
    Config c;
    c.j = json::object();
    if (!path.empty()) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config file: " + path);
        try {
            f >> c.j;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        if (!c.j.is_object()) throw ConfigError("config must be a flat JSON object");
    }
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        try {
            c.j[key] = json::parse(val);
        } catch (const json::exception&) {
            c.j[key] = val;  // plain string
        }
    }
    return c;
}

SystemParams params_from(const Config& c, double default_gamma) {
    const double kappa = c.num("kappa", 1.0);
    const double gamma = c.num("gamma", default_gamma);
    double g;
    if (c.j.contains("C")) {
        g = std::sqrt(2.0 * kappa * gamma * c.num("C", 0.0));
    } else {
        g = c.num("g", std::sqrt(2.0 * kappa * gamma * 10.0));
    }
    SystemParams p = SystemParams::symmetric(g, gamma, kappa);
    if (c.j.contains("g_a")) p.g_a = c.num("g_a", g);
    if (c.j.contains("g_b")) p.g_b = c.num("g_b", -g);
    if (c.j.contains("gamma_1")) p.gamma_1 = c.num("gamma_1", gamma / 2);
    if (c.j.contains("gamma_2")) p.gamma_2 = c.num("gamma_2", gamma / 2);
    p.validate();
    return p;
}

PulseShape pulse_from(const Config& c) {
    const double kappa = c.num("kappa", 1.0);
    PulseShape p = PulseShape::standard(c.num("kappa_tau_p", 40.0), kappa);
    if (c.j.contains("t0")) p.t0 = c.num("t0", p.t0);
    if (c.j.contains("eta")) {
        p.eta = c.num("eta", p.eta);
        if (!c.j.contains("t0")) p.t0 = 5.0 * p.eta;
    }
    return p;
}

std::vector<double> sweep_axis(const Config& c, double def_min, double def_max, int def_points,
                               const std::string& def_scale) {
    const double lo = c.num("sweep_min", def_min);
    const double hi = c.num("sweep_max", def_max);
    const int n = c.integer("sweep_points", def_points);
    const std::string scale = c.str("sweep_scale", def_scale);
    if (n < 2 || hi <= lo) throw ConfigError("sweep needs sweep_points >= 2 and sweep_max > sweep_min");
    std::vector<double> xs(n);
    if (scale == "log") {
        if (lo <= 0.0) throw ConfigError("log sweep needs positive bounds");
        for (int i = 0; i < n; ++i) xs[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    } else if (scale == "linear") {
        for (int i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * double(i) / (n - 1);
    } else {
        throw ConfigError("sweep_scale must be 'linear' or 'log'");
    }
    return xs;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    pool.reserve(count);
    for (int i = 0; i < count; ++i) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

double swap_success_exact(const SystemParams& p, const PulseShape& pulse, const TimeGrid& grid) {
    const InitialState init = InitialState::with_reservoir(1.0, 0.0, 0.0, 1.0, 0.0);
    const auto r = single_excitation::integrate_single_excitation(p, init, std::nullopt,
                                                                  Envelope(pulse), grid);
    return r.energy_alpha_1;
}

double swap_success_semiclassical(const SystemParams& p, const PulseShape& pulse,
                                  const TimeGrid& grid) {
    return semiclassical::linear_swap_response(p, pulse, grid).transmission;
}

// ---------------------------------------------------------------- commands

int cmd_response(const Config& c, const std::string& out, bool as_json, int /*workers*/) {
    const SystemParams p = params_from(c, 0.2);
    const auto omegas = sweep_axis(c, c.num("omega_min", -5.0), c.num("omega_max", 5.0),
                                   c.integer("sweep_points", 201), "linear");
    Table t;
    t.config = c.j;
    t.config["command"] = "response";
    t.columns = {"omega", "atom", "r2", "t2", "arg_r", "arg_t"};
    for (const double w : omegas) {
        for (const AtomLevel lvl : {AtomLevel::g1, AtomLevel::g2}) {
            const auto sc = analytic::scattering_coefficients(p, w, lvl);
            t.rows.push_back({fmt(w), lvl == AtomLevel::g1 ? "g1" : "g2", fmt(std::norm(sc.r)),
                              fmt(std::norm(sc.t)), fmt(std::arg(sc.r)), fmt(std::arg(sc.t))});
        }
    }
    emit(t, out, as_json);
    return 0;
}

int cmd_fig2(const Config& c, const std::string& out, bool as_json, int workers) {
    const double gamma = c.num("gamma", 0.2);
    const double kappa = c.num("kappa", 1.0);
    const PulseShape pulse = pulse_from(c);
    const TimeGrid grid = TimeGrid::for_pulse(pulse, c.integer("grid_steps", 4000));

    const auto gs = sweep_axis(c, c.num("sweep_min", std::sqrt(2.0 * kappa * gamma * 0.01)),
                               c.num("sweep_max", std::sqrt(2.0 * kappa * gamma * 100.0)),
                               c.integer("sweep_points", 30), "log");

    Table t;
    t.config = c.j;
    t.config["command"] = "fig2";
    t.columns = {"panel", "g", "C", "analytic", "semiclassical", "exact"};

    std::vector<std::vector<std::string>> rows_a(gs.size());
    parallel_for(static_cast<int>(gs.size()), workers, [&](int i) {
        const SystemParams p = SystemParams::symmetric(gs[i], gamma, kappa);
        const double C = p.cooperativity();
        rows_a[i] = {"a",
                     fmt(gs[i]),
                     fmt(C),
                     fmt(analytic::swap_probability(C)),
                     fmt(swap_success_semiclassical(p, pulse, grid)),
                     fmt(swap_success_exact(p, pulse, grid))};
    });
    for (auto& r : rows_a) t.rows.push_back(std::move(r));

    const int nb = c.integer("biphoton_points", 9);
    const double dt = c.num("timebin_dt", 0.02);
    std::vector<double> gsb(nb);
    for (int i = 0; i < nb; ++i) gsb[i] = gs.front() * std::pow(gs.back() / gs.front(), double(i) / (nb - 1));
    std::vector<std::vector<std::string>> rows_b(nb);
    parallel_for(nb, workers, [&](int i) {
        const SystemParams p = SystemParams::symmetric(gsb[i], gamma, kappa);
        const double C = p.cooperativity();
        const auto sc = semiclassical::integrate_semiclassical(
            p, Envelope(pulse), Envelope::gaussian(pulse, cplx(0.0, 1.0)),
            semiclassical::AtomInit::g1(), grid);
        const int bins = std::max(8, static_cast<int>(std::lround(grid.t_end / dt)));
        const auto tb = timebin::simulate_timebin(p, Envelope(pulse), Envelope(pulse), AtomLevel::g1,
                                                  bins, grid.t_end);
        rows_b[i] = {"b",
                     fmt(gsb[i]),
                     fmt(C),
                     fmt(analytic::biphoton_survival_probability(C)),
                     fmt(sc.energy_a_out() * sc.energy_b_out()),
                     fmt(tb.dist.one_each)};
    });
    for (auto& r : rows_b) t.rows.push_back(std::move(r));

    emit(t, out, as_json);
    return 0;
}

int cmd_fig3(const Config& c, const std::string& out, bool as_json, int workers) {
    const PulseShape pulse = pulse_from(c);
    const TimeGrid grid = TimeGrid::for_pulse(pulse, c.integer("grid_steps", 4000));
    const double kappa = c.num("kappa", 1.0);
    const std::string section = c.str("section", "both");

    Table t;
    t.config = c.j;
    t.config["command"] = "fig3";
    t.columns = {"section", "gamma", "C", "ratio", "atom_control", "light_control"};

    if (section == "main" || section == "both") {
        const auto Cs = sweep_axis(c, c.num("sweep_min", 0.1), c.num("sweep_max", 100.0),
                                   c.integer("sweep_points", 25), "log");
        std::vector<double> gammas{c.num("gamma_low", 0.02), c.num("gamma_high", 20.0)};
        for (const double gamma : gammas) {
            std::vector<std::vector<std::string>> rows(Cs.size());
            parallel_for(static_cast<int>(Cs.size()), workers, [&](int i) {
                const SystemParams p = SystemParams::from_cooperativity(Cs[i], gamma, kappa);
                gates::GateOptions gopt;
                const auto atom = gates::evaluate_cnot_atom_control(p, pulse, grid, gopt);
                const auto light = gates::evaluate_cnot_light_control(p, pulse, grid, gopt);
                rows[i] = {"main",        fmt(gamma),
                           fmt(Cs[i]),    "",
                           fmt(atom.min_success()), fmt(light.min_success())};
            });
            for (auto& r : rows) t.rows.push_back(std::move(r));
        }
    }

    if (section == "inset" || section == "both") {
        const double gamma = c.num("gamma", 0.2);
        const SystemParams p = SystemParams::from_cooperativity(c.num("C", 10.0), gamma, kappa);
        const int n = c.integer("inset_points", 15);
        std::vector<double> ratios(n);
        const double lo = c.num("ratio_min", 0.7), hi = c.num("ratio_max", 1.0 / 0.7);
        for (int i = 0; i < n; ++i) ratios[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
        const auto sweep = gates::asymmetry_sweep(p, ratios, pulse, grid);
        for (const auto& pt : sweep) {
            t.rows.push_back({"inset", fmt(gamma), fmt(c.num("C", 10.0)), fmt(pt.ratio), "",
                              fmt(pt.success)});
        }
    }

    emit(t, out, as_json);
    return 0;
}

int cmd_fredkin(const Config& c, const std::string& out, bool as_json, int /*workers*/) {
    const PulseShape pulse = pulse_from(c);
    const TimeGrid grid = TimeGrid::for_pulse(pulse, c.integer("grid_steps", 4000));
    const double gamma = c.num("gamma", 0.2);
    const double kappa = c.num("kappa", 1.0);

    std::vector<double> Cs;
    if (c.j.contains("C")) {
        Cs.push_back(c.num("C", 20.0));
    } else {
        Cs = {5.0, 20.0};
    }

    gates::GateOptions gopt;
    gopt.timebin_dt = c.num("timebin_dt", 0.02);
    const std::string backend = c.str("backend", "timebin");
    if (backend == "hierarchy") {
        gopt.backend = gates::BiphotonBackend::hierarchy;
    } else if (backend != "timebin") {
        throw ConfigError("backend must be 'timebin' or 'hierarchy'");
    }

    Table t;
    t.config = c.j;
    t.config["command"] = "fredkin";
    t.columns = {"C", "input", "ideal", "success", "loss", "wrong_port", "coincidence"};
    for (const double C : Cs) {
        const SystemParams p = SystemParams::from_cooperativity(C, gamma, kappa);
        const auto table = gates::evaluate_fredkin(p, pulse, grid, gopt);
        for (const auto& row : table.rows) {
            t.rows.push_back({fmt(C), row.input_label, row.ideal_label, fmt(row.success),
                              fmt(row.loss), fmt(row.wrong_port), fmt(row.coincidence)});
        }
    }
    emit(t, out, as_json);
    return 0;
}

int cmd_compare_dk(const Config& c, const std::string& out, bool as_json, int /*workers*/) {
    const auto Cs = sweep_axis(c, c.num("sweep_min", 0.3), c.num("sweep_max", 100.0),
                               c.integer("sweep_points", 40), "log");
    Table t;
    t.config = c.j;
    t.config["command"] = "compare-dk";
    t.columns = {"C", "p_f_cross", "p_f_dk", "ratio", "cross_regime", "dk_regime"};
    for (const double C : Cs) {
        const auto cross = analytic::cross_failure_probability(C);
        const auto dk = analytic::dk_failure_probability(C);
        t.rows.push_back({fmt(C), fmt(cross.value), fmt(dk.value),
                          fmt(dk.value > 0 ? cross.value / dk.value : 0.0),
                          cross.pi_phase_regime ? "1" : "0", dk.pi_phase_regime ? "1" : "0"});
    }
    emit(t, out, as_json);
    return 0;
}

int cmd_oracle(const Config& c, const std::string& out, bool as_json, int /*workers*/) {
    const SystemParams p = params_from(c, 0.2);
    const PulseShape pulse = pulse_from(c);
    const double horizon = c.num("horizon", 10.0 * pulse.eta);
    const double dt = c.num("timebin_dt", 0.02);
    const int bins = std::max(8, static_cast<int>(std::lround(horizon / dt)));
    const std::string input = c.str("input", "both");
    const AtomLevel atom = c.str("atom", "g1") == "g2" ? AtomLevel::g2 : AtomLevel::g1;

    const std::optional<Envelope> in_a =
        (input == "a" || input == "both") ? std::optional<Envelope>(Envelope(pulse)) : std::nullopt;
    const std::optional<Envelope> in_b =
        (input == "b" || input == "both") ? std::optional<Envelope>(Envelope(pulse)) : std::nullopt;

    timebin::Options topt;
    topt.midpoint = c.flag("midpoint", true);

    Table t;
    t.config = c.j;
    t.config["command"] = "oracle";
    t.columns = {"quantity", "value"};

    const auto run = timebin::simulate_timebin(p, in_a, in_b, atom, bins, horizon, topt);
    const auto& d = run.dist;
    t.rows.push_back({"n_photons", fmt(d.n_photons)});
    if (d.n_photons == 1) {
        t.rows.push_back({"exit_a", fmt(d.exit_a)});
        t.rows.push_back({"exit_b", fmt(d.exit_b)});
        t.rows.push_back({"lost", fmt(d.lost)});
    } else if (d.n_photons == 2) {
        t.rows.push_back({"both_a", fmt(d.both_a)});
        t.rows.push_back({"one_each", fmt(d.one_each)});
        t.rows.push_back({"both_b", fmt(d.both_b)});
        t.rows.push_back({"one_lost", fmt(d.one_lost)});
        t.rows.push_back({"both_lost", fmt(d.both_lost)});
    }
    t.rows.push_back({"residual", fmt(d.residual)});
    t.rows.push_back({"norm_drift", fmt(run.norm_drift)});

    if (c.flag("refine", false)) {
        std::vector<double> values;
        const std::string target = c.str("refine_quantity", d.n_photons == 2 ? "one_each" : "exit_a");
        for (const int mult : {1, 2, 4}) {
            const auto r = timebin::simulate_timebin(p, in_a, in_b, atom, bins * mult, horizon, topt);
            const auto& dd = r.dist;
            double v = 0.0;
            if (target == "one_each") v = dd.one_each;
            else if (target == "exit_a") v = dd.exit_a;
            else if (target == "exit_b") v = dd.exit_b;
            else if (target == "both_a") v = dd.both_a;
            else if (target == "both_b") v = dd.both_b;
            else throw ConfigError("refine_quantity not recognized: " + target);
            values.push_back(v);
        }
        const auto rep = timebin::convergence_report(values);
        t.rows.push_back({"refined_" + target, fmt(rep.extrapolated)});
        t.rows.push_back({"observed_order", fmt(rep.observed_order)});
        t.rows.push_back({"monotone", rep.monotone ? "1" : "0"});
    }

    emit(t, out, as_json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crossed-cavity photon-gate simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    bool as_json = false;
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
    std::vector<std::string> overrides;

    app.add_option("--config", config_path, "flat JSON config file");
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_flag("--json", as_json, "emit JSON records instead of CSV");
    app.add_option("--workers", workers, "worker threads for sweeps");
    app.add_option("--set", overrides, "override config fields (key=value)");

    auto* s_response = app.add_subcommand("response", "analytic frequency response table");
    auto* s_fig2 = app.add_subcommand("fig2", "analytic/semiclassical/exact comparison sweep");
    auto* s_fig3 = app.add_subcommand("fig3", "CNOT success vs cooperativity (+ asymmetry inset)");
    auto* s_fredkin = app.add_subcommand("fredkin", "Fredkin truth-table probabilities");
    auto* s_dk = app.add_subcommand("compare-dk", "failure probability vs single-cavity protocol");
    auto* s_oracle = app.add_subcommand("oracle", "time-bin oracle run");
    for (CLI::App* sub : {s_response, s_fig2, s_fig3, s_fredkin, s_dk, s_oracle}) {
        sub->fallthrough();  // global flags may follow the subcommand
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const Config cfg = load_config(config_path, overrides);
        if (s_response->parsed()) return cmd_response(cfg, out_path, as_json, workers);
        if (s_fig2->parsed()) return cmd_fig2(cfg, out_path, as_json, workers);
        if (s_fig3->parsed()) return cmd_fig3(cfg, out_path, as_json, workers);
        if (s_fredkin->parsed()) return cmd_fredkin(cfg, out_path, as_json, workers);
        if (s_dk->parsed()) return cmd_compare_dk(cfg, out_path, as_json, workers);
        if (s_oracle->parsed()) return cmd_oracle(cfg, out_path, as_json, workers);
        throw ConfigError("no subcommand given");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
