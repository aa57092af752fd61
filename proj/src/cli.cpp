#include "pmt/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmt/errors.hpp"

namespace pmt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    T x{};
    is >> x;
    if (!is || !is.eof()) throw UsageError("config key '" + key + "': cannot parse '" + v + "'");
    return x;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number<int>(key, item));
    }
    return out;
}

// Runs body, mapping library errors onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const InfeasibleError& e) {
        err << "error: infeasible configuration: " << e.what() << '\n';
        return exit_infeasible;
    } catch (const DegenerateError& e) {
        err << "error: " << e.what() << '\n';
        return exit_degenerate;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

std::string big(const BigInt& v) { return v.str(); }

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : "undefined"; }

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path + "'");
    return f;
}

}  // namespace

MultipathConfig ScenarioConfig::simulation_config() const {
    MultipathConfig c = multipath;
    c.lambda = lambda_field;
    return c;
}

ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig c;
    bool seen_n = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (key == "n") {
            c.multipath.n = parse_number<int>(key, v);
            seen_n = true;
        } else if (key == "t_a") {
            c.multipath.t_a = parse_number<int>(key, v);
        } else if (key == "t_b") {
            c.multipath.t_b = parse_number<int>(key, v);
        } else if (key == "t_e") {
            c.multipath.t_e = parse_number<int>(key, v);
        } else if (key == "lambda") {
            c.multipath.lambda = parse_number<int>(key, v);
        } else if (key == "scheme") {
            c.scheme = scheme_from_string(v);
        } else if (key == "psi") {
            c.psi = parse_number<double>(key, v);
        } else if (key == "delta_target") {
            c.delta_target = parse_number<double>(key, v);
        } else if (key == "epsilon_target") {
            c.epsilon_target = parse_number<double>(key, v);
        } else if (key == "trials") {
            c.trials = parse_number<std::int64_t>(key, v);
        } else if (key == "master_seed") {
            c.master_seed = parse_number<std::uint64_t>(key, v);
        } else if (key == "eve_strategy") {
            c.eve.kind = eve_kind_from_string(v);
        } else if (key == "eve_paths") {
            c.eve.paths = parse_int_list(key, v);
        } else if (key == "lambda_field") {
            c.lambda_field = parse_number<int>(key, v);
        } else if (key == "q1_override") {
            try {
                c.q1_override = BigInt(v);
            } catch (const std::exception&) {
                throw UsageError("config key 'q1_override': cannot parse '" + v + "'");
            }
        } else if (key == "output") {
            c.output = v;
        } else {
            throw UsageError("unknown config key '" + key + "'");
        }
    }
    if (!seen_n) throw UsageError("config is missing n");
    c.multipath.validate();
    if (c.lambda_field < 1 || c.lambda_field > 128) throw UsageError("lambda_field must lie in [1, 128]");
    if (c.trials < 0) throw UsageError("trials must be non-negative");
    if (!(c.psi > 0 && c.psi < 1)) throw UsageError("psi must lie in (0, 1)");
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config '" + path + "'");
    return parse_config(f);
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

int cmd_params(const ScenarioConfig& sc, const ParamsOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        MultipathConfig cfg = sc.multipath;
        if (opt.analytic_lambda) cfg.lambda = *opt.analytic_lambda;
        cfg.validate();
        const double rate = scheme_rate(cfg, sc.scheme, sc.psi);
        const double delta = delta_of_lambda(cfg.lambda);
        const ProtocolParams p =
            derive_params(cfg, sc.scheme, sc.psi, sc.delta_target, sc.epsilon_target, sc.q1_override);
        const auto cap = capacity_report(cfg);

        std::string form;
        if (sc.scheme == Scheme::F2simple)
            form = "(t_b-t_e)/t_b - Delta = " + format_real(static_cast<double>(cfg.t_b - cfg.t_e) / cfg.t_b) +
                   " - " + format_real(delta);
        else if (sc.scheme == Scheme::F0)
            form = "1 - t_e/t_ab";
        else
            form = "(1 - t_e/n - Delta)/(1 + xi)";

        if (opt.json) {
            nlohmann::ordered_json j;
            j["scheme"] = to_string(sc.scheme);
            j["n"] = cfg.n;
            j["t_a"] = cfg.t_a;
            j["t_b"] = cfg.t_b;
            j["t_e"] = cfg.t_e;
            j["lambda"] = cfg.lambda;
            j["psi"] = sc.psi;
            j["delta_cap"] = delta;
            j["scheme_rate"] = rate;
            j["rate_form"] = form;
            for (auto [k, v] : {std::pair{"q1", &p.q1}, {"q2", &p.q2}, {"g1", &p.g1}, {"g2", &p.g2}, {"r1", &p.r1},
                                {"r2", &p.r2}, {"c1", &p.c1}, {"c2", &p.c2}})
                j[k] = big(*v);
            j["w"] = p.w;
            j["w1"] = p.w1;
            j["n_prime"] = p.n_prime;
            j["achieved_rate"] = p.achieved_rate();
            out << j.dump(2) << '\n';
            return exit_ok;
        }

        out << "scheme = " << to_string(sc.scheme) << '\n'
            << "setting = (" << cfg.n << ',' << cfg.t_a << ',' << cfg.t_b << ',' << cfg.t_e << ',' << cfg.lambda
            << ")\n"
            << "regime = " << to_string(cap.regime) << '\n'
            << "psi = " << format_real(sc.psi) << '\n'
            << "delta_target = " << format_real(sc.delta_target) << '\n'
            << "epsilon_target = " << format_real(sc.epsilon_target) << '\n'
            << "delta_cap = " << format_real(delta) << '\n'
            << "xi1 = " << opt_real(cap.xi1) << '\n'
            << "xi2 = " << opt_real(cap.xi2) << '\n'
            << "xi3 = " << opt_real(cap.xi3) << '\n'
            << "rate_form = " << form << '\n'
            << "rate = " << format_real(rate) << '\n'
            << "c0_bounds = " << format_real(cap.c0_lower) << ' ' << format_real(cap.c0_upper) << '\n'
            << "ap_oneway_bounds = " << format_real(cap.oneway_ap_lower) << ' ' << format_real(cap.oneway_ap_upper)
            << '\n'
            << "ap_twoway_bounds = " << format_real(cap.twoway_ap_lower) << ' ' << format_real(cap.twoway_ap_upper)
            << '\n'
            << "q1_min = " << format_real(p.q1_min) << '\n'
            << "q2_min = " << format_real(p.q2_min) << '\n'
            << "q1 = " << big(p.q1) << '\n'
            << "q2 = " << big(p.q2) << '\n'
            << "g1 = " << big(p.g1) << '\n'
            << "g2 = " << big(p.g2) << '\n'
            << "r1 = " << big(p.r1) << '\n'
            << "r2 = " << big(p.r2) << '\n'
            << "stage1_sss = (" << big(p.k1) << ',' << big(p.r1) << ',' << big(p.g1) << ',' << big(p.m1) << ")\n";
        if (p.q2 > 0)
            out << "stage2_sss = (" << big(p.k2) << ',' << big(p.r2) << ',' << big(p.g2) << ',' << big(p.m2) << ")\n";
        out << "w = " << p.w << '\n';
        if (sc.scheme == Scheme::F3) out << "w1 = " << p.w1 << '\n' << "w2 = " << p.w2 << '\n';
        out << "n_prime = " << p.n_prime << '\n'
            << "t_prime_a1 = " << format_real(p.t_prime_a1) << '\n'
            << "t_prime_b1 = " << format_real(p.t_prime_b1) << '\n'
            << "t_prime_e1 = " << format_real(p.t_prime_e1) << '\n'
            << "t_prime_e2 = " << format_real(p.t_prime_e2) << '\n'
            << "key_bits_divisible = " << (p.key_bits_divisible ? "yes" : "no") << '\n'
            << "c1 = " << big(p.c1) << '\n'
            << "c2 = " << big(p.c2) << '\n'
            << "message_bits = " << big(p.message_bits()) << '\n'
            << "achieved_rate = " << format_real(p.achieved_rate()) << '\n';

        if (opt.psi_grid) {
            double best_psi = 0, best = -1;
            for (int i = 1; i <= 50; ++i) {
                const double psi = i / 100.0;
                out << "psi_grid " << format_real(psi) << " = ";
                try {
                    const auto g =
                        derive_params(cfg, sc.scheme, psi, sc.delta_target, sc.epsilon_target, sc.q1_override);
                    out << format_real(g.achieved_rate()) << '\n';
                    if (g.achieved_rate() > best) best = g.achieved_rate(), best_psi = psi;
                } catch (const DegenerateError&) {
                    out << "degenerate\n";
                }
            }
            if (best >= 0) out << "psi_best = " << format_real(best_psi) << ' ' << format_real(best) << '\n';
        }
        return exit_ok;
    });
}

int cmd_simulate(const ScenarioConfig& sc, const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ScenarioConfig c = sc;
        if (opt.lambda_field) c.lambda_field = *opt.lambda_field;
        const MultipathConfig sim = c.simulation_config();
        TrialPlan plan;
        plan.config = sim;
        plan.params = derive_params(sim, c.scheme, c.psi, c.delta_target, c.epsilon_target, c.q1_override);
        plan.eve = c.eve;
        plan.master_seed = opt.seed.value_or(c.master_seed);
        plan.trials = opt.trials.value_or(c.trials);
        plan.audit = opt.audit;
        if (plan.trials <= 0) throw UsageError("simulate needs at least one trial");

        const auto outcomes = run_trials(plan, opt.threads);

        if (!opt.dump_transcript.empty()) {
            std::string csv;
            run_one_trial(plan, 0, &csv);
            auto f = open_out(opt.dump_transcript);
            f << csv;
            if (!f) throw IoError("write failed for '" + opt.dump_transcript + "'");
        }

        std::ostringstream os;
        os << "trial,aborted,failed,bad_event_stage1,bad_event_stage2,bits_communicated\n";
        std::int64_t failures = 0, aborts = 0, bad = 0, bits_mismatch = 0, key_dis = 0, audit_bad = 0;
        for (const auto& o : outcomes) {
            const bool b = o.bad.eve_over_threshold_stage1 || o.bad.eve_over_threshold_stage2;
            os << o.trial << ',' << o.aborted << ',' << o.failed << ',' << o.bad.eve_over_threshold_stage1 << ','
               << o.bad.eve_over_threshold_stage2 << ',' << o.bits_communicated << '\n';
            failures += o.failed;
            aborts += o.aborted;
            bad += b;
            bits_mismatch += o.bits_communicated != o.bits_expected;
            key_dis += !o.aborted && o.keys_agree && !*o.keys_agree;
            audit_bad += !o.audit_error.empty();
        }
        const auto n = static_cast<std::int64_t>(outcomes.size());
        const auto fc = montecarlo_confidence(failures, n);
        const auto bc = montecarlo_confidence(bad, n);
        os << "# summary\n"
           << "metric,value\n"
           << "scheme," << to_string(c.scheme) << '\n'
           << "eve_strategy," << to_string(c.eve.kind) << '\n'
           << "lambda_field," << sim.lambda << '\n'
           << "q1," << big(plan.params.q1) << '\n'
           << "q2," << big(plan.params.q2) << '\n'
           << "message_elements," << big(plan.params.message_elements()) << '\n'
           << "trials," << n << '\n'
           << "aborts," << aborts << '\n'
           << "failures," << failures << '\n'
           << "delta_hat," << format_real(fc.point) << '\n'
           << "delta_hat_upper95," << format_real(fc.upper95) << '\n'
           << "delta_target," << format_real(c.delta_target) << '\n'
           << "bad_events," << bad << '\n'
           << "epsilon_proxy_hat," << format_real(bc.point) << '\n'
           << "epsilon_proxy_upper95," << format_real(bc.upper95) << '\n'
           << "epsilon_target," << format_real(c.epsilon_target) << '\n'
           << "bits_mismatches," << bits_mismatch << '\n'
           << "key_disagreements," << key_dis << '\n';
        if (opt.audit) os << "audit_failures," << audit_bad << '\n';

        const std::string path = !opt.out.empty() ? opt.out : c.output;
        if (path.empty()) {
            out << os.str();
        } else {
            auto f = open_out(path);
            f << os.str();
            if (!f) throw IoError("write failed for '" + path + "'");
        }
        return exit_ok;
    });
}

int cmd_capacity(const CapacityOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (opt.points < 2) throw UsageError("capacity sweep needs at least 2 points");
        if (opt.n < 1) throw UsageError("n must be positive");
        if (!(opt.fixed_fraction >= 0 && opt.fixed_fraction <= 1)) throw UsageError("fraction must lie in [0, 1]");
        const bool beta = opt.sweep == "beta";
        if (!beta && opt.sweep != "alpha") throw UsageError("sweep must be beta or alpha");

        std::ostringstream os;
        os << "sweep_value,c0,ap_lower_oneway,ap_lower_twoway,ap_upper,active_scheme\n";
        const double n = opt.n;
        for (int i = 0; i < opt.points; ++i) {
            RealSetting s;
            s.n = n;
            s.lambda = opt.lambda;
            double v;
            if (beta) {
                v = static_cast<double>(i) / (opt.points - 1);
                s.t_a = s.t_b = opt.fixed_fraction * n;
                s.t_e = v * n;
            } else {
                // alpha = 0 has no communication at all; start one step in
                v = static_cast<double>(i + 1) / opt.points;
                s.t_a = s.t_b = v * n;
                s.t_e = opt.fixed_fraction * n;
            }
            const auto r = capacity_report(s);
            os << format_real(v) << ',' << format_real(r.c0_lower) << ',' << format_real(r.oneway_ap_lower) << ','
               << format_real(r.twoway_ap_lower) << ',' << format_real(r.twoway_ap_upper) << ',' << r.twoway_active
               << '\n';
        }
        if (opt.out.empty()) {
            out << os.str();
        } else {
            auto f = open_out(opt.out);
            f << os.str();
            if (!f) throw IoError("write failed for '" + opt.out + "'");
        }
        return exit_ok;
    });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"pmtlab: private message transmission over multipath settings"};
    app.require_subcommand(1);

    std::string params_cfg;
    ParamsOptions popt;
    int analytic_lambda = 0;
    auto* params = app.add_subcommand("params", "derive protocol parameters and rates for a scenario");
    params->add_option("config", params_cfg, "scenario file")->required();
    params->add_option("--analytic-lambda", analytic_lambda, "override the config's lambda");
    params->add_flag("--json", popt.json, "emit JSON");
    params->add_flag("--psi-grid", popt.psi_grid, "also report the finite rate for psi = 0.01 .. 0.5");

    std::string sim_cfg;
    SimulateOptions sopt;
    std::int64_t trials = -1;
    std::uint64_t seed = 0;
    int lambda_field = 0;
    auto* simulate = app.add_subcommand("simulate", "run Monte-Carlo trials and emit CSV");
    simulate->add_option("config", sim_cfg, "scenario file")->required();
    auto* trials_opt = simulate->add_option("--trials", trials, "trial count");
    auto* seed_opt = simulate->add_option("--seed", seed, "master seed");
    simulate->add_option("--lambda-field", lambda_field, "simulation field width");
    simulate->add_option("--dump-transcript", sopt.dump_transcript, "write trial 0's transcript CSV here");
    simulate->add_option("--out", sopt.out, "CSV path (default: config output or stdout)");
    simulate->add_option("--threads", sopt.threads, "worker threads (0 = hardware)");
    simulate->add_flag("--audit", sopt.audit, "audit every trial's transcript");

    CapacityOptions copt;
    auto* capacity = app.add_subcommand("capacity", "sweep capacity bounds and emit CSV");
    capacity->add_option("--sweep", copt.sweep, "beta or alpha")->check(CLI::IsMember({"beta", "alpha"}));
    capacity->add_option("--lambda", copt.lambda, "analytic lambda");
    capacity->add_option("--n", copt.n, "path count");
    capacity->add_option("--points", copt.points, "sweep points");
    capacity->add_option("--fraction", copt.fixed_fraction, "t_ab/n for beta sweeps, t_e/n for alpha sweeps");
    capacity->add_option("--out", copt.out, "CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    if (*params) {
        if (analytic_lambda > 0) popt.analytic_lambda = analytic_lambda;
        return guarded(err, [&] { return cmd_params(load_config(params_cfg), popt, out, err); });
    }
    if (*simulate) {
        if (*trials_opt) sopt.trials = trials;
        if (*seed_opt) sopt.seed = seed;
        if (lambda_field > 0) sopt.lambda_field = lambda_field;
        return guarded(err, [&] { return cmd_simulate(load_config(sim_cfg), sopt, out, err); });
    }
    return cmd_capacity(copt, out, err);
}

}  // namespace pmt
