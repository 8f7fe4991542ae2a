// Command-line front end: step-values, run, simulate, compare.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqstep/critical_values.hpp"
#include "seqstep/fixed_baseline.hpp"
#include "seqstep/procedures.hpp"
#include "seqstep/report.hpp"
#include "seqstep/simulation.hpp"
#include "seqstep/step_values.hpp"

using json = nlohmann::json;
using namespace seqstep;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct ReplayConfig {
    std::vector<std::vector<double>> stat_paths;
    std::vector<double> A, B;
};

struct CliConfig {
    ScenarioConfig scenario;
    SequentialSpec procedure;
    int threads = 0;
    bool trace = false;
    std::string out_dir = "out";
    bool raw_log = false;
    // baseline search
    bool baseline_enabled = true;
    long baseline_reps = 1000;
    long baseline_n_max = 500;
    bool match_prime = false;
    std::vector<double> prime_alpha_grid;
    long prime_n_lo = 1, prime_n_hi = 0;  // 0: derive from calibrated N
    std::optional<ReplayConfig> replay;
};

StepMode parse_mode(const std::string& s) {
    if (s == "stepdown") return StepMode::Stepdown;
    if (s == "stepup") return StepMode::Stepup;
    throw std::invalid_argument("procedure.mode must be stepdown or stepup");
}

CliConfig parse_config(const json& j) {
    CliConfig c;
    const json sc = j.value("scenario", json::object());
    c.scenario.J = sc.value("J", 2);
    c.scenario.true_null_count = sc.value("true_nulls", c.scenario.J / 2);
    c.scenario.sigma = sc.value("sigma", 1.0);
    c.scenario.correlation = sc.value("correlation", 0.0);
    const std::string stat = sc.value("statistic", "gaussian");
    if (stat == "gaussian")
        c.scenario.statistic = StatisticKind::GaussianKnownSigma;
    else if (stat == "tglr")
        c.scenario.statistic = StatisticKind::TGlr;
    else
        throw std::invalid_argument("scenario.statistic must be gaussian or tglr");
    c.scenario.delta = sc.value("delta", 1.0);
    c.scenario.theta_null = sc.value("theta_null", 0.0);
    c.scenario.theta_alt = sc.value("theta_alt", 1.0);

    const json er = j.value("error", json::object());
    const std::string metric = er.value("metric", "fdp");
    if (metric == "fdp")
        c.scenario.error.metric = ErrorMetric::Fdp;
    else if (metric == "kfwe")
        c.scenario.error.metric = ErrorMetric::Kfwe;
    else
        throw std::invalid_argument("error.metric must be fdp or kfwe");
    c.scenario.error.alpha = er.value("alpha", 0.05);
    c.scenario.error.beta = er.value("beta", 0.2);
    c.scenario.error.gamma1 = er.value("gamma1", 0.1);
    c.scenario.error.gamma2 = er.value("gamma2", 0.1);
    c.scenario.error.k1 = er.value("k1", 1);
    c.scenario.error.k2 = er.value("k2", 1);
    const std::string weights = er.value("weights", "recommended");
    if (weights == "recommended")
        c.scenario.error.weights = DeltaChoice::Recommended;
    else if (weights == "linear")
        c.scenario.error.weights = DeltaChoice::Linear;
    else
        throw std::invalid_argument("error.weights must be recommended or linear");

    const json pr = j.value("procedure", json::object());
    c.procedure.mode = parse_mode(pr.value("mode", "stepdown"));
    c.procedure.rejective = pr.value("rejective", false);
    if (pr.contains("horizon") && !pr["horizon"].is_null())
        c.procedure.horizon = pr["horizon"].get<long>();
    c.procedure.rho = pr.value("rho", 0.583);
    c.procedure.max_stage_guard = pr.value("max_stage_guard", 1000000L);
    c.procedure.calib_horizon = pr.value("calib_horizon", 40L);
    c.procedure.calib_reps = pr.value("calib_reps", 100000L);

    const json run = j.value("run", json::object());
    c.scenario.reps = run.value("reps", 1000L);
    c.scenario.seed = run.value("seed", 1UL);
    c.threads = run.value("threads", 0);

    const json bl = j.value("baseline", json::object());
    c.baseline_enabled = bl.value("enabled", true);
    c.baseline_reps = bl.value("reps", 1000L);
    c.baseline_n_max = bl.value("n_max", 500L);
    c.match_prime = bl.value("match_prime", false);
    if (bl.contains("alpha_grid")) c.prime_alpha_grid = bl["alpha_grid"].get<std::vector<double>>();
    c.prime_n_lo = bl.value("n_lo", 1L);
    c.prime_n_hi = bl.value("n_hi", 0L);

    c.out_dir = j.value("out", "out");
    c.raw_log = j.value("raw_log", false);

    if (j.contains("replay") && !j["replay"].is_null()) {
        ReplayConfig r;
        r.stat_paths = j["replay"].value("stat_paths", std::vector<std::vector<double>>{});
        r.A = j["replay"].value("A", std::vector<double>{});
        r.B = j["replay"].value("B", std::vector<double>{});
        if (r.stat_paths.empty()) throw std::invalid_argument("replay.stat_paths must be nonempty");
        c.replay = std::move(r);
    }
    return c;
}

json echo_config(const CliConfig& c) {
    json j;
    j["scenario"] = {{"J", c.scenario.J},
                     {"true_nulls", c.scenario.true_null_count},
                     {"sigma", c.scenario.sigma},
                     {"correlation", c.scenario.correlation},
                     {"statistic",
                      c.scenario.statistic == StatisticKind::GaussianKnownSigma ? "gaussian" : "tglr"},
                     {"delta", c.scenario.delta},
                     {"theta_null", c.scenario.theta_null},
                     {"theta_alt", c.scenario.theta_alt}};
    j["error"] = {{"metric", c.scenario.error.metric == ErrorMetric::Fdp ? "fdp" : "kfwe"},
                  {"alpha", c.scenario.error.alpha},
                  {"beta", c.scenario.error.beta},
                  {"gamma1", c.scenario.error.gamma1},
                  {"gamma2", c.scenario.error.gamma2},
                  {"k1", c.scenario.error.k1},
                  {"k2", c.scenario.error.k2},
                  {"weights",
                   c.scenario.error.weights == DeltaChoice::Recommended ? "recommended" : "linear"}};
    j["procedure"] = {{"mode", c.procedure.mode == StepMode::Stepdown ? "stepdown" : "stepup"},
                      {"rejective", c.procedure.rejective},
                      {"rho", c.procedure.rho},
                      {"max_stage_guard", c.procedure.max_stage_guard},
                      {"calib_horizon", c.procedure.calib_horizon},
                      {"calib_reps", c.procedure.calib_reps}};
    if (c.procedure.horizon)
        j["procedure"]["horizon"] = *c.procedure.horizon;
    else
        j["procedure"]["horizon"] = nullptr;
    j["run"] = {{"reps", c.scenario.reps}, {"seed", c.scenario.seed}, {"threads", c.threads}};
    j["baseline"] = {{"enabled", c.baseline_enabled},
                     {"reps", c.baseline_reps},
                     {"n_max", c.baseline_n_max},
                     {"match_prime", c.match_prime},
                     {"alpha_grid", c.prime_alpha_grid},
                     {"n_lo", c.prime_n_lo},
                     {"n_hi", c.prime_n_hi}};
    j["out"] = c.out_dir;
    j["raw_log"] = c.raw_log;
    return j;
}

CliConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    in >> j;
    return parse_config(j);
}

void ensure_out(const CliConfig& c) { std::filesystem::create_directories(c.out_dir); }

void write_echo(const CliConfig& c, const std::string& command) {
    ensure_out(c);
    json j = echo_config(c);
    j["command"] = command;
    std::ofstream out(c.out_dir + "/config_echo.json");
    out << j.dump(2) << "\n";
}

std::string scenario_label(const CliConfig& c) {
    std::string m = c.scenario.error.metric == ErrorMetric::Fdp ? "fdp" : "kfwe";
    return "J" + std::to_string(c.scenario.J) + "_true" +
           std::to_string(c.scenario.true_null_count) + "_" + m;
}

int cmd_step_values(const CliConfig& c) {
    write_echo(c, "step-values");
    const int J = c.scenario.J;
    const auto down = make_ladder(c.scenario.error, StepMode::Stepdown, J);
    const auto up = make_ladder(c.scenario.error, StepMode::Stepup, J);
    const std::string path = c.out_dir + "/step_values.csv";
    std::ofstream out(path);
    write_step_values_csv(out, down.alphas, up.alphas);
    std::cout << "wrote " << path << " (" << J << " rows)\n";
    return 0;
}

int cmd_run(const CliConfig& c) {
    write_echo(c, "run");
    ProcedureState state;
    int J = c.scenario.J;
    if (c.replay) {
        const auto& r = *c.replay;
        J = static_cast<int>(r.stat_paths.size());
        ProcedureConfig pc;
        pc.mode = c.procedure.mode;
        pc.rejective = c.procedure.rejective;
        pc.horizon = c.procedure.horizon;
        pc.a = r.A;
        pc.b = r.B;
        pc.tie_break_seed = c.scenario.seed;
        const auto model = StatisticModel::replay();
        ReplaySource source(r.stat_paths);
        if (pc.rejective) {
            state = pc.mode == StepMode::Stepdown
                        ? run_rejective_stepdown(source, pc, model, J)
                        : run_rejective_stepup(source, pc, model, J);
        } else {
            state = pc.mode == StepMode::Stepdown ? run_stepdown(source, pc, model, J)
                                                  : run_stepup(source, pc, model, J);
        }
    } else {
        ProcedureConfig pc = build_procedure(c.scenario, c.procedure, c.threads);
        pc.tie_break_seed = derive_seed(c.scenario.seed, 0x7135);
        const auto model = c.scenario.statistic == StatisticKind::GaussianKnownSigma
                               ? StatisticModel::gaussian_mean(c.scenario.sigma)
                               : StatisticModel::t_glr(c.scenario.delta);
        CorrelatedGaussianSource source(c.scenario.theta(), c.scenario.sigma,
                                        c.scenario.correlation, derive_seed(c.scenario.seed, 0));
        if (pc.rejective) {
            state = pc.mode == StepMode::Stepdown
                        ? run_rejective_stepdown(source, pc, model, J)
                        : run_rejective_stepup(source, pc, model, J);
        } else {
            state = pc.mode == StepMode::Stepdown ? run_stepdown(source, pc, model, J)
                                                  : run_stepup(source, pc, model, J);
        }
    }

    const std::string path = c.out_dir + "/decisions.csv";
    std::ofstream out(path);
    write_decision_csv_header(out);
    write_decision_csv(out, 0, state);
    if (c.trace) {
        int r = 0, cnt_acc = 0, last_stage = 0;
        for (const auto& d : state.decisions) {
            if (d.stage != last_stage) {
                std::cout << "stage " << d.stage << ": entered with r=" << r
                          << " c=" << cnt_acc << "\n";
                last_stage = d.stage;
            }
            std::cout << "  n=" << d.sample_size << " stream " << (d.stream + 1) << " "
                      << (d.verdict == Verdict::Rejected ? "rejected" : "accepted")
                      << " (statistic " << d.statistic_value << ")\n";
            if (d.verdict == Verdict::Rejected)
                ++r;
            else
                ++cnt_acc;
        }
    }
    std::cout << "stages=" << state.stages << " final_n=" << state.final_n << " reason="
              << (state.reason == TerminationReason::AllResolved
                      ? "all-resolved"
                      : state.reason == TerminationReason::HorizonReached ? "horizon" : "guard")
              << "\n";
    std::cout << "wrote " << path << "\n";
    if (state.reason == TerminationReason::GuardTripped) return kExitRuntime;
    return 0;
}

int cmd_simulate(const CliConfig& c) {
    write_echo(c, "simulate");
    std::vector<ProcedureState> raw;
    const auto report =
        monte_carlo(c.scenario, c.procedure, c.threads, c.raw_log ? &raw : nullptr);
    if (c.raw_log) {
        std::ofstream rawcsv(c.out_dir + "/raw_decisions.csv");
        write_decision_csv_header(rawcsv);
        for (std::size_t r = 0; r < raw.size(); ++r)
            write_decision_csv(rawcsv, static_cast<long>(r), raw[r]);
    }
    std::vector<ReportRow> rows = {to_row(report)};
    std::ofstream csv(c.out_dir + "/report.csv");
    write_report_csv(csv, scenario_label(c), rows);
    std::ofstream tbl(c.out_dir + "/report.txt");
    write_report_table(tbl, scenario_label(c), rows);
    write_report_table(std::cout, scenario_label(c), rows);
    if (report.guard_trips > 0) {
        std::cerr << "warning: " << report.guard_trips << " guard trips\n";
        return kExitRuntime;
    }
    return 0;
}

int cmd_compare(const CliConfig& c) {
    write_echo(c, "compare");
    SequentialSpec down = c.procedure;
    down.mode = StepMode::Stepdown;
    SequentialSpec up = c.procedure;
    up.mode = StepMode::Stepup;

    std::cout << "running sequential stepdown...\n";
    const auto rd = monte_carlo(c.scenario, down, c.threads);
    std::cout << "running sequential stepup...\n";
    const auto ru = monte_carlo(c.scenario, up, c.threads);

    std::vector<ReportRow> rows = {to_row(rd), to_row(ru)};
    if (c.baseline_enabled) {
        // Fixed sample sizes are matched to the type-II rate of the more
        // efficient sequential procedure.
        const double target = rd.e_n <= ru.e_n ? rd.typeII_rate : ru.typeII_rate;
        for (StepMode kind : {StepMode::Stepdown, StepMode::Stepup}) {
            const auto ladder = make_ladder(c.scenario.error, kind, c.scenario.J);
            std::cout << "calibrating fixed "
                      << (kind == StepMode::Stepdown ? "stepdown" : "stepup") << "...\n";
            const auto cal =
                calibrate_fixed_N(c.scenario, kind, ladder, target, c.baseline_reps,
                                  derive_seed(c.scenario.seed, 0xf1dc), c.baseline_n_max,
                                  c.threads);
            ReportRow row;
            row.procedure = kind == StepMode::Stepdown ? "fix_stepdown" : "fix_stepup";
            row.e_n = static_cast<double>(cal.N);
            row.typeI = cal.achieved_typeI;
            row.typeII = cal.achieved_typeII;
            rows.push_back(row);
            auto& seq_row = rows[kind == StepMode::Stepdown ? 0 : 1];
            seq_row.savings = savings_percent(kind == StepMode::Stepdown ? rd.e_n : ru.e_n, cal.N);

            if (c.match_prime) {
                const auto& seq = kind == StepMode::Stepdown ? rd : ru;
                std::vector<double> grid = c.prime_alpha_grid;
                if (grid.empty()) {
                    for (double a = 0.02; a <= 0.2 + 1e-9; a += 0.008) grid.push_back(a);
                }
                const long n_hi = c.prime_n_hi > 0 ? c.prime_n_hi
                                                   : std::min(c.baseline_n_max, cal.N + 15);
                const long n_lo = c.prime_n_lo > 1 ? c.prime_n_lo : std::max(1L, cal.N - 15);
                auto factory = [&](double a) {
                    ErrorSpec e = c.scenario.error;
                    e.alpha = a;
                    return make_ladder(e, kind, c.scenario.J);
                };
                std::cout << "matching both rates (" << grid.size() << " alphas x ["
                          << n_lo << "," << n_hi << "])...\n";
                const auto prime = match_both_rates(
                    c.scenario, kind, seq.typeI_rate, seq.typeII_rate, grid, n_lo, n_hi, factory,
                    c.baseline_reps, derive_seed(c.scenario.seed, 0xf1de), c.threads);
                ReportRow prow;
                prow.procedure =
                    kind == StepMode::Stepdown ? "fix_stepdown_prime" : "fix_stepup_prime";
                prow.e_n = static_cast<double>(prime.N);
                prow.typeI = prime.achieved_typeI;
                prow.typeII = prime.achieved_typeII;
                rows.push_back(prow);
                std::cout << "  matched alpha=" << prime.nominal_alpha << " N=" << prime.N << "\n";
            }
        }
    }
    std::ofstream csv(c.out_dir + "/compare.csv");
    write_report_csv(csv, scenario_label(c), rows);
    std::ofstream tbl(c.out_dir + "/compare.txt");
    write_report_table(tbl, scenario_label(c), rows);
    write_report_table(std::cout, scenario_label(c), rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential stepwise multiple testing with generalized error control"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<long> reps_override;
    std::optional<int> threads_override;
    std::optional<std::string> out_override;
    bool trace = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file")->required();
        cmd->add_option("--seed", seed_override, "override run.seed");
        cmd->add_option("--reps", reps_override, "override run.reps");
        cmd->add_option("--threads", threads_override, "override run.threads");
        cmd->add_option("--out", out_override, "override output directory");
    };

    CLI::App* sv = app.add_subcommand("step-values", "emit stepdown/stepup step values");
    add_common(sv);
    CLI::App* run = app.add_subcommand("run", "run one ensemble and log decisions");
    add_common(run);
    run->add_flag("--trace", trace, "print per-decision trace lines");
    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo operating characteristics");
    add_common(sim);
    CLI::App* cmp = app.add_subcommand("compare", "sequential procedures vs fixed baselines");
    add_common(cmp);

    CLI11_PARSE(app, argc, argv);

    CliConfig config;
    try {
        config = load_config(config_path);
        if (seed_override) config.scenario.seed = *seed_override;
        if (reps_override) config.scenario.reps = *reps_override;
        if (threads_override) config.threads = *threads_override;
        if (out_override) config.out_dir = *out_override;
        config.trace = trace;
        if (!config.replay) config.scenario.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        if (sv->parsed()) return cmd_step_values(config);
        if (run->parsed()) return cmd_run(config);
        if (sim->parsed()) return cmd_simulate(config);
        if (cmp->parsed()) return cmd_compare(config);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
