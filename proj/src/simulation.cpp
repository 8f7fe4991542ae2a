#include "seqstep/simulation.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "seqstep/math_util.hpp"
#include "seqstep/parallel.hpp"

namespace seqstep {

void ErrorSpec::validate(int J) const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ErrorSpec: alpha outside (0,1)");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("ErrorSpec: beta outside (0,1)");
    if (metric == ErrorMetric::Fdp) {
        if (!(gamma1 >= 0.0 && gamma1 < 1.0) || !(gamma2 >= 0.0 && gamma2 < 1.0))
            throw std::invalid_argument("ErrorSpec: gamma outside [0,1)");
    } else {
        if (k1 < 1 || k1 > J || k2 < 1 || k2 > J)
            throw std::invalid_argument("ErrorSpec: k outside [1,J]");
    }
}

void ScenarioConfig::validate() const {
    if (J < 1) throw std::invalid_argument("ScenarioConfig: J must be >= 1");
    if (true_null_count < 0 || true_null_count > J)
        throw std::invalid_argument("ScenarioConfig: true_null_count outside [0,J]");
    if (!(sigma > 0.0)) throw std::invalid_argument("ScenarioConfig: sigma must be positive");
    if (!(correlation >= 0.0 && correlation <= 1.0))
        throw std::invalid_argument("ScenarioConfig: correlation must lie in [0,1]");
    if (!(delta > 0.0)) throw std::invalid_argument("ScenarioConfig: delta must be positive");
    if (reps < 2) throw std::invalid_argument("ScenarioConfig: reps must be >= 2");
    error.validate(J);
}

std::vector<double> ScenarioConfig::theta() const {
    std::vector<double> t(J, theta_alt);
    for (int j = 0; j < true_null_count; ++j) t[j] = theta_null;
    return t;
}

std::vector<bool> ScenarioConfig::truth_mask() const {
    std::vector<bool> m(J, false);
    for (int j = 0; j < true_null_count; ++j) m[j] = true;
    return m;
}

std::string SequentialSpec::name() const {
    std::string n = mode == StepMode::Stepdown ? "seq_stepdown" : "seq_stepup";
    if (rejective) n += "_rejective";
    return n;
}

void gen_correlated_row(std::span<const double> theta, double sigma, double correlation, Rng& rng,
                        std::span<double> out) {
    if (correlation < 0.0 || correlation > 1.0)
        throw std::invalid_argument("gen_correlated_row: correlation must lie in [0,1]");
    if (theta.size() != out.size()) throw std::invalid_argument("gen_correlated_row: size mismatch");
    const double shared_scale = std::sqrt(correlation);
    const double own_scale = std::sqrt(1.0 - correlation);
    const double z0 = shared_scale > 0.0 ? rng.normal() : 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double z = own_scale > 0.0 ? rng.normal() : 0.0;
        out[j] = theta[j] + sigma * (shared_scale * z0 + own_scale * z);
    }
}

CorrelatedGaussianSource::CorrelatedGaussianSource(std::vector<double> theta, double sigma,
                                                   double correlation, std::uint64_t seed)
    : theta_(std::move(theta)), sigma_(sigma), correlation_(correlation), rng_(seed) {}

bool CorrelatedGaussianSource::next_row(std::span<double> out) {
    gen_correlated_row(theta_, sigma_, correlation_, rng_, out);
    return true;
}

std::pair<double, double> fdp_fnp(std::span<const Verdict> verdicts,
                                  const std::vector<bool>& truth) {
    if (verdicts.size() != truth.size()) throw std::invalid_argument("fdp_fnp: size mismatch");
    long rejected = 0, true_rejected = 0, accepted = 0, false_accepted = 0;
    for (std::size_t j = 0; j < verdicts.size(); ++j) {
        if (verdicts[j] == Verdict::Rejected) {
            ++rejected;
            if (truth[j]) ++true_rejected;
        } else if (verdicts[j] == Verdict::Accepted) {
            ++accepted;
            if (!truth[j]) ++false_accepted;
        }
    }
    const double fdp = rejected > 0 ? static_cast<double>(true_rejected) / rejected : 0.0;
    const double fnp = accepted > 0 ? static_cast<double>(false_accepted) / accepted : 0.0;
    return {fdp, fnp};
}

std::pair<bool, bool> kfwe_indicators(std::span<const Verdict> verdicts,
                                      const std::vector<bool>& truth, int k1, int k2) {
    if (verdicts.size() != truth.size()) throw std::invalid_argument("kfwe_indicators: size mismatch");
    long true_rejected = 0, false_accepted = 0;
    for (std::size_t j = 0; j < verdicts.size(); ++j) {
        if (verdicts[j] == Verdict::Rejected && truth[j]) ++true_rejected;
        if (verdicts[j] == Verdict::Accepted && !truth[j]) ++false_accepted;
    }
    return {true_rejected >= k1, false_accepted >= k2};
}

StepValueLadder make_ladder(const ErrorSpec& error, StepMode mode, int J) {
    error.validate(J);
    const bool linear = error.weights == DeltaChoice::Linear;
    if (error.metric == ErrorMetric::Fdp) {
        const DeltaSequence delta = linear ? delta_linear(J) : delta_holm_fdp(J, error.gamma1);
        const DeltaSequence eta = linear ? delta_linear(J) : delta_holm_fdp(J, error.gamma2);
        return mode == StepMode::Stepdown
                   ? stepdown_fdp_values(error.alpha, error.beta, error.gamma1, error.gamma2, delta, eta)
                   : stepup_fdp_values(error.alpha, error.beta, error.gamma1, error.gamma2, delta, eta);
    }
    if (mode == StepMode::Stepdown)
        return stepdown_kfwe_values(error.alpha, error.beta, error.k1, error.k2, J);
    const DeltaSequence delta = linear ? delta_linear(J) : delta_kfwe(J, error.k1);
    const DeltaSequence eta = linear ? delta_linear(J) : delta_kfwe(J, error.k2);
    return stepup_kfwe_values(error.alpha, error.beta, error.k1, error.k2, delta, eta);
}

ProcedureConfig build_procedure(const ScenarioConfig& scenario, const SequentialSpec& spec,
                                int threads) {
    scenario.validate();
    const StepValueLadder ladder = make_ladder(scenario.error, spec.mode, scenario.J);

    ProcedureConfig config;
    config.mode = spec.mode;
    config.rejective = spec.rejective;
    config.horizon = spec.horizon;
    config.max_stage_guard = spec.max_stage_guard;

    if (spec.rejective) {
        if (scenario.statistic == StatisticKind::GaussianKnownSigma) {
            // Supermartingale bound; valid for a true log-likelihood ratio.
            config.b = rejective_ladder(ladder.alphas, spec.horizon).B;
        } else {
            // The t statistic is not a likelihood ratio. Calibrate the upper
            // boundaries over the truncation horizon instead; the pivotal
            // running-max quantiles bound the crossing probability directly.
            StepValueLadder upper_only = ladder;
            if (upper_only.betas.empty()) upper_only.betas = upper_only.alphas;
            if (!spec.horizon) throw std::invalid_argument("rejective runs require a horizon");
            const CriticalLadder crit =
                glr_t_calibrate(scenario.delta, upper_only, *spec.horizon, spec.calib_reps,
                                derive_seed(scenario.seed, 0xca11b), threads);
            config.b = crit.B;
        }
        return config;  // validated per run once the tie-break seed is set
    }

    CriticalLadder crit;
    if (scenario.statistic == StatisticKind::GaussianKnownSigma) {
        crit = sprt_ladder(ladder, spec.rho);
    } else {
        crit = glr_t_calibrate(scenario.delta, ladder, spec.calib_horizon, spec.calib_reps,
                               derive_seed(scenario.seed, 0xca11b), threads);
    }
    // Common boundaries across streams: identity standardizer.
    config.a = crit.A;
    config.b = crit.B;
    return config;
}

SimulationReport monte_carlo(const ScenarioConfig& scenario, const SequentialSpec& spec,
                             int threads, std::vector<ProcedureState>* raw_states) {
    scenario.validate();
    if (raw_states) raw_states->assign(scenario.reps, ProcedureState{});
    const ProcedureConfig base = build_procedure(scenario, spec, threads);
    const std::vector<double> theta = scenario.theta();
    const std::vector<bool> truth = scenario.truth_mask();

    StatisticModel model = scenario.statistic == StatisticKind::GaussianKnownSigma
                               ? StatisticModel::gaussian_mean(scenario.sigma)
                               : StatisticModel::t_glr(scenario.delta);

    const long reps = scenario.reps;
    std::vector<double> avg_n(reps, 0.0);
    std::vector<char> typeI(reps, 0), typeII(reps, 0);
    std::atomic<long> guard_trips{0};

    parallel_for(reps, threads, [&](long rep) {
        CorrelatedGaussianSource source(theta, scenario.sigma, scenario.correlation,
                                        derive_seed(scenario.seed, static_cast<std::uint64_t>(rep)));
        ProcedureConfig config = base;
        config.tie_break_seed = derive_seed(scenario.seed, 0x7135 + static_cast<std::uint64_t>(rep));
        ProcedureState state;
        if (spec.rejective) {
            state = spec.mode == StepMode::Stepdown
                        ? run_rejective_stepdown(source, config, model, scenario.J)
                        : run_rejective_stepup(source, config, model, scenario.J);
        } else {
            state = spec.mode == StepMode::Stepdown
                        ? run_stepdown(source, config, model, scenario.J)
                        : run_stepup(source, config, model, scenario.J);
        }
        if (state.reason == TerminationReason::GuardTripped) guard_trips.fetch_add(1);
        avg_n[rep] = state.average_sample_size();
        if (raw_states) (*raw_states)[rep] = state;
        if (scenario.error.metric == ErrorMetric::Fdp) {
            const auto [fdp, fnp] = fdp_fnp(state.verdicts, truth);
            typeI[rep] = fdp > scenario.error.gamma1 ? 1 : 0;
            typeII[rep] = fnp > scenario.error.gamma2 ? 1 : 0;
        } else {
            const auto [t1, t2] = kfwe_indicators(state.verdicts, truth, scenario.error.k1,
                                                  scenario.error.k2);
            typeI[rep] = t1 ? 1 : 0;
            typeII[rep] = t2 ? 1 : 0;
        }
    });

    SimulationReport report;
    report.procedure_name = spec.name();
    report.reps = reps;
    report.guard_trips = guard_trips.load();
    report.e_n = mean(avg_n);
    report.se = sample_sd(avg_n) / std::sqrt(static_cast<double>(reps));
    long c1 = 0, c2 = 0;
    for (long r = 0; r < reps; ++r) {
        c1 += typeI[r];
        c2 += typeII[r];
    }
    report.typeI_rate = static_cast<double>(c1) / static_cast<double>(reps);
    report.typeII_rate = static_cast<double>(c2) / static_cast<double>(reps);
    return report;
}

long savings_percent(double seq_en, long fixed_n) {
    if (fixed_n <= 0) throw std::invalid_argument("savings_percent: fixed_n must be positive");
    return std::lround(100.0 * (1.0 - seq_en / static_cast<double>(fixed_n)));
}

}  // namespace seqstep
