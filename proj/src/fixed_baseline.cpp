#include "seqstep/fixed_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "seqstep/parallel.hpp"
#include "seqstep/statistics.hpp"

namespace seqstep {

namespace {

std::vector<int> order_by_p(std::span<const double> p) {
    std::vector<int> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return p[x] < p[y]; });
    return idx;
}

void check_inputs(std::span<const double> p, std::span<const double> alphas) {
    if (p.size() != alphas.size()) throw std::invalid_argument("fixed procedure: length mismatch");
    if (p.empty()) throw std::invalid_argument("fixed procedure: empty input");
    for (double x : p)
        if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("fixed procedure: p outside [0,1]");
}

}  // namespace

std::vector<int> fixed_stepdown(std::span<const double> p, std::span<const double> alphas) {
    check_inputs(p, alphas);
    const auto idx = order_by_p(p);
    int d = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (p[idx[j]] <= alphas[j])
            d = static_cast<int>(j) + 1;
        else
            break;
    }
    return {idx.begin(), idx.begin() + d};
}

std::vector<int> fixed_stepup(std::span<const double> p, std::span<const double> alphas) {
    check_inputs(p, alphas);
    const auto idx = order_by_p(p);
    int u = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (p[idx[j]] <= alphas[j]) u = static_cast<int>(j) + 1;
    }
    return {idx.begin(), idx.begin() + u};
}

std::pair<double, double> estimate_fixed_rates(const ScenarioConfig& scenario, StepMode kind,
                                               const std::vector<double>& alphas, long N, long reps,
                                               std::uint64_t seed, int threads) {
    scenario.validate();
    if (N < 1) throw std::invalid_argument("estimate_fixed_rates: N must be >= 1");
    if (scenario.statistic == StatisticKind::TGlr && N < 2)
        throw std::invalid_argument("estimate_fixed_rates: t p-values require N >= 2");
    const int J = scenario.J;
    const std::vector<double> theta = scenario.theta();
    const std::vector<bool> truth = scenario.truth_mask();

    std::vector<char> typeI(reps, 0), typeII(reps, 0);
    parallel_for(reps, threads, [&](long rep) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
        std::vector<double> row(J), sum(J, 0.0), sumsq(J, 0.0);
        for (long n = 0; n < N; ++n) {
            gen_correlated_row(theta, scenario.sigma, scenario.correlation, rng, row);
            for (int j = 0; j < J; ++j) {
                sum[j] += row[j];
                sumsq[j] += row[j] * row[j];
            }
        }
        std::vector<double> p(J);
        for (int j = 0; j < J; ++j) {
            if (scenario.statistic == StatisticKind::GaussianKnownSigma) {
                p[j] = gaussian_pvalue(N, sum[j], scenario.sigma);
            } else {
                const double xbar = sum[j] / N;
                const double var = std::max(sumsq[j] / N - xbar * xbar, 0.0);
                p[j] = t_pvalue(N, xbar, std::sqrt(var));
            }
        }
        const auto rejected = kind == StepMode::Stepdown ? fixed_stepdown(p, alphas)
                                                         : fixed_stepup(p, alphas);
        std::vector<Verdict> verdicts(J, Verdict::Accepted);
        for (int j : rejected) verdicts[j] = Verdict::Rejected;
        if (scenario.error.metric == ErrorMetric::Fdp) {
            const auto [fdp, fnp] = fdp_fnp(verdicts, truth);
            typeI[rep] = fdp > scenario.error.gamma1 ? 1 : 0;
            typeII[rep] = fnp > scenario.error.gamma2 ? 1 : 0;
        } else {
            const auto [t1, t2] =
                kfwe_indicators(verdicts, truth, scenario.error.k1, scenario.error.k2);
            typeI[rep] = t1 ? 1 : 0;
            typeII[rep] = t2 ? 1 : 0;
        }
    });
    long c1 = 0, c2 = 0;
    for (long r = 0; r < reps; ++r) {
        c1 += typeI[r];
        c2 += typeII[r];
    }
    return {static_cast<double>(c1) / reps, static_cast<double>(c2) / reps};
}

FixedCalibration calibrate_fixed_N(const ScenarioConfig& scenario, StepMode kind,
                                   const StepValueLadder& ladder, double target_typeII, long reps,
                                   std::uint64_t seed, long n_max, int threads) {
    if (reps < 1000) throw std::invalid_argument("calibrate_fixed_N: reps must be >= 1000");
    if (!(target_typeII >= 0.0 && target_typeII <= 1.0))
        throw std::invalid_argument("calibrate_fixed_N: target outside [0,1]");
    const long n_lo = scenario.statistic == StatisticKind::TGlr ? 2 : 1;
    if (n_max < n_lo) throw std::invalid_argument("calibrate_fixed_N: empty search range");

    auto rate = [&](long N) {
        return estimate_fixed_rates(scenario, kind, ladder.alphas, N, reps, seed, threads);
    };

    // Bisection for the smallest N with rate <= target (rate nonincreasing in
    // N under common random numbers), then a local scan for the closest fit.
    long lo = n_lo, hi = n_max;
    const double rate_hi = rate(hi).second;
    if (rate_hi > target_typeII) {
        throw std::runtime_error(
            "calibrate_fixed_N: target type-II rate unreachable within [1, n_max]; achieved " +
            std::to_string(rate_hi) + " at N = " + std::to_string(hi));
    }
    if (rate(lo).second <= target_typeII) {
        hi = lo;  // any N suffices; smallest wins
    }
    while (lo < hi) {
        const long mid = lo + (hi - lo) / 2;
        if (rate(mid).second <= target_typeII)
            hi = mid;
        else
            lo = mid + 1;
    }
    FixedCalibration best;
    double best_dist = 2.0;
    for (long N = std::max(n_lo, hi - 2); N <= std::min(n_max, hi + 2); ++N) {
        const auto [t1, t2] = rate(N);
        const double dist = std::fabs(t2 - target_typeII);
        if (dist < best_dist - 1e-15) {
            best_dist = dist;
            best = {N, scenario.error.alpha, t1, t2};
        }
    }
    return best;
}

FixedCalibration match_both_rates(const ScenarioConfig& scenario, StepMode kind,
                                  double target_typeI, double target_typeII,
                                  std::span<const double> alpha_grid, long n_lo, long n_hi,
                                  const std::function<StepValueLadder(double)>& ladder_for_alpha,
                                  long reps, std::uint64_t seed, int threads) {
    if (alpha_grid.empty() || n_lo > n_hi)
        throw std::invalid_argument("match_both_rates: empty search grid");
    const long n_min = scenario.statistic == StatisticKind::TGlr ? 2 : 1;
    FixedCalibration best;
    double best_dev = std::numeric_limits<double>::infinity();
    for (double a : alpha_grid) {
        const StepValueLadder ladder = ladder_for_alpha(a);
        for (long N = std::max(n_lo, n_min); N <= n_hi; ++N) {
            const auto [t1, t2] =
                estimate_fixed_rates(scenario, kind, ladder.alphas, N, reps, seed, threads);
            const double dev = std::max(std::fabs(t1 - target_typeI), std::fabs(t2 - target_typeII));
            if (dev < best_dev - 1e-15) {
                best_dev = dev;
                best = {N, a, t1, t2};
            }
        }
    }
    return best;
}

}  // namespace seqstep
