#ifndef SEQSTEP_FIXED_BASELINE_HPP
#define SEQSTEP_FIXED_BASELINE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "seqstep/simulation.hpp"

namespace seqstep {

// Classical fixed-sample procedures on p-values. Both return the rejected
// stream indices (0-based). Ties in p are broken by stream index.
std::vector<int> fixed_stepdown(std::span<const double> p, std::span<const double> alphas);
std::vector<int> fixed_stepup(std::span<const double> p, std::span<const double> alphas);

struct FixedCalibration {
    long N = 0;
    double nominal_alpha = 0.0;
    double achieved_typeI = 0.0;
    double achieved_typeII = 0.0;
};

// Monte Carlo estimate of the achieved generalized error rates of the fixed
// procedure with streamwise sample size N under the scenario. Common random
// numbers: replicate r consumes the same stream prefix for every N.
std::pair<double, double> estimate_fixed_rates(const ScenarioConfig& scenario, StepMode kind,
                                               const std::vector<double>& alphas, long N, long reps,
                                               std::uint64_t seed, int threads = 0);

// Smallest-distance streamwise sample size matching the target type-II rate,
// assuming the rate is nonincreasing in N; ties resolve toward smaller N.
FixedCalibration calibrate_fixed_N(const ScenarioConfig& scenario, StepMode kind,
                                   const StepValueLadder& ladder, double target_typeII, long reps,
                                   std::uint64_t seed, long n_max = 500, int threads = 0);

// Exhaustive grid search jointly matching both rates; deviation metric is
// the max of the two absolute errors. ladder_for_alpha rebuilds the step
// values at each nominal alpha grid point.
FixedCalibration match_both_rates(const ScenarioConfig& scenario, StepMode kind,
                                  double target_typeI, double target_typeII,
                                  std::span<const double> alpha_grid, long n_lo, long n_hi,
                                  const std::function<StepValueLadder(double)>& ladder_for_alpha,
                                  long reps, std::uint64_t seed, int threads = 0);

}  // namespace seqstep

#endif
