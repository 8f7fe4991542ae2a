#ifndef SEQSTEP_CRITICAL_VALUES_HPP
#define SEQSTEP_CRITICAL_VALUES_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "seqstep/step_values.hpp"

namespace seqstep {

// Per-stream stopping boundaries indexed by step level w. The chain
// A1 <= ... <= AJ <= BJ <= ... <= B1 must hold, with equal adjacent entries
// exactly when the generating step values tie.
struct CriticalLadder {
    std::vector<double> A;
    std::vector<double> B;
    double rho = 0.0;

    int size() const { return static_cast<int>(B.size()); }
    void validate_chain() const;  // throws on a violated chain or bad ties
};

// Upper-boundary-only ladder for the rejective procedures.
struct RejectiveLadder {
    std::vector<double> B;
    std::optional<long> horizon;
};

// Increasing piecewise-linear map; identity when default-constructed.
// Outside the knot hull it continues with slope 1.
class PiecewiseLinearMap {
  public:
    PiecewiseLinearMap() = default;
    PiecewiseLinearMap(std::vector<double> xs, std::vector<double> ys);

    double operator()(double x) const;
    bool is_identity() const { return xs_.empty(); }

  private:
    std::vector<double> xs_, ys_;
};

// Common standardized boundaries plus the per-stream maps onto them. An
// empty `maps` vector means all streams use the identity.
struct StandardizedLadder {
    std::vector<double> a;  // nondecreasing
    std::vector<double> b;  // nonincreasing
    std::vector<PiecewiseLinearMap> maps;
};

// Closed-form Wald boundaries for one sequential test at error rates (a, b)
// with overshoot correction rho.
std::pair<double, double> wald_boundaries(double a, double b, double rho);

// Critical-value ladder whose (A1, Bw) and (Aw, B1) pairs attain the step
// values up to Wald's approximation; requires alpha_1 + beta_1 <= 1 and
// strictly positive step values.
CriticalLadder sprt_ladder(const StepValueLadder& ladder, double rho);

// Map per-stream ladders onto common anchor values. Default anchors are the
// integers -(J-w+1), +(J-w+1) with ties collapsed; explicit anchors must
// reproduce the ladders' tie pattern. Identical ladders yield identity maps.
StandardizedLadder standardize(
    const std::vector<CriticalLadder>& per_stream,
    const std::optional<std::pair<std::vector<double>, std::vector<double>>>& anchors = {});

// Horizon-free upper boundaries B_w = -log(alpha_w), valid for any
// log-likelihood-ratio statistic by the supermartingale tail bound.
RejectiveLadder rejective_ladder(const std::vector<double>& alphas, std::optional<long> horizon);

// Monte Carlo boundaries for the signed-root t statistic. Simulates
// unit-variance streams and takes B_w as the (1-alpha_w)-quantile of the
// running maximum over n in [2, horizon] of the positive-branch magnitude
// (the sign condition is dropped, which makes the calibration pivotal in the
// unknown scale and errs conservative); A_w symmetrically from mean-delta
// streams via the negative-branch magnitude. Both magnitudes are free of
// delta and sigma, so the resulting ladder is valid for any data scale over
// the calibration horizon.
CriticalLadder glr_t_calibrate(double delta, const StepValueLadder& ladder, long horizon,
                               long reps, std::uint64_t seed, int threads = 0);

// One row per level w: w, A, B and, when given, the standardized a, b.
void write_ladder_table(std::ostream& os, const CriticalLadder& ladder,
                        const StandardizedLadder* standardized = nullptr);

}  // namespace seqstep

#endif
