#ifndef SEQSTEP_STATISTICS_HPP
#define SEQSTEP_STATISTICS_HPP

#include <vector>

namespace seqstep {

// Running state of one stream's sequential test statistic. `value` is always
// a deterministic function of the observation prefix consumed so far.
struct StatisticState {
    long n = 0;
    double value = 0.0;
    double sum = 0.0;
    double sumsq = 0.0;
};

// One-sample statistic kinds used by the procedures:
//  - FiniteLlr: simple log-likelihood ratio over a finite alphabet
//  - GaussianMean: LLR for unit mean shift, (sum - n/2)/sigma^2
//  - TGlr: signed-root generalized likelihood ratio for a mean shift with
//    unknown variance; undefined before n = 2
//  - Replay: observations are the statistic values themselves
class StatisticModel {
  public:
    enum class Kind { FiniteLlr, GaussianMean, TGlr, Replay };

    static StatisticModel finite_llr(const std::vector<double>& null_probs,
                                     const std::vector<double>& alt_probs);
    static StatisticModel gaussian_mean(double sigma);
    static StatisticModel t_glr(double delta);
    static StatisticModel replay();

    void update(StatisticState& s, double x) const;
    Kind kind() const { return kind_; }
    // first n at which `value` is defined and may be compared with boundaries
    long min_n() const { return kind_ == Kind::TGlr ? 2 : 1; }

  private:
    StatisticModel() = default;
    Kind kind_ = Kind::Replay;
    std::vector<double> log_ratio_;
    double inv_sigma2_ = 1.0;
    double delta_ = 1.0;
};

// Signed-root GLR value from sufficient statistics; requires n >= 2 and a
// positive variance estimate. The boundary case xbar == delta/2 takes the
// positive branch.
double t_glr_value(long n, double sum, double sumsq, double delta);

// One-sided p-value 1 - T_{n-1}(mean*sqrt(n-1)/sighat).
double t_pvalue(long n, double mean, double sighat);

// One-sided p-value 1 - Phi(sum/(sigma*sqrt(n))), exact under a zero-mean
// Gaussian null.
double gaussian_pvalue(long n, double sum, double sigma);

}  // namespace seqstep

#endif
