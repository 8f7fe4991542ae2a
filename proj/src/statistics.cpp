#include "seqstep/statistics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "seqstep/dist.hpp"

namespace seqstep {

StatisticModel StatisticModel::finite_llr(const std::vector<double>& null_probs,
                                          const std::vector<double>& alt_probs) {
    if (null_probs.size() != alt_probs.size() || null_probs.empty())
        throw std::invalid_argument("finite_llr: probability tables must be nonempty and equal length");
    StatisticModel m;
    m.kind_ = Kind::FiniteLlr;
    m.log_ratio_.resize(null_probs.size());
    for (std::size_t k = 0; k < null_probs.size(); ++k) {
        const double h = null_probs[k];
        const double g = alt_probs[k];
        if (h < 0 || g < 0) throw std::invalid_argument("finite_llr: negative probability");
        // NaN marks symbols where the ratio is undefined; observing one is an error.
        m.log_ratio_[k] = (h > 0.0 && g > 0.0) ? std::log(g / h)
                                               : std::numeric_limits<double>::quiet_NaN();
    }
    return m;
}

StatisticModel StatisticModel::gaussian_mean(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_mean: sigma must be positive");
    StatisticModel m;
    m.kind_ = Kind::GaussianMean;
    m.inv_sigma2_ = 1.0 / (sigma * sigma);
    return m;
}

StatisticModel StatisticModel::t_glr(double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("t_glr: delta must be positive");
    StatisticModel m;
    m.kind_ = Kind::TGlr;
    m.delta_ = delta;
    return m;
}

StatisticModel StatisticModel::replay() {
    StatisticModel m;
    m.kind_ = Kind::Replay;
    return m;
}

void StatisticModel::update(StatisticState& s, double x) const {
    switch (kind_) {
        case Kind::FiniteLlr: {
            const long k = static_cast<long>(x);
            if (k < 0 || k >= static_cast<long>(log_ratio_.size()))
                throw std::invalid_argument("finite_llr: observation outside alphabet");
            const double lr = log_ratio_[k];
            if (std::isnan(lr))
                throw std::domain_error("finite_llr: zero density at observed symbol, ratio undefined");
            ++s.n;
            s.value += lr;
            break;
        }
        case Kind::GaussianMean:
            ++s.n;
            s.sum += x;
            s.value = (s.sum - 0.5 * s.n) * inv_sigma2_;
            break;
        case Kind::TGlr:
            ++s.n;
            s.sum += x;
            s.sumsq += x * x;
            if (s.n >= 2) s.value = t_glr_value(s.n, s.sum, s.sumsq, delta_);
            break;
        case Kind::Replay:
            ++s.n;
            s.value = x;
            break;
    }
}

double t_glr_value(long n, double sum, double sumsq, double delta) {
    if (n < 2) throw std::domain_error("t_glr_value: undefined for n < 2");
    if (!(delta > 0.0)) throw std::invalid_argument("t_glr_value: delta must be positive");
    const double xbar = sum / n;
    const double var = sumsq / n - xbar * xbar;
    if (!(var > 0.0)) throw std::domain_error("t_glr_value: zero variance estimate");
    const double inv_s = 1.0 / std::sqrt(var);
    if (xbar >= 0.5 * delta) {
        const double r = xbar * inv_s;
        return n * std::sqrt(std::log1p(r * r));
    }
    const double r = (xbar - delta) * inv_s;
    return -n * std::sqrt(std::log1p(r * r));
}

double t_pvalue(long n, double mean, double sighat) {
    if (n < 2) throw std::invalid_argument("t_pvalue: n must be >= 2");
    if (!(sighat > 0.0)) throw std::invalid_argument("t_pvalue: sighat must be positive");
    const double arg = mean * std::sqrt(static_cast<double>(n - 1)) / sighat;
    return 1.0 - t_cdf(static_cast<double>(n - 1), arg);
}

double gaussian_pvalue(long n, double sum, double sigma) {
    if (n < 1) throw std::invalid_argument("gaussian_pvalue: n must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_pvalue: sigma must be positive");
    return 1.0 - normal_cdf(sum / (sigma * std::sqrt(static_cast<double>(n))));
}

}  // namespace seqstep
