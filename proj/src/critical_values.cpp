#include "seqstep/critical_values.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "seqstep/parallel.hpp"
#include "seqstep/rng.hpp"

namespace seqstep {

namespace {

constexpr double kTieEps = 1e-12;

bool same(double x, double y) { return std::fabs(x - y) <= kTieEps * std::max({1.0, std::fabs(x), std::fabs(y)}); }

}  // namespace

void CriticalLadder::validate_chain() const {
    if (A.size() != B.size() || B.empty())
        throw std::invalid_argument("CriticalLadder: A and B must be nonempty and equal length");
    const int J = size();
    for (int w = 0; w + 1 < J; ++w) {
        if (A[w] > A[w + 1] + kTieEps) throw std::invalid_argument("CriticalLadder: A not nondecreasing");
        if (B[w] + kTieEps < B[w + 1]) throw std::invalid_argument("CriticalLadder: B not nonincreasing");
    }
    if (A[J - 1] > B[J - 1] + kTieEps)
        throw std::invalid_argument("CriticalLadder: A_J exceeds B_J");
}

PiecewiseLinearMap::PiecewiseLinearMap(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size() || xs_.size() < 2)
        throw std::invalid_argument("PiecewiseLinearMap: need >= 2 knots");
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        if (!(xs_[i] > xs_[i - 1]) || !(ys_[i] > ys_[i - 1]))
            throw std::invalid_argument("PiecewiseLinearMap: knots must be strictly increasing");
    }
}

double PiecewiseLinearMap::operator()(double x) const {
    if (xs_.empty()) return x;
    if (x <= xs_.front()) return ys_.front() + (x - xs_.front());
    if (x >= xs_.back()) return ys_.back() + (x - xs_.back());
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    const double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    return ys_[i - 1] + t * (ys_[i] - ys_[i - 1]);
}

std::pair<double, double> wald_boundaries(double a, double b, double rho) {
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0))
        throw std::invalid_argument("wald_boundaries: a,b must lie in (0,1)");
    if (a + b > 1.0) throw std::invalid_argument("wald_boundaries: a + b must not exceed 1");
    if (rho < 0.0) throw std::invalid_argument("wald_boundaries: rho must be nonnegative");
    const double lower = std::log(b / (1.0 - a)) + rho;
    const double upper = std::log((1.0 - b) / a) - rho;
    return {lower, upper};
}

CriticalLadder sprt_ladder(const StepValueLadder& ladder, double rho) {
    ladder.validate();
    if (ladder.betas.empty())
        throw std::invalid_argument("sprt_ladder: step values must include betas");
    if (rho < 0.0) throw std::invalid_argument("sprt_ladder: rho must be nonnegative");
    const int J = ladder.size();
    const double a1 = ladder.alphas.front();
    const double b1 = ladder.betas.front();
    if (!(a1 > 0.0) || !(b1 > 0.0))
        throw std::invalid_argument("sprt_ladder: step values must be strictly positive");
    if (ladder.alphas.back() >= 1.0 || ladder.betas.back() >= 1.0)
        throw std::invalid_argument("sprt_ladder: step values must be strictly below 1");
    if (a1 + b1 > 1.0) throw std::invalid_argument("sprt_ladder: alpha_1 + beta_1 must not exceed 1");

    CriticalLadder out;
    out.rho = rho;
    out.A.resize(J);
    out.B.resize(J);
    for (int w = 0; w < J; ++w) {
        const double aw = ladder.alphas[w];
        const double bw = ladder.betas[w];
        out.A[w] = std::log(bw * (1.0 - b1) / (1.0 - b1 - a1 * (1.0 - bw))) + rho;
        out.B[w] = std::log((1.0 - a1 - b1 * (1.0 - aw)) / (aw * (1.0 - a1))) - rho;
    }
    out.validate_chain();
    return out;
}

namespace {

// Integer anchors descending from the outside in, with ties collapsed to
// match the ladder's tie pattern.
std::vector<double> collapse_anchors(const std::vector<double>& ladder_vals, bool upper) {
    const int J = static_cast<int>(ladder_vals.size());
    std::vector<double> anchors(J);
    double cur = upper ? 1.0 : -1.0;
    anchors[J - 1] = cur;
    for (int w = J - 2; w >= 0; --w) {
        if (!same(ladder_vals[w], ladder_vals[w + 1])) cur += upper ? 1.0 : -1.0;
        anchors[w] = cur;
    }
    return anchors;
}

void check_anchor_pattern(const std::vector<double>& anchors, const std::vector<double>& ladder_vals,
                          bool upper, const char* name) {
    const int J = static_cast<int>(anchors.size());
    for (int w = 0; w + 1 < J; ++w) {
        const bool ladder_tie = same(ladder_vals[w], ladder_vals[w + 1]);
        const bool anchor_tie = same(anchors[w], anchors[w + 1]);
        if (ladder_tie != anchor_tie)
            throw std::invalid_argument(std::string("standardize: ") + name +
                                        " anchor ties do not match ladder ties");
        const bool ok = upper ? (anchors[w] >= anchors[w + 1]) : (anchors[w] <= anchors[w + 1]);
        if (!ok)
            throw std::invalid_argument(std::string("standardize: ") + name +
                                        " anchors violate monotonicity");
    }
}

}  // namespace

StandardizedLadder standardize(
    const std::vector<CriticalLadder>& per_stream,
    const std::optional<std::pair<std::vector<double>, std::vector<double>>>& anchors) {
    if (per_stream.empty()) throw std::invalid_argument("standardize: no ladders");
    const int J = per_stream.front().size();
    for (const auto& lad : per_stream) {
        lad.validate_chain();
        if (lad.size() != J) throw std::invalid_argument("standardize: ladder size mismatch");
    }

    // Tie patterns must agree across streams; take stream 0 as reference.
    const CriticalLadder& ref = per_stream.front();
    for (const auto& lad : per_stream) {
        for (int w = 0; w + 1 < J; ++w) {
            if (same(ref.A[w], ref.A[w + 1]) != same(lad.A[w], lad.A[w + 1]) ||
                same(ref.B[w], ref.B[w + 1]) != same(lad.B[w], lad.B[w + 1]))
                throw std::invalid_argument("standardize: streams disagree on boundary ties");
        }
    }

    bool all_equal = true;
    for (const auto& lad : per_stream) {
        for (int w = 0; w < J; ++w) {
            if (!same(lad.A[w], ref.A[w]) || !same(lad.B[w], ref.B[w])) all_equal = false;
        }
    }

    StandardizedLadder out;
    if (all_equal && !anchors) {
        // Common ladders: standardizing can be dispensed with.
        out.a = ref.A;
        out.b = ref.B;
        return out;
    }

    if (anchors) {
        out.a = anchors->first;
        out.b = anchors->second;
        if (static_cast<int>(out.a.size()) != J || static_cast<int>(out.b.size()) != J)
            throw std::invalid_argument("standardize: anchor length mismatch");
    } else {
        out.a = collapse_anchors(ref.A, /*upper=*/false);
        out.b = collapse_anchors(ref.B, /*upper=*/true);
    }
    check_anchor_pattern(out.a, ref.A, /*upper=*/false, "a");
    check_anchor_pattern(out.b, ref.B, /*upper=*/true, "b");
    if (out.a.back() > out.b.back())
        throw std::invalid_argument("standardize: a_J exceeds b_J");

    out.maps.reserve(per_stream.size());
    for (const auto& lad : per_stream) {
        // Knots: distinct ladder values ascending, mapped to their anchors.
        std::vector<double> xs, ys;
        auto push = [&](double x, double y) {
            if (!xs.empty() && same(x, xs.back())) {
                if (!same(y, ys.back()))
                    throw std::invalid_argument("standardize: equal boundaries need equal anchors");
                return;
            }
            xs.push_back(x);
            ys.push_back(y);
        };
        for (int w = 0; w < J; ++w) push(lad.A[w], out.a[w]);
        for (int w = J - 1; w >= 0; --w) push(lad.B[w], out.b[w]);
        out.maps.emplace_back(std::move(xs), std::move(ys));
    }
    return out;
}

RejectiveLadder rejective_ladder(const std::vector<double>& alphas, std::optional<long> horizon) {
    if (alphas.empty()) throw std::invalid_argument("rejective_ladder: empty step values");
    RejectiveLadder out;
    out.horizon = horizon;
    out.B.resize(alphas.size());
    double prev = 0.0;
    for (std::size_t w = 0; w < alphas.size(); ++w) {
        if (!(alphas[w] > 0.0 && alphas[w] <= 1.0))
            throw std::invalid_argument("rejective_ladder: step values must lie in (0,1]");
        if (alphas[w] < prev) throw std::invalid_argument("rejective_ladder: step values not nondecreasing");
        prev = alphas[w];
        out.B[w] = -std::log(alphas[w]);
    }
    return out;
}

namespace {

// Running maximum over n in [2, horizon] of n*sqrt(log1p(r_n^2)) where r_n
// is the self-normalized mean of a unit-variance stream. Shifting the stream
// mean cancels inside r_n, so one routine covers both calibration pivots.
void magnitude_maxima(long horizon, long reps, std::uint64_t seed, int threads,
                      std::vector<double>& out) {
    out.assign(reps, 0.0);
    parallel_for(reps, threads, [&](long r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        double sum = 0.0, sumsq = 0.0, best = 0.0;
        for (long n = 1; n <= horizon; ++n) {
            const double x = rng.normal();
            sum += x;
            sumsq += x * x;
            if (n < 2) continue;
            const double xbar = sum / n;
            const double var = sumsq / n - xbar * xbar;
            if (!(var > 0.0)) continue;  // measure-zero degenerate step
            const double rr = xbar * xbar / var;
            const double mag = n * std::sqrt(std::log1p(rr));
            if (mag > best) best = mag;
        }
        out[r] = best;
    });
    std::sort(out.begin(), out.end());
}

double upper_quantile(const std::vector<double>& sorted, double level, long reps) {
    // (1-level)-quantile as an order statistic, demanding >= 10 tail points.
    if (level * static_cast<double>(reps) < 10.0)
        throw std::invalid_argument(
            "glr_t_calibrate: quantile level too extreme for rep count; increase reps");
    long k = static_cast<long>(std::ceil((1.0 - level) * static_cast<double>(reps)));
    k = std::clamp(k, 1L, reps);
    return sorted[static_cast<std::size_t>(k - 1)];
}

}  // namespace

CriticalLadder glr_t_calibrate(double delta, const StepValueLadder& ladder, long horizon,
                               long reps, std::uint64_t seed, int threads) {
    ladder.validate();
    if (!(delta > 0.0)) throw std::invalid_argument("glr_t_calibrate: delta must be positive");
    if (ladder.betas.empty())
        throw std::invalid_argument("glr_t_calibrate: step values must include betas");
    if (horizon < 2) throw std::invalid_argument("glr_t_calibrate: horizon must be >= 2");
    if (reps < 1) throw std::invalid_argument("glr_t_calibrate: reps must be positive");

    // Two independent passes: null pivot for the B side, alternative pivot
    // for the A side. The tracked magnitude is the same pivotal functional in
    // both cases (see magnitude_maxima); delta itself cancels out of it.
    std::vector<double> null_max, alt_max;
    magnitude_maxima(horizon, reps, derive_seed(seed, 0x11), threads, null_max);
    magnitude_maxima(horizon, reps, derive_seed(seed, 0x22), threads, alt_max);

    const int J = ladder.size();
    CriticalLadder out;
    out.rho = 0.0;
    out.A.resize(J);
    out.B.resize(J);
    for (int w = 0; w < J; ++w) {
        out.B[w] = upper_quantile(null_max, ladder.alphas[w], reps);
        out.A[w] = -upper_quantile(alt_max, ladder.betas[w], reps);
    }
    // Monotone rearrangement; empirical quantiles already satisfy this, the
    // pass guards against pathological tie handling.
    for (int w = 1; w < J; ++w) {
        out.B[w] = std::min(out.B[w], out.B[w - 1]);
        out.A[w] = std::max(out.A[w], out.A[w - 1]);
    }
    out.validate_chain();
    return out;
}

void write_ladder_table(std::ostream& os, const CriticalLadder& ladder,
                        const StandardizedLadder* standardized) {
    const int J = ladder.size();
    os << "w A B";
    if (standardized) os << " a b";
    os << "\n";
    os << std::setprecision(10);
    for (int w = 0; w < J; ++w) {
        os << (w + 1) << " " << ladder.A[w] << " " << ladder.B[w];
        if (standardized) os << " " << standardized->a[w] << " " << standardized->b[w];
        os << "\n";
    }
}

}  // namespace seqstep
