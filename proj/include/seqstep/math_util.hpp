#ifndef SEQSTEP_MATH_UTIL_HPP
#define SEQSTEP_MATH_UTIL_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace seqstep {

// Floor/ceil of products like gamma*j where gamma is an intended decimal
// value (0.1, 0.25, ...) stored in binary. A relative guard of 1e-9 keeps
// results stable against representation error; exact-integer arguments are
// unaffected because the guard is far below the spacing of the integers
// involved here (|x| < 1e6).
inline long floor_guarded(double x) {
    return static_cast<long>(std::floor(x + 1e-9 * std::max(1.0, std::fabs(x))));
}

inline long ceil_guarded(double x) {
    return static_cast<long>(std::ceil(x - 1e-9 * std::max(1.0, std::fabs(x))));
}

// Pairwise summation; keeps reductions deterministic and stable regardless
// of how replicate results were produced.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double mean(std::span<const double> v) {
    return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator).
inline double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
}

}  // namespace seqstep

#endif
