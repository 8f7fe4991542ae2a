#include "seqstep/dist.hpp"

#include <cmath>
#include <initializer_list>

#include "doctest.h"

using namespace seqstep;

TEST_CASE("normal cdf reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(normal_cdf(1.6448536269514722) == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(normal_cdf(-1.6448536269514722) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(normal_cdf(8.0) > 1.0 - 1e-14);
}

TEST_CASE("t cdf against high-precision reference grid") {
    // Values computed with 30-digit incomplete-beta arithmetic.
    struct Row {
        double nu, t, cdf;
    };
    const Row rows[] = {
        {2, 1.0, 0.788675134594813},   {2, -1.0, 0.211324865405187},
        {3, 0.5, 0.674276017575924},   {5, 2.0, 0.949030260585071},
        {10, -2.5, 0.015723422118304}, {30, 1.96, 0.970328843551975},
        {100, 3.0, 0.998296042328335}, {2, 0.0, 0.5},
        {7, 10.0, 0.999989302898555},  {4, -0.25, 0.407451005729591},
    };
    for (const auto& row : rows) {
        CHECK(t_cdf(row.nu, row.t) == doctest::Approx(row.cdf).epsilon(1e-8));
    }
}

TEST_CASE("t cdf with one degree of freedom is Cauchy") {
    CHECK(t_cdf(1, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(t_cdf(1, -1.0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("inc_beta endpoints and symmetry") {
    CHECK(inc_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(inc_beta(2.0, 3.0, 1.0) == 1.0);
    for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        CHECK(inc_beta(2.5, 1.5, x) ==
              doctest::Approx(1.0 - inc_beta(1.5, 2.5, 1.0 - x)).epsilon(1e-12));
    }
}
