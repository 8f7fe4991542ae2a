#include "seqstep/simulation.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "seqstep/report.hpp"

using namespace seqstep;

TEST_CASE("gen_correlated_row") {
    Rng rng(1);
    SUBCASE("c = 0 gives independent coordinates with the right moments") {
        const std::vector<double> theta = {0.0, 1.0, -2.0};
        std::vector<double> row(3), sum(3, 0.0), sumsq(3, 0.0);
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            gen_correlated_row(theta, 2.0, 0.0, rng, row);
            for (int j = 0; j < 3; ++j) {
                sum[j] += row[j];
                sumsq[j] += row[j] * row[j];
            }
        }
        for (int j = 0; j < 3; ++j) {
            const double m = sum[j] / n;
            const double v = sumsq[j] / n - m * m;
            CHECK(m == doctest::Approx(theta[j]).epsilon(0.05));
            CHECK(v == doctest::Approx(4.0).epsilon(0.05));
        }
    }
    SUBCASE("c = .95 empirical pairwise correlation") {
        const std::vector<double> theta = {0.0, 0.0};
        std::vector<double> row(2);
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            gen_correlated_row(theta, 2.0, 0.95, rng, row);
            sx += row[0];
            sy += row[1];
            sxx += row[0] * row[0];
            syy += row[1] * row[1];
            sxy += row[0] * row[1];
        }
        const double cx = sxx / n - (sx / n) * (sx / n);
        const double cy = syy / n - (sy / n) * (sy / n);
        const double cxy = sxy / n - (sx / n) * (sy / n);
        CHECK(cxy / std::sqrt(cx * cy) == doctest::Approx(0.95).epsilon(0.011));
    }
    SUBCASE("c = 1 shares one noise term") {
        const std::vector<double> theta = {0.5, -0.5};
        std::vector<double> row(2);
        gen_correlated_row(theta, 2.0, 1.0, rng, row);
        CHECK(row[0] - theta[0] == doctest::Approx(row[1] - theta[1]).epsilon(1e-12));
    }
    SUBCASE("negative correlation rejected") {
        std::vector<double> row(2);
        const std::vector<double> theta = {0.0, 0.0};
        CHECK_THROWS(gen_correlated_row(theta, 1.0, -0.1, rng, row));
    }
}

TEST_CASE("fdp_fnp") {
    const std::vector<bool> truth = {true, true, false, false};
    SUBCASE("nothing rejected gives zero FDP") {
        const std::vector<Verdict> v(4, Verdict::Accepted);
        const auto [fdp, fnp] = fdp_fnp(v, truth);
        CHECK(fdp == 0.0);
        CHECK(fnp == 0.5);
    }
    SUBCASE("one of two rejections hits a true null") {
        const std::vector<Verdict> v = {Verdict::Rejected, Verdict::Accepted, Verdict::Rejected,
                                        Verdict::Accepted};
        const auto [fdp, fnp] = fdp_fnp(v, truth);
        CHECK(fdp == 0.5);
        CHECK(fnp == 0.5);
    }
    SUBCASE("empty truth set") {
        const std::vector<Verdict> v(4, Verdict::Rejected);
        const auto [fdp, fnp] = fdp_fnp(v, std::vector<bool>(4, false));
        CHECK(fdp == 0.0);
        CHECK(fnp == 0.0);
    }
}

TEST_CASE("kfwe_indicators") {
    const std::vector<bool> truth = {true, true, false};
    SUBCASE("threshold met") {
        const std::vector<Verdict> v = {Verdict::Rejected, Verdict::Accepted, Verdict::Rejected};
        const auto [t1, t2] = kfwe_indicators(v, truth, 1, 1);
        CHECK(t1);
        CHECK_FALSE(t2);
    }
    SUBCASE("strict threshold") {
        const std::vector<Verdict> v = {Verdict::Rejected, Verdict::Rejected, Verdict::Rejected};
        CHECK_FALSE(kfwe_indicators(v, truth, 3, 1).first);
        CHECK(kfwe_indicators(v, truth, 2, 1).first);
    }
    SUBCASE("no true nulls") {
        const std::vector<Verdict> v(3, Verdict::Rejected);
        CHECK_FALSE(kfwe_indicators(v, std::vector<bool>(3, false), 1, 1).first);
    }
}

TEST_CASE("savings") {
    CHECK(savings_percent(54.17, 120) == 55);
    CHECK(savings_percent(38.39, 75) == 49);
    CHECK(savings_percent(80.0, 80) == 0);
    CHECK_THROWS(savings_percent(10.0, 0));
}

namespace {

ScenarioConfig sweep_scenario(int J, int true_nulls, double corr, ErrorMetric metric,
                              std::uint64_t seed, long reps) {
    ScenarioConfig sc;
    sc.J = J;
    sc.true_null_count = true_nulls;
    sc.sigma = 1.0;
    sc.correlation = corr;
    sc.reps = reps;
    sc.seed = seed;
    sc.error.metric = metric;
    sc.error.alpha = 0.05;
    sc.error.beta = 0.2;
    sc.error.gamma1 = 0.1;
    sc.error.gamma2 = 0.1;
    sc.error.k1 = std::max(1, J / 8);
    sc.error.k2 = std::max(1, J / 8);
    return sc;
}

}  // namespace

TEST_CASE("monte_carlo basics") {
    SUBCASE("overwhelming separation collapses the run") {
        ScenarioConfig sc = sweep_scenario(4, 2, 0.0, ErrorMetric::Kfwe, 2, 200);
        sc.sigma = 0.1;
        sc.theta_alt = 10.0;
        SequentialSpec spec;
        spec.mode = StepMode::Stepdown;
        const auto rep = monte_carlo(sc, spec, 2);
        CHECK(rep.e_n < 5.0);
        CHECK(rep.typeI_rate == 0.0);
        CHECK(rep.typeII_rate == 0.0);
        CHECK(rep.guard_trips == 0);
    }
    SUBCASE("reproducibility: identical seeds, identical reports") {
        const ScenarioConfig sc = sweep_scenario(6, 3, 0.5, ErrorMetric::Fdp, 77, 300);
        SequentialSpec spec;
        spec.mode = StepMode::Stepup;
        const auto r1 = monte_carlo(sc, spec, 2);
        const auto r2 = monte_carlo(sc, spec, 1);  // thread count must not matter
        CHECK(r1.e_n == r2.e_n);
        CHECK(r1.se == r2.se);
        CHECK(r1.typeI_rate == r2.typeI_rate);
        CHECK(r1.typeII_rate == r2.typeII_rate);
    }
}

TEST_CASE("error control holds across dependence battery" * doctest::timeout(900)) {
    // Randomized scan over size, dependence, metric, and direction; the
    // binomial 3-SE allowance sits on top of the nominal levels.
    std::mt19937_64 gen(20260810);
    const double corrs[] = {0.0, 0.5, 0.95};
    int scenario_count = 0;
    for (int rep = 0; rep < 10; ++rep) {
        const int J = 4 + static_cast<int>(gen() % 13);
        const double corr = corrs[gen() % 3];
        const auto metric = gen() % 2 == 0 ? ErrorMetric::Fdp : ErrorMetric::Kfwe;
        const auto mode = gen() % 2 == 0 ? StepMode::Stepdown : StepMode::Stepup;
        const int true_nulls = static_cast<int>(gen() % (J + 1));
        const long reps = 5000;
        ScenarioConfig sc = sweep_scenario(J, true_nulls, corr, metric, 1000 + rep, reps);
        SequentialSpec spec;
        spec.mode = mode;
        const auto out = monte_carlo(sc, spec, 2);
        const double se1 = std::sqrt(0.05 * 0.95 / reps);
        const double se2 = std::sqrt(0.2 * 0.8 / reps);
        INFO("J=", J, " corr=", corr, " metric=", static_cast<int>(metric), " mode=",
             static_cast<int>(mode), " true=", true_nulls);
        CHECK(out.typeI_rate <= 0.05 + 3 * se1);
        CHECK(out.typeII_rate <= 0.2 + 3 * se2);
        CHECK(out.guard_trips == 0);
        ++scenario_count;
    }
    CHECK(scenario_count == 10);
}

TEST_CASE("extreme dependence: identical streams keep error control") {
    // c = 1 with equal means makes every stream the same data sequence.
    ScenarioConfig sc = sweep_scenario(8, 8, 1.0, ErrorMetric::Kfwe, 31, 4000);
    sc.error.k1 = 2;
    sc.error.k2 = 2;
    SequentialSpec spec;
    spec.mode = StepMode::Stepdown;
    const auto all_true = monte_carlo(sc, spec, 2);
    CHECK(all_true.typeI_rate <= 0.05 + 3 * std::sqrt(0.05 * 0.95 / 4000));

    sc.true_null_count = 4;  // mixed truth, still perfectly shared noise
    const auto mixed = monte_carlo(sc, spec, 2);
    CHECK(mixed.typeI_rate <= 0.05 + 3 * std::sqrt(0.05 * 0.95 / 4000));
    CHECK(mixed.typeII_rate <= 0.2 + 3 * std::sqrt(0.2 * 0.8 / 4000));
}

TEST_CASE("make_ladder honors the weight-sequence choice") {
    ErrorSpec e;
    e.metric = ErrorMetric::Fdp;
    e.gamma1 = e.gamma2 = 0.0;
    e.weights = DeltaChoice::Linear;
    const int J = 6;
    const auto lin = make_ladder(e, StepMode::Stepdown, J);
    // linear weights with gamma = 0: D1 = max_v v*delta_{J+1-v} = max_v v(J+1-v)/J
    double d1_lin = 0;
    for (int v = 1; v <= J; ++v) d1_lin = std::max(d1_lin, v * (J + 1.0 - v) / J);
    for (int j = 1; j <= J; ++j)
        CHECK(lin.alphas[j - 1] == doctest::Approx(0.05 * j / J / d1_lin).epsilon(1e-12));

    e.weights = DeltaChoice::Recommended;
    const auto rec = make_ladder(e, StepMode::Stepdown, J);
    CHECK(rec.alphas[0] == doctest::Approx(0.05 / J).epsilon(1e-12));  // Holm
}

TEST_CASE("rejective monte carlo controls type I for both statistic kinds") {
    for (auto kind : {StatisticKind::GaussianKnownSigma, StatisticKind::TGlr}) {
        ScenarioConfig sc = sweep_scenario(6, 3, 0.5, ErrorMetric::Kfwe, 91, 4000);
        sc.statistic = kind;
        sc.error.k1 = sc.error.k2 = 1;
        SequentialSpec spec;
        spec.mode = StepMode::Stepup;
        spec.rejective = true;
        spec.horizon = 60;
        spec.calib_reps = 20000;
        const auto out = monte_carlo(sc, spec, 2);
        INFO("kind=", static_cast<int>(kind));
        CHECK(out.typeI_rate <= 0.05 + 3 * std::sqrt(0.05 * 0.95 / 4000));
        CHECK(out.e_n <= 60.0);
        CHECK(out.guard_trips == 0);
    }
}

TEST_CASE("report writers") {
    SimulationReport rep;
    rep.procedure_name = "seq_stepup";
    rep.e_n = 54.1666;
    rep.se = 0.672;
    rep.typeI_rate = 0.0081;
    rep.typeII_rate = 0.0123;
    rep.reps = 10000;
    auto row = to_row(rep);
    row.savings = 55;
    std::ostringstream csv;
    write_report_csv(csv, "demo", {row});
    CHECK(csv.str().find("demo,seq_stepup,54.17,0.67,0.008,0.012,55%") != std::string::npos);
    std::ostringstream table;
    write_report_table(table, "demo", {row});
    CHECK(table.str().find("54.17") != std::string::npos);
}
