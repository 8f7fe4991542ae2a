#ifndef SEQSTEP_SIMULATION_HPP
#define SEQSTEP_SIMULATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqstep/procedures.hpp"
#include "seqstep/rng.hpp"
#include "seqstep/step_values.hpp"

namespace seqstep {

enum class StatisticKind { GaussianKnownSigma, TGlr };
enum class ErrorMetric { Fdp, Kfwe };

// Weight sequence behind the step values: the recommended sequences, or the
// proportional-to-rank alternative delta_j = j/J.
enum class DeltaChoice { Recommended, Linear };

struct ErrorSpec {
    ErrorMetric metric = ErrorMetric::Fdp;
    double alpha = 0.05;
    double beta = 0.2;
    double gamma1 = 0.1;
    double gamma2 = 0.1;
    int k1 = 1;
    int k2 = 1;
    DeltaChoice weights = DeltaChoice::Recommended;

    void validate(int J) const;
};

struct ScenarioConfig {
    int J = 2;
    int true_null_count = 1;     // streams 1..true_null_count carry true nulls
    double sigma = 1.0;
    double correlation = 0.0;    // constant pairwise correlation, in [0,1]
    StatisticKind statistic = StatisticKind::GaussianKnownSigma;
    double delta = 1.0;          // alternative mean separation
    double theta_null = 0.0;
    double theta_alt = 1.0;
    long reps = 1000;
    std::uint64_t seed = 1;
    ErrorSpec error;

    void validate() const;
    std::vector<double> theta() const;
    std::vector<bool> truth_mask() const;  // true where the null holds
};

// Knobs for one sequential procedure inside the Monte Carlo driver.
struct SequentialSpec {
    StepMode mode = StepMode::Stepdown;
    bool rejective = false;
    std::optional<long> horizon;
    double rho = 0.583;          // Wald overshoot correction (continuous data)
    long max_stage_guard = 1000000;
    long calib_horizon = 40;     // t statistic boundary calibration
    long calib_reps = 100000;

    std::string name() const;
};

struct SimulationReport {
    std::string procedure_name;
    double e_n = 0.0;
    double se = 0.0;
    double typeI_rate = 0.0;
    double typeII_rate = 0.0;
    long reps = 0;
    long guard_trips = 0;
};

// One draw from N(theta, sigma^2[(1-c)I + c 11']), shared-factor form.
void gen_correlated_row(std::span<const double> theta, double sigma, double correlation, Rng& rng,
                        std::span<double> out);

// Infinite source of correlated Gaussian rows.
class CorrelatedGaussianSource final : public ObservationSource {
  public:
    CorrelatedGaussianSource(std::vector<double> theta, double sigma, double correlation,
                             std::uint64_t seed);
    bool next_row(std::span<double> out) override;

  private:
    std::vector<double> theta_;
    double sigma_, correlation_;
    Rng rng_;
};

// False discovery / false nondiscovery proportions; zero when the respective
// denominator is zero. Undecided streams count in neither set.
std::pair<double, double> fdp_fnp(std::span<const Verdict> verdicts,
                                  const std::vector<bool>& truth);

// Indicators for >= k1 true nulls rejected / >= k2 false nulls accepted.
std::pair<bool, bool> kfwe_indicators(std::span<const Verdict> verdicts,
                                      const std::vector<bool>& truth, int k1, int k2);

// Step values for the scenario's metric and the requested direction, using
// the recommended weight sequences.
StepValueLadder make_ladder(const ErrorSpec& error, StepMode mode, int J);

// Builds boundaries (Wald ladder, Monte Carlo t calibration, or the
// supermartingale rejective bound) for the scenario.
ProcedureConfig build_procedure(const ScenarioConfig& scenario, const SequentialSpec& spec,
                                int threads = 0);

// raw_states, when given, receives every replicate's full procedure state
// (indexed by replicate) for audit logging.
SimulationReport monte_carlo(const ScenarioConfig& scenario, const SequentialSpec& spec,
                             int threads = 0, std::vector<ProcedureState>* raw_states = nullptr);

// 100*(1 - seq_en/fixed_n), rounded to a whole percent.
long savings_percent(double seq_en, long fixed_n);

}  // namespace seqstep

#endif
