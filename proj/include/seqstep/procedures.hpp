#ifndef SEQSTEP_PROCEDURES_HPP
#define SEQSTEP_PROCEDURES_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "seqstep/critical_values.hpp"
#include "seqstep/statistics.hpp"

namespace seqstep {

enum class StepMode { Stepdown, Stepup };
enum class Verdict : int { Accepted = -1, Undecided = 0, Rejected = 1 };
enum class TerminationReason { AllResolved, HorizonReached, GuardTripped };

struct ProcedureConfig {
    StepMode mode = StepMode::Stepdown;
    bool rejective = false;
    std::vector<double> a;  // lower standardized boundaries; empty iff rejective
    std::vector<double> b;  // upper standardized boundaries
    std::optional<long> horizon;      // required iff rejective
    long max_stage_guard = 1000000;   // max observations per stream before a guard trip
    std::uint64_t tie_break_seed = 0;

    void validate(int J) const;
};

struct DecisionRecord {
    int stream = 0;
    Verdict verdict = Verdict::Undecided;
    int stage = 0;
    long sample_size = 0;
    double statistic_value = 0.0;  // standardized value at the decision
};

// A single stage's rejection/acceptance counts.
struct StageOutcome {
    int rejected = 0;
    int accepted = 0;
    bool upper_crossed = false;
    bool lower_crossed = false;
};

struct ProcedureState {
    std::vector<Verdict> verdicts;      // per stream
    std::vector<long> sample_sizes;     // per stream, n at decision
    std::vector<DecisionRecord> decisions;
    int stages = 0;
    long final_n = 0;
    TerminationReason reason = TerminationReason::AllResolved;
    std::uint64_t tie_break_seed = 0;

    bool all_decided() const;
    double average_sample_size() const;
};

// Supplies one synchronous row of observations (one per stream) per call;
// returns false when exhausted.
class ObservationSource {
  public:
    virtual ~ObservationSource() = default;
    virtual bool next_row(std::span<double> out) = 0;
};

// Replays fixed per-stream paths; rows beyond a path's end are only valid if
// that stream has already been decided.
class ReplaySource final : public ObservationSource {
  public:
    explicit ReplaySource(std::vector<std::vector<double>> paths);
    bool next_row(std::span<double> out) override;

  private:
    std::vector<std::vector<double>> paths_;
    long row_ = 0;
};

// Stage decision rule, factored out for direct testing. `ordered` holds the
// active streams' standardized values in ascending order; r and c are the
// totals already rejected/accepted before this stage. Throws if no boundary
// was crossed. In rejective mode only the upper rule applies.
StageOutcome stage_decide(std::span<const double> ordered, int r, int c,
                          std::span<const double> a, std::span<const double> b, StepMode mode,
                          bool rejective);

// The four staged procedures. `model` updates every stream's statistic; maps
// standardize statistic values before any comparison (pass empty for common
// boundaries).
ProcedureState run_stepdown(ObservationSource& source, const ProcedureConfig& config,
                            const StatisticModel& model, int J,
                            const std::vector<PiecewiseLinearMap>& maps = {});
ProcedureState run_stepup(ObservationSource& source, const ProcedureConfig& config,
                          const StatisticModel& model, int J,
                          const std::vector<PiecewiseLinearMap>& maps = {});
ProcedureState run_rejective_stepdown(ObservationSource& source, const ProcedureConfig& config,
                                      const StatisticModel& model, int J,
                                      const std::vector<PiecewiseLinearMap>& maps = {});
ProcedureState run_rejective_stepup(ObservationSource& source, const ProcedureConfig& config,
                                    const StatisticModel& model, int J,
                                    const std::vector<PiecewiseLinearMap>& maps = {});

// CSV rows: replicate_id,stream,verdict,stage,sample_size,statistic_value
void write_decision_csv_header(std::ostream& os);
void write_decision_csv(std::ostream& os, long replicate_id, const ProcedureState& state);

}  // namespace seqstep

#endif
