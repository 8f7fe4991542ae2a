#ifndef SEQSTEP_STEP_VALUES_HPP
#define SEQSTEP_STEP_VALUES_HPP

#include <vector>

namespace seqstep {

// Nondecreasing weight sequence in [0,1] used to shape step-value ladders.
struct DeltaSequence {
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    void validate() const;  // throws std::invalid_argument on violation
};

enum class LadderKind { StepdownFdp, StepdownKfwe, StepupFdp, StepupKfwe };

struct StepValueParams {
    int J = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    int k1 = 0;
    int k2 = 0;
};

// The nondecreasing per-level error budgets alpha_1 <= ... <= alpha_J (and
// optionally beta_j) that drive the stepwise procedures.
struct StepValueLadder {
    std::vector<double> alphas;
    std::vector<double> betas;  // empty when type-II control is not requested
    LadderKind kind = LadderKind::StepdownFdp;
    StepValueParams params;

    int size() const { return static_cast<int>(alphas.size()); }
    void validate() const;
};

// Weight sequences.
DeltaSequence delta_holm_fdp(int J, double gamma);
DeltaSequence delta_kfwe(int J, int k);
DeltaSequence delta_linear(int J);

// Index helpers for the stepdown FDP normalizer. jbar requires
// 1 <= t <= floor(gamma*J)+1; the third min-term is omitted when gamma == 0.
int jbar(int t, int v, double gamma, int J);
int tbar(int v, double gamma, int J);

// Normalizing constants. All three are exhaustive scans over v; d1 admits
// v = 0 with S1(0) = 0.
double d1(double gamma, const DeltaSequence& delta);
double d2(double gamma, const DeltaSequence& delta);
double d3(int k, const DeltaSequence& delta);

// Ladder constructors.
StepValueLadder stepdown_fdp_values(double alpha, double beta, double gamma1, double gamma2,
                                    const DeltaSequence& delta, const DeltaSequence& eta);
StepValueLadder stepdown_kfwe_values(double alpha, double beta, int k1, int k2, int J);
StepValueLadder stepup_fdp_values(double alpha, double beta, double gamma1, double gamma2,
                                  const DeltaSequence& delta, const DeltaSequence& eta);
StepValueLadder stepup_kfwe_values(double alpha, double beta, int k1, int k2,
                                   const DeltaSequence& delta, const DeltaSequence& eta);

}  // namespace seqstep

#endif
