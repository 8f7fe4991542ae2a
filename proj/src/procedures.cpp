#include "seqstep/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "seqstep/rng.hpp"

namespace seqstep {

void ProcedureConfig::validate(int J) const {
    if (J < 1) throw std::invalid_argument("ProcedureConfig: J must be >= 1");
    if (static_cast<int>(b.size()) != J)
        throw std::invalid_argument("ProcedureConfig: b must have one entry per stream");
    for (int w = 0; w + 1 < J; ++w) {
        if (b[w] + 1e-12 < b[w + 1])
            throw std::invalid_argument("ProcedureConfig: b not nonincreasing");
    }
    if (rejective) {
        if (!a.empty()) throw std::invalid_argument("ProcedureConfig: rejective runs take no lower boundaries");
        if (!horizon) throw std::invalid_argument("ProcedureConfig: rejective runs require a horizon");
        if (*horizon < 1) throw std::invalid_argument("ProcedureConfig: horizon must be >= 1");
    } else {
        if (static_cast<int>(a.size()) != J)
            throw std::invalid_argument("ProcedureConfig: a must have one entry per stream");
        for (int w = 0; w + 1 < J; ++w) {
            if (a[w] > a[w + 1] + 1e-12)
                throw std::invalid_argument("ProcedureConfig: a not nondecreasing");
        }
        if (a[J - 1] > b[J - 1] + 1e-12)
            throw std::invalid_argument("ProcedureConfig: a_J exceeds b_J");
        if (horizon)
            throw std::invalid_argument("ProcedureConfig: horizon only applies to rejective runs");
    }
    if (max_stage_guard < 1) throw std::invalid_argument("ProcedureConfig: guard must be positive");
}

bool ProcedureState::all_decided() const {
    for (Verdict v : verdicts)
        if (v == Verdict::Undecided) return false;
    return true;
}

double ProcedureState::average_sample_size() const {
    double s = 0;
    for (long n : sample_sizes) s += static_cast<double>(n);
    return verdicts.empty() ? 0.0 : s / static_cast<double>(verdicts.size());
}

ReplaySource::ReplaySource(std::vector<std::vector<double>> paths) : paths_(std::move(paths)) {
    if (paths_.empty()) throw std::invalid_argument("ReplaySource: no paths");
}

bool ReplaySource::next_row(std::span<double> out) {
    if (out.size() != paths_.size()) throw std::invalid_argument("ReplaySource: row size mismatch");
    bool any = false;
    for (std::size_t j = 0; j < paths_.size(); ++j) {
        if (row_ < static_cast<long>(paths_[j].size())) {
            out[j] = paths_[j][row_];
            any = true;
        } else {
            out[j] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    ++row_;
    return any;
}

StageOutcome stage_decide(std::span<const double> ordered, int r, int c,
                          std::span<const double> a, std::span<const double> b, StepMode mode,
                          bool rejective) {
    const int k = static_cast<int>(ordered.size());
    if (k == 0) throw std::invalid_argument("stage_decide: no active streams");
    StageOutcome out;

    if (mode == StepMode::Stepdown) {
        // Rejection: the top statistic must clear b_{r+1}; then extend down
        // while the l-th ordered value clears b_{r+k-l+1}.
        if (ordered[k - 1] >= b[r]) {
            out.upper_crossed = true;
            for (int m = 1; m <= k; ++m) {
                const int l = k - m + 1;
                if (ordered[l - 1] >= b[r + k - l])
                    out.rejected = m;
                else
                    break;
            }
        }
        if (!rejective && ordered[0] <= a[c]) {
            out.lower_crossed = true;
            for (int m = 1; m <= k; ++m) {
                if (ordered[m - 1] <= a[c + m - 1])
                    out.accepted = m;
                else
                    break;
            }
        }
    } else {
        // Stepup: largest m whose rank clears its own boundary; no
        // all-of-prefix requirement.
        for (int m = 1; m <= k; ++m) {
            if (ordered[k - m] >= b[r + m - 1]) {
                out.rejected = m;
                out.upper_crossed = true;
            }
        }
        if (!rejective) {
            for (int m = 1; m <= k; ++m) {
                if (ordered[m - 1] <= a[c + m - 1]) {
                    out.accepted = m;
                    out.lower_crossed = true;
                }
            }
        }
    }

    if (!out.upper_crossed && !out.lower_crossed)
        throw std::logic_error("stage_decide: called with no boundary crossed");
    if (out.rejected + out.accepted > k)
        throw std::logic_error("stage_decide: rejection and acceptance sets overlap");
    return out;
}

namespace {

class Engine {
  public:
    Engine(ObservationSource& source, const ProcedureConfig& config, const StatisticModel& model,
           int J, const std::vector<PiecewiseLinearMap>& maps)
        : source_(source), config_(config), model_(model), J_(J), maps_(maps) {
        config.validate(J);
        if (!maps_.empty() && static_cast<int>(maps_.size()) != J)
            throw std::invalid_argument("run: standardizer count must match stream count");
        stats_.resize(J);
        values_.resize(J, 0.0);
        row_.resize(J);
        active_.resize(J);
        for (int j = 0; j < J; ++j) active_[j] = j;
        Rng tie_rng(derive_seed(config.tie_break_seed, 0x7ae5));
        priority_.resize(J);
        for (int j = 0; j < J; ++j) priority_[j] = tie_rng.next_u64();
        order_ = active_;
        state_.verdicts.assign(J, Verdict::Undecided);
        state_.sample_sizes.assign(J, 0);
        state_.tie_break_seed = config.tie_break_seed;
    }

    ProcedureState run() {
        int r = 0, c = 0;
        long n = 0;
        int stage = 0;
        const bool stepup = config_.mode == StepMode::Stepup;
        const long min_n = model_.min_n();

        while (!active_.empty()) {
            ++stage;
            // Conservation holds at every stage boundary.
            if (r + c + static_cast<int>(active_.size()) != J_)
                throw std::logic_error("run: active-set conservation violated");

            bool crossed = false;
            bool horizon_hit = false;
            while (true) {
                if (!source_.next_row(row_)) throw std::runtime_error("run: observation source exhausted");
                ++n;
                for (int j : active_) model_.update(stats_[j], row_[j]);
                if (n >= min_n) {
                    for (int j : active_) {
                        const double v = stats_[j].value;
                        values_[j] = maps_.empty() ? v : maps_[j](v);
                    }
                    crossed = stepup ? stepup_crossing(r, c) : stepdown_crossing(r, c);
                    if (crossed) break;
                }
                if (config_.rejective && n == *config_.horizon) {
                    horizon_hit = true;
                    break;
                }
                if (n >= config_.max_stage_guard) {
                    state_.reason = TerminationReason::GuardTripped;
                    finish(n, stage);
                    return std::move(state_);
                }
            }

            if (!crossed && horizon_hit) {
                // Horizon reached with nothing crossed: accept all actives.
                accept_all_at_horizon(n, stage);
                state_.reason = TerminationReason::HorizonReached;
                finish(n, stage);
                return std::move(state_);
            }

            sort_active();
            ordered_values_.clear();
            for (int id : order_) ordered_values_.push_back(values_[id]);
            const StageOutcome outcome = stage_decide(ordered_values_, r, c, config_.a, config_.b,
                                                      config_.mode, config_.rejective);

            const int k = static_cast<int>(order_.size());
            for (int t = 0; t < outcome.rejected; ++t)
                decide(order_[k - 1 - t], Verdict::Rejected, stage, n);
            for (int t = 0; t < outcome.accepted; ++t)
                decide(order_[t], Verdict::Accepted, stage, n);
            r += outcome.rejected;
            c += outcome.accepted;
            prune_active();

            if (config_.rejective && n == *config_.horizon && !active_.empty()) {
                accept_all_at_horizon(n, stage);
                state_.reason = TerminationReason::HorizonReached;
                finish(n, stage);
                return std::move(state_);
            }
        }
        state_.reason = TerminationReason::AllResolved;
        finish(n, stage);
        return std::move(state_);
    }

  private:
    bool stepdown_crossing(int r, int c) const {
        // Stage boundaries (a_{c+1}, b_{r+1}) are fixed before the stage starts.
        const double hi = config_.b[r];
        const double lo = config_.rejective ? -std::numeric_limits<double>::infinity() : config_.a[c];
        for (int j : active_) {
            if (values_[j] >= hi || values_[j] <= lo) return true;
        }
        return false;
    }

    bool stepup_crossing(int r, int c) {
        sort_active();
        const int k = static_cast<int>(order_.size());
        for (int l = 1; l <= k; ++l) {
            const double v = values_[order_[l - 1]];
            if (v >= config_.b[r + k - l]) return true;
            if (!config_.rejective && v <= config_.a[c + l - 1]) return true;
        }
        return false;
    }

    void sort_active() {
        // Insertion sort on the carried permutation; per-step value changes
        // rarely swap many neighbours. Ties break by fixed random priority.
        auto less = [&](int x, int y) {
            if (values_[x] != values_[y]) return values_[x] < values_[y];
            if (priority_[x] != priority_[y]) return priority_[x] < priority_[y];
            return x < y;
        };
        for (std::size_t i = 1; i < order_.size(); ++i) {
            const int id = order_[i];
            std::size_t p = i;
            while (p > 0 && less(id, order_[p - 1])) {
                order_[p] = order_[p - 1];
                --p;
            }
            order_[p] = id;
        }
    }

    void decide(int stream, Verdict v, int stage, long n) {
        state_.verdicts[stream] = v;
        state_.sample_sizes[stream] = n;
        state_.decisions.push_back({stream, v, stage, n, values_[stream]});
    }

    void accept_all_at_horizon(long n, int stage) {
        sort_active();
        for (int id : order_) decide(id, Verdict::Accepted, stage, n);
        active_.clear();
        order_.clear();
    }

    void prune_active() {
        active_.clear();
        std::vector<int> kept;
        kept.reserve(order_.size());
        for (int id : order_)
            if (state_.verdicts[id] == Verdict::Undecided) kept.push_back(id);
        order_ = kept;  // still sorted; values unchanged since the sort
        for (int j = 0; j < J_; ++j)
            if (state_.verdicts[j] == Verdict::Undecided) active_.push_back(j);
    }

    void finish(long n, int stage) {
        state_.stages = stage;
        state_.final_n = n;
        for (int j = 0; j < J_; ++j)
            if (state_.verdicts[j] == Verdict::Undecided) state_.sample_sizes[j] = n;
    }

    ObservationSource& source_;
    const ProcedureConfig& config_;
    const StatisticModel& model_;
    const int J_;
    const std::vector<PiecewiseLinearMap>& maps_;
    std::vector<StatisticState> stats_;
    std::vector<double> values_;
    std::vector<double> row_;
    std::vector<double> ordered_values_;
    std::vector<int> active_;
    std::vector<int> order_;
    std::vector<std::uint64_t> priority_;
    ProcedureState state_;
};

ProcedureState run_impl(ObservationSource& source, const ProcedureConfig& config,
                        const StatisticModel& model, int J,
                        const std::vector<PiecewiseLinearMap>& maps, StepMode mode,
                        bool rejective) {
    if (config.mode != mode || config.rejective != rejective)
        throw std::invalid_argument("run: config mode/rejective flag does not match entry point");
    Engine engine(source, config, model, J, maps);
    return engine.run();
}

}  // namespace

ProcedureState run_stepdown(ObservationSource& source, const ProcedureConfig& config,
                            const StatisticModel& model, int J,
                            const std::vector<PiecewiseLinearMap>& maps) {
    return run_impl(source, config, model, J, maps, StepMode::Stepdown, false);
}

ProcedureState run_stepup(ObservationSource& source, const ProcedureConfig& config,
                          const StatisticModel& model, int J,
                          const std::vector<PiecewiseLinearMap>& maps) {
    return run_impl(source, config, model, J, maps, StepMode::Stepup, false);
}

ProcedureState run_rejective_stepdown(ObservationSource& source, const ProcedureConfig& config,
                                      const StatisticModel& model, int J,
                                      const std::vector<PiecewiseLinearMap>& maps) {
    return run_impl(source, config, model, J, maps, StepMode::Stepdown, true);
}

ProcedureState run_rejective_stepup(ObservationSource& source, const ProcedureConfig& config,
                                    const StatisticModel& model, int J,
                                    const std::vector<PiecewiseLinearMap>& maps) {
    return run_impl(source, config, model, J, maps, StepMode::Stepup, true);
}

void write_decision_csv_header(std::ostream& os) {
    os << "replicate_id,stream,verdict,stage,sample_size,statistic_value\n";
}

void write_decision_csv(std::ostream& os, long replicate_id, const ProcedureState& state) {
    for (const auto& d : state.decisions) {
        os << replicate_id << ',' << (d.stream + 1) << ','
           << (d.verdict == Verdict::Rejected ? "rejected" : "accepted") << ',' << d.stage << ','
           << d.sample_size << ',' << d.statistic_value << '\n';
    }
}

}  // namespace seqstep
