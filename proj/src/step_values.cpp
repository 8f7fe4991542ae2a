#include "seqstep/step_values.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "seqstep/math_util.hpp"

namespace seqstep {

void DeltaSequence::validate() const {
    if (values.empty()) throw std::invalid_argument("DeltaSequence: empty");
    double prev = 0.0;
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("DeltaSequence: entry outside [0,1]");
        if (v < prev) throw std::invalid_argument("DeltaSequence: not nondecreasing");
        prev = v;
    }
}

void StepValueLadder::validate() const {
    if (alphas.empty()) throw std::invalid_argument("StepValueLadder: empty alphas");
    auto check = [](const std::vector<double>& v, const char* name) {
        double prev = 0.0;
        for (double x : v) {
            if (!(x >= 0.0 && x <= 1.0))
                throw std::invalid_argument(std::string("StepValueLadder: ") + name + " outside [0,1]");
            if (x < prev)
                throw std::invalid_argument(std::string("StepValueLadder: ") + name + " not nondecreasing");
            prev = x;
        }
    };
    check(alphas, "alphas");
    if (!betas.empty()) {
        if (betas.size() != alphas.size())
            throw std::invalid_argument("StepValueLadder: alphas/betas length mismatch");
        check(betas, "betas");
    }
}

namespace {

void require_J(int J) {
    if (J < 1) throw std::invalid_argument("J must be >= 1");
}

void require_gamma(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
}

}  // namespace

DeltaSequence delta_holm_fdp(int J, double gamma) {
    require_J(J);
    require_gamma(gamma);
    DeltaSequence d;
    d.values.resize(J);
    for (int j = 1; j <= J; ++j) {
        const long fl = floor_guarded(gamma * j);
        d.values[j - 1] = static_cast<double>(fl + 1) / static_cast<double>(J + fl + 1 - j);
    }
    return d;
}

DeltaSequence delta_kfwe(int J, int k) {
    require_J(J);
    if (k < 1 || k > J) throw std::invalid_argument("delta_kfwe: k out of range");
    DeltaSequence d;
    d.values.resize(J);
    for (int j = 1; j <= J; ++j) {
        const int denom = J - std::max(j - k, 0);
        d.values[j - 1] = static_cast<double>(k) / static_cast<double>(denom);
    }
    return d;
}

DeltaSequence delta_linear(int J) {
    require_J(J);
    DeltaSequence d;
    d.values.resize(J);
    for (int j = 1; j <= J; ++j) d.values[j - 1] = static_cast<double>(j) / static_cast<double>(J);
    return d;
}

int jbar(int t, int v, double gamma, int J) {
    require_J(J);
    require_gamma(gamma);
    const long tmax = floor_guarded(gamma * J) + 1;
    if (t < 1 || t > tmax) throw std::invalid_argument("jbar: t outside [1, floor(gamma*J)+1]");
    if (v < 0 || v > J) throw std::invalid_argument("jbar: v outside [0, J]");
    long m = std::min<long>(J, static_cast<long>(J) + t - v);
    if (gamma > 0.0) m = std::min(m, ceil_guarded(t / gamma) - 1);
    return static_cast<int>(m);
}

int tbar(int v, double gamma, int J) {
    require_J(J);
    require_gamma(gamma);
    if (v < 0 || v > J) throw std::invalid_argument("tbar: v outside [0, J]");
    long m = std::min<long>(floor_guarded(gamma * J) + 1, v);
    m = std::min(m, floor_guarded(gamma * (J - v) / (1.0 - gamma)) + 1);
    return static_cast<int>(m);
}

double d1(double gamma, const DeltaSequence& delta) {
    delta.validate();
    require_gamma(gamma);
    const int J = delta.size();
    double best = 0.0;  // v = 0 contributes S1(0) = 0
    for (int v = 1; v <= J; ++v) {
        const int tb = tbar(v, gamma, J);
        double sum = 0.0;
        double eps_prev = 0.0;
        for (int t = 1; t <= tb; ++t) {
            const double eps_t = delta.values[jbar(t, v, gamma, J) - 1];
            sum += (eps_t - eps_prev) / t;
            eps_prev = eps_t;
        }
        best = std::max(best, v * sum);
    }
    return best;
}

double d2(double gamma, const DeltaSequence& delta) {
    delta.validate();
    require_gamma(gamma);
    const int J = delta.size();
    double best = 0.0;
    for (int v = 1; v <= J; ++v) {
        double inner = 0.0;
        for (int s = v - J + 2; s <= v; ++s) {
            const int idx = J - v + s;  // delta index, in [2, J]
            const long fl = floor_guarded(gamma * idx);
            if (v < fl + 1) continue;
            const long denom = std::max<long>(s, fl + 1);
            inner += (delta.values[idx - 1] - delta.values[idx - 2]) / static_cast<double>(denom);
        }
        best = std::max(best, v * delta.values.front() + v * inner);
    }
    return best;
}

double d3(int k, const DeltaSequence& delta) {
    delta.validate();
    const int J = delta.size();
    if (k < 1 || k > J) throw std::invalid_argument("d3: k out of range");
    double best = 0.0;
    for (int v = k; v <= J; ++v) {
        double inner = 0.0;
        for (int s = k + 1; s <= v; ++s) {
            const int idx = J - v + s;
            inner += (delta.values[idx - 1] - delta.values[idx - 2]) / static_cast<double>(s);
        }
        const double s3 = v * delta.values[J - v + k - 1] / static_cast<double>(k) + v * inner;
        best = std::max(best, s3);
    }
    return best;
}

namespace {

void require_prob_open(double x, const char* name) {
    if (!(x > 0.0 && x < 1.0))
        throw std::invalid_argument(std::string(name) + " must lie in (0,1)");
}

std::vector<double> scaled(const DeltaSequence& delta, double level, double normalizer) {
    if (normalizer <= 0.0)
        throw std::invalid_argument("step values: normalizer is zero (all-zero delta sequence?)");
    std::vector<double> out(delta.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = level * delta.values[i] / normalizer;
    return out;
}

}  // namespace

StepValueLadder stepdown_fdp_values(double alpha, double beta, double gamma1, double gamma2,
                                    const DeltaSequence& delta, const DeltaSequence& eta) {
    require_prob_open(alpha, "alpha");
    require_prob_open(beta, "beta");
    delta.validate();
    eta.validate();
    if (delta.size() != eta.size()) throw std::invalid_argument("delta/eta length mismatch");
    StepValueLadder l;
    l.kind = LadderKind::StepdownFdp;
    l.alphas = scaled(delta, alpha, d1(gamma1, delta));
    l.betas = scaled(eta, beta, d1(gamma2, eta));
    l.params = {delta.size(), alpha, beta, gamma1, gamma2, 0, 0};
    l.validate();
    return l;
}

StepValueLadder stepdown_kfwe_values(double alpha, double beta, int k1, int k2, int J) {
    require_prob_open(alpha, "alpha");
    require_prob_open(beta, "beta");
    // Written as alpha * (k/(J-(j-k)+)) so that the k=1 case is bit-identical
    // to the gamma=0 stepdown FDP ladder (both reduce to Holm's values).
    StepValueLadder l;
    l.kind = LadderKind::StepdownKfwe;
    l.alphas = scaled(delta_kfwe(J, k1), alpha, 1.0);
    l.betas = scaled(delta_kfwe(J, k2), beta, 1.0);
    l.params = {J, alpha, beta, 0.0, 0.0, k1, k2};
    l.validate();
    return l;
}

StepValueLadder stepup_fdp_values(double alpha, double beta, double gamma1, double gamma2,
                                  const DeltaSequence& delta, const DeltaSequence& eta) {
    require_prob_open(alpha, "alpha");
    require_prob_open(beta, "beta");
    delta.validate();
    eta.validate();
    if (delta.size() != eta.size()) throw std::invalid_argument("delta/eta length mismatch");
    StepValueLadder l;
    l.kind = LadderKind::StepupFdp;
    l.alphas = scaled(delta, alpha, d2(gamma1, delta));
    l.betas = scaled(eta, beta, d2(gamma2, eta));
    l.params = {delta.size(), alpha, beta, gamma1, gamma2, 0, 0};
    l.validate();
    return l;
}

StepValueLadder stepup_kfwe_values(double alpha, double beta, int k1, int k2,
                                   const DeltaSequence& delta, const DeltaSequence& eta) {
    require_prob_open(alpha, "alpha");
    require_prob_open(beta, "beta");
    delta.validate();
    eta.validate();
    if (delta.size() != eta.size()) throw std::invalid_argument("delta/eta length mismatch");
    StepValueLadder l;
    l.kind = LadderKind::StepupKfwe;
    l.alphas = scaled(delta, alpha, d3(k1, delta));
    l.betas = scaled(eta, beta, d3(k2, eta));
    l.params = {delta.size(), alpha, beta, 0.0, 0.0, k1, k2};
    l.validate();
    return l;
}

}  // namespace seqstep
