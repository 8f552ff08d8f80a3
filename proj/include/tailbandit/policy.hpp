#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tailbandit/rng.hpp"

namespace tailbandit {

// ---------------------------------------------------------------------------
// Confidence radii. Three designs:
//   StandardFixed        rad(n)  = sigma * sqrt(eta ln T / n)
//   TailOptimalFixed     rad(n)  = eta1 (T/K)^a sqrt(ln T) / n  ^  eta2 sqrt(T^b ln T / n)
//   TailOptimalAnytime   rad_t(n)= eta1 (t/K)^a / n             ^  eta2 sqrt(t^b / n)
// where ^ is min. n = 0 yields +infinity, which forces initial exploration.
// ---------------------------------------------------------------------------

enum class BonusVariant { StandardFixed, TailOptimalFixed, TailOptimalAnytime };

struct BonusSpec {
    BonusVariant variant = BonusVariant::StandardFixed;
    double eta = 1.0;    // StandardFixed
    double sigma = 1.0;  // StandardFixed
    double eta1 = 1.0;
    double eta2 = 1.0;
    double alpha = 0.5;
    double beta = 0.5;
    std::int64_t horizon = 0;  // fixed-time variants
    int arms = 0;              // tail-optimal variants

    static BonusSpec standard_fixed(double eta, double sigma, std::int64_t T) {
        if (!(eta >= 0.0)) throw std::invalid_argument("BonusSpec: eta must be nonnegative");
        if (!(sigma >= 0.0)) throw std::invalid_argument("BonusSpec: sigma must be nonnegative");
        if (T < 3) throw std::invalid_argument("BonusSpec: fixed-time design requires T >= 3");
        BonusSpec s;
        s.variant = BonusVariant::StandardFixed;
        s.eta = eta;
        s.sigma = sigma;
        s.horizon = T;
        return s;
    }

    static BonusSpec tail_optimal_fixed(double eta1, double eta2, double alpha, double beta,
                                        std::int64_t T, int K) {
        check_tail_params(eta1, eta2, alpha, beta, K);
        if (T < 3) throw std::invalid_argument("BonusSpec: fixed-time design requires T >= 3");
        BonusSpec s;
        s.variant = BonusVariant::TailOptimalFixed;
        s.eta1 = eta1;
        s.eta2 = eta2;
        s.alpha = alpha;
        s.beta = beta;
        s.horizon = T;
        s.arms = K;
        return s;
    }

    static BonusSpec tail_optimal_anytime(double eta1, double eta2, double alpha, double beta,
                                          int K) {
        check_tail_params(eta1, eta2, alpha, beta, K);
        BonusSpec s;
        s.variant = BonusVariant::TailOptimalAnytime;
        s.eta1 = eta1;
        s.eta2 = eta2;
        s.alpha = alpha;
        s.beta = beta;
        s.arms = K;
        return s;
    }

private:
    static void check_tail_params(double eta1, double eta2, double alpha, double beta, int K) {
        if (!(eta1 >= 0.0 && eta2 >= 0.0))
            throw std::invalid_argument("BonusSpec: etas must be nonnegative");
        if (!(0.0 <= beta && beta <= alpha && alpha <= 1.0))
            throw std::invalid_argument("BonusSpec: parameters must satisfy 0 <= beta <= alpha <= 1");
        if (K < 1) throw std::invalid_argument("BonusSpec: arm count must be positive");
    }
};

// Evaluate the radius at pull count n; t is the current time index and is
// only consulted by the any-time design.
inline double bonus_eval(const BonusSpec& spec, std::int64_t n, std::int64_t t = 1) {
    if (n < 0) throw std::invalid_argument("bonus_eval: pull count must be nonnegative");
    if (n == 0) return std::numeric_limits<double>::infinity();
    const double dn = static_cast<double>(n);
    switch (spec.variant) {
        case BonusVariant::StandardFixed: {
            const double lnT = std::log(static_cast<double>(spec.horizon));
            return spec.sigma * std::sqrt(spec.eta * lnT / dn);
        }
        case BonusVariant::TailOptimalFixed: {
            const double lnT = std::log(static_cast<double>(spec.horizon));
            const double ratio = static_cast<double>(spec.horizon) / spec.arms;
            const double first = spec.eta1 * std::pow(ratio, spec.alpha) * std::sqrt(lnT) / dn;
            const double second =
                spec.eta2 * std::sqrt(std::pow(static_cast<double>(spec.horizon), spec.beta) * lnT / dn);
            return std::min(first, second);
        }
        case BonusVariant::TailOptimalAnytime: {
            if (t < 1) throw std::invalid_argument("bonus_eval: any-time design requires t >= 1");
            const double dt = static_cast<double>(t);
            const double first = spec.eta1 * std::pow(dt / spec.arms, spec.alpha) / dn;
            const double second = spec.eta2 * std::sqrt(std::pow(dt, spec.beta) / dn);
            return std::min(first, second);
        }
    }
    throw std::logic_error("bonus_eval: unknown variant");
}

// ---------------------------------------------------------------------------
// Successive elimination. Phases pull every active arm once (index order,
// or a fresh uniform permutation when permute is set), then discard any arm
// whose upper confidence bound falls below some arm's lower bound.
// ---------------------------------------------------------------------------

struct SEState {
    std::vector<int> active;  // ascending 1-based arm indices
    std::vector<std::int64_t> counts;
    std::vector<double> sums;
    std::int64_t phase = 0;
    bool permute = false;
    std::int64_t time = 0;
};

inline SEState se_init(int K, bool permute = false) {
    if (K < 2) throw std::invalid_argument("se_init: need at least 2 arms");
    SEState s;
    s.active.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) s.active[static_cast<std::size_t>(k)] = k + 1;
    s.counts.assign(static_cast<std::size_t>(K), 0);
    s.sums.assign(static_cast<std::size_t>(K), 0.0);
    s.permute = permute;
    return s;
}

// Pull order for the coming phase. Plain SE pulls in index order; the
// permuted variant draws a uniform order (Fisher-Yates) from the stream.
inline std::vector<int> se_phase_order(const SEState& state, Stream& stream) {
    std::vector<int> order = state.active;
    if (state.permute) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(stream.below(i));
            std::swap(order[i - 1], order[j]);
        }
    }
    return order;
}

// Apply the elimination rule to the current estimates. Written for general
// per-arm counts so a horizon-truncated phase is handled. The retained-arm
// guard cannot trigger through the strict inequality, but the contract says
// the active set is never emptied, so keep it.
inline void se_eliminate(SEState& state, const BonusSpec& spec) {
    double best_lower = -std::numeric_limits<double>::infinity();
    std::vector<double> upper(state.active.size());
    std::vector<double> mean(state.active.size());
    for (std::size_t i = 0; i < state.active.size(); ++i) {
        const std::size_t k = static_cast<std::size_t>(state.active[i] - 1);
        if (state.counts[k] == 0) {
            // never pulled (truncated first phase): no estimate, cannot be
            // eliminated and cannot eliminate others
            mean[i] = -std::numeric_limits<double>::infinity();
            upper[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        const double mu = state.sums[k] / static_cast<double>(state.counts[k]);
        const double rad = bonus_eval(spec, state.counts[k], state.time);
        mean[i] = mu;
        upper[i] = mu + rad;
        best_lower = std::max(best_lower, mu - rad);
    }
    std::vector<int> kept;
    kept.reserve(state.active.size());
    for (std::size_t i = 0; i < state.active.size(); ++i)
        if (!(best_lower > upper[i])) kept.push_back(state.active[i]);
    if (kept.empty()) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < mean.size(); ++i)
            if (mean[i] > mean[arg]) arg = i;
        kept.push_back(state.active[arg]);
    }
    state.active = std::move(kept);
}

// One phase: pulls (truncated at the horizon if needed) followed by
// elimination. PullFn has signature double(int arm, std::int64_t t).
// Returns the (arm, reward) pairs pulled this phase; empty means the
// budget was already exhausted.
template <typename PullFn>
std::vector<std::pair<int, double>> se_step(SEState& state, const BonusSpec& spec,
                                            std::int64_t horizon, PullFn&& pull,
                                            Stream& stream) {
    std::vector<std::pair<int, double>> pulled;
    if (state.time >= horizon) return pulled;
    const std::vector<int> order = se_phase_order(state, stream);
    for (int arm : order) {
        if (state.time >= horizon) break;
        ++state.time;
        const double r = pull(arm, state.time);
        const std::size_t k = static_cast<std::size_t>(arm - 1);
        ++state.counts[k];
        state.sums[k] += r;
        pulled.emplace_back(arm, r);
    }
    ++state.phase;
    se_eliminate(state, spec);
    return pulled;
}

// ---------------------------------------------------------------------------
// Upper confidence bound policy.
// ---------------------------------------------------------------------------

struct UCBState {
    std::vector<std::int64_t> counts;
    std::vector<double> sums;
    std::int64_t time = 0;
};

inline UCBState ucb_init(int K) {
    if (K < 2) throw std::invalid_argument("ucb_init: need at least 2 arms");
    UCBState s;
    s.counts.assign(static_cast<std::size_t>(K), 0);
    s.sums.assign(static_cast<std::size_t>(K), 0.0);
    return s;
}

// Arm (1-based) to pull at time state.time + 1. Unpulled arms carry an
// infinite index; ties break toward the lowest arm index.
inline int ucb_select(const UCBState& state, const BonusSpec& spec) {
    const std::int64_t t = state.time + 1;
    int best_arm = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < state.counts.size(); ++k) {
        double index;
        if (state.counts[k] == 0) {
            index = std::numeric_limits<double>::infinity();
        } else {
            index = state.sums[k] / static_cast<double>(state.counts[k]) +
                    bonus_eval(spec, state.counts[k], t);
        }
        if (index > best_index) {
            best_index = index;
            best_arm = static_cast<int>(k) + 1;
        }
    }
    return best_arm;
}

template <typename PullFn>
std::pair<int, double> ucb_step(UCBState& state, const BonusSpec& spec, PullFn&& pull) {
    const int arm = ucb_select(state, spec);
    ++state.time;
    const double r = pull(arm, state.time);
    const std::size_t k = static_cast<std::size_t>(arm - 1);
    ++state.counts[k];
    state.sums[k] += r;
    return {arm, r};
}

}  // namespace tailbandit
