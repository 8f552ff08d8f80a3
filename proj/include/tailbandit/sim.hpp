#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tailbandit/env.hpp"
#include "tailbandit/policy.hpp"
#include "tailbandit/rng.hpp"

namespace tailbandit {

enum class PolicyKind { SE, UCB, SEwRP };

struct PolicySpec {
    PolicyKind kind = PolicyKind::UCB;
    BonusSpec bonus;
};

// Outcome of one seeded episode. The identity
//   empirical_regret = pseudo_regret - noise_sum
// holds exactly: the empirical value is computed from the other two.
struct EpisodeResult {
    std::vector<std::int64_t> pull_counts;
    double pseudo_regret = 0.0;
    double noise_sum = 0.0;
    double empirical_regret = 0.0;
    double elliptical_potential = 0.0;  // linear episodes only
    std::int64_t horizon = 0;
    std::uint64_t seed = 0;

    bool operator==(const EpisodeResult&) const = default;
};

inline double pseudo_regret(std::span<const std::int64_t> counts,
                            std::span<const double> gaps) {
    if (counts.size() != gaps.size())
        throw std::invalid_argument("pseudo_regret: counts/gaps length mismatch");
    double r = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k)
        r += static_cast<double>(counts[k]) * gaps[k];
    return r;
}

// Run one episode against precomputed baseline values (empty = no baseline).
// The baseline enters rewards only; regret accounting uses gaps and the
// genuine noise, in which b_t cancels.
template <typename NoiseFn>
EpisodeResult run_episode_with(const BanditInstance& instance, const PolicySpec& policy,
                               std::int64_t T, std::span<const double> baseline,
                               NoiseFn&& noise_at, Stream& stream) {
    const int K = instance.arms();
    if (policy.kind != PolicyKind::UCB && T < K)
        throw std::invalid_argument("run_episode: elimination policies need T >= K");
    if (T < 1) throw std::invalid_argument("run_episode: horizon must be positive");
    if (!baseline.empty() && static_cast<std::int64_t>(baseline.size()) < T)
        throw std::invalid_argument("run_episode: baseline shorter than horizon");

    EpisodeResult out;
    out.horizon = T;
    double noise_sum = 0.0;
    auto pull = [&](int arm, std::int64_t t) {
        const double eps = noise_at(t);
        noise_sum += eps;
        const double b = baseline.empty() ? 0.0 : baseline[static_cast<std::size_t>(t - 1)];
        return b + instance.means[static_cast<std::size_t>(arm - 1)] + eps;
    };

    if (policy.kind == PolicyKind::UCB) {
        UCBState st = ucb_init(K);
        while (st.time < T) ucb_step(st, policy.bonus, pull);
        out.pull_counts = st.counts;
    } else {
        SEState st = se_init(K, policy.kind == PolicyKind::SEwRP);
        while (st.time < T) se_step(st, policy.bonus, T, pull, stream);
        out.pull_counts = st.counts;
    }

    out.noise_sum = noise_sum;
    out.pseudo_regret = pseudo_regret(out.pull_counts, instance.gaps());
    out.empirical_regret = out.pseudo_regret - out.noise_sum;
    return out;
}

inline EpisodeResult run_episode(const BanditInstance& instance, const PolicySpec& policy,
                                 std::int64_t T, const BaselineSchedule* baseline,
                                 std::uint64_t seed) {
    Stream stream(seed);
    std::vector<double> b;
    if (baseline != nullptr) b = baseline->values(T);
    auto noise_at = [&](std::int64_t) { return sample_noise(instance.noise, stream); };
    EpisodeResult out = run_episode_with(instance, policy, T, b, noise_at, stream);
    out.seed = seed;
    return out;
}

// ---------------------------------------------------------------------------
// Exact enumeration oracle. With two-point (Rademacher) noise the episode is
// deterministic given the sign of every per-step draw, so the full pseudo
// regret distribution follows from walking all sign paths (and, for the
// permuted variant, exactly averaging over each phase's pull orders).
// ---------------------------------------------------------------------------

struct RegretDistribution {
    std::vector<std::pair<double, double>> support;  // (regret, probability), ascending

    double cdf(double x) const {
        double c = 0.0;
        for (const auto& [value, p] : support)
            if (value <= x) c += p;
        return c;
    }

    double total_probability() const {
        double c = 0.0;
        for (const auto& [value, p] : support) c += p;
        return c;
    }
};

namespace detail {

struct Enumerator {
    const BanditInstance& instance;
    const PolicySpec& policy;
    std::int64_t T;
    std::vector<double> baseline;  // empty = none
    double sigma;
    std::map<std::vector<std::int64_t>, long double> mass;

    double baseline_at(std::int64_t t) const {
        return baseline.empty() ? 0.0 : baseline[static_cast<std::size_t>(t - 1)];
    }

    void record(const std::vector<std::int64_t>& counts, long double prob) {
        mass[counts] += prob;
    }

    // Branch over the noise sign for one pull; sigma == 0 degenerates to a
    // single branch.
    template <typename Next>
    void branch_noise(long double prob, Next&& next) const {
        if (sigma == 0.0) {
            next(0.0, prob);
        } else {
            next(+sigma, prob * 0.5L);
            next(-sigma, prob * 0.5L);
        }
    }

    void run_ucb(const UCBState& st, long double prob) {
        if (st.time == T) {
            record(st.counts, prob);
            return;
        }
        const int arm = ucb_select(st, policy.bonus);
        branch_noise(prob, [&](double eps, long double p) {
            UCBState nx = st;
            ++nx.time;
            const std::size_t k = static_cast<std::size_t>(arm - 1);
            ++nx.counts[k];
            nx.sums[k] += baseline_at(nx.time) + instance.means[k] + eps;
            run_ucb(nx, p);
        });
    }

    void run_se_phase(const SEState& st, const std::vector<int>& order, std::size_t pos,
                      long double prob) {
        if (st.time == T) {
            record(st.counts, prob);
            return;
        }
        if (pos == order.size()) {
            SEState nx = st;
            ++nx.phase;
            se_eliminate(nx, policy.bonus);
            run_se(nx, prob);
            return;
        }
        const int arm = order[pos];
        branch_noise(prob, [&](double eps, long double p) {
            SEState nx = st;
            ++nx.time;
            const std::size_t k = static_cast<std::size_t>(arm - 1);
            ++nx.counts[k];
            nx.sums[k] += baseline_at(nx.time) + instance.means[k] + eps;
            run_se_phase(nx, order, pos + 1, p);
        });
    }

    void run_se(const SEState& st, long double prob) {
        if (st.time == T) {
            record(st.counts, prob);
            return;
        }
        if (!st.permute) {
            run_se_phase(st, st.active, 0, prob);
            return;
        }
        // All pull orders of the active set, each with equal weight.
        std::vector<int> order = st.active;
        std::vector<std::vector<int>> orders;
        do {
            orders.push_back(order);
        } while (std::next_permutation(order.begin(), order.end()));
        const long double w = prob / static_cast<long double>(orders.size());
        for (const auto& o : orders) run_se_phase(st, o, 0, w);
    }
};

}  // namespace detail

inline RegretDistribution exact_regret_distribution(const BanditInstance& instance,
                                                    const PolicySpec& policy, std::int64_t T,
                                                    const BaselineSchedule* baseline = nullptr) {
    if (instance.noise.kind != NoiseKind::Rademacher)
        throw std::invalid_argument("exact_regret_distribution: noise must be two-point (Rademacher)");
    if (instance.arms() > 3)
        throw std::invalid_argument("exact_regret_distribution: only K = 2 or 3 supported");
    if (T > 14)
        throw std::invalid_argument("exact_regret_distribution: horizon above enumeration limit (14)");
    if (policy.kind != PolicyKind::UCB && T < instance.arms())
        throw std::invalid_argument("exact_regret_distribution: elimination policies need T >= K");
    if (T < 1) throw std::invalid_argument("exact_regret_distribution: horizon must be positive");

    detail::Enumerator en{instance, policy, T,
                          baseline != nullptr ? baseline->values(T) : std::vector<double>{},
                          instance.noise.sigma,
                          {}};
    if (policy.kind == PolicyKind::UCB) {
        en.run_ucb(ucb_init(instance.arms()), 1.0L);
    } else {
        en.run_se(se_init(instance.arms(), policy.kind == PolicyKind::SEwRP), 1.0L);
    }

    const std::vector<double> gaps = instance.gaps();
    std::map<double, long double> by_regret;
    for (const auto& [counts, p] : en.mass)
        by_regret[pseudo_regret(counts, gaps)] += p;

    RegretDistribution dist;
    dist.support.reserve(by_regret.size());
    for (const auto& [value, p] : by_regret)
        dist.support.emplace_back(value, static_cast<double>(p));
    return dist;
}

}  // namespace tailbandit
