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
// Noise models. All three families are zero-mean and sigma-subgaussian:
// Rademacher takes values exactly +-sigma, UniformSymmetric is uniform on
// (-sigma*sqrt(3), sigma*sqrt(3)).
// ---------------------------------------------------------------------------

enum class NoiseKind { Gaussian, Rademacher, UniformSymmetric };

struct NoiseModel {
    NoiseKind kind = NoiseKind::Gaussian;
    double sigma = 1.0;

    NoiseModel() = default;
    NoiseModel(NoiseKind k, double s) : kind(k), sigma(s) {
        if (!(sigma >= 0.0))
            throw std::invalid_argument("NoiseModel: sigma must be nonnegative");
    }
};

// One draw from the noise law. Each kind consumes a fixed number of stream
// words (Gaussian: 2, others: 1) independent of sigma.
inline double sample_noise(const NoiseModel& model, Stream& stream) {
    switch (model.kind) {
        case NoiseKind::Gaussian: {
            const double g = stream.gaussian();
            return model.sigma == 0.0 ? 0.0 : model.sigma * g;
        }
        case NoiseKind::Rademacher: {
            const double s = stream.sign();
            return model.sigma == 0.0 ? 0.0 : model.sigma * s;
        }
        case NoiseKind::UniformSymmetric: {
            const double u = stream.uniform01();
            return model.sigma * 1.7320508075688772 * (2.0 * u - 1.0);
        }
    }
    throw std::logic_error("sample_noise: unknown noise kind");
}

// ---------------------------------------------------------------------------
// K-armed instance. Gaps are always recomputed from the means.
// ---------------------------------------------------------------------------

struct BanditInstance {
    std::vector<double> means;
    NoiseModel noise;

    BanditInstance(std::vector<double> m, NoiseModel n)
        : means(std::move(m)), noise(n) {
        if (means.size() < 2)
            throw std::invalid_argument("BanditInstance: need at least 2 arms");
        for (double v : means)
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("BanditInstance: arm means must lie in [0, 1]");
    }

    int arms() const { return static_cast<int>(means.size()); }

    double best_mean() const {
        return *std::max_element(means.begin(), means.end());
    }

    std::vector<double> gaps() const {
        const double best = best_mean();
        std::vector<double> g(means.size());
        for (std::size_t k = 0; k < means.size(); ++k) g[k] = best - means[k];
        return g;
    }
};

// ---------------------------------------------------------------------------
// Baseline reward schedules b_t in [0, B]. Schedules are fixed before the
// run (the adversary is oblivious); generation is a pure function of
// (kind, parameters, horizon, seed).
// ---------------------------------------------------------------------------

enum class BaselineKind { Zero, Constant, Sinusoid, SeededRandomWalk, Piecewise };

struct BaselineSchedule {
    BaselineKind kind = BaselineKind::Zero;
    double bound = 0.0;  // B
    double constant = 0.0;
    double amplitude = 0.0;
    double period = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::int64_t, double>> pieces;  // (start time, value)

    static BaselineSchedule zero() { return {}; }

    static BaselineSchedule make_constant(double c, double bound) {
        if (!(bound >= 0.0)) throw std::invalid_argument("BaselineSchedule: bound must be nonnegative");
        if (!(c >= 0.0 && c <= bound))
            throw std::invalid_argument("BaselineSchedule: constant must lie in [0, B]");
        BaselineSchedule s;
        s.kind = BaselineKind::Constant;
        s.bound = bound;
        s.constant = c;
        return s;
    }

    static BaselineSchedule make_sinusoid(double amplitude, double period, double bound) {
        if (!(bound >= 0.0)) throw std::invalid_argument("BaselineSchedule: bound must be nonnegative");
        if (!(amplitude >= 0.0 && amplitude <= bound))
            throw std::invalid_argument("BaselineSchedule: amplitude must lie in [0, B]");
        if (!(period > 0.0)) throw std::invalid_argument("BaselineSchedule: period must be positive");
        BaselineSchedule s;
        s.kind = BaselineKind::Sinusoid;
        s.bound = bound;
        s.amplitude = amplitude;
        s.period = period;
        return s;
    }

    static BaselineSchedule make_random_walk(double bound, std::uint64_t seed) {
        if (!(bound >= 0.0)) throw std::invalid_argument("BaselineSchedule: bound must be nonnegative");
        BaselineSchedule s;
        s.kind = BaselineKind::SeededRandomWalk;
        s.bound = bound;
        s.seed = seed;
        return s;
    }

    static BaselineSchedule make_piecewise(std::vector<std::pair<std::int64_t, double>> pieces,
                                           double bound) {
        if (!(bound >= 0.0)) throw std::invalid_argument("BaselineSchedule: bound must be nonnegative");
        if (pieces.empty() || pieces.front().first > 1)
            throw std::invalid_argument("BaselineSchedule: pieces must start at t <= 1");
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            if (i > 0 && pieces[i].first <= pieces[i - 1].first)
                throw std::invalid_argument("BaselineSchedule: piece starts must be strictly increasing");
            if (!(pieces[i].second >= 0.0 && pieces[i].second <= bound))
                throw std::invalid_argument("BaselineSchedule: piece values must lie in [0, B]");
        }
        BaselineSchedule s;
        s.kind = BaselineKind::Piecewise;
        s.bound = bound;
        s.pieces = std::move(pieces);
        return s;
    }

    // b_1 .. b_T.
    std::vector<double> values(std::int64_t horizon) const {
        std::vector<double> b(static_cast<std::size_t>(horizon), 0.0);
        switch (kind) {
            case BaselineKind::Zero:
                break;
            case BaselineKind::Constant:
                std::fill(b.begin(), b.end(), constant);
                break;
            case BaselineKind::Sinusoid:
                for (std::int64_t t = 1; t <= horizon; ++t)
                    b[t - 1] = 0.5 * amplitude *
                               (1.0 + std::sin(6.283185307179586 * static_cast<double>(t) / period));
                break;
            case BaselineKind::SeededRandomWalk: {
                Stream walk(mix64(seed ^ 0x77616c6bull));  // decoupled from episode streams
                double cur = 0.5 * bound;
                const double step = bound / 16.0;
                for (std::int64_t t = 1; t <= horizon; ++t) {
                    cur = std::clamp(cur + step * (2.0 * walk.uniform01() - 1.0), 0.0, bound);
                    b[t - 1] = cur;
                }
                break;
            }
            case BaselineKind::Piecewise: {
                std::size_t seg = 0;
                for (std::int64_t t = 1; t <= horizon; ++t) {
                    while (seg + 1 < pieces.size() && pieces[seg + 1].first <= t) ++seg;
                    b[t - 1] = pieces[seg].second;
                }
                break;
            }
        }
        return b;
    }
};

// Reward r = b_t + theta_arm + eps for 1-based arm and time indices.
inline double sample_reward(const BanditInstance& instance, int arm, std::int64_t t,
                            const BaselineSchedule* baseline, Stream& stream) {
    if (arm < 1 || arm > instance.arms())
        throw std::invalid_argument("sample_reward: arm index out of range");
    if (t < 1) throw std::invalid_argument("sample_reward: time index out of range");
    double b = 0.0;
    if (baseline != nullptr && baseline->kind != BaselineKind::Zero)
        b = baseline->values(t)[static_cast<std::size_t>(t - 1)];
    return b + instance.means[static_cast<std::size_t>(arm - 1)] +
           sample_noise(instance.noise, stream);
}

// ---------------------------------------------------------------------------
// Linear instance: unknown theta in R^d with |theta|_inf <= 1, actions with
// ||a||_2 <= 1. The action list is fixed; the optional rotation rule offers
// the same set in cyclically shifted order each round.
// ---------------------------------------------------------------------------

struct LinearInstance {
    int dim = 0;
    std::vector<double> theta;
    std::vector<std::vector<double>> actions;
    NoiseModel noise;
    bool rotate = false;

    LinearInstance(std::vector<double> th, std::vector<std::vector<double>> acts,
                   NoiseModel n, bool rotate_actions = false)
        : dim(static_cast<int>(th.size())),
          theta(std::move(th)),
          actions(std::move(acts)),
          noise(n),
          rotate(rotate_actions) {
        if (dim < 1) throw std::invalid_argument("LinearInstance: dimension must be positive");
        for (double v : theta)
            if (!(std::abs(v) <= 1.0))
                throw std::invalid_argument("LinearInstance: |theta|_inf must be <= 1");
        if (actions.empty())
            throw std::invalid_argument("LinearInstance: action set must be nonempty");
        for (const auto& a : actions) {
            if (static_cast<int>(a.size()) != dim)
                throw std::invalid_argument("LinearInstance: action dimension mismatch");
            double sq = 0.0;
            for (double v : a) sq += v * v;
            if (!(sq <= 1.0 + 1e-12))
                throw std::invalid_argument("LinearInstance: action 2-norm must be <= 1");
        }
    }

    static std::vector<std::vector<double>> basis_actions(int d) {
        std::vector<std::vector<double>> acts(static_cast<std::size_t>(d),
                                              std::vector<double>(static_cast<std::size_t>(d), 0.0));
        for (int i = 0; i < d; ++i) acts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
        return acts;
    }

    double mean_of(std::size_t action_index) const {
        double v = 0.0;
        for (int i = 0; i < dim; ++i)
            v += theta[static_cast<std::size_t>(i)] * actions[action_index][static_cast<std::size_t>(i)];
        return v;
    }

    double best_mean() const {
        double best = mean_of(0);
        for (std::size_t i = 1; i < actions.size(); ++i) best = std::max(best, mean_of(i));
        return best;
    }

    // Base-list index of the action offered at position `slot` in round t.
    std::size_t action_index_at(std::int64_t t, std::size_t slot) const {
        if (!rotate) return slot;
        const std::size_t n = actions.size();
        return (slot + static_cast<std::size_t>((t - 1) % static_cast<std::int64_t>(n))) % n;
    }

    // min over rounds, over a != a*, of theta'a* - theta'a. Rotation only
    // reorders the set, so the cycle minimum equals the base-set gap.
    double uniform_gap() const {
        const double best = best_mean();
        std::size_t best_idx = 0;
        for (std::size_t i = 0; i < actions.size(); ++i)
            if (mean_of(i) == best) { best_idx = i; break; }
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < actions.size(); ++i)
            if (i != best_idx) gap = std::min(gap, best - mean_of(i));
        if (!std::isfinite(gap)) gap = 0.0;  // single action
        return gap;
    }
};

// theta' action; the action must be one of the instance's actions.
inline double linear_mean(const LinearInstance& instance, const std::vector<double>& action) {
    for (std::size_t i = 0; i < instance.actions.size(); ++i)
        if (instance.actions[i] == action) return instance.mean_of(i);
    throw std::invalid_argument("linear_mean: action not in the instance's action set");
}

}  // namespace tailbandit
