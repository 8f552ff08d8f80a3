#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "tailbandit/env.hpp"
#include "tailbandit/rng.hpp"
#include "tailbandit/sim.hpp"

namespace tailbandit {

// ---------------------------------------------------------------------------
// Bonus for the linear policy:
//   rad_t(z) = min(eta1 (t/d)^a z, eta2 s^(b/2) sqrt(z)) + sqrt(d z)
// with s = T for the fixed-time design and s = t for the any-time design.
// The sqrt(dz) term forces exploration at small t.
// ---------------------------------------------------------------------------

enum class LinearTiming { FixedTime, Anytime };

struct LinearBonusSpec {
    double eta1 = 1.0;
    double eta2 = 1.0;
    double alpha = 0.5;
    double beta = 0.5;
    int dim = 1;
    LinearTiming timing = LinearTiming::Anytime;
    std::int64_t horizon = 0;  // FixedTime only

    static LinearBonusSpec fixed_time(double eta1, double eta2, double alpha, double beta,
                                      int d, std::int64_t T) {
        check(eta1, eta2, alpha, beta, d);
        if (T < d) throw std::invalid_argument("LinearBonusSpec: fixed-time design requires T >= d");
        LinearBonusSpec s;
        s.eta1 = eta1;
        s.eta2 = eta2;
        s.alpha = alpha;
        s.beta = beta;
        s.dim = d;
        s.timing = LinearTiming::FixedTime;
        s.horizon = T;
        return s;
    }

    static LinearBonusSpec anytime(double eta1, double eta2, double alpha, double beta, int d) {
        check(eta1, eta2, alpha, beta, d);
        LinearBonusSpec s;
        s.eta1 = eta1;
        s.eta2 = eta2;
        s.alpha = alpha;
        s.beta = beta;
        s.dim = d;
        s.timing = LinearTiming::Anytime;
        return s;
    }

private:
    static void check(double eta1, double eta2, double alpha, double beta, int d) {
        if (!(eta1 >= 0.0 && eta2 >= 0.0))
            throw std::invalid_argument("LinearBonusSpec: etas must be nonnegative");
        if (!(0.0 <= beta && beta <= alpha && alpha <= 1.0))
            throw std::invalid_argument("LinearBonusSpec: parameters must satisfy 0 <= beta <= alpha <= 1");
        if (d < 1) throw std::invalid_argument("LinearBonusSpec: dimension must be positive");
    }
};

inline double radl_eval(const LinearBonusSpec& spec, double z, std::int64_t t) {
    if (!(z >= 0.0)) throw std::invalid_argument("radl_eval: z must be nonnegative");
    if (t < 1) throw std::invalid_argument("radl_eval: time index must be positive");
    const double d = static_cast<double>(spec.dim);
    const double dt = static_cast<double>(t);
    const double s =
        spec.timing == LinearTiming::FixedTime ? static_cast<double>(spec.horizon) : dt;
    const double first = spec.eta1 * std::pow(dt / d, spec.alpha) * z;
    const double second = spec.eta2 * std::pow(s, 0.5 * spec.beta) * std::sqrt(z);
    return std::min(first, second) + std::sqrt(d * z);
}

// ---------------------------------------------------------------------------
// Ridge state for the linear policy. vinv tracks V_t^{-1} with V_0 = I via
// rank-one updates; gram tracks V_t itself so the inverse can periodically
// be recomputed from scratch to cap numerical drift.
// ---------------------------------------------------------------------------

struct LinearState {
    int dim = 0;
    std::vector<double> vinv;   // d x d, row-major
    std::vector<double> gram;   // V = I + sum a a'
    std::vector<double> xty;    // sum a_s r_s
    std::vector<double> estimate;
    std::int64_t time = 0;

    double& vinv_at(int i, int j) { return vinv[static_cast<std::size_t>(i * dim + j)]; }
    double vinv_at(int i, int j) const { return vinv[static_cast<std::size_t>(i * dim + j)]; }
};

inline LinearState linear_init(int d) {
    if (d < 1) throw std::invalid_argument("linear_init: dimension must be positive");
    LinearState s;
    s.dim = d;
    s.vinv.assign(static_cast<std::size_t>(d * d), 0.0);
    s.gram.assign(static_cast<std::size_t>(d * d), 0.0);
    for (int i = 0; i < d; ++i) {
        s.vinv[static_cast<std::size_t>(i * d + i)] = 1.0;
        s.gram[static_cast<std::size_t>(i * d + i)] = 1.0;
    }
    s.xty.assign(static_cast<std::size_t>(d), 0.0);
    s.estimate.assign(static_cast<std::size_t>(d), 0.0);
    return s;
}

namespace detail {

// Gauss-Jordan inverse with partial pivoting; fine for the small SPD
// matrices handled here.
inline std::vector<double> invert_dense(std::vector<double> m, int d) {
    std::vector<double> inv(static_cast<std::size_t>(d * d), 0.0);
    for (int i = 0; i < d; ++i) inv[static_cast<std::size_t>(i * d + i)] = 1.0;
    for (int col = 0; col < d; ++col) {
        int pivot = col;
        for (int r = col + 1; r < d; ++r)
            if (std::abs(m[static_cast<std::size_t>(r * d + col)]) >
                std::abs(m[static_cast<std::size_t>(pivot * d + col)]))
                pivot = r;
        if (m[static_cast<std::size_t>(pivot * d + col)] == 0.0)
            throw std::runtime_error("invert_dense: singular matrix");
        if (pivot != col) {
            for (int j = 0; j < d; ++j) {
                std::swap(m[static_cast<std::size_t>(pivot * d + j)],
                          m[static_cast<std::size_t>(col * d + j)]);
                std::swap(inv[static_cast<std::size_t>(pivot * d + j)],
                          inv[static_cast<std::size_t>(col * d + j)]);
            }
        }
        const double diag = m[static_cast<std::size_t>(col * d + col)];
        for (int j = 0; j < d; ++j) {
            m[static_cast<std::size_t>(col * d + j)] /= diag;
            inv[static_cast<std::size_t>(col * d + j)] /= diag;
        }
        for (int r = 0; r < d; ++r) {
            if (r == col) continue;
            const double f = m[static_cast<std::size_t>(r * d + col)];
            if (f == 0.0) continue;
            for (int j = 0; j < d; ++j) {
                m[static_cast<std::size_t>(r * d + j)] -= f * m[static_cast<std::size_t>(col * d + j)];
                inv[static_cast<std::size_t>(r * d + j)] -= f * inv[static_cast<std::size_t>(col * d + j)];
            }
        }
    }
    return inv;
}

inline void matvec(std::span<const double> m, std::span<const double> v, int d,
                   std::span<double> out) {
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j)
            acc += m[static_cast<std::size_t>(i * d + j)] * v[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
}

}  // namespace detail

inline double quadratic_form(const LinearState& state, std::span<const double> a) {
    double z = 0.0;
    for (int i = 0; i < state.dim; ++i) {
        double row = 0.0;
        for (int j = 0; j < state.dim; ++j)
            row += state.vinv_at(i, j) * a[static_cast<std::size_t>(j)];
        z += a[static_cast<std::size_t>(i)] * row;
    }
    return z;
}

// Recompute V^{-1} directly from the accumulated gram matrix; returns the
// Frobenius distance between the drifted and fresh inverses and resets the
// state (estimate included) to the fresh values.
inline double linear_refresh_inverse(LinearState& state) {
    std::vector<double> fresh = detail::invert_dense(state.gram, state.dim);
    double drift_sq = 0.0;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        const double diff = fresh[i] - state.vinv[i];
        drift_sq += diff * diff;
    }
    state.vinv = std::move(fresh);
    detail::matvec(state.vinv, state.xty, state.dim, state.estimate);
    return std::sqrt(drift_sq);
}

// Action index (0-based into `actions`) maximizing the optimistic index
// theta_hat' a + rad_{t+1}(a' Vinv a); ties break to the lowest index.
inline int ucbl_select(const LinearState& state, const LinearBonusSpec& spec,
                       const std::vector<std::vector<double>>& actions) {
    if (actions.empty()) throw std::invalid_argument("ucbl_select: empty action list");
    const std::int64_t t = state.time + 1;
    int best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (static_cast<int>(actions[i].size()) != state.dim)
            throw std::invalid_argument("ucbl_select: action dimension mismatch");
        double mean = 0.0;
        for (int j = 0; j < state.dim; ++j)
            mean += state.estimate[static_cast<std::size_t>(j)] * actions[i][static_cast<std::size_t>(j)];
        const double z = quadratic_form(state, actions[i]);
        const double index = mean + radl_eval(spec, z, t);
        if (index > best_index) {
            best_index = index;
            best = static_cast<int>(i);
        }
    }
    return best;
}

// Rank-one Sherman-Morrison update of vinv plus ridge-estimate refresh.
// Every 1000 steps the inverse is rebuilt from the gram matrix.
inline void ucbl_update(LinearState& state, std::span<const double> action, double reward) {
    const int d = state.dim;
    if (static_cast<int>(action.size()) != d)
        throw std::invalid_argument("ucbl_update: action dimension mismatch");

    std::vector<double> w(static_cast<std::size_t>(d));
    detail::matvec(state.vinv, action, d, w);
    double denom = 1.0;
    for (int i = 0; i < d; ++i) denom += action[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            state.vinv_at(i, j) -= w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] / denom;

    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j)
            state.gram[static_cast<std::size_t>(i * d + j)] +=
                action[static_cast<std::size_t>(i)] * action[static_cast<std::size_t>(j)];
        state.xty[static_cast<std::size_t>(i)] += reward * action[static_cast<std::size_t>(i)];
    }
    ++state.time;

    if (state.time % 1000 == 0) {
        linear_refresh_inverse(state);
    } else {
        detail::matvec(state.vinv, state.xty, d, state.estimate);
    }
}

// ---------------------------------------------------------------------------
// Full episode of the linear policy. Pseudo regret is the gap-weighted pull
// count over the (round-invariant) action set; the elliptical potential
// sum_t a_t' V_{t-1}^{-1} a_t is tracked as the exploration budget.
// ---------------------------------------------------------------------------

inline EpisodeResult run_linear_episode(const LinearInstance& instance,
                                        const LinearBonusSpec& spec, std::int64_t T,
                                        std::uint64_t seed) {
    if (T < 1) throw std::invalid_argument("run_linear_episode: horizon must be positive");
    if (spec.dim != instance.dim)
        throw std::invalid_argument("run_linear_episode: spec/instance dimension mismatch");

    Stream stream(seed);
    LinearState state = linear_init(instance.dim);
    const std::size_t n_actions = instance.actions.size();

    std::vector<double> action_means(n_actions);
    for (std::size_t i = 0; i < n_actions; ++i) action_means[i] = instance.mean_of(i);
    const double best = instance.best_mean();

    EpisodeResult out;
    out.horizon = T;
    out.seed = seed;
    out.pull_counts.assign(n_actions, 0);

    std::vector<std::vector<double>> round_actions(instance.rotate ? n_actions : 0);
    for (std::int64_t t = 1; t <= T; ++t) {
        if (instance.rotate)
            for (std::size_t slot = 0; slot < n_actions; ++slot)
                round_actions[slot] = instance.actions[instance.action_index_at(t, slot)];
        const int slot =
            ucbl_select(state, spec, instance.rotate ? round_actions : instance.actions);
        const std::size_t base = instance.action_index_at(t, static_cast<std::size_t>(slot));

        out.elliptical_potential += quadratic_form(state, instance.actions[base]);
        const double eps = sample_noise(instance.noise, stream);
        out.noise_sum += eps;
        const double reward = action_means[base] + eps;
        ucbl_update(state, instance.actions[base], reward);
        ++out.pull_counts[base];
    }

    for (std::size_t i = 0; i < n_actions; ++i)
        out.pseudo_regret += static_cast<double>(out.pull_counts[i]) * (best - action_means[i]);
    out.empirical_regret = out.pseudo_regret - out.noise_sum;
    return out;
}

}  // namespace tailbandit
