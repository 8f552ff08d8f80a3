#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace tailbandit {

// ---------------------------------------------------------------------------
// Closed-form tail bounds. Every evaluator computes its two-term expression
// term by term, positive-part operators included, then clamps to [0, 1].
// Exponent arguments are accumulated in long double before exponentiation;
// underflow to exactly zero is recorded as zero.
// ---------------------------------------------------------------------------

enum class Scenario { WorstCase, InstanceDependent };
enum class Timing { FixedTime, Anytime };
enum class EnvKind { Plain, Baseline, Linear };

struct BoundParams {
    Scenario scenario = Scenario::WorstCase;
    Timing timing = Timing::FixedTime;
    EnvKind env = EnvKind::Plain;
    std::int64_t T = 3;
    int K = 2;               // plain / baseline
    int dim = 1;             // linear
    double sigma = 1.0;
    double alpha = 0.5;
    double beta = 0.5;
    double eta1 = 1.0;
    double eta2 = 1.0;
    double baseline_bound = 0.0;       // B
    double uniform_gap = 0.0;          // linear instance-dependent
    std::vector<double> gaps;          // plain / baseline instance-dependent

    void validate() const {
        if (!(0.0 <= beta && beta <= alpha && alpha <= 1.0))
            throw std::invalid_argument("BoundParams: parameters must satisfy 0 <= beta <= alpha <= 1");
        if (!(sigma >= 0.0)) throw std::invalid_argument("BoundParams: sigma must be nonnegative");
        if (!(eta1 >= 0.0 && eta2 >= 0.0))
            throw std::invalid_argument("BoundParams: etas must be nonnegative");
        if (env == EnvKind::Linear) {
            if (dim < 1) throw std::invalid_argument("BoundParams: dimension must be positive");
            if (T < dim) throw std::invalid_argument("BoundParams: linear bounds need T >= d");
        } else {
            if (K < 2) throw std::invalid_argument("BoundParams: need at least 2 arms");
            if (T < 3) throw std::invalid_argument("BoundParams: MAB bounds need T >= 3");
        }
        if (!(baseline_bound >= 0.0))
            throw std::invalid_argument("BoundParams: baseline bound must be nonnegative");
    }
};

// Harmonic aggregate of the positive gaps: 1/D0 = sum over positive gaps of
// 1/gap. Zero gaps (optimal arms) are excluded.
inline double delta_zero(std::span<const double> gaps) {
    double inv = 0.0;
    bool any = false;
    for (double g : gaps) {
        if (g < 0.0) throw std::invalid_argument("delta_zero: gaps must be nonnegative");
        if (g > 0.0) {
            inv += 1.0 / g;
            any = true;
        }
    }
    if (!any) throw std::invalid_argument("delta_zero: degenerate instance, all gaps zero");
    return 1.0 / inv;
}

namespace detail {

inline long double positive_part(long double v) { return v > 0.0L ? v : 0.0L; }

// num / den with the 0/0 limit taken as 0 (vanished positive part wins).
inline long double ratio(long double num, long double den) {
    if (num == 0.0L) return 0.0L;
    return num / den;
}

// prefactor * exp(-arg) in log space so huge prefactors cannot overflow.
inline long double bound_term(long double ln_prefactor, long double exponent_arg) {
    if (std::isinf(static_cast<double>(exponent_arg))) return 0.0L;
    return std::exp(ln_prefactor - exponent_arg);
}

inline double clamp_probability(long double v) {
    if (!(v > 0.0L)) return 0.0;
    if (v >= 1.0L) return 1.0;
    return static_cast<double>(v);
}

}  // namespace detail

// Tail bound for the K-armed problem. Plain environments use the fixed-time
// elimination design or the any-time confidence-bound design; baseline
// environments use the permuted elimination design, whose concentration
// constant replaces 4 sigma^2 by (B + 2 sigma)^2. Baseline + any-time has no
// closed form.
inline double mab_tail_bound(const BoundParams& p, double x) {
    p.validate();
    if (p.env == EnvKind::Linear)
        throw std::invalid_argument("mab_tail_bound: use linear_tail_bound for linear environments");
    if (!(x > 0.0)) throw std::invalid_argument("mab_tail_bound: threshold must be positive");
    if (p.env == EnvKind::Baseline && p.timing == Timing::Anytime)
        throw std::invalid_argument("mab_tail_bound: no any-time bound for baseline environments");
    if (p.scenario == Scenario::InstanceDependent && p.gaps.empty())
        throw std::invalid_argument("mab_tail_bound: instance-dependent bound needs gaps");

    const long double K = p.K;
    const long double T = static_cast<long double>(p.T);
    const long double lnT = std::log(T);
    const long double sig2 = static_cast<long double>(p.sigma) * p.sigma;
    const long double xk = detail::positive_part(static_cast<long double>(x) - K);
    const long double e1 = p.eta1, e2 = p.eta2;
    const long double a = p.alpha, b = p.beta;

    if (p.timing == Timing::Anytime) {
        // Any-time confidence-bound design.
        if (p.scenario == Scenario::WorstCase) {
            const long double num1 = detail::positive_part(
                static_cast<long double>(x) - K - 4.0L * e1 * std::pow(K, 1.0L - a) * std::pow(T, a));
            const long double t1 =
                detail::bound_term(std::log(2.0L * K) + 2.0L * std::log(T),
                                   detail::ratio(num1 * num1, 32.0L * sig2 * K * T * lnT));
            const long double arg2 =
                std::min(detail::ratio(e1 * xk, 2.0L * sig2 * std::pow(K, a) * std::pow(T, 1.0L - a) * lnT),
                         detail::ratio(e2 * e2 * std::pow(xk, b), 2.0L * sig2 * std::pow(lnT, b)));
            const long double t2 =
                detail::bound_term(std::log(2.0L * K) + 3.0L * std::log(T), arg2);
            return detail::clamp_probability(t1 + t2);
        }
        const long double d0 = delta_zero(p.gaps);
        const long double num1 =
            detail::positive_part(xk * d0 - 4.0L * e2 * e2 * std::pow(T, b));
        const long double t1 = detail::bound_term(std::log(K) + 2.0L * std::log(T),
                                                  detail::ratio(num1, 8.0L * sig2));
        const long double arg2 =
            std::min(detail::ratio(e1 * std::pow(xk, a) * std::pow(d0, a), sig2 * std::pow(K, a)),
                     detail::ratio(e2 * e2 * std::pow(xk, b) * std::pow(d0, b), 2.0L * sig2));
        const long double t2 = detail::bound_term(std::log(K) + 3.0L * std::log(T), arg2);
        return detail::clamp_probability(t1 + t2);
    }

    // Fixed-time elimination design. The plain setting divides by 8 sigma^2
    // (first term 32 sigma^2 K T); the baseline setting divides by
    // 2 (B + 2 sigma)^2 (first term 8 (B + 2 sigma)^2 K T).
    const long double conc = p.env == EnvKind::Baseline
                                 ? (static_cast<long double>(p.baseline_bound) + 2.0L * p.sigma) *
                                       (static_cast<long double>(p.baseline_bound) + 2.0L * p.sigma)
                                 : 4.0L * sig2;
    if (p.scenario == Scenario::WorstCase) {
        const long double num1 = detail::positive_part(
            static_cast<long double>(x) - K -
            4.0L * e1 * std::pow(K, 1.0L - a) * std::pow(T, a) * std::sqrt(lnT));
        const long double t1 = detail::bound_term(
            std::log(6.0L * K), detail::ratio(num1 * num1, 8.0L * conc * K * T));
        const long double inner =
            std::min(detail::ratio(e1 * xk, 2.0L * std::pow(K, a) * std::pow(T, 1.0L - a)),
                     e2 * e2 * std::pow(T, b) * std::sqrt(lnT));
        const long double t2 = detail::bound_term(std::log(6.0L * K * K) + std::log(T),
                                                  std::sqrt(lnT) / (2.0L * conc) * inner);
        return detail::clamp_probability(t1 + t2);
    }
    const long double d0 = delta_zero(p.gaps);
    const long double num1 =
        detail::positive_part((static_cast<long double>(x) - K) * d0 - 4.0L * e2 * e2 * std::pow(T, b) * lnT);
    const long double t1 =
        detail::bound_term(std::log(3.0L * K), detail::ratio(num1, 2.0L * conc));
    long double t2 = 0.0L;
    for (double g : p.gaps) {
        if (!(g > 0.0)) continue;
        const long double inner = std::min(e1 * std::pow(T / K, a) * static_cast<long double>(g),
                                           e2 * e2 * std::pow(T, b) * std::sqrt(lnT));
        t2 += detail::bound_term(std::log(3.0L * K) + std::log(T),
                                 inner * std::sqrt(lnT) / (2.0L * conc));
    }
    return detail::clamp_probability(t1 + t2);
}

// Tail bound for the linear policy, fixed-time or any-time design. Both
// carry the 2d (T/d)^(2d+1) prefactor.
inline double linear_tail_bound(const BoundParams& p, double x) {
    p.validate();
    if (p.env != EnvKind::Linear)
        throw std::invalid_argument("linear_tail_bound: params must describe a linear environment");
    if (!(x > 0.0)) throw std::invalid_argument("linear_tail_bound: threshold must be positive");
    if (p.scenario == Scenario::InstanceDependent && !(p.uniform_gap > 0.0))
        throw std::invalid_argument("linear_tail_bound: instance-dependent bound needs a positive gap");

    const long double d = p.dim;
    const long double T = static_cast<long double>(p.T);
    const long double lnT = std::log(T);
    const long double sig2 = static_cast<long double>(p.sigma) * p.sigma;
    const long double e1 = p.eta1, e2 = p.eta2;
    const long double a = p.alpha, b = p.beta;
    const long double sqd = std::sqrt(d);
    const long double xs = detail::positive_part(static_cast<long double>(x) - 2.0L * sqd);
    const long double ln_pref = std::log(2.0L * d) + (2.0L * d + 1.0L) * std::log(T / d);

    // Second component of the min: T^beta for fixed-time, threshold-driven
    // for any-time.
    const long double comp2 =
        p.timing == Timing::FixedTime
            ? detail::ratio(e2 * e2 * std::pow(T, b), 2.0L * sig2)
            : detail::ratio(e2 * e2 * std::pow(xs, b),
                            16.0L * sig2 * std::pow(d, b / 2.0L) * std::pow(lnT, b));

    if (p.scenario == Scenario::WorstCase) {
        const long double num1 = detail::positive_part(
            static_cast<long double>(x) - 2.0L * sqd - 16.0L * d * std::sqrt(T) * lnT -
            8.0L * e1 * std::pow(d, 1.0L - a) * std::pow(T, a) * lnT);
        const long double t1 = detail::bound_term(
            ln_pref, detail::ratio(num1 * num1, 128.0L * sig2 * d * T * lnT * lnT));
        const long double comp1 =
            detail::ratio(e1 * xs, 4.0L * sig2 * std::pow(d, a) * std::pow(T, 1.0L - a) * lnT);
        const long double t2 = detail::bound_term(ln_pref, std::min(comp1, comp2));
        return detail::clamp_probability(t1 + t2);
    }

    const long double gap = p.uniform_gap;
    const long double num1 = detail::positive_part(
        gap * (static_cast<long double>(x) - 2.0L * sqd) - 128.0L * d - 32.0L * e2 * e2 * std::pow(T, b));
    const long double t1 =
        detail::bound_term(ln_pref, detail::ratio(num1, 32.0L * sig2 * d * lnT));
    const long double comp1 = detail::ratio(
        e1 * gap * std::pow(xs, a), 8.0L * sig2 * std::pow(d, 1.5L * a) * std::pow(lnT, a));
    const long double t2 = detail::bound_term(ln_pref, std::min(comp1, comp2));
    return detail::clamp_probability(t1 + t2);
}

// Concentration of the accumulated genuine noise over T steps.
inline double noise_tail_bound(double x, double sigma, std::int64_t T) {
    if (!(x >= 0.0)) throw std::invalid_argument("noise_tail_bound: threshold must be nonnegative");
    if (T < 1) throw std::invalid_argument("noise_tail_bound: horizon must be positive");
    if (sigma == 0.0) return x > 0.0 ? 0.0 : 1.0;
    if (!(sigma > 0.0)) throw std::invalid_argument("noise_tail_bound: sigma must be nonnegative");
    const long double arg = static_cast<long double>(x) * x /
                            (2.0L * static_cast<long double>(sigma) * sigma * static_cast<long double>(T));
    return detail::clamp_probability(std::exp(-arg));
}

// Critical polynomial rate whose negative is the best achievable log tail
// probability for an alpha-optimal, beta-consistent policy family.
inline double critical_rate(Scenario scenario, bool horizon_known, double x, double T,
                            double alpha, double beta) {
    if (!(x > 0.0)) throw std::invalid_argument("critical_rate: threshold must be positive");
    if (!(T >= 1.0)) throw std::invalid_argument("critical_rate: horizon must be >= 1");
    const double worst_first = x / std::pow(T, 1.0 - alpha);
    if (scenario == Scenario::WorstCase)
        return horizon_known ? std::min(worst_first, std::pow(T, beta))
                             : std::min(worst_first, std::pow(x, beta));
    return horizon_known ? std::pow(T, beta) : std::pow(x, beta);
}

}  // namespace tailbandit
