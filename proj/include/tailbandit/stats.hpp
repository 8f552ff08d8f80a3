#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tailbandit {

// Inverse standard normal CDF, Wichura's AS 241 (PPND16). Relative error
// below 1e-15 over (0, 1).
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("inverse_normal_cdf: p must lie in (0, 1)");
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                      0.24178072517745061177) * r + 1.27045825245236838258) * r +
                    3.64784832476320460504) * r + 5.7694972214606914055) * r +
                  4.6303378461565452959) * r + 1.42343711074968357734) /
                (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                      0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                    0.68976733498510000455) * r + 1.6763848301838038494) * r +
                  2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                    0.29656057182850489123) * r + 1.7848265399172913358) * r +
                  5.4637849111641143699) * r + 6.6579046435011037772) /
                (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                      1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                    0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                  0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -value : value;
}

// Wilson score interval for a binomial proportion; well behaved near zero
// counts, which is where tail estimates live.
inline std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t total,
                                                 double confidence) {
    if (total <= 0) throw std::invalid_argument("wilson_interval: total must be positive");
    if (successes < 0 || successes > total)
        throw std::invalid_argument("wilson_interval: successes out of range");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("wilson_interval: confidence must lie in (0, 1)");
    const double z = inverse_normal_cdf(1.0 - 0.5 * (1.0 - confidence));
    const double n = static_cast<double>(total);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    // the boundary cases are exact; don't let rounding lift them off 0 or 1
    const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = successes == total ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Empirical tail curve: exceedance counting over a sorted threshold grid.
// ---------------------------------------------------------------------------

struct TailCurve {
    std::vector<double> thresholds;
    std::vector<std::int64_t> exceed;
    std::int64_t total = 0;
    double confidence = 0.95;
    std::vector<double> phat;
    std::vector<double> ci_lo;
    std::vector<double> ci_hi;
};

inline TailCurve estimate_tail(std::span<const double> samples, std::vector<double> thresholds,
                               double confidence = 0.95) {
    if (samples.empty()) throw std::invalid_argument("estimate_tail: samples must be nonempty");
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw std::invalid_argument("estimate_tail: thresholds must be sorted ascending");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    TailCurve curve;
    curve.total = static_cast<std::int64_t>(sorted.size());
    curve.confidence = confidence;
    curve.thresholds = std::move(thresholds);
    curve.exceed.reserve(curve.thresholds.size());
    curve.phat.reserve(curve.thresholds.size());
    curve.ci_lo.reserve(curve.thresholds.size());
    curve.ci_hi.reserve(curve.thresholds.size());
    for (double x : curve.thresholds) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
        const std::int64_t k = static_cast<std::int64_t>(sorted.end() - it);  // strictly > x
        curve.exceed.push_back(k);
        curve.phat.push_back(static_cast<double>(k) / static_cast<double>(curve.total));
        const auto [lo, hi] = wilson_interval(k, curve.total, confidence);
        curve.ci_lo.push_back(lo);
        curve.ci_hi.push_back(hi);
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Scaling-exponent fits: ordinary least squares in transformed coordinates.
//   PolyTail       ln p        vs ln T   (p(T) ~ T^slope)
//   StretchTail    ln(-ln p)   vs ln T   (p(T) ~ exp(-c T^slope))
//   RegretScaling  ln E[R]     vs ln T   (E[R](T) ~ T^slope)
// ---------------------------------------------------------------------------

enum class FitMode { PolyTail, StretchTail, RegretScaling };

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    FitMode mode = FitMode::PolyTail;
    int points = 0;
    int discarded = 0;  // zero-exceedance grid points dropped before fitting
};

inline ExponentFit fit_exponent(std::span<const std::pair<double, double>> points, FitMode mode) {
    if (points.size() < 3)
        throw std::invalid_argument("fit_exponent: need at least 3 points");

    std::vector<double> xs, ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto [T, v] = points[i];
        if (!(T > 0.0))
            throw std::invalid_argument("fit_exponent: point " + std::to_string(i) +
                                        " has nonpositive T = " + std::to_string(T));
        double y;
        switch (mode) {
            case FitMode::PolyTail:
            case FitMode::StretchTail:
                if (!(v > 0.0 && v < 1.0))
                    throw std::invalid_argument("fit_exponent: point " + std::to_string(i) +
                                                " has tail value " + std::to_string(v) +
                                                " outside (0, 1)");
                y = mode == FitMode::PolyTail ? std::log(v) : std::log(-std::log(v));
                break;
            case FitMode::RegretScaling:
                if (!(v > 0.0))
                    throw std::invalid_argument("fit_exponent: point " + std::to_string(i) +
                                                " has nonpositive value " + std::to_string(v));
                y = std::log(v);
                break;
            default:
                throw std::logic_error("fit_exponent: unknown mode");
        }
        xs.push_back(std::log(T));
        ys.push_back(y);
    }

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_exponent: all T values identical");

    ExponentFit fit;
    fit.mode = mode;
    fit.points = static_cast<int>(xs.size());
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0.0) {
        fit.r_squared = 1.0;
    } else {
        double ssres = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ssres += e * e;
        }
        fit.r_squared = std::clamp(1.0 - ssres / syy, 0.0, 1.0);
    }
    return fit;
}

// Tail fit that drops p = 0 grid points (undefined in either transform) and
// reports how many were dropped. Deep-tail zeros at feasible replication
// counts are expected, not an error.
inline ExponentFit fit_tail_exponent(std::span<const std::pair<double, double>> points,
                                     FitMode mode) {
    if (mode == FitMode::RegretScaling) return fit_exponent(points, mode);
    std::vector<std::pair<double, double>> kept;
    kept.reserve(points.size());
    int dropped = 0;
    for (const auto& pt : points) {
        if (pt.second == 0.0)
            ++dropped;
        else
            kept.push_back(pt);
    }
    ExponentFit fit = fit_exponent(kept, mode);
    fit.discarded = dropped;
    return fit;
}

// ---------------------------------------------------------------------------
// Moment / quantile summary. Quantiles use order statistics with lower
// interpolation: q -> sorted[floor(q * (n-1))].
// ---------------------------------------------------------------------------

struct Summary {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double q50 = 0.0;
    double q90 = 0.0;
    double q99 = 0.0;
    double q999 = 0.0;
    std::int64_t count = 0;
};

inline Summary summarize(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("summarize: samples must be nonempty");
    Summary s;
    s.count = static_cast<std::int64_t>(samples.size());
    const double n = static_cast<double>(samples.size());
    for (double v : samples) s.mean += v;
    s.mean /= n;
    if (samples.size() > 1) {
        double acc = 0.0;
        for (double v : samples) acc += (v - s.mean) * (v - s.mean);
        s.variance = acc / (n - 1.0);
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::floor(q * (n - 1.0)));
        return sorted[std::min(idx, sorted.size() - 1)];
    };
    s.q50 = quantile(0.5);
    s.q90 = quantile(0.9);
    s.q99 = quantile(0.99);
    s.q999 = quantile(0.999);
    return s;
}

}  // namespace tailbandit
