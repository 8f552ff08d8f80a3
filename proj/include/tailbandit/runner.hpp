#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tailbandit/bounds.hpp"
#include "tailbandit/config.hpp"
#include "tailbandit/env.hpp"
#include "tailbandit/linear.hpp"
#include "tailbandit/sim.hpp"
#include "tailbandit/stats.hpp"

namespace tailbandit {

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Deterministic rendering. All CSV floats use 17 significant digits, enough
// to round-trip a double bit-exactly.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Output rows.
// ---------------------------------------------------------------------------

struct CurveRow {
    std::string policy;
    std::string scenario;
    std::int64_t T = 0;
    double x = 0.0;
    std::int64_t reps = 0;
    std::int64_t exceed = 0;
    double phat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::optional<double> bound;
};

struct SummaryRow {
    std::string policy;
    std::string scenario;
    std::int64_t T = 0;
    std::int64_t reps = 0;
    double mean = 0.0;
    double variance = 0.0;
    double q50 = 0.0, q90 = 0.0, q99 = 0.0, q999 = 0.0;
};

struct FitRow {
    std::string policy;
    std::string scenario;
    std::string mode;
    int series = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int points = 0;
    int discarded = 0;
};

inline std::string render_tail_csv(const std::vector<CurveRow>& rows) {
    std::string out = "policy,scenario,T,x,reps,exceed,phat,ci_lo,ci_hi,bound\n";
    for (const auto& r : rows) {
        out += r.policy + ',' + r.scenario + ',' + std::to_string(r.T) + ',' + format_double(r.x) +
               ',' + std::to_string(r.reps) + ',' + std::to_string(r.exceed) + ',' +
               format_double(r.phat) + ',' + format_double(r.ci_lo) + ',' + format_double(r.ci_hi) +
               ',' + (r.bound ? format_double(*r.bound) : std::string{}) + '\n';
    }
    return out;
}

inline std::string render_summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "policy,scenario,T,reps,mean,variance,q50,q90,q99,q999\n";
    for (const auto& r : rows) {
        out += r.policy + ',' + r.scenario + ',' + std::to_string(r.T) + ',' +
               std::to_string(r.reps) + ',' + format_double(r.mean) + ',' +
               format_double(r.variance) + ',' + format_double(r.q50) + ',' + format_double(r.q90) +
               ',' + format_double(r.q99) + ',' + format_double(r.q999) + '\n';
    }
    return out;
}

inline std::string render_fits_csv(const std::vector<FitRow>& rows) {
    std::string out = "policy,scenario,mode,series,slope,intercept,r_squared,points,discarded\n";
    for (const auto& r : rows) {
        out += r.policy + ',' + r.scenario + ',' + r.mode + ',' + std::to_string(r.series) + ',' +
               format_double(r.slope) + ',' + format_double(r.intercept) + ',' +
               format_double(r.r_squared) + ',' + std::to_string(r.points) + ',' +
               std::to_string(r.discarded) + '\n';
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Deterministic replicate fan-out: static chunking, slot-indexed results,
// so the reduction is identical for any thread count.
// ---------------------------------------------------------------------------

template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
    if (n <= 0) return;
    int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (nt < 1) nt = 1;
    nt = static_cast<int>(std::min<std::int64_t>(nt, n));
    if (nt == 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    const std::int64_t chunk = (n + nt - 1) / nt;
    for (int w = 0; w < nt; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Cell expansion: one cell per (instance expansion, policy, T). Sweep
// instances expand into one two-armed instance per c value, with gap
// c * x / T tied to the first threshold at that horizon.
// ---------------------------------------------------------------------------

struct Cell {
    std::size_t index;
    std::string policy;
    std::string scenario;
    std::int64_t T;
    std::size_t policy_index;
    std::variant<BanditInstance, LinearInstance> instance;
    std::optional<BaselineSchedule> baseline;
    std::vector<double> thresholds;
    bool from_sweep;
};

namespace detail {

inline std::vector<double> cell_thresholds(const ExperimentPlan& plan, std::int64_t T) {
    if (!plan.thresholds) return {};
    return plan.thresholds->at_horizon(T);
}

inline BonusSpec instantiate_bonus(const BonusConfig& cfg, std::int64_t T, int K,
                                   double noise_sigma) {
    if (cfg.variant == "StandardFixed")
        return BonusSpec::standard_fixed(cfg.eta, cfg.sigma.value_or(noise_sigma), T);
    if (cfg.variant == "TailOptimalFixed")
        return BonusSpec::tail_optimal_fixed(cfg.eta1, cfg.eta2, cfg.alpha, cfg.beta, T, K);
    if (cfg.variant == "TailOptimalAnytime")
        return BonusSpec::tail_optimal_anytime(cfg.eta1, cfg.eta2, cfg.alpha, cfg.beta, K);
    throw std::invalid_argument("bonus variant '" + cfg.variant + "' is not a K-armed design");
}

inline LinearBonusSpec instantiate_linear_bonus(const BonusConfig& cfg, std::int64_t T, int d) {
    if (cfg.variant == "LinearFixedTime")
        return LinearBonusSpec::fixed_time(cfg.eta1, cfg.eta2, cfg.alpha, cfg.beta, d, T);
    if (cfg.variant == "LinearAnytime")
        return LinearBonusSpec::anytime(cfg.eta1, cfg.eta2, cfg.alpha, cfg.beta, d);
    throw std::invalid_argument("bonus variant '" + cfg.variant + "' is not a linear design");
}

}  // namespace detail

inline std::vector<Cell> expand_cells(const ExperimentPlan& plan) {
    std::vector<Cell> cells;
    for (const auto& inst : plan.instances) {
        // (instance, T) expansions first so sweep gaps can use thresholds.
        for (std::size_t pi = 0; pi < plan.policies.size(); ++pi) {
            const PolicyConfig& pol = plan.policies[pi];
            for (std::int64_t T : plan.t_grid) {
                const std::vector<double> xs = detail::cell_thresholds(plan, T);
                if (std::holds_alternative<MabInstanceConfig>(inst)) {
                    const auto& mc = std::get<MabInstanceConfig>(inst);
                    if (pol.family == PolicyFamily::UCBL) continue;
                    cells.push_back(Cell{0, pol.name, mc.name, T, pi,
                                         BanditInstance(mc.means, mc.noise), mc.baseline, xs,
                                         false});
                } else if (std::holds_alternative<LinearInstanceConfig>(inst)) {
                    const auto& lc = std::get<LinearInstanceConfig>(inst);
                    if (pol.family != PolicyFamily::UCBL) continue;
                    cells.push_back(Cell{0, pol.name, lc.name, T, pi,
                                         LinearInstance(lc.theta, lc.actions, lc.noise, lc.rotate),
                                         std::nullopt, xs, false});
                } else {
                    const auto& sc = std::get<SweepInstanceConfig>(inst);
                    if (pol.family == PolicyFamily::UCBL) continue;
                    if (xs.empty())
                        throw std::invalid_argument(
                            "config: sweep instance '" + sc.name + "' needs thresholds");
                    for (double cval : sc.c_grid) {
                        const double gap =
                            std::min(sc.base_mean, cval * xs.front() / static_cast<double>(T));
                        cells.push_back(
                            Cell{0, pol.name, sc.name + "(c=" + format_double(cval) + ")", T, pi,
                                 BanditInstance({sc.base_mean, sc.base_mean - gap}, sc.noise),
                                 std::nullopt, xs, true});
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i].index = i;
    return cells;
}

// ---------------------------------------------------------------------------
// Bound matching: which closed form (if any) covers a (policy, instance)
// cell.
// ---------------------------------------------------------------------------

inline std::optional<double> matched_bound(const ExperimentPlan& plan, const Cell& cell,
                                           double x) {
    const PolicyConfig& pol = plan.policies[cell.policy_index];
    BoundParams p;
    if (std::holds_alternative<LinearInstance>(cell.instance)) {
        const auto& li = std::get<LinearInstance>(cell.instance);
        if (pol.bonus.variant == "LinearFixedTime") p.timing = Timing::FixedTime;
        else if (pol.bonus.variant == "LinearAnytime") p.timing = Timing::Anytime;
        else return std::nullopt;
        p.env = EnvKind::Linear;
        p.dim = li.dim;
        p.T = cell.T;
        if (p.T < p.dim) return std::nullopt;
        p.sigma = li.noise.sigma;
        p.uniform_gap = li.uniform_gap();
    } else {
        const auto& bi = std::get<BanditInstance>(cell.instance);
        if (cell.T < 3) return std::nullopt;
        const bool has_baseline =
            cell.baseline.has_value() && cell.baseline->kind != BaselineKind::Zero;
        if (pol.family == PolicyFamily::SE && pol.bonus.variant == "TailOptimalFixed" &&
            !has_baseline) {
            p.env = EnvKind::Plain;
            p.timing = Timing::FixedTime;
        } else if (pol.family == PolicyFamily::SEwRP && pol.bonus.variant == "TailOptimalFixed") {
            p.env = EnvKind::Baseline;
            p.timing = Timing::FixedTime;
            p.baseline_bound = cell.baseline ? cell.baseline->bound : 0.0;
        } else if (pol.family == PolicyFamily::UCB && pol.bonus.variant == "TailOptimalAnytime" &&
                   !has_baseline) {
            p.env = EnvKind::Plain;
            p.timing = Timing::Anytime;
        } else {
            return std::nullopt;  // no closed form for this design
        }
        p.K = bi.arms();
        p.T = cell.T;
        p.sigma = bi.noise.sigma;
        p.gaps = bi.gaps();
    }
    p.alpha = pol.bonus.alpha;
    p.beta = pol.bonus.beta;
    p.eta1 = pol.bonus.eta1;
    p.eta2 = pol.bonus.eta2;

    auto eval = [&](Scenario sc) -> std::optional<double> {
        p.scenario = sc;
        if (sc == Scenario::InstanceDependent) {
            if (p.env == EnvKind::Linear) {
                if (!(p.uniform_gap > 0.0)) return std::nullopt;
            } else {
                bool any = false;
                for (double g : p.gaps) any = any || g > 0.0;
                if (!any) return std::nullopt;
            }
        }
        return p.env == EnvKind::Linear ? linear_tail_bound(p, x) : mab_tail_bound(p, x);
    };

    switch (plan.bound_scenario) {
        case BoundScenario::WorstCase:
            return eval(Scenario::WorstCase);
        case BoundScenario::InstanceDependent:
            return eval(Scenario::InstanceDependent);
        case BoundScenario::Min: {
            const auto wc = eval(Scenario::WorstCase);
            const auto id = eval(Scenario::InstanceDependent);
            if (wc && id) return std::min(*wc, *id);
            return wc ? wc : id;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Plan execution.
// ---------------------------------------------------------------------------

struct RunOptions {
    std::string out_dir;            // empty = use the plan's
    int threads = 0;                // 0 = auto
    std::optional<std::uint64_t> seed_override;
    bool write_episodes = true;
    bool simulate = true;           // false = bound curves only
};

struct RunArtifact {
    std::vector<CurveRow> tail;
    std::vector<SummaryRow> summaries;
    std::vector<FitRow> fits;
    nlohmann::ordered_json manifest;
    std::filesystem::path out_dir;
};

namespace detail {

inline EpisodeResult run_cell_episode(const Cell& cell, const PolicyConfig& pol,
                                      std::span<const double> baseline_values,
                                      std::uint64_t seed) {
    if (std::holds_alternative<LinearInstance>(cell.instance)) {
        const auto& li = std::get<LinearInstance>(cell.instance);
        return run_linear_episode(li, instantiate_linear_bonus(pol.bonus, cell.T, li.dim),
                                  cell.T, seed);
    }
    const auto& bi = std::get<BanditInstance>(cell.instance);
    PolicySpec spec;
    spec.kind = pol.family == PolicyFamily::SE    ? PolicyKind::SE
                : pol.family == PolicyFamily::UCB ? PolicyKind::UCB
                                                  : PolicyKind::SEwRP;
    spec.bonus = instantiate_bonus(pol.bonus, cell.T, bi.arms(), bi.noise.sigma);
    Stream stream(seed);
    auto noise_at = [&](std::int64_t) { return sample_noise(bi.noise, stream); };
    EpisodeResult out = run_episode_with(bi, spec, cell.T, baseline_values, noise_at, stream);
    out.seed = seed;
    return out;
}

inline std::string episode_jsonl_line(const Cell& cell, std::int64_t replicate,
                                      const EpisodeResult& ep) {
    std::string line = "{\"cell\":" + std::to_string(cell.index) + ",\"policy\":\"" + cell.policy +
                       "\",\"scenario\":\"" + cell.scenario + "\",\"T\":" + std::to_string(cell.T) +
                       ",\"replicate\":" + std::to_string(replicate) +
                       ",\"seed\":" + std::to_string(ep.seed) +
                       ",\"pseudo_regret\":" + format_double(ep.pseudo_regret) +
                       ",\"empirical_regret\":" + format_double(ep.empirical_regret) +
                       ",\"pull_counts\":[";
    for (std::size_t i = 0; i < ep.pull_counts.size(); ++i) {
        if (i > 0) line += ',';
        line += std::to_string(ep.pull_counts[i]);
    }
    line += "]}\n";
    return line;
}

}  // namespace detail

inline RunArtifact run_plan(const ExperimentPlan& plan_in, const RunOptions& opts) {
    ExperimentPlan plan = plan_in;
    if (opts.seed_override) plan.seed = *opts.seed_override;

    const std::filesystem::path out_dir = opts.out_dir.empty() ? plan.out_dir : opts.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + out_dir.string());

    const std::vector<Cell> cells = expand_cells(plan);

    RunArtifact art;
    art.out_dir = out_dir;
    std::string episodes_jsonl;
    bool any_sweep = false;

    // (policy, scenario) -> T -> data needed by the fit requests.
    struct SeriesPoint {
        std::int64_t T;
        double mean;
        std::vector<double> phat;  // per threshold rank
    };
    std::map<std::pair<std::string, std::string>, std::vector<SeriesPoint>> series;

    for (const Cell& cell : cells) {
        any_sweep = any_sweep || cell.from_sweep;
        const PolicyConfig& pol = plan.policies[cell.policy_index];

        std::vector<double> regrets;
        if (opts.simulate && plan.replications > 0) {
            std::vector<double> baseline_values;
            if (cell.baseline) baseline_values = cell.baseline->values(cell.T);
            std::vector<EpisodeResult> episodes(static_cast<std::size_t>(plan.replications));
            parallel_for(plan.replications, opts.threads, [&](std::int64_t rep) {
                const std::uint64_t seed =
                    derive_seed(plan.seed, cell.index, static_cast<std::uint64_t>(rep));
                episodes[static_cast<std::size_t>(rep)] =
                    detail::run_cell_episode(cell, pol, baseline_values, seed);
            });
            regrets.reserve(episodes.size());
            for (const auto& ep : episodes) regrets.push_back(ep.pseudo_regret);
            if (opts.write_episodes)
                for (std::int64_t rep = 0; rep < plan.replications; ++rep)
                    episodes_jsonl += detail::episode_jsonl_line(
                        cell, rep, episodes[static_cast<std::size_t>(rep)]);

            SummaryRow srow;
            srow.policy = cell.policy;
            srow.scenario = cell.scenario;
            srow.T = cell.T;
            srow.reps = plan.replications;
            const Summary s = summarize(regrets);
            srow.mean = s.mean;
            srow.variance = s.variance;
            srow.q50 = s.q50;
            srow.q90 = s.q90;
            srow.q99 = s.q99;
            srow.q999 = s.q999;
            art.summaries.push_back(srow);
        }

        if (!cell.thresholds.empty()) {
            std::optional<TailCurve> curve;
            if (!regrets.empty())
                curve = estimate_tail(regrets, cell.thresholds, plan.confidence);
            std::vector<double> phats;
            for (std::size_t i = 0; i < cell.thresholds.size(); ++i) {
                CurveRow row;
                row.policy = cell.policy;
                row.scenario = cell.scenario;
                row.T = cell.T;
                row.x = cell.thresholds[i];
                if (curve) {
                    row.reps = curve->total;
                    row.exceed = curve->exceed[i];
                    row.phat = curve->phat[i];
                    row.ci_lo = curve->ci_lo[i];
                    row.ci_hi = curve->ci_hi[i];
                }
                if (row.x > 0.0) row.bound = matched_bound(plan, cell, row.x);
                phats.push_back(row.phat);
                art.tail.push_back(std::move(row));
            }
            if (!regrets.empty()) {
                auto& pts = series[{cell.policy, cell.scenario}];
                pts.push_back({cell.T, art.summaries.back().mean, phats});
            }
        } else if (!regrets.empty()) {
            auto& pts = series[{cell.policy, cell.scenario}];
            pts.push_back({cell.T, art.summaries.back().mean, {}});
        }
    }

    // Requested exponent fits, per (policy, scenario) series over the T grid.
    for (const FitRequest& req : plan.fits) {
        for (const auto& [key, pts] : series) {
            std::vector<std::pair<double, double>> data;
            for (const auto& pt : pts) {
                if (req.mode == FitMode::RegretScaling) {
                    data.emplace_back(static_cast<double>(pt.T), pt.mean);
                } else if (static_cast<std::size_t>(req.series) < pt.phat.size()) {
                    data.emplace_back(static_cast<double>(pt.T),
                                      pt.phat[static_cast<std::size_t>(req.series)]);
                }
            }
            if (data.size() < 3) continue;  // not enough horizons for this series
            ExponentFit fit;
            try {
                fit = req.mode == FitMode::RegretScaling ? fit_exponent(data, req.mode)
                                                         : fit_tail_exponent(data, req.mode);
            } catch (const std::invalid_argument&) {
                continue;  // series left the fit's domain (e.g. all-zero tails)
            }
            FitRow row;
            row.policy = key.first;
            row.scenario = key.second;
            row.mode = req.mode == FitMode::PolyTail      ? "poly"
                       : req.mode == FitMode::StretchTail ? "stretch"
                                                          : "scaling";
            row.series = req.series;
            row.slope = fit.slope;
            row.intercept = fit.intercept;
            row.r_squared = fit.r_squared;
            row.points = fit.points;
            row.discarded = fit.discarded;
            art.fits.push_back(std::move(row));
        }
    }

    // Deterministic row order: (policy, scenario, T, x).
    std::sort(art.tail.begin(), art.tail.end(), [](const CurveRow& a, const CurveRow& b) {
        return std::tie(a.policy, a.scenario, a.T, a.x) < std::tie(b.policy, b.scenario, b.T, b.x);
    });
    std::sort(art.summaries.begin(), art.summaries.end(),
              [](const SummaryRow& a, const SummaryRow& b) {
                  return std::tie(a.policy, a.scenario, a.T) < std::tie(b.policy, b.scenario, b.T);
              });
    std::sort(art.fits.begin(), art.fits.end(), [](const FitRow& a, const FitRow& b) {
        return std::tie(a.policy, a.scenario, a.mode, a.series) <
               std::tie(b.policy, b.scenario, b.mode, b.series);
    });

    // Manifest: everything needed to reproduce every output number. No
    // timestamps and no thread count, so reruns are byte-identical.
    nlohmann::ordered_json manifest;
    manifest["name"] = plan.name;
    manifest["tool"] = {{"name", "tailbandit"}, {"version", kToolVersion}};
    manifest["seed"] = plan.seed;
    manifest["replications"] = plan.replications;
    manifest["confidence"] = plan.confidence;
    char hashbuf[32];
    std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(plan.config_text)));
    manifest["config_fnv1a64"] = hashbuf;
    manifest["plan"] = nlohmann::ordered_json::parse(plan.config_text);
    if (opts.seed_override) manifest["seed_overridden"] = true;
    nlohmann::ordered_json cell_list = nlohmann::ordered_json::array();
    for (const Cell& c : cells)
        cell_list.push_back({{"index", c.index},
                             {"policy", c.policy},
                             {"scenario", c.scenario},
                             {"T", c.T},
                             {"thresholds", c.thresholds}});
    manifest["cells"] = cell_list;
    if (any_sweep)
        manifest["approximations"] = nlohmann::ordered_json::array(
            {"worst-case sweep: sup over instances approximated by a finite gap grid "
             "gap = c * x / T"});

    std::vector<std::string> outputs;
    write_file(out_dir / "tail.csv", render_tail_csv(art.tail));
    outputs.push_back("tail.csv");
    write_file(out_dir / "summary.csv", render_summary_csv(art.summaries));
    outputs.push_back("summary.csv");
    if (!plan.fits.empty()) {
        write_file(out_dir / "fits.csv", render_fits_csv(art.fits));
        outputs.push_back("fits.csv");
    }
    if (opts.simulate && opts.write_episodes) {
        write_file(out_dir / "episodes.jsonl", episodes_jsonl);
        outputs.push_back("episodes.jsonl");
    }
    manifest["outputs"] = outputs;
    art.manifest = manifest;
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return art;
}

}  // namespace tailbandit
