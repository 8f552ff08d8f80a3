#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tailbandit/env.hpp"
#include "tailbandit/stats.hpp"

namespace tailbandit {

// ---------------------------------------------------------------------------
// Declarative experiment plans. The config document is JSON with named
// sections: environments (instances), policies, grids, thresholds, outputs.
// Bonus parameters are stored as a family here; concrete BonusSpec values
// are instantiated per grid cell, where T, K and the noise scale are known.
// ---------------------------------------------------------------------------

enum class PolicyFamily { SE, UCB, SEwRP, UCBL };

struct BonusConfig {
    std::string variant;  // StandardFixed | TailOptimalFixed | TailOptimalAnytime |
                          // LinearFixedTime | LinearAnytime
    double eta = 1.0;
    std::optional<double> sigma;  // StandardFixed; defaults to the instance noise scale
    double eta1 = 1.0;
    double eta2 = 1.0;
    double alpha = 0.5;
    double beta = 0.5;
};

struct PolicyConfig {
    std::string name;
    PolicyFamily family = PolicyFamily::UCB;
    BonusConfig bonus;
};

struct MabInstanceConfig {
    std::string name;
    std::vector<double> means;
    NoiseModel noise;
    std::optional<BaselineSchedule> baseline;
};

struct LinearInstanceConfig {
    std::string name;
    std::vector<double> theta;
    std::vector<std::vector<double>> actions;
    NoiseModel noise;
    bool rotate = false;
};

// Worst-case sweep rule: for each horizon T and grid value c, a two-armed
// instance with gap c * x / T, x being the first threshold at T. This sweeps
// the hard-instance family whose gap shrinks with the threshold-to-horizon
// ratio; it approximates the sup over instances and is labeled as such in
// the manifest.
struct SweepInstanceConfig {
    std::string name;
    std::vector<double> c_grid;
    double base_mean = 0.5;
    NoiseModel noise;
};

using InstanceConfig =
    std::variant<MabInstanceConfig, LinearInstanceConfig, SweepInstanceConfig>;

struct ThresholdRule {
    enum class Kind { Values, Fractions, Deltas };
    Kind kind = Kind::Values;
    std::vector<double> values;

    std::vector<double> at_horizon(std::int64_t T) const {
        std::vector<double> xs;
        xs.reserve(values.size());
        for (double v : values) {
            switch (kind) {
                case Kind::Values: xs.push_back(v); break;
                case Kind::Fractions: xs.push_back(v * static_cast<double>(T)); break;
                case Kind::Deltas: xs.push_back(std::pow(static_cast<double>(T), v)); break;
            }
        }
        std::sort(xs.begin(), xs.end());
        return xs;
    }
};

struct FitRequest {
    FitMode mode = FitMode::RegretScaling;
    int series = 0;  // threshold rank within each (policy, scenario, T) block
};

enum class BoundScenario { WorstCase, InstanceDependent, Min };

struct ExperimentPlan {
    std::string name;
    std::uint64_t seed = 0;
    std::int64_t replications = 10000;
    double confidence = 0.95;
    std::vector<std::int64_t> t_grid;
    std::vector<PolicyConfig> policies;
    std::vector<InstanceConfig> instances;
    std::optional<ThresholdRule> thresholds;
    std::vector<FitRequest> fits;
    BoundScenario bound_scenario = BoundScenario::Min;
    std::string out_dir = "out";
    std::string config_text;  // raw document, hashed into the manifest
};

namespace detail {

using json = nlohmann::json;

inline const json& require_field(const json& j, const char* field, const std::string& where) {
    auto it = j.find(field);
    if (it == j.end())
        throw std::invalid_argument(std::string("config: missing field '") + field + "' in " + where);
    return *it;
}

inline NoiseModel parse_noise(const json& j) {
    NoiseKind kind = NoiseKind::Gaussian;
    double sigma = 1.0;
    if (j.contains("kind")) {
        const std::string k = j.at("kind").get<std::string>();
        if (k == "Gaussian") kind = NoiseKind::Gaussian;
        else if (k == "Rademacher") kind = NoiseKind::Rademacher;
        else if (k == "UniformSymmetric") kind = NoiseKind::UniformSymmetric;
        else throw std::invalid_argument("config: unknown noise kind '" + k + "'");
    }
    if (j.contains("sigma")) sigma = j.at("sigma").get<double>();
    return NoiseModel(kind, sigma);
}

inline BaselineSchedule parse_baseline(const json& j) {
    const std::string kind = require_field(j, "kind", "baseline").get<std::string>();
    const double bound = j.value("bound", 0.0);
    if (kind == "Zero") return BaselineSchedule::zero();
    if (kind == "Constant")
        return BaselineSchedule::make_constant(require_field(j, "value", "baseline").get<double>(), bound);
    if (kind == "Sinusoid")
        return BaselineSchedule::make_sinusoid(require_field(j, "amplitude", "baseline").get<double>(),
                                               require_field(j, "period", "baseline").get<double>(), bound);
    if (kind == "SeededRandomWalk")
        return BaselineSchedule::make_random_walk(bound, j.value("seed", std::uint64_t{0}));
    if (kind == "Piecewise") {
        std::vector<std::pair<std::int64_t, double>> pieces;
        for (const auto& p : require_field(j, "pieces", "baseline"))
            pieces.emplace_back(p.at(0).get<std::int64_t>(), p.at(1).get<double>());
        return BaselineSchedule::make_piecewise(std::move(pieces), bound);
    }
    throw std::invalid_argument("config: unknown baseline kind '" + kind + "'");
}

inline PolicyConfig parse_policy(const json& j) {
    PolicyConfig p;
    p.name = require_field(j, "name", "policy").get<std::string>();
    const std::string kind = require_field(j, "kind", "policy '" + p.name).get<std::string>();
    if (kind == "SE") p.family = PolicyFamily::SE;
    else if (kind == "UCB") p.family = PolicyFamily::UCB;
    else if (kind == "SEwRP") p.family = PolicyFamily::SEwRP;
    else if (kind == "UCB-L" || kind == "UCBL") p.family = PolicyFamily::UCBL;
    else throw std::invalid_argument("config: unknown policy kind '" + kind + "'");

    const json& b = require_field(j, "bonus", ("policy '" + p.name + "'"));
    p.bonus.variant = require_field(b, "variant", "bonus").get<std::string>();
    static const char* known[] = {"StandardFixed", "TailOptimalFixed", "TailOptimalAnytime",
                                  "LinearFixedTime", "LinearAnytime"};
    bool ok = false;
    for (const char* v : known) ok = ok || p.bonus.variant == v;
    if (!ok) throw std::invalid_argument("config: unknown bonus variant '" + p.bonus.variant + "'");
    p.bonus.eta = b.value("eta", 1.0);
    if (b.contains("sigma")) p.bonus.sigma = b.at("sigma").get<double>();
    p.bonus.eta1 = b.value("eta1", 1.0);
    p.bonus.eta2 = b.value("eta2", 1.0);
    p.bonus.alpha = b.value("alpha", 0.5);
    p.bonus.beta = b.value("beta", 0.5);
    if (p.bonus.beta > p.bonus.alpha)
        throw std::invalid_argument("config: policy '" + p.name +
                                    "': bonus parameters must satisfy 0 <= beta <= alpha <= 1");
    if (p.bonus.alpha > 1.0 || p.bonus.beta < 0.0)
        throw std::invalid_argument("config: policy '" + p.name +
                                    "': bonus parameters must satisfy 0 <= beta <= alpha <= 1");
    const bool linear_variant =
        p.bonus.variant == "LinearFixedTime" || p.bonus.variant == "LinearAnytime";
    if ((p.family == PolicyFamily::UCBL) != linear_variant)
        throw std::invalid_argument("config: policy '" + p.name +
                                    "': bonus variant does not match policy kind");
    return p;
}

inline std::vector<std::vector<double>> parse_actions(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s.rfind("basis(", 0) == 0 && s.back() == ')') {
            const int d = std::stoi(s.substr(6, s.size() - 7));
            if (d < 1) throw std::invalid_argument("config: basis(d) needs d >= 1");
            return LinearInstance::basis_actions(d);
        }
        throw std::invalid_argument("config: unknown action preset '" + s + "'");
    }
    std::vector<std::vector<double>> acts;
    for (const auto& a : j) acts.push_back(a.get<std::vector<double>>());
    return acts;
}

inline InstanceConfig parse_instance(const json& j) {
    const std::string name = require_field(j, "name", "instance").get<std::string>();
    const NoiseModel noise = j.contains("noise") ? parse_noise(j.at("noise")) : NoiseModel{};

    if (j.contains("c_grid") || j.value("kind", "") == "sweep") {
        SweepInstanceConfig s;
        s.name = name;
        s.c_grid = require_field(j, "c_grid", ("instance '" + name + "'"))
                       .get<std::vector<double>>();
        s.base_mean = j.value("base_mean", 0.5);
        s.noise = noise;
        if (!(s.base_mean > 0.0 && s.base_mean <= 1.0))
            throw std::invalid_argument("config: instance '" + name + "': base_mean must lie in (0, 1]");
        return s;
    }
    if (j.contains("theta")) {
        LinearInstanceConfig s;
        s.name = name;
        s.theta = j.at("theta").get<std::vector<double>>();
        s.actions = parse_actions(require_field(j, "actions", ("instance '" + name + "'")));
        s.noise = noise;
        s.rotate = j.value("rotate", false);
        return s;
    }
    MabInstanceConfig s;
    s.name = name;
    s.means = require_field(j, "means", ("instance '" + name + "'"))
                  .get<std::vector<double>>();
    s.noise = noise;
    if (j.contains("baseline")) s.baseline = parse_baseline(j.at("baseline"));
    return s;
}

}  // namespace detail

inline ExperimentPlan parse_config(const std::string& text) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }

    ExperimentPlan plan;
    plan.config_text = text;
    plan.name = detail::require_field(j, "name", "plan").get<std::string>();
    plan.seed = detail::require_field(j, "seed", "plan").get<std::uint64_t>();
    plan.replications = j.value("replications", std::int64_t{10000});
    if (plan.replications < 0)
        throw std::invalid_argument("config: field 'replications' must be nonnegative");
    plan.confidence = j.value("confidence", 0.95);
    if (!(plan.confidence > 0.0 && plan.confidence < 1.0))
        throw std::invalid_argument("config: field 'confidence' must lie in (0, 1)");

    plan.t_grid = detail::require_field(j, "T_grid", "plan").get<std::vector<std::int64_t>>();
    if (plan.t_grid.empty()) throw std::invalid_argument("config: field 'T_grid' must be nonempty");
    for (auto T : plan.t_grid)
        if (T < 1) throw std::invalid_argument("config: field 'T_grid' entries must be positive");

    const json& pol = detail::require_field(j, "policies", "plan");
    for (const auto& pj : pol) plan.policies.push_back(detail::parse_policy(pj));
    if (plan.policies.empty()) throw std::invalid_argument("config: field 'policies' must be nonempty");

    const json& inst = detail::require_field(j, "instances", "plan");
    for (const auto& ij : inst) plan.instances.push_back(detail::parse_instance(ij));
    if (plan.instances.empty()) throw std::invalid_argument("config: field 'instances' must be nonempty");

    if (j.contains("thresholds")) {
        const json& t = j.at("thresholds");
        ThresholdRule rule;
        if (t.contains("values")) {
            rule.kind = ThresholdRule::Kind::Values;
            rule.values = t.at("values").get<std::vector<double>>();
        } else if (t.contains("fractions")) {
            rule.kind = ThresholdRule::Kind::Fractions;
            rule.values = t.at("fractions").get<std::vector<double>>();
        } else if (t.contains("deltas")) {
            rule.kind = ThresholdRule::Kind::Deltas;
            rule.values = t.at("deltas").get<std::vector<double>>();
        } else {
            throw std::invalid_argument(
                "config: field 'thresholds' needs one of 'values', 'fractions', 'deltas'");
        }
        if (rule.values.empty())
            throw std::invalid_argument("config: field 'thresholds' must be nonempty");
        plan.thresholds = rule;
    }

    if (j.contains("fits")) {
        for (const auto& fj : j.at("fits")) {
            FitRequest r;
            const std::string mode = detail::require_field(fj, "mode", "fit").get<std::string>();
            if (mode == "poly") r.mode = FitMode::PolyTail;
            else if (mode == "stretch") r.mode = FitMode::StretchTail;
            else if (mode == "scaling") r.mode = FitMode::RegretScaling;
            else throw std::invalid_argument("config: unknown fit mode '" + mode + "'");
            r.series = fj.value("series", 0);
            if (r.series < 0) throw std::invalid_argument("config: fit 'series' must be nonnegative");
            plan.fits.push_back(r);
        }
    }

    const std::string bs = j.value("bound_scenario", "min");
    if (bs == "worst_case") plan.bound_scenario = BoundScenario::WorstCase;
    else if (bs == "instance_dependent") plan.bound_scenario = BoundScenario::InstanceDependent;
    else if (bs == "min") plan.bound_scenario = BoundScenario::Min;
    else throw std::invalid_argument("config: unknown bound_scenario '" + bs + "'");

    if (j.contains("outputs")) plan.out_dir = j.at("outputs").value("dir", "out");
    return plan;
}

}  // namespace tailbandit
