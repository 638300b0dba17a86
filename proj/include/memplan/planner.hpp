#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "memplan/errors.hpp"
#include "memplan/frontier.hpp"
#include "memplan/measurements.hpp"
#include "memplan/memory_model.hpp"

namespace memplan {

/// Axes of a configuration sweep.
struct ConfigSpace {
    std::vector<std::string> models;
    std::vector<WeightQuantSpec> weights;
    std::vector<KvCacheStrategy> kv;
    std::vector<token_count> tokens;
    std::vector<std::uint32_t> groups;
    std::uint32_t batch = 1;
};

/// Full cross product, nested in axis order model > precision > strategy > T > G,
/// each axis iterated in the order given.
inline std::vector<InferenceConfig> enumerate_configs(const ConfigSpace& space) {
    if (space.models.empty()) throw DomainError("config space: empty models axis");
    if (space.weights.empty()) throw DomainError("config space: empty weight precision axis");
    if (space.kv.empty()) throw DomainError("config space: empty kv strategy axis");
    if (space.tokens.empty()) throw DomainError("config space: empty token budget axis");
    if (space.groups.empty()) throw DomainError("config space: empty group size axis");
    if (space.batch == 0) throw DomainError("config space: batch must be >= 1");

    std::vector<InferenceConfig> out;
    out.reserve(space.models.size() * space.weights.size() * space.kv.size() * space.tokens.size() *
                space.groups.size());
    for (const auto& m : space.models)
        for (const auto& w : space.weights)
            for (const auto& kv : space.kv)
                for (auto t : space.tokens)
                    for (auto g : space.groups) {
                        InferenceConfig c{m, w, kv, t, g, space.batch};
                        validate(c);
                        out.push_back(std::move(c));
                    }
    return out;
}

/// The space a dataset measures: distinct values per axis in canonical order.
inline ConfigSpace space_from_dataset(const Dataset& ds, std::uint32_t batch = 1) {
    std::set<std::string> models;
    std::set<std::uint32_t> bits;
    std::map<std::string, KvCacheStrategy> kv;
    std::set<token_count> tokens;
    std::set<std::uint32_t> groups;
    for (const auto& r : ds.records()) {
        models.insert(r.model);
        bits.insert(r.weight_bits);
        kv.emplace(descriptor(r.kv), r.kv);
        tokens.insert(r.tokens);
        groups.insert(r.group);
    }
    ConfigSpace s;
    s.models.assign(models.begin(), models.end());
    for (auto b : bits) s.weights.push_back(weight_quant(b));
    for (const auto& [_, v] : kv) s.kv.push_back(v);
    s.tokens.assign(tokens.begin(), tokens.end());
    s.groups.assign(groups.begin(), groups.end());
    s.batch = batch;
    return s;
}

// ---------------------------------------------------------------------------
// Accuracy lookup over measured families

/// Measured budget curves keyed by (model, precision, strategy, G).
class FamilyIndex {
public:
    struct Point {
        token_count tokens;
        double accuracy;
        std::optional<double> latency_seconds;
    };

    struct Lookup {
        double accuracy = 0.0;
        std::optional<double> latency_seconds;
        bool interpolated = false;
    };

    explicit FamilyIndex(const Dataset& ds) {
        for (const auto& r : ds.records())
            families_[family_key(r.model, r.weight_bits, r.kv, r.group)].push_back(
                {r.tokens, r.accuracy, r.latency_seconds});
        for (auto& [_, pts] : families_)
            std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.tokens < b.tokens; });
    }

    /// Exact measurement or within-grid interpolation; nullopt outside the measured range.
    std::optional<Lookup> lookup(const InferenceConfig& c) const {
        auto it = families_.find(family_key(c.model, c.weight_quant.precision_bits, c.kv, c.group));
        if (it == families_.end()) return std::nullopt;
        const auto& pts = it->second;

        std::vector<CurvePoint> curve;
        curve.reserve(pts.size());
        for (const auto& p : pts) curve.push_back({p.tokens, p.accuracy});
        const auto acc = interpolate_accuracy(curve, c.tokens);
        if (acc.clamped) return std::nullopt;

        auto hi = std::lower_bound(pts.begin(), pts.end(), c.tokens,
                                   [](const Point& p, token_count t) { return p.tokens < t; });
        Lookup out;
        out.accuracy = acc.accuracy;
        if (hi->tokens == c.tokens) {
            out.latency_seconds = hi->latency_seconds;
            return out;
        }
        out.interpolated = true;
        const auto lo = hi - 1;
        if (lo->latency_seconds && hi->latency_seconds) {
            const double t = static_cast<double>(c.tokens - lo->tokens) / static_cast<double>(hi->tokens - lo->tokens);
            out.latency_seconds = *lo->latency_seconds + t * (*hi->latency_seconds - *lo->latency_seconds);
        }
        return out;
    }

private:
    static std::string family_key(const std::string& model, std::uint32_t bits, const KvCacheStrategy& kv,
                                  std::uint32_t group) {
        return model + "|w" + std::to_string(bits) + "|" + descriptor(kv) + "|G" + std::to_string(group);
    }

    std::map<std::string, std::vector<Point>> families_;
};

// ---------------------------------------------------------------------------
// Rule annotations

enum class TaskType { unknown, math, knowledge };

inline std::string_view task_name(TaskType t) {
    switch (t) {
        case TaskType::math: return "math";
        case TaskType::knowledge: return "knowledge";
        case TaskType::unknown: return "unknown";
    }
    return "unknown";
}

inline TaskType parse_task(std::string_view s) {
    if (s == "math") return TaskType::math;
    if (s == "knowledge") return TaskType::knowledge;
    if (s == "unknown" || s.empty()) return TaskType::unknown;
    throw InvalidRequest("unknown task type '" + std::string(s) + "'");
}

/// Effective-size thresholds resolved from the spec file's reference configs.
struct ScaleThresholds {
    byte_count small_scale = 0;  ///< below: weights beat tokens, serial beats parallel
    byte_count kv_strategy = 0;  ///< below: eviction beats KV quantization
    token_count long_budget_tokens = 18000;
    std::string small_label;
    std::string kv_label;
};

inline std::optional<ScaleThresholds> resolve_thresholds(const ModelCatalog& catalog) {
    const auto& t = catalog.thresholds();
    if (!t) return std::nullopt;
    const auto* small = catalog.find(t->small_scale.model);
    const auto* kv = catalog.find(t->kv_strategy.model);
    if (!small || !kv) return std::nullopt;
    ScaleThresholds out;
    out.small_scale = effective_size_bytes(*small, weight_quant(t->small_scale.weight_bits));
    out.kv_strategy = effective_size_bytes(*kv, weight_quant(t->kv_strategy.weight_bits));
    out.long_budget_tokens = t->long_budget_tokens;
    out.small_label = std::to_string(t->small_scale.weight_bits) + "-bit " + t->small_scale.model;
    out.kv_label = std::to_string(t->kv_strategy.weight_bits) + "-bit " + t->kv_strategy.model;
    return out;
}

struct RuleAnnotation {
    int rule_id = 0;
    bool triggered = false;
    std::string explanation;

    bool operator==(const RuleAnnotation&) const = default;
};

struct RuleContext {
    ScaleThresholds thresholds;
    TaskType task = TaskType::unknown;
};

/// Evaluates the five scale-dependent findings against one configuration.
/// A configuration exactly at a threshold counts as at-or-above it.
inline std::vector<RuleAnnotation> annotate_rules(const InferenceConfig& config, const ModelSpec& spec,
                                                  const RuleContext& ctx) {
    const auto eff = effective_size_bytes(spec, config.weight_quant);
    const auto& th = ctx.thresholds;
    const bool small = eff < th.small_scale;
    const bool below_kv = eff < th.kv_strategy;
    const std::string eff_s = format_gib(eff) + " GiB";
    const std::string small_s = format_gib(th.small_scale) + " GiB (" + th.small_label + ")";
    const std::string kv_s = format_gib(th.kv_strategy) + " GiB (" + th.kv_label + ")";

    std::vector<RuleAnnotation> out;

    // 1: weights vs. KV allocation
    if (small) {
        const bool long_budget = config.tokens >= th.long_budget_tokens;
        out.push_back({1, long_budget,
                       "effective size " + eff_s + " is below " + small_s +
                           (long_budget ? "; with a " + std::to_string(config.tokens) +
                                              "-token budget, memory is better spent on a larger effective size"
                                        : "; favour a larger effective size over a longer token budget")});
    } else {
        const bool short_budget = config.tokens < th.long_budget_tokens;
        out.push_back({1, short_budget,
                       "effective size " + eff_s + " is at or above " + small_s +
                           (short_budget ? "; memory is better spent increasing the token budget until accuracy saturates"
                                         : "; a long token budget is the memory-efficient choice at this scale")});
    }

    // 2: weight precision by task type
    switch (ctx.task) {
        case TaskType::knowledge:
            out.push_back({2, config.weight_quant.precision_bits != 4,
                           config.weight_quant.precision_bits == 4
                               ? "4-bit weights are broadly memory-optimal for knowledge-intensive tasks"
                               : "knowledge-intensive task: 4-bit weights are broadly memory-optimal; consider 4-bit"});
            break;
        case TaskType::math:
            out.push_back({2, config.weight_quant.precision_bits == 4,
                           config.weight_quant.precision_bits == 4
                               ? "mathematical reasoning: 4-bit weights are memory-inefficient; prefer 8- or 16-bit"
                               : "mathematical reasoning favours 8- or 16-bit weights"});
            break;
        case TaskType::unknown:
            out.push_back({2, false, "task type unknown; precision guidance needs math or knowledge"});
            break;
    }

    // 3: parallel scaling
    if (config.group > 1) {
        out.push_back({3, true,
                       small ? "G=" + std::to_string(config.group) + " below " + small_s +
                                   ": serial scaling alone gives a better memory-accuracy trade-off than parallel scaling"
                             : "G=" + std::to_string(config.group) + " at or above " + small_s +
                                   ": parallel scaling is appropriate; the memory-optimal G grows with the budget"});
    } else {
        out.push_back({3, false,
                       small ? "serial scaling (G=1) is preferred below " + small_s
                             : "parallel scaling (G>1) can improve the trade-off at or above " + small_s});
    }

    // 4: KV compression
    if (std::holds_alternative<FullKv>(config.kv)) {
        out.push_back({4, true,
                       "weight quantization alone is not memory-optimal; compressing the KV cache advances the frontier"});
    } else {
        out.push_back({4, false, "KV cache is compressed (" + descriptor(config.kv) + ")"});
    }

    // 5: eviction vs. quantization
    if (below_kv) {
        const bool quant = std::holds_alternative<QuantKv>(config.kv);
        out.push_back({5, quant,
                       "effective size " + eff_s + " is below " + kv_s +
                           (quant ? "; KV eviction gives a better trade-off than KV quantization here"
                                  : "; prefer KV eviction over KV quantization")});
    } else {
        out.push_back({5, false,
                       "effective size " + eff_s + " is at or above " + kv_s +
                           "; KV quantization is competitive with eviction"});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Planning

enum class Objective { memory, latency };

inline std::string_view objective_name(Objective o) { return o == Objective::memory ? "memory" : "latency"; }

inline Objective parse_objective(std::string_view s) {
    if (s == "memory") return Objective::memory;
    if (s == "latency") return Objective::latency;
    throw InvalidRequest("unknown objective '" + std::string(s) + "'");
}

struct PlanRequest {
    double budget = std::numeric_limits<double>::infinity();  ///< bytes or seconds
    Objective objective = Objective::memory;
    std::uint32_t batch = 1;
    TaskType task = TaskType::unknown;
    bool annotate = true;
    std::size_t neighborhood = 2;  ///< frontier members kept on each side of the choice
};

/// A scored configuration.
struct Candidate {
    InferenceConfig config;
    double accuracy = 0.0;
    double cost = 0.0;
    byte_count memory_bytes = 0;
    bool interpolated = false;
};

struct Recommendation {
    InferenceConfig chosen;
    double achieved_accuracy = 0.0;
    byte_count memory_bytes = 0;  ///< total, or amortized when batch > 1
    double cost = 0.0;
    CostUnit unit = CostUnit::bytes;
    bool interpolated = false;
    Frontier frontier_neighborhood;
    std::vector<RuleAnnotation> annotations;
};

/// Total order used to break accuracy ties: lower cost, lower T, lower G,
/// higher precision, model name, then strategy descriptor.
inline bool preferred(const Candidate& a, const Candidate& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.config.tokens != b.config.tokens) return a.config.tokens < b.config.tokens;
    if (a.config.group != b.config.group) return a.config.group < b.config.group;
    if (a.config.weight_quant.precision_bits != b.config.weight_quant.precision_bits)
        return a.config.weight_quant.precision_bits > b.config.weight_quant.precision_bits;
    if (a.config.model != b.config.model) return a.config.model < b.config.model;
    return descriptor(a.config.kv) < descriptor(b.config.kv);
}

/// Scores every configuration of the space that the dataset covers.
inline std::vector<Candidate> score_candidates(const ModelCatalog& catalog, const Dataset& dataset,
                                               const ConfigSpace& space, const PlanRequest& req) {
    if (req.batch == 0) throw DomainError("batch must be >= 1");
    ConfigSpace s = space;
    s.batch = req.batch;
    const FamilyIndex index(dataset);
    std::vector<Candidate> out;
    for (auto& c : enumerate_configs(s)) {
        const auto& spec = catalog.at(c.model);
        auto hit = index.lookup(c);
        if (!hit) continue;
        Candidate cand;
        cand.memory_bytes =
            req.batch > 1 ? amortized_memory_bytes(spec, c, req.batch) : total_memory_bytes(spec, c);
        if (req.objective == Objective::memory) {
            cand.cost = static_cast<double>(cand.memory_bytes);
        } else {
            if (!hit->latency_seconds) continue;
            cand.cost = *hit->latency_seconds;
        }
        cand.accuracy = hit->accuracy;
        cand.interpolated = hit->interpolated;
        cand.config = std::move(c);
        out.push_back(std::move(cand));
    }
    return out;
}

inline Recommendation plan(const ModelCatalog& catalog, const Dataset& dataset, const ConfigSpace& space,
                           const PlanRequest& req) {
    if (!(req.budget > 0.0)) throw DomainError("budget must be positive");
    const auto unit = req.objective == Objective::memory ? CostUnit::bytes : CostUnit::seconds;
    const auto candidates = score_candidates(catalog, dataset, space, req);
    if (candidates.empty()) throw InfeasibleError("no configuration in the space is covered by the dataset", std::nullopt);

    const Candidate* best = nullptr;
    const Candidate* cheapest = nullptr;
    for (const auto& c : candidates) {
        if (!cheapest || c.cost < cheapest->cost ||
            (c.cost == cheapest->cost && record_key(c.config) < record_key(cheapest->config)))
            cheapest = &c;
        if (c.cost > req.budget) continue;
        if (!best || preferred(c, *best)) best = &c;
    }
    if (!best) {
        throw InfeasibleError("no configuration fits the budget; cheapest known costs " +
                                  format_cost(cheapest->cost, unit) + " " + std::string(unit_name(unit)) + " (" +
                                  record_key(cheapest->config) + ")",
                              cheapest->cost, record_key(cheapest->config));
    }

    Recommendation rec;
    rec.chosen = best->config;
    rec.achieved_accuracy = best->accuracy;
    rec.memory_bytes = best->memory_bytes;
    rec.cost = best->cost;
    rec.unit = unit;
    rec.interpolated = best->interpolated;

    std::vector<CostPoint> pts;
    pts.reserve(candidates.size());
    for (const auto& c : candidates) pts.push_back({c.cost, unit, c.accuracy, record_key(c.config)});
    const auto frontier = pareto_frontier(std::move(pts));
    const auto chosen_key = record_key(rec.chosen);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < frontier.size(); ++i)
        if (frontier.members[i].point.config_key == chosen_key) pos = i;
    const auto lo = pos >= req.neighborhood ? pos - req.neighborhood : 0;
    const auto hi = std::min(frontier.size(), pos + req.neighborhood + 1);
    rec.frontier_neighborhood.members.assign(frontier.members.begin() + static_cast<std::ptrdiff_t>(lo),
                                             frontier.members.begin() + static_cast<std::ptrdiff_t>(hi));

    if (req.annotate) {
        if (auto th = resolve_thresholds(catalog))
            rec.annotations = annotate_rules(rec.chosen, catalog.at(rec.chosen.model), {*th, req.task});
    }
    return rec;
}

}  // namespace memplan
