#pragma once

// Result documents shared by the CLI's machine format and the HTTP API.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "memplan/estimators.hpp"
#include "memplan/frontier.hpp"
#include "memplan/memory_model.hpp"
#include "memplan/planner.hpp"
#include "memplan/units.hpp"

namespace memplan::render {

using Json = nlohmann::ordered_json;

inline Json bytes_json(byte_count b) {
    Json j;
    j["bytes"] = b;
    j["gib"] = format_gib(b);
    return j;
}

inline Json cost_json(double cost) {
    if (std::isinf(cost)) return "inf";
    return cost;
}

inline Json weight_quant_json(const WeightQuantSpec& q) {
    Json j;
    j["precision_bits"] = q.precision_bits;
    j["group_size"] = q.group_size;
    j["scale_bits"] = q.scale_bits;
    j["zero_point_bits"] = q.zero_point_bits;
    return j;
}

inline Json config_json(const InferenceConfig& c) {
    Json j;
    j["model"] = c.model;
    j["weight_bits"] = c.weight_quant.precision_bits;
    j["weight_quant"] = weight_quant_json(c.weight_quant);
    j["kv"] = to_json(c.kv);
    j["tokens"] = c.tokens;
    j["group"] = c.group;
    j["batch"] = c.batch;
    j["key"] = record_key(c);
    return j;
}

inline Json memory_json(const InferenceConfig& c, const MemoryBreakdown& m) {
    Json j;
    j["config"] = config_json(c);
    j["kv_bytes_per_token"] = m.kv_per_token;
    j["weights"] = bytes_json(m.weights);
    j["kv_cache"] = bytes_json(m.kv_cache);
    j["total"] = bytes_json(m.total);
    j["amortized"] = bytes_json(m.amortized);
    j["amortization_batch"] = m.batch;
    return j;
}

inline std::string memory_text(const InferenceConfig& c, const MemoryBreakdown& m) {
    std::ostringstream out;
    out << "config      " << record_key(c) << "  B=" << c.batch << '\n'
        << "weights     " << format_bytes_human(m.weights) << '\n'
        << "kv_cache    " << format_bytes_human(m.kv_cache) << '\n'
        << "total       " << format_bytes_human(m.total) << '\n'
        << "amortized   " << format_bytes_human(m.amortized) << "  (B=" << m.batch << ")\n";
    return out.str();
}

inline Json model_json(const ModelSpec& s) {
    Json j = to_json(s);
    j["kv_bytes_per_token"] = kv_bytes_per_token(s);
    return j;
}

inline Json models_json(const ModelCatalog& catalog) {
    Json arr = Json::array();
    for (const auto& m : catalog.models()) arr.push_back(model_json(m));
    Json j;
    j["models"] = std::move(arr);
    return j;
}

inline Json frontier_json(const std::vector<CompositionRow>& rows) {
    Json j;
    Json arr = Json::array();
    for (const auto& r : rows) {
        Json row;
        row["cost"] = r.cost;
        row["unit"] = std::string(unit_name(r.unit));
        row["accuracy"] = r.accuracy;
        row["model"] = r.model;
        row["weight_bits"] = r.weight_bits;
        row["kv"] = r.kv;
        row["tokens"] = r.tokens;
        row["group"] = r.group;
        row["effective_size_bytes"] = r.effective_size_bytes;
        row["co_optimal"] = r.co_optimal;
        row["key"] = r.config_key;
        arr.push_back(std::move(row));
    }
    j["rows"] = std::move(arr);
    return j;
}

inline std::string frontier_text(const std::vector<CompositionRow>& rows) {
    std::ostringstream out;
    write_frontier_table(out, rows);
    return out.str();
}

inline Json annotation_json(const RuleAnnotation& a) {
    Json j;
    j["rule_id"] = a.rule_id;
    j["triggered"] = a.triggered;
    j["explanation"] = a.explanation;
    return j;
}

inline Json plan_json(const Recommendation& r) {
    Json j;
    j["chosen"] = config_json(r.chosen);
    j["achieved_accuracy"] = r.achieved_accuracy;
    j["memory"] = bytes_json(r.memory_bytes);
    j["cost"] = r.cost;
    j["unit"] = std::string(unit_name(r.unit));
    j["interpolated"] = r.interpolated;
    Json nb = Json::array();
    for (const auto& m : r.frontier_neighborhood.members) {
        Json p;
        p["cost"] = m.point.cost;
        p["accuracy"] = m.point.accuracy;
        p["key"] = m.point.config_key;
        p["co_optimal"] = m.co_optimal;
        nb.push_back(std::move(p));
    }
    j["frontier_neighborhood"] = std::move(nb);
    Json ann = Json::array();
    for (const auto& a : r.annotations) ann.push_back(annotation_json(a));
    j["annotations"] = std::move(ann);
    return j;
}

inline std::string plan_text(const Recommendation& r) {
    std::ostringstream out;
    out << "chosen      " << record_key(r.chosen) << "  B=" << r.chosen.batch << '\n'
        << "accuracy    " << format_accuracy(r.achieved_accuracy) << (r.interpolated ? "  (interpolated)" : "")
        << '\n'
        << "memory      " << format_bytes_human(r.memory_bytes) << '\n';
    if (r.unit != CostUnit::bytes) out << "cost        " << format_cost(r.cost, r.unit) << ' ' << unit_name(r.unit) << '\n';
    out << "neighborhood\n";
    for (const auto& m : r.frontier_neighborhood.members)
        out << "  " << format_cost(m.point.cost, m.point.unit) << '\t' << format_accuracy(m.point.accuracy) << '\t'
            << m.point.config_key << (m.co_optimal ? "\tco-optimal" : "") << '\n';
    for (const auto& a : r.annotations)
        out << "finding " << a.rule_id << (a.triggered ? " [triggered] " : " [-] ") << a.explanation << '\n';
    return out.str();
}

/// Per-instance maj@G plus the mean across instances.
struct EstimateReport {
    std::uint32_t group = 1;
    std::string method;
    std::string tie_policy;
    struct Row {
        std::string instance_id;
        std::size_t pool_size = 0;
        double pass_at_1 = 0.0;
        double maj_at_g = 0.0;
    };
    std::vector<Row> rows;
    double mean_maj_at_g = 0.0;
};

inline std::string_view tie_name(TiePolicy t) {
    switch (t) {
        case TiePolicy::uniform: return "uniform";
        case TiePolicy::first_sampled: return "first_sampled";
        case TiePolicy::count_as_wrong: return "count_as_wrong";
    }
    return "uniform";
}

inline TiePolicy parse_tie(std::string_view s) {
    if (s == "uniform") return TiePolicy::uniform;
    if (s == "first_sampled") return TiePolicy::first_sampled;
    if (s == "count_as_wrong") return TiePolicy::count_as_wrong;
    throw InvalidRequest("unknown tie policy '" + std::string(s) + "'");
}

inline EstimateReport estimate(const std::vector<SamplePool>& pools, std::uint32_t group,
                               const EstimateMethod& method, TiePolicy tie) {
    if (pools.empty()) throw DomainError("no sample pools to estimate over");
    EstimateReport rep;
    rep.group = group;
    rep.method = std::holds_alternative<ExactMethod>(method) ? "exact" : "monte_carlo";
    rep.tie_policy = std::string(tie_name(tie));
    double sum = 0.0;
    for (const auto& p : pools) {
        EstimateReport::Row row{p.instance_id, p.size(), pass_at_1(p), maj_at_g(p, group, method, tie)};
        sum += row.maj_at_g;
        rep.rows.push_back(std::move(row));
    }
    rep.mean_maj_at_g = sum / static_cast<double>(pools.size());
    return rep;
}

inline Json estimate_json(const EstimateReport& r) {
    Json j;
    j["group"] = r.group;
    j["method"] = r.method;
    j["tie_policy"] = r.tie_policy;
    Json arr = Json::array();
    for (const auto& row : r.rows) {
        Json x;
        x["instance_id"] = row.instance_id;
        x["pool_size"] = row.pool_size;
        x["pass_at_1"] = row.pass_at_1;
        x["maj_at_g"] = row.maj_at_g;
        arr.push_back(std::move(x));
    }
    j["instances"] = std::move(arr);
    j["mean_maj_at_g"] = r.mean_maj_at_g;
    return j;
}

inline std::string estimate_text(const EstimateReport& r) {
    std::ostringstream out;
    out << "instance\tS\tpass@1\tmaj@" << r.group << '\n';
    for (const auto& row : r.rows)
        out << row.instance_id << '\t' << row.pool_size << '\t' << format_accuracy(row.pass_at_1) << '\t'
            << format_accuracy(row.maj_at_g) << '\n';
    out << "mean maj@" << r.group << " (" << r.method << ", tie=" << r.tie_policy << "): " << format_accuracy(r.mean_maj_at_g)
        << '\n';
    return out.str();
}

/// Success envelope: {"schema_version":1,"ok":true,"result":...}.
inline Json ok_envelope(Json result) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["ok"] = true;
    j["result"] = std::move(result);
    return j;
}

inline Json error_envelope(const Error& e) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["ok"] = false;
    Json err;
    err["code"] = std::string(code_name(e.code()));
    err["message"] = std::string(e.what());
    if (const auto* inf = dynamic_cast<const InfeasibleError*>(&e)) {
        if (inf->cheapest_cost()) err["cheapest_cost"] = *inf->cheapest_cost();
        if (!inf->cheapest_key().empty()) err["cheapest_key"] = inf->cheapest_key();
    }
    j["error"] = std::move(err);
    return j;
}

}  // namespace memplan::render
