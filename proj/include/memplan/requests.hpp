#pragma once

// Request documents for the HTTP API, also accepted by the CLI (--space files).
// Field names are frozen; see docs/API.md.

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "memplan/estimators.hpp"
#include "memplan/frontier.hpp"
#include "memplan/planner.hpp"
#include "memplan/render.hpp"

namespace memplan::requests {

using nlohmann::json;

namespace detail {

inline void require_object(const json& j) {
    if (!j.is_object()) throw InvalidRequest("request body must be a JSON object");
}

template <typename T>
T get_or(const json& j, const char* field, T fallback) {
    try {
        return memplan::detail::optional_field<T>(j, field, fallback);
    } catch (const ParseError& e) {
        throw InvalidRequest(e.what());
    }
}

template <typename T>
T get(const json& j, const char* field) {
    try {
        return memplan::detail::required<T>(j, field);
    } catch (const ParseError& e) {
        throw InvalidRequest(e.what());
    }
}

inline KvCacheStrategy kv_or_full(const json& j) {
    if (!j.contains("kv") || j["kv"].is_null()) return FullKv{};
    try {
        return kv_strategy_from_json(j["kv"]);
    } catch (const ParseError& e) {
        throw InvalidRequest(e.what());
    }
}

}  // namespace detail

inline InferenceConfig memory_request(const json& j) {
    detail::require_object(j);
    InferenceConfig c;
    c.model = detail::get<std::string>(j, "model");
    c.weight_quant.precision_bits = detail::get_or<std::uint32_t>(j, "weight_bits", 16);
    c.weight_quant.group_size = detail::get_or<std::uint32_t>(j, "weight_group_size", 128);
    c.weight_quant.scale_bits = detail::get_or<std::uint32_t>(j, "weight_scale_bits", 16);
    c.weight_quant.zero_point_bits = detail::get_or<std::uint32_t>(j, "weight_zero_point_bits", 0);
    c.kv = detail::kv_or_full(j);
    c.tokens = detail::get<token_count>(j, "tokens");
    c.group = detail::get_or<std::uint32_t>(j, "group", 1);
    c.batch = detail::get_or<std::uint32_t>(j, "batch", 1);
    return c;
}

struct FrontierRequest {
    std::string dataset;
    CostUnit unit = CostUnit::bytes;
    std::uint32_t batch = 1;
    PointFilter filter;
};

inline FrontierRequest frontier_request(const json& j) {
    detail::require_object(j);
    FrontierRequest r;
    r.dataset = detail::get_or<std::string>(j, "dataset", "");
    r.unit = parse_unit(detail::get_or<std::string>(j, "unit", "bytes"));
    r.batch = detail::get_or<std::uint32_t>(j, "batch", 1);
    if (r.batch == 0) throw InvalidRequest("batch must be >= 1");
    if (j.contains("filters")) {
        const auto& f = j["filters"];
        detail::require_object(f);
        if (f.contains("model")) r.filter.model = detail::get<std::string>(f, "model");
        if (f.contains("weight_bits")) r.filter.weight_bits = detail::get<std::uint32_t>(f, "weight_bits");
        if (f.contains("kv_kind")) r.filter.kv_kind = detail::get<std::string>(f, "kv_kind");
        if (f.contains("group")) r.filter.group = detail::get<std::uint32_t>(f, "group");
    }
    return r;
}

inline ConfigSpace space_request(const json& j) {
    detail::require_object(j);
    ConfigSpace s;
    auto arr = [&](const char* field) -> const json& {
        if (!j.contains(field) || !j[field].is_array()) throw InvalidRequest(std::string("space.") + field + " must be an array");
        return j[field];
    };
    try {
        for (const auto& m : arr("models")) s.models.push_back(m.get<std::string>());
        for (const auto& b : arr("weight_bits")) s.weights.push_back(weight_quant(b.get<std::uint32_t>()));
        for (const auto& k : arr("kv")) s.kv.push_back(kv_strategy_from_json(k));
        for (const auto& t : arr("tokens")) s.tokens.push_back(t.get<token_count>());
        for (const auto& g : arr("groups")) s.groups.push_back(g.get<std::uint32_t>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidRequest(std::string("space: ") + e.what());
    } catch (const ParseError& e) {
        throw InvalidRequest(std::string("space: ") + e.what());
    } catch (const DomainError& e) {
        throw InvalidRequest(std::string("space: ") + e.what());
    }
    s.batch = detail::get_or<std::uint32_t>(j, "batch", 1);
    return s;
}

struct PlanDocument {
    std::string dataset;
    PlanRequest request;
    std::optional<ConfigSpace> space;
};

inline double parse_budget(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        try {
            std::size_t used = 0;
            const double d = std::stod(s, &used);
            if (used == s.size()) return d;
        } catch (const std::exception&) {
        }
        throw InvalidRequest("budget must be a number or \"inf\"");
    }
    if (!v.is_number()) throw InvalidRequest("budget must be a number or \"inf\"");
    return v.get<double>();
}

inline PlanDocument plan_request(const json& j) {
    detail::require_object(j);
    PlanDocument d;
    d.dataset = detail::get_or<std::string>(j, "dataset", "");
    if (!j.contains("budget")) throw InvalidRequest("field 'budget': missing required field");
    d.request.budget = parse_budget(j["budget"]);
    d.request.objective = parse_objective(detail::get_or<std::string>(j, "objective", "memory"));
    d.request.batch = detail::get_or<std::uint32_t>(j, "batch", 1);
    if (d.request.batch == 0) throw InvalidRequest("batch must be >= 1");
    d.request.task = parse_task(detail::get_or<std::string>(j, "task", "unknown"));
    d.request.annotate = detail::get_or<bool>(j, "annotate", true);
    if (j.contains("space") && !j["space"].is_null()) d.space = space_request(j["space"]);
    return d;
}

struct EstimateDocument {
    std::vector<SamplePool> pools;
    std::string pool_set;
    std::uint32_t group = 1;
    EstimateMethod method = ExactMethod{};
    TiePolicy tie = TiePolicy::uniform;
};

inline EstimateDocument estimate_request(const json& j) {
    detail::require_object(j);
    EstimateDocument d;
    if (j.contains("pools")) {
        if (!j["pools"].is_array()) throw InvalidRequest("pools must be an array");
        try {
            for (const auto& p : j["pools"]) d.pools.push_back(sample_pool_from_json(p));
        } catch (const ParseError& e) {
            throw InvalidRequest(e.what());
        }
    }
    d.pool_set = detail::get_or<std::string>(j, "pool_set", "");
    if (d.pools.empty() && d.pool_set.empty()) throw InvalidRequest("give either inline 'pools' or a 'pool_set' name");
    d.group = detail::get<std::uint32_t>(j, "group");
    const auto method = detail::get_or<std::string>(j, "method", "exact");
    if (method == "exact") {
        d.method = ExactMethod{};
    } else if (method == "monte_carlo") {
        if (!j.contains("seed")) throw InvalidRequest("monte_carlo requires an explicit 'seed'");
        d.method = MonteCarloMethod{detail::get_or<std::uint64_t>(j, "resamples", 100000),
                                    detail::get<std::uint64_t>(j, "seed")};
    } else {
        throw InvalidRequest("unknown method '" + method + "'");
    }
    d.tie = render::parse_tie(detail::get_or<std::string>(j, "tie_policy", "uniform"));
    return d;
}

}  // namespace memplan::requests
