#pragma once

#include <charconv>
#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "memplan/errors.hpp"
#include "memplan/measurements.hpp"
#include "memplan/memory_model.hpp"

namespace memplan {

enum class CostUnit { bytes, seconds, inverse_rps };

inline std::string_view unit_name(CostUnit u) {
    switch (u) {
        case CostUnit::bytes: return "bytes";
        case CostUnit::seconds: return "seconds";
        case CostUnit::inverse_rps: return "inverse_rps";
    }
    return "bytes";
}

inline CostUnit parse_unit(std::string_view s) {
    if (s == "bytes" || s == "memory") return CostUnit::bytes;
    if (s == "seconds" || s == "latency") return CostUnit::seconds;
    if (s == "inverse_rps" || s == "throughput") return CostUnit::inverse_rps;
    throw InvalidRequest("unknown cost unit '" + std::string(s) + "'");
}

/// One (cost, accuracy) observation of a configuration.
struct CostPoint {
    double cost = 0.0;
    CostUnit unit = CostUnit::bytes;
    double accuracy = 0.0;
    std::string config_key;

    bool operator==(const CostPoint&) const = default;
};

/// a dominates b: no more expensive, no less accurate, strictly better in one.
inline bool dominates(const CostPoint& a, const CostPoint& b) {
    if (a.unit != b.unit) throw DomainError("cannot compare costs in different units");
    return a.cost <= b.cost && a.accuracy >= b.accuracy && (a.cost < b.cost || a.accuracy > b.accuracy);
}

struct FrontierMember {
    CostPoint point;
    bool co_optimal = false;  ///< shares (cost, accuracy) with another member
};

/// Non-dominated points ordered by cost; accuracy strictly increases between
/// distinct (cost, accuracy) pairs.
struct Frontier {
    std::vector<FrontierMember> members;

    std::size_t size() const noexcept { return members.size(); }
    bool empty() const noexcept { return members.empty(); }
};

/// Sort-and-sweep extraction, O(n log n).
inline Frontier pareto_frontier(std::vector<CostPoint> points) {
    if (points.empty()) throw DomainError("pareto frontier of an empty point set");
    const auto unit = points.front().unit;
    for (const auto& p : points) {
        if (p.unit != unit) throw DomainError("mixed cost units in one frontier");
        if (!(p.accuracy >= 0.0 && p.accuracy <= 1.0)) throw DomainError("accuracy outside [0, 1]");
        if (!(p.cost >= 0.0)) throw DomainError("cost must be non-negative");
    }
    std::sort(points.begin(), points.end(), [](const CostPoint& a, const CostPoint& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.config_key < b.config_key;
    });

    Frontier f;
    for (auto& p : points) {
        if (f.members.empty() || p.accuracy > f.members.back().point.accuracy) {
            f.members.push_back({std::move(p), false});
        } else if (p.cost == f.members.back().point.cost && p.accuracy == f.members.back().point.accuracy) {
            f.members.back().co_optimal = true;
            f.members.push_back({std::move(p), true});
        }
    }
    return f;
}

struct InterpolatedAccuracy {
    double accuracy = 0.0;
    bool clamped = false;  ///< query fell outside the measured range
};

struct CurvePoint {
    token_count tokens = 0;
    double accuracy = 0.0;
};

/// Piecewise-linear accuracy at `tokens` along one configuration family's budget curve.
/// Queries outside the grid clamp to the nearest endpoint.
inline InterpolatedAccuracy interpolate_accuracy(const std::vector<CurvePoint>& curve, token_count tokens) {
    if (curve.empty()) throw DomainError("interpolation over an empty curve");
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].tokens <= curve[i - 1].tokens) throw DomainError("curve token budgets must strictly increase");

    if (tokens <= curve.front().tokens) return {curve.front().accuracy, tokens < curve.front().tokens};
    if (tokens >= curve.back().tokens) return {curve.back().accuracy, tokens > curve.back().tokens};

    auto hi = std::lower_bound(curve.begin(), curve.end(), tokens,
                               [](const CurvePoint& p, token_count t) { return p.tokens < t; });
    if (hi->tokens == tokens) return {hi->accuracy, false};
    auto lo = hi - 1;
    const double t = static_cast<double>(tokens - lo->tokens) / static_cast<double>(hi->tokens - lo->tokens);
    return {lo->accuracy + t * (hi->accuracy - lo->accuracy), false};
}

/// The attributes behind a composition plot for one frontier member.
struct CompositionRow {
    double cost = 0.0;
    CostUnit unit = CostUnit::bytes;
    double accuracy = 0.0;
    std::string config_key;
    std::string model;
    std::uint32_t weight_bits = 16;
    std::string kv;
    token_count tokens = 0;
    byte_count effective_size_bytes = 0;
    std::uint32_t group = 1;
    bool co_optimal = false;
};

inline std::vector<CompositionRow> frontier_composition(const Frontier& frontier, const Dataset& dataset,
                                                        const ModelCatalog& catalog) {
    std::vector<CompositionRow> rows;
    rows.reserve(frontier.size());
    for (const auto& m : frontier.members) {
        const auto& r = dataset.at(m.point.config_key);
        CompositionRow row;
        row.cost = m.point.cost;
        row.unit = m.point.unit;
        row.accuracy = m.point.accuracy;
        row.config_key = m.point.config_key;
        row.model = r.model;
        row.weight_bits = r.weight_bits;
        row.kv = descriptor(r.kv);
        row.tokens = r.tokens;
        row.effective_size_bytes = effective_size_bytes(catalog.at(r.model), weight_quant(r.weight_bits));
        row.group = r.group;
        row.co_optimal = m.co_optimal;
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CompositionRow& a, const CompositionRow& b) { return a.cost < b.cost; });
    return rows;
}

// ---------------------------------------------------------------------------
// Dataset -> cost points

struct PointFilter {
    std::optional<std::string> model;
    std::optional<std::uint32_t> weight_bits;
    std::optional<std::string> kv_kind;
    std::optional<std::uint32_t> group;

    bool accepts(const MeasurementRecord& r) const {
        if (model && r.model != *model) return false;
        if (weight_bits && r.weight_bits != *weight_bits) return false;
        if (kv_kind && kind_name(r.kv) != *kv_kind) return false;
        if (group && r.group != *group) return false;
        return true;
    }
};

/// Cost of a measured record on the given axis; nullopt when the record lacks that axis.
/// Memory cost is total memory for batch 1, otherwise amortized memory.
inline std::optional<double> record_cost(const MeasurementRecord& r, CostUnit unit, const ModelCatalog& catalog,
                                         std::uint32_t batch = 1) {
    switch (unit) {
        case CostUnit::bytes: {
            const auto cfg = to_config(r, batch);
            const auto bytes = batch > 1 ? amortized_memory_bytes(catalog, cfg, batch) : total_memory_bytes(catalog, cfg);
            return static_cast<double>(bytes);
        }
        case CostUnit::seconds:
            if (!r.latency_seconds) return std::nullopt;
            return *r.latency_seconds;
        case CostUnit::inverse_rps:
            if (!r.throughput_rps) return std::nullopt;
            return 1.0 / *r.throughput_rps;
    }
    return std::nullopt;
}

inline std::vector<CostPoint> cost_points(const Dataset& dataset, const ModelCatalog& catalog, CostUnit unit,
                                          const PointFilter& filter = {}, std::uint32_t batch = 1) {
    std::vector<CostPoint> pts;
    for (const auto& r : dataset.records()) {
        if (!filter.accepts(r)) continue;
        if (auto c = record_cost(r, unit, catalog, batch)) pts.push_back({*c, unit, r.accuracy, record_key(r)});
    }
    return pts;
}

/// Frozen column order of the tabular frontier export.
inline constexpr std::string_view kFrontierColumns =
    "cost\tunit\taccuracy\tmodel\tweight_bits\tkv\ttokens\tgroup\teffective_size_bytes\tco_optimal";

/// Shortest text that reads back to the same double.
inline std::string format_accuracy(double a) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, a);
    return std::string(buf, r.ptr);
}

inline std::string format_cost(double cost, CostUnit unit) {
    if (unit == CostUnit::bytes) return std::to_string(static_cast<std::uint64_t>(cost));
    return format_accuracy(cost);
}


inline void write_frontier_table(std::ostream& out, const std::vector<CompositionRow>& rows) {
    out << kFrontierColumns << '\n';
    for (const auto& r : rows) {
        out << format_cost(r.cost, r.unit) << '\t' << unit_name(r.unit) << '\t' << format_accuracy(r.accuracy) << '\t'
            << r.model << '\t' << r.weight_bits << '\t' << r.kv << '\t' << r.tokens << '\t' << r.group << '\t'
            << r.effective_size_bytes << '\t' << (r.co_optimal ? 1 : 0) << '\n';
    }
}

}  // namespace memplan
