#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "memplan/errors.hpp"
#include "memplan/memory_model.hpp"
#include "memplan/model_spec.hpp"

namespace memplan {

/// Answer key for a generation whose answer could not be extracted.
/// Never counted as correct; abstains from majority votes.
inline constexpr std::string_view kInvalidAnswer = "INVALID";

struct Sample {
    std::string answer_key;
    bool correct = false;

    bool operator==(const Sample&) const = default;
};

/// Per-instance outcomes of S independent generations.
struct SamplePool {
    std::string instance_id;
    std::vector<Sample> samples;

    std::size_t size() const noexcept { return samples.size(); }
    bool operator==(const SamplePool&) const = default;
};

inline void validate(const SamplePool& pool) {
    std::map<std::string_view, bool> verdict;
    for (const auto& s : pool.samples) {
        if (s.answer_key == kInvalidAnswer && s.correct)
            throw DomainError("pool '" + pool.instance_id + "': INVALID answer marked correct");
        auto [it, inserted] = verdict.emplace(s.answer_key, s.correct);
        if (!inserted && it->second != s.correct)
            throw DomainError("pool '" + pool.instance_id + "': answer '" + s.answer_key +
                              "' has inconsistent correctness");
    }
    const auto correct_keys = std::count_if(verdict.begin(), verdict.end(),
                                            [](const auto& kv) { return kv.second; });
    if (correct_keys > 1)
        throw DomainError("pool '" + pool.instance_id + "': more than one distinct correct answer");
}

/// Accuracy of one configuration, plus optional speed axes and the pools it came from.
struct MeasurementRecord {
    std::string model;
    std::uint32_t weight_bits = 16;
    KvCacheStrategy kv = FullKv{};
    token_count tokens = 0;
    std::uint32_t group = 1;
    double accuracy = 0.0;
    std::optional<double> latency_seconds;
    std::optional<double> throughput_rps;
    std::vector<SamplePool> pools;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();  ///< unknown fields, kept for export
};

/// Identity of a record: (model, precision, strategy, T, G).
inline std::string record_key(std::string_view model, std::uint32_t weight_bits, const KvCacheStrategy& kv,
                              token_count tokens, std::uint32_t group) {
    return std::string(model) + "|w" + std::to_string(weight_bits) + "|" + descriptor(kv) + "|T" +
           std::to_string(tokens) + "|G" + std::to_string(group);
}

inline std::string record_key(const MeasurementRecord& r) {
    return record_key(r.model, r.weight_bits, r.kv, r.tokens, r.group);
}

inline std::string record_key(const InferenceConfig& c) {
    return record_key(c.model, c.weight_quant.precision_bits, c.kv, c.tokens, c.group);
}

inline InferenceConfig to_config(const MeasurementRecord& r, std::uint32_t batch = 1) {
    InferenceConfig c;
    c.model = r.model;
    c.weight_quant = weight_quant(r.weight_bits);
    c.kv = r.kv;
    c.tokens = r.tokens;
    c.group = r.group;
    c.batch = batch;
    return c;
}

inline void validate(const MeasurementRecord& r) {
    if (r.model.empty()) throw DomainError("record model must be non-empty");
    validate(weight_quant(r.weight_bits));
    validate(r.kv);
    if (r.group == 0) throw DomainError("record group must be >= 1");
    if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0)) throw DomainError("accuracy must lie in [0, 1]");
    if (r.latency_seconds && !(*r.latency_seconds > 0.0)) throw DomainError("latency_seconds must be positive");
    if (r.throughput_rps && !(*r.throughput_rps > 0.0)) throw DomainError("throughput_rps must be positive");
    for (const auto& p : r.pools) validate(p);
}

/// Measurement records with unique keys. Immutable once loaded.
class Dataset {
public:
    void add(MeasurementRecord record) {
        validate(record);
        auto key = record_key(record);
        if (index_.count(key)) throw ConflictError("duplicate record key " + key);
        index_.emplace(std::move(key), records_.size());
        records_.push_back(std::move(record));
    }

    const std::vector<MeasurementRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    const MeasurementRecord* find(const std::string& key) const {
        auto it = index_.find(key);
        return it == index_.end() ? nullptr : &records_[it->second];
    }

    const MeasurementRecord& at(const std::string& key) const {
        if (const auto* r = find(key)) return *r;
        throw KeyNotFound("no record with key " + key);
    }

private:
    std::vector<MeasurementRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// JSON mapping

inline nlohmann::ordered_json to_json(const SamplePool& pool) {
    nlohmann::ordered_json j;
    j["instance_id"] = pool.instance_id;
    auto& arr = j["samples"] = nlohmann::ordered_json::array();
    for (const auto& s : pool.samples) arr.push_back({{"answer_key", s.answer_key}, {"correct", s.correct}});
    return j;
}

template <typename Json>
inline SamplePool sample_pool_from_json(const Json& j, std::size_t line = 0) {
    SamplePool pool;
    pool.instance_id = detail::required<std::string>(j, "instance_id", line);
    if (!j.contains("samples") || !j["samples"].is_array())
        throw ParseError(line, "samples", "expected an array");
    for (const auto& s : j["samples"]) {
        pool.samples.push_back(
            {detail::required<std::string>(s, "answer_key", line), detail::required<bool>(s, "correct", line)});
    }
    if (pool.samples.empty()) throw ParseError(line, "samples", "pool must hold at least one sample");
    try {
        validate(pool);
    } catch (const DomainError& e) {
        throw ParseError(line, "samples", e.what());
    }
    return pool;
}

namespace detail {
inline const std::set<std::string>& record_fields() {
    static const std::set<std::string> fields{"schema_version", "model",           "weight_bits",
                                              "kv",             "tokens",          "group",
                                              "accuracy",       "latency_seconds", "throughput_rps",
                                              "pools"};
    return fields;
}
}  // namespace detail

/// Canonical field order: schema_version, model, weight_bits, kv, tokens, group, accuracy,
/// latency_seconds?, throughput_rps?, pools?, then unknown fields in input order.
inline nlohmann::ordered_json to_json(const MeasurementRecord& r) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["model"] = r.model;
    j["weight_bits"] = r.weight_bits;
    j["kv"] = to_json(r.kv);
    j["tokens"] = r.tokens;
    j["group"] = r.group;
    j["accuracy"] = r.accuracy;
    if (r.latency_seconds) j["latency_seconds"] = *r.latency_seconds;
    if (r.throughput_rps) j["throughput_rps"] = *r.throughput_rps;
    if (!r.pools.empty()) {
        auto& arr = j["pools"] = nlohmann::ordered_json::array();
        for (const auto& p : r.pools) arr.push_back(to_json(p));
    }
    for (const auto& [k, v] : r.extra.items()) j[k] = v;
    return j;
}

inline MeasurementRecord measurement_from_json(const nlohmann::ordered_json& j, std::size_t line = 0) {
    if (!j.is_object()) throw ParseError(line, "", "record must be an object");
    const auto version = detail::required<std::uint32_t>(j, "schema_version", line);
    if (version != kSchemaVersion)
        throw ParseError(line, "schema_version", "unsupported version " + std::to_string(version));

    MeasurementRecord r;
    r.model = detail::required<std::string>(j, "model", line);
    r.weight_bits = detail::required<std::uint32_t>(j, "weight_bits", line);
    if (r.weight_bits != 4 && r.weight_bits != 8 && r.weight_bits != 16)
        throw ParseError(line, "weight_bits", "must be 4, 8 or 16");
    if (!j.contains("kv")) throw ParseError(line, "kv", "missing required field");
    r.kv = kv_strategy_from_json(j["kv"], line);
    r.tokens = detail::required<token_count>(j, "tokens", line);
    r.group = detail::required<std::uint32_t>(j, "group", line);
    if (r.group == 0) throw ParseError(line, "group", "must be >= 1");
    r.accuracy = detail::required<double>(j, "accuracy", line);
    if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0)) throw ParseError(line, "accuracy", "must lie in [0, 1]");
    if (j.contains("latency_seconds")) {
        r.latency_seconds = detail::required<double>(j, "latency_seconds", line);
        if (!(*r.latency_seconds > 0.0)) throw ParseError(line, "latency_seconds", "must be positive");
    }
    if (j.contains("throughput_rps")) {
        r.throughput_rps = detail::required<double>(j, "throughput_rps", line);
        if (!(*r.throughput_rps > 0.0)) throw ParseError(line, "throughput_rps", "must be positive");
    }
    if (j.contains("pools")) {
        if (!j["pools"].is_array()) throw ParseError(line, "pools", "expected an array");
        for (const auto& p : j["pools"]) r.pools.push_back(sample_pool_from_json(p, line));
    }
    for (const auto& [k, v] : j.items())
        if (!detail::record_fields().count(k)) r.extra[k] = v;
    return r;
}

namespace detail {
template <typename F>
void for_each_line(std::istream& in, F&& f) {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line, "", std::string("malformed JSON: ") + e.what());
        }
        f(j, line);
    }
}
}  // namespace detail

/// Reads a line-delimited measurement file. Blank lines are skipped.
inline Dataset load_measurements(std::istream& in) {
    Dataset ds;
    detail::for_each_line(in, [&](const nlohmann::ordered_json& j, std::size_t line) {
        auto record = measurement_from_json(j, line);
        try {
            ds.add(std::move(record));
        } catch (const ConflictError& e) {
            throw ConflictError("line " + std::to_string(line) + ": " + e.what());
        }
    });
    return ds;
}

inline void export_measurements(std::ostream& out, const Dataset& ds) {
    for (const auto& r : ds.records()) out << to_json(r).dump() << '\n';
}

/// Reads a sample-pool file: one {"schema_version", "instance_id", "samples"} object per line.
inline std::vector<SamplePool> load_pools(std::istream& in) {
    std::vector<SamplePool> pools;
    std::set<std::string> seen;
    detail::for_each_line(in, [&](const nlohmann::ordered_json& j, std::size_t line) {
        const auto version = detail::required<std::uint32_t>(j, "schema_version", line);
        if (version != kSchemaVersion)
            throw ParseError(line, "schema_version", "unsupported version " + std::to_string(version));
        auto pool = sample_pool_from_json(j, line);
        if (!seen.insert(pool.instance_id).second)
            throw ConflictError("line " + std::to_string(line) + ": duplicate instance_id " + pool.instance_id);
        pools.push_back(std::move(pool));
    });
    return pools;
}

inline void export_pools(std::ostream& out, const std::vector<SamplePool>& pools) {
    for (const auto& p : pools) {
        nlohmann::ordered_json j;
        j["schema_version"] = kSchemaVersion;
        const auto body = to_json(p);
        for (const auto& [k, v] : body.items()) j[k] = v;
        out << j.dump() << '\n';
    }
}

}  // namespace memplan
