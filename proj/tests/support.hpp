#pragma once

#include <fstream>
#include <random>
#include <string>

#include "memplan/http_server.hpp"
#include "memplan/memplan.hpp"

namespace testing_support {

inline std::string source_path(const std::string& rel) { return std::string(MEMPLAN_SOURCE_DIR) + "/" + rel; }

inline const std::string& spec_path() {
    static const std::string p = source_path("data/models/qwen3.json");
    return p;
}

inline const std::string& dataset_path() {
    static const std::string p = source_path("data/measurements/synthetic_aime_like.jsonl");
    return p;
}

inline const std::string& pools_path() {
    static const std::string p = source_path("data/pools/demo_pools.jsonl");
    return p;
}

inline const memplan::ModelCatalog& catalog() {
    static const auto c = memplan::api::load_catalog_file(spec_path());
    return c;
}

inline const memplan::Dataset& dataset() {
    static const auto d = memplan::api::load_dataset_file(dataset_path());
    return d;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline memplan::InferenceConfig config(const std::string& model, std::uint32_t bits, memplan::token_count tokens,
                                       std::uint32_t group = 1, memplan::KvCacheStrategy kv = memplan::FullKv{},
                                       std::uint32_t batch = 1) {
    return {model, memplan::weight_quant(bits), kv, tokens, group, batch};
}

inline memplan::SamplePool pool_of(const std::string& id, std::initializer_list<std::pair<const char*, bool>> s) {
    memplan::SamplePool p;
    p.instance_id = id;
    for (const auto& [k, c] : s) p.samples.push_back({k, c});
    return p;
}

/// Random pool over a few answers; at most one correct key.
inline memplan::SamplePool random_pool(std::mt19937_64& rng, std::size_t S, const std::string& id) {
    std::uniform_int_distribution<int> answer(0, 4);  // 4 = INVALID
    std::uniform_int_distribution<int> which(0, 3);
    const int correct = which(rng);
    const bool has_correct = (rng() % 5) != 0;
    memplan::SamplePool p;
    p.instance_id = id;
    for (std::size_t i = 0; i < S; ++i) {
        const int a = answer(rng);
        if (a == 4)
            p.samples.push_back({"INVALID", false});
        else
            p.samples.push_back({"ans" + std::to_string(a), has_correct && a == correct});
    }
    return p;
}

}  // namespace testing_support
