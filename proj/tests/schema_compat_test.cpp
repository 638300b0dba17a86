// The measurement format must express every axis value of the reference study's grid.

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "support.hpp"

using namespace memplan;

namespace {

nlohmann::json manifest() {
    return nlohmann::json::parse(testing_support::slurp(testing_support::source_path("data/manifests/paper_grid.json")));
}

MeasurementRecord record_for(const InferenceConfig& c, std::size_t i) {
    MeasurementRecord r;
    r.model = c.model;
    r.weight_bits = c.weight_quant.precision_bits;
    r.kv = c.kv;
    r.tokens = c.tokens;
    r.group = c.group;
    r.accuracy = static_cast<double>(i % 101) / 100.0;
    r.latency_seconds = 1.0 + static_cast<double>(i);
    return r;
}

}  // namespace

TEST(SchemaCompat, ManifestCountMatchesEnumeration) {
    const auto m = manifest();
    const auto space = requests::space_request(m["space"]);
    EXPECT_EQ(space.models.size(), 6u);
    EXPECT_EQ(space.weights.size(), 3u);
    EXPECT_EQ(space.kv.size(), 7u);
    EXPECT_EQ(space.tokens.size(), 8u);
    EXPECT_EQ(space.groups.size(), 7u);
    EXPECT_EQ(enumerate_configs(space).size(), m["expected_count"].get<std::size_t>());
    EXPECT_EQ(m["expected_count"].get<std::size_t>(), 7056u);
}

TEST(SchemaCompat, EveryGridPointRoundTripsThroughTheFileFormat) {
    const auto configs = enumerate_configs(requests::space_request(manifest()["space"]));
    std::ostringstream file;
    for (std::size_t i = 0; i < configs.size(); ++i) file << to_json(record_for(configs[i], i)).dump() << '\n';

    std::istringstream in(file.str());
    const auto ds = load_measurements(in);  // duplicate keys would throw
    ASSERT_EQ(ds.size(), configs.size());
    std::set<std::string> keys;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& r = ds.records()[i];
        EXPECT_EQ(to_config(r), configs[i]);
        keys.insert(record_key(r));
    }
    EXPECT_EQ(keys.size(), configs.size());

    std::ostringstream again;
    export_measurements(again, ds);
    EXPECT_EQ(again.str(), file.str());
}

TEST(SchemaCompat, GridIsPriceableAndPlannable) {
    const auto space = requests::space_request(manifest()["space"]);
    const auto configs = enumerate_configs(space);
    Dataset ds;
    for (std::size_t i = 0; i < configs.size(); ++i) ds.add(record_for(configs[i], i));
    for (const auto& c : configs) EXPECT_GT(total_memory_bytes(testing_support::catalog(), c), 0u);
    const auto rec = plan(testing_support::catalog(), ds, space, PlanRequest{});
    EXPECT_EQ(rec.achieved_accuracy, 1.0);
}

TEST(SchemaCompat, PaperParameterValues) {
    const auto space = requests::space_request(manifest()["space"]);
    std::set<token_count> retain;
    std::set<std::uint32_t> kv_bits;
    for (const auto& s : space.kv) {
        if (const auto* e = std::get_if<EvictKv>(&s)) retain.insert(e->retain_tokens);
        if (const auto* q = std::get_if<QuantKv>(&s)) {
            kv_bits.insert(q->precision_bits);
            EXPECT_EQ(q->group_size, 64u);
            EXPECT_EQ(q->residual_tokens, 128u);
        }
    }
    EXPECT_EQ(retain, (std::set<token_count>{2048, 4096, 8192}));
    EXPECT_EQ(kv_bits, (std::set<std::uint32_t>{2, 4, 8}));
    EXPECT_EQ(space.tokens.front(), 2000u);
    EXPECT_EQ(space.tokens.back(), 30000u);
    EXPECT_EQ(space.groups, (std::vector<std::uint32_t>{1, 3, 4, 6, 8, 12, 16}));
}
