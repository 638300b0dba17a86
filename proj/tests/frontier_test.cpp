#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace memplan;

namespace {

CostPoint pt(double cost, double acc, std::string key = "") {
    if (key.empty()) key = std::to_string(cost) + "/" + std::to_string(acc);
    return {cost, CostUnit::bytes, acc, std::move(key)};
}

// Pairwise dominance check, O(n^2).
std::multiset<std::string> oracle_keys(const std::vector<CostPoint>& pts) {
    std::multiset<std::string> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            const bool no_worse = pts[j].cost <= pts[i].cost && pts[j].accuracy >= pts[i].accuracy;
            const bool better = pts[j].cost < pts[i].cost || pts[j].accuracy > pts[i].accuracy;
            dominated = no_worse && better;
        }
        if (!dominated) out.insert(pts[i].config_key);
    }
    return out;
}

std::multiset<std::string> keys(const Frontier& f) {
    std::multiset<std::string> out;
    for (const auto& m : f.members) out.insert(m.point.config_key);
    return out;
}

std::vector<CostPoint> random_points(std::mt19937_64& rng, std::size_t n, bool coarse) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<CostPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        double c = u(rng) * 1000.0, a = u(rng);
        if (coarse) {  // force exact ties on both axes
            c = std::floor(c / 50.0);
            a = std::floor(a * 20.0) / 20.0;
        }
        pts.push_back(pt(c, a, "k" + std::to_string(i)));
    }
    return pts;
}

}  // namespace

TEST(Dominates, Examples) {
    EXPECT_FALSE(dominates(pt(5, 0.6), pt(5, 0.6)));
    EXPECT_TRUE(dominates(pt(4, 0.6), pt(5, 0.6)));
    EXPECT_FALSE(dominates(pt(4, 0.5), pt(5, 0.6)));
    EXPECT_TRUE(dominates(pt(5, 0.7), pt(5, 0.6)));
    CostPoint secs{1, CostUnit::seconds, 0.5, "s"};
    EXPECT_THROW(dominates(pt(1, 0.5), secs), DomainError);
}

TEST(ParetoFrontier, SmallCases) {
    EXPECT_EQ(pareto_frontier({pt(3, 0.4, "a")}).size(), 1u);
    const auto f = pareto_frontier({pt(3, 0.4, "a"), pt(2, 0.5, "b")});
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f.members[0].point.config_key, "b");
    EXPECT_THROW(pareto_frontier({}), DomainError);
    EXPECT_THROW(pareto_frontier({pt(1, 0.5), CostPoint{2, CostUnit::seconds, 0.6, "x"}}), DomainError);
    EXPECT_THROW(pareto_frontier({pt(1, 1.5)}), DomainError);
}

TEST(ParetoFrontier, DuplicatesAreCoOptimal) {
    const auto f = pareto_frontier({pt(2, 0.5, "b"), pt(2, 0.5, "a"), pt(1, 0.3, "c"), pt(2, 0.4, "d")});
    ASSERT_EQ(f.size(), 3u);
    EXPECT_EQ(f.members[0].point.config_key, "c");
    EXPECT_FALSE(f.members[0].co_optimal);
    EXPECT_EQ(f.members[1].point.config_key, "a");
    EXPECT_EQ(f.members[2].point.config_key, "b");
    EXPECT_TRUE(f.members[1].co_optimal);
    EXPECT_TRUE(f.members[2].co_optimal);
}

TEST(ParetoFrontier, MatchesDominanceOracle) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 60; ++i) {
        const std::size_t n = 1 + rng() % 1000;
        const auto pts = random_points(rng, n, i % 2 == 1);
        EXPECT_EQ(keys(pareto_frontier(pts)), oracle_keys(pts)) << "instance " << i;
    }
}

TEST(ParetoFrontier, NoMemberIsDominated) {
    std::mt19937_64 rng(4);
    const auto pts = random_points(rng, 500, true);
    const auto f = pareto_frontier(pts);
    for (const auto& a : f.members)
        for (const auto& p : pts) EXPECT_FALSE(dominates(p, a.point));
}

TEST(ParetoFrontier, Idempotent) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 20; ++i) {
        const auto f = pareto_frontier(random_points(rng, 300, i % 2 == 0));
        std::vector<CostPoint> again;
        for (const auto& m : f.members) again.push_back(m.point);
        const auto g = pareto_frontier(again);
        ASSERT_EQ(g.size(), f.size());
        for (std::size_t k = 0; k < f.size(); ++k) {
            EXPECT_EQ(g.members[k].point.config_key, f.members[k].point.config_key);
            EXPECT_EQ(g.members[k].co_optimal, f.members[k].co_optimal);
        }
    }
}

TEST(ParetoFrontier, AddingDominatedPointChangesNothing) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        auto pts = random_points(rng, 200, false);
        const auto before = keys(pareto_frontier(pts));
        const auto& victim = pts[rng() % pts.size()];
        pts.push_back(pt(victim.cost + 1.0, std::max(0.0, victim.accuracy - 0.01), "dominated"));
        EXPECT_EQ(keys(pareto_frontier(pts)), before);
    }
}

TEST(ParetoFrontier, CostScalingKeepsMembership) {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 20; ++i) {
        auto pts = random_points(rng, 400, i % 2 == 0);
        const auto before = keys(pareto_frontier(pts));
        for (double k : {0.001, 3.0, 1e6}) {
            auto scaled = pts;
            for (auto& p : scaled) p.cost *= k;
            EXPECT_EQ(keys(pareto_frontier(scaled)), before);
        }
    }
}

TEST(Interpolate, Examples) {
    const std::vector<CurvePoint> curve = {{2000, 0.2}, {6000, 0.4}, {10000, 0.5}};
    EXPECT_EQ(interpolate_accuracy(curve, 6000).accuracy, 0.4);
    EXPECT_FALSE(interpolate_accuracy(curve, 6000).clamped);
    EXPECT_DOUBLE_EQ(interpolate_accuracy(curve, 4000).accuracy, 0.3);
    const auto low = interpolate_accuracy(curve, 1000);
    EXPECT_EQ(low.accuracy, 0.2);
    EXPECT_TRUE(low.clamped);
    const auto high = interpolate_accuracy(curve, 30000);
    EXPECT_EQ(high.accuracy, 0.5);
    EXPECT_TRUE(high.clamped);
    EXPECT_THROW(interpolate_accuracy({}, 5), DomainError);
    EXPECT_THROW(interpolate_accuracy({{5, 0.1}, {5, 0.2}}, 5), DomainError);
}

TEST(Composition, RowsEchoRecordsInCostOrder) {
    const auto& ds = testing_support::dataset();
    const auto& cat = testing_support::catalog();
    const auto f = pareto_frontier(cost_points(ds, cat, CostUnit::bytes));
    const auto rows = frontier_composition(f, ds, cat);
    ASSERT_EQ(rows.size(), f.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LE(rows[i - 1].cost, rows[i].cost);
        EXPECT_LT(rows[i - 1].accuracy, rows[i].accuracy);
    }
    for (const auto& r : rows) {
        const auto& rec = ds.at(r.config_key);
        EXPECT_EQ(r.tokens, rec.tokens);
        EXPECT_EQ(r.group, rec.group);
        EXPECT_EQ(r.effective_size_bytes, effective_size_bytes(cat.at(rec.model), weight_quant(rec.weight_bits)));
        EXPECT_EQ(r.cost, static_cast<double>(total_memory_bytes(cat, to_config(rec))));
    }
}

TEST(Composition, SingleRecord) {
    std::istringstream in(
        R"({"schema_version":1,"model":"Qwen3-8B","weight_bits":4,"kv":{"kind":"full"},"tokens":6000,"group":2,"accuracy":0.5})");
    const auto ds = load_measurements(in);
    const auto rows =
        frontier_composition(pareto_frontier(cost_points(ds, testing_support::catalog(), CostUnit::bytes)), ds,
                             testing_support::catalog());
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].model, "Qwen3-8B");
    EXPECT_EQ(rows[0].tokens, 6000u);
    EXPECT_EQ(rows[0].group, 2u);
    Frontier stray;
    stray.members.push_back({pt(1, 0.5, "missing"), false});
    EXPECT_THROW(frontier_composition(stray, ds, testing_support::catalog()), KeyNotFound);
}

TEST(CostPoints, FiltersAndAxes) {
    const auto& ds = testing_support::dataset();
    const auto& cat = testing_support::catalog();
    PointFilter f;
    f.model = "Qwen3-4B";
    f.kv_kind = "evict";
    const auto pts = cost_points(ds, cat, CostUnit::bytes, f);
    EXPECT_EQ(pts.size(), 3u * 8u * 3u);
    for (const auto& p : pts) EXPECT_NE(p.config_key.find("Qwen3-4B|"), std::string::npos);
    EXPECT_EQ(cost_points(ds, cat, CostUnit::seconds).size(), ds.size());
    EXPECT_TRUE(cost_points(ds, cat, CostUnit::inverse_rps).empty());  // fixture has no throughput
    // amortized cost is never above the total
    const auto total = cost_points(ds, cat, CostUnit::bytes, f, 1);
    const auto amort = cost_points(ds, cat, CostUnit::bytes, f, 16);
    for (std::size_t i = 0; i < total.size(); ++i) EXPECT_LT(amort[i].cost, total[i].cost);
}

TEST(Units, ParseAliases) {
    EXPECT_EQ(parse_unit("memory"), CostUnit::bytes);
    EXPECT_EQ(parse_unit("latency"), CostUnit::seconds);
    EXPECT_EQ(parse_unit("throughput"), CostUnit::inverse_rps);
    EXPECT_THROW(parse_unit("watts"), InvalidRequest);
}

TEST(FrontierTable, FrozenColumns) {
    std::vector<CompositionRow> rows(1);
    rows[0].cost = 1024;
    rows[0].accuracy = 0.25;
    rows[0].model = "m";
    rows[0].weight_bits = 8;
    rows[0].kv = "full";
    rows[0].tokens = 2000;
    rows[0].effective_size_bytes = 10;
    std::ostringstream out;
    write_frontier_table(out, rows);
    EXPECT_EQ(out.str(),
              "cost\tunit\taccuracy\tmodel\tweight_bits\tkv\ttokens\tgroup\teffective_size_bytes\tco_optimal\n"
              "1024\tbytes\t0.25\tm\t8\tfull\t2000\t1\t10\t0\n");
}
