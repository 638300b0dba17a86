// Acceptance runner. `acceptance` runs every criterion; `acceptance <name>` runs one.
// Prints one PASS/FAIL line per criterion and exits 1 if any failed.

#include <chrono>
#include <cmath>
#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "memplan/memplan.hpp"

using namespace memplan;

namespace {

// Tolerances, pinned here and nowhere else.
constexpr double kWeightTolerance = 0.03;
constexpr double kSixteenBitTolerance = 0.005;
constexpr double kBottleneckRatio = 1.6;
constexpr double kKvTableSeconds = 1.0;
constexpr double kParetoSeconds = 5.0;
constexpr double kMajTolerance = 0.01;
constexpr std::uint64_t kMajResamples = 100'000;
constexpr std::uint64_t kMajSeed = 20250;
constexpr std::size_t kMajMaxPool = 8;
constexpr int kBudgetSweep = 50;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string source_path(const std::string& rel) { return std::string(MEMPLAN_SOURCE_DIR) + "/" + rel; }

const ModelCatalog& catalog() {
    static const auto c = api::load_catalog_file(source_path("data/models/qwen3.json"));
    return c;
}

const Dataset& dataset() {
    static const auto d = api::load_dataset_file(source_path("data/measurements/synthetic_aime_like.jsonl"));
    return d;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::string> kModels = {"Qwen3-0.6B", "Qwen3-1.7B", "Qwen3-4B",
                                          "Qwen3-8B",   "Qwen3-14B",  "Qwen3-32B"};

Outcome kv_table() {
    const std::vector<std::vector<std::string>> printed = {
        {"0.21", "1.92", "3.20", "51.27"}, {"0.21", "1.92", "3.20", "51.27"}, {"0.27", "2.47", "4.12", "65.91"},
        {"0.27", "2.47", "4.12", "65.91"}, {"0.31", "2.75", "4.58", "73.24"}, {"0.49", "4.39", "7.32", "117.19"}};
    const std::vector<std::pair<token_count, std::uint32_t>> cols = {{2000, 1}, {18000, 1}, {30000, 1}, {30000, 16}};
    const auto t0 = std::chrono::steady_clock::now();
    int matches = 0;
    std::ostringstream misses;
    for (std::size_t i = 0; i < kModels.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const auto got =
                format_gib(kv_memory_bytes(catalog().at(kModels[i]), FullKv{}, cols[j].first, cols[j].second));
            if (got == printed[i][j])
                ++matches;
            else
                misses << " " << kModels[i] << "@" << cols[j].first << "x" << cols[j].second << "=" << got
                       << " (printed " << printed[i][j] << ")";
        }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << matches << "/24 cells exact in " << secs << " s;" << (misses.str().empty() ? " no mismatches" : misses.str());
    return {matches == 24 && secs < kKvTableSeconds, d.str()};
}

Outcome kv_per_token() {
    const std::vector<std::uint64_t> kb = {112, 112, 144, 144, 160, 256};
    std::ostringstream d;
    bool ok = true;
    for (std::size_t i = 0; i < kModels.size(); ++i) {
        const auto got = kv_bytes_per_token(catalog().at(kModels[i]));
        ok = ok && got == kb[i] * 1024;
        d << (i ? " " : "") << kModels[i] << "=" << got / 1024.0 << "KB";
    }
    return {ok, d.str()};
}

Outcome weight_table() {
    const std::vector<std::vector<double>> printed = {{0.50, 0.71, 1.40},  {1.26, 1.93, 3.78},   {2.49, 4.19, 7.49},
                                                      {5.68, 8.94, 15.26}, {9.30, 15.50, 27.51}, {18.01, 32.66, 61.02}};
    const std::vector<std::uint32_t> bits = {4, 8, 16};
    int within = 0;
    bool sixteen_ok = true;
    double worst = 0.0;
    std::string worst_cell;
    for (std::size_t i = 0; i < kModels.size(); ++i)
        for (std::size_t j = 0; j < bits.size(); ++j) {
            const double got = to_gib(weight_memory_bytes(catalog().at(kModels[i]), weight_quant(bits[j])));
            const double rel = std::abs(got - printed[i][j]) / printed[i][j];
            if (rel <= kWeightTolerance) ++within;
            if (bits[j] == 16 && rel > kSixteenBitTolerance) sixteen_ok = false;
            if (rel > worst) {
                worst = rel;
                worst_cell = kModels[i] + "@" + std::to_string(bits[j]) + "bit=" + format_gib(weight_memory_bytes(
                                                                                      catalog().at(kModels[i]),
                                                                                      weight_quant(bits[j])));
            }
        }
    std::ostringstream d;
    d << within << "/18 cells within 3%; 16-bit column " << (sixteen_ok ? "within" : "outside") << " 0.5%; worst "
      << worst_cell << " off by " << worst * 100.0 << "%";
    return {within == 18 && sixteen_ok, d.str()};
}

Outcome bottleneck() {
    const auto& m = catalog().at("Qwen3-4B");
    const auto w = effective_size_bytes(m, weight_quant(4));
    const auto kv = kv_memory_bytes(m, FullKv{}, 30000, 1);
    const double ratio = static_cast<double>(kv) / static_cast<double>(w);
    std::ostringstream d;
    d << "weights " << format_gib(w) << " GiB, KV@30000 " << format_gib(kv) << " GiB, ratio " << ratio;
    return {format_gib(w) == "2.49" && format_gib(kv) == "4.12" && ratio > kBottleneckRatio, d.str()};
}

std::multiset<std::string> oracle_keys(const std::vector<CostPoint>& pts) {
    std::multiset<std::string> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
            dominated = pts[j].cost <= pts[i].cost && pts[j].accuracy >= pts[i].accuracy &&
                        (pts[j].cost < pts[i].cost || pts[j].accuracy > pts[i].accuracy);
        if (!dominated) out.insert(pts[i].config_key);
    }
    return out;
}

Outcome pareto_oracle() {
    std::mt19937_64 rng(1000);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int equal = 0;
    double sweep_secs = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int inst = 0; inst < 100; ++inst) {
        std::vector<CostPoint> pts;
        for (int i = 0; i < 1000; ++i) {
            double c = u(rng) * 1e9, a = u(rng);
            if (inst % 2) c = std::floor(c / 5e7), a = std::floor(a * 20.0) / 20.0;  // forces ties
            pts.push_back({c, CostUnit::bytes, a, "p" + std::to_string(i)});
        }
        const auto s0 = std::chrono::steady_clock::now();
        const auto f = pareto_frontier(pts);
        sweep_secs += seconds_since(s0);
        std::multiset<std::string> got;
        for (const auto& mem : f.members) got.insert(mem.point.config_key);
        if (got == oracle_keys(pts)) ++equal;
    }
    const double total = seconds_since(t0);
    std::ostringstream d;
    d << equal << "/100 instances set-equal; sweep " << sweep_secs << " s, with oracle " << total << " s";
    return {equal == 100 && total < kParetoSeconds, d.str()};
}

Outcome maj_estimator() {
    const auto pools = api::load_pools_file(source_path("data/pools/acceptance_pools.jsonl"));
    std::size_t checked = 0, cases = 0;
    double worst = 0.0;
    bool pass1_exact = true;
    for (const auto& p : pools) {
        if (p.size() > kMajMaxPool) continue;
        ++checked;
        if (maj_at_g(p, 1) != pass_at_1(p)) pass1_exact = false;
        for (std::uint32_t g = 1; g <= p.size(); ++g)
            for (auto tie : {TiePolicy::uniform, TiePolicy::first_sampled, TiePolicy::count_as_wrong}) {
                const double exact = maj_at_g(p, g, ExactMethod{}, tie);
                const double mc = maj_at_g(p, g, MonteCarloMethod{kMajResamples, kMajSeed}, tie);
                worst = std::max(worst, std::abs(exact - mc));
                ++cases;
            }
    }
    std::ostringstream d;
    d << checked << " of " << pools.size() << " pools with S<=8, " << cases << " (G, tie) cases; max |MC-exact| "
      << worst << "; maj@1==pass@1 " << (pass1_exact ? "exact" : "VIOLATED");
    return {pools.size() == 50 && checked > 0 && worst <= kMajTolerance && pass1_exact, d.str()};
}

struct Reference {
    std::string key;
    double accuracy;
};

// Scans raw records with the tie order spelled out as a tuple.
std::optional<Reference> brute_force(double budget) {
    std::optional<Reference> best;
    std::tuple<double, double, token_count, std::uint32_t, int, std::string, std::string> best_rank;
    for (const auto& r : dataset().records()) {
        const double cost = static_cast<double>(total_memory_bytes(catalog(), to_config(r)));
        if (cost > budget) continue;
        auto rank = std::make_tuple(-r.accuracy, cost, r.tokens, r.group, -static_cast<int>(r.weight_bits), r.model,
                                    descriptor(r.kv));
        if (!best || rank < best_rank) best = Reference{record_key(r), r.accuracy}, best_rank = rank;
    }
    return best;
}

Outcome planner_properties() {
    const auto space = space_from_dataset(dataset());
    PlanRequest probe;
    const auto candidates = score_candidates(catalog(), dataset(), space, probe);
    double lo = candidates.front().cost, hi = lo;
    for (const auto& c : candidates) lo = std::min(lo, c.cost), hi = std::max(hi, c.cost);

    int feasible = 0, member = 0, monotone = 0, deterministic = 0, agree = 0;
    double previous = -1.0;
    for (int i = 0; i < kBudgetSweep; ++i) {
        PlanRequest req;
        req.budget = lo * std::pow(hi / lo, static_cast<double>(i) / (kBudgetSweep - 1));
        const auto rec = plan(catalog(), dataset(), space, req);
        if (static_cast<double>(rec.memory_bytes) <= req.budget) ++feasible;
        bool undominated = true;
        for (const auto& c : candidates)
            if (c.cost <= req.budget && c.cost <= rec.cost && c.accuracy >= rec.achieved_accuracy &&
                (c.cost < rec.cost || c.accuracy > rec.achieved_accuracy))
                undominated = false;
        if (undominated) ++member;
        if (rec.achieved_accuracy >= previous) ++monotone;
        previous = rec.achieved_accuracy;
        const auto again = plan(catalog(), dataset(), space, req);
        if (again.chosen == rec.chosen && again.achieved_accuracy == rec.achieved_accuracy) ++deterministic;
        const auto ref = brute_force(req.budget);
        if (ref && ref->key == record_key(rec.chosen) && ref->accuracy == rec.achieved_accuracy) ++agree;
    }
    std::ostringstream d;
    d << "over " << kBudgetSweep << " budgets: feasible " << feasible << ", frontier member " << member
      << ", monotone " << monotone << ", deterministic " << deterministic << ", brute-force agreement " << agree;
    const bool all = feasible == kBudgetSweep && member == kBudgetSweep && monotone == kBudgetSweep &&
                     deterministic == kBudgetSweep && agree == kBudgetSweep;
    return {all, d.str()};
}

Outcome schema_axes() {
    std::ifstream in(source_path("data/manifests/paper_grid.json"));
    const auto manifest = nlohmann::json::parse(in);
    const auto space = requests::space_request(manifest["space"]);
    const auto configs = enumerate_configs(space);

    std::ostringstream file;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& c = configs[i];
        MeasurementRecord r;
        r.model = c.model;
        r.weight_bits = c.weight_quant.precision_bits;
        r.kv = c.kv;
        r.tokens = c.tokens;
        r.group = c.group;
        r.accuracy = static_cast<double>(i % 101) / 100.0;
        file << to_json(r).dump() << '\n';
    }
    std::istringstream back(file.str());
    const auto ds = load_measurements(back);
    std::size_t same = 0;
    for (std::size_t i = 0; i < configs.size(); ++i)
        if (to_config(ds.records()[i]) == configs[i]) ++same;
    std::ostringstream again;
    export_measurements(again, ds);

    std::set<token_count> retain;
    std::set<std::uint32_t> kv_bits;
    for (const auto& s : space.kv) {
        if (const auto* e = std::get_if<EvictKv>(&s)) retain.insert(e->retain_tokens);
        if (const auto* q = std::get_if<QuantKv>(&s)) kv_bits.insert(q->precision_bits);
    }
    const bool axes = space.models.size() == 6 && space.tokens.front() == 2000 && space.tokens.back() == 30000 &&
                      space.groups == std::vector<std::uint32_t>{1, 3, 4, 6, 8, 12, 16} &&
                      retain == std::set<token_count>{2048, 4096, 8192} &&
                      kv_bits == std::set<std::uint32_t>{2, 4, 8};
    std::ostringstream d;
    d << same << "/" << configs.size() << " grid configs round-trip (manifest expects "
      << manifest["expected_count"].get<std::size_t>() << "); byte-identical re-export "
      << (again.str() == file.str() ? "yes" : "no") << "; axis values " << (axes ? "present" : "missing");
    const bool ok = configs.size() == manifest["expected_count"].get<std::size_t>() && same == configs.size() &&
                    again.str() == file.str() && axes;
    return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"kv_table", kv_table},           {"kv_per_token", kv_per_token},
        {"weight_table", weight_table},   {"bottleneck", bottleneck},
        {"pareto_oracle", pareto_oracle}, {"maj_estimator", maj_estimator},
        {"planner_properties", planner_properties}, {"schema_axes", schema_axes},
    };
    std::vector<std::string> wanted(argv + 1, argv + argc);
    bool any_failed = false, ran = false;
    for (const auto& [name, run] : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
        ran = true;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        any_failed = any_failed || !o.pass;
    }
    if (!ran) {
        std::cerr << "unknown criterion\n";
        return 2;
    }
    return any_failed ? 1 : 0;
}
