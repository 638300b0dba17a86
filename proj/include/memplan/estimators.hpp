#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "memplan/errors.hpp"
#include "memplan/measurements.hpp"

namespace memplan {

/// Largest C(S, G) the exact estimator will enumerate.
inline constexpr std::uint64_t kExactEnumerationCap = 1'000'000;

/// How a vote with several equally frequent answers is resolved.
enum class TiePolicy {
    uniform,         ///< uniform among tied answers; fractional credit in exact mode
    first_sampled,   ///< tied answer with the lowest pool index wins
    count_as_wrong,  ///< any tie scores zero
};

struct ExactMethod {};

struct MonteCarloMethod {
    std::uint64_t resamples = 100'000;
    std::uint64_t seed = 0;
};

using EstimateMethod = std::variant<ExactMethod, MonteCarloMethod>;

/// Fraction of correct samples.
inline double pass_at_1(const SamplePool& pool) {
    if (pool.samples.empty()) throw DomainError("pass@1 of an empty pool");
    std::size_t correct = 0;
    for (const auto& s : pool.samples) correct += s.correct ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(pool.samples.size());
}

/// C(n, k), saturating at uint64 max.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(acc);
}

namespace detail {

/// Answers mapped to dense ids; -1 marks INVALID (abstains).
struct EncodedPool {
    std::vector<int> answer;
    int n_answers = 0;
    int correct_answer = -1;
};

inline EncodedPool encode(const SamplePool& pool) {
    EncodedPool out;
    std::unordered_map<std::string, int> ids;
    out.answer.reserve(pool.samples.size());
    for (const auto& s : pool.samples) {
        if (s.answer_key == kInvalidAnswer) {
            out.answer.push_back(-1);
            continue;
        }
        auto [it, inserted] = ids.emplace(s.answer_key, out.n_answers);
        if (inserted) ++out.n_answers;
        out.answer.push_back(it->second);
        if (s.correct) out.correct_answer = it->second;
    }
    return out;
}

/// Scores one vote over the samples at `idx` (pool order). Returns credit in [0, 1].
/// `pick` is consulted only for uniform ties in sampled mode and returns an index < n.
template <typename Pick>
double score_vote(const EncodedPool& pool, const std::vector<std::size_t>& idx, std::vector<int>& counts,
                  TiePolicy policy, bool fractional, Pick&& pick) {
    std::fill(counts.begin(), counts.end(), 0);
    int best = 0;
    for (auto i : idx) {
        const int a = pool.answer[i];
        if (a >= 0) best = std::max(best, ++counts[a]);
    }
    if (best == 0 || pool.correct_answer < 0) return 0.0;
    if (counts[pool.correct_answer] != best) return 0.0;

    int tied = 0;
    for (int c : counts) tied += (c == best) ? 1 : 0;
    if (tied == 1) return 1.0;

    switch (policy) {
        case TiePolicy::count_as_wrong:
            return 0.0;
        case TiePolicy::first_sampled:
            for (auto i : idx) {
                const int a = pool.answer[i];
                if (a >= 0 && counts[a] == best) return a == pool.correct_answer ? 1.0 : 0.0;
            }
            return 0.0;
        case TiePolicy::uniform:
            if (fractional) return 1.0 / tied;
            return pick(static_cast<std::uint64_t>(tied)) == 0 ? 1.0 : 0.0;
    }
    return 0.0;
}

/// Unbiased integer in [0, n) from a 64-bit engine (rejection sampling).
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

}  // namespace detail

/// Probability that a uniformly random size-G subset of the pool (without replacement)
/// produces a correct majority vote.
inline double maj_at_g(const SamplePool& pool, std::uint32_t group, const EstimateMethod& method = ExactMethod{},
                       TiePolicy policy = TiePolicy::uniform) {
    const std::size_t S = pool.samples.size();
    if (S == 0) throw DomainError("maj@G of an empty pool");
    if (group == 0) throw DomainError("group size G must be >= 1");
    if (group > S)
        throw DomainError("group size " + std::to_string(group) + " exceeds pool size " + std::to_string(S));

    const auto enc = detail::encode(pool);
    std::vector<int> counts(static_cast<std::size_t>(enc.n_answers), 0);
    std::vector<std::size_t> idx(group);

    if (std::holds_alternative<ExactMethod>(method)) {
        const auto total = binomial(S, group);
        if (total > kExactEnumerationCap)
            throw CapacityError("exact maj@" + std::to_string(group) + " over S=" + std::to_string(S) +
                                " needs C(S,G)=" + (total == std::numeric_limits<std::uint64_t>::max()
                                                        ? std::string(">1.8e19")
                                                        : std::to_string(total)) +
                                " subsets (cap " + std::to_string(kExactEnumerationCap) + "); use monte-carlo");
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        auto no_pick = [](std::uint64_t) -> std::uint64_t { return 0; };
        // wins[k]: subsets won with k-way tied credit 1/k. Integer tallies keep the
        // result independent of pool order.
        std::vector<std::uint64_t> wins(static_cast<std::size_t>(enc.n_answers) + 1, 0);
        for (;;) {
            const double credit = detail::score_vote(enc, idx, counts, policy, true, no_pick);
            if (credit > 0.0) ++wins[static_cast<std::size_t>(std::lround(1.0 / credit))];
            // next combination in lexicographic order
            std::size_t i = group;
            while (i > 0 && idx[i - 1] == S - group + (i - 1)) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t k = i; k < group; ++k) idx[k] = idx[k - 1] + 1;
        }
        double sum = 0.0;
        for (std::size_t k = 1; k < wins.size(); ++k)
            sum += static_cast<double>(wins[k]) / static_cast<double>(k);
        return sum / static_cast<double>(total);
    }

    const auto& mc = std::get<MonteCarloMethod>(method);
    if (mc.resamples == 0) throw DomainError("monte-carlo needs at least one resample");
    std::mt19937_64 rng(mc.seed);
    std::vector<std::size_t> perm(S);
    auto pick = [&](std::uint64_t n) { return detail::bounded(rng, n); };
    std::uint64_t hits = 0;
    for (std::uint64_t r = 0; r < mc.resamples; ++r) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t k = 0; k < group; ++k) {
            const auto j = k + detail::bounded(rng, S - k);
            std::swap(perm[k], perm[j]);
        }
        std::copy_n(perm.begin(), group, idx.begin());
        std::sort(idx.begin(), idx.end());  // pool order for first_sampled
        hits += detail::score_vote(enc, idx, counts, policy, false, pick) > 0.5 ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(mc.resamples);
}

/// Configuration fields copied onto a derived record.
struct RecordFields {
    std::string model;
    std::uint32_t weight_bits = 16;
    KvCacheStrategy kv = FullKv{};
    token_count tokens = 0;
    std::optional<double> latency_seconds;
    std::optional<double> throughput_rps;
};

/// Builds a record whose accuracy is the mean per-instance maj@G (pass@1 when G = 1).
inline MeasurementRecord derive_record(const std::vector<SamplePool>& pools, std::uint32_t group,
                                       const RecordFields& fields, const EstimateMethod& method = ExactMethod{},
                                       TiePolicy policy = TiePolicy::uniform) {
    if (pools.empty()) throw DomainError("derive_record needs at least one pool");
    const auto S = pools.front().size();
    for (const auto& p : pools)
        if (p.size() != S) throw DomainError("pools must share one size S");

    double sum = 0.0;
    for (const auto& p : pools) sum += group == 1 ? pass_at_1(p) : maj_at_g(p, group, method, policy);

    MeasurementRecord r;
    r.model = fields.model;
    r.weight_bits = fields.weight_bits;
    r.kv = fields.kv;
    r.tokens = fields.tokens;
    r.group = group;
    r.accuracy = sum / static_cast<double>(pools.size());
    r.latency_seconds = fields.latency_seconds;
    r.throughput_rps = fields.throughput_rps;
    r.pools = pools;
    validate(r);
    return r;
}

}  // namespace memplan
