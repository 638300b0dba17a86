#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>

#include "memplan/errors.hpp"
#include "memplan/model_spec.hpp"
#include "memplan/units.hpp"

namespace memplan {

/// One point in the configuration space.
struct InferenceConfig {
    std::string model;
    WeightQuantSpec weight_quant;
    KvCacheStrategy kv = FullKv{};
    token_count tokens = 0;
    std::uint32_t group = 1;
    std::uint32_t batch = 1;

    bool operator==(const InferenceConfig&) const = default;
};

inline void validate(const InferenceConfig& c) {
    validate(c.weight_quant);
    validate(c.kv);
    if (c.group == 0) throw DomainError("group size G must be >= 1");
    if (c.batch == 0) throw DomainError("amortization batch B must be >= 1");
}

/// Key/value elements cached per token: n_layers * n_kv_heads * d_head * 2.
inline std::uint64_t kv_elements_per_token(const ModelSpec& spec) {
    return static_cast<std::uint64_t>(spec.n_layers) * spec.n_kv_heads * spec.d_head * 2u;
}

/// Full-precision KV bytes per cached token.
inline byte_count kv_bytes_per_token(const ModelSpec& spec) {
    const auto bits = detail::mul(kv_elements_per_token(spec), spec.native_precision_bits);
    return detail::narrow(bits / 8u);
}

/// Weights: N_quant * (P_W/8 + (P_S+P_Z)/(8 g_W)) + N_unquant * P_native/8.
/// Summed as bits over a common denominator 8*g_W and floored once.
inline byte_count weight_memory_bytes(const ModelSpec& spec, const WeightQuantSpec& quant) {
    validate(quant);
    using detail::add;
    using detail::mul;
    using detail::u128;

    if (quant.precision_bits == 16) {
        const u128 bits = mul(add(spec.n_params_quantizable, spec.n_params_unquantizable),
                              spec.native_precision_bits);
        return detail::narrow(bits / 8u);
    }
    const u128 g = quant.group_size;
    const u128 per_group_bits = add(mul(quant.precision_bits, g), quant.scale_bits + quant.zero_point_bits);
    const u128 numerator = add(mul(spec.n_params_quantizable, per_group_bits),
                               mul(mul(spec.n_params_unquantizable, spec.native_precision_bits), g));
    return detail::narrow(numerator / mul(8u, g));
}

/// Memory footprint of the weights; the scale variable for planner thresholds.
inline byte_count effective_size_bytes(const ModelSpec& spec, const WeightQuantSpec& quant) {
    return weight_memory_bytes(spec, quant);
}

/// KV cache bytes for G generations of T cached tokens each.
///
/// Full:  G * T * bytes_per_token
/// Evict: G * min(T, retain) * bytes_per_token
/// Quant: G * [min(T, residual) * bytes_per_token
///             + max(T - residual, 0) * elements_per_token * (P_kv/8 + (P_S+P_Z)/(8 g_kv))]
///
/// T counts every cached token, prompt included.
inline byte_count kv_memory_bytes(const ModelSpec& spec, const KvCacheStrategy& strategy,
                                  token_count tokens, std::uint32_t group) {
    if (group == 0) throw DomainError("group size G must be >= 1");
    validate(strategy);
    using detail::add;
    using detail::mul;
    using detail::u128;

    const byte_count per_token = kv_bytes_per_token(spec);
    return std::visit(
        [&](const auto& s) -> byte_count {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FullKv>) {
                return detail::narrow(mul(mul(group, tokens), per_token));
            } else if constexpr (std::is_same_v<T, EvictKv>) {
                return detail::narrow(mul(mul(group, std::min(tokens, s.retain_tokens)), per_token));
            } else {
                const token_count full_tokens = std::min(tokens, s.residual_tokens);
                const token_count quant_tokens = tokens - full_tokens;
                const u128 g = s.group_size;
                // bits * g, summed over one generation
                const u128 full_part = mul(mul(mul(full_tokens, per_token), 8u), g);
                const u128 quant_part =
                    mul(mul(quant_tokens, kv_elements_per_token(spec)),
                        add(mul(s.precision_bits, g), s.scale_bits + s.zero_point_bits));
                const u128 numerator = mul(group, add(full_part, quant_part));
                return detail::narrow(numerator / mul(8u, g));
            }
        },
        strategy);
}

inline byte_count total_memory_bytes(const ModelSpec& spec, const InferenceConfig& config) {
    validate(config);
    const auto w = weight_memory_bytes(spec, config.weight_quant);
    const auto kv = kv_memory_bytes(spec, config.kv, config.tokens, config.group);
    return detail::narrow(detail::add(w, kv));
}

inline byte_count total_memory_bytes(const ModelCatalog& catalog, const InferenceConfig& config) {
    return total_memory_bytes(catalog.at(config.model), config);
}

/// Per-generation memory when B concurrent generations share one copy of the weights:
/// floor(weight_bytes / B + kv_bytes).
inline byte_count amortized_memory_bytes(const ModelSpec& spec, const InferenceConfig& config,
                                         std::uint32_t batch) {
    if (batch == 0) throw DomainError("amortization batch B must be >= 1");
    validate(config);
    const auto w = weight_memory_bytes(spec, config.weight_quant);
    const auto kv = kv_memory_bytes(spec, config.kv, config.tokens, config.group);
    // floor(w/B + kv) == floor(w/B) + kv because kv is integral
    return detail::narrow(detail::add(w / batch, kv));
}

inline byte_count amortized_memory_bytes(const ModelCatalog& catalog, const InferenceConfig& config,
                                         std::uint32_t batch) {
    return amortized_memory_bytes(catalog.at(config.model), config, batch);
}

/// Everything the `memory` command and endpoint report.
struct MemoryBreakdown {
    byte_count weights = 0;
    byte_count kv_cache = 0;
    byte_count total = 0;
    byte_count amortized = 0;
    std::uint32_t batch = 1;
    byte_count kv_per_token = 0;
};

inline MemoryBreakdown memory_breakdown(const ModelCatalog& catalog, const InferenceConfig& config) {
    const auto& spec = catalog.at(config.model);
    validate(config);
    MemoryBreakdown out;
    out.weights = weight_memory_bytes(spec, config.weight_quant);
    out.kv_cache = kv_memory_bytes(spec, config.kv, config.tokens, config.group);
    out.total = total_memory_bytes(spec, config);
    out.amortized = amortized_memory_bytes(spec, config, config.batch);
    out.batch = config.batch;
    out.kv_per_token = kv_bytes_per_token(spec);
    return out;
}

}  // namespace memplan
