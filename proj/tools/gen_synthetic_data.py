#!/usr/bin/env python3
"""Regenerates the synthetic fixtures under data/.

The accuracies are hand-shaped curves, not measurements: they saturate with the
token budget, grow with effective size, lose a little at 4-bit, gain from
majority voting on larger models, and plateau under eviction. They exist to
exercise the planner and frontier machinery end to end.
"""
import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
MODELS = {  # name -> (billions of params, n_layers)
    "Qwen3-0.6B": (0.6, 28),
    "Qwen3-1.7B": (1.7, 28),
    "Qwen3-4B": (4.0, 36),
    "Qwen3-8B": (8.0, 36),
    "Qwen3-14B": (14.0, 40),
    "Qwen3-32B": (32.0, 64),
}
BITS = [4, 8, 16]
TOKENS = list(range(2000, 30001, 4000))
GROUPS = [1, 4, 8]
KV = [
    {"kind": "full"},
    {"kind": "evict", "retain_tokens": 4096},
    {"kind": "quant", "precision_bits": 4, "group_size": 64, "scale_bits": 16,
     "zero_point_bits": 0, "residual_tokens": 128},
]


def accuracy(params_b, bits, tokens, group, kv, rng):
    capacity = math.log2(params_b / 0.3)
    ceiling = 0.9 * (1 - math.exp(-0.45 * capacity))
    if bits == 4:
        ceiling *= 0.9
    elif bits == 8:
        ceiling *= 0.99
    tau = 3000 + 1500 * capacity
    eff_tokens = tokens
    if kv["kind"] == "evict":
        eff_tokens = min(tokens, 4096) + 0.6 * max(tokens - 4096, 0)
    acc = ceiling * (1 - math.exp(-eff_tokens / tau))
    if kv["kind"] == "quant":
        acc *= 0.97 if params_b >= 8 else 0.85
    if group > 1:
        gain = 0.04 * math.log2(group) * (1.0 if params_b >= 4 else 0.3)
        acc = acc + gain * (1 - acc)
    acc += rng.uniform(-0.005, 0.005)
    return round(min(max(acc, 0.0), 1.0), 4)


def latency(params_b, bits, tokens, group):
    per_token = 0.004 + 0.0011 * params_b * (bits / 16) ** 0.5
    return round(tokens * per_token * (1 + 0.05 * (group - 1)), 3)


def measurements():
    rng = random.Random(20251019)
    lines = []
    for name, (params_b, _) in MODELS.items():
        for bits in BITS:
            for kv in KV:
                for t in TOKENS:
                    for g in GROUPS:
                        rec = {
                            "schema_version": 1,
                            "model": name,
                            "weight_bits": bits,
                            "kv": kv,
                            "tokens": t,
                            "group": g,
                            "accuracy": accuracy(params_b, bits, t, g, kv, rng),
                            "latency_seconds": latency(params_b, bits, t, g),
                        }
                        lines.append(json.dumps(rec, separators=(",", ":")))
    return lines


def pools():
    rng = random.Random(7)
    lines = []
    for i in range(12):
        s = 8
        p_correct = rng.uniform(0.1, 0.8)
        samples = []
        for _ in range(s):
            if rng.random() < p_correct:
                samples.append({"answer_key": "42", "correct": True})
            elif rng.random() < 0.1:
                samples.append({"answer_key": "INVALID", "correct": False})
            else:
                samples.append({"answer_key": str(rng.choice([7, 13, 99])), "correct": False})
        lines.append(json.dumps({"schema_version": 1, "instance_id": f"demo-{i:02d}", "samples": samples},
                                separators=(",", ":")))
    return lines


if __name__ == "__main__":
    (ROOT / "data/measurements/synthetic_aime_like.jsonl").write_text("\n".join(measurements()) + "\n")
    (ROOT / "data/pools/demo_pools.jsonl").write_text("\n".join(pools()) + "\n")
