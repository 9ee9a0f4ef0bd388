"""Autoregressive row synthesis.

Each record is generated feature by feature in a fresh uniformly random
order, guided per step by the configured strategy, with nucleus sampling
over the (possibly corrected) candidate distribution and a vocabulary
constraint that makes schema violations impossible by construction. Every
record owns an rng stream derived from (seed, record index), so parallel
and serial runs produce identical corpora.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backend import CandidateDistribution, ContextPair, format_value
from .dataset import CATEGORICAL, NUMERICAL, FeatureSchema, Record, Value
from .engine import Engine
from .errors import BackendUnavailableError, NoLegalCandidateError
from .guidance import correction_scale, mu_sample, select_context
from .pseudofeatures import BinLayout, assign_bin


@dataclass(frozen=True)
class SamplerConfig:
    nucleus_p: float = 0.95
    temperature: float = 1.0
    seed: int = 0
    prefix_mode: str = "prompt_only"   # or "seed_k"
    seed_k: int = 0
    max_attempts: int = 8

    def __post_init__(self):
        if not 0 < self.nucleus_p <= 1:
            raise ValueError("nucleus_p must be in (0, 1]")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.prefix_mode not in ("prompt_only", "seed_k"):
            raise ValueError(f"unknown prefix_mode {self.prefix_mode!r}")
        if self.prefix_mode == "seed_k" and self.seed_k < 1:
            raise ValueError("seed_k mode requires seed_k >= 1")


def conservative_preset(seed: int = 0, **kwargs) -> SamplerConfig:
    """Narrower-nucleus preset (p = 0.7) for lower-variance sampling."""
    return SamplerConfig(nucleus_p=0.7, temperature=1.0, seed=seed, **kwargs)


@dataclass(frozen=True)
class SynthRecord:
    values: Record
    provenance: dict[str, dict]


def nucleus_sample(
    dist: CandidateDistribution,
    p: float,
    temperature: float,
    rng: np.random.Generator,
) -> Value:
    """Top-p sampling: softmax at the given temperature, keep the smallest
    probability-sorted prefix with cumulative mass >= p, renormalize, draw.
    Ties are broken by candidate order (stable sort)."""
    z = dist.logits / temperature
    z = z - z.max()
    probs = np.exp(z)
    probs /= probs.sum()
    order = np.argsort(-probs, kind="stable")
    cum = np.cumsum(probs[order])
    cut = int(np.searchsorted(cum, p - 1e-12)) + 1
    kept = order[:cut]
    kp = probs[kept] / probs[kept].sum()
    idx = int(rng.choice(len(kept), p=kp))
    return dist.candidates[kept[idx]]


def constrain(
    dist: CandidateDistribution, schema: FeatureSchema, layout: BinLayout
) -> CandidateDistribution:
    """Drop candidates outside the target's legal value set.

    Built-in candidates are legal by construction, so this is usually the
    identity; it guards external backends. Raises NoLegalCandidateError
    when everything is filtered.
    """
    kind = schema.kind_of(dist.target)
    keep: list[int] = []
    for i, c in enumerate(dist.candidates):
        if kind == CATEGORICAL:
            if str(c) in layout.categories.get(dist.target, ()):
                keep.append(i)
        else:
            try:
                v = float(c)
            except (TypeError, ValueError):
                continue
            cuts = layout.cuts[dist.target]
            if cuts[0] <= v <= cuts[-1]:
                keep.append(i)
    if not keep:
        raise NoLegalCandidateError(dist.target)
    if len(keep) == len(dist.candidates):
        return dist
    return CandidateDistribution(
        dist.target, [dist.candidates[i] for i in keep], dist.logits[keep]
    )


def _value_from_bin(
    engine: Engine, feature: str, candidate: Value, rng: np.random.Generator
) -> float:
    """Concrete numeric value for a chosen bin representative.

    Draws uniformly from the bin's empirical training values; bins holding
    fewer than 3 distinct values fall back to uniform on the interval.
    """
    local = engine.layout.local_bin(feature, candidate)
    vals = engine.bin_values[feature][local]
    if len(set(vals)) >= 3:
        return float(vals[int(rng.integers(len(vals)))])
    lo, hi = engine.layout.bin_interval(feature, local)
    if lo == hi:
        return lo
    return float(rng.uniform(lo, hi))


def _score_step(
    engine: Engine,
    prefix: list[tuple[ContextPair, int]],
    target: str,
) -> tuple[CandidateDistribution, dict]:
    """Apply the configured guidance and return (distribution, provenance)."""
    mode = engine.guidance.mode
    if mode == "feature_selector":
        tau = engine.guidance.resolve_tau(engine.graph)
        selected = select_context(engine.graph, prefix, target, tau)
        dist = engine.backend.score(selected, target)
        return dist, {"mode": mode, "context": len(selected), "delta": 0.0}
    if mode == "logit_correction":
        pairs = [pair for pair, _ in prefix]
        dist = engine.backend.score(pairs, target)
        delta = 0.0
        if prefix:
            mu_t = engine.graph.mu[target]
            if mu_t > 0:
                mu_s = mu_sample(engine.graph, [pid for _, pid in prefix], target)
                delta = mu_s / mu_t - 1.0
                c = correction_scale(mu_s, mu_t, engine.guidance.lam)
                dist = CandidateDistribution(
                    dist.target, list(dist.candidates), dist.logits * c
                )
        return dist, {"mode": mode, "context": len(prefix), "delta": delta}
    # mode "none": marginal-only context
    dist = engine.backend.score([], target)
    return dist, {"mode": mode, "context": 0, "delta": 0.0}


def sample_record(
    engine: Engine, config: SamplerConfig, record_index: int = 0
) -> SynthRecord:
    rng = np.random.default_rng([config.seed, record_index])
    names = engine.schema.names
    order = [names[i] for i in rng.permutation(len(names))]

    values: Record = {}
    provenance: dict[str, dict] = {}
    prefix: list[tuple[ContextPair, int]] = []

    def push(feature: str, value: Value) -> None:
        values[feature] = value
        prefix.append(
            (ContextPair(feature, value), assign_bin(engine.layout, feature, value))
        )

    start = 0
    if config.prefix_mode == "seed_k":
        if engine.train_rows is None:
            raise ValueError("seed_k mode requires training rows on the engine")
        if config.seed_k >= len(names):
            raise ValueError("seed_k must be < number of features")
        row = engine.train_rows[int(rng.integers(len(engine.train_rows)))]
        for f in order[: config.seed_k]:
            push(f, row[f])
            provenance[f] = {"mode": "seeded", "context": 0, "delta": 0.0,
                             "attempts": 0}
        start = config.seed_k

    for target in order[start:]:
        dist, prov = _score_step(engine, prefix, target)
        attempts = 0
        while True:
            try:
                legal = constrain(dist, engine.schema, engine.layout)
                candidate = nucleus_sample(
                    legal, config.nucleus_p, config.temperature, rng
                )
                break
            except NoLegalCandidateError:
                attempts += 1
                if attempts >= config.max_attempts:
                    # forced resolution: argmax over whatever is legal; if
                    # nothing is, the backend broke its contract
                    try:
                        legal = constrain(dist, engine.schema, engine.layout)
                    except NoLegalCandidateError:
                        raise BackendUnavailableError(
                            f"no legal candidate for {target!r}"
                        ) from None
                    candidate = legal.candidates[int(np.argmax(legal.logits))]
                    break
        if engine.schema.kind_of(target) == NUMERICAL:
            value: Value = _value_from_bin(engine, target, candidate, rng)
        else:
            value = candidate
        push(target, value)
        prov["attempts"] = attempts
        provenance[target] = prov

    return SynthRecord(values, provenance)


def synthesize(
    engine: Engine, count: int, config: SamplerConfig, threads: int = 1
) -> list[SynthRecord]:
    """Generate `count` records; output is identical for any thread count."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(
                pool.map(lambda i: sample_record(engine, config, i), range(count))
            )
    return [sample_record(engine, config, i) for i in range(count)]


def records_to_table(schema: FeatureSchema, records: list[SynthRecord]):
    from .dataset import make_table

    return make_table(schema, [r.values for r in records])
