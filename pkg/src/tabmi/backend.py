"""Generator backends: candidate scoring for a target feature given context.

Two backends share one contract: score(context, target) returns one
unnormalized logit (nats) per legal candidate value of the target. The
built-in backend is a smoothed product-of-conditionals over the context's
active pseudo-features, fit in one pass over the training split. The HTTP
backend forwards requests to an external scorer over a JSON protocol
(values transported as strings; the engine owns parsing).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import CATEGORICAL, NUMERICAL, Table, Value
from .errors import BackendUnavailableError, UnknownFeatureError
from .migraph import MIGraph
from .pseudofeatures import BinLayout, assign_bin, bin_index_column

LAPLACE_ALPHA = 0.5


def format_value(v: Value) -> str:
    """Shortest decimal rendering; integral floats drop the fraction."""
    if isinstance(v, str):
        return v
    f = float(v)
    if f == int(f) and abs(f) < 1e16:
        return str(int(f))
    return repr(f)


@dataclass(frozen=True)
class ContextPair:
    feature: str
    value: Value


@dataclass
class CandidateDistribution:
    """Target feature, ordered candidate values, and parallel raw logits."""

    target: str
    candidates: list[Value]
    logits: np.ndarray

    def __post_init__(self):
        self.logits = np.asarray(self.logits, dtype=float)
        if len(self.candidates) != len(self.logits) or len(self.candidates) == 0:
            raise ValueError("candidates and logits must be parallel and non-empty")
        if len(set(map(format_value, self.candidates))) != len(self.candidates):
            raise ValueError("duplicate candidates")
        if not np.all(np.isfinite(self.logits)):
            raise ValueError("non-finite logits")


def textualize(pairs: list[ContextPair]) -> str:
    """Comma-joined "feature is value" phrases."""
    return ", ".join(f"{p.feature} is {format_value(p.value)}" for p in pairs)


def candidate_values(layout: BinLayout, target: str) -> list[Value]:
    """Legal candidate set: all categories, or one representative per bin.

    Numerical representatives are bin midpoints; they always map back to
    their own bin under the half-open assignment rule.
    """
    if target in layout.categories:
        return list(layout.categories[target])
    if target in layout.cuts:
        cuts = layout.cuts[target]
        return [(cuts[i] + cuts[i + 1]) / 2.0 for i in range(len(cuts) - 1)]
    raise UnknownFeatureError(target)


class CountBackend:
    """Naive-Bayes-style conditional-count scorer.

    logit(c) = log P(c) + sum_p [log P(c | p) - log P(c)] over the active
    context pseudo-features p, with Laplace smoothing alpha on all counts.
    With an empty context the logits are the smoothed marginal
    log-frequencies.
    """

    def __init__(self, layout: BinLayout, log_marg: dict, log_cond: dict, n: int,
                 alpha: float = LAPLACE_ALPHA):
        self.layout = layout
        self.log_marg = log_marg      # feature -> (k_f,) log marginal probs
        self.log_cond = log_cond      # feature -> (P, k_f) log conditional probs
        self.n = n
        self.alpha = alpha

    @classmethod
    def fit(cls, train: Table, layout: BinLayout,
            alpha: float = LAPLACE_ALPHA) -> "CountBackend":
        from .pseudofeatures import activation_matrix

        x = activation_matrix(train, layout)
        n = len(train)
        n_p = x.sum(axis=0)                       # pseudo marginal counts
        log_marg = {}
        log_cond = {}
        for f in layout.feature_order:
            k = layout.count(f)
            bins = bin_index_column(train, layout, f)
            t = np.zeros((n, k))
            t[np.arange(n), bins] = 1.0
            marg = t.sum(axis=0)
            cond = x.T @ t                        # (P, k) joint counts
            log_marg[f] = np.log((marg + alpha) / (n + alpha * k))
            log_cond[f] = np.log(
                (cond + alpha) / (n_p[:, None] + alpha * k)
            )
        return cls(layout, log_marg, log_cond, n, alpha)

    def score(self, context: list[ContextPair], target: str) -> CandidateDistribution:
        if target not in self.layout.feature_order:
            raise UnknownFeatureError(target)
        logits = self.log_marg[target].copy()
        base = self.log_marg[target]
        for pair in context:
            if pair.feature == target:
                raise ValueError("target present in context")
            pid = assign_bin(self.layout, pair.feature, pair.value)
            logits = logits + (self.log_cond[target][pid] - base)
        return CandidateDistribution(
            target, candidate_values(self.layout, target), logits
        )

    def state_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n": self.n,
            "log_marg": {f: v.tolist() for f, v in self.log_marg.items()},
            "log_cond": {f: v.tolist() for f, v in self.log_cond.items()},
        }

    @classmethod
    def from_state(cls, layout: BinLayout, raw: dict) -> "CountBackend":
        return cls(
            layout,
            {f: np.asarray(v) for f, v in raw["log_marg"].items()},
            {f: np.asarray(v) for f, v in raw["log_cond"].items()},
            int(raw["n"]),
            float(raw["alpha"]),
        )


class HttpBackend:
    """Client for the external scoring protocol.

    POST {base}/v1/score with {"context": [{"feature", "value"}...],
    "target": str, "candidates": [str...]} -> {"logits": [float...]};
    GET {base}/v1/health -> {"ok": true, "max_in_flight": int}.
    """

    def __init__(self, base_url: str, layout: BinLayout, timeout: float = 30.0):
        import requests

        self.base_url = base_url.rstrip("/")
        self.layout = layout
        self.timeout = timeout
        self._session = requests.Session()
        self.max_in_flight = self.health().get("max_in_flight", 1)

    def health(self) -> dict:
        import requests

        try:
            resp = self._session.get(
                f"{self.base_url}/v1/health", timeout=self.timeout
            )
            resp.raise_for_status()
            payload = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise BackendUnavailableError(str(exc)) from exc
        if not payload.get("ok"):
            raise BackendUnavailableError(f"unhealthy backend: {payload}")
        return payload

    def score(self, context: list[ContextPair], target: str) -> CandidateDistribution:
        import requests

        candidates = candidate_values(self.layout, target)
        body = {
            "context": [
                {"feature": p.feature, "value": format_value(p.value)}
                for p in context
            ],
            "target": target,
            "candidates": [format_value(c) for c in candidates],
        }
        try:
            resp = self._session.post(
                f"{self.base_url}/v1/score", json=body, timeout=self.timeout
            )
            resp.raise_for_status()
            logits = resp.json()["logits"]
        except (requests.RequestException, ValueError, KeyError) as exc:
            raise BackendUnavailableError(str(exc)) from exc
        if len(logits) != len(candidates):
            raise BackendUnavailableError(
                f"backend returned {len(logits)} logits for "
                f"{len(candidates)} candidates"
            )
        return CandidateDistribution(target, candidates, np.asarray(logits, float))


def fit_builtin(train: Table, layout: BinLayout, graph: MIGraph | None = None,
                alpha: float = LAPLACE_ALPHA) -> CountBackend:
    """Fit the built-in conditional-count backend on the training split."""
    return CountBackend.fit(train, layout, alpha)


def score_candidates(backend, context: list[ContextPair],
                     target: str) -> CandidateDistribution:
    """Uniform entry point over backend implementations."""
    return backend.score(context, target)
