"""Per-step guidance over candidate distributions.

Two mutually exclusive strategies: the feature selector explicitly prunes
the context to pairs whose active pseudo-feature carries MI above a
threshold with the target, while logit correction implicitly rescales all
candidate logits by 1 + lambda * (mu_sample / mu_train - 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import CandidateDistribution, ContextPair
from .errors import EmptyPrefixError
from .migraph import MIGraph

MODES = ("feature_selector", "logit_correction", "none")
SCALE_FLOOR = 1e-3


@dataclass(frozen=True)
class GuidanceConfig:
    mode: str = "feature_selector"
    tau: float | None = None       # None -> graph default (training median)
    lam: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown guidance mode {self.mode!r}")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.tau is not None and self.tau < 0:
            raise ValueError("tau must be >= 0")

    def resolve_tau(self, graph: MIGraph) -> float:
        return graph.tau if self.tau is None else self.tau


def select_context(
    graph: MIGraph,
    prefix: list[tuple[ContextPair, int]],
    target: str,
    tau: float,
) -> list[ContextPair]:
    """Keep pairs whose active pseudo-feature has feature-level MI > tau.

    Strictly greater; order follows the prefix (generation) order. An
    empty selection is valid and falls back to marginal scoring.
    """
    j = graph.feature_index(target)
    return [pair for pair, pid in prefix if graph.feature_mi[pid, j] > tau]


def mu_sample(graph: MIGraph, prefix_ids: list[int], target: str) -> float:
    """Mean feature-level MI between the prefix's pseudo-features and target."""
    if not prefix_ids:
        raise EmptyPrefixError(target)
    j = graph.feature_index(target)
    return float(np.mean([graph.feature_mi[pid, j] for pid in prefix_ids]))


def correction_scale(mu_s: float, mu_t: float, lam: float) -> float:
    """c = 1 + lambda * (mu_s / mu_t - 1), floored at SCALE_FLOOR.

    mu_t = 0 disables correction (the ratio is 0/0); the floor prevents a
    negative scale from inverting the candidate ranking.
    """
    if mu_t <= 0.0:
        return 1.0
    return max(1.0 + lam * (mu_s / mu_t - 1.0), SCALE_FLOOR)


def correct_logits(
    dist: CandidateDistribution, mu_s: float, mu_t: float, lam: float
) -> CandidateDistribution:
    c = correction_scale(mu_s, mu_t, lam)
    return CandidateDistribution(dist.target, list(dist.candidates), dist.logits * c)
