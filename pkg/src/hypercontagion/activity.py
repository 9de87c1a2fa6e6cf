"""
Network activities: expected new infections per hyperedge selection.

The combinatorial activity assumes every node is independently S or I
with probability one half and depends only on hyperedge counts per
order. The exact activity evaluates the current node states.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from . import _kernels as kern
from .contagion import TRUE_SCALING, ScalingSpec
from .hypergraph import Hypergraph


class ActivityError(ValueError):
    pass


@dataclass(frozen=True)
class ActivityReport:
    """``value`` is the count-weighted mean of ``order_terms`` (one per order 1..K)."""

    value: float
    order_terms: np.ndarray
    counts: np.ndarray
    K: int

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "value": float(self.value),
            "order_terms": [float(x) for x in self.order_terms],
            "N_k": [int(x) for x in self.counts],
        }


def beta_hat_k(k: int, beta: float, k_gamma: float,
               spec: ScalingSpec = TRUE_SCALING) -> float:
    """Expected infections from one selection of an order-k edge with i.i.d. half-infected members."""
    if k < 1:
        raise ActivityError(f"order must be >= 1, got {k}")
    total = 0.0
    for i in range(1, k + 1):
        b = kern.scale(i / k, float(k_gamma), spec.code, float(spec.param)) * i * beta
        total += comb(k + 1, i) * (k + 1 - i) * min(b, 1.0)
    return total / 2 ** (k + 1)


def combinatorial_activity(g: Hypergraph, beta: float, k_gamma: float,
                           K: Optional[int] = None,
                           spec: ScalingSpec = TRUE_SCALING) -> ActivityReport:
    K = g.max_order if K is None else K
    if K > g.max_order:
        raise ActivityError(f"K={K} exceeds the hypergraph's max order {g.max_order}")
    counts = g.hyperedge_counts(K)
    if counts.sum() == 0:
        raise ActivityError("hypergraph has no hyperedges up to the requested order")
    terms = np.array([beta_hat_k(k, beta, k_gamma, spec) for k in range(1, K + 1)])
    return ActivityReport(float(counts @ terms / counts.sum()), terms, counts, K)


def exact_activity(g: Hypergraph, beta: float, states, k_gamma: float,
                   spec: ScalingSpec = TRUE_SCALING) -> ActivityReport:
    """Mean of ``n_S(e) * beta_e`` over all hyperedges of ``g`` at the given states."""
    members, sizes = g.packed()
    if len(members) == 0:
        raise ActivityError("hypergraph has no hyperedges")
    states = np.asarray(states, dtype=np.int8)
    sums = kern.activity_sums(members, sizes, states, float(beta), float(k_gamma),
                              spec.code, float(spec.param), g.max_order)[1:]
    counts = g.hyperedge_counts()
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    return ActivityReport(float(sums.sum() / counts.sum()), terms, counts, g.max_order)


def exact_activity_value(g: Hypergraph, beta: float, states, k_gamma: float,
                         spec: ScalingSpec = TRUE_SCALING) -> float:
    # hot path for the controller: skips the report
    members, sizes = g.packed()
    sums = kern.activity_sums(members, sizes, states, beta, k_gamma,
                              spec.code, spec.param, g.max_order)
    return float(sums.sum()) / len(members)


def normalize_beta1(gK: Hypergraph, g1: Hypergraph, beta: float, k_gamma: float,
                    K: Optional[int] = None, spec: ScalingSpec = TRUE_SCALING) -> float:
    """Pairwise infection probability giving ``g1`` the same combinatorial activity as ``gK``."""
    num = combinatorial_activity(gK, beta, k_gamma, K, spec).value
    den = combinatorial_activity(g1, beta, k_gamma, 1, spec).value
    if den <= 0:
        raise ActivityError("pairwise combinatorial activity is zero; normalisation undefined")
    return num / den * beta
