"""Correlation-driven feature subset selection with best-first search."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

STALE_LIMIT = 5  # consecutive expansions without improvement before the search stops


def pearson(x, y) -> float:
    """Pearson correlation; 0.0 when either vector is constant."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("need at least two observations")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.dot(xc, xc) * np.dot(yc, yc))
    if denom == 0.0:
        return 0.0
    return float(np.dot(xc, yc) / denom)


@dataclass(frozen=True)
class CorrelationTable:
    """Pairwise correlations feeding the merit score, which uses their absolute values."""

    feature_feature: np.ndarray  # symmetric, unit diagonal
    feature_class: np.ndarray

    @classmethod
    def from_data(cls, features, class_codes) -> "CorrelationTable":
        x = np.atleast_2d(np.asarray(features, dtype=float))
        codes = np.asarray(class_codes, dtype=float).ravel()
        if x.shape[0] != codes.size:
            raise ValueError(f"{x.shape[0]} samples but {codes.size} class codes")
        d = x.shape[1]
        ff = np.eye(d)
        for i in range(d):
            for j in range(i + 1, d):
                ff[i, j] = ff[j, i] = pearson(x[:, i], x[:, j])
        fc = np.array([pearson(x[:, i], codes) for i in range(d)])
        return cls(ff, fc)


def merit(subset, table: CorrelationTable) -> float:
    """Subset score k*rcf / sqrt(k + k*(k-1)*rff).

    ``rcf`` is the mean absolute feature-class correlation over the subset and
    ``rff`` the mean absolute correlation over its distinct feature pairs, so
    the score rewards class relevance and punishes redundancy.
    """
    indices = tuple(subset)
    k = len(indices)
    if k == 0:
        raise ValueError("subset is empty")
    rcf = float(np.mean(np.abs(table.feature_class[list(indices)])))
    if k == 1:
        return rcf
    pair_sum = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            pair_sum += abs(table.feature_feature[indices[a], indices[b]])
    rff = pair_sum / (k * (k - 1) / 2)
    return k * rcf / np.sqrt(k + k * (k - 1) * rff)


@dataclass(frozen=True)
class Expansion:
    subset: tuple[int, ...]
    best_new_subset: tuple[int, ...]
    best_new_merit: float
    improved: bool


@dataclass(frozen=True)
class SelectionResult:
    indices: tuple[int, ...]
    merit: float
    trace: tuple[Expansion, ...]

    def to_json_dict(self, feature_names=None) -> dict:
        record = {
            "indices": list(self.indices),
            "merit": self.merit,
            "trace": [
                {
                    "expanded": list(step.subset),
                    "best_new_subset": list(step.best_new_subset),
                    "best_new_merit": step.best_new_merit,
                    "improved": step.improved,
                }
                for step in self.trace
            ],
        }
        if feature_names is not None:
            record["names"] = [feature_names[i] for i in self.indices]
        return record


def best_first_search(table: CorrelationTable, stale_limit: int = STALE_LIMIT) -> SelectionResult:
    """Grow subsets from empty, always expanding the best open node.

    Each expansion adds every unseen one-feature extension of the node to the
    queue. The search halts after ``stale_limit`` consecutive expansions that
    fail to improve on the best merit seen; merit ties are broken toward the
    subset with the lowest feature indices.
    """
    dimension = table.feature_class.size
    best_subset: tuple[int, ...] = ()
    best_merit = 0.0
    # heap entries sort by -merit then index tuple, so equal-merit pops prefer low indices
    heap: list[tuple[float, tuple[int, ...]]] = [(-0.0, ())]
    seen = {()}
    trace: list[Expansion] = []
    stale = 0
    while heap and stale < stale_limit:
        _, subset = heapq.heappop(heap)
        improved = False
        step_best: tuple[int, ...] = ()
        step_merit = -np.inf
        for feature in range(dimension):
            if feature in subset:
                continue
            child = tuple(sorted(subset + (feature,)))
            if child in seen:
                continue
            seen.add(child)
            child_merit = merit(child, table)
            heapq.heappush(heap, (-child_merit, child))
            if child_merit > step_merit:
                step_merit = child_merit
                step_best = child
            if child_merit > best_merit:
                best_merit = child_merit
                best_subset = child
                improved = True
        trace.append(Expansion(subset, step_best, float(step_merit), improved))
        stale = 0 if improved else stale + 1
    if not best_subset:
        raise ValueError("no informative features: every subset scored zero merit")
    return SelectionResult(best_subset, float(best_merit), tuple(trace))


def select_features(features, class_codes) -> SelectionResult:
    """Pick the feature subset with the best correlation merit for these samples."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if x.shape[1] < 2:
        raise ValueError("need at least two features to select from")
    if x.shape[0] < 3:
        raise ValueError("need at least three samples")
    return best_first_search(CorrelationTable.from_data(x, class_codes))
