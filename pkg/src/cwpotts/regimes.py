"""Regime classification of bad-measure trajectories.

A sweep over time at fixed ``beta`` labels the Maxwell slice at every grid
time and compares the label sequence and the transition times with those
predicted from the critical lines.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import lines as L
from .bifurcation import ParameterError, maxwell_slice
from .model import g_of_t

REGIMES = ("I", "II.i", "II.ii", "II.iii", "II.iv", "III")

# (line, label after the transition) in time order
_SCHEDULE = {
    "I": [],
    "II.i": [("NG", "three-lines"), ("SCE", "empty")],
    "II.ii": [("NG", "three-lines"), ("BU", "three-Y"), ("TPE", "six-arcs"), ("ACE", "empty")],
    "II.iii": [("NG", "three-lines"), ("BU", "three-Y"), ("TPE", "six-arcs"), ("B2B", "three-arcs"), ("MTE", "empty")],
    "II.iv": [
        ("NG", "three-lines"),
        ("BU", "three-Y"),
        ("B2B", "triangle-plus-lines"),
        ("TPE", "three-arcs"),
        ("MTE", "empty"),
    ],
    "III": [("NG", "three-lines"), ("BU", "three-Y"), ("B2B", "triangle-plus-lines"), ("EW", "star")],
}

_TIME_OF = {
    "NG": L.t_ng,
    "SCE": L.sce_exit,
    "BU": L.bu_line,
    "TPE": L.tpe_line,
    "ACE": L.t_ace,
    "B2B": L.t_b2b,
    "MTE": L.mte_line,
    "EW": L.t_ew,
}


def default_workers() -> int:
    return max(1, int(os.environ.get("CWPOTTS_WORKERS", "1")))


def regime(beta: float) -> str:
    if not 0 < beta < 3:
        raise ParameterError(f"beta must lie in (0, 3), got {beta}")
    if beta < L.beta_ng():
        return "I"
    if beta < L.beta_be():
        return "II.i"
    if beta < 8.0 / 3.0:
        return "II.ii"
    if beta < L.beta_star():
        return "II.iii"
    if beta < L.BETA_EW:
        return "II.iv"
    return "III"


def expected_labels(name: str) -> list[str]:
    return ["empty"] + [label for _, label in _SCHEDULE[name]]


def predicted_transitions(beta: float) -> list[tuple[str, float, str]]:
    """``(line, t, label_after)`` for the regime of ``beta``."""
    out = []
    for line, label in _SCHEDULE[regime(beta)]:
        out.append((line, _TIME_OF[line](beta).t, label))
    return out


def default_t_grid(beta: float, n: int = 40) -> np.ndarray:
    """Geometric grid spanning all predicted transitions with margins."""
    times = [t for _, t, _ in predicted_transitions(beta)]
    if not times:
        return np.geomspace(0.1, 5.0, n)
    return np.geomspace(0.7 * min(times), 1.3 * max(times), n)


def _label(args):
    beta, t, resolution = args
    sl = maxwell_slice(beta, g_of_t(t), resolution)
    return sl.topology.label, sl.topology.component_count


def _map(fn, items, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(a) for a in items]


@dataclass
class Classification:
    beta: float
    regime: str
    t_grid: np.ndarray
    labels: list[str]
    counts: list[int]
    sequence: list[str]
    expected: list[str]
    observed: list[tuple[float, float, str, str]]
    predicted: list[tuple[str, float, str]]
    matched: list[tuple[str, float, float, float]] = field(default_factory=list)
    doubling: list[tuple[float, int, int]] = field(default_factory=list)

    @property
    def sequence_ok(self) -> bool:
        return self.sequence == self.expected

    @property
    def transitions_ok(self) -> bool:
        return len(self.matched) == len(self.predicted) and all(lo <= t <= hi for _, t, lo, hi in self.matched)

    @property
    def doubling_ok(self) -> bool:
        return all(a == b for _, a, b in self.doubling)

    @property
    def ok(self) -> bool:
        return self.sequence_ok and self.transitions_ok and self.doubling_ok


def _collapse(labels):
    seq = []
    for lab in labels:
        if not seq or seq[-1] != lab:
            seq.append(lab)
    return seq


def classify(
    beta: float,
    t_grid=None,
    resolution: int = 200,
    workers: int | None = None,
    check_doubling: bool = True,
) -> Classification:
    """Label the Maxwell slice along ``t_grid`` and match the transitions
    with the line predictions. A predicted time counts as reproduced if it
    lies within one grid step of the observed label change."""
    name = regime(beta)
    workers = default_workers() if workers is None else workers
    t_grid = default_t_grid(beta) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0) or np.any(np.diff(t_grid) <= 0):
        raise ParameterError("t grid must be positive and increasing")
    res = _map(_label, [(beta, float(t), resolution) for t in t_grid], workers)
    labels = [r[0] for r in res]
    counts = [r[1] for r in res]
    observed = [
        (float(t_grid[i]), float(t_grid[i + 1]), labels[i], labels[i + 1])
        for i in range(len(labels) - 1)
        if labels[i] != labels[i + 1]
    ]
    predicted = predicted_transitions(beta)
    matched = []
    for line, t, label in predicted:
        for lo, hi, _, after in observed:
            if after == label:
                i = int(np.searchsorted(t_grid, lo))
                lo_tol = t_grid[max(i - 1, 0)]
                hi_tol = t_grid[min(i + 2, len(t_grid) - 1)]
                matched.append((line, t, float(lo_tol), float(hi_tol)))
                break
    doubling = []
    if check_doubling:
        mids = _plateau_midpoints(t_grid, labels)
        res2 = _map(_label, [(beta, t, 2 * resolution) for t in mids], workers)
        lookup = dict(zip(t_grid.tolist(), counts))
        doubling = [(t, lookup[t], r[1]) for t, r in zip(mids, res2)]
    return Classification(
        beta=beta,
        regime=name,
        t_grid=t_grid,
        labels=labels,
        counts=counts,
        sequence=_collapse(labels),
        expected=expected_labels(name),
        observed=observed,
        predicted=predicted,
        matched=matched,
        doubling=doubling,
    )


def _plateau_midpoints(t_grid, labels):
    mids = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            mids.append(float(t_grid[(start + i - 1) // 2]))
            start = i
    return mids


__all__ = [
    "REGIMES",
    "Classification",
    "classify",
    "default_t_grid",
    "expected_labels",
    "predicted_transitions",
    "regime",
]
