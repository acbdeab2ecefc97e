"""Centroid estimation: pairwise DTW centroid, DBA, KDBA/iKDBA and the
expected-time pairwise average with its progressive agglomeration."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from . import _dp
from .core import KernelParams, TimeSeries, as_array
from .elastic import _dtw_arrays, _pair, _params, log_ama
from .errors import CoverageError, DatasetError, DimensionError, NumericalUnderflowError, ParameterError

DEFAULT_MAX_ITER = 20


@dataclass(frozen=True)
class CentroidResult:
    centroid: TimeSeries
    inertia_trace: list[float] = field(default_factory=list)
    iterations_run: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "length": len(self.centroid),
            "dim": self.centroid.dim,
            "iterations_run": self.iterations_run,
            "inertia_trace": [float(v) for v in self.inertia_trace],
            "centroid": self.centroid.values.tolist(),
        })


def _series_list(S) -> list[np.ndarray]:
    arrs = [as_array(s) for s in S]
    if not arrs:
        raise DatasetError("cannot average an empty set of series")
    dims = {a.shape[1] for a in arrs}
    if len(dims) != 1:
        raise DimensionError(f"series must share dimensionality, found {sorted(dims)}")
    return arrs


def _check_ref(R: np.ndarray, arrs: list[np.ndarray]) -> None:
    if R.shape[1] != arrs[0].shape[1]:
        raise DimensionError(f"reference has d={R.shape[1]}, set has d={arrs[0].shape[1]}")


def _as_init(init, arrs) -> TimeSeries:
    ts = init if isinstance(init, TimeSeries) else TimeSeries(init)
    _check_ref(ts.values, arrs)
    return ts


# --- inertia -----------------------------------------------------------------


def inertia(C, S, measure: str = "dtw_distance", params=None, *, log: bool = False) -> float:
    """Summed DTW cost, or summed KDTW similarity, between C and each member of S.

    With ``log=True`` and the kdtw measure the natural log of the sum is
    returned, which stays finite where the sum itself would underflow.
    """
    arrs = _series_list(S)
    c = as_array(C)
    _check_ref(c, arrs)
    if measure == "dtw_distance":
        return float(sum(_dtw_arrays(c, s)[0] for s in arrs))
    if measure == "kdtw_similarity":
        kp = _params(params)
        lv = logsumexp([_dp.log_kdtw_value(c, s, kp.nu, kp.radius) for s in arrs])
        return float(lv) if log else math.exp(lv)
    raise ParameterError(f"unknown measure {measure!r}")


# --- DTW based ---------------------------------------------------------------


def pairwise_dtw_centroid(X, Y) -> TimeSeries:
    """Midpoints of the samples matched along the optimal DTW path."""
    x, y = _pair(X, Y)
    _, ii, jj = _dtw_arrays(x, y)
    return TimeSeries((x[ii] + y[jj]) / 2.0)


def dba_step(R, S) -> TimeSeries:
    """One barycenter update: pool every sample with the reference timestamps it aligns to."""
    arrs = _series_list(S)
    r = as_array(R)
    _check_ref(r, arrs)
    sums = np.zeros_like(r)
    counts = np.zeros(len(r))
    for s in arrs:
        _, ii, jj = _dtw_arrays(r, s)
        np.add.at(sums, ii, s[jj])
        np.add.at(counts, ii, 1.0)
    return TimeSeries(sums / counts[:, None])


def dba(S, max_iter: int = DEFAULT_MAX_ITER, init=None) -> CentroidResult:
    """Iterated DBA; stops once the summed DTW cost stops strictly decreasing.

    ``init`` defaults to the DTW medoid of S.
    """
    arrs = _series_list(S)
    if max_iter < 1:
        raise ParameterError("max_iter must be >= 1")
    if init is None:
        from .evaluation import medoid
        init = medoid(arrs, "dtw_distance")[1]
    best = _as_init(init, arrs)
    best_inertia = inertia(best, arrs, "dtw_distance")
    trace = [best_inertia]
    it = 0
    while it < max_iter:
        it += 1
        cand = dba_step(best, arrs)
        val = inertia(cand, arrs, "dtw_distance")
        if not val < best_inertia:
            break
        best, best_inertia = cand, val
        trace.append(val)
    return CentroidResult(best, trace, it)


# --- kernel barycenter -------------------------------------------------------


def _row_weights(la: np.ndarray) -> np.ndarray:
    """P(j | i) from a log AMA matrix."""
    m = la.max(axis=1, keepdims=True)
    if np.any(np.isneginf(m)):
        raise NumericalUnderflowError("AMA row carries no mass")
    w = np.exp(la - m)
    return w / w.sum(axis=1, keepdims=True)


def kdba(R, S, params=None) -> TimeSeries:
    """One kernel barycenter step: each reference timestamp takes the
    AMA-row-weighted mean of every series, averaged over the set."""
    arrs = _series_list(S)
    r = as_array(R)
    _check_ref(r, arrs)
    kp = _params(params)
    acc = np.zeros_like(r)
    for n, s in enumerate(arrs, start=1):
        la = log_ama(r, s, kp)
        m = la.max(axis=1)
        bad = np.flatnonzero(np.isneginf(m))
        if bad.size:
            raise NumericalUnderflowError(
                f"AMA of series {n} has no mass in reference row {int(bad[0]) + 1}"
            )
        acc += _row_weights(la) @ s
    return TimeSeries(acc / len(arrs))


def ikdba(S, params=None, max_iter: int = DEFAULT_MAX_ITER, init=None) -> CentroidResult:
    """Iterated KDBA driven by summed KDTW similarity (must strictly increase).

    ``init`` defaults to the KDTW medoid of S. ``inertia_trace`` holds log
    summed similarities of the accepted centroids.
    """
    arrs = _series_list(S)
    kp = _params(params)
    if max_iter < 1:
        raise ParameterError("max_iter must be >= 1")
    if init is None:
        from .evaluation import medoid
        init = medoid(arrs, "kdtw_similarity", kp)[1]
    best = _as_init(init, arrs)
    best_inertia = inertia(best, arrs, "kdtw_similarity", kp, log=True)
    trace = [best_inertia]
    it = 0
    while it < max_iter:
        it += 1
        cand = kdba(best, arrs, kp)
        val = inertia(cand, arrs, "kdtw_similarity", kp, log=True)
        if not val > best_inertia:
            break
        best, best_inertia = cand, val
        trace.append(val)
    return CentroidResult(best, trace, it)


# --- expected-time pairwise average ------------------------------------------


def kdtw_pwa(X, Y, params=None, *, output_length: str = "max") -> TimeSeries:
    """Average two series in sample values and in time.

    Every aligned pair (i, j) contributes (X(i) + Y(j)) / 2, weighted by its
    through-path mass, at time (i + j) / 2 (odd sums split between the two
    neighbouring integer times). The output has ``max(|X|, |Y|)`` samples;
    with ``output_length="mean"`` it has ``ceil((|X| + |Y|) / 2)``, which is
    the last time that can receive mass.
    """
    x, y = _pair(X, Y)
    kp = _params(params)
    la = log_ama(x, y, kp)
    p, q = len(x), len(y)
    if output_length == "max":
        L = max(p, q)
    elif output_length == "mean":
        L = (p + q + 1) // 2
    else:
        raise ParameterError(f"unknown output_length {output_length!r}")
    out, uncovered = _dp.pwa_accumulate(la, x, y, L)
    if uncovered:
        raise CoverageError(
            f"output index {uncovered} receives no alignment mass "
            f"(lengths {p} and {q}); try output_length='mean'"
        )
    return TimeSeries(out)


def _greedy_pairs(arrs: list[np.ndarray], kp: KernelParams) -> list[tuple[int, int]]:
    n = len(arrs)
    G = np.full((n, n), -np.inf)
    for a in range(n):
        for b in range(a + 1, n):
            G[a, b] = _dp.log_kdtw_value(arrs[a], arrs[b], kp.nu, kp.radius)
    free = set(range(n))
    pairs = []
    order = sorted(((G[a, b], a, b) for a in range(n) for b in range(a + 1, n)),
                   key=lambda t: (-t[0], t[1], t[2]))
    for _, a, b in order:
        if a in free and b in free:
            pairs.append((a, b))
            free -= {a, b}
    return pairs


def pkdtw_pwa(S, params=None, ordering: str = "input_order", *,
              output_length: str = "max") -> TimeSeries:
    """Progressive agglomeration of a set by repeated pairwise averages.

    Each round merges disjoint pairs (first two remaining, or most similar
    first) until one series is left; an odd leftover is carried over.
    """
    arrs = _series_list(S)
    kp = _params(params)
    if ordering not in ("input_order", "similar_first"):
        raise ParameterError(f"unknown ordering {ordering!r}")
    work = list(arrs)
    while len(work) > 1:
        if ordering == "input_order":
            pairs = [(k, k + 1) for k in range(0, len(work) - 1, 2)]
        else:
            pairs = _greedy_pairs(work, kp)
        used = {k for pr in pairs for k in pr}
        merged = [kdtw_pwa(work[a], work[b], kp, output_length=output_length).values
                  for a, b in pairs]
        work = merged + [work[k] for k in range(len(work)) if k not in used]
    return work[0] if isinstance(work[0], TimeSeries) else TimeSeries(work[0])
