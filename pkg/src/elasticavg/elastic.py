"""DTW, the KDTW kernel, forward alignment matrices and alignment probabilities.

Time indices in paths are 1-based. Every KDTW quantity is computed in the
log domain; ``.values`` accessors exponentiate on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _dp
from .core import KernelParams, as_array
from .errors import DegenerateDistributionError, DimensionError, NumericalUnderflowError


def _pair(X, Y) -> tuple[np.ndarray, np.ndarray]:
    x, y = as_array(X), as_array(Y)
    if x.shape[1] != y.shape[1]:
        raise DimensionError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    return x, y


def _params(params) -> KernelParams:
    if params is None:
        return KernelParams()
    if isinstance(params, KernelParams):
        return params
    return KernelParams(nu=float(params))


def squared_euclidean(x, y) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(np.sum((x - y) ** 2))


def local_costs(X, Y) -> np.ndarray:
    """(p, q) matrix of squared Euclidean distances between samples."""
    x, y = _pair(X, Y)
    return _dp.sq_dist_matrix(x, y)


# --- DTW ---------------------------------------------------------------------


class AlignmentPath(tuple):
    """Monotone staircase of 1-based (i, j) pairs from (1, 1) to (T1, T2)."""

    def __new__(cls, steps):
        steps = tuple((int(i), int(j)) for i, j in steps)
        if not steps:
            raise ValueError("empty alignment path")
        if steps[0] != (1, 1):
            raise ValueError("alignment path must start at (1, 1)")
        for (i0, j0), (i1, j1) in zip(steps, steps[1:]):
            if (i1 - i0, j1 - j0) not in ((1, 0), (0, 1), (1, 1)):
                raise ValueError(f"invalid step {(i0, j0)} -> {(i1, j1)}")
        return super().__new__(cls, steps)

    @property
    def end(self) -> tuple[int, int]:
        return self[-1]


class DtwResult(NamedTuple):
    cost: float
    path: AlignmentPath


def _dtw_arrays(x, y):
    D = _dp.dtw_accumulate(_dp.sq_dist_matrix(x, y))
    ii, jj = _dp.dtw_backtrack(D)
    return float(D[-1, -1]), ii, jj


def dtw_cost(X, Y) -> float:
    x, y = _pair(X, Y)
    return float(_dp.dtw_accumulate(_dp.sq_dist_matrix(x, y))[-1, -1])


def dtw(X, Y) -> DtwResult:
    """Minimum summed squared-Euclidean cost over alignment paths, plus one optimal path."""
    x, y = _pair(X, Y)
    cost, ii, jj = _dtw_arrays(x, y)
    return DtwResult(cost, AlignmentPath(zip(ii + 1, jj + 1)))


# --- KDTW --------------------------------------------------------------------


def log_kdtw(X, Y, params=None) -> float:
    """Natural log of the KDTW kernel value (K^xy + K^xx)."""
    x, y = _pair(X, Y)
    kp = _params(params)
    kp.check_feasible(len(x), len(y))
    return float(_dp.log_kdtw_value(x, y, kp.nu, kp.radius))


def kdtw(X, Y, params=None, *, log: bool = False) -> float:
    """Regularized DTW kernel value.

    Raises NumericalUnderflowError when the value is not representable as a
    double; use ``log=True`` (or :func:`log_kdtw`) for long series or large nu.
    """
    lv = log_kdtw(X, Y, params)
    if log:
        return lv
    value = math.exp(lv) if lv < 709.0 else math.inf
    if value == 0.0 or math.isinf(value):
        raise NumericalUnderflowError(
            f"KDTW value exp({lv:.6g}) is not representable as a double; use log=True"
        )
    return value


def kdtw_normalized(X, Y, params=None) -> float:
    """kdtw(X, Y) / sqrt(kdtw(X, X) kdtw(Y, Y)); diagnostics only."""
    return math.exp(log_kdtw(X, Y, params)
                    - 0.5 * (log_kdtw(X, X, params) + log_kdtw(Y, Y, params)))


def log_kdtw_gram(series, params=None, others=None) -> np.ndarray:
    """Matrix of log KDTW values; symmetric when ``others`` is None."""
    arrs = [as_array(s) for s in series]
    kp = _params(params)
    if others is None:
        n = len(arrs)
        G = np.empty((n, n))
        for a in range(n):
            for b in range(a, n):
                G[a, b] = G[b, a] = _dp.log_kdtw_value(arrs[a], arrs[b], kp.nu, kp.radius)
        return G
    brr = [as_array(s) for s in others]
    return np.array([[_dp.log_kdtw_value(a, b, kp.nu, kp.radius) for b in brr] for a in arrs])


def kdtw_gram(series, params=None) -> np.ndarray:
    G = np.exp(log_kdtw_gram(series, params))
    if np.any(G == 0) or not np.all(np.isfinite(G)):
        raise NumericalUnderflowError("Gram matrix entries not representable; use log_kdtw_gram")
    return G


# --- alignment matrices ------------------------------------------------------


@dataclass(frozen=True)
class ForwardMatrix:
    """K^xy forward matrix over all prefixes, stored as natural logs.

    ``log_values`` has shape (p + 1, q + 1); entry [0, 0] is log 1 = 0 and the
    remaining border entries are -inf.
    """

    log_values: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.log_values.shape


def forward_matrix(X, Y, params=None) -> ForwardMatrix:
    x, y = _pair(X, Y)
    kp = _params(params)
    kp.check_feasible(len(x), len(y))
    L = _dp.log_forward_xy(_dp.sq_dist_matrix(x, y), kp.nu, kp.radius)
    L.setflags(write=False)
    return ForwardMatrix(L)


def reversed_forward(X, Y, params=None) -> np.ndarray:
    """AM_r read back in the original orientation.

    Entry [i - 1, j - 1] is log AM_r(p - i + 1, q - j + 1): the summed weight of
    partial paths from (i, j) to (p, q).
    """
    x, y = _pair(X, Y)
    Lr = forward_matrix(np.ascontiguousarray(x[::-1]), np.ascontiguousarray(y[::-1]), params).log_values
    return Lr[1:, 1:][::-1, ::-1]


def backward_matrix(X, Y, params=None) -> np.ndarray:
    """Same quantity as :func:`reversed_forward` from a suffix recursion (cross-check)."""
    x, y = _pair(X, Y)
    kp = _params(params)
    kp.check_feasible(len(x), len(y))
    return _dp.log_backward_xy(_dp.sq_dist_matrix(x, y), kp.nu, kp.radius)[1:, 1:]


@dataclass(frozen=True)
class AmaMatrix:
    """Through-cell mass of complete alignment paths, (p, q), in log form.

    ``values`` is rescaled so that its largest entry is 1.
    """

    log_values: np.ndarray

    @property
    def values(self) -> np.ndarray:
        lv = self.log_values
        return np.exp(lv - lv.max())

    @property
    def shape(self) -> tuple[int, int]:
        return self.log_values.shape


def log_ama(X, Y, params=None) -> np.ndarray:
    """log of the summed weight of complete paths through each cell.

    AM(i, j) and AM_r(p - i + 1, q - j + 1) both include the local weight of
    (i, j), so it is removed once to count each path exactly once.
    """
    x, y = _pair(X, Y)
    kp = _params(params)
    kp.check_feasible(len(x), len(y))
    d2 = _dp.sq_dist_matrix(x, y)
    fwd = _dp.log_forward_xy(d2, kp.nu, kp.radius)[1:, 1:]
    if kp.radius < 0:
        rev = _dp.log_forward_xy(d2[::-1, ::-1].copy(), kp.nu, -1)[1:, 1:][::-1, ::-1]
    else:
        # a corridor about the main diagonal is not reversal-invariant when p != q
        rev = _dp.log_backward_xy(d2, kp.nu, kp.radius)[1:, 1:]
    return fwd + rev - (_dp.LOG_THIRD - kp.nu * d2)


def ama(X, Y, params=None) -> AmaMatrix:
    lv = log_ama(X, Y, params)
    m = AmaMatrix(lv)
    vals = m.values
    empty_rows = np.flatnonzero(~(vals > 0).any(axis=1))
    empty_cols = np.flatnonzero(~(vals > 0).any(axis=0))
    if empty_rows.size or empty_cols.size:
        raise NumericalUnderflowError(
            f"AMA has all-zero rows {list(empty_rows + 1)} / columns {list(empty_cols + 1)}"
        )
    lv.setflags(write=False)
    return m


def ama_to_csv(m: AmaMatrix, nu: float) -> str:
    vals = m.values
    p, q = vals.shape
    lines = [f"# {p} {q} {nu!r}"]
    lines += [",".join(repr(float(v)) for v in row) for row in vals]
    return "\n".join(lines) + "\n"


# --- alignment probabilities -------------------------------------------------


@dataclass(frozen=True)
class AlignmentProbability:
    p_ij: np.ndarray
    row_conditional: np.ndarray  # P(j | i): rows sum to one
    column_conditional: np.ndarray  # P(i | j): columns sum to one


def _log_normalize(lv: np.ndarray, axis: int) -> np.ndarray:
    m = lv.max(axis=axis, keepdims=True)
    if np.any(np.isneginf(m)):
        bad = np.flatnonzero(np.isneginf(m).ravel()) + 1
        kind = "row" if axis == 1 else "column"
        raise DegenerateDistributionError(f"AMA {kind}(s) {list(bad)} carry no mass")
    e = np.exp(lv - m)
    return e / e.sum(axis=axis, keepdims=True)


def alignment_probabilities(m) -> AlignmentProbability:
    """Row and column conditionals of an AMA matrix and their mean.

    Accepts an :class:`AmaMatrix` (normalized in the log domain) or any
    non-negative array.
    """
    if isinstance(m, AmaMatrix):
        lv = np.asarray(m.log_values, dtype=float)
    else:
        arr = np.asarray(m, dtype=float)
        if arr.ndim != 2 or np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise DegenerateDistributionError("AMA must be a finite non-negative matrix")
        with np.errstate(divide="ignore"):
            lv = np.log(arr)
    row = _log_normalize(lv, axis=1)
    col = _log_normalize(lv, axis=0)
    return AlignmentProbability(0.5 * (row + col), row, col)
