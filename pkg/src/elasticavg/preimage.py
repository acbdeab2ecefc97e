"""Derivative-free minimization of the KDTW preimage objective."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import _dp
from .averaging import CentroidResult, _series_list
from .core import TimeSeries, as_array
from .elastic import _params
from .errors import BudgetError, DimensionError, NumericalUnderflowError, ParameterError


@dataclass(frozen=True)
class PreimageConfig:
    budget: int = 10_000
    initial_step: float = 0.25
    shrink_factor: float = 0.5
    tolerance: float = 1e-3
    max_sweeps: int | None = None

    def __post_init__(self):
        if self.budget < 1:
            raise ParameterError("budget must be >= 1")
        if not 0 < self.shrink_factor < 1:
            raise ParameterError("shrink_factor must lie in (0, 1)")
        if not self.initial_step > 0 or not self.tolerance > 0:
            raise ParameterError("initial_step and tolerance must be positive")
        if self.max_sweeps is not None and self.max_sweeps < 0:
            raise ParameterError("max_sweeps must be >= 0")


@dataclass(frozen=True)
class PreimageResult(CentroidResult):
    evaluations: int = 0
    trace_evaluations: list[int] = field(default_factory=list)

    def trace_csv(self) -> str:
        rows = ["evaluation,objective"]
        rows += [f"{k},{v!r}" for k, v in zip(self.trace_evaluations, self.inertia_trace)]
        return "\n".join(rows) + "\n"


class _Objective:
    """n k(x, x) - 2 sum_j k(x, s_j), evaluated relative to a fixed scale exp(ref)."""

    def __init__(self, arrs, kp):
        self.arrs = arrs
        self.kp = kp
        self.n = len(arrs)
        self.ref = None

    def logs(self, x):
        nu, r = self.kp.nu, self.kp.radius
        lxx = _dp.log_kdtw_value(x, x, nu, r)
        lxs = np.array([_dp.log_kdtw_value(x, s, nu, r) for s in self.arrs])
        return lxx, lxs

    def scaled(self, x) -> float:
        lxx, lxs = self.logs(x)
        if self.ref is None:
            self.ref = max(lxx + math.log(self.n), float(logsumexp(lxs)) + math.log(2.0))
        return self.n * math.exp(lxx - self.ref) - 2.0 * float(np.exp(lxs - self.ref).sum())

    def raw(self, scaled_value: float) -> float:
        return scaled_value * math.exp(self.ref)


def preimage_objective(x, S, params=None) -> float:
    """n kdtw(x, x) - 2 sum_j kdtw(x, S_j)."""
    arrs = _series_list(S)
    xa = as_array(x)
    if xa.shape[1] != arrs[0].shape[1]:
        raise DimensionError("x and S must share dimensionality")
    obj = _Objective(arrs, _params(params))
    val = obj.scaled(xa)
    if not -700 < obj.ref < 700:
        raise NumericalUnderflowError("preimage objective is not representable as a double")
    return obj.raw(val)


def preimage_centroid(S, params=None, config: PreimageConfig | None = None, init=None,
                      bounds=None) -> PreimageResult:
    """Coordinate pattern search over every sample of a fixed-length candidate.

    Each coordinate (time-major, channel-minor) is probed at +step then -step;
    the first strict improvement is kept. A sweep without improvement shrinks
    the step. Stops when the evaluation budget is spent, the step falls below
    the tolerance, or ``max_sweeps`` sweeps have run. ``bounds`` is an optional
    (lower, upper) pair of per-channel limits that probes never leave.
    """
    arrs = _series_list(S)
    kp = _params(params)
    cfg = config or PreimageConfig()
    if init is None:
        from .evaluation import medoid
        init = medoid(arrs, "kdtw_similarity", kp)[1]
    init = init if isinstance(init, TimeSeries) else TimeSeries(init)
    x = np.array(init.values)
    T, d = x.shape
    if d != arrs[0].shape[1]:
        raise DimensionError("init and S must share dimensionality")
    if bounds is not None:
        lo = np.broadcast_to(np.asarray(bounds[0], dtype=float), (d,))
        hi = np.broadcast_to(np.asarray(bounds[1], dtype=float), (d,))
        if np.any(x < lo) or np.any(x > hi):
            raise ParameterError("init lies outside the supplied bounds")
    else:
        lo = np.full(d, -np.inf)
        hi = np.full(d, np.inf)

    if cfg.max_sweeps == 0:
        return PreimageResult(init, [], 0, 0, [])
    if cfg.budget < 1 + 2 * T * d:
        raise BudgetError(
            f"budget {cfg.budget} is below one sweep ({1 + 2 * T * d} evaluations)"
        )

    obj = _Objective(arrs, kp)
    best = obj.scaled(x)
    if not -700 < obj.ref < 700:
        raise NumericalUnderflowError("preimage objective is not representable as a double")
    evals = 1
    trace, trace_at = [obj.raw(best)], [1]
    step = cfg.initial_step
    sweeps = 0
    while evals < cfg.budget and step >= cfg.tolerance:
        if cfg.max_sweeps is not None and sweeps >= cfg.max_sweeps:
            break
        improved = False
        for t in range(T):
            for c in range(d):
                for sign in (1.0, -1.0):
                    if evals >= cfg.budget:
                        break
                    old = x[t, c]
                    new = min(max(old + sign * step, lo[c]), hi[c])
                    if new == old:
                        continue
                    x[t, c] = new
                    val = obj.scaled(x)
                    evals += 1
                    if val < best and obj.raw(val) < trace[-1]:
                        best = val
                        trace.append(obj.raw(val))
                        trace_at.append(evals)
                        improved = True
                        break
                    x[t, c] = old
        sweeps += 1
        if not improved:
            step *= cfg.shrink_factor
    return PreimageResult(TimeSeries(x), trace, sweeps, evals, trace_at)
