"""Medoids, first-nearest-centroid classification, leave-one-out stiffness
tuning and error-rate / average-rank reporting."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import rankdata

from . import _dp
from .averaging import DEFAULT_MAX_ITER, _series_list, dba, ikdba, kdba, pkdtw_pwa
from .core import KernelParams, LabeledDataset, TimeSeries, as_array
from .elastic import _params
from .errors import DatasetError, DimensionError, InfeasibleError, ParameterError
from .parallel import pmap
from .preimage import PreimageConfig, preimage_centroid

log = logging.getLogger(__name__)

NU_GRID = (0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0, 100.0)

# method -> measure used to compare series with its representatives
METHOD_MEASURE = {
    "dtw_medoid": "dtw_distance",
    "dba": "dtw_distance",
    "kdtw_medoid": "kdtw_similarity",
    "kdba": "kdtw_similarity",
    "ikdba": "kdtw_similarity",
    "pkdtw_pwa": "kdtw_similarity",
    "preimage": "kdtw_similarity",
}
TUNABLE = ("kdtw_medoid", "ikdba", "pkdtw_pwa")

ALIASES = {"ppwa": "pkdtw_pwa", "dtw-medoid": "dtw_medoid", "kdtw-medoid": "kdtw_medoid"}


def canonical_method(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in METHOD_MEASURE:
        raise ParameterError(f"unknown method {name!r}")
    return name


# --- pairwise score matrices -------------------------------------------------


def _score(a: np.ndarray, b: np.ndarray, measure: str, kp: KernelParams | None) -> float:
    if measure == "dtw_distance":
        return float(_dp.dtw_accumulate(_dp.sq_dist_matrix(a, b))[-1, -1])
    return float(_dp.log_kdtw_value(a, b, kp.nu, kp.radius))


def pairwise_scores(arrs, measure: str, params=None, threads: int | None = None) -> np.ndarray:
    """Symmetric matrix of DTW costs or log KDTW values."""
    kp = _params(params) if measure == "kdtw_similarity" else None
    n = len(arrs)
    idx = [(a, b) for a in range(n) for b in range(a, n)]
    vals = pmap(lambda ab: _score(arrs[ab[0]], arrs[ab[1]], measure, kp), idx, threads)
    M = np.empty((n, n))
    for (a, b), v in zip(idx, vals):
        M[a, b] = M[b, a] = v
    return M


def _medoid_from_scores(M: np.ndarray, measure: str, members: Sequence[int]) -> int:
    members = list(members)
    if len(members) == 1:
        return members[0]
    sub = M[np.ix_(members, members)]
    if measure == "dtw_distance":
        totals = sub.sum(axis=1)
        k = int(np.argmin(totals))
    else:
        off = sub.copy()
        np.fill_diagonal(off, -np.inf)
        totals = logsumexp(off, axis=1)
        k = int(np.argmax(totals))
    return members[k]


def medoid(S, measure: str = "dtw_distance", params=None, threads: int | None = None):
    """(index, series) of the member minimizing summed DTW cost, or maximizing
    summed KDTW similarity to the other members. Ties go to the lowest index."""
    arrs = _series_list(S)
    if measure not in ("dtw_distance", "kdtw_similarity"):
        raise ParameterError(f"unknown measure {measure!r}")
    if len(arrs) == 1:
        return 0, TimeSeries(arrs[0])
    M = pairwise_scores(arrs, measure, params, threads)
    k = _medoid_from_scores(M, measure, range(len(arrs)))
    return k, TimeSeries(arrs[k])


# --- representatives ---------------------------------------------------------


@dataclass(frozen=True)
class RepresentativeSet:
    reps: Mapping[str, TimeSeries]
    measure: str
    params: KernelParams | None = None

    def __post_init__(self):
        if not self.reps:
            raise DatasetError("no representatives")
        if self.measure not in ("dtw_distance", "kdtw_similarity"):
            raise ParameterError(f"unknown measure {self.measure!r}")

    @property
    def labels(self) -> list[str]:
        return sorted(self.reps)


@dataclass
class MethodOptions:
    max_iter: int = DEFAULT_MAX_ITER
    ordering: str = "input_order"
    preimage: PreimageConfig = field(default_factory=PreimageConfig)


def class_representative(method: str, members, params=None, options: MethodOptions | None = None,
                         threads: int | None = None) -> TimeSeries:
    """Single representative of one class under the given method."""
    method = canonical_method(method)
    opts = options or MethodOptions()
    arrs = _series_list(members)
    kp = _params(params)
    if method == "dtw_medoid":
        return medoid(arrs, "dtw_distance", threads=threads)[1]
    if method == "dba":
        init = medoid(arrs, "dtw_distance", threads=threads)[1]
        return dba(arrs, opts.max_iter, init).centroid
    if method == "kdtw_medoid":
        return medoid(arrs, "kdtw_similarity", kp, threads)[1]
    if method == "kdba":
        init = medoid(arrs, "kdtw_similarity", kp, threads)[1]
        return kdba(init, arrs, kp)
    if method == "ikdba":
        init = medoid(arrs, "kdtw_similarity", kp, threads)[1]
        return ikdba(arrs, kp, opts.max_iter, init).centroid
    if method == "pkdtw_pwa":
        return pkdtw_pwa(arrs, kp, opts.ordering)
    init = medoid(arrs, "kdtw_similarity", kp, threads)[1]
    return preimage_centroid(arrs, kp, opts.preimage, init).centroid


def build_representatives(train: LabeledDataset, method: str, params=None,
                          options: MethodOptions | None = None,
                          threads: int | None = None) -> RepresentativeSet:
    method = canonical_method(method)
    groups = train.by_label()
    labels = sorted(groups)
    kp = _params(params)
    reps = pmap(lambda lab: class_representative(method, groups[lab], kp, options), labels, threads)
    measure = METHOD_MEASURE[method]
    return RepresentativeSet(dict(zip(labels, reps)), measure,
                             kp if measure == "kdtw_similarity" else None)


# --- classification ----------------------------------------------------------


def _pick(labels: Sequence[str], scores: Sequence[float], measure: str) -> str:
    best = None
    for lab, s in sorted(zip(labels, scores)):
        if best is None:
            best = (lab, s)
        elif (s < best[1]) if measure == "dtw_distance" else (s > best[1]):
            best = (lab, s)
    return best[0]


def classify_1nc(reps: RepresentativeSet, x) -> str:
    """Label of the closest (DTW) or most similar (KDTW) representative;
    ties go to the lexicographically smallest label."""
    xa = as_array(x)
    labels = reps.labels
    kp = reps.params if reps.params is not None else KernelParams()
    scores = []
    for lab in labels:
        r = reps.reps[lab].values
        if r.shape[1] != xa.shape[1]:
            raise DimensionError("series and representative dimensions differ")
        scores.append(_score(xa, r, reps.measure, kp))
    return _pick(labels, scores, reps.measure)


def predict(reps: RepresentativeSet, series, threads: int | None = None) -> list[str]:
    return pmap(lambda x: classify_1nc(reps, x), list(series), threads)


def error_rate(reps: RepresentativeSet, test: LabeledDataset, threads: int | None = None) -> float:
    """Percentage of test series assigned a wrong label."""
    if len(test) == 0:
        raise DatasetError("empty test set")
    preds = predict(reps, test.series, threads)
    wrong = sum(p != lab for p, lab in zip(preds, test.labels))
    return 100.0 * wrong / len(test)


# --- leave-one-out tuning ----------------------------------------------------


def _check_loo(train: LabeledDataset) -> dict[str, list[int]]:
    members: dict[str, list[int]] = {}
    for k, lab in enumerate(train.labels):
        members.setdefault(lab, []).append(k)
    for lab, idx in sorted(members.items()):
        if len(idx) < 2:
            raise InfeasibleError(f"class {lab!r} has a single training series; LOO impossible")
    return members


def loo_errors(train: LabeledDataset, method: str, nu: float,
               options: MethodOptions | None = None, threads: int | None = None) -> int:
    """Number of LOO misclassifications on the training set for one nu.

    Only the held-out item's class representative is rebuilt without it;
    every other class keeps its full-class representative.
    """
    method = canonical_method(method)
    members = _check_loo(train)
    kp = KernelParams(nu=nu)
    arrs = [ts.values for ts in train.series]
    labels = train.labels
    classes = sorted(members)

    if method == "kdtw_medoid":
        # one Gram matrix serves every held-out configuration
        M = pairwise_scores(arrs, "kdtw_similarity", kp, threads)
        full = {c: _medoid_from_scores(M, "kdtw_similarity", members[c]) for c in classes}

        def one(k):
            own = labels[k]
            rest = [m for m in members[own] if m != k]
            reps = {c: full[c] for c in classes}
            reps[own] = _medoid_from_scores(M, "kdtw_similarity", rest)
            return _pick(classes, [M[k, reps[c]] for c in classes], "kdtw_similarity") != own

        return int(sum(pmap(one, range(len(arrs)), threads)))

    full = dict(zip(classes, pmap(
        lambda c: class_representative(method, [arrs[m] for m in members[c]], kp, options).values,
        classes, threads)))
    measure = METHOD_MEASURE[method]

    def one(k):
        own = labels[k]
        rest = [arrs[m] for m in members[own] if m != k]
        reps = dict(full)
        reps[own] = class_representative(method, rest, kp, options).values
        scores = [_score(arrs[k], reps[c], measure, kp) for c in classes]
        return _pick(classes, scores, measure) != own

    return int(sum(pmap(one, range(len(arrs)), threads)))


def loo_tune_nu(train: LabeledDataset, method: str, grid: Sequence[float] = NU_GRID,
                options: MethodOptions | None = None, threads: int | None = None,
                return_errors: bool = False):
    """Pick the stiffness with the fewest leave-one-out errors on ``train``;
    ties go to the smallest value."""
    method = canonical_method(method)
    if method not in TUNABLE:
        raise ParameterError(f"method {method!r} has no stiffness to tune")
    grid = [float(g) for g in grid]
    if not grid:
        raise ParameterError("empty nu grid")
    _check_loo(train)
    if len(grid) == 1:
        return (grid[0], {grid[0]: None}) if return_errors else grid[0]
    errors = {}
    for nu in grid:
        errors[nu] = loo_errors(train, method, nu, options, threads)
        log.info("LOO %s nu=%g: %d errors", method, nu, errors[nu])
    best = min(grid, key=lambda g: (errors[g], g))
    return (best, errors) if return_errors else best


# --- reporting ---------------------------------------------------------------


@dataclass
class EvalReport:
    """Error rates (percent) keyed by dataset then method."""

    errors: dict[str, dict[str, float]] = field(default_factory=dict)

    def add(self, dataset: str, method: str, error_pct: float) -> None:
        if not 0.0 <= error_pct <= 100.0:
            raise ParameterError(f"error rate {error_pct} outside [0, 100]")
        self.errors.setdefault(dataset, {})[method] = float(error_pct)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("dataset,method,error_pct\n")
        for ds in self.errors:
            for m, e in self.errors[ds].items():
                out.write(f"{ds},{m},{e!r}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EvalReport":
        rep = cls()
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].replace(" ", "") != "dataset,method,error_pct":
            raise ParameterError("expected a 'dataset,method,error_pct' header")
        for ln in lines[1:]:
            ds, m, e = [f.strip() for f in ln.split(",")]
            rep.add(ds, m, float(e))
        return rep

    def average_rank(self) -> dict[str, float]:
        return average_rank(self.errors)

    def rank_csv(self) -> str:
        ranks = self.average_rank()
        return "method,average_rank\n" + "".join(f"{m},{r!r}\n" for m, r in ranks.items())


def dataset_ranks(errors: Sequence[float]) -> np.ndarray:
    """Rank 1 for the lowest error; ties share the mean of their positions."""
    return rankdata(np.asarray(errors, dtype=float), method="average")


def average_rank(errors: Mapping[str, Mapping[str, float]]) -> dict[str, float]:
    """Mean per-dataset rank of every method."""
    if not errors:
        raise DatasetError("no datasets to rank")
    methods = sorted({m for row in errors.values() for m in row})
    table = []
    for ds, row in errors.items():
        missing = [m for m in methods if m not in row]
        if missing:
            raise DatasetError(f"dataset {ds!r} has no error for {missing}")
        table.append(dataset_ranks([row[m] for m in methods]))
    mean = np.mean(table, axis=0)
    return {m: float(r) for m, r in zip(methods, mean)}
