"""Domain types, dataset ingestion and synthetic fixtures."""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .errors import DatasetError, DimensionError, ParameterError, ParseError


class TimeSeries:
    """A length-T sequence of d-dimensional real samples.

    Stored as a read-only ``(T, d)`` float64 array. A 1-D input is treated as a
    scalar series (d = 1).
    """

    __slots__ = ("_values",)

    def __init__(self, samples):
        arr = np.array(samples, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise DimensionError(f"expected a (T, d) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"series must have T >= 1 and d >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("time series samples must be finite")
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def dim(self) -> int:
        return self._values.shape[1]

    def __len__(self) -> int:
        return self._values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self._values.shape == other._values.shape and bool(
            np.array_equal(self._values, other._values)
        )

    def __hash__(self):
        return hash((self._values.shape, self._values.tobytes()))

    def __repr__(self):
        return f"TimeSeries(T={len(self)}, d={self.dim})"

    def __setattr__(self, name, value):
        if hasattr(self, "_values"):
            raise AttributeError("TimeSeries is immutable")
        object.__setattr__(self, name, value)

    def reversed(self) -> "TimeSeries":
        return TimeSeries(self._values[::-1])


def as_series(x) -> TimeSeries:
    return x if isinstance(x, TimeSeries) else TimeSeries(x)


def as_array(x) -> np.ndarray:
    """(T, d) float64 view of a series or array-like."""
    if isinstance(x, TimeSeries):
        return x.values
    return as_series(x).values


@dataclass(frozen=True)
class LabeledDataset:
    """Ordered (label, series) pairs sharing one dimensionality."""

    entries: tuple[tuple[str, TimeSeries], ...]

    def __post_init__(self):
        entries = tuple((str(lab), as_series(ts)) for lab, ts in self.entries)
        if not entries:
            raise DatasetError("dataset is empty")
        dims = {ts.dim for _, ts in entries}
        if len(dims) != 1:
            raise DimensionError(f"series in a dataset must share d, found {sorted(dims)}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_pairs(cls, labels: Iterable, series: Iterable) -> "LabeledDataset":
        return cls(tuple(zip(labels, series)))

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[str, TimeSeries]]:
        return iter(self.entries)

    @property
    def dim(self) -> int:
        return self.entries[0][1].dim

    @property
    def labels(self) -> list[str]:
        return [lab for lab, _ in self.entries]

    @property
    def series(self) -> list[TimeSeries]:
        return [ts for _, ts in self.entries]

    def classes(self) -> list[str]:
        return sorted(set(self.labels))

    def by_label(self) -> dict[str, list[TimeSeries]]:
        groups: dict[str, list[TimeSeries]] = {}
        for lab, ts in self.entries:
            groups.setdefault(lab, []).append(ts)
        return groups


@dataclass(frozen=True)
class KernelParams:
    """Stiffness and optional Sakoe-Chiba corridor radius for KDTW."""

    nu: float = 1.0
    corridor_radius: int | None = None

    def __post_init__(self):
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ParameterError(f"nu must be a finite positive real, got {self.nu}")
        if self.corridor_radius is not None and self.corridor_radius < 0:
            raise ParameterError("corridor_radius must be non-negative")

    def check_feasible(self, p: int, q: int) -> None:
        r = self.corridor_radius
        if r is not None and r < abs(p - q):
            raise ParameterError(
                f"corridor radius {r} is smaller than the length difference |{p} - {q}|"
            )

    @property
    def radius(self) -> int:
        """Corridor radius as an int, -1 when unconstrained."""
        return -1 if self.corridor_radius is None else int(self.corridor_radius)


# ---------------------------------------------------------------------------
# ingestion


_SPLIT = re.compile(r"[,\t ]+")


def _read(source) -> str:
    if isinstance(source, str):
        return source
    if hasattr(source, "read"):
        return source.read()
    raise TypeError(f"cannot read from {type(source).__name__}")


def _to_float(tok: str, where: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"non-numeric value {tok!r} {where}") from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {tok!r} {where}")
    return v


def parse_ucr(source: str | TextIO) -> LabeledDataset:
    """Parse UCR-style text: one ``label, v1, ..., vT`` record per line."""
    text = _read(source)
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        if len(fields) < 2:
            raise ParseError(f"line {lineno}: expected a label and at least one value")
        label = fields[0]
        values = [_to_float(t, f"at line {lineno}") for t in fields[1:]]
        entries.append((label, TimeSeries(values)))
    if not entries:
        raise DatasetError("no records found in UCR input")
    return LabeledDataset(tuple(entries))


def parse_multivariate(source: str | TextIO) -> LabeledDataset:
    """Parse the ``#dims D`` multivariate format.

    Each record is a label line followed by T rows of D numbers; records are
    separated by blank lines.
    """
    text = _read(source)
    lines = text.splitlines()
    idx = 0
    while idx < len(lines) and not lines[idx].strip():
        idx += 1
    m = re.fullmatch(r"#\s*dims\s+(\d+)", lines[idx].strip()) if idx < len(lines) else None
    if m is None:
        raise ParseError("missing '#dims D' header")
    dims = int(m.group(1))
    if dims < 1:
        raise ParseError("'#dims' must be at least 1")

    records: list[list[str]] = []
    current: list[str] = []
    for line in lines[idx + 1:]:
        if line.strip():
            current.append(line.strip())
        elif current:
            records.append(current)
            current = []
    if current:
        records.append(current)

    entries = []
    for rec_idx, rec in enumerate(records, start=1):
        label, rows = rec[0], rec[1:]
        if not rows:
            raise ParseError(f"record {rec_idx}: no samples after label {label!r}")
        samples = []
        for row in rows:
            fields = [f for f in _SPLIT.split(row) if f]
            if len(fields) != dims:
                raise ParseError(
                    f"record {rec_idx}: row has {len(fields)} values, expected {dims}"
                )
            samples.append([_to_float(t, f"in record {rec_idx}") for t in fields])
        entries.append((label, TimeSeries(samples)))
    if not entries:
        raise DatasetError("no records found in multivariate input")
    return LabeledDataset(tuple(entries))


def load_dataset(path) -> LabeledDataset:
    """Read a dataset file, picking the parser from its first non-blank line."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    first = next((ln for ln in text.splitlines() if ln.strip()), "")
    if first.strip().startswith("#dims") or first.strip().startswith("# dims"):
        return parse_multivariate(text)
    return parse_ucr(text)


def _fmt(v: float) -> str:
    # repr gives the shortest string that round-trips a double
    return repr(float(v))


def format_ucr(dataset: LabeledDataset) -> str:
    if dataset.dim != 1:
        raise DimensionError("UCR format holds scalar series only; use format_multivariate")
    out = io.StringIO()
    for label, ts in dataset:
        out.write(",".join([label] + [_fmt(v) for v in ts.values[:, 0]]))
        out.write("\n")
    return out.getvalue()


def format_multivariate(dataset: LabeledDataset) -> str:
    out = io.StringIO()
    out.write(f"#dims {dataset.dim}\n")
    for k, (label, ts) in enumerate(dataset):
        if k:
            out.write("\n")
        out.write(f"{label}\n")
        for row in ts.values:
            out.write(" ".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def format_dataset(dataset: LabeledDataset) -> str:
    return format_ucr(dataset) if dataset.dim == 1 else format_multivariate(dataset)


def series_to_csv(ts) -> str:
    """One row per timestamp, d comma-separated columns."""
    arr = as_array(ts)
    return "".join(",".join(_fmt(v) for v in row) + "\n" for row in arr)


def series_from_csv(text: str) -> TimeSeries:
    rows = [ln for ln in text.splitlines() if ln.strip()]
    return TimeSeries([[_to_float(t, f"at row {k}") for t in r.split(",")]
                       for k, r in enumerate(rows, start=1)])


def znormalize(ts) -> TimeSeries:
    """Per-channel z-normalization; constant channels are only centered."""
    arr = as_array(ts)
    mu = arr.mean(axis=0)
    sd = arr.std(axis=0)
    sd[sd == 0] = 1.0
    return TimeSeries((arr - mu) / sd)


# ---------------------------------------------------------------------------
# synthetic fixtures


def _triangle(T: int, center: float, half_width: float, height: float) -> np.ndarray:
    t = np.arange(1, T + 1, dtype=float)
    return height * np.clip(1.0 - np.abs(t - center) / half_width, 0.0, None)


def synth_fixtures(kind: str, **params) -> LabeledDataset:
    """Deterministic toy datasets.

    kinds
    -----
    triangle_pair : T, t1, t2, half_width=25, height=1
        Two identical triangles peaking at t1 and t2 (1-based).
    sine_halfwave : T, periods=3
        A positive half sine wave and a full sine with ``periods`` periods.
    pwm_like : T, n_per_class=10, seed=0
        Three classes of pulse trains with duty cycles 0.25 / 0.5 / 0.75.
        Only an approximation of the PWM benchmark.
    cbf : n_per_class=10, T=128, seed=0
        Cylinder-Bell-Funnel series, z-normalized.
    """
    if kind == "triangle_pair":
        T = int(params.get("T", 100))
        t1, t2 = params.get("t1", 30), params.get("t2", 70)
        hw = float(params.get("half_width", 25))
        height = float(params.get("height", 1.0))
        if T < 1:
            raise ParameterError("T must be >= 1")
        for c in (t1, t2):
            if not 1 <= c <= T:
                raise ParameterError(f"peak center {c} outside [1, {T}]")
        if t1 == t2:
            raise ParameterError("triangle centers must differ")
        return LabeledDataset((("1", TimeSeries(_triangle(T, t1, hw, height))),
                               ("2", TimeSeries(_triangle(T, t2, hw, height)))))
    if kind == "sine_halfwave":
        T = int(params.get("T", 128))
        periods = int(params.get("periods", 3))
        if T < 2:
            raise ParameterError("T must be >= 2")
        t = np.arange(T, dtype=float) / (T - 1)
        half = np.sin(np.pi * t)
        full = np.sin(2 * np.pi * periods * t)
        return LabeledDataset((("halfwave", TimeSeries(np.clip(half, 0.0, None))),
                               ("sine", TimeSeries(full))))
    if kind == "pwm_like":
        return _pwm_like(int(params.get("T", 128)), int(params.get("n_per_class", 10)),
                         int(params.get("seed", 0)))
    if kind == "cbf":
        return cbf(int(params.get("n_per_class", 10)), int(params.get("T", 128)),
                   int(params.get("seed", 0)))
    raise ParameterError(f"unknown fixture kind {kind!r}")


def _pwm_like(T: int, n_per_class: int, seed: int) -> LabeledDataset:
    rng = np.random.default_rng(seed)
    entries = []
    for label, duty in (("1", 0.25), ("2", 0.5), ("3", 0.75)):
        for _ in range(n_per_class):
            period = int(rng.integers(12, 24))
            phase = int(rng.integers(0, period))
            t = np.arange(T) + phase
            x = ((t % period) < duty * period).astype(float)
            entries.append((label, TimeSeries(x + 0.05 * rng.standard_normal(T))))
    return LabeledDataset(tuple(entries))


def cbf(n_per_class: int = 10, T: int = 128, seed: int = 0) -> LabeledDataset:
    """Cylinder-Bell-Funnel generator (Saito's construction), z-normalized.

    Labels "1" (cylinder), "2" (bell), "3" (funnel), interleaved by class.
    """
    if T < 33:
        raise ParameterError("CBF needs T >= 33")
    rng = np.random.default_rng(seed)
    t = np.arange(1, T + 1, dtype=float)
    entries = []
    for _ in range(n_per_class):
        for label in ("1", "2", "3"):
            a = rng.uniform(16, 32) * T / 128
            b = a + rng.uniform(32, 96) * T / 128
            eta = rng.standard_normal()
            window = ((t >= a) & (t <= b)).astype(float)
            if label == "1":
                shape = window
            elif label == "2":
                shape = window * (t - a) / (b - a)
            else:
                shape = window * (b - t) / (b - a)
            x = (6 + eta) * shape + rng.standard_normal(T)
            entries.append((label, znormalize(x)))
    return LabeledDataset(tuple(entries))


def subset(dataset: LabeledDataset, indices: Sequence[int]) -> LabeledDataset:
    return LabeledDataset(tuple(dataset.entries[i] for i in indices))
