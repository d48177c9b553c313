"""Monte Carlo comparison of rho_DCCA and Pearson's coefficient on ARFIMA pairs.

A grid cell is a triple (d, rho, T). For every cell, ``reps`` pairs are drawn
and each pair is scored by every requested estimator (DCCA at every scale of
the cell, Pearson once). Every repetition draws from its own PCG64 stream,
seeded by ``derive_seed(base_seed, cell_key(d, rho, T), rep)``. A cell's
numbers therefore depend only on ``base_seed`` and the cell itself. They do
not depend on the rest of the grid, the worker count or scheduling.
"""

from __future__ import annotations

import logging
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .arfima import D_MAX, D_MIN, ArfimaParams, arfima_pair
from .detrend import DEFAULT_MODE, MIN_SCALE, BoxMode, pearson, rho_dcca_scales
from .errors import DegenerateInputError

logger = logging.getLogger(__name__)

DEFAULT_D = (0.1, 0.4, 0.6, 0.9, 1.1, 1.4)
DEFAULT_RHO = tuple(k / 10 for k in range(-9, 10))
DEFAULT_T = (1000, 5000)
DEFAULT_SCALE_FRACTIONS = (Fraction(1, 100), Fraction(1, 50), Fraction(1, 10), Fraction(1, 5))
ESTIMATORS = ("dcca", "pearson")

CHUNK_REPS = 250

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """SplitMix64 output finalizer; a bijection on 64-bit integers."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, cell_index: int, rep_index: int) -> int:
    """Seed of the random stream for one repetition of one cell.

    ``h0 = mix(base + G)``, ``h1 = mix((h0 ^ cell) + G)``, ``h2 = mix((h1 ^ rep) + G)``,
    where ``mix`` is the SplitMix64 finalizer, ``G = 0x9E3779B97F4A7C15`` and all
    arithmetic is modulo 2**64. For fixed base and cell the map rep -> seed is a
    bijection, so distinct repetitions never share a stream.
    """
    h = _mix64((base_seed & _MASK64) + _GOLDEN64)
    h = _mix64((h ^ (cell_index & _MASK64)) + _GOLDEN64)
    return _mix64((h ^ (rep_index & _MASK64)) + _GOLDEN64)


def _float_bits(v: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(v) + 0.0))[0]


def cell_key(d: float, rho: float, T: int) -> int:
    """Stable 64-bit identifier of a (d, rho, T) cell, built from the IEEE-754 bits."""
    h = _mix64(_float_bits(d) + _GOLDEN64)
    h = _mix64((h ^ _float_bits(rho)) + _GOLDEN64)
    return _mix64((h ^ (int(T) & _MASK64)) + _GOLDEN64)


def parse_fraction(text) -> Fraction:
    """Parse ``"1/100"``, ``"0.01"`` or a number into an exact fraction."""
    try:
        f = Fraction(str(text).strip()) if not isinstance(text, Fraction) else text
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"invalid scale fraction {text!r}") from exc
    if f <= 0 or f > 1:
        raise ValueError(f"scale fraction must lie in (0, 1], got {text!r}")
    return f


def resolve_scale(T: int, frac: Fraction) -> int:
    s = frac * T
    if s.denominator != 1 or s < MIN_SCALE:
        raise ValueError(f"scale fraction {frac} gives s={float(s):g} for T={T}; need an integer >= {MIN_SCALE}")
    return int(s)


@dataclass(frozen=True)
class GridSpec:
    d_values: tuple[float, ...] = DEFAULT_D
    rho_values: tuple[float, ...] = DEFAULT_RHO
    T_values: tuple[int, ...] = DEFAULT_T
    scale_fractions: tuple[Fraction, ...] = DEFAULT_SCALE_FRACTIONS
    reps: int = 1000
    base_seed: int = 0
    estimators: tuple[str, ...] = ESTIMATORS
    mode: BoxMode = DEFAULT_MODE

    def __post_init__(self):
        object.__setattr__(self, "scale_fractions", tuple(parse_fraction(f) for f in self.scale_fractions))
        object.__setattr__(self, "mode", BoxMode(self.mode))
        self.validate()

    def validate(self) -> None:
        if not self.d_values or not self.rho_values or not self.T_values:
            raise ValueError("d, rho and T lists must be nonempty")
        for d in self.d_values:
            if not math.isfinite(d) or not (D_MIN < d <= D_MAX):
                raise ValueError(f"d={d} outside ({D_MIN}, {D_MAX}]")
        for r in self.rho_values:
            if not math.isfinite(r) or abs(r) > 1:
                raise ValueError(f"rho={r} outside [-1, 1]")
        for T in self.T_values:
            if int(T) != T or T < 2:
                raise ValueError(f"T={T} must be an integer >= 2")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ValueError(f"reps must be a positive integer, got {self.reps}")
        if not (0 <= self.base_seed <= _MASK64):
            raise ValueError("base_seed must be an unsigned 64-bit integer")
        if not self.estimators or any(e not in ESTIMATORS for e in self.estimators):
            raise ValueError(f"estimators must be a nonempty subset of {ESTIMATORS}")
        if "dcca" in self.estimators:
            if not self.scale_fractions:
                raise ValueError("dcca needs at least one scale fraction")
            for T in self.T_values:
                for s in self.scales_for(T):
                    if s > T:
                        raise ValueError(f"s={s} exceeds T={T}")

    def scales_for(self, T: int) -> list[int]:
        return sorted({resolve_scale(T, f) for f in self.scale_fractions})

    def cells(self) -> list[tuple[float, float, int]]:
        return [(d, r, T) for d in self.d_values for r in self.rho_values for T in self.T_values]


@dataclass(frozen=True)
class AggregateRow:
    estimator: str
    d: float
    rho_true: float
    T: int
    s: Optional[int]
    q025: float
    median: float
    q975: float
    sd: float
    reps: int

    def sort_key(self):
        return (self.estimator, self.d, self.rho_true, self.T, -1 if self.s is None else self.s)


@dataclass(frozen=True)
class CellError:
    estimator: str
    d: float
    rho_true: float
    T: int
    s: Optional[int]
    failed: int
    message: str


@dataclass
class GridResult:
    rows: list[AggregateRow]
    errors: list[CellError] = field(default_factory=list)
    cells: int = 0
    reps: int = 0


def aggregate(samples) -> tuple[float, float, float, float]:
    """Return ``(q025, median, q975, sd)`` of ``samples``.

    Quantiles interpolate linearly between order statistics at the 1-based
    position ``p (n - 1) + 1``. ``sd`` uses the ``n - 1`` denominator and is
    0 for a single sample.
    """
    a = np.asarray(samples, dtype=float)
    if a.size == 0:
        raise ValueError("cannot aggregate an empty sample")
    q025, med, q975 = np.quantile(a, [0.025, 0.5, 0.975], method="linear")
    sd = float(np.std(a, ddof=1)) if a.size > 1 else 0.0
    return float(q025), float(med), float(q975), sd


def _run_chunk(task):
    """Estimates for repetitions ``[start, stop)`` of one cell.

    Returns an array of shape (stop - start, n_scales + 1); the last column is
    Pearson. Degenerate estimates are NaN and reported in the message list.
    """
    d, rho, T, scales, want_dcca, want_pearson, mode, base_seed, start, stop = task
    key = cell_key(d, rho, T)
    out = np.full((stop - start, len(scales) + 1), np.nan)
    messages = []
    for i, rep in enumerate(range(start, stop)):
        pair = arfima_pair(ArfimaParams(d, d, rho, T, derive_seed(base_seed, key, rep)))
        if want_dcca:
            try:
                out[i, :-1] = rho_dcca_scales(pair.x, pair.y, scales, mode)
            except DegenerateInputError:
                for k, s in enumerate(scales):
                    try:
                        out[i, k] = rho_dcca_scales(pair.x, pair.y, [s], mode)[0]
                    except DegenerateInputError as exc:
                        messages.append((k, str(exc)))
        if want_pearson:
            try:
                out[i, -1] = pearson(pair.x, pair.y)
            except DegenerateInputError as exc:
                messages.append((len(scales), str(exc)))
    return out, messages


ProgressSink = Callable[[int, int], None]


def run_grid(spec: GridSpec, progress: ProgressSink | None = None, threads: int = 1) -> GridResult:
    """Simulate every cell of ``spec`` and aggregate each estimator.

    Work is split into chunks of at most ``CHUNK_REPS`` repetitions. With
    ``threads > 1`` the chunks run in a process pool. Results are written back
    by (cell, repetition), so the output is identical for any ``threads``.
    """
    spec.validate()
    want_dcca = "dcca" in spec.estimators
    want_pearson = "pearson" in spec.estimators
    cells = spec.cells()
    tasks, owners = [], []
    for ci, (d, rho, T) in enumerate(cells):
        scales = tuple(spec.scales_for(T)) if want_dcca else ()
        for start in range(0, spec.reps, CHUNK_REPS):
            stop = min(start + CHUNK_REPS, spec.reps)
            tasks.append((d, rho, T, scales, want_dcca, want_pearson, spec.mode.value, spec.base_seed, start, stop))
            owners.append(ci)

    estimates = [None] * len(cells)
    failures: dict[tuple[int, int], list[str]] = {}

    def collect(idx, result):
        ci = owners[idx]
        task = tasks[idx]
        block, messages = result
        if estimates[ci] is None:
            estimates[ci] = np.full((spec.reps, block.shape[1]), np.nan)
        estimates[ci][task[-2]:task[-1]] = block
        for col, msg in messages:
            failures.setdefault((ci, col), []).append(msg)

    total = len(tasks)
    if threads <= 1:
        for idx, task in enumerate(tasks):
            collect(idx, _run_chunk(task))
            if progress:
                progress(idx + 1, total)
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for idx, result in enumerate(pool.map(_run_chunk, tasks)):
                collect(idx, result)
                if progress:
                    progress(idx + 1, total)

    rows: list[AggregateRow] = []
    errors: list[CellError] = []
    for ci, (d, rho, T) in enumerate(cells):
        est = estimates[ci]
        scales = spec.scales_for(T) if want_dcca else []
        columns = []
        if want_dcca:
            columns += [("dcca", k, s) for k, s in enumerate(scales)]
        if want_pearson:
            columns.append(("pearson", len(scales), None))
        for name, col, s in columns:
            values = est[:, col]
            ok = values[~np.isnan(values)]
            if np.any(np.abs(ok) > 1.0):
                raise RuntimeError(f"{name} estimate outside [-1, 1] in cell d={d}, rho={rho}, T={T}, s={s}")
            msgs = failures.get((ci, col))
            if msgs:
                errors.append(CellError(name, d, rho, T, s, len(msgs), msgs[0]))
                logger.warning("cell d=%g rho=%g T=%d s=%s: %d degenerate repetitions", d, rho, T, s, len(msgs))
            if ok.size == 0:
                continue
            q025, med, q975, sd = aggregate(ok)
            rows.append(AggregateRow(name, d, rho, T, s, q025, med, q975, sd, int(ok.size)))
    rows.sort(key=AggregateRow.sort_key)
    return GridResult(rows=rows, errors=errors, cells=len(cells), reps=spec.reps)


def rows_for(rows: Sequence[AggregateRow], **match) -> list[AggregateRow]:
    """Filter rows by exact field values, e.g. ``rows_for(rows, estimator="dcca", d=0.4)``."""
    return [r for r in rows if all(getattr(r, k) == v for k, v in match.items())]
