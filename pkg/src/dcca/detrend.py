"""Profiles, box partitions, DFA/DCCA fluctuations and the DCCA coefficient.

Conventions:
  * box starts are 0-based internally (``start = j - 1`` for the 1-based ``j``);
  * within each box the profile is detrended by an OLS line in time;
  * per-box moments are normalised by ``s - 1`` and the fluctuation function is
    the plain mean of the per-box moments over all boxes of the partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateInputError

MIN_SCALE = 4


class BoxMode(str, Enum):
    OVERLAPPING = "overlapping"
    NON_OVERLAPPING = "non-overlapping"


DEFAULT_MODE = BoxMode.NON_OVERLAPPING


def _as_series(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.shape[0] < 2:
        raise ValueError(f"{name} needs at least 2 observations, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def profile(x) -> np.ndarray:
    """Cumulative sum of the demeaned series, ``X_t = sum_{i<=t} (x_i - mean(x))``."""
    arr = _as_series(x)
    return np.cumsum(arr - arr.mean())


@dataclass(frozen=True)
class BoxPartition:
    """Windows of length ``s`` over a series of length ``T``.

    ``starts`` holds 0-based start offsets in ascending order.
    """

    T: int
    s: int
    mode: BoxMode
    starts: np.ndarray

    def __len__(self) -> int:
        return len(self.starts)

    @property
    def boxes(self) -> list[tuple[int, int]]:
        return [(int(j), self.s) for j in self.starts]


def partition(T: int, s: int, mode: BoxMode | str = DEFAULT_MODE) -> BoxPartition:
    """Split ``range(T)`` into boxes of length ``s``.

    Overlapping mode yields every window, ``T - s + 1`` of them. Non-overlapping
    mode tiles the series from the start; when ``s`` does not divide ``T`` it
    also tiles from the end, so the ``T mod s`` leftover points are covered and
    the partition holds ``2 * (T // s)`` boxes.
    """
    mode = BoxMode(mode)
    T = int(T)
    s = int(s)
    if s < MIN_SCALE:
        raise ValueError(f"scale s must be >= {MIN_SCALE}, got {s}")
    if s > T:
        raise ValueError(f"scale s={s} exceeds series length T={T}")
    if mode is BoxMode.OVERLAPPING:
        starts = np.arange(T - s + 1)
    else:
        n = T // s
        head = np.arange(n) * s
        if T % s == 0:
            starts = head
        else:
            starts = np.concatenate([head, head + (T - n * s)])
    return BoxPartition(T=T, s=s, mode=mode, starts=starts)


def box_fit(X, j: int, s: int) -> np.ndarray:
    """OLS linear trend of ``X[j:j+s]`` against time, evaluated on the box."""
    X = np.asarray(X, dtype=float)
    if j < 0 or s < 2 or j + s > X.shape[0]:
        raise IndexError(f"box (start={j}, length={s}) outside series of length {X.shape[0]}")
    seg = X[j:j + s]
    return seg - _residuals(seg[None, :])[0]


def _residuals(segments: np.ndarray) -> np.ndarray:
    """Residuals of each row about its own least-squares line in time."""
    s = segments.shape[1]
    t = np.arange(s) - (s - 1) / 2.0
    centred = segments - segments.mean(axis=1, keepdims=True)
    slope = np.sum(centred * t, axis=1) / np.sum(t * t)
    return centred - slope[:, None] * t[None, :]


def _box_residuals(X: np.ndarray, part: BoxPartition) -> np.ndarray:
    idx = part.starts[:, None] + np.arange(part.s)[None, :]
    return _residuals(X[idx])


def _mean_box_covariance(rx: np.ndarray, ry: np.ndarray, s: int) -> float:
    per_box = np.sum(rx * ry, axis=1) / (s - 1)
    # np.sum is pairwise, which keeps the O(T) box sum accurate
    return float(np.sum(per_box) / per_box.shape[0])


@dataclass(frozen=True)
class FluctuationPair:
    f2_dfa_x: float
    f2_dfa_y: float
    f2_dcca: float
    s: int


def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    xa = _as_series(x, "x")
    ya = _as_series(y, "y")
    if xa.shape != ya.shape:
        raise ValueError(f"length mismatch: len(x)={xa.shape[0]}, len(y)={ya.shape[0]}")
    return xa, ya


def dfa_fluctuation(x, s: int, mode: BoxMode | str = DEFAULT_MODE) -> float:
    """Detrended variance F^2_DFA(s) of the profile of ``x``."""
    X = profile(x)
    part = partition(X.shape[0], s, mode)
    r = _box_residuals(X, part)
    return _mean_box_covariance(r, r, part.s)


def dcca_fluctuation(x, y, s: int, mode: BoxMode | str = DEFAULT_MODE) -> float:
    """Detrended covariance F^2_DCCA(s) of the profiles of ``x`` and ``y``. May be negative."""
    xa, ya = _check_pair(x, y)
    part = partition(xa.shape[0], s, mode)
    rx = _box_residuals(profile(xa), part)
    ry = _box_residuals(profile(ya), part)
    return _mean_box_covariance(rx, ry, part.s)


def fluctuations(x, y, s: int, mode: BoxMode | str = DEFAULT_MODE) -> FluctuationPair:
    """All three fluctuation functions at scale ``s`` from one set of box residuals."""
    xa, ya = _check_pair(x, y)
    return _fluctuations_from_profiles(profile(xa), profile(ya), s, mode)


def _fluctuations_from_profiles(X, Y, s, mode) -> FluctuationPair:
    part = partition(X.shape[0], s, mode)
    rx = _box_residuals(X, part)
    ry = _box_residuals(Y, part)
    return FluctuationPair(
        f2_dfa_x=_mean_box_covariance(rx, rx, part.s),
        f2_dfa_y=_mean_box_covariance(ry, ry, part.s),
        f2_dcca=_mean_box_covariance(rx, ry, part.s),
        s=part.s,
    )


# Residual RMS below this fraction of the profile's magnitude is rounding noise.
_DEGENERATE_RTOL = 1e-12


def _ratio(fp: FluctuationPair, X: np.ndarray, Y: np.ndarray) -> float:
    for f2, P, name in ((fp.f2_dfa_x, X, "F2_DFA,x"), (fp.f2_dfa_y, Y, "F2_DFA,y")):
        scale = float(np.max(np.abs(P)))
        if f2 <= 0.0 or math.sqrt(f2) <= _DEGENERATE_RTOL * scale:
            raise DegenerateInputError(
                name, f"degenerate input: {name} = 0 at s={fp.s} (profile locally linear)"
            )
    rho = fp.f2_dcca / (math.sqrt(fp.f2_dfa_x) * math.sqrt(fp.f2_dfa_y))
    return min(1.0, max(-1.0, rho))


def rho_dcca(x, y, s: int, mode: BoxMode | str = DEFAULT_MODE) -> float:
    """DCCA correlation coefficient ``F^2_DCCA / (F_DFA,x * F_DFA,y)`` at scale ``s``.

    Raises:
        DegenerateInputError: if either detrended variance vanishes.
    """
    xa, ya = _check_pair(x, y)
    X, Y = profile(xa), profile(ya)
    return _ratio(_fluctuations_from_profiles(X, Y, s, mode), X, Y)


def rho_dcca_scales(x, y, scales, mode: BoxMode | str = DEFAULT_MODE) -> list[float]:
    """``rho_dcca`` at several scales, building the profiles once."""
    xa, ya = _check_pair(x, y)
    X, Y = profile(xa), profile(ya)
    return [_ratio(_fluctuations_from_profiles(X, Y, s, mode), X, Y) for s in scales]


def pearson(x, y) -> float:
    """Product-moment correlation of the raw series."""
    xa, ya = _check_pair(x, y)
    cx = xa - xa.mean()
    cy = ya - ya.mean()
    sxx = float(np.sum(cx * cx))
    syy = float(np.sum(cy * cy))
    if sxx == 0.0:
        raise DegenerateInputError("var(x)")
    if syy == 0.0:
        raise DegenerateInputError("var(y)")
    r = float(np.sum(cx * cy)) / (math.sqrt(sxx) * math.sqrt(syy))
    return min(1.0, max(-1.0, r))
