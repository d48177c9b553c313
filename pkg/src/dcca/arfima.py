"""Simulation of ARFIMA(0,d,0) pairs driven by correlated Gaussian innovations.

Each series is a finite-history moving average of its innovations,

    x_t = sum_{n=0}^{t-1} a_n(d) eps_{t-n},    a_n(d) = Gamma(n+d) / (Gamma(n+1) Gamma(d)),

so that x_t depends on eps_1..eps_t only. No burn-in is discarded: the output
length is exactly ``T``. For ``d >= 0.5`` there is no stationary infinite-past
representation, and the finite-history form is the process itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

D_MIN = -0.5
D_MAX = 1.5


def _check_d(d: float) -> None:
    if not math.isfinite(d) or d <= D_MIN:
        raise DomainError(f"d must be finite and > {D_MIN}, got {d!r}")


def _check_rho(rho: float) -> None:
    if not math.isfinite(rho) or abs(rho) > 1.0:
        raise DomainError(f"rho must lie in [-1, 1], got {rho!r}")


def ma_coefficients(d: float, n_max: int) -> np.ndarray:
    """Moving-average weights a_0..a_{n_max} of fractional integration of order d.

    Uses the forward recurrence ``a_n = a_{n-1} (n - 1 + d) / n`` which equals the
    Gamma-function ratio but never overflows.

    Args:
        d: fractional integration order, ``d > -0.5``.
        n_max: largest lag, ``n_max >= 0``.

    Returns:
        Array of length ``n_max + 1``.

    Raises:
        DomainError: if ``d`` is non-finite or ``d <= -0.5``.
    """
    _check_d(d)
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    return _ma_coefficients(float(d), int(n_max)).copy()


@lru_cache(maxsize=64)
def _ma_coefficients(d: float, n_max: int) -> np.ndarray:
    # plain float64 keeps results platform independent; relative drift is ~2e-13 at n = 1e4
    n = np.arange(1, n_max + 1, dtype=float)
    factors = np.empty(n_max + 1)
    factors[0] = 1.0
    factors[1:] = (n - 1.0 + d) / n
    a = np.cumprod(factors)
    a.flags.writeable = False
    return a


def fractional_integrate(innovations: np.ndarray, d: float) -> np.ndarray:
    """Apply the finite-history filter with weights a_n(d) to ``innovations``.

    The result is linear in ``innovations``. The sum is evaluated directly
    (O(T^2)) so it is exact up to floating point rounding.
    """
    e = np.asarray(innovations, dtype=float)
    T = e.shape[0]
    if T == 0:
        return e.copy()
    _check_d(d)
    return np.convolve(_ma_coefficients(float(d), T - 1), e)[:T]


@dataclass(frozen=True)
class InnovationPair:
    eps: np.ndarray
    nu: np.ndarray


@dataclass(frozen=True)
class ArfimaParams:
    """Parameters of one simulated pair.

    ``d1``/``d2`` must lie in (-0.5, 1.5], ``|rho| <= 1`` and ``T >= 2``.
    ``seed`` is an unsigned 64-bit integer.
    """

    d1: float
    d2: float
    rho: float
    T: int
    seed: int

    def __post_init__(self):
        for name in ("d1", "d2"):
            d = getattr(self, name)
            if not math.isfinite(d) or not (D_MIN < d <= D_MAX):
                raise DomainError(f"{name} must lie in ({D_MIN}, {D_MAX}], got {d!r}")
        _check_rho(self.rho)
        if int(self.T) != self.T or self.T < 2:
            raise DomainError(f"T must be an integer >= 2, got {self.T!r}")
        if not (0 <= self.seed < 2**64):
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class SeriesPair:
    x: np.ndarray
    y: np.ndarray


def correlated_innovations(T: int, rho: float, seed: int) -> InnovationPair:
    """Draw ``T`` i.i.d. standard normal pairs with contemporaneous correlation ``rho``.

    ``nu = rho * eps + sqrt(1 - rho^2) * eta`` with ``eta`` independent of ``eps``.
    Both draws come from a PCG64 stream seeded with ``seed``; ``eps`` first.
    """
    _check_rho(rho)
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    rng = np.random.Generator(np.random.PCG64(seed))
    eps = rng.standard_normal(T)
    eta = rng.standard_normal(T)
    nu = rho * eps + math.sqrt(1.0 - rho * rho) * eta
    return InnovationPair(eps=eps, nu=nu)


def arfima_pair(params: ArfimaParams) -> SeriesPair:
    """Generate the pair (x, y) of ARFIMA(0,d1,0) / ARFIMA(0,d2,0) series."""
    inn = correlated_innovations(params.T, params.rho, params.seed)
    x = fractional_integrate(inn.eps, params.d1)
    y = fractional_integrate(inn.nu, params.d2)
    return SeriesPair(x=x, y=y)
