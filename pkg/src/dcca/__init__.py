"""DCCA correlation coefficient, ARFIMA simulation and a Monte Carlo harness."""

__version__ = "0.1.0"

from .arfima import ArfimaParams, InnovationPair, SeriesPair, arfima_pair, correlated_innovations, ma_coefficients
from .detrend import (
    BoxMode,
    BoxPartition,
    FluctuationPair,
    box_fit,
    dcca_fluctuation,
    dfa_fluctuation,
    fluctuations,
    partition,
    pearson,
    profile,
    rho_dcca,
    rho_dcca_scales,
)
from .errors import DegenerateInputError, DomainError
from .montecarlo import AggregateRow, GridSpec, aggregate, derive_seed, run_grid
