"""Configuration LPs: restricted master, exact dense oracle and column generation."""

from .colgen import (
    ColumnGenerationResult,
    PricingOutcome,
    column_generation,
    price_all_windows,
    repair_duals,
    resolve_on_windows,
)
from .master import DualPrices, FractionalSolution, MasterLP, seed_master, solve_master
from .simplex import DenseResult, solve_dense

__all__ = [
    "ColumnGenerationResult",
    "DenseResult",
    "DualPrices",
    "FractionalSolution",
    "MasterLP",
    "PricingOutcome",
    "column_generation",
    "price_all_windows",
    "repair_duals",
    "resolve_on_windows",
    "seed_master",
    "solve_dense",
    "solve_master",
]
