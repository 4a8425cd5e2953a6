"""Asymptotic approximation schemes for bin packing with cardinality constraints
and bin packing with rejection, with exact oracles for checking them."""

from .assembly import PackedBin, Packing
from .config import Configuration, GeneralizedConfiguration, Window, WindowUniverse, build_window_universe, main_window
from .core import CaseTag, Instance, Item, ItemType, Problem, RoundedInstance, load_instance, round_instance, validate_and_normalize
from .errors import (
    AfptasError,
    ConvergenceFailure,
    InternalInvariantViolation,
    InvalidCardinality,
    InvalidEpsilon,
    InvalidItem,
    NumericalInstability,
    TooLarge,
)
from .generate import generate_instance
from .pricing import PricingItem, PricingProblem, kcc_fptas, kcc_sweep, knapsack_fptas
from .solver import Guarantee, SolveReport, guarantee_of, solve
from .verify import ExactResult, brute_knapsack, check, exact_bpcc, exact_bpr, ffd_baseline

__all__ = [
    "AfptasError", "CaseTag", "Configuration", "ConvergenceFailure", "ExactResult", "GeneralizedConfiguration",
    "Guarantee", "Instance", "InternalInvariantViolation", "InvalidCardinality", "InvalidEpsilon", "InvalidItem",
    "Item", "ItemType", "NumericalInstability", "PackedBin", "Packing", "PricingItem", "PricingProblem", "Problem",
    "RoundedInstance", "SolveReport", "TooLarge", "Window", "WindowUniverse", "brute_knapsack",
    "build_window_universe", "check", "exact_bpcc", "exact_bpr", "ffd_baseline", "generate_instance",
    "guarantee_of", "kcc_fptas", "kcc_sweep", "knapsack_fptas", "load_instance", "main_window",
    "round_instance", "solve", "validate_and_normalize",
]
