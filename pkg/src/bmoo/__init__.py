"""Bayesian optimization of constrained single- and multi-objective problems."""

from .driver import RunConfig, RunRecord, bench, run_bmoo
from .problems import get_problem, list_problems

__version__ = "0.1.0"

__all__ = ["RunConfig", "RunRecord", "bench", "run_bmoo", "get_problem", "list_problems"]
