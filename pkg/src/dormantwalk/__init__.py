"""Annealed survival of a random walk among moving traps with responsive dormancy.

Modules
-------
params       parameter block, pair state and error types
model        Gillespie and Monte Carlo simulation of the pair process
exact        truncated master-equation solver with a rigorous bracket
green        lattice Green kernels, potential kernel and hitting transforms
renewal      renewal decomposition, geometric clock and Z1 law
asymptotics  closed-form long-time asymptotics and crossover criteria
records      result records in CSV, TSV and JSON
cli          the ``dormantwalk`` command
"""
from .params import InvalidParameterError, ModelParams, NonConvergenceError, PairState
from .exact import MemoryBudgetError, SurvivalCurve, long_time_limit, survival
from .green import green_d3, green_generating, green_resolvent, potential_kernel
from .model import estimate_survival, sample_Z1_batch, simulate_path
from .asymptotics import baseline_asymptotic, crossover, responsive_asymptotic
from .records import ResultRecord, read_record, write_record

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "PairState",
    "InvalidParameterError",
    "NonConvergenceError",
    "MemoryBudgetError",
    "SurvivalCurve",
    "survival",
    "long_time_limit",
    "green_resolvent",
    "green_generating",
    "green_d3",
    "potential_kernel",
    "simulate_path",
    "estimate_survival",
    "sample_Z1_batch",
    "responsive_asymptotic",
    "baseline_asymptotic",
    "crossover",
    "ResultRecord",
    "read_record",
    "write_record",
]
