"""Finite-sum optimization toolkit.

Recursive-gradient and snapshot-anchored variance-reduced solvers with
baselines, an exact small-instance expectation oracle, closed-form
convergence-rate calculators, LIBSVM data handling, and a CSV-emitting
experiment harness.  Everything is deterministic given a seed.
"""

__version__ = "0.1.0"

from . import data, harness, numkit, objectives, optimizers, oracle, rng, theory  # noqa: F401,E402
from .optimizers import RunResult, SolverConfig, TraceRecord, run  # noqa: F401,E402
