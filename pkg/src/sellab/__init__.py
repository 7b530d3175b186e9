"""Steady states, moment closures and phase-averaged quasi-probabilities of a
single-emitter laser."""

from .errors import SelLabError
from .hilbert import FockTruncation, build_operators, expectation
from .liouvillian import (
    LaserParams,
    build_liouvillian,
    evolve,
    observables,
    solve_steady_state,
    steady_state,
)
from .moments import coefficient_table, mandel_q, solve_moments
from .quasiprob import husimi_radial, limit_solutions, p_to_q_transform

__version__ = "0.1.0"

__all__ = [
    "FockTruncation",
    "LaserParams",
    "SelLabError",
    "build_liouvillian",
    "build_operators",
    "coefficient_table",
    "evolve",
    "expectation",
    "husimi_radial",
    "limit_solutions",
    "mandel_q",
    "observables",
    "p_to_q_transform",
    "solve_moments",
    "solve_steady_state",
    "steady_state",
]
