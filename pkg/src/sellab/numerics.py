"""Numerical kernel: dense solves, semi-infinite quadrature, special functions
and finite-part integrals with an endpoint power singularity."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.special
from scipy import integrate

from .errors import DomainError, NonConvergent, SingularityOutOfDomain, SingularMatrix

PIVOT_RTOL = 1e-14


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-11
    max_subdivisions: int = 200

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
        if self.max_subdivisions < 8:
            raise ValueError("max_subdivisions must be >= 8")


DEFAULT_QUADRATURE = QuadratureSpec()


def solve_linear(A, b):
    """Solve ``A x = b`` by LU factorisation with partial pivoting.

    Raises SingularMatrix when a pivot falls below ``1e-14 * ||A||_inf``.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise ValueError(f"b has length {b.shape[0]}, expected {A.shape[0]}")
    if not np.all(np.isfinite(A)):
        raise ValueError("A contains non-finite entries")

    norm = np.abs(A).sum(axis=1).max()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if norm == 0.0 or pivots.min() < PIVOT_RTOL * norm:
        raise SingularMatrix(
            f"pivot {pivots.min():.3e} below {PIVOT_RTOL:g} * ||A||_inf = {PIVOT_RTOL * norm:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def _quad(f, a, b, spec: QuadratureSpec, **kwargs) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info, *failure = integrate.quad(
            f, a, b,
            epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions,
            full_output=1, **kwargs,
        )
    # quad only appends a message when it gave up before meeting the tolerance
    if failure and err > max(spec.abs_tol, spec.rel_tol * abs(value)):
        raise NonConvergent(
            f"quadrature on [{a}, {b}] stopped after {info['last']} panels "
            f"with error estimate {err:.3e}: {failure[0]}"
        )
    return float(value)


def integrate_semi_infinite(f: Callable[[float], float],
                            spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Integrate ``f`` over [0, inf) with adaptive Gauss-Kronrod panels on the
    mapped interval. ``f`` must decay exponentially."""
    return _quad(f, 0.0, np.inf, spec)


def integrate_interval(f, a: float, b: float,
                       spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    return _quad(f, a, b, spec)


def _derivative(g, x, h):
    return (-g(x + 2 * h) + 8 * g(x + h) - 8 * g(x - h) + g(x - 2 * h)) / (12 * h)


def finite_part_integral(g: Callable[[float], float], s: float = 0.5, p: float = 1.5,
                         spec: QuadratureSpec = DEFAULT_QUADRATURE,
                         dg: Optional[Callable[[float], float]] = None) -> float:
    """Hadamard finite part of ``int_0^s g(x) (1 - x/s)^(-p) dx``.

    For ``s = 1/2`` the weight is ``(1 - 2x)^(-p)``. The two leading Taylor terms
    of ``g`` about ``s`` are subtracted and integrated in closed form; the
    remainder vanishes like ``(s - x)^(2 - p)`` and goes to ordinary quadrature.
    ``dg`` is the derivative of ``g``; without it a five-point stencil is used
    (the value is independent of it in exact arithmetic, it only smooths the
    remainder).
    """
    if not s > 0.0:
        raise SingularityOutOfDomain(f"singularity location must be > 0, got {s!r}")
    if not 0.0 < p < 2.0 or p == 1.0:
        raise DomainError(f"power must lie in (0, 2) excluding 1, got {p!r}")

    g0 = float(g(s))
    g1 = float(dg(s)) if dg is not None else float(_derivative(g, s, 1e-4 * s))
    # u = 1 - x/s maps the singular endpoint to u = 0
    phi0 = g0
    phi1 = -s * g1

    def remainder(u):
        if u == 0.0:
            return 0.0
        return (g(s * (1.0 - u)) - phi0 - phi1 * u) * u ** (-p)

    regular = integrate_interval(remainder, 0.0, 1.0, spec)
    return s * (regular + phi0 / (1.0 - p) + phi1 / (2.0 - p))


def erf(x):
    return scipy.special.erf(x)


def _check_nonnegative(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} requires finite x >= 0")
    return arr


def bessel_i0(x, scaled: bool = False):
    """Modified Bessel function I0(x); with ``scaled`` returns ``exp(-x) I0(x)``."""
    x = _check_nonnegative(x, "bessel_i0")
    return scipy.special.i0e(x) if scaled else scipy.special.i0(x)


def bessel_i1(x, scaled: bool = False):
    x = _check_nonnegative(x, "bessel_i1")
    return scipy.special.i1e(x) if scaled else scipy.special.i1(x)


def stable_cosh_sinh_combo(I):
    """``exp(-I) * (cosh(sqrt(2I)) + sinh(sqrt(2I)) / sqrt(2I))`` without overflow.

    The dominant ``exp(sqrt(2I))`` is folded into ``exp(-I)`` before evaluation.
    """
    I = _check_nonnegative(I, "stable_cosh_sinh_combo")
    x = np.sqrt(2.0 * I)
    decay = np.exp(-2.0 * x)
    with np.errstate(invalid="ignore", divide="ignore"):
        sinhc = np.where(x > 0, -np.expm1(-2.0 * x) / (2.0 * np.where(x > 0, x, 1.0)), 1.0)
    result = np.exp(x - I) * (0.5 * (1.0 + decay) + sinhc)
    return float(result) if result.ndim == 0 else result
