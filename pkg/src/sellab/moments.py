"""Reduced three-moment system for <n>, <n^2>, <n^3> of the laser field.

All inputs are the dimensionless rates ``omega = Gamma/2g``, ``eta = gamma/2g``
and ``tau = kappa/2g``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateParams, NearSingularSystem
from .numerics import solve_linear

UNDEFINED_MEAN_N = 1e-12


def mandel_q(mean_n: float, mean_n2: float) -> Optional[float]:
    """``(<n^2> - <n>^2) / <n> - 1``, or None when ``<n> < 1e-12``."""
    if mean_n < UNDEFINED_MEAN_N:
        return None
    return (mean_n2 - mean_n ** 2) / mean_n - 1.0


@dataclass(frozen=True)
class CoefficientTable:
    a02: float
    a03: float
    a10: float
    a11: float
    a12: float
    a20: float
    a21: float
    a22: float
    c11: float
    c12: float
    c21: float
    c22: float
    c23: float
    c31: float
    c32: float
    c33: float
    B: float

    @property
    def A(self) -> float:
        return self.c11

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.c11, self.c12, 0.0],
            [self.c21, self.c22, self.c23],
            [self.c31, self.c32, self.c33],
        ])

    def rhs(self) -> np.ndarray:
        return np.array([self.B, self.a10, 0.0])


def coefficient_table(omega: float, eta: float, tau: float) -> CoefficientTable:
    w, e, t = float(omega), float(eta), float(tau)
    if w + e == 0 or t == 0:
        raise DegenerateParams(f"need omega + eta > 0 and tau > 0, got omega={w}, eta={e}, tau={t}")

    a02 = t ** 3 / 2 * (t - w - e)
    a03 = t ** 4
    a10 = w / 4 * (t - w - e)
    a11 = t / 4 * (3 * e ** 2 * t + 9 * t ** 3 + 4 * w - 12 * t ** 2 * w
                   + e * (2 - 12 * t ** 2 + 6 * t * w) + t * (3 * w ** 2 - 2))
    a12 = t ** 2 / 2 * (7 * t ** 2 - 3 * t * e - 3 * t * w - 2)
    a20 = 0.25 * (6 * t ** 4 + w ** 2 - e ** 3 * t - 11 * t ** 3 * w - t * w ** 3
                  + e ** 2 * (6 * t ** 2 - 3 * t * w - 1)
                  + e * t * (12 * t * w + 4 - 11 * t ** 2 - 3 * w ** 2)
                  + t ** 2 * (6 * w ** 2 - 3))
    a21 = t / 2 * (e ** 2 * t + 3 * t ** 3 - 2 * w - 4 * t ** 2 * w + t * w ** 2
                   + 2 * e * t * (w - 2 * t))
    a22 = t ** 2

    # grouping of A kept exactly as printed
    A = (w + e + t) / (2 * (w + e)) - ((w - e + t) / (2 * t) - (w + e + t) ** 2 / 2)
    B = w * (w + e + t) / (2 * t * (w + e))

    return CoefficientTable(
        a02=a02, a03=a03, a10=a10, a11=a11, a12=a12, a20=a20, a21=a21, a22=a22,
        c11=A,
        c12=1.0,
        c21=6 * a02 - 12 * a03 - 2 * a11 + 3 * a12 + a20 - a21 + 2 * a22,
        c22=12 * a03 - 3 * a12 + a21 - 3 * a22,
        c23=a22,
        c31=40 * a03 + 3 * a11 - 8 * a12 - a20 + 2 * a21 - 12 * a02 - 2 * a10,
        c32=-60 * a03 - 3 * a11 + 12 * a12 + a20 - 3 * a21 + 12 * a02,
        c33=20 * a03 - 4 * a12 + a21,
        B=B,
    )


@dataclass(frozen=True)
class MomentSolution:
    mean_n: float
    mean_n2: float
    mean_n3: float
    mandel_q: Optional[float]
    det_delta: float
    out_of_regime: bool

    @property
    def variance(self) -> float:
        return self.mean_n2 - self.mean_n ** 2


def solve_moments(omega: float, eta: float, tau: float) -> MomentSolution:
    """Solve the 3x3 moment system directly.

    Negative ``<n>`` or negative variance is not an error: the numbers come
    back with ``out_of_regime`` set, since the truncated hierarchy only holds
    near ``omega ~ tau``.
    """
    table = coefficient_table(omega, eta, tau)
    M = table.matrix()
    delta = float(np.linalg.det(M))
    scale = np.abs(M).sum(axis=1).max()
    if abs(delta) < 1e-12 * scale ** 3:
        raise NearSingularSystem(f"|det| = {abs(delta):.3e} at omega={omega}, eta={eta}, tau={tau}")
    n1, n2, n3 = solve_linear(M, table.rhs())
    n1, n2, n3 = float(n1), float(n2), float(n3)
    return MomentSolution(
        mean_n=n1,
        mean_n2=n2,
        mean_n3=n3,
        mandel_q=mandel_q(n1, n2),
        det_delta=delta,
        out_of_regime=bool(n1 < 0 or n2 - n1 ** 2 < 0),
    )


def cramer_moments(table: CoefficientTable) -> tuple[float, float, float]:
    """Closed-form Cramer expansions of the moment system as printed."""
    c = table
    delta = float(np.linalg.det(c.matrix()))
    n1 = (c.B * (c.c22 * c.c33 - c.c23 * c.c32) - c.a10 * c.c33) / delta
    n2 = (c.B * (c.c23 * c.c31 - c.c21 * c.c33) + c.a10 * c.c11 * c.c33) / delta
    n3 = (c.B * (c.c21 * c.c32 - c.c22 * c.c31) + c.a10 * (c.c31 - c.c11 * c.c32)) / delta
    return n1, n2, n3


def cramer_discrepancy(omega: float, eta: float, tau: float) -> float:
    """Largest relative gap between the printed Cramer expansions and the
    direct solve. Diagnostic only."""
    direct = solve_moments(omega, eta, tau)
    closed = cramer_moments(coefficient_table(omega, eta, tau))
    ref = (direct.mean_n, direct.mean_n2, direct.mean_n3)
    return max(abs(x - y) / max(abs(y), 1e-300) for x, y in zip(closed, ref))
