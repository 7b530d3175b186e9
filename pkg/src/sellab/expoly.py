"""Exact arithmetic on functions ``sum_k c_k * I**(k/2) * exp(-I)``.

Husimi-extracted radial functions are finite sums of this form, with integer
powers for populations and half-integer powers for the atom-field coherence.
The family is closed under differentiation and under multiplication by
``I**(h/2)``, and its moments are Gamma functions, so residuals of the
stationary equations can be assembled without finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DomainError

MIN_HALF_EXPONENT = -1


@dataclass(frozen=True)
class ExpPoly:
    """Terms are ``(half_exponent, coefficient)`` pairs, sorted, exponents unique."""

    terms: tuple[tuple[int, float], ...] = ()

    @classmethod
    def from_dict(cls, terms: Mapping[int, float]) -> "ExpPoly":
        clean = {}
        for k, c in terms.items():
            k = int(k)
            c = float(c)
            if c == 0.0:
                continue
            if k < MIN_HALF_EXPONENT:
                raise DomainError(f"term I^({k}/2) exp(-I) is not integrable at I = 0")
            clean[k] = clean.get(k, 0.0) + c
        return cls(tuple(sorted((k, c) for k, c in clean.items() if c != 0.0)))

    @classmethod
    def exp_decay(cls, coefficient: float = 1.0) -> "ExpPoly":
        return cls.from_dict({0: coefficient})

    def as_dict(self) -> dict[int, float]:
        return dict(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return NotImplemented
        out = self.as_dict()
        for k, c in other.terms:
            out[k] = out.get(k, 0.0) + c
        return ExpPoly.from_dict(out)

    def __neg__(self) -> "ExpPoly":
        return self.scale(-1.0)

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self + (-other)

    def scale(self, factor: float) -> "ExpPoly":
        return ExpPoly.from_dict({k: factor * c for k, c in self.terms})

    def __mul__(self, factor):
        if isinstance(factor, (int, float, np.floating, np.integer)):
            return self.scale(float(factor))
        return NotImplemented

    __rmul__ = __mul__

    def times_power(self, half_exponent: int) -> "ExpPoly":
        """Multiply by ``I**(half_exponent/2)``."""
        return ExpPoly.from_dict({k + half_exponent: c for k, c in self.terms})

    def derivative(self) -> "ExpPoly":
        """d/dI of each term: ``c (k/2) I^(k/2 - 1) e^-I - c I^(k/2) e^-I``."""
        out: dict[int, float] = {}
        for k, c in self.terms:
            if k == MIN_HALF_EXPONENT:
                raise DomainError("derivative of I^(-1/2) exp(-I) leaves the integrable family")
            if k != 0:
                out[k - 2] = out.get(k - 2, 0.0) + c * k / 2
            out[k] = out.get(k, 0.0) - c
        return ExpPoly.from_dict(out)

    def __call__(self, I):
        I = np.asarray(I, dtype=float)
        if np.any(I < 0):
            raise DomainError("ExpPoly is defined on I >= 0")
        total = np.zeros_like(I)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            log_i = np.log(I)
            for k, c in self.terms:
                if k == 0:
                    part = np.exp(-I)
                else:
                    part = np.exp(0.5 * k * log_i - I)
                    part = np.where(I == 0, 0.0 if k > 0 else np.inf, part)
                total = total + c * part
        return float(total) if total.ndim == 0 else total

    def moment(self, m: float = 0) -> float:
        """``int_0^inf f(I) I^m dI`` in closed form; ``m`` may be half-integer."""
        total = 0.0
        for k, c in self.terms:
            s = 0.5 * k + m + 1.0
            if s <= 0:
                raise DomainError(f"moment {m} diverges for the I^({k}/2) term")
            total += c * math.exp(math.lgamma(s))
        return total


def expoly_derivative(f: ExpPoly) -> ExpPoly:
    return f.derivative()


def expoly_eval(f: ExpPoly, I):
    return f(I)


def expoly_moment(f: ExpPoly, k: float) -> float:
    return f.moment(k)
