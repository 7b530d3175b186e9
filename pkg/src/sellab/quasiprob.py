"""Phase-averaged quasi-probabilities of the laser and the stationary
equations they obey.

Radial functions of ``I = |z|^2`` are normalised so that ``int_0^inf Q(I) dI = 1``
and the vacuum gives ``exp(-I)``: the coherent-state ``1/pi`` and the polar
Jacobian are absorbed once, for all three functions alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import numerics
from .errors import DomainError, NormalizationFailed, NotPhaseSymmetric
from .expoly import ExpPoly
from .hilbert import FockTruncation
from .liouvillian import LaserParams, sector_indices

PHASE_SYMMETRY_TOL = 1e-8
RESIDUAL_GRID = 0.01 * np.arange(1, 501)

# normalisation of the eta = 0 limit solution: 1 + sqrt(2 e pi) erf(2^-1/2)
Q2_NORM = 1.0 + math.sqrt(2.0 * math.e * math.pi) * math.erf(2.0 ** -0.5)


def limit_ode_grid(step: float = 0.01) -> np.ndarray:
    """[0.05, 6] without the regular-singular neighbourhood [0.95, 1.05]."""
    grid = np.round(np.arange(0.05, 6.0 + step / 2, step), 10)
    return grid[(grid < 0.95) | (grid > 1.05)]


@dataclass(frozen=True)
class RadialQuasiSet:
    q: ExpPoly
    d: ExpPoly
    rho_sigma: ExpPoly


def husimi_radial(rho, trunc: FockTruncation) -> RadialQuasiSet:
    """Phase-averaged Q(I), D(I) and rho_Sigma(I) of a stationary state.

    ``rho`` must commute with the total excitation number; any element outside
    that sector above 1e-8 raises NotPhaseSymmetric.
    """
    rho = np.asarray(rho)
    dim, nf = trunc.dim, trunc.n_fock
    mask = np.ones(dim * dim, dtype=bool)
    mask[sector_indices(trunc)] = False
    stray = np.abs(rho.reshape(-1, order="F")[mask])
    if stray.size and stray.max() > PHASE_SYMMETRY_TOL:
        raise NotPhaseSymmetric(f"coherence {stray.max():.3e} between different excitation numbers")

    n = np.arange(nf)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    p_low = np.real(np.diag(rho)[:nf])
    p_up = np.real(np.diag(rho)[nf:])
    weight = np.exp(-log_fact)
    q = ExpPoly.from_dict({2 * k: (p_low[k] + p_up[k]) * weight[k] for k in n})
    d = ExpPoly.from_dict({2 * k: (p_up[k] - p_low[k]) * weight[k] for k in n})

    # <1,n| rho |2,n-1> carries I^(n - 1/2) / sqrt(n! (n-1)!)
    coh = np.array([rho[k, nf + k - 1] for k in range(1, nf)])
    rs_weight = np.exp(-0.5 * (log_fact[1:] + log_fact[:-1]))
    rho_sigma = ExpPoly.from_dict({2 * k - 1: 2.0 * np.real(coh[k - 1]) * rs_weight[k - 1]
                                   for k in range(1, nf)})
    return RadialQuasiSet(q=q, d=d, rho_sigma=rho_sigma)


@dataclass
class ResidualReport:
    """Residual of one stationary equation sampled on a grid.

    ``terms`` maps each printed term to its largest magnitude on the grid, which
    localises a discrepancy when the residual does not vanish. ``normalized``
    divides ``max_abs`` by ``scale``.
    """

    name: str
    max_abs: float
    scale: float
    integral_abs: Optional[float] = None
    terms: dict = field(default_factory=dict)
    residual: Optional[ExpPoly] = field(default=None, repr=False)

    @property
    def normalized(self) -> float:
        return self.max_abs / self.scale if self.scale > 0 else self.max_abs


def _report(name, terms: dict, signs: dict, grid, integral=True) -> ResidualReport:
    residual = ExpPoly()
    for key, poly in terms.items():
        residual = residual + poly.scale(signs[key])
    values = {key: np.abs(poly(grid)).max() if poly else 0.0 for key, poly in terms.items()}
    max_abs = float(np.abs(residual(grid)).max()) if residual else 0.0
    integral_abs = None
    if integral:
        integral_abs = 0.0 if not residual else numerics.integrate_semi_infinite(
            lambda x: abs(residual(x)), numerics.QuadratureSpec(1e-14, 1e-8, 500))
    return ResidualReport(
        name=name,
        max_abs=max_abs,
        scale=max(values.values(), default=0.0),
        integral_abs=integral_abs,
        terms={k: float(v) for k, v in values.items()},
        residual=residual,
    )


def relation_eq3_residual(qset: RadialQuasiSet, params: LaserParams,
                          grid=RESIDUAL_GRID, integral: bool = True) -> ResidualReport:
    """``rho_Sigma - (kappa/g) sqrt(I) (Q + Q')``; vanishes for a true steady state."""
    q = qset.q
    rhs = (q + q.derivative()).times_power(1).scale(params.kappa / params.g)
    return _report("eq3", {"rho_sigma": qset.rho_sigma, "(kappa/g)sqrt(I)(Q+Q')": rhs},
                   {"rho_sigma": 1.0, "(kappa/g)sqrt(I)(Q+Q')": -1.0}, grid, integral)


def system_eq4_residual(qset: RadialQuasiSet, params: LaserParams,
                        grid=RESIDUAL_GRID) -> tuple[ResidualReport, ResidualReport]:
    """Residuals of the two phase-averaged stationary equations for D and rho_Sigma,
    term by term as printed (left side minus right side)."""
    w, e, t = params.omega, params.eta, params.tau
    q, d, rs = qset.q, qset.d, qset.rho_sigma

    first = {
        "(omega-eta)Q": q.scale(w - e),
        "-(omega+eta)D": d.scale(-(w + e)),
        "-sqrt(I)rho_sigma": rs.times_power(1).scale(-1.0),
        "d/dI[sqrt(I)rho_sigma/2]": rs.times_power(1).scale(0.5).derivative(),
        "d/dI[-tau I D]": d.times_power(2).scale(-t).derivative(),
        "d/dI[-tau I D']": d.derivative().times_power(2).scale(-t).derivative(),
    }
    first_signs = {k: 1.0 for k in first}
    for k in ("d/dI[sqrt(I)rho_sigma/2]", "d/dI[-tau I D]", "d/dI[-tau I D']"):
        first_signs[k] = -1.0

    second = {
        "(omega+eta)rho_sigma": rs.scale(w + e),
        "tau/(2I)rho_sigma": rs.times_power(-2).scale(t / 2),
        "-sqrt(I)[2D+(D-Q)']": (d.scale(2.0) + (d - q).derivative()).times_power(1).scale(-1.0),
        "2tau d/dI[I(rho_sigma+rho_sigma')]":
            (rs + rs.derivative()).times_power(2).derivative().scale(2 * t),
    }
    second_signs = {k: 1.0 for k in second}
    second_signs["2tau d/dI[I(rho_sigma+rho_sigma')]"] = -1.0

    return (_report("eq4_first", first, first_signs, grid),
            _report("eq4_second", second, second_signs, grid))


@dataclass(frozen=True)
class OdeCoefficients:
    b02: float
    b03: float
    b11: float
    b12: float
    b13: float
    b20: float
    b21: float
    b22: float
    b23: float
    b30: float
    b31: float
    b32: float
    b33: float
    b40: float
    b41: float
    b42: float
    b50: float
    b51: float
    b52: float

    def poly(self, nu: int) -> tuple[float, ...]:
        """Power-series coefficients (I^0, I^1, ...) of the factor f_nu."""
        b = self
        return {
            5: (0.0, 0.0, b.b02, b.b03),
            4: (0.0, b.b11, b.b12, b.b13),
            3: (b.b20, b.b21, b.b22, b.b23),
            2: (b.b30, b.b31, b.b32, b.b33),
            1: (b.b40, b.b41, b.b42),
            0: (b.b50, b.b51, b.b52),
        }[nu]

    def f(self, nu: int, I):
        return np.polynomial.polynomial.polyval(np.asarray(I, dtype=float), self.poly(nu))


def ode5_coefficients(omega: float, eta: float, tau: float) -> OdeCoefficients:
    w, e, t = float(omega), float(eta), float(tau)
    return OdeCoefficients(
        b02=-2 * t ** 3 * (w + e + t),
        b03=4 * t ** 4,
        b11=-12 * t ** 3 * (w + e + t),
        b12=2 * t ** 3 * (7 * t - 3 * w - 3 * e),
        b13=12 * t ** 4,
        b20=-12 * t ** 3 * (w + e + t),
        b21=-t ** 2 * (26 * e * t - 3 * e ** 2 + 21 * t ** 2 - 6 * e * w + 26 * t * w - 3 * w ** 2),
        b22=12 * t ** 3 * (4 * t - w - e),
        b23=12 * t ** 4,
        b30=-2 * t ** 2 * (8 * e * t - 3 * e ** 2 + 15 * t ** 2 - 6 * e * w + 8 * t * w - 3 * w ** 2),
        b31=-2 * t * (e + t - 3 * e ** 2 * t + 13 * e * t ** 2 + w - 6 * e * t * w
                      + 13 * t ** 2 * w - 3 * t * w ** 2),
        b32=2 * t ** 2 * (2 - 7 * e * t + 23 * t ** 2 - 7 * t * w),
        b33=4 * t ** 4,
        b40=(-e ** 3 * t + e ** 2 * (8 * t ** 2 - 1 - 3 * t * w)
             - t * (3 * t + 24 * t ** 3 + 3 * w - t ** 2 * w - 8 * t * w ** 2 + w ** 3)
             + e * (t ** 3 - w + 16 * t ** 2 * w - t * (4 + 3 * w ** 2))),
        b41=t * (5 * e ** 2 * t + 15 * t ** 3 - 4 * w - 20 * t ** 2 * w
                 - 2 * e * (1 + 10 * t ** 2 - 5 * t * w) + t * (5 * w ** 2 - 2)),
        b42=2 * t ** 2 * (4 - 3 * e * t + 7 * t ** 2 - 3 * t * w),
        b50=(-e ** 3 * t - 6 * t ** 4 + 5 * t ** 3 * w + w ** 2 - t * w ** 3
             + e ** 2 * (2 * t ** 2 - 1 - 3 * t * w)
             + e * t * (5 * t ** 2 - 4 + 4 * t * w - 3 * w ** 2)
             + t ** 2 * (2 * w ** 2 - 3)),
        b51=2 * t * (e ** 2 * t + 3 * t ** 3 - 2 * w - 4 * t ** 2 * w + t * w ** 2
                     + 2 * e * t * (w - 2 * t)),
        b52=4 * t ** 2,
    )


class AnalyticRadialFn:
    """Closed-form radial function with derivatives.

    ``derivative(I, order)`` returns the ``order``-th derivative; ``max_order``
    caps what the closed form supports.
    """

    def __init__(self, name: str, value: Callable, derivative: Callable, max_order: int,
                 support_end: float = math.inf):
        self.name = name
        self._value = value
        self._derivative = derivative
        self.max_order = max_order
        self.support_end = support_end

    def __repr__(self):
        return f"AnalyticRadialFn({self.name!r})"

    def __call__(self, I):
        return self._value(I)

    def derivative(self, I, order: int = 1):
        if order == 0:
            return self._value(I)
        if order > self.max_order:
            raise DomainError(f"{self.name}: derivative of order {order} not available")
        return self._derivative(I, order)


def _q1_value(I):
    return np.exp(-np.asarray(I, dtype=float))


def _q1_derivative(I, order):
    return (-1) ** order * np.exp(-np.asarray(I, dtype=float))


def _q2_series_derivative(I: float, order: int) -> float:
    """``exp(-I) c^(j)(I)`` summed over j by Leibniz, with
    ``c(I) = cosh(sqrt(2I)) + sinh(sqrt(2I))/sqrt(2I) = sum_k a_k I^k`` and
    ``a_k = 2^k (1/(2k)! + 1/(2k+1)!)``; every series term is positive and
    summed in log space."""
    n_terms = order + 60 + int(4 * math.sqrt(2 * I + 1))
    k = np.arange(n_terms)
    log_a = k * math.log(2.0) + np.log1p(1.0 / (2 * k + 1)) - np.array(
        [math.lgamma(2 * kk + 1) for kk in k])
    log_fact = np.array([math.lgamma(kk + 1) for kk in k])
    total = 0.0
    for j in range(order + 1):
        kk = k[j:]
        m = kk - j
        lt = log_a[j:] + log_fact[j:] - log_fact[m] - I
        if I > 0:
            lt = lt + m * math.log(I)
        else:
            lt = np.where(m == 0, lt, -np.inf)
        top = lt.max()
        ej = math.exp(top) * np.exp(lt - top).sum()
        total += math.comb(order, j) * (-1) ** (order - j) * ej
    return total / Q2_NORM


def _q2_value(I):
    return numerics.stable_cosh_sinh_combo(I) / Q2_NORM


def _q2_derivative(I, order):
    I_arr = np.asarray(I, dtype=float)
    if np.any(I_arr < 0):
        raise DomainError("Q2 is defined on I >= 0")
    out = np.vectorize(lambda x: _q2_series_derivative(float(x), order), otypes=[float])(I_arr)
    return float(out) if out.ndim == 0 else out


# C0 = -2 / Q2_NORM: the finite-part normalisation of P equals -Q2_NORM / 2
P_C0 = -2.0 / Q2_NORM


def _p_value(I, c0=P_C0):
    I = np.asarray(I, dtype=float)
    inside = (I >= 0) & (I < 0.5)
    safe = np.where(inside, I, 0.0)
    out = np.where(inside, c0 * safe * np.exp(safe) * (1 - 2 * safe) ** -1.5, 0.0)
    return float(out) if out.ndim == 0 else out


def _p_derivative(I, order):
    I = np.asarray(I, dtype=float)
    inside = (I >= 0) & (I < 0.5)
    x = np.where(inside, I, 0.0)
    if order == 1:
        core = np.exp(x) * (1 - 2 * x) ** -2.5 * (1 + 2 * x - 2 * x ** 2)
    else:
        core = np.exp(x) * (1 - 2 * x) ** -3.5 * (8 + 2 * x - 8 * x ** 2 + 4 * x ** 3)
    out = np.where(inside, P_C0 * core, 0.0)
    return float(out) if out.ndim == 0 else out


Q1 = AnalyticRadialFn("Q1", _q1_value, _q1_derivative, max_order=10)
Q2 = AnalyticRadialFn("Q2", _q2_value, _q2_derivative, max_order=10)
P_FUNCTION = AnalyticRadialFn("P", _p_value, _p_derivative, max_order=2, support_end=0.5)


def limit_solutions() -> tuple[AnalyticRadialFn, AnalyticRadialFn]:
    """Exact Q(I) for the vanishing-pump limits: (eta != 0) and (eta = 0)."""
    return Q1, Q2


RadialFn = Union[ExpPoly, AnalyticRadialFn]


def _derivatives(fn: RadialFn, grid, max_order: int) -> list:
    if isinstance(fn, ExpPoly):
        out, cur = [], fn
        for _ in range(max_order + 1):
            out.append(cur(grid))
            if len(out) <= max_order:
                cur = cur.derivative()
        return out
    return [np.asarray(fn.derivative(grid, nu), dtype=float) for nu in range(max_order + 1)]


def _ode5_parts(q: RadialFn, coeffs: OdeCoefficients, grid) -> dict:
    ders = _derivatives(q, grid, 5)
    return {f"f{nu}*Q^({nu})": coeffs.f(nu, grid) * ders[nu] for nu in range(6)}


def ode5_residual_curve(q: RadialFn, omega: float, eta: float, tau: float, grid,
                        coefficients: Optional[OdeCoefficients] = None) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    coeffs = coefficients if coefficients is not None else ode5_coefficients(omega, eta, tau)
    return sum(_ode5_parts(q, coeffs, grid).values())


def ode5_residual(q: RadialFn, omega: float, eta: float, tau: float,
                  grid=RESIDUAL_GRID,
                  coefficients: Optional[OdeCoefficients] = None) -> ResidualReport:
    """``R(I) = sum_nu f_nu(I) Q^(nu)(I)`` on ``grid``; ``scale`` is ``max|f_0 Q|``."""
    grid = np.asarray(grid, dtype=float)
    coeffs = coefficients if coefficients is not None else ode5_coefficients(omega, eta, tau)
    parts = _ode5_parts(q, coeffs, grid)
    total = sum(parts.values())
    return ResidualReport(
        name="ode5",
        max_abs=float(np.abs(total).max()),
        scale=float(np.abs(parts["f0*Q^(0)"]).max()),
        terms={k: float(np.abs(v).max()) for k, v in parts.items()},
    )


def _limit_parts(case: int, f: RadialFn, grid) -> dict:
    q0, q1, q2 = _derivatives(f, grid, 2)
    if case == 1:
        return {"Q'": q1, "Q": q0}
    if case == 2:
        I = grid
        return {
            "2I(1-I)Q''": 2 * I * (1 - I) * q2,
            "(3+3I-4I^2)Q'": (3 + 3 * I - 4 * I ** 2) * q1,
            "(1+2I-2I^2)Q": (1 + 2 * I - 2 * I ** 2) * q0,
        }
    raise ValueError(f"limit case must be 1 or 2, got {case!r}")


def limit_ode_residual_curve(case: int, f: RadialFn, grid) -> np.ndarray:
    return sum(_limit_parts(case, f, np.asarray(grid, dtype=float)).values())


def limit_ode_residual(case: int, f: RadialFn, grid=None) -> ResidualReport:
    """Residual of the reduced ODE for limit ``case`` 1 or 2."""
    grid = limit_ode_grid() if grid is None else np.asarray(grid, dtype=float)
    parts = _limit_parts(case, f, grid)
    total = sum(parts.values())
    terms = {k: float(np.abs(v).max()) for k, v in parts.items()}
    return ResidualReport(f"limit{case}", float(np.abs(total).max()), max(terms.values()),
                          terms=terms)


def _p_kernel(I: float):
    """Smooth factor of the transform integrand at ``I`` and its derivative
    (P's ``exp(I')`` cancels against the kernel's ``exp(-I')``)."""
    def g(x):
        y = 2.0 * math.sqrt(I * x) if x > 0 else 0.0
        return x * float(numerics.bessel_i0(y, scaled=True)) * math.exp(y - I)

    def dg(x):
        y = 2.0 * math.sqrt(I * x) if x > 0 else 0.0
        i0 = float(numerics.bessel_i0(y, scaled=True))
        i1 = float(numerics.bessel_i1(y, scaled=True))
        return (i0 + 0.5 * y * i1) * math.exp(y - I)

    return g, dg


def p_normalization(spec: numerics.QuadratureSpec = numerics.DEFAULT_QUADRATURE) -> float:
    """Finite part of ``int_0^(1/2) I e^I (1 - 2I)^(-3/2) dI``, i.e. ``int P dI / C0``."""
    return numerics.finite_part_integral(
        lambda x: x * math.exp(x), s=0.5, p=1.5, spec=spec,
        dg=lambda x: (1.0 + x) * math.exp(x))


def p_to_q_transform(grid: Sequence[float], c0_mode: str = "normalize",
                     c0: Optional[float] = None,
                     spec: numerics.QuadratureSpec = numerics.DEFAULT_QUADRATURE
                     ) -> tuple[np.ndarray, float]:
    """Q(I) = int P(I') exp(-(I'+I)) I0(2 sqrt(I I')) dI' as a finite-part integral.

    P is supported on [0, 1/2), where it diverges like ``(1 - 2I')^(-3/2)``.
    With ``c0_mode="normalize"`` the constant C0 is chosen so that Q integrates
    to one (the kernel preserves normalisation, so that is ``int P dI' = 1``).
    Returns the Q values and C0.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0):
        raise DomainError("transform grid must be >= 0")
    if c0_mode == "normalize":
        norm = p_normalization(spec)
        if not math.isfinite(norm) or abs(norm) < 1e-300:
            raise NormalizationFailed(f"finite-part normalisation integral is {norm!r}")
        c0 = 1.0 / norm
    elif c0_mode == "given":
        if c0 is None:
            raise ValueError("c0_mode='given' needs c0")
    else:
        raise ValueError(f"unknown c0_mode {c0_mode!r}")

    values = np.empty_like(grid)
    for i, I in enumerate(grid):
        if c0 == 0:
            values[i] = 0.0
            continue
        g, dg = _p_kernel(float(I))
        values[i] = c0 * numerics.finite_part_integral(g, s=0.5, p=1.5, spec=spec, dg=dg)
    return values, float(c0)
