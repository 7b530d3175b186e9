"""Validation suite behind ``sel-lab validate``.

Every check compares one measured number with a pinned bound. ``quick`` uses a
reduced pump grid for the figure comparison; ``full`` runs the whole grid and
adds per-term residual breakdowns and report-only diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import numerics
from .expoly import ExpPoly
from .hilbert import LOWER, FockTruncation, basis_projector
from .liouvillian import (
    LaserParams,
    build_liouvillian,
    null_space_gap,
    observables,
    solve_steady_state,
)
from . import moments, quasiprob

REFERENCE_MEAN_N = 0.630843
REFERENCE_MEAN_N2 = 1.0

EQ3_GRID = [(eta, w) for eta in (0.1, 0.5) for w in (0.1, 0.3, 0.5, 1.0)]
FIGURE_OMEGAS_FULL = tuple(round(0.05 * k, 10) for k in range(1, 31))
FIGURE_OMEGAS_QUICK = (0.05, 0.3, 0.7, 1.0, 1.5)
RESIDUAL_POINTS = ((0.3, 0.5, 0.3), (0.5, 0.1, 0.5))


@dataclass
class Check:
    criterion: int
    name: str
    measured: float
    bound: float
    passed: bool
    relation: str = "<="
    hard: bool = True
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else ("FAIL" if self.hard else "WARN")
        text = (f"[{tag}] C{self.criterion} {self.name}: measured {self.measured:.6g} "
                f"{self.relation} {self.bound:.6g}")
        return text + (f"  ({self.detail})" if self.detail else "")


def _le(criterion, name, measured, bound, **kw) -> Check:
    return Check(criterion, name, float(measured), float(bound),
                 bool(math.isfinite(measured) and measured <= bound), **kw)


def check_limit_constants() -> list[Check]:
    _, q2 = quasiprob.limit_solutions()
    spec = numerics.QuadratureSpec(1e-13, 1e-12, 400)
    mean_n = numerics.integrate_semi_infinite(lambda x: q2(x) * x, spec) - 1.0
    mean_n2 = numerics.integrate_semi_infinite(lambda x: q2(x) * x * x, spec) - 3 * mean_n - 2
    return [
        _le(1, "limit 2: int Q2 I dI - 1 vs 0.630843", abs(mean_n - REFERENCE_MEAN_N), 1e-5,
            detail=f"<n> = {mean_n:.8f}"),
        _le(1, "limit 2: int Q2 I^2 dI - 3<n> - 2 vs 1", abs(mean_n2 - REFERENCE_MEAN_N2), 1e-4,
            detail=f"<n^2> = {mean_n2:.8f}"),
    ]


def check_vacuum() -> list[Check]:
    q1 = ExpPoly.exp_decay()
    mean_n = q1.moment(1) - 1.0
    limit_q1, _ = quasiprob.limit_solutions()
    grid = quasiprob.limit_ode_grid()
    same = float(np.abs(limit_q1(grid) - q1(grid)).max())
    trunc = FockTruncation(10)
    rho, _ = solve_steady_state(LaserParams.from_dimensionless(0.0, 0.5, 0.3), trunc.n_max)
    dist = float(np.abs(rho - basis_projector(trunc, LOWER, 0)).max())
    return [
        Check(2, "limit 1: Q1 = exp(-I), <n> = int Q1 I dI - 1", abs(mean_n), 0.0,
              mean_n == 0.0 and same == 0.0, relation="=="),
        _le(2, "omega = 0 steady state equals |1,0><1,0|", dist, 1e-10),
    ]


def check_limit_odes() -> list[Check]:
    q1, q2 = quasiprob.limit_solutions()
    r1 = quasiprob.limit_ode_residual(1, q1)
    r2 = quasiprob.limit_ode_residual(2, q2)
    return [
        Check(3, "Q1 satisfies Q' + Q = 0", r1.max_abs, 0.0, r1.max_abs == 0.0, relation="=="),
        _le(3, "Q2 satisfies the eta = 0 limit ODE", r2.max_abs, 1e-9),
    ]


def _steady(omega, eta, tau):
    params = LaserParams.from_dimensionless(omega, eta, tau)
    rho, trunc = solve_steady_state(params)
    return params, rho, trunc


def check_eq3() -> list[Check]:
    worst, where = 0.0, None
    for eta, w in EQ3_GRID:
        params, rho, trunc = _steady(w, eta, w)
        r = quasiprob.relation_eq3_residual(quasiprob.husimi_radial(rho, trunc), params,
                                            integral=False)
        if r.max_abs >= worst:
            worst, where = r.max_abs, (w, eta)
    return [_le(4, "coherence/Q relation, max residual over 8 points", worst, 1e-8,
                detail=f"worst at omega=tau={where[0]}, eta={where[1]}")]


def figure_comparison(omegas: Iterable[float]) -> list[dict]:
    out = []
    for eta in (0.1, 0.5):
        for factor in (1.0, 2.0):
            for w in omegas:
                sol = moments.solve_moments(w, eta, factor * w)
                params = LaserParams.from_dimensionless(w, eta, factor * w)
                rho, trunc = solve_steady_state(params)
                obs = observables(rho, trunc)
                out.append(dict(omega=w, eta=eta, tau=factor * w,
                                rel_n=abs(sol.mean_n - obs.mean_n) / obs.mean_n,
                                abs_q=abs(sol.mandel_q - obs.mandel_q),
                                mean_n=obs.mean_n, mandel_q=obs.mandel_q))
    return out


def check_figure(omegas) -> list[Check]:
    rows = figure_comparison(omegas)
    worst_n = max(rows, key=lambda r: r["rel_n"])
    worst_q = max(rows, key=lambda r: r["abs_q"])
    return [
        _le(5, f"moment system vs master equation, relative <n> ({len(rows)} points)",
            worst_n["rel_n"], 0.05,
            detail=f"worst at omega={worst_n['omega']}, tau={worst_n['tau']}, eta={worst_n['eta']}"),
        _le(5, f"moment system vs master equation, |dQ| ({len(rows)} points)",
            worst_q["abs_q"], 0.05,
            detail=f"worst at omega={worst_q['omega']}, tau={worst_q['tau']}, eta={worst_q['eta']}"),
    ]


def check_curve_features(n_points: int = 40) -> list[Check]:
    omegas = np.geomspace(0.05, 10.0, n_points)
    mean_n, mandel = [], []
    for w in omegas:
        _, rho, trunc = _steady(w, 0.1, w)
        obs = observables(rho, trunc)
        mean_n.append(obs.mean_n)
        mandel.append(obs.mandel_q)
    mean_n = np.array(mean_n)
    peak = int(np.argmax(mean_n))
    interior = 0 < peak < len(omegas) - 1
    drop = mean_n[peak] - mean_n[-1]
    return [
        Check(6, "<n>(omega) along tau = omega, eta = 0.1 peaks inside the scan and falls by omega = 10",
              drop, 0.0, bool(interior and drop > 0), relation=">",
              detail=f"peak <n> = {mean_n[peak]:.4f} at omega = {omegas[peak]:.3f}, "
                     f"<n>(10) = {mean_n[-1]:.4f}"),
        Check(6, "min Mandel Q along tau = omega, eta = 0.1 is negative", min(mandel), 0.0,
              min(mandel) < 0, relation="<"),
    ]


def check_p_to_q() -> list[Check]:
    _, q2 = quasiprob.limit_solutions()
    grid = np.array([0.0, 0.5, 1.0, 2.0, 4.0])
    values, c0 = quasiprob.p_to_q_transform(grid)
    err = float(np.abs(values - q2(grid)).max())
    return [_le(7, "finite-part P -> Q transform reproduces Q2 at I = 0, .5, 1, 2, 4", err, 1e-4,
                detail=f"C0 = {c0:.10f}")]


def check_consistency() -> list[Check]:
    checks = []
    params, rho, trunc = _steady(0.3, 0.5, 0.3)
    obs = observables(rho, trunc)
    qset = quasiprob.husimi_radial(rho, trunc)
    m1 = qset.q.moment(1) - 1.0
    m2 = qset.q.moment(2) - 3 * m1 - 2.0
    checks.append(_le(8, "Husimi moment identity int q I dI - 1 = <n>", abs(m1 - obs.mean_n), 1e-9))
    checks.append(_le(8, "Husimi moment identity for <n^2>", abs(m2 - obs.mean_n2), 1e-9))
    grid = np.linspace(0.0, 40.0, 4001)
    checks.append(Check(8, "Husimi q(I) >= 0 on [0, 40]", float(qset.q(grid).min()), -1e-14,
                        bool(qset.q(grid).min() >= -1e-14), relation=">="))

    small = FockTruncation(6)
    L = build_liouvillian(params, small)
    trace_leak = float(np.abs(L.trace_functional() @ L.matrix).max())
    checks.append(_le(8, "trace preservation (vec I)^T L = 0", trace_leak, 1e-12))
    rng = np.random.default_rng(7)
    x = rng.normal(size=(small.dim, small.dim)) + 1j * rng.normal(size=(small.dim, small.dim))
    herm = x + x.conj().T
    out = L.apply(herm)
    checks.append(_le(8, "Hermiticity preservation of L", float(np.abs(out - out.conj().T).max()),
                      1e-12))
    gaps = []
    for w, e, t in ((0.3, 0.5, 0.3), (1.0, 0.1, 0.5), (0.05, 0.0, 0.1)):
        _, second = null_space_gap(build_liouvillian(LaserParams.from_dimensionless(w, e, t), small))
        gaps.append(second)
    checks.append(Check(8, "steady-state uniqueness: second-smallest singular value of L",
                        min(gaps), 1e-8, bool(min(gaps) > 1e-8), relation=">"))
    rho40, t40 = solve_steady_state(params, 40)
    rho80, t80 = solve_steady_state(params, 80)
    diff = abs(observables(rho40, t40).mean_n - observables(rho80, t80).mean_n)
    checks.append(_le(8, "truncation self-convergence n_max 40 -> 80", diff, 1e-8))
    return checks


def check_residuals(full: bool) -> list[Check]:
    checks = []
    for w, e, t in RESIDUAL_POINTS:
        params, rho, trunc = _steady(w, e, t)
        qset = quasiprob.husimi_radial(rho, trunc)
        where = f"omega={w}, eta={e}, tau={t}"
        for report in quasiprob.system_eq4_residual(qset, params):
            checks.append(_le(9, f"{report.name} normalized residual at {where}",
                              report.normalized, 1e-6, detail=_terms(report) if full else ""))
        r5 = quasiprob.ode5_residual(qset.q, w, e, t)
        checks.append(_le(9, f"fifth-order ODE normalized residual at {where}", r5.normalized,
                          1e-6, detail=_terms(r5) if full else ""))
    if full:
        _, q2 = quasiprob.limit_solutions()
        seq = [quasiprob.ode5_residual(q2, eps, 0.0, eps).normalized for eps in (1e-2, 1e-3, 1e-4)]
        checks.append(Check(9, "fifth-order ODE residual of Q2 shrinks as omega = tau -> 0",
                            seq[-1], seq[0], bool(seq[0] > seq[1] > seq[2]), relation="<",
                            detail=", ".join(f"{s:.3e}" for s in seq)))
        gap = max(moments.cramer_discrepancy(w, e, t) for w, e, t in RESIDUAL_POINTS)
        checks.append(_le(9, "printed Cramer expansions vs direct 3x3 solve (diagnostic)",
                          gap, 1e-10, hard=False))
    return checks


def _terms(report) -> str:
    return "terms: " + ", ".join(f"{k}={v:.3e}" for k, v in report.terms.items())


def run_validation(level: str = "quick") -> list[Check]:
    if level not in ("quick", "full"):
        raise ValueError(f"level must be quick or full, got {level!r}")
    full = level == "full"
    steps: list[Callable[[], list[Check]]] = [
        check_limit_constants,
        check_vacuum,
        check_limit_odes,
        check_eq3,
        lambda: check_figure(FIGURE_OMEGAS_FULL if full else FIGURE_OMEGAS_QUICK),
        lambda: check_curve_features(60 if full else 30),
        check_p_to_q,
        check_consistency,
        lambda: check_residuals(full),
    ]
    checks = []
    for step in steps:
        checks.extend(step())
    return checks


def format_report(checks: list[Check], level: str) -> str:
    hard_failures = [c for c in checks if c.hard and not c.passed]
    lines = [f"sel-lab validate ({level})"]
    lines += [c.line() for c in checks]
    verdict = "PASSED" if not hard_failures else f"FAILED ({len(hard_failures)} hard checks)"
    lines.append(f"overall: {verdict}")
    return "\n".join(lines) + "\n"


def all_passed(checks: list[Check]) -> bool:
    return all(c.passed for c in checks if c.hard)
