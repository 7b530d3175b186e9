import math

import numpy as np
import pytest

from sellab.hilbert import FockTruncation
from sellab.liouvillian import LaserParams, solve_steady_state


@pytest.fixture(scope="session")
def reference_state():
    """Steady state at omega = tau = 0.3, eta = 0.5 (g = 1)."""
    params = LaserParams.from_dimensionless(0.3, 0.5, 0.3)
    rho, trunc = solve_steady_state(params)
    return params, rho, trunc


def coherent_state(trunc: FockTruncation, alpha: complex) -> np.ndarray:
    """|1> (x) |alpha><alpha| in the truncated composite basis."""
    n = np.arange(trunc.n_fock)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    amp = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * log_fact) * alpha ** n
    psi = np.zeros(trunc.dim, dtype=complex)
    psi[: trunc.n_fock] = amp
    return np.outer(psi, psi.conj())


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
