"""Lindblad generator of the single-emitter laser and its stationary state.

Units have hbar = 1, so the coherent part is ``-i[H, rho]`` with
``H = i g (a^dag sigma - sigma^dag a)``. Density matrices are vectorised
column-major: ``vec(rho)[r + D * c] = rho[r, c]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import SingularMatrix, StepTooLarge, TruncationTooSmall
from .hilbert import FockTruncation, OperatorSet, build_operators, field_partial_trace
from .moments import mandel_q
from .numerics import solve_linear

STEADY_RESIDUAL_TOL = 1e-9
DEFAULT_TAIL_TOL = 1e-10
MAX_N_MAX = 640


@dataclass(frozen=True)
class LaserParams:
    """Physical rates of the laser (inverse time units).

    ``Gamma/2`` is the incoherent pump rate, ``gamma/2`` the spontaneous decay
    rate, ``kappa/2`` the cavity decay rate and ``g`` the atom-field coupling.
    """

    Gamma: float
    gamma: float
    kappa: float
    g: float = 1.0

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"coupling g must be > 0, got {self.g!r}")
        for name in ("Gamma", "gamma", "kappa"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")

    @classmethod
    def from_dimensionless(cls, omega: float, eta: float, tau: float, g: float = 1.0) -> "LaserParams":
        return cls(Gamma=2 * g * omega, gamma=2 * g * eta, kappa=2 * g * tau, g=g)

    @property
    def omega(self) -> float:
        return self.Gamma / (2 * self.g)

    @property
    def eta(self) -> float:
        return self.gamma / (2 * self.g)

    @property
    def tau(self) -> float:
        return self.kappa / (2 * self.g)


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Matrix of the Lindblad generator.

    ``basis`` lists the column-major vec indices the matrix acts on; ``None``
    means the full ``D**2`` space. The excitation-conserving sector (pairs
    ``|i,n><j,m|`` with equal excitation number) is invariant under this
    generator and holds the stationary state.
    """

    matrix: np.ndarray
    trunc: FockTruncation
    basis: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.trunc.dim

    def vectorize(self, rho) -> np.ndarray:
        v = np.asarray(rho, dtype=complex).reshape(-1, order="F")
        return v if self.basis is None else v[self.basis]

    def unvectorize(self, v) -> np.ndarray:
        if self.basis is None:
            return np.asarray(v, dtype=complex).reshape(self.dim, self.dim, order="F")
        full = np.zeros(self.dim * self.dim, dtype=complex)
        full[self.basis] = v
        return full.reshape(self.dim, self.dim, order="F")

    def apply(self, rho) -> np.ndarray:
        return self.unvectorize(self.matrix @ self.vectorize(rho))

    def trace_functional(self) -> np.ndarray:
        """Row vector ``w`` with ``w . vec(rho) = Tr(rho)``."""
        diag = np.eye(self.dim).reshape(-1, order="F")
        return diag if self.basis is None else diag[self.basis]


def lindblad_rhs(params: LaserParams, ops: OperatorSet, rho) -> np.ndarray:
    """Right-hand side of the master equation evaluated directly on ``rho``."""
    H = 1j * params.g * (ops.a_dag @ ops.sigma - ops.sigma_dag @ ops.a)
    out = -1j * (H @ rho - rho @ H)
    for rate, c in _collapse_terms(params, ops):
        cdc = c.conj().T @ c
        out = out + 0.5 * rate * (2 * c @ rho @ c.conj().T - cdc @ rho - rho @ cdc)
    return out


def _collapse_terms(params, ops):
    return (
        (params.kappa, ops.a),
        (params.gamma, ops.sigma),
        (params.Gamma, ops.sigma_dag),
    )


def sector_indices(trunc: FockTruncation) -> np.ndarray:
    """Column-major vec indices of the excitation-conserving sector, ascending."""
    exc = trunc.excitations()
    rows, cols = np.nonzero(exc[:, None] == exc[None, :])
    return np.sort(rows + trunc.dim * cols)


def build_liouvillian(params: LaserParams, trunc: FockTruncation,
                      sector: bool = False) -> Superoperator:
    """Assemble the generator as a dense matrix.

    The full matrix has ``(2(n_max+1))**4`` entries, so use ``sector=True``
    beyond a dozen or so Fock states.
    """
    ops = build_operators(trunc)
    eye = sp.identity(trunc.dim, dtype=complex, format="csr")

    def spre(x):
        return sp.kron(eye, sp.csr_matrix(x))

    def spost(x):
        return sp.kron(sp.csr_matrix(x).T, eye)

    H = 1j * params.g * (ops.a_dag @ ops.sigma - ops.sigma_dag @ ops.a)
    L = -1j * (spre(H) - spost(H))
    for rate, c in _collapse_terms(params, ops):
        if rate == 0:
            continue
        cdc = c.conj().T @ c
        sandwich = sp.kron(sp.csr_matrix(c.conj()), sp.csr_matrix(c))
        L = L + 0.5 * rate * (2 * sandwich - spre(cdc) - spost(cdc))
    L = sp.csr_matrix(L)

    if not sector:
        return Superoperator(L.toarray(), trunc)
    idx = sector_indices(trunc)
    return Superoperator(L[idx][:, idx].toarray(), trunc, idx)


def _trace_constrained(L: Superoperator):
    # row 0 is vec index 0 in both bases, i.e. the |1,0><1,0| diagonal entry
    M = L.matrix.copy()
    M[0, :] = L.trace_functional()
    rhs = np.zeros(M.shape[0], dtype=complex)
    rhs[0] = 1.0
    return M, rhs


def steady_state(L: Superoperator, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """Stationary density matrix from ``L vec(rho) = 0`` with unit trace.

    Raises TruncationTooSmall when the two highest Fock populations together
    exceed ``tail_tol``.
    """
    M, rhs = _trace_constrained(L)
    v = solve_linear(M, rhs)
    residual = np.abs(L.matrix @ v).max()
    if residual > STEADY_RESIDUAL_TOL:
        raise SingularMatrix(f"steady-state residual {residual:.3e} exceeds {STEADY_RESIDUAL_TOL:g}")
    rho = L.unvectorize(v)

    p = photon_distribution(rho, L.trunc)
    tail = p[-1] + p[-2]
    if tail >= tail_tol:
        raise TruncationTooSmall(
            f"p[{L.trunc.n_max}] + p[{L.trunc.n_max - 1}] = {tail:.3e} >= {tail_tol:g}"
        )
    return rho


def solve_steady_state(params: LaserParams, n_max_initial: int = 40,
                       tail_tol: float = DEFAULT_TAIL_TOL,
                       n_max_limit: int = MAX_N_MAX) -> tuple[np.ndarray, FockTruncation]:
    """Steady state with adaptive truncation: double ``n_max`` until the tail
    check passes. Works in the excitation-conserving sector."""
    n_max = n_max_initial
    while True:
        trunc = FockTruncation(n_max)
        try:
            return steady_state(build_liouvillian(params, trunc, sector=True), tail_tol), trunc
        except TruncationTooSmall:
            if 2 * n_max > n_max_limit:
                raise
            n_max *= 2


def photon_distribution(rho, trunc: FockTruncation) -> np.ndarray:
    return np.real(np.diag(field_partial_trace(rho, trunc)))


@dataclass(frozen=True)
class ObservableSet:
    mean_n: float
    mean_n2: float
    mean_n3: float
    mandel_q: Optional[float]
    sigma_z_mean: float
    sigma_mean: complex
    photon_dist: np.ndarray = field(repr=False)


def observables(rho, trunc: FockTruncation) -> ObservableSet:
    """Photon moments, Mandel Q and atomic expectation values of ``rho``.

    ``mandel_q`` is None when ``<n>`` is below 1e-12.
    """
    ops = build_operators(trunc)
    rho = np.asarray(rho)
    # Tr_atom keeps every field moment; n^k is diagonal in the Fock basis
    p = photon_distribution(rho, trunc)
    n = np.arange(trunc.n_fock, dtype=float)
    m1, m2, m3 = (float(np.dot(n ** k, p)) for k in (1, 2, 3))
    return ObservableSet(
        mean_n=m1,
        mean_n2=m2,
        mean_n3=m3,
        mandel_q=mandel_q(m1, m2),
        sigma_z_mean=float(np.real(np.trace(ops.sigma_z @ rho))),
        sigma_mean=complex(np.trace(ops.sigma @ rho)),
        photon_dist=p,
    )


def evolve(rho0, L: Superoperator, t_final: float, dt: float) -> np.ndarray:
    """Integrate ``d vec(rho)/dt = L vec(rho)`` with classical RK4.

    The step is shrunk so that an integer number of steps lands on ``t_final``.
    Raises StepTooLarge unless ``dt * ||L||_inf < 0.1``.
    """
    norm = np.abs(L.matrix).sum(axis=1).max()
    if dt <= 0 or dt * norm >= 0.1:
        raise StepTooLarge(f"dt * ||L||_inf = {dt * norm:.3g}, need < 0.1")
    v = L.vectorize(rho0)
    if L.basis is not None and not np.allclose(L.unvectorize(v), rho0, atol=1e-14):
        raise ValueError("initial state has weight outside the sector this generator acts on")
    steps = max(1, math.ceil(t_final / dt - 1e-12))
    h = t_final / steps
    A = L.matrix
    for _ in range(steps):
        k1 = A @ v
        k2 = A @ (v + 0.5 * h * k1)
        k3 = A @ (v + 0.5 * h * k2)
        k4 = A @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return L.unvectorize(v)


def null_space_gap(L: Superoperator) -> tuple[float, float]:
    """Two smallest singular values of the generator; a one-dimensional null
    space shows as ``(~0, clearly positive)``."""
    s = np.linalg.svd(L.matrix, compute_uv=False)
    return float(s[-1]), float(s[-2])


def trace_distance(rho, sigma) -> float:
    eig = np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma))
    return 0.5 * float(np.abs(eig).sum())
