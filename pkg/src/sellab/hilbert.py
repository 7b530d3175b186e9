"""Truncated atom x cavity Hilbert space.

Basis ordering is ``|i, n>`` with the atomic level slow and the Fock index fast:
flat index ``atom * (n_max + 1) + n``, where ``atom = 0`` is the lower level
``|1>`` and ``atom = 1`` the upper level ``|2>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

DEFAULT_N_MAX = 40
LOWER, UPPER = 0, 1


@dataclass(frozen=True)
class FockTruncation:
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def n_fock(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * self.n_fock

    def index(self, atom: int, n: int) -> int:
        """Flat index of ``|atom, n>`` (atom 0 = lower level |1>, 1 = upper |2>)."""
        if atom not in (LOWER, UPPER) or not 0 <= n <= self.n_max:
            raise IndexError(f"no basis state |{atom + 1}, {n}> at n_max={self.n_max}")
        return atom * self.n_fock + n

    def excitations(self) -> np.ndarray:
        """Excitation number ``n + [atom excited]`` for every basis state."""
        n = np.arange(self.n_fock)
        return np.concatenate([n, n + 1])


@dataclass(frozen=True, eq=False)
class OperatorSet:
    a: np.ndarray
    a_dag: np.ndarray
    sigma: np.ndarray
    sigma_dag: np.ndarray
    sigma_z: np.ndarray
    n_op: np.ndarray
    identity: np.ndarray
    trunc: FockTruncation


def build_operators(trunc: FockTruncation) -> OperatorSet:
    nf = trunc.n_fock
    a_field = np.diag(np.sqrt(np.arange(1, nf, dtype=float)), k=1).astype(complex)
    # sigma = |1><2| lowers the atom: row LOWER, column UPPER
    sigma_atom = np.zeros((2, 2), dtype=complex)
    sigma_atom[LOWER, UPPER] = 1.0

    eye_field = np.eye(nf, dtype=complex)
    eye_atom = np.eye(2, dtype=complex)
    a = np.kron(eye_atom, a_field)
    sigma = np.kron(sigma_atom, eye_field)
    a_dag = a.conj().T
    sigma_dag = sigma.conj().T
    ops = OperatorSet(
        a=a,
        a_dag=a_dag,
        sigma=sigma,
        sigma_dag=sigma_dag,
        sigma_z=sigma_dag @ sigma - sigma @ sigma_dag,
        n_op=a_dag @ a,
        identity=np.eye(trunc.dim, dtype=complex),
        trunc=trunc,
    )
    for arr in (ops.a, ops.a_dag, ops.sigma, ops.sigma_dag, ops.sigma_z, ops.n_op, ops.identity):
        arr.setflags(write=False)
    return ops


def expectation(rho, op) -> complex:
    """Return ``Tr(op rho)``."""
    rho = np.asarray(rho)
    op = np.asarray(op)
    if rho.shape != op.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"rho {rho.shape} vs operator {op.shape}")
    # Tr(AB) = sum_ij A_ij B_ji
    return complex(np.einsum("ij,ji->", op, rho))


def basis_projector(trunc: FockTruncation, atom: int, n: int) -> np.ndarray:
    """Density matrix ``|atom, n><atom, n|``."""
    rho = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    k = trunc.index(atom, n)
    rho[k, k] = 1.0
    return rho


def field_partial_trace(rho, trunc: FockTruncation) -> np.ndarray:
    """Reduced field density matrix ``Tr_atom rho``."""
    nf = trunc.n_fock
    rho = np.asarray(rho)
    return rho[:nf, :nf] + rho[nf:, nf:]
