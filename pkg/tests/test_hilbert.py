import numpy as np
import pytest

from sellab.errors import DimensionMismatch
from sellab.hilbert import (LOWER, UPPER, FockTruncation, basis_projector, build_operators,
                            expectation, field_partial_trace)


@pytest.fixture(scope="module")
def ops():
    return build_operators(FockTruncation(6))


def test_dimensions():
    t = FockTruncation(40)
    assert (t.n_fock, t.dim) == (41, 82)
    with pytest.raises(ValueError):
        FockTruncation(0)


def test_index_layout():
    t = FockTruncation(3)
    assert t.index(LOWER, 0) == 0
    assert t.index(UPPER, 0) == 4
    assert t.index(UPPER, 3) == 7
    with pytest.raises(IndexError):
        t.index(LOWER, 4)
    np.testing.assert_array_equal(t.excitations(), [0, 1, 2, 3, 1, 2, 3, 4])


def test_ladder_action(ops):
    t = ops.trunc
    ket = np.zeros(t.dim)
    ket[t.index(UPPER, 2)] = 1.0
    out = ops.a @ ket
    assert out[t.index(UPPER, 1)] == pytest.approx(np.sqrt(2))
    out = ops.sigma @ ket
    assert out[t.index(LOWER, 2)] == 1.0
    assert not (ops.sigma_dag @ ket).any()


def test_commutator_below_cutoff(ops):
    comm = ops.a @ ops.a_dag - ops.a_dag @ ops.a
    nf = ops.trunc.n_fock
    for block in (slice(0, nf - 1), slice(nf, 2 * nf - 1)):
        np.testing.assert_allclose(comm[block, block], np.eye(nf - 1), atol=1e-14)


def test_pauli_algebra(ops):
    np.testing.assert_allclose(ops.sigma @ ops.sigma, 0)
    np.testing.assert_allclose(ops.sigma_z @ ops.sigma_z, ops.identity)
    np.testing.assert_allclose(ops.sigma_dag @ ops.sigma + ops.sigma @ ops.sigma_dag, ops.identity)


def test_operators_read_only(ops):
    with pytest.raises(ValueError):
        ops.a[0, 0] = 1.0


def test_expectation(ops):
    rho = basis_projector(ops.trunc, UPPER, 3)
    assert expectation(rho, ops.n_op) == pytest.approx(3.0)
    assert expectation(rho, ops.sigma_z) == pytest.approx(1.0)
    with pytest.raises(DimensionMismatch):
        expectation(rho, np.eye(3))


def test_partial_trace(ops):
    t = ops.trunc
    rho = 0.25 * basis_projector(t, LOWER, 1) + 0.75 * basis_projector(t, UPPER, 1)
    red = field_partial_trace(rho, t)
    assert red.shape == (t.n_fock, t.n_fock)
    assert red[1, 1] == pytest.approx(1.0)
