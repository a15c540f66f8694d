import numpy as np
import pytest

from reebound import matkit
from reebound.errors import DimensionError, InputError, NotPSDError, SingularityError

from conftest import random_hermitian

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_eig_identity():
    np.testing.assert_allclose(matkit.hermitian_eig(np.eye(4)).values, [1, 1, 1, 1])


def test_eig_pauli_x():
    eig = matkit.hermitian_eig(SX)
    np.testing.assert_allclose(eig.values, [1, -1], atol=1e-15)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(eig.vectors[:, 0], [s, s], atol=1e-15)
    np.testing.assert_allclose(eig.vectors[:, 1], [s, -s], atol=1e-15)


def test_eig_diagonal_sorted_descending():
    eig = matkit.hermitian_eig(np.diag([0.25, 0.0, 0.75, 0.0]))
    np.testing.assert_allclose(eig.values, [0.75, 0.25, 0, 0])


def test_eig_errors():
    with pytest.raises(DimensionError):
        matkit.hermitian_eig(np.zeros((2, 3)))
    with pytest.raises(InputError):
        matkit.hermitian_eig(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("n", [2, 3, 4, 9])
def test_eig_reconstruction_and_orthonormality(rng, n):
    for _ in range(250):
        m = random_hermitian(rng, n)
        m /= np.linalg.norm(m, 2)
        eig = matkit.hermitian_eig(m)
        assert np.all(np.diff(eig.values) <= 0)
        assert np.max(np.abs(m - eig.reconstruct())) <= 1e-10
        v = eig.vectors
        assert np.max(np.abs(v.conj().T @ v - np.eye(n))) <= 1e-10
        pivots = np.abs(v).argmax(axis=0)
        lead = v[pivots, np.arange(n)]
        assert np.all(lead.imag == 0) and np.all(lead.real > 0)


def test_eig_is_deterministic(rng):
    m = random_hermitian(rng, 4)
    a, b = matkit.hermitian_eig(m), matkit.hermitian_eig(m.copy())
    assert a.values.tobytes() == b.values.tobytes()
    assert a.vectors.tobytes() == b.vectors.tobytes()


def test_matrix_function_examples():
    np.testing.assert_allclose(matkit.matrix_function(np.eye(3), "log"), 0, atol=1e-15)
    np.testing.assert_allclose(matkit.matrix_function(np.diag([0.25, 0.75]), "sqrt"),
                               np.diag([0.5, np.sqrt(0.75)]), atol=1e-10)
    out = matkit.matrix_function(np.diag([0.5, 0.5, 0, 0]), "log", support_only=True)
    np.testing.assert_allclose(out, np.diag([np.log(0.5)] * 2 + [0, 0]), atol=1e-15)


def test_matrix_function_errors():
    with pytest.raises(SingularityError):
        matkit.matrix_function(np.diag([1.0, 0.0]), "log")
    with pytest.raises(NotPSDError):
        matkit.matrix_function(np.diag([1.0, -0.1]), "sqrt")
    with pytest.raises(InputError):
        matkit.matrix_function(np.eye(2), "sin")


def test_log_exp_roundtrip(rng):
    for _ in range(200):
        a = random_hermitian(rng, 4)
        m = a @ a.conj().T + 0.05 * np.eye(4)
        m /= np.trace(m).real
        back = matkit.matrix_function(matkit.matrix_function(m, "log"), "exp")
        assert np.max(np.abs(back - m)) <= 1e-9


def test_kron_examples():
    np.testing.assert_array_equal(matkit.kron(np.eye(2), SZ), np.diag([1, -1, 1, -1]))
    np.testing.assert_array_equal(matkit.kron(SZ, SZ), np.diag([1, -1, -1, 1]))
    assert matkit.kron(np.ones((2, 2)), np.ones((3, 3))).shape == (6, 6)


def _brute_trace_a(m, da, db):
    out = np.zeros((db, db), dtype=complex)
    for i in range(da):
        for j in range(db):
            for k in range(db):
                out[j, k] += m[i * db + j, i * db + k]
    return out


def test_partial_trace_against_loops(rng):
    for da, db in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        m = random_hermitian(rng, da * db)
        np.testing.assert_allclose(matkit.partial_trace(m, (da, db), "A"), _brute_trace_a(m, da, db), atol=1e-13)
        assert abs(np.trace(matkit.partial_trace(m, (da, db), "B")) - np.trace(m)) <= 1e-12


def test_partial_trace_examples():
    bell = np.zeros((4, 4))
    bell[np.ix_([0, 3], [0, 3])] = 0.5
    np.testing.assert_allclose(matkit.partial_trace(bell, (2, 2), "A"), np.eye(2) / 2)
    p = 0.9
    psi = np.array([np.sqrt(p), 0, 0, np.sqrt(1 - p)])
    np.testing.assert_allclose(matkit.partial_trace(np.outer(psi, psi), (2, 2), "A"), np.diag([0.9, 0.1]), atol=1e-15)


def test_partial_trace_of_kron(rng):
    for _ in range(50):
        a = random_hermitian(rng, 2)
        b = random_hermitian(rng, 3)
        out = matkit.partial_trace(np.kron(a, b), (2, 3), "B")
        assert np.max(np.abs(out - a * np.trace(b))) <= 1e-12
        out = matkit.partial_trace(np.kron(a, b), (2, 3), "A")
        assert np.max(np.abs(out - b * np.trace(a))) <= 1e-12


def test_partial_trace_dimension_error():
    with pytest.raises(DimensionError):
        matkit.partial_trace(np.eye(4), (2, 3))


def test_partial_transpose_singlet():
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    pt = matkit.partial_transpose(np.outer(psi, psi), (2, 2), "B")
    # eigenvalues of the transposed singlet: {1/2, 1/2, 1/2, -1/2}
    assert np.linalg.eigvalsh(pt)[0] == pytest.approx(-0.5, abs=1e-14)


def test_partial_transpose_properties(rng):
    for dims in [(2, 2), (2, 3), (3, 3)]:
        m = random_hermitian(rng, dims[0] * dims[1])
        for on in "AB":
            t = matkit.partial_transpose(m, dims, on)
            np.testing.assert_allclose(t, t.conj().T, atol=1e-14)
            np.testing.assert_array_equal(matkit.partial_transpose(t, dims, on), m)
    a, b = random_hermitian(rng, 2), random_hermitian(rng, 2)
    np.testing.assert_allclose(matkit.partial_transpose(np.kron(a, b), (2, 2), "B"), np.kron(a, b.T))
    with pytest.raises(DimensionError):
        matkit.partial_transpose(np.eye(5), (2, 2))


def test_hadamard_product():
    a = np.array([[1, 2], [3, 4]])
    np.testing.assert_array_equal(matkit.hadamard_product(a, [[5, 6], [7, 8]]), [[5, 12], [21, 32]])
    np.testing.assert_array_equal(matkit.hadamard_product(a, np.ones((2, 2))), a)
    np.testing.assert_array_equal(matkit.hadamard_product(a, np.zeros((2, 2))), 0)
    with pytest.raises(DimensionError):
        matkit.hadamard_product(a, np.ones((3, 3)))


def test_hadamard_with_real_symmetric_is_hermitian(rng):
    for _ in range(100):
        h = random_hermitian(rng, 4)
        s = rng.standard_normal((4, 4))
        out = matkit.hadamard_product(h, s + s.T)
        assert np.max(np.abs(out - out.conj().T)) <= 1e-12
