import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epp_susy.errors import ContractViolation, IllConditionedError, ShapeError
from epp_susy.matrix_core import (
    ComplexOrthogonal,
    checked_inverse,
    complex_orthogonal_2x2,
    complex_orthogonal_general,
    eigenphases_symmetric_unitary,
    givens,
    orthogonality_defect,
    rcond,
    wronskian,
)

finite = dict(allow_nan=False, allow_infinity=False)
cplx = st.complex_numbers(max_magnitude=3.0, **finite)


def test_wronskian_of_free_waves():
    k, r = 1.7, 2.3
    n = 3
    u = np.exp(-1j * k * r) * np.eye(n)
    v = np.exp(1j * k * r) * np.eye(n)
    W = wronskian(u, v, -1j * k * u, 1j * k * v)
    assert np.allclose(W, 2j * k * np.eye(n), atol=1e-14)


def test_wronskian_antisymmetry_and_batching(rng):
    u, v, du, dv = (rng.normal(size=(5, 3, 3)) + 1j * rng.normal(size=(5, 3, 3)) for _ in range(4))
    W = wronskian(u, v, du, dv)
    assert W.shape == (5, 3, 3)
    assert np.allclose(W, -np.swapaxes(wronskian(v, u, dv, du), -1, -2))


def test_wronskian_shape_mismatch():
    with pytest.raises(ShapeError):
        wronskian(np.eye(2), np.eye(3), np.eye(2), np.eye(3))


def test_wronskian_constant_for_solutions_at_equal_energy():
    # two solutions of psi'' = (V - k^2) psi with constant V: W is r-independent
    V = np.array([[1.0, 0.3], [0.3, 2.0]])
    lam, vec = np.linalg.eigh(V - 0.5 * np.eye(2))
    kap = np.sqrt(lam.astype(complex))

    def sol(r, sign):
        e = np.exp(sign * kap * r)
        return vec * e, vec * (sign * kap * e)

    W = [wronskian(*sol(r, 1)[:1], *sol(r, -1)[:1], sol(r, 1)[1], sol(r, -1)[1]) for r in (0.3, 1.1)]
    assert np.allclose(W[0], W[1], atol=1e-12)


def test_complex_orthogonal_2x2_reference_value():
    B = complex_orthogonal_2x2(2.5 + 1.3j)
    assert orthogonality_defect(B.B) < 1e-14
    assert B.B[0, 0] == 2.5 + 1.3j
    assert np.allclose(B.B[0, 1], np.sqrt(1 - (2.5 + 1.3j) ** 2))


def test_complex_orthogonal_rejects_broken_matrix():
    B = complex_orthogonal_2x2(2.5 + 1.3j).B.copy()
    B[0, 0] += 1e-3
    with pytest.raises(ContractViolation, match="B not complex-orthogonal"):
        ComplexOrthogonal(B)


def test_general_construction_identity_and_size():
    assert np.array_equal(complex_orthogonal_general(3).B, np.eye(3))
    with pytest.raises(ValueError):
        complex_orthogonal_general(2, [0.1, 0.2])


@settings(max_examples=60, deadline=None)
@given(cplx, st.sampled_from([1, -1]))
def test_2x2_is_orthogonal(b, branch):
    B = complex_orthogonal_2x2(b, branch).B
    assert orthogonality_defect(B) <= 1e-12


def test_random_general_constructions_are_orthogonal(rng):
    for _ in range(100):
        m = int(rng.integers(2, 6))
        n = m * (m - 1) // 2
        angles = rng.uniform(-np.pi, np.pi, n) + 1j * rng.uniform(-0.5, 0.5, n)
        assert orthogonality_defect(complex_orthogonal_general(m, angles).B) <= 1e-12


def test_single_plane_matches_2x2():
    theta = 0.4 - 0.9j
    B = complex_orthogonal_general(2, [theta]).B
    ref = complex_orthogonal_2x2(np.cos(theta)).B
    assert np.allclose(B, ref) or np.allclose(B, ref.T)


def test_explicit_plane_pairs():
    B = complex_orthogonal_general(3, [0.2 + 0.1j], pairs=[(0, 2)]).B
    assert B[1, 1] == 1 and B[0, 1] == 0
    assert orthogonality_defect(B) < 1e-15
    assert np.allclose(givens(3, 0, 2, 0.2 + 0.1j), B)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_real_part_never_singular(m, seed):
    # B = R exp(iK) with R real orthogonal and K real antisymmetric, so
    # Re B = R cosh-type factor whose singular values are all >= 1
    rng = np.random.default_rng(seed)
    n = m * (m - 1) // 2
    angles = rng.uniform(-np.pi, np.pi, n) + 1j * rng.uniform(-1.0, 1.0, n)
    B = complex_orthogonal_general(m, angles).B
    assert np.linalg.svd(B.real, compute_uv=False).min() >= 1 - 1e-9


def test_eigenphases_diagonal():
    delta = np.array([0.3, -1.2, 0.7])
    S = np.diag(np.exp(2j * delta))
    assert np.allclose(eigenphases_symmetric_unitary(S), np.sort(delta))


def test_eigenphases_rotation_invariant(rng):
    delta = rng.uniform(-1.5, 1.5, 4)
    O, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    S = O @ np.diag(np.exp(2j * delta)) @ O.T
    assert np.allclose(eigenphases_symmetric_unitary(S), np.sort(delta), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1.55, 1.55, **finite), min_size=1, max_size=6), st.integers(0, 2**32 - 1))
def test_eigenphases_conjugation_flips_sign(delta, seed):
    n = len(delta)
    O, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(n, n)))
    S = O @ np.diag(np.exp(2j * np.array(delta))) @ O.T
    p = eigenphases_symmetric_unitary(S)
    q = eigenphases_symmetric_unitary(S.conj())
    # delta -> -delta modulo pi
    d = (np.sort(-p) - q + np.pi / 2) % np.pi - np.pi / 2
    d2 = (np.sort((-p + np.pi / 2) % np.pi - np.pi / 2) - q + np.pi / 2) % np.pi - np.pi / 2
    assert min(np.abs(d).max(), np.abs(d2).max()) < 1e-9


def test_eigenphases_rejects_non_unitary():
    with pytest.raises(ContractViolation):
        eigenphases_symmetric_unitary(np.diag([1.0, 0.5]))
    with pytest.raises(ContractViolation):
        eigenphases_symmetric_unitary(np.array([[0, 1], [-1, 0]], dtype=complex))


def test_rcond_and_checked_inverse():
    assert rcond(np.eye(3)) == pytest.approx(1.0)
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(checked_inverse(A) @ A, np.eye(2))
    with pytest.raises(IllConditionedError):
        checked_inverse(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-16]]))


def test_wronskian_trivial_example():
    n = 3
    r = 2.7
    assert np.allclose(wronskian(np.eye(n), r * np.eye(n), np.zeros((n, n)), np.eye(n)), np.eye(n))


def test_simple_orthogonal_examples():
    assert np.allclose(complex_orthogonal_2x2(1.0, 1).B, np.eye(2))
    assert np.allclose(complex_orthogonal_2x2(1.0, -1).B, np.eye(2))
    assert np.allclose(complex_orthogonal_2x2(0.0).B, [[0, 1], [-1, 0]])
    assert np.array_equal(complex_orthogonal_general(1).B, np.eye(1))
    with pytest.raises(ValueError):
        complex_orthogonal_general(3, [0.1], pairs=[(2, 1)])
    with pytest.raises(ValueError):
        givens(3, 0, 3, 0.1)


def test_orthogonality_checks_both_products():
    # B^T B = I does not need checking separately from B B^T for square B in exact
    # arithmetic, but the gate inspects both
    B = complex_orthogonal_2x2(0.3 + 0.2j).B
    assert orthogonality_defect(B) == max(np.abs(B.T @ B - np.eye(2)).max(), np.abs(B @ B.T - np.eye(2)).max())


def test_eigenphase_examples():
    assert np.array_equal(eigenphases_symmetric_unitary(np.eye(3, dtype=complex)), np.zeros(3))
    S = np.array([[(1 - 1j) / (1 + 1j)]])
    assert eigenphases_symmetric_unitary(S)[0] == pytest.approx(-np.pi / 4, abs=1e-15)
