"""
Dense complex matrix helpers
============================

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every function
here accepts either a single ``(N, N)`` matrix or a stack ``(..., N, N)`` where
that makes sense, so grid sweeps can be vectorised.

Contents
--------
- matrix Wronskian  ``W[u, v] = u^T v' - u'^T v``
- complex orthogonal matrices (``B^T B = I``, transpose not adjoint)
- eigen-phases of symmetric unitary S-matrices
- LU inversion guarded by a condition estimate
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import ContractViolation, DomainError, IllConditionedError, ShapeError

ORTHOGONALITY_TOL = 1e-12
RCOND_MIN = 1e-13


def _t(a):
    return np.swapaxes(a, -1, -2)


def max_abs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def wronskian(u, v, du, dv):
    """Matrix Wronskian ``u^T dv - du^T v``; works on stacks of matrices."""
    u, v, du, dv = (np.asarray(x) for x in (u, v, du, dv))
    shape = u.shape
    if u.ndim < 2 or shape[-1] != shape[-2]:
        raise ShapeError(f"expected square matrices, got shape {shape}")
    for x in (v, du, dv):
        if x.shape != shape:
            raise ShapeError(f"shape mismatch: {x.shape} vs {shape}")
    return _t(u) @ dv - _t(du) @ v


@dataclass(frozen=True)
class ComplexOrthogonal:
    """Complex ``m x m`` matrix with ``B^T B = B B^T = I``."""

    B: np.ndarray

    def __post_init__(self):
        B = np.array(self.B, dtype=complex)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ShapeError(f"B must be square, got shape {B.shape}")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)
        defect = orthogonality_defect(B)
        if defect > ORTHOGONALITY_TOL:
            raise ContractViolation(
                f"B not complex-orthogonal: max|B^T B - I| = {defect:.3e}"
            )

    @property
    def m(self) -> int:
        return self.B.shape[0]


def orthogonality_defect(B) -> float:
    B = np.asarray(B)
    eye = np.eye(B.shape[0])
    return max(max_abs(B.T @ B - eye), max_abs(B @ B.T - eye))


def complex_orthogonal_2x2(b: complex, branch: int = 1) -> ComplexOrthogonal:
    """``[[b, s], [-s, b]]`` with ``s = branch * sqrt(1 - b**2)`` (principal root)."""
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1")
    b = complex(b)
    s = branch * np.sqrt(1.0 - b * b + 0j)
    return ComplexOrthogonal(np.array([[b, s], [-s, b]]))


def givens(m: int, p: int, q: int, theta: complex) -> np.ndarray:
    if not (0 <= p < q < m):
        raise DomainError(f"invalid plane ({p}, {q}) for m = {m}")
    G = np.eye(m, dtype=complex)
    c, s = np.cos(complex(theta)), np.sin(complex(theta))
    G[p, p] = G[q, q] = c
    G[p, q] = s
    G[q, p] = -s
    return G


def complex_orthogonal_general(
    m: int,
    angles: Sequence[complex] = (),
    pairs: Sequence[tuple[int, int]] | None = None,
) -> ComplexOrthogonal:
    """Product of complex planar rotations acting in the given index planes.

    ``pairs`` uses 0-based indices.  When omitted, the ``m(m-1)/2`` planes are
    taken in lexicographic order and ``angles`` may be shorter than that
    (missing angles are zero).
    """
    if m < 1:
        raise DomainError("m must be positive")
    if pairs is None:
        pairs = [(p, q) for p in range(m) for q in range(p + 1, m)][: len(angles)]
    if len(pairs) != len(angles):
        raise ShapeError("angles and pairs differ in length")
    B = np.eye(m, dtype=complex)
    for (p, q), theta in zip(pairs, angles):
        B = B @ givens(m, p, q, theta)
    return ComplexOrthogonal(B)


def eigenphases_symmetric_unitary(S, tol: float = 1e-8) -> np.ndarray:
    """Eigen-phases ``delta`` (eigenvalues ``exp(2i delta)``) of a symmetric unitary S.

    Each phase lies in (-pi/2, pi/2]; the result is sorted ascending.
    """
    S = np.asarray(S, dtype=complex)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeError(f"S must be square, got shape {S.shape}")
    n = S.shape[0]
    unitarity = max_abs(S @ S.conj().T - np.eye(n))
    symmetry = max_abs(S - S.T)
    if unitarity > tol or symmetry > tol:
        raise ContractViolation(
            f"S not symmetric unitary (unitarity {unitarity:.2e}, symmetry {symmetry:.2e})"
        )
    # a normal matrix: plain eigvals are well conditioned
    lam = np.linalg.eigvals(S)
    delta = 0.5 * np.angle(lam)
    delta[delta <= -np.pi / 2] += np.pi
    return np.sort(delta, kind="stable")


def rcond(a) -> np.ndarray | float:
    """Reciprocal 2-norm condition number (``s_min / s_max``); stacks allowed."""
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    out = s[..., -1] / s[..., 0]
    return float(out) if np.ndim(out) == 0 else out


def checked_inverse(a, rcond_min: float = RCOND_MIN) -> np.ndarray:
    """Inverse via partial-pivot LU, refusing when the 1-norm rcond estimate is tiny."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    anorm = np.linalg.norm(a, 1)
    if not np.isfinite(anorm) or anorm == 0.0:
        raise IllConditionedError("matrix is zero or not finite")
    with warnings.catch_warnings():
        # exact singularity is reported through the condition estimate below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    est, info = lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or est < rcond_min:
        raise IllConditionedError(f"reciprocal condition {est:.2e} below {rcond_min:.0e}")
    return scipy.linalg.lu_solve((lu, piv), np.eye(a.shape[0], dtype=complex))
