"""
Eigen-phase preserving second-order SUSY transformation
=======================================================

Given the uncoupled reference model (N = 2M channels), a complex wavenumber
K = k_r + i k_i (k_i > 0, factorization energy E = K^2), an M x M complex
orthogonal matrix B and a sign sigma, the transformation solution is

    u(r) = (2K/i) phi0(K, r) F0(K)^-1 [[I, 0], [sigma i B, 0]]
           + f0(K, r) [[0, -sigma i B^T], [0, I]]

and the deformed potential is V2 = V0 - 2 W2' with

    W2 = (E - E*) u* W[u, u*]^-1 u^T.

The S-matrix transforms as S2 = R_S S0 R_S^T with the real orthogonal

    R_S(k^2) = U_inf(k^2) / sqrt((k_r^2 - k_i^2 - k^2)^2 + 4 k_r^2 k_i^2),
    U_inf(k^2) = (k_r^2 - k_i^2 - k^2) I + Omega.

Numerics
--------
W2, W2' and W2 w are invariant under u -> u G for any constant invertible G.
At each radius the grid routines exploit this twice: the growing and decaying
column blocks are rescaled by exp(-/+ k_i r) (applied inside the exponentials,
see ``reference_model``), and the Wronskian is then symmetrically equilibrated
to unit diagonal.  Reported condition numbers refer to that equilibrated
Wronskian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import reference_model as ref
from .errors import (
    ContractViolation,
    DegenerateBError,
    DomainError,
    EppNotExistent,
    ShapeError,
    SingularWronskianError,
)
from .matrix_core import RCOND_MIN, ComplexOrthogonal, max_abs, rcond, wronskian

QQT_TOL = 1e-12


def _t(a):
    return np.swapaxes(a, -1, -2)


@dataclass(frozen=True)
class TransformSpec:
    """One EPP transformation: K = k_r + i k_i, complex orthogonal B, sign sigma."""

    K: complex
    B: ComplexOrthogonal
    sigma: int = 1

    def __post_init__(self):
        K = complex(self.K)
        object.__setattr__(self, "K", K)
        if not isinstance(self.B, ComplexOrthogonal):
            object.__setattr__(self, "B", ComplexOrthogonal(self.B))
        if not np.isfinite(K):
            raise DomainError("K must be finite")
        if not K.imag > 0:
            raise DomainError(f"k_i must be positive, got K = {K}")
        if K.real == 0:
            raise DomainError("k_r = 0 gives a real factorization energy and a degenerate frame")
        if self.sigma not in (1, -1):
            raise DomainError("sigma must be +1 or -1")
        Q = self.Q
        defect = max_abs(Q @ Q.T + np.eye(self.m))
        if defect > QQT_TOL:
            raise ContractViolation(f"Q Q^T != -I (defect {defect:.2e})")

    @classmethod
    def from_energy(cls, energy: complex, B, sigma: int = 1) -> "TransformSpec":
        """Spec from E = K^2, picking the root with Im K > 0."""
        K = np.sqrt(complex(energy))
        if K.imag < 0:
            K = -K
        return cls(K, B, sigma)

    @property
    def kr(self) -> float:
        return self.K.real

    @property
    def ki(self) -> float:
        return self.K.imag

    @property
    def energy(self) -> complex:
        return self.K * self.K

    @property
    def m(self) -> int:
        return self.B.m

    @property
    def signed_B(self) -> np.ndarray:
        return self.sigma * self.B.B

    @property
    def Q(self) -> np.ndarray:
        return 1j * self.signed_B


def parameter_count(m: int) -> int:
    """Real continuous parameters of one transformation: E (2) plus B (m(m-1))."""
    return m * (m - 1) + 2


def validate_spec(model: ref.ChannelModel, spec: TransformSpec) -> None:
    n = model.n_channels
    if n % 2:
        raise EppNotExistent(
            f"odd channel count: EPP transformation does not exist (N = {n})"
        )
    if spec.m != n // 2:
        raise ShapeError(f"B must be {n // 2}x{n // 2} for N = {n}, got {spec.m}x{spec.m}")
    re_b = spec.B.B.real
    if rcond(re_b) < RCOND_MIN:
        raise DegenerateBError("Re(B) is singular; B + B* cannot be inverted")


# -- canonical gauge and asymptotic frame ------------------------------------

@dataclass(frozen=True)
class CanonicalFactorization:
    """u = f0(-K) C + f0(K) D in the canonical gauge; X is symmetric."""

    C: np.ndarray
    D: np.ndarray
    X: np.ndarray


def canonical_factorization(model: ref.ChannelModel, spec: TransformSpec) -> CanonicalFactorization:
    """C and D of the Jost-basis expansion, with the X that corresponds to X~ = 0.

    For a diagonal reference S-matrix s0 = diag(s1, s3) the condition X~ = 0
    reads X = -s1 + B^T s3 B.  The returned gauge differs from ``build_u`` by
    the constant right factor ``gauge_shift``.
    """
    validate_spec(model, spec)
    m = spec.m
    eye, zero = np.eye(m), np.zeros((m, m))
    Q = spec.Q
    s = np.diag(_small_s(model, spec))
    s1, s3 = s[:m, :m], s[m:, m:]
    Bs = spec.signed_B
    X = -s1 + Bs.T @ s3 @ Bs
    C = np.block([[eye, zero], [Q, zero]])
    D = np.block([[X, -Q.T], [zero, eye]])
    return CanonicalFactorization(C, D, X)


def gauge_shift(model: ref.ChannelModel, spec: TransformSpec) -> np.ndarray:
    """Right factor T with (f0(-K) C + f0(K) D) T = build_u."""
    m = spec.m
    s3 = np.diag(_small_s(model, spec)[m:])
    return np.block([[np.eye(m), np.zeros((m, m))], [-s3 @ spec.Q, np.eye(m)]])


def _small_s(model, spec):
    """Diagonal of s0 = F0(-K) F0(K)^-1 at complex K."""
    a = model.a_array
    return ref.jost_function(-spec.K, a) / ref.jost_function(spec.K, a)


@dataclass(frozen=True)
class AsymptoticFrame:
    A: np.ndarray
    Sigma: np.ndarray
    Winf: np.ndarray
    Omega: np.ndarray

    @property
    def rank_A(self) -> int:
        return int(np.linalg.matrix_rank(self.A, tol=1e-10))

    def epp_residual(self) -> float:
        """max |A* Winf^-1 A^T|, zero exactly when W2 vanishes at infinity."""
        return max_abs(self.A.conj() @ np.linalg.solve(self.Winf, self.A.T))


def asymptotic_frame(spec: TransformSpec) -> AsymptoticFrame:
    m = spec.m
    eye = np.eye(m)
    Q = spec.Q
    A = np.block([[eye, -Q.T], [Q, eye]])
    Sigma = np.diag(np.r_[np.ones(m), -np.ones(m)])
    K = spec.K
    AtAc = A.T @ A.conj()
    Winf = K.conjugate() * AtAc @ Sigma + K * Sigma @ AtAc
    return AsymptoticFrame(A, Sigma, Winf, omega(spec))


def omega(spec: TransformSpec) -> np.ndarray:
    """Real antisymmetric Omega with Omega^T Omega = 4 k_r^2 k_i^2 I.

    The sign sigma enters through B -> sigma B (Q = i sigma B).
    """
    B = spec.signed_B
    m = spec.m
    eye, zero = np.eye(m), np.zeros((m, m))
    BH = B.conj().T
    left = np.block([[1j * (B.T - BH), 2 * eye], [-2 * eye, 1j * (B - B.conj())]])
    re1, re2 = B.T + BH, B + B.conj()
    if min(rcond(re1), rcond(re2)) < RCOND_MIN:
        raise DegenerateBError("Re(B) is singular; B + B* cannot be inverted")
    right = np.block([[np.linalg.inv(re1), zero], [zero, np.linalg.inv(re2)]])
    out = 2 * spec.kr * spec.ki * left @ right
    if max_abs(out.imag) > 1e-10 * max(1.0, max_abs(out)):
        raise ContractViolation("Omega came out complex")
    return out.real


def u_infinity(spec: TransformSpec, ksq: float, Omega: np.ndarray | None = None) -> np.ndarray:
    if Omega is None:
        Omega = omega(spec)
    n = 2 * spec.m
    return (-ksq + spec.kr**2 - spec.ki**2) * np.eye(n) + Omega


def u_infinity_norm(spec: TransformSpec, ksq):
    """sqrt((-k^2 + k_r^2 - k_i^2)^2 + 4 k_r^2 k_i^2)."""
    return np.sqrt((-ksq + spec.kr**2 - spec.ki**2) ** 2 + 4 * spec.kr**2 * spec.ki**2)


def rs_matrix(spec: TransformSpec, model: ref.ChannelModel, ksq: float,
              Omega: np.ndarray | None = None) -> np.ndarray:
    # l = 0 for the reference model, so the exp(i l pi/2) factors drop out
    if any(model.l):
        raise DomainError("only l = 0 is supported")
    return u_infinity(spec, ksq, Omega) / u_infinity_norm(spec, ksq)


def s2_matrix(spec: TransformSpec, model: ref.ChannelModel, k: float,
              Omega: np.ndarray | None = None) -> np.ndarray:
    R = rs_matrix(spec, model, k * k, Omega)
    return R @ ref.s0_matrix(k, model) @ R.T


# -- transformation solution -------------------------------------------------

def _projectors(spec: TransformSpec):
    m = spec.m
    eye, zero = np.eye(m), np.zeros((m, m))
    sB = spec.signed_B
    P1 = np.block([[eye, zero], [1j * sB, zero]])
    P2 = np.block([[zero, -1j * sB.T], [zero, eye]])
    return P1, P2


def _u_blocks(model, spec, r, scaled):
    r = np.asarray(r, dtype=float)
    a = model.a_array
    K = spec.K
    rr = r[..., None]
    grow = spec.ki * rr if scaled else 0.0
    phi, dphi = ref.regular_solution(K, rr, a, shift=grow)
    f, df = ref.jost_solution(K, rr, a, shift=-grow if scaled else 0.0)
    coef = (2 * K / 1j) / ref.jost_function(K, a)
    P1, P2 = _projectors(spec)
    u = (phi * coef)[..., :, None] * P1 + f[..., :, None] * P2
    du = (dphi * coef)[..., :, None] * P1 + df[..., :, None] * P2
    return u, du


def build_u(model: ref.ChannelModel, spec: TransformSpec, r):
    """Transformation solution u(r) and u'(r); ``r`` may be an array."""
    validate_spec(model, spec)
    return _u_blocks(model, spec, r, scaled=False)


def build_u_scaled(model: ref.ChannelModel, spec: TransformSpec, r):
    """u(r) G(r), u'(r) G(r) with G = diag(exp(-k_i r) I_M, exp(k_i r) I_M).

    Same W2, W2', w as the unscaled pair; safe for large k_i r.
    """
    validate_spec(model, spec)
    return _u_blocks(model, spec, r, scaled=True)


def _equilibrate(u, du):
    W = wronskian(u, u.conj(), du, du.conj())
    d = np.abs(np.diagonal(W, axis1=-2, axis2=-1))
    if np.any(d == 0) or not np.all(np.isfinite(d)):
        raise SingularWronskianError("Wronskian has a vanishing diagonal entry")
    s = 1.0 / np.sqrt(d)
    u = u * s[..., None, :]
    du = du * s[..., None, :]
    W = W * s[..., :, None] * s[..., None, :]
    return u, du, W


@dataclass(frozen=True)
class W2Parts:
    W2: np.ndarray
    dW2: np.ndarray
    W2w: np.ndarray      # W2 w (complex); its real part is W2 Re(w)
    rcond: np.ndarray
    W_eq: np.ndarray     # equilibrated Wronskian W[u, u*]
    u_eq: np.ndarray
    du_eq: np.ndarray


def w2_parts(u, du, energy: complex) -> W2Parts:
    """Second-order superpotential, its derivative and W2 w, without inverting u."""
    u, du, W = _equilibrate(np.asarray(u, complex), np.asarray(du, complex))
    de = energy - np.conj(energy)
    ut, uc, dut, duc = _t(u), u.conj(), _t(du), du.conj()
    Winv_ut = np.linalg.solve(W, ut)
    Winv_dut = np.linalg.solve(W, dut)
    dW = de * ut @ uc
    W2 = de * uc @ Winv_ut
    dW2 = de * (duc @ Winv_ut + uc @ Winv_dut - uc @ np.linalg.solve(W, dW @ Winv_ut))
    W2w = de * uc @ Winv_dut
    return W2Parts(W2, dW2, W2w, rcond(W), W, u, du)


def w2_and_derivative(u, du, K: complex, rcond_min: float = RCOND_MIN):
    """W2 and its analytic r-derivative at one radius (or a stack of radii)."""
    parts = w2_parts(u, du, complex(K) ** 2)
    if np.any(np.asarray(parts.rcond) < rcond_min):
        raise SingularWronskianError(
            f"W[u, u*] is singular (rcond {np.min(parts.rcond):.2e})"
        )
    return parts.W2, parts.dW2


@dataclass(frozen=True)
class TransformationSolutionSample:
    r: float
    u: np.ndarray
    du: np.ndarray
    W: np.ndarray
    W2: np.ndarray
    dW2: np.ndarray
    V2: np.ndarray
    rcond: float


def sample(model: ref.ChannelModel, spec: TransformSpec, r: float) -> TransformationSolutionSample:
    u, du = build_u(model, spec, r)
    W = wronskian(u, u.conj(), du, du.conj())
    us, dus = _u_blocks(model, spec, r, scaled=True)
    parts = w2_parts(us, dus, spec.energy)
    if parts.rcond < RCOND_MIN:
        raise SingularWronskianError(f"W[u, u*] is singular at r = {r}")
    V2 = ref.potential_matrix(model, r) - 2 * parts.dW2
    return TransformationSolutionSample(float(r), u, du, W, parts.W2, parts.dW2, V2, float(parts.rcond))


@dataclass(frozen=True)
class TransformGrid:
    """Stacked transformation data on a radial grid (leading axis = radius)."""

    r: np.ndarray
    V0: np.ndarray
    V2: np.ndarray       # complex as computed; imaginary part is round-off
    W2: np.ndarray
    dW2: np.ndarray
    W2w: np.ndarray
    rcond: np.ndarray
    antihermitian_defect: np.ndarray     # max|W + W^H| / max|W|, per radius
    self_wronskian_defect: np.ndarray    # max|W[u,u]| / (max|u| max|u'|), per radius

    @property
    def V2_real(self) -> np.ndarray:
        return self.V2.real

    def max_imag_V2(self) -> float:
        return max_abs(self.V2.imag)

    def max_asymmetry_V2(self) -> float:
        return max_abs(self.V2 - _t(self.V2))

    def max_offdiag(self) -> float:
        n = self.V2.shape[-1]
        mask = ~np.eye(n, dtype=bool)
        return max_abs(self.V2.real[..., mask])


def transform_grid(model: ref.ChannelModel, spec: TransformSpec, r,
                   check: bool = True) -> TransformGrid:
    """Evaluate the transformation on every radius of ``r`` (vectorised)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    u, du = build_u_scaled(model, spec, r)
    parts = w2_parts(u, du, spec.energy)
    if check and np.any(parts.rcond < RCOND_MIN):
        i = int(np.argmin(parts.rcond))
        raise SingularWronskianError(
            f"W[u, u*] is singular at r = {r[i]:.6g} (rcond {parts.rcond[i]:.2e})"
        )
    # both defects relative to their natural scale: an absolute value depends
    # on the arbitrary normalisation of u
    Weq = parts.W_eq
    anti = _maxabs(Weq + _t(Weq).conj()) / _maxabs(Weq)
    ue, due = parts.u_eq, parts.du_eq
    selfw = _maxabs(wronskian(ue, ue, due, due)) / (_maxabs(ue) * _maxabs(due))
    V0 = ref.potential_matrix(model, r)
    V2 = V0 - 2 * parts.dW2
    return TransformGrid(r, V0, V2, parts.W2, parts.dW2, parts.W2w, parts.rcond, anti, selfw)


def _maxabs(a):
    return np.max(np.abs(a), axis=(-2, -1))


def default_grid(spec: TransformSpec, points: int = 2000, r_min: float = 1e-3,
                 r_max: float | None = None) -> np.ndarray:
    if r_max is None:
        r_max = max(40.0, 30.0 / spec.ki)
    return np.geomspace(r_min, r_max, points)


def v2_function(model: ref.ChannelModel, spec: TransformSpec):
    """Real potential V2 as a vectorised function of r, for the ODE oracle."""
    def V(r):
        g = transform_grid(model, spec, r)
        return g.V2.real
    return V


# -- transformation operator -------------------------------------------------

def apply_L(spec: TransformSpec, f, df, ksq: float, W2, W2_re_w):
    """L f for an eigen-solution f of H0 at energy k^2.

    ``L f = (-k^2 + Re E) f + W2 (Re(w) f - f')`` with ``W2_re_w = W2 Re(w)``.
    """
    return (-ksq + spec.energy.real) * f + W2_re_w @ f - W2 @ df


def transformed_solution(model: ref.ChannelModel, spec: TransformSpec, k: complex, r,
                         kind: str = "jost"):
    """(L s)(k, r) for s = f0 (``kind='jost'``) or phi0 (``kind='regular'``)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    g = transform_grid(model, spec, r)
    if kind == "jost":
        f, df = ref.assemble_diagonal(model, ref.jost_solution)(k, r)
    elif kind == "regular":
        f, df = ref.assemble_diagonal(model, ref.regular_solution)(k, r)
    else:
        raise ValueError(f"unknown solution kind {kind!r}")
    return apply_L(spec, f, df, complex(k) ** 2, g.W2, g.W2w.real)


def transformed_jost(model: ref.ChannelModel, spec: TransformSpec, k: float, r):
    """f2(k, r) = (L f0)(k, r) U_inf(k^2)^-1."""
    Lf = transformed_solution(model, spec, k, r, "jost")
    return Lf @ np.linalg.inv(u_infinity(spec, k * k))
