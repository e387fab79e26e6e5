"""
Numerical scattering oracle
===========================

Independent check of the closed-form S2: integrate the coupled radial equation

    Psi'' = (V(r) - k^2) Psi

for N column solutions with classical RK4 on a deterministic grid, extract S
by matching to free waves at r_match, and compare eigen-phases.

Grid
----
Steps grow geometrically near the origin, ``h = min(step, rel_step * r)``,
which resolves the ``2/r^2`` core without millions of uniform steps.  Every
step is also taken as two half steps; the difference is the Richardson error
estimate and the extrapolated value is propagated.

Seeding
-------
Psi(r_min) = 0, Psi'(r_min) = I.  The irregular admixture this introduces is
of relative order r_min^(2 nu + 1).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import reference_model as ref
from . import transform as tr
from .errors import AccuracyError, DomainError, EppError, IllConditionedError, MatchingError
from .matrix_core import checked_inverse, eigenphases_symmetric_unitary, max_abs

logger = logging.getLogger(__name__)

STEP_TOL = 1e-9
ASYMPTOTIC_TOL = 1e-10


@dataclass(frozen=True)
class RadialGrid:
    r_min: float
    r_match: float
    step: float = 5e-3
    rel_step: float = 5e-3

    def __post_init__(self):
        if not (0 < self.r_min < self.r_match):
            raise DomainError("need 0 < r_min < r_match")
        if not (self.step > 0 and self.rel_step > 0):
            raise DomainError("steps must be positive")
        if (self.r_match - self.r_min) / self.step < 100:
            raise DomainError("fewer than 100 steps between r_min and r_match")

    def nodes(self) -> np.ndarray:
        r = [self.r_min]
        x = self.r_min
        while x < self.r_match:
            h = min(self.step, self.rel_step * x)
            x = min(x + h, self.r_match)
            if self.r_match - x < 1e-3 * h:
                x = self.r_match
            r.append(x)
        return np.array(r)

    @property
    def points(self) -> int:
        return len(self.nodes())

    def refined(self) -> "RadialGrid":
        return RadialGrid(self.r_min, self.r_match, self.step / 2, self.rel_step / 2)


def verification_grid(spec: tr.TransformSpec | None = None, r_min: float = 1e-3,
                      r_match: float | None = None, **kw) -> RadialGrid:
    if r_match is None:
        r_match = 20.0 if spec is None else max(20.0, 25.0 / spec.ki)
    return RadialGrid(r_min, r_match, **kw)


def _stage_points(nodes):
    h = np.diff(nodes)
    q = nodes[:-1, None] + h[:, None] * np.arange(5) / 4
    return q  # (steps, 5): r, r+h/4, r+h/2, r+3h/4, r+h


def sample_potential(V: Callable, grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and V evaluated at the 5 quarter points of every step."""
    nodes = grid.nodes()
    pts = _stage_points(nodes)
    vals = np.asarray(V(pts.ravel()), dtype=float)
    n = vals.shape[-1]
    return nodes, vals.reshape(pts.shape + (n, n))


def _rk4(P, D, h, A0, Am, A1):
    k1p, k1d = D, A0 @ P
    k2p, k2d = D + 0.5 * h * k1d, Am @ (P + 0.5 * h * k1p)
    k3p, k3d = D + 0.5 * h * k2d, Am @ (P + 0.5 * h * k2p)
    k4p, k4d = D + h * k3d, A1 @ (P + h * k3p)
    return (P + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p),
            D + h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d))


def integrate_sampled(nodes, Vq, ksq: float, seed=None, tol: float = STEP_TOL):
    """RK4 with step doubling over pre-sampled potential values."""
    n = Vq.shape[-1]
    eye = np.eye(n)
    if seed is None:
        P, D = np.zeros((n, n)), eye.copy()
    else:
        P, D = (np.array(x, dtype=float) for x in seed)
    A = Vq - ksq * eye
    worst = 0.0
    for i, h in enumerate(np.diff(nodes)):
        a0, a1, a2, a3, a4 = A[i]
        Pf, Df = _rk4(P, D, h, a0, a2, a4)
        Ph, Dh = _rk4(P, D, h / 2, a0, a1, a2)
        Ph, Dh = _rk4(Ph, Dh, h / 2, a2, a3, a4)
        scale = max(max_abs(Ph), max_abs(Dh))
        err = max(max_abs(Ph - Pf), max_abs(Dh - Df)) / 15 / scale
        worst = max(worst, err)
        if err > tol:
            raise AccuracyError(f"step error {err:.2e} > {tol:.0e} at r = {nodes[i]:.4g}")
        P = Ph + (Ph - Pf) / 15
        D = Dh + (Dh - Df) / 15
    return P, D, worst


def integrate_radial(V: Callable, ksq: float, grid: RadialGrid, seed=None,
                     tol: float = STEP_TOL):
    """Psi and Psi' at ``grid.r_match`` for the real symmetric potential ``V``.

    ``V`` maps an array of radii to an array of matrices, shape (n, N, N).
    """
    nodes, Vq = sample_potential(V, grid)
    P, D, _ = integrate_sampled(nodes, Vq, ksq, seed, tol)
    return P, D


class Extraction(NamedTuple):
    S: np.ndarray
    asymmetry: float
    unitarity: float


def extract_s_matrix(Psi, dPsi, k: float, r_match: float) -> Extraction:
    """Match Psi = exp(-ikr) A_in - exp(ikr) A_out and return S = A_out A_in^-1.

    S is symmetrised; the asymmetry before symmetrisation is reported.
    """
    if not k > 0:
        raise DomainError("k must be positive")
    Psi = np.asarray(Psi, dtype=complex)
    dPsi = np.asarray(dPsi, dtype=complex)
    e = np.exp(1j * k * r_match)
    A_in = (1j * k * Psi - dPsi) * e / (2j * k)
    A_out = -(1j * k * Psi + dPsi) / e / (2j * k)
    try:
        S = A_out @ checked_inverse(A_in)
    except IllConditionedError as exc:
        raise MatchingError(f"incoming amplitude matrix is singular: {exc}") from exc
    asym = max_abs(S - S.T)
    S = 0.5 * (S + S.T)
    unit = max_abs(S @ S.conj().T - np.eye(S.shape[0]))
    return Extraction(S, asym, unit)


def oracle_s_matrix(V: Callable, k: float, grid: RadialGrid, seed=None) -> Extraction:
    P, D = integrate_radial(V, k * k, grid, seed)
    return extract_s_matrix(P, D, k, grid.r_match)


def _phases(S, tol):
    return eigenphases_symmetric_unitary(S, tol=tol)


def phase_distance(a, b) -> float:
    """Largest elementwise difference of sorted phase sets, modulo pi."""
    d = np.asarray(a) - np.asarray(b)
    d = (d + np.pi / 2) % np.pi - np.pi / 2
    return float(np.max(np.abs(d))) if d.size else 0.0


@dataclass
class ScatterReport:
    k: list[float]
    closed_form: list[list[float]]
    oracle: list[list[float]]
    residuals: list[float]
    unitarity: list[float]
    symmetry: list[float]
    max_residual: float
    unitarity_defect: float
    symmetry_defect: float
    tol_phase: float
    tol_unitarity: float
    errors: dict = field(default_factory=dict)
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "closed_form_eigenphases": self.closed_form,
            "oracle_eigenphases": self.oracle,
            "residuals": self.residuals,
            "unitarity": self.unitarity,
            "symmetry": self.symmetry,
            "max_residual": self.max_residual,
            "unitarity_defect": self.unitarity_defect,
            "symmetry_defect": self.symmetry_defect,
            "tol_phase": self.tol_phase,
            "tol_unitarity": self.tol_unitarity,
            "errors": {str(k): v for k, v in self.errors.items()},
            "pass": self.passed,
        }


def verify_epp(model: ref.ChannelModel, spec: tr.TransformSpec, ks: Sequence[float],
               tol_phase: float = 1e-3, tol_unitarity: float = 1e-5,
               grid: RadialGrid | None = None) -> ScatterReport:
    """Compare eigen-phases of the numerically extracted S(V2) with the closed form."""
    tr.validate_spec(model, spec)
    grid = grid or verification_grid(spec)
    Om = tr.omega(spec)
    nodes, Vq = sample_potential(tr.v2_function(model, spec), grid)
    tail = max_abs(Vq[-1, -1])
    if tail > ASYMPTOTIC_TOL:
        logger.warning("|V2(r_match)| = %.2e exceeds %.0e", tail, ASYMPTOTIC_TOL)

    rep = ScatterReport([], [], [], [], [], [], 0.0, 0.0, 0.0, tol_phase, tol_unitarity)
    for k in ks:
        k = float(k)
        try:
            closed = _phases(tr.s2_matrix(spec, model, k, Om), 1e-10)
            P, D, _ = integrate_sampled(nodes, Vq, k * k)
            ext = extract_s_matrix(P, D, k, grid.r_match)
            numeric = _phases(ext.S, max(ext.unitarity, 1e-8) * 10)
        except EppError as exc:
            rep.errors[k] = f"{type(exc).__name__}: {exc}"
            continue
        rep.k.append(k)
        rep.closed_form.append(closed.tolist())
        rep.oracle.append(numeric.tolist())
        rep.residuals.append(phase_distance(closed, numeric))
        rep.unitarity.append(ext.unitarity)
        rep.symmetry.append(ext.asymmetry)
    if rep.k:
        rep.max_residual = max(rep.residuals)
        rep.unitarity_defect = max(rep.unitarity)
        rep.symmetry_defect = max(rep.symmetry)
    rep.passed = (
        not rep.errors
        and bool(rep.k)
        and rep.max_residual <= tol_phase
        and rep.unitarity_defect <= tol_unitarity
        and rep.symmetry_defect <= tol_unitarity
    )
    return rep
