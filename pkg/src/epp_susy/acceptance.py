"""
Built-in acceptance suite on the four-channel reference configuration.

Each ``criterion_*`` function measures one quantity and returns a
:class:`Criterion`; ``run_all`` is what ``epp selfcheck`` executes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import oracle as orc
from . import reference_model as ref
from . import transform as tr
from .errors import EppNotExistent
from .matrix_core import (
    ComplexOrthogonal,
    complex_orthogonal_2x2,
    complex_orthogonal_general,
    eigenphases_symmetric_unitary,
    max_abs,
)

REF_A = (1.1, 1.5, 2.1, 2.5)
REF_B = 2.5 + 1.3j
REF_ENERGIES = (-2 + 1.5j, -1.25 + 3j, 4.5j)

# reference Omega / Im(E) for the four-channel example, six decimals
REF_OMEGA = np.array([
    [0.0, -0.936848, 0.305791, -0.16973],
    [0.936848, 0.0, 0.16973, 0.305791],
    [-0.305791, -0.16973, 0.0, 0.936848],
    [0.16973, -0.305791, -0.936848, 0.0],
])


@dataclass
class Criterion:
    number: int
    name: str
    value: float
    tol: float
    passed: bool
    seconds: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.number:2d}. {self.name}: {self.value:.3e} "
                f"(tol {self.tol:.0e}, {self.seconds:.2f}s) {self.detail}").rstrip()


def reference_spec(energy: complex = 4.5j, sigma: int = 1, branch: int = 1) -> tr.TransformSpec:
    return tr.TransformSpec.from_energy(energy, complex_orthogonal_2x2(REF_B, branch), sigma)


def select_branch(b: complex = REF_B) -> tuple[int, float]:
    """Square-root branch whose Omega / Im(E) is closest to REF_OMEGA."""
    best = None
    for branch in (1, -1):
        spec = tr.TransformSpec(1.0 + 1.0j, complex_orthogonal_2x2(b, branch))
        dev = max_abs(tr.omega(spec) / spec.energy.imag - REF_OMEGA)
        if best is None or dev < best[1]:
            best = (branch, dev)
    return best


def random_spec(rng: np.random.Generator, m: int) -> tr.TransformSpec:
    """Random valid spec: K in the upper half plane, B from complex planar rotations."""
    while True:
        kr = rng.uniform(0.2, 3.0) * rng.choice([-1, 1])
        ki = rng.uniform(0.2, 3.0)
        n_ang = m * (m - 1) // 2
        angles = rng.uniform(-np.pi, np.pi, n_ang) + 1j * rng.uniform(-1.0, 1.0, n_ang)
        B = complex_orthogonal_general(m, angles)
        if m == 1 and rng.random() < 0.5:
            B = ComplexOrthogonal(-B.B)
        spec = tr.TransformSpec(complex(kr, ki), B, int(rng.choice([-1, 1])))
        if np.linalg.cond(B.B.real) < 1e6:
            return spec


def random_model(rng: np.random.Generator, n: int) -> ref.ChannelModel:
    return ref.ChannelModel(tuple(rng.uniform(0.5, 3.0, n)))


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def criterion_omega(tol: float = 5e-6) -> Criterion:
    (branch, dev), dt = _timed(select_branch)
    return Criterion(1, "Omega reproduction", dev, tol, dev <= tol and dt < 1.0, dt,
                     f"branch {branch:+d}")


def criterion_closed_form_preservation(tol: float = 1e-10, seed: int = 1) -> Criterion:
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for i in range(20):
            n = (2, 4, 6)[i % 3]
            model = random_model(rng, n)
            spec = random_spec(rng, n // 2)
            tr.validate_spec(model, spec)
            Om = tr.omega(spec)
            for k in rng.uniform(1e-3, 10.0, 200):
                p2 = eigenphases_symmetric_unitary(tr.s2_matrix(spec, model, k, Om), 1e-10)
                p0 = eigenphases_symmetric_unitary(ref.s0_matrix(k, model), 1e-10)
                worst = max(worst, orc.phase_distance(p0, p2))
        return worst
    worst, dt = _timed(run)
    return Criterion(2, "eigen-phase preservation (closed form)", worst, tol,
                     worst <= tol and dt < 10.0, dt)


def criterion_oracle(tol: float = 1e-3, tol_unitarity: float = 1e-5) -> Criterion:
    def run():
        model = ref.ChannelModel(REF_A)
        spec = reference_spec(4.5j)
        ks = (0.5, 1.0, 2.0, 4.0)
        rep = orc.verify_epp(model, spec, ks, tol, tol_unitarity)
        worst = 0.0
        for k, phases in zip(rep.k, rep.oracle):
            expected = np.sort(ref.phase_shift(k, model.a_array))
            worst = max(worst, orc.phase_distance(expected, phases))
        ok = rep.passed and len(rep.k) == len(ks)
        return worst, rep.unitarity_defect, ok
    (worst, unit, ok), dt = _timed(run)
    passed = ok and worst <= tol and unit <= tol_unitarity and dt < 60.0
    return Criterion(3, "eigen-phase preservation (ODE oracle)", worst, tol, passed, dt,
                     f"unitarity {unit:.1e}")


def structural_defects(model, spec, ksq_values, r) -> dict:
    Om = tr.omega(spec)
    c = 4 * spec.kr**2 * spec.ki**2
    out = {
        "omega_antisymmetry": max_abs(Om + Om.T),
        "omega_orthogonality": max_abs(Om.T @ Om - c * np.eye(len(Om))),
        "uinf_orthogonality": 0.0,
    }
    for ksq in ksq_values:
        U = tr.u_infinity(spec, ksq, Om)
        out["uinf_orthogonality"] = max(
            out["uinf_orthogonality"],
            max_abs(U @ U.T - tr.u_infinity_norm(spec, ksq) ** 2 * np.eye(len(U))),
        )
    g = tr.transform_grid(model, spec, r)
    out["wronskian_antihermitian"] = float(g.antihermitian_defect.max())
    out["v2_imag"] = g.max_imag_V2()
    out["v2_asymmetry"] = g.max_asymmetry_V2()
    return out


STRUCTURAL_TOLS = {
    "omega_antisymmetry": 1e-10,
    "omega_orthogonality": 1e-10,
    "uinf_orthogonality": 1e-10,
    "wronskian_antihermitian": 1e-10,
    "v2_imag": 1e-9,
    "v2_asymmetry": 1e-9,
}


def criterion_structural(draws: int = 100, seed: int = 2) -> Criterion:
    def run():
        rng = np.random.default_rng(seed)
        worst = {key: 0.0 for key in STRUCTURAL_TOLS}
        for i in range(draws):
            n = (2, 4, 6)[i % 3]
            model = random_model(rng, n)
            spec = random_spec(rng, n // 2)
            r = tr.default_grid(spec, points=200)
            ksq = rng.uniform(0.0, 100.0, 5)
            for key, val in structural_defects(model, spec, ksq, r).items():
                worst[key] = max(worst[key], val)
        return worst
    worst, dt = _timed(run)
    ratio = max(worst[key] / STRUCTURAL_TOLS[key] for key in worst)
    detail = ", ".join(f"{key} {val:.1e}" for key, val in worst.items())
    return Criterion(4, "structural invariants", ratio, 1.0, ratio <= 1.0, dt,
                     "(max defect/tol) " + detail)


def criterion_regularity(tol: float = 1e-10) -> Criterion:
    def run():
        model = ref.ChannelModel(REF_A)
        r = np.geomspace(1e-3, 40.0, 2000)
        return min(float(tr.transform_grid(model, reference_spec(E), r).rcond.min())
                   for E in REF_ENERGIES)
    low, dt = _timed(run)
    return Criterion(5, "regularity (min rcond of W[u,u*])", low, tol, low >= tol, dt)


def criterion_asymptotic(tol: float = 1e-6) -> Criterion:
    def run():
        model = ref.ChannelModel(REF_A)
        worst = 0.0
        for E in REF_ENERGIES:
            spec = reference_spec(E)
            worst = max(worst, max_abs(tr.sample(model, spec, 30.0 / spec.ki).W2))
        return worst
    worst, dt = _timed(run)
    return Criterion(6, "asymptotic vanishing of W2", worst, tol, worst <= tol, dt)


def intertwining_residual(model, spec, k: float, r) -> float:
    """Relative residual of -psi'' + (V2 - k^2) psi for psi = L phi0, 5-point stencil."""
    r = np.asarray(r, dtype=float)
    h = 3e-3 * np.minimum(r, 1.0)
    st = r[:, None] + h[:, None] * np.arange(-2, 3)
    n = model.n_channels
    psi = tr.transformed_solution(model, spec, k, st.ravel(), "regular").reshape(st.shape + (n, n))
    d2 = (-psi[:, 0] + 16 * psi[:, 1] - 30 * psi[:, 2] + 16 * psi[:, 3] - psi[:, 4]) / (
        12 * h[:, None, None] ** 2)
    V2 = tr.transform_grid(model, spec, r).V2.real
    p = psi[:, 2]
    res = -d2 + V2 @ p - k * k * p
    scale = (np.abs(V2 @ p).max(axis=(1, 2)) + k * k * np.abs(p).max(axis=(1, 2))
             + np.abs(d2).max(axis=(1, 2)))
    return float((np.abs(res).max(axis=(1, 2)) / scale).max())


def criterion_intertwining(tol: float = 1e-6) -> Criterion:
    def run():
        model = ref.ChannelModel(REF_A)
        r = np.geomspace(0.02, 20.0, 60)
        return max(intertwining_residual(model, reference_spec(E), k, r)
                   for E in REF_ENERGIES for k in (0.5, 1.3, 3.0))
    worst, dt = _timed(run)
    return Criterion(7, "intertwining residual", worst, tol, worst <= tol, dt)


def criterion_no_go(seed: int = 3) -> Criterion:
    def run():
        rng = np.random.default_rng(seed)
        failures = []
        for n in (1, 3, 5, 7):
            model = random_model(rng, n)
            spec = random_spec(rng, max(n // 2, 1))
            try:
                tr.validate_spec(model, spec)
                failures.append(f"N={n} accepted")
            except EppNotExistent:
                pass
        for n in (2, 4, 6, 8):
            model = random_model(rng, n)
            spec = random_spec(rng, n // 2)
            try:
                tr.transform_grid(model, spec, tr.default_grid(spec, points=200))
            except Exception as exc:  # noqa: BLE001 - any failure is a criterion failure
                failures.append(f"N={n}: {exc}")
        return failures
    failures, dt = _timed(run)
    return Criterion(8, "no-go enforcement", float(len(failures)), 0.0, not failures, dt,
                     "; ".join(failures))


def coupling_strengths() -> list[float]:
    model = ref.ChannelModel(REF_A)
    out = []
    for E in REF_ENERGIES:
        spec = reference_spec(E)
        out.append(tr.transform_grid(model, spec, tr.default_grid(spec)).max_offdiag())
    return out


def criterion_coupling_trend() -> Criterion:
    s, dt = _timed(coupling_strengths)
    gaps = np.diff(s)
    return Criterion(9, "coupling increases as arg E decreases", float(gaps.min()), 0.0,
                     bool(np.all(gaps > 0)), dt, "max|V2_ij|: " + ", ".join(f"{x:.4f}" for x in s))


def criterion_zero_coupling(tol: float = 1e-2) -> Criterion:
    def run():
        model = ref.ChannelModel(REF_A)
        spec = tr.TransformSpec(1.5 + 1e-4j, complex_orthogonal_2x2(REF_B))
        g = tr.transform_grid(model, spec, tr.default_grid(spec))
        return max_abs(g.V2.real - g.V0)
    dev, dt = _timed(run)
    return Criterion(10, "zero-coupling limit", dev, tol, dev <= tol, dt)


ALL = (
    criterion_omega,
    criterion_closed_form_preservation,
    criterion_oracle,
    criterion_structural,
    criterion_regularity,
    criterion_asymptotic,
    criterion_intertwining,
    criterion_no_go,
    criterion_coupling_trend,
    criterion_zero_coupling,
)


def run_all(echo=print) -> list[Criterion]:
    results = []
    for fn in ALL:
        c = fn()
        echo(c.line())
        results.append(c)
    return results
