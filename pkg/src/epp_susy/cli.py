"""
Command line workbench
======================

    epp transform <config> [--out DIR] [--grid-points N]
    epp verify    <config> [--out DIR] [--grid-points N] [--tol-eigenphase X]
    epp figures   <config> [--out DIR]
    epp selfcheck

Configs are flat JSON objects.  Complex numbers are written as ``[re, im]``.
A ``summary.json`` written by ``transform`` can be passed back as a config:
its ``config`` entry is picked up.

Exit codes: 0 success, 1 a verification check failed, 2 configuration error or
a transformation that does not exist.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import acceptance
from . import oracle as orc
from . import reference_model as ref
from . import transform as tr
from .errors import EppError
from .matrix_core import (
    ComplexOrthogonal,
    complex_orthogonal_2x2,
    complex_orthogonal_general,
    eigenphases_symmetric_unitary,
    max_abs,
    orthogonality_defect,
)

logger = logging.getLogger(__name__)


class ConfigError(EppError, ValueError):
    pass


@dataclass
class RunConfig:
    a: list[float]
    N: int | None = None
    k_r: float | None = None
    k_i: float | None = None
    E_re: float | None = None
    E_im: float | None = None
    b_r: float | None = None
    b_i: float | None = None
    branch: int = 1
    angles: list[list[float]] | None = None   # complex planar angles [re, im]
    B: list[list[list[float]]] | None = None  # explicit matrix of [re, im]
    sigma: int = 1
    r_min: float = 1e-3
    r_max: float | None = None
    points: int = 2000
    k: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])
    ksq_sample: float = 1.0
    k_min: float = 0.05
    k_max: float = 10.0
    k_points: int = 200
    r_match: float | None = None
    tol_eigenphase: float = 1e-3
    tol_unitarity: float = 1e-5
    tol_closed_form: float = 1e-10
    tol_structure: float = 1e-10
    tol_potential: float = 1e-9
    tol_rcond: float = 1e-10
    tol_w2_tail: float = 1e-6
    out: str = "out"

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if "config" in d and isinstance(d["config"], dict):
            d = d["config"]
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "a" not in d:
            raise ConfigError("config needs the channel list 'a'")
        cfg = cls(**d)
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def check(self):
        if self.N is not None and self.N != len(self.a):
            raise ConfigError(f"N = {self.N} but {len(self.a)} channel parameters given")
        by_k = self.k_r is not None or self.k_i is not None
        by_e = self.E_re is not None or self.E_im is not None
        if by_k == by_e:
            raise ConfigError("give exactly one of (k_r, k_i) or (E_re, E_im)")
        if by_k and (self.k_r is None or self.k_i is None):
            raise ConfigError("both k_r and k_i are required")
        if by_e and (self.E_re is None or self.E_im is None):
            raise ConfigError("both E_re and E_im are required")
        sources = [self.b_r is not None or self.b_i is not None,
                   self.angles is not None, self.B is not None]
        if sum(sources) > 1:
            raise ConfigError("give B through one of (b_r, b_i), angles or B")
        tols = [v for f, v in asdict(self).items() if f.startswith("tol_")]
        if any(not (t > 0) for t in tols):
            raise ConfigError("all tolerances must be positive")
        if self.points < 2 or self.k_points < 2:
            raise ConfigError("grids need at least two points")

    # -- derived objects -----------------------------------------------------

    def model(self) -> ref.ChannelModel:
        return ref.ChannelModel(tuple(self.a))

    def orthogonal(self) -> ComplexOrthogonal:
        m = max(len(self.a) // 2, 1)
        if self.B is not None:
            return ComplexOrthogonal(np.array([[complex(*z) for z in row] for row in self.B]))
        if self.angles is not None:
            return complex_orthogonal_general(m, [complex(*z) for z in self.angles])
        if self.b_r is not None or self.b_i is not None:
            return complex_orthogonal_2x2(complex(self.b_r or 0.0, self.b_i or 0.0), self.branch)
        return complex_orthogonal_general(m)

    def spec(self) -> tr.TransformSpec:
        B = self.orthogonal()
        if self.k_r is not None:
            return tr.TransformSpec(complex(self.k_r, self.k_i), B, self.sigma)
        return tr.TransformSpec.from_energy(complex(self.E_re, self.E_im), B, self.sigma)

    def r_grid(self, spec) -> np.ndarray:
        return tr.default_grid(spec, self.points, self.r_min, self.r_max)

    def k_grid(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.k_points)


def _cplx(z):
    return [float(np.real(z)), float(np.imag(z))]


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _setup(cfg: RunConfig):
    model, spec = cfg.model(), cfg.spec()
    tr.validate_spec(model, spec)
    return model, spec


def _upper_pairs(n):
    return [(i, j) for i in range(n) for j in range(i, n)]


def cmd_transform(cfg: RunConfig, out: Path) -> int:
    model, spec = _setup(cfg)
    r = cfg.r_grid(spec)
    g = tr.transform_grid(model, spec, r)
    n = model.n_channels
    pairs = _upper_pairs(n)
    out.mkdir(parents=True, exist_ok=True)
    V = g.V2.real
    _write_csv(out / "v2_grid.csv",
               ["r"] + [f"V{i + 1}{j + 1}" for i, j in pairs],
               ([r[t]] + [V[t, i, j] for i, j in pairs] for t in range(len(r))))
    Om = tr.omega(spec)
    cf = tr.canonical_factorization(model, spec)
    summary = {
        "config": cfg.to_dict(),
        "K": _cplx(spec.K),
        "energy": _cplx(spec.energy),
        "parameter_count": tr.parameter_count(spec.m),
        "Omega": Om.tolist(),
        "ksq_sample": cfg.ksq_sample,
        "U_inf": tr.u_infinity(spec, cfg.ksq_sample, Om).tolist(),
        "X_diagnostic": [[_cplx(z) for z in row] for row in cf.X],
        "min_rcond": float(g.rcond.min()),
        "max_offdiag_V2": g.max_offdiag(),
        "max_abs_V2_minus_V0": max_abs(V - g.V0),
    }
    _write_json(out / "summary.json", summary)
    return 0


def invariant_checks(cfg: RunConfig, model, spec) -> dict:
    """Structural checks; each entry is {value, tol, pass}."""
    checks = {}

    def add(name, value, tol, ok=None):
        ok = value <= tol if ok is None else ok
        checks[name] = {"value": float(value), "tol": float(tol), "pass": bool(ok)}

    Om = tr.omega(spec)
    c = 4 * spec.kr**2 * spec.ki**2
    frame = tr.asymptotic_frame(spec)
    add("B_orthogonality", orthogonality_defect(spec.B.B), 1e-12)
    add("omega_antisymmetry", max_abs(Om + Om.T), cfg.tol_structure)
    add("omega_orthogonality", max_abs(Om.T @ Om - c * np.eye(len(Om))), cfg.tol_structure)
    add("rank_A", frame.rank_A, spec.m, frame.rank_A == spec.m)
    add("epp_condition", frame.epp_residual(), cfg.tol_structure)
    ks = np.asarray(cfg.k, dtype=float)
    u_def = 0.0
    cf_def = 0.0
    for k in ks:
        U = tr.u_infinity(spec, k * k, Om)
        u_def = max(u_def, max_abs(U @ U.T - tr.u_infinity_norm(spec, k * k) ** 2 * np.eye(len(U))))
        p2 = eigenphases_symmetric_unitary(tr.s2_matrix(spec, model, k, Om), cfg.tol_closed_form)
        cf_def = max(cf_def, orc.phase_distance(p2, ref.eigenphases0(k, model)))
    add("uinf_orthogonality", u_def, cfg.tol_structure)
    add("closed_form_eigenphases", cf_def, cfg.tol_closed_form)
    g = tr.transform_grid(model, spec, cfg.r_grid(spec), check=False)
    add("wronskian_antihermitian", g.antihermitian_defect.max(), cfg.tol_structure)
    add("self_wronskian", g.self_wronskian_defect.max(), cfg.tol_structure)
    add("rcond_W", float(g.rcond.min()), cfg.tol_rcond, float(g.rcond.min()) >= cfg.tol_rcond)
    add("v2_imag", g.max_imag_V2(), cfg.tol_potential)
    add("v2_asymmetry", g.max_asymmetry_V2(), cfg.tol_potential)
    tail = max_abs(tr.sample(model, spec, 30.0 / spec.ki).W2)
    add("w2_tail", tail, cfg.tol_w2_tail)
    return checks


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    model, spec = _setup(cfg)
    checks = invariant_checks(cfg, model, spec)
    grid = orc.verification_grid(spec, r_min=cfg.r_min, r_match=cfg.r_match)
    rep = orc.verify_epp(model, spec, cfg.k, cfg.tol_eigenphase, cfg.tol_unitarity, grid)
    ok = rep.passed and all(c["pass"] for c in checks.values())
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "report.json", {
        "config": cfg.to_dict(),
        "scatter": rep.to_dict(),
        "invariants": checks,
        "pass": ok,
    })
    for name, c in checks.items():
        logger.info("%s %s: %.3e (tol %.0e)", "PASS" if c["pass"] else "FAIL",
                    name, c["value"], c["tol"])
    print(f"max eigen-phase residual {rep.max_residual:.3e}, "
          f"unitarity {rep.unitarity_defect:.1e}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_figures(cfg: RunConfig, out: Path) -> int:
    model, spec = _setup(cfg)
    n = model.n_channels
    Om = tr.omega(spec)
    ks = cfg.k_grid()
    if np.any(ks <= 0):
        raise ConfigError("figure k grid must be positive")
    out.mkdir(parents=True, exist_ok=True)
    header = ["ksq"] + [f"R{j + 1}_{i + 1}" for j in range(n) for i in range(n)]
    rows = []
    phase_rows = []
    for k in ks:
        R = tr.rs_matrix(spec, model, k * k, Om)
        rows.append([k * k] + [R[i, j] for j in range(n) for i in range(n)])
        p0 = ref.eigenphases0(k, model)
        p2 = eigenphases_symmetric_unitary(tr.s2_matrix(spec, model, k, Om), cfg.tol_closed_form)
        phase_rows.append([k, *p0, *p2])
    _write_csv(out / "rs_columns.csv", header, rows)
    _write_csv(out / "eigenphases.csv",
               ["k"] + [f"S0_delta_{j + 1}" for j in range(n)] + [f"S2_delta_{j + 1}" for j in range(n)],
               phase_rows)
    return 0


def cmd_selfcheck() -> int:
    results = acceptance.run_all()
    return 0 if all(c.passed for c in results) else 1


COMMANDS = {"transform": cmd_transform, "verify": cmd_verify, "figures": cmd_figures}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="epp", description="Eigen-phase preserving SUSY transformations")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("config")
        s.add_argument("--out", help="output directory (default: config 'out')")
        s.add_argument("--grid-points", type=int, help="number of radial grid points")
        s.add_argument("--tol-eigenphase", type=float, help="eigen-phase tolerance in radians")
    sub.add_parser("selfcheck")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "selfcheck":
        return cmd_selfcheck()
    try:
        cfg = RunConfig.load(args.config)
        if args.grid_points is not None:
            cfg.points = args.grid_points
        if args.tol_eigenphase is not None:
            cfg.tol_eigenphase = args.tol_eigenphase
        cfg.check()
        out = Path(args.out or cfg.out)
        return COMMANDS[args.command](cfg, out)
    except (EppError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
