import csv
import json
from pathlib import Path

import numpy as np
import pytest

from epp_susy import cli
from epp_susy.matrix_core import complex_orthogonal_2x2

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
REFERENCE = {
    "a": [1.1, 1.5, 2.1, 2.5], "E_re": 0.0, "E_im": 4.5, "b_r": 2.5, "b_i": 1.3,
    "points": 400, "k": [0.5, 1.0, 2.0, 4.0], "k_points": 40,
}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def run(*args):
    return cli.main([str(a) for a in args])


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_transform(tmp_path, path):
    assert run("transform", path, "--out", tmp_path) == 0
    header, data = read_csv(tmp_path / "v2_grid.csv")
    assert header == ["r", "V11", "V12", "V13", "V14", "V22", "V23", "V24", "V33", "V34", "V44"]
    assert data.shape == (2000, 11)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["parameter_count"] == 4 and summary["min_rcond"] >= 1e-10
    Om = np.array(summary["Omega"])
    assert np.allclose(Om, -Om.T)


def test_transform_summary_contents(tmp_path):
    assert run("transform", write(tmp_path, REFERENCE), "--out", tmp_path) == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["K"] == pytest.approx([1.5, 1.5])
    assert np.array(s["U_inf"]).shape == (4, 4)
    X = np.array(s["X_diagnostic"])
    assert X.shape == (2, 2, 2)
    Xc = X[..., 0] + 1j * X[..., 1]
    assert np.allclose(Xc, Xc.T)
    assert s["config"]["b_r"] == 2.5


def test_grid_points_flag(tmp_path):
    assert run("transform", write(tmp_path, REFERENCE), "--out", tmp_path, "--grid-points", 50) == 0
    _, data = read_csv(tmp_path / "v2_grid.csv")
    assert data.shape[0] == 50


def test_determinism_and_round_trip(tmp_path):
    cfg = write(tmp_path, REFERENCE)
    for sub in ("a", "b"):
        assert run("transform", cfg, "--out", tmp_path / sub) == 0
    assert run("transform", tmp_path / "a" / "summary.json", "--out", tmp_path / "c") == 0
    for name in ("v2_grid.csv", "summary.json"):
        ref = (tmp_path / "a" / name).read_bytes()
        assert (tmp_path / "b" / name).read_bytes() == ref
        assert (tmp_path / "c" / name).read_bytes() == ref


def test_verify_reference_configuration(tmp_path, capsys):
    assert run("verify", write(tmp_path, REFERENCE), "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["pass"] and rep["scatter"]["max_residual"] <= 1e-3
    assert all(c["pass"] for c in rep["invariants"].values())
    assert "PASS" in capsys.readouterr().out


def test_verify_fails_with_impossible_tolerance(tmp_path):
    cfg = dict(REFERENCE, k=[1.0])
    assert run("verify", write(tmp_path, cfg), "--out", tmp_path, "--tol-eigenphase", 1e-15) == 1
    assert json.loads((tmp_path / "report.json").read_text())["pass"] is False


def test_odd_channel_count_exit_code(tmp_path, capsys):
    cfg = dict(REFERENCE, a=[1.0, 1.5, 2.0, 2.5, 3.0])
    for cmd in ("transform", "verify", "figures"):
        assert run(cmd, write(tmp_path, cfg), "--out", tmp_path) == 2
        assert "odd channel count: EPP transformation does not exist" in capsys.readouterr().err


def test_corrupted_b_exit_code(tmp_path, capsys):
    B = complex_orthogonal_2x2(2.5 + 1.3j).B.copy()
    B[0, 1] += 1e-3
    cfg = {k: v for k, v in REFERENCE.items() if k not in ("b_r", "b_i")}
    cfg["B"] = [[[z.real, z.imag] for z in row] for row in B]
    assert run("verify", write(tmp_path, cfg), "--out", tmp_path) == 2
    assert "B not complex-orthogonal" in capsys.readouterr().err


@pytest.mark.parametrize("bad", [
    {"k_r": 1.0, "k_i": 1.0},                  # both energy forms
    {"E_im": None},                            # incomplete energy
    {"tol_eigenphase": 0.0},
    {"N": 6},
    {"colour": "blue"},
    {"angles": [[0.1, 0.2]]},                  # two B sources
    {"E_re": -1.0, "E_im": 0.0},               # real energy
])
def test_config_errors(tmp_path, bad):
    cfg = {k: v for k, v in dict(REFERENCE, **bad).items() if v is not None}
    assert run("transform", write(tmp_path, cfg), "--out", tmp_path) == 2


def test_unreadable_config(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert run("transform", p) == 2
    assert run("transform", tmp_path / "missing.json") == 2


def test_six_channels_random_angles(tmp_path):
    rng = np.random.default_rng(5)
    cfg = {
        "a": [0.7, 1.1, 1.5, 2.1, 2.5, 3.0], "k_r": 1.2, "k_i": 0.9, "sigma": -1,
        "angles": [[float(x), float(y)] for x, y in zip(rng.uniform(-3, 3, 3), rng.uniform(-0.8, 0.8, 3))],
        "points": 400, "k": [0.5, 2.0],
    }
    path = write(tmp_path, cfg)
    assert run("transform", path, "--out", tmp_path) == 0
    header, _ = read_csv(tmp_path / "v2_grid.csv")
    assert len(header) == 1 + 21
    assert run("verify", path, "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert all(c["pass"] for c in rep["invariants"].values())


def test_small_imaginary_part_barely_couples(tmp_path):
    cfg = {k: v for k, v in REFERENCE.items() if not k.startswith("E_")}
    cfg.update(k_r=1.5, k_i=1e-4)
    assert run("transform", write(tmp_path, cfg), "--out", tmp_path) == 0
    header, data = read_csv(tmp_path / "v2_grid.csv")
    r = data[:, 0]
    a = np.array(REFERENCE["a"])
    with np.errstate(over="ignore"):  # the default grid reaches 30 / k_i
        V0 = 2 * a**2 / np.sinh(np.outer(r, a)) ** 2
    diag = [header.index(f"V{j}{j}") for j in range(1, 5)]
    off = [i for i in range(1, 11) if i not in diag]
    assert np.max(np.abs(data[:, diag] - V0)) <= 1e-2
    assert np.max(np.abs(data[:, off])) <= 1e-2


def test_figures_outputs(tmp_path):
    assert run("figures", write(tmp_path, REFERENCE), "--out", tmp_path) == 0
    header, R = read_csv(tmp_path / "rs_columns.csv")
    assert header[:3] == ["ksq", "R1_1", "R1_2"] and len(header) == 17
    cols = R[:, 1:].reshape(-1, 4, 4)  # [row, column j, component i]
    assert np.allclose((cols**2).sum(axis=2), 1.0, atol=1e-10)
    header, P = read_csv(tmp_path / "eigenphases.csv")
    assert header[0] == "k" and header[1] == "S0_delta_1" and header[-1] == "S2_delta_4"
    assert np.max(np.abs(P[:, 1:5] - P[:, 5:9])) <= 1e-10


def test_figures_high_energy_rows(tmp_path):
    cfg = dict(REFERENCE, k_min=300.0, k_max=1000.0, k_points=5)
    assert run("figures", write(tmp_path, cfg), "--out", tmp_path) == 0
    _, R = read_csv(tmp_path / "rs_columns.csv")
    assert np.allclose(R[-1, 1:].reshape(4, 4), -np.eye(4), atol=1e-4)


def test_selfcheck_entry_point(monkeypatch, capsys):
    from epp_susy import acceptance
    fake = [acceptance.Criterion(1, "dummy", 0.0, 1.0, True, 0.0)]
    monkeypatch.setattr(acceptance, "run_all", lambda: fake)
    assert run("selfcheck") == 0
    fake[0] = acceptance.Criterion(1, "dummy", 2.0, 1.0, False, 0.0)
    assert run("selfcheck") == 1
