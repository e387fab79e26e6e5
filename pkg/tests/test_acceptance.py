"""Every acceptance criterion at its required tolerance, one printed line per criterion."""

import pytest

from epp_susy import acceptance as acc

# (criterion, keyword arguments pinning the tolerance, runtime limit in seconds)
CRITERIA = [
    (acc.criterion_omega, {"tol": 5e-6}, 1.0),
    (acc.criterion_closed_form_preservation, {"tol": 1e-10}, 10.0),
    (acc.criterion_oracle, {"tol": 1e-3, "tol_unitarity": 1e-5}, 60.0),
    (acc.criterion_structural, {"draws": 100}, None),
    (acc.criterion_regularity, {"tol": 1e-10}, None),
    (acc.criterion_asymptotic, {"tol": 1e-6}, None),
    (acc.criterion_intertwining, {"tol": 1e-6}, None),
    (acc.criterion_no_go, {}, None),
    (acc.criterion_coupling_trend, {}, None),
    (acc.criterion_zero_coupling, {"tol": 1e-2}, None),
]


def test_structural_tolerances_are_pinned():
    assert acc.STRUCTURAL_TOLS == {
        "omega_antisymmetry": 1e-10,
        "omega_orthogonality": 1e-10,
        "uinf_orthogonality": 1e-10,
        "wronskian_antihermitian": 1e-10,
        "v2_imag": 1e-9,
        "v2_asymmetry": 1e-9,
    }


@pytest.mark.parametrize("fn,kwargs,limit", CRITERIA, ids=[f"criterion_{i + 1:02d}" for i in range(10)])
def test_criterion(fn, kwargs, limit, capsys):
    c = fn(**kwargs)
    with capsys.disabled():
        print("\n" + c.line())
    if limit is not None:
        assert c.seconds < limit
    assert c.passed, c.line()


def test_coupling_strengths_strictly_increase_as_arg_decreases():
    import numpy as np
    args = [np.angle(E) for E in acc.REF_ENERGIES]
    assert args[0] > args[1] > args[2]
    s = acc.coupling_strengths()
    assert s[0] < s[1] < s[2]
