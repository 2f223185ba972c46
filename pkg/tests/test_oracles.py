"""The frozen constants in oracle_values.py still match what the scripts compute."""

import math
import subprocess
import sys

import numpy as np
import pytest

import oracle_values as ov
from conftest import ORACLES, load_oracle


@pytest.mark.parametrize("name", ["closed_forms", "envelope", "mixing", "rbf_sums", "so3_series"])
def test_oracle_script_runs(name):
    out = subprocess.run([sys.executable, str(ORACLES / f"{name}.py")], capture_output=True,
                         text=True, check=True).stdout
    assert out.strip()


def test_so3_series_values():
    m = load_oracle("so3_series")
    np.testing.assert_allclose(m.exp_series(ov.EXP_SERIES_V), ov.EXP_SERIES_R, rtol=0, atol=1e-16)
    M = np.eye(3)
    M[0, 1] += 1e-6
    R = m.nearest_rotation(M)
    np.testing.assert_allclose(R, ov.NEAREST_ROT_I_PLUS_1E6, rtol=0, atol=1e-16)
    assert np.linalg.norm(R - M) == pytest.approx(ov.NEAREST_ROT_DISTANCE, rel=1e-9)
    assert math.sin(0.1) == ov.SIN_01


def test_mixing_values():
    m = load_oracle("mixing")
    f, M, dM = m.realize((0.1, 0.0, 0.0), 16.0, thrust_scale=(1.1, 1, 1, 1))
    assert f == pytest.approx(ov.MIX_ROTOR1_PLUS10_F, abs=1e-12)
    np.testing.assert_allclose(M, ov.MIX_ROTOR1_PLUS10_M, atol=1e-14)
    np.testing.assert_allclose(dM, ov.MIX_ROTOR1_PLUS10_DELTA_M, atol=1e-14)
    f, M, _ = m.realize((0.0, 0.0, 0.0), 16.0, thrust_scale=(1.1,) * 4)
    assert f == pytest.approx(ov.MIX_ALL_PLUS10_F, abs=1e-12)


def test_rbf_values():
    m = load_oracle("rbf_sums")
    assert m.activation((0.0, 0.0), (-0.5, -5.0), 2.0) == ov.RBF_SINGLE
    assert sum(m.activation((0.0, 0.0), c, 2.0) for c in m.AXIS1_CENTERS) == \
        pytest.approx(ov.RBF_AXIS1_UNIT_SUM, rel=1e-15)
    s = sum(w * m.activation(ov.RBF_AXIS3_X, c, 3.0) for w, c in zip(ov.RBF_AXIS3_WEIGHTS, m.AXIS3_CENTERS))
    assert s == pytest.approx(ov.RBF_AXIS3_WEIGHTED, rel=1e-15)


def test_envelope_values():
    m = load_oracle("envelope")
    t, z = m.samples(lambda s: 2.0 * math.exp(-3.0 * s) + 0.01, 5.0)
    res = m.fit(t, z)
    assert res["beta"] == pytest.approx(ov.ENV_SYNTH_BETA, rel=1e-12)
    assert res["eps"] == ov.ENV_SYNTH_EPS
    t, z = m.samples(lambda s: math.exp(-s), 20.0)
    res = m.fit(t, z)
    assert res["beta"] == pytest.approx(ov.ENV_PURE_BETA, rel=1e-9)
    assert res["alpha"] == pytest.approx(ov.ENV_PURE_ALPHA, rel=1e-9)


def test_closed_form_values():
    m = load_oracle("closed_forms")
    np.testing.assert_allclose(m.eig2(30.0, -24.0, 39.7), ov.EIG_M_R, rtol=1e-14)
    np.testing.assert_allclose(m.eig2(50.0, -0.3, 0.5), ov.EIG_M_R1, rtol=1e-14)
    np.testing.assert_allclose(m.eig2(100.0, 0.3, 0.5), ov.EIG_M_R2_PSI1, rtol=1e-14)
    out = subprocess.run([sys.executable, str(ORACLES / "closed_forms.py")], capture_output=True,
                         text=True, check=True).stdout
    assert f"min = {ov.C_R_BOUND_NOMINAL!r}" in out
    for v in (ov.C_R_EPS01, ov.ATTRACTION_MARGIN_PSI1_W9, ov.OMEGA_DOT_Z_EXAMPLE):
        assert repr(v) in out
