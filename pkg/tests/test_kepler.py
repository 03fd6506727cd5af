import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pradequacy.dataset import DataTable
from pradequacy.errors import DataError, DomainError
from pradequacy.estimation import fit_ols
from pradequacy.kepler import (ALPHA0, ALPHA1, PUBLISHED_S, ROLES, from_structural,
                               make_kepler_table, run_kepler_study, structural_interpretation)


def test_noiseless_linear():
    t = make_kepler_table(np.linspace(0, 6, 11))
    np.testing.assert_allclose(t.column("y"), ALPHA0 + ALPHA1 * t.column("x"), rtol=0, atol=1e-15)


def test_quarter_turn():
    t = make_kepler_table([math.pi / 2])
    assert abs(t.column("x")[0]) < 1e-15
    assert t.column("y")[0] == pytest.approx(ALPHA0, abs=1e-15)


def test_nonpositive_inverse_radius():
    with pytest.raises(DomainError):
        make_kepler_table([0.0, math.pi], alpha0=0.1, alpha1=0.5)


def test_structural_examples():
    assert structural_interpretation(0.25, 0.1).MG == pytest.approx(1.0)
    p = structural_interpretation(ALPHA0, ALPHA1)
    assert p.d == pytest.approx(1 / 0.723395, rel=1e-12)
    with pytest.raises(DomainError):
        structural_interpretation(-0.1, 0.5)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 10), st.floats(-0.999, 10), st.floats(0.1, 10))
def test_structural_round_trip(a0, ratio, kappa):
    a1 = ratio * a0
    p = structural_interpretation(a0, a1, kappa)
    b0, b1 = p.coefficients()
    assert b0 == pytest.approx(a0, abs=1e-12 * max(1, a0))
    assert b1 == pytest.approx(a1, abs=1e-12 * max(1, abs(a0), abs(a1)) / (1 + ratio))
    c0, c1 = from_structural(p.MG, p.d, kappa)
    assert (c0, c1) == pytest.approx((b0, b1))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 2), st.floats(-0.09, 0.09), st.integers(3, 40))
def test_noiseless_recovery_any_angles(a0, frac, n):
    angles = np.random.default_rng(n).uniform(0, 2 * math.pi, n)
    t = make_kepler_table(angles, a0, frac * a0)
    fit = fit_ols(t, ROLES)
    np.testing.assert_allclose(fit.coefficients, [a0, frac * a0], atol=1e-12)


def test_noisy_study():
    study = run_kepler_study(seed=3)
    assert study.fit.r_squared >= 0.999
    assert PUBLISHED_S / 1.5 < study.fit.s < PUBLISHED_S * 1.5
    assert study.identification.identified
    text = study.render_text()
    assert "synthetic" in text and "equispaced" in text and "R^2" in text
    d = study.to_dict()
    assert d["battery"]["adequate"] == study.adequate


def test_noiseless_study_reports_inapplicable_battery():
    study = run_kepler_study(noise_sd=0.0)
    assert study.battery is None and study.battery_note
    assert not study.adequate
    assert "not applicable" in study.render_text()


def test_user_data():
    theta = np.linspace(0, 2 * math.pi, 30, endpoint=False)
    r = 1 / (ALPHA0 + ALPHA1 * np.cos(theta)) * (1 + 1e-5 * np.random.default_rng(1).standard_normal(30))
    study = run_kepler_study(data=DataTable.from_columns({"theta": theta, "r": r}))
    assert not study.synthetic and study.fit.n == 30
    with pytest.raises(DataError):
        run_kepler_study(data=DataTable.from_columns({"theta": theta}))
