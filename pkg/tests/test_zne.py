import json
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaoa_lsc.engine import energy_expectation, ideal_distribution
from qaoa_lsc.noise import NoiseSpec
from qaoa_lsc.zne import (
    NonMonotoneWarning,
    is_monotone,
    propagate_std,
    richardson_coefficients,
    richardson_extrapolate,
    run_zne,
    zne_from_energies,
)


def lagrange_at_zero(scales):
    """Exact rational oracle for the Lagrange basis at zero."""
    s = [Fraction(x) for x in scales]
    out = []
    for i, si in enumerate(s):
        c = Fraction(1)
        for j, sj in enumerate(s):
            if j != i:
                c *= sj / (sj - si)
        out.append(c)
    return out


def test_coefficients_135():
    c = richardson_coefficients([1, 3, 5])
    assert c == pytest.approx([15 / 8, -5 / 4, 3 / 8], abs=1e-12)
    assert [float(x) for x in lagrange_at_zero([1, 3, 5])] == pytest.approx(c, abs=1e-15)
    assert c.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("scales", [[1, 2], [1, 1.5, 2, 3], [1, 3, 5, 7], [2, 4.5, 9]])
def test_coefficients_match_rational_oracle(scales):
    want = [float(x) for x in lagrange_at_zero(scales)]
    assert richardson_coefficients(scales) == pytest.approx(want, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_quadratic_exactness(a, b, c):
    pts = [(s, a + b * s + c * s * s) for s in (1.0, 3.0, 5.0)]
    value, _ = richardson_extrapolate(pts)
    assert value == pytest.approx(a, abs=1e-12 * (1 + abs(a) + abs(b) + 25 * abs(c)))


def test_two_point_linear():
    assert richardson_extrapolate([(1, 2.0), (3, 5.0)])[0] == pytest.approx((3 * 2.0 - 5.0) / 2)


def test_coefficient_errors():
    with pytest.raises(ValueError):
        richardson_coefficients([1, 1, 3])
    with pytest.raises(ValueError):
        richardson_coefficients([1])


def test_propagate_std():
    assert propagate_std([15 / 8, -5 / 4, 3 / 8], [1, 1, 1]) == pytest.approx(np.sqrt(334) / 8, abs=1e-12)
    assert np.sqrt(334) / 8 == pytest.approx(2.2845, abs=1e-4)
    assert propagate_std([1.2, -0.2], [0, 0]) == 0.0
    assert propagate_std([1.0], [0.37]) == 0.37
    with pytest.raises(ValueError):
        propagate_std([1, 2], [1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1, 20), min_size=2, max_size=5, unique=True), st.floats(0.01, 10))
def test_inflation_at_least_one(factors, s):
    if min(abs(a - b) for i, a in enumerate(factors) for b in factors[i + 1 :]) < 1e-3:
        return
    r = zne_from_energies(factors, [1.0 + f for f in factors], [s] * len(factors))
    assert r.inflation >= 1 - 1e-12


def test_monotone_detection():
    assert is_monotone([1, 3, 5], [1.0, 2.0, 3.0])
    assert is_monotone([5, 1, 3], [3.0, 1.0, 2.0])
    assert is_monotone([1, 3, 5], [3.0, 2.0, 2.0])
    assert not is_monotone([1, 3, 5], [1.0, 3.0, 2.0])
    with pytest.warns(NonMonotoneWarning):
        r = zne_from_energies([1, 3, 5], [-4.0, -2.0, -3.0])
    assert not r.monotone and r.warnings


def test_improvement_sign():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        toward = zne_from_energies([1, 3, 5], [-4.0, -3.0, -2.0], [0.1] * 3, ideal=-5.0)
    assert toward.extrapolated == pytest.approx(-4.5)
    assert toward.improvement_pct == pytest.approx(100 * (1.0 - 0.5) / 4.0)
    assert toward.inflation == pytest.approx(np.sqrt(334) / 8)

    overshoot = zne_from_energies([1, 3], [-4.0, -3.0], ideal=-4.2)
    assert overshoot.extrapolated == pytest.approx(-4.5)
    assert overshoot.improvement_pct < 0  # 0.3 away instead of 0.2
    assert overshoot.inflation is None

    no_ideal = zne_from_energies([1, 3], [-4.0, -3.0])
    assert no_ideal.improvement_pct == pytest.approx(12.5)


def test_run_zne_exact_moves_toward_ideal(six_var):
    g, b = 0.4, 0.3
    noise = NoiseSpec.depolarizing(1e-3, 5e-3)
    r = run_zne(g, b, six_var.sched, six_var.diag, noise)
    ideal = energy_expectation(ideal_distribution(g, b, six_var.diag), six_var.diag)
    assert r.ideal == pytest.approx(ideal, abs=1e-12)
    assert r.stds == [0.0, 0.0, 0.0] and r.extrapolated_std == 0.0
    assert abs(r.extrapolated - ideal) < abs(r.energies[0] - ideal)
    assert r.improvement_pct > 0 and r.monotone and not r.clamped
    assert sum(r.coefficients) == pytest.approx(1.0, abs=1e-12)


def test_run_zne_global_channel_exact(six_var):
    # energy is affine in the scaled global weight, so extrapolation is exact
    g, b = 0.4, 0.3
    r = run_zne(g, b, six_var.sched, six_var.diag, NoiseSpec(p_global=0.05))
    assert r.extrapolated == pytest.approx(r.ideal, abs=1e-9)


@pytest.mark.filterwarnings("ignore::qaoa_lsc.zne.NonMonotoneWarning")
def test_run_zne_zero_noise_sampled(six_var):
    r = run_zne(0.4, 0.3, six_var.sched, six_var.diag, NoiseSpec.ideal(), shots=20_000, seed=3)
    assert abs(r.extrapolated - r.ideal) <= 3 * r.extrapolated_std
    assert r.inflation == pytest.approx(np.sqrt(334) / 8, abs=0.05)
    again = run_zne(0.4, 0.3, six_var.sched, six_var.diag, NoiseSpec.ideal(), shots=20_000, seed=3)
    assert again.to_dict() == r.to_dict()
    assert len(set(r.energies)) == 3  # independent streams per factor


def test_run_zne_clamped_and_errors(six_var, tmp_path):
    with pytest.warns(UserWarning):
        r = run_zne(0.4, 0.3, six_var.sched, six_var.diag, NoiseSpec(p2=0.3))
    assert r.clamped and any("clamped" in w for w in r.warnings)
    with pytest.raises(ValueError):
        run_zne(0.4, 0.3, six_var.sched, six_var.diag, NoiseSpec(), factors=[1, 1])
    with pytest.raises(ValueError):
        run_zne(0.4, 0.3, six_var.sched, six_var.diag, NoiseSpec(), shots=0)
    r.save(tmp_path / "z.json")
    assert set(json.loads((tmp_path / "z.json").read_text())) >= {
        "factors", "energies", "stds", "extrapolated", "extrapolated_std",
        "coefficients", "improvement_pct", "inflation", "monotone",
    }
