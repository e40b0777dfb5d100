from math import exp, factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from growthcodes import analysis
from growthcodes.analysis import (
    RecoveryCurve,
    initial_state,
    integrate,
    read_curve_csv,
    recovery_curve,
    recovery_probability,
    write_curve_csv,
    write_trajectory_csv,
)
from growthcodes.errors import NumericalInstabilityError
from growthcodes.fountain import DegreeDistribution, GrowthSchedule, growth_distribution

GRID = [round(0.1 + 0.05 * i, 10) for i in range(39)]


def bp_fixed_point(code, eta):
    """Asymptotic erasure fixed point ``x = exp(-m rho(1 - x))`` iterated from 1."""
    om = code.distribution_at(eta * code.k).as_array()
    d = np.arange(1, len(om) + 1)
    mean = float(d @ om)
    m = eta * mean
    x = 1.0
    for _ in range(10**6):
        z = 1.0 - x
        xn = exp(-m * float((d * om * z ** (d - 1)).sum()) / mean)
        if abs(xn - x) < 1e-15:
            break
        x = xn
    return 1.0 - x


@pytest.fixture(scope="module")
def schedule():
    return GrowthSchedule(1000)


def test_degree_one_initial_state():
    s = initial_state(DegreeDistribution.point(1000, 1), 0.5)
    assert s.c[1] == pytest.approx(0.5)
    assert np.all(s.c[2:] == 0)
    assert s.edges == pytest.approx(0.5, abs=1e-10)


def test_initial_variable_side_is_poisson():
    om = growth_distribution(1000)
    s = initial_state(om, 1.0)
    m = om.mean_degree
    for i in range(11):
        assert s.v[i] == pytest.approx(exp(-m) * m**i / factorial(i), abs=1e-9)
    assert s.isolated == pytest.approx(exp(-m))


@given(st.floats(0.05, 3.0))
def test_edge_counts_agree(eta):
    for code in (growth_distribution(1000), GrowthSchedule(1000)):
        s = initial_state(code, eta)
        assert s.edges == pytest.approx(s.check_edges, abs=1e-6)


def test_initial_state_rejects_nonpositive_eta():
    with pytest.raises(ValueError):
        initial_state(growth_distribution(10), 0.0)


@pytest.mark.parametrize("eta", [0.3, 1.0, 2.5])
def test_degree_one_code_is_coupon_collector(eta):
    p = recovery_probability(DegreeDistribution.point(1000, 1), eta)
    assert p == pytest.approx(1 - exp(-eta), abs=1e-3)


@pytest.mark.parametrize("eta", [0.25, 0.5, 0.9, 1.3, 1.8])
@pytest.mark.parametrize(
    "code",
    [growth_distribution(1000), GrowthSchedule(1000), DegreeDistribution(1000, (0.3, 0.5, 0.2))],
    ids=["static", "schedule", "mixed"],
)
def test_ode_matches_bp_fixed_point(code, eta):
    assert recovery_probability(code, eta) == pytest.approx(bp_fixed_point(code, eta), abs=1e-4)


def test_trajectory_is_monotone_and_halts(schedule):
    for eta in (0.5, 0.75, 1.0, 1.5):
        tr = integrate(initial_state(schedule, eta))
        assert np.all(np.diff(tr.v0) >= -1e-12)
        assert tr.halt_reason in ("ripple-exhausted", "all-edges-removed")
        # one decoding step recovers one symbol
        assert tr.p_d == pytest.approx(tr.tau[-1], abs=1e-6)


def test_curve_monotone_and_below_ideal(schedule):
    curve = recovery_curve(schedule, GRID)
    assert np.all(np.diff(curve.p_d) >= -1e-9)
    assert np.all(curve.p_d <= np.minimum(curve.eta, 1.0) + 1e-9)


def test_schedule_near_full_recovery_at_1_5(schedule):
    assert recovery_probability(schedule, 1.5) == pytest.approx(0.96, abs=0.02)


def test_step_halving_is_stable(schedule):
    a = recovery_curve(schedule, GRID, step=1e-3).p_d
    b = recovery_curve(schedule, GRID, step=5e-4).p_d
    assert np.max(np.abs(a - b)) < 1e-4


def test_zero_eta_gives_zero():
    assert recovery_probability(growth_distribution(100), 0.0) == 0.0


def test_divergence_reports_tau(monkeypatch):
    monkeypatch.setattr(analysis, "_rhs", lambda y, nv: np.full_like(y, 1e6))
    with pytest.raises(NumericalInstabilityError) as info:
        integrate(initial_state(growth_distribution(100), 1.0))
    assert info.value.tau == pytest.approx(1e-3)


def test_curve_errors_carry_eta(monkeypatch):
    monkeypatch.setattr(analysis, "_rhs", lambda y, nv: np.full_like(y, np.nan))
    with pytest.raises(NumericalInstabilityError) as info:
        recovery_curve(growth_distribution(100), [0.4, 0.8])
    assert info.value.eta == 0.4


def test_bad_grids():
    with pytest.raises(ValueError):
        recovery_curve(growth_distribution(10), [])
    with pytest.raises(ValueError):
        recovery_curve(growth_distribution(10), [0.5, 0.4])
    with pytest.raises(ValueError):
        integrate(initial_state(growth_distribution(10), 1.0), step=0)


def test_csv_round_trip(tmp_path, schedule):
    curve = recovery_curve(schedule, [0.5, 1.0])
    path = tmp_path / "c.csv"
    write_curve_csv(curve, path, comment="hello")
    back = read_curve_csv(path)
    np.testing.assert_allclose(back.p_d, curve.p_d, rtol=1e-8)
    tr = integrate(initial_state(schedule, 1.0))
    write_trajectory_csv(tr, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0].startswith("tau,v_0,c_1")
    assert len(lines) == len(tr) + 1


def test_recovery_curve_validates():
    with pytest.raises(ValueError):
        RecoveryCurve([0.1, 0.2], [0.5])
    with pytest.raises(ValueError):
        RecoveryCurve([0.1], [1.5])
