from math import exp, log, log10, sqrt

import pytest
from hypothesis import given
from hypothesis import strategies as st

from growthcodes.errors import NoInteriorMinimumError
from growthcodes.jscc import (
    ChannelConfig,
    VideoModelParams,
    allocate,
    default_params,
    distortion_curve,
    end_to_end_distortion,
    minimum_distortion,
    mismatch_eval,
    optimal_rate_unconstrained,
    psnr,
)
from growthcodes.model import GROWTH, R_SOLITON_SIGNFIX, IdealCode

CAPACITY = 15e6


def golden_min(f, lo, hi, tol=1e-12):
    g = (sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * (abs(a) + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


params_st = st.builds(
    VideoModelParams,
    alpha=st.floats(1e2, 1e6),
    beta=st.floats(0.1, 2.0),
    a=st.floats(0.1, 10.0),
    b=st.floats(1.0, 1e4),
    n_s=st.floats(10, 5000),
    l_p=st.integers(50, 1500),
)


@given(params_st, st.floats(1e-4, 0.9))
def test_distortion_is_convex(p, pl):
    r0 = optimal_rate_unconstrained(p, pl)
    for r in (r0 * s for s in (0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0)):
        h = 1e-3 * r
        d2 = (end_to_end_distortion(p, r + h, pl) - 2 * end_to_end_distortion(p, r, pl)
              + end_to_end_distortion(p, r - h, pl)) / (h * h)
        assert d2 > 0


@given(params_st, st.floats(1e-4, 0.9))
def test_closed_form_rate_is_the_minimizer(p, pl):
    r0 = optimal_rate_unconstrained(p, pl)
    # search in log-rate so the bracket spans many decades
    x = golden_min(lambda x: end_to_end_distortion(p, exp(x), pl), log(r0) - 8, log(r0) + 8)
    assert exp(x) == pytest.approx(r0, rel=1e-3)
    assert minimum_distortion(p, pl) == pytest.approx(end_to_end_distortion(p, r0, pl), rel=1e-9)


def test_no_interior_minimum_without_loss():
    with pytest.raises(NoInteriorMinimumError):
        optimal_rate_unconstrained(default_params(), 0.0)


def test_default_params_load():
    p = default_params()
    assert p.label == "foreman-cif-default"
    assert p.loss_scale == 2 * p.a * p.n_s * 8 * p.l_p


def test_params_validation():
    with pytest.raises(ValueError):
        VideoModelParams(alpha=-1, beta=1, a=1, b=1, n_s=1, l_p=1)
    with pytest.raises(ValueError):
        ChannelConfig(0.0, 0.1)
    with pytest.raises(ValueError):
        ChannelConfig(1e6, 1.0)


def test_psnr():
    assert psnr(255.0**2) == 0.0
    assert psnr(1.0) == pytest.approx(20 * log10(255))


def test_allocation_respects_capacity():
    p = default_params()
    for target in (0.05, 0.1, 0.15, 0.2):
        a = allocate(p, GROWTH, ChannelConfig(CAPACITY, target))
        assert (1 + a.epsilon) * a.r_star <= CAPACITY * (1 + 1e-12)
        if a.constrained:
            assert a.r_star == pytest.approx(CAPACITY / (1 + a.epsilon))
        else:
            assert a.r_star == pytest.approx(optimal_rate_unconstrained(p, target))
        assert a.d_star == pytest.approx(end_to_end_distortion(p, a.r_star, target))


def test_shipped_calibration_binds_at_five_percent():
    a = allocate(default_params(), GROWTH, ChannelConfig(CAPACITY, 0.05))
    assert a.constrained
    assert a.channel_eta == pytest.approx(a.eta)


def test_mismatch_without_loss_hits_target():
    p = default_params()
    ch = ChannelConfig(CAPACITY, 0.05)
    plan = allocate(p, GROWTH, ch)
    r = mismatch_eval(p, GROWTH, ch, plan)
    assert r.realized_pl == pytest.approx(0.05, rel=1e-12)


@given(st.floats(0.0, 0.29), st.floats(0.001, 0.01))
def test_mismatch_degrades_with_loss(pi, dpi):
    p = default_params()
    plan = allocate(p, GROWTH, ChannelConfig(CAPACITY, 0.05))
    lo = mismatch_eval(p, GROWTH, ChannelConfig(CAPACITY, 0.05, pi), plan)
    hi = mismatch_eval(p, GROWTH, ChannelConfig(CAPACITY, 0.05, pi + dpi), plan)
    assert hi.realized_pl > lo.realized_pl
    assert hi.psnr < lo.psnr


def test_planned_only_mode_uses_eta():
    p = default_params()
    ch = ChannelConfig(CAPACITY, 0.2, 0.1)
    plan = allocate(p, GROWTH, ch)
    r = mismatch_eval(p, GROWTH, ch, plan, fill_capacity=False)
    assert r.eta == pytest.approx(plan.eta * 0.9)


def test_distortion_curve_ordering():
    p = default_params()
    grid = [0.3 + 0.05 * i for i in range(13)]
    rows = {
        m.label: distortion_curve(p, m, grid, CAPACITY)
        for m in (IdealCode(), GROWTH, R_SOLITON_SIGNFIX)
    }
    for i in range(len(grid)):
        assert rows["ideal"][i][3] >= rows["growth"][i][3] >= rows["r-soliton-signfix"][i][3]


def test_distortion_curve_caps_rate():
    rows = distortion_curve(default_params(), IdealCode(), [0.5, 1.0, 1.5], CAPACITY)
    assert all(r[2] <= CAPACITY for r in rows)
    assert rows[-1][1] == 0.0 and rows[-1][2] == CAPACITY
