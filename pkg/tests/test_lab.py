import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bolab.engine import AsymptoticSpectrum, second_order_bound
from bolab.errors import ConfigError
from bolab.field import Grid1D, SampledField
from bolab.lab import (
    ErrorCurve,
    SpectralLaw,
    dyn_error,
    dyn_error_factored,
    fit_centers_heuristic,
    fit_decay,
    gap_check,
    measure_interaction_error,
    minimax_bound,
    radiation_experiment,
    tail_certificate,
    tail_error,
)

LAW = SpectralLaw(1.0, 1.0, 2.0)


def test_law_validation():
    with pytest.raises(ConfigError):
        SpectralLaw(alpha=1.0)
    with pytest.raises(ConfigError):
        SpectralLaw(C1=0.0)
    np.testing.assert_allclose(LAW.lambdas(3), [-1, -0.25, -1 / 9])
    assert LAW.schedule(1e10) == pytest.approx(10.0)


def test_tail_error():
    assert tail_error(LAW, 0) == pytest.approx(4 * math.pi**2 / 6, rel=1e-14)
    direct = 4 * sum(k**-2.0 for k in range(11, 2_000_001)) + 4 / 2_000_000
    assert tail_error(LAW, 10) == pytest.approx(direct, rel=1e-10)
    assert tail_error(LAW, 10) <= tail_certificate(LAW, 10) == pytest.approx(0.4)
    assert tail_error([-1, -0.5, -0.25], 1) == pytest.approx(3.0)
    assert tail_error([-1, -0.5], 2) == 0
    with pytest.raises(ConfigError):
        tail_error(LAW, -1)


def test_dyn_error_examples():
    assert dyn_error([-1.0]) == 0
    lam = [-1.0, -0.25]
    expect = sum(abs(lam[k]) / ((lam[j] - lam[l]) ** 2 * abs(lam[k] - lam[l]))
                 for j in range(2) for k in range(2) for l in range(2) if j != l and k != l)
    assert dyn_error(lam) == pytest.approx(expect)
    assert dyn_error(lam) == pytest.approx(second_order_bound(AsymptoticSpectrum(lam), t=1.0))
    assert dyn_error(lam) == pytest.approx(80 / 27)
    with pytest.raises(ConfigError):
        dyn_error([-1.0, -1.0])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.01, 10), min_size=2, max_size=12, unique=True))
def test_dyn_two_paths(vals):
    lam = -np.sort(vals)[::-1]
    if np.min(np.diff(np.sort(lam))) < 1e-6:
        return
    assert dyn_error_factored(lam) == pytest.approx(dyn_error(lam), rel=1e-12)


def test_dyn_law_two_paths():
    assert dyn_error_factored(LAW.lambdas(50)) == pytest.approx(dyn_error(LAW.lambdas(50)), rel=1e-12)


def test_minimax_bound():
    t = np.geomspace(1e6, 1e12, 13)
    res = [minimax_bound(LAW, s) for s in t]
    bounds = np.array([b for _, b in res])
    assert np.all(np.diff(bounds) <= 0)
    slope = np.polyfit(np.log(t), np.log(bounds), 1)[0]
    assert slope == pytest.approx(-0.1, abs=0.02)
    nstar = np.array([n for n, _ in res])
    ratio = nstar / t**0.1
    assert np.all((ratio >= 1 / 3) & (ratio <= 3))
    lam = [-1.0, -0.25, -0.1]
    b = [minimax_bound(lam, s)[1] for s in (1.0, 10.0, 100.0, 1e4)]
    assert np.all(np.diff(b) <= 0)
    assert minimax_bound([], 1.0) == (0, 0.0)
    with pytest.raises(ConfigError):
        minimax_bound(LAW, 0.0)


def test_gap_check():
    ok, worst = gap_check(LAW.lambdas(500), 1.0, 1.0, 2.0)
    assert ok and worst == (499, 500)
    ok, worst = gap_check([-1.0, -1.0 + 1e-9], 1.0, 1.0, 2.0)
    assert not ok and worst == (1, 2)
    assert gap_check([-0.5], 1.0, 1.0, 2.0) == (True, None)
    assert not gap_check([-2.0, -0.1], 1.0, 0.1, 2.0)[0]
    with pytest.raises(ConfigError):
        gap_check([], 1.0, 1.0, 2.0)


def test_interaction_error_single_soliton_is_zero():
    curve = measure_interaction_error(AsymptoticSpectrum([-0.5]), [1.0, 10.0])
    np.testing.assert_array_equal(curve.errors, 0)


def test_interaction_error_two_solitons():
    spec = AsymptoticSpectrum([-1.0, -0.25])
    curve = measure_interaction_error(spec, [1e2, 1e3, 1e4])
    assert np.all(np.diff(curve.errors) < 0)
    fit = fit_decay(curve)
    assert -1.2 <= fit.slope <= -0.8
    l2 = measure_interaction_error(spec, [1e2, 1e3, 1e4], kind="L2")
    assert np.all(np.diff(l2.errors) < 0)
    with pytest.raises(ConfigError):
        measure_interaction_error(spec, [1.0], kind="H1")


def test_interaction_error_with_grid():
    g = Grid1D.centered(300.0, 4096)
    spec = AsymptoticSpectrum([-1.0, -0.25], centers=[-200.0, 0.0])
    a = measure_interaction_error(spec, [100.0], g)
    b = measure_interaction_error(spec, [100.0])
    assert a.errors[0] == pytest.approx(b.errors[0], rel=0.05)


def test_fit_decay():
    t = np.geomspace(1, 1e4, 9)
    f = fit_decay(ErrorCurve(t, t**-0.5))
    assert f.slope == pytest.approx(-0.5) and f.r_squared == pytest.approx(1.0)
    assert fit_decay(ErrorCurve(t, 7 * t**-0.1)).slope == pytest.approx(-0.1)
    with pytest.raises(ConfigError):
        fit_decay(ErrorCurve(t[:2], t[:2]))
    with pytest.raises(ConfigError):
        fit_decay(ErrorCurve(t, 0 * t))
    with pytest.raises(ConfigError):
        ErrorCurve([2.0, 1.0], [1.0, 1.0])
    with pytest.raises(ConfigError):
        ErrorCurve([1.0, 2.0], [-1.0, 1.0])


def test_radiation_experiment_refusals_and_zero():
    g = Grid1D.centered(200.0, 4096)
    sol = SampledField(g, 2 / (g.x**2 + 1))
    with pytest.raises(ConfigError, match="bound state"):
        radiation_experiment(sol, [1.0])
    zero = radiation_experiment(SampledField(g, np.zeros(g.n)), [1.0, 2.0])
    np.testing.assert_array_equal(zero.l2.errors, 0)
    with pytest.raises(ConfigError):
        radiation_experiment(sol, [2.0, 1.0])


def test_radiation_experiment_short_run():
    g = Grid1D.centered(200.0, 4096)
    u0 = SampledField(g, 0.05 * np.exp(-((g.x / 4) ** 2)))
    res = radiation_experiment(u0, [1.0, 2.0, 4.0])
    assert np.all(res.l2.errors > 0) and np.all(res.l2.errors < 0.05)
    assert res.edge_fraction < 1e-3 and res.final_bound_states == 0


def test_fit_centers_heuristic():
    g = Grid1D.centered(200.0, 4096)
    spec = AsymptoticSpectrum([-1.0, -0.25], centers=[3.0, -2.0])
    from bolab.engine import soliton_sum

    u = SampledField(g, soliton_sum(spec, 60.0, g.x))
    fit = fit_centers_heuristic(u, spec.lambdas, 60.0)
    np.testing.assert_allclose(fit.centers, spec.centers, atol=1e-6)
