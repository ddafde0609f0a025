import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latticeweak.decay_models import (HBAR_GEV_S, PHYSICAL, EnsembleConfig, delta_width_1p1,
                                      early_time_exponent, ensemble_persistence, exponential_fit,
                                      exponential_window, golden_rule_rate, neutron_width,
                                      phase_space_fprime, sample_hamiltonian, _rng)


def fprime_longdouble(y):
    y = np.longdouble(y)
    s = np.sqrt(1 - y * y)
    return s * (1 - np.longdouble(4.5) * y * y - 4 * y ** 4) - np.longdouble(7.5) * y ** 4 * np.log(y / (s + 1))


def test_fprime_endpoints():
    assert phase_space_fprime(0.0) == 1.0
    assert phase_space_fprime(1.0) == 0.0


def test_fprime_midpoint_extended_precision():
    assert phase_space_fprime(0.5) == pytest.approx(float(fprime_longdouble(0.5)), rel=1e-14)
    assert phase_space_fprime(0.5) == pytest.approx(0.29256, abs=1e-5)


@given(st.floats(0, 1), st.floats(0, 1))
def test_fprime_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert phase_space_fprime(lo) >= phase_space_fprime(hi) - 1e-15


def test_fprime_vectorized_and_domain():
    ys = np.linspace(0, 1, 11)
    vals = phase_space_fprime(ys)
    assert vals.shape == (11,) and np.all(np.diff(vals) <= 0)
    for bad in (-0.1, 1.1, float("nan")):
        with pytest.raises(ValueError):
            phase_space_fprime(bad)


def test_neutron_width():
    w = neutron_width(**PHYSICAL)
    assert w > 0 and math.isfinite(w)
    # leading-order lifetime sits within about ten percent of the measured 879 s
    assert 800 < HBAR_GEV_S / w < 1100
    doubled = neutron_width(**{**PHYSICAL, "G_F": 2 * PHYSICAL["G_F"]})
    assert doubled == pytest.approx(4 * w, rel=1e-14)
    massless = neutron_width(**{**PHYSICAL, "m_e": 0.0})
    delta = PHYSICAL["M_n"] - PHYSICAL["M_p"]
    ref = (PHYSICAL["G_F"] ** 2 * PHYSICAL["V_ud"] ** 2 * delta ** 5 / (60 * math.pi ** 3)
           * (1 + 3 * PHYSICAL["g_A"] ** 2))
    assert massless == pytest.approx(ref, rel=1e-14)
    with pytest.raises(ValueError):
        neutron_width(**{**PHYSICAL, "M_p": PHYSICAL["M_n"]})


@given(st.floats(0.01, 5), st.floats(0.01, 5), st.floats(0.01, 5))
def test_delta_width_scaling(G, gV, Q):
    w = delta_width_1p1(G, gV, Q)
    assert delta_width_1p1(G, gV, 2 * Q) == pytest.approx(2 * w)
    assert delta_width_1p1(2 * G, gV, Q) == pytest.approx(4 * w)


def test_delta_width_values():
    assert delta_width_1p1(1, 1, 1) == 3 / (2 * math.pi)
    assert delta_width_1p1(0, 1, 1) == 0
    with pytest.raises(ValueError):
        delta_width_1p1(1, 1, 0)


# -- ensemble -------------------------------------------------------------------------

SMALL = dict(samples=40, n_times=201, t_max=20.0)


def test_sampled_hamiltonian_structure():
    cfg = EnsembleConfig(y_f=30)
    H = sample_hamiltonian(cfg, _rng(cfg))
    n0 = cfg.n_initial
    assert np.allclose(H, H.T)
    assert np.count_nonzero(H[:n0, :n0] - np.diag(np.diag(H[:n0, :n0]))) == 0
    assert np.count_nonzero(H[n0:, n0:] - np.diag(np.diag(H[n0:, n0:]))) == 0
    assert np.all(np.abs(H[:n0, n0:]) <= cfg.w_f)
    assert np.all(np.diff(np.diag(H)[:n0]) >= 0)


@given(st.integers(1, 60), st.integers(0, 1000))
def test_persistence_bounds(y_f, seed):
    res = ensemble_persistence(EnsembleConfig(y_f=y_f, seed=seed, samples=5, n_times=41, t_max=10.0))
    assert res.persistence[0] == 1.0
    assert np.all(res.persistence >= 0) and np.all(res.persistence <= 1 + 1e-12)
    assert 0 < res.plateau <= 1


def test_decoupled_persistence_is_one():
    res = ensemble_persistence(EnsembleConfig(y_f=50, coupling_scale=0.0, **SMALL))
    assert np.all(res.persistence == 1.0)


def test_ensemble_deterministic():
    a = ensemble_persistence(EnsembleConfig(y_f=50, **SMALL))
    b = ensemble_persistence(EnsembleConfig(y_f=50, **SMALL))
    c = ensemble_persistence(EnsembleConfig(y_f=50, seed=2, **SMALL))
    assert np.array_equal(a.persistence, b.persistence)
    assert not np.array_equal(a.persistence, c.persistence)


def test_early_time_quadratic():
    cfg = EnsembleConfig(y_f=100, samples=100, t_max=0.2, n_times=41)
    res = ensemble_persistence(cfg)
    assert early_time_exponent(res.times, res.persistence, 0.01, 0.2) == pytest.approx(2.0, abs=0.1)


def test_fit_helpers_on_synthetic_curve():
    t = np.linspace(0, 20, 201)
    P = 0.8 * np.exp(-0.3 * t) + 0.2 * (1 - np.exp(-5 * t))
    window = exponential_window(t, np.exp(-0.3 * t), 0.05)
    fit = exponential_fit(t, np.exp(-0.3 * t), window)
    assert fit["rate"] == pytest.approx(0.3, rel=1e-8) and fit["r2"] == pytest.approx(1.0)
    assert window[0] == pytest.approx(0.2) and window[1] == pytest.approx(8.7)
    with pytest.raises(ValueError):
        exponential_window(t, np.ones_like(t), 0.5)
    with pytest.raises(ValueError):
        early_time_exponent(t, P, 0.0, 0.05)


def test_golden_rule_rate_independent_of_yf():
    rates = {golden_rule_rate(EnsembleConfig(y_f=y)) for y in (20, 50, 400)}
    assert max(rates) - min(rates) < 1e-15


def test_config_validation():
    for bad in (dict(y_f=0), dict(initial_rank=11), dict(initial_range=(1, 0)), dict(samples=0),
                dict(coupling_scale=-1), dict(y_f=2.5)):
        with pytest.raises(ValueError):
            EnsembleConfig(**bad)
    cfg = EnsembleConfig()
    assert cfg.to_dict()["y_f"] == 400 and len(cfg.times()) == cfg.n_times


@pytest.mark.parametrize("y", [5e-324, 1e-310, 1e-160])
def test_fprime_finite_for_tiny_y(y):
    assert phase_space_fprime(y) == 1.0
