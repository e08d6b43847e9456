import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.base import clone

from sneakpath.channel import (
    HRS, LRS, SP, ChannelParams, SneakPathLLR, apply_sneak_paths, cell_llr,
    effective_hrs_resistance, estimate_sp_rate, hard_decisions, llr_moment_model, read_array,
)

P = ChannelParams()


def test_effective_resistance():
    assert effective_hrs_resistance(1000, 250) == pytest.approx(200.0)
    assert effective_hrs_resistance(70.0, 70.0) == pytest.approx(35.0)
    # mpmath: 999.999000000999999...
    assert effective_hrs_resistance(1000, 1e9) == pytest.approx(999.999000001, rel=1e-12)
    with pytest.raises(ValueError):
        effective_hrs_resistance(0, 250)


def test_params_validation():
    assert P.r0_prime == pytest.approx(200.0)
    with pytest.raises(ValueError):
        ChannelParams(sigma=0)
    with pytest.raises(ValueError):
        ChannelParams(r0=100, r1=1000)


def test_fig1_sneak_path():
    x = np.zeros((4, 4), dtype=int)
    x[0, 1] = x[0, 3] = x[2, 3] = 1  # 1-based (1,2), (1,4), (3,4)
    mask = apply_sneak_paths(x, [(0, 3)])
    assert mask[2, 1]
    assert mask.sum() == np.count_nonzero(np.outer(x[:, 3], x[0, :]) & (x == 0))


def test_sneak_path_edge_cases(rng):
    x = rng.integers(0, 2, (8, 8))
    assert not apply_sneak_paths(x, np.empty((0, 2))).any()
    ones = np.ones((5, 5), dtype=int)
    assert not apply_sneak_paths(ones, [(1, 1), (2, 3)]).any()
    x[0, 0] = 0
    with pytest.raises(ValueError):
        apply_sneak_paths(x, [(0, 0)])
    with pytest.raises(ValueError):
        apply_sneak_paths(np.zeros((3, 4)), [])


@settings(max_examples=50, deadline=None)
@given(arrays(np.int8, (6, 6), elements=st.integers(0, 1)), st.data())
def test_sneak_path_mask_properties(x, data):
    ones = np.argwhere(x == 1)
    if len(ones) == 0:
        return
    idx = data.draw(st.lists(st.integers(0, len(ones) - 1), unique=True, max_size=4))
    sfs = ones[idx]
    mask = apply_sneak_paths(x, sfs)
    assert not (mask & (x == 1)).any()
    # adding SFs can only add SP cells
    if len(sfs) > 1:
        assert not (apply_sneak_paths(x, sfs[:-1]) & ~mask).any()


def test_read_array_levels_and_determinism():
    x = np.array([[1, 0], [1, 1]])
    y = read_array(x, [(1, 0)], P.with_sigma(1e-12), np.random.default_rng(0))
    np.testing.assert_allclose(y, [[100, 200], [100, 100]], atol=1e-6)
    a = read_array(x, [], P, np.random.default_rng(5))
    b = read_array(x, [], P, np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_cell_llr_values():
    # mpmath oracles at 30 digits
    assert cell_llr(100.0, 0.5, 0.5, P) == pytest.approx(-6.24870273611550086, rel=1e-12)
    assert cell_llr(420.0, 0.3, 0.4, P.with_sigma(40)) == pytest.approx(16.0764923037822284, rel=1e-12)
    assert cell_llr(150.0, 1.0, 0.5, P) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(-500, 1500), st.floats(0.01, 0.99), st.floats(5, 120))
def test_cell_llr_lambda_one_is_single_gaussian(y, q, sigma):
    p = P.with_sigma(sigma)
    expect = np.log((1 - q) / q) + (p.r0_prime - p.r1) * (2 * y - p.r0_prime - p.r1) / (2 * sigma ** 2)
    assert cell_llr(y, 1.0, q, p) == pytest.approx(expect, rel=1e-9, abs=1e-9)


def test_cell_llr_domain():
    with pytest.raises(ValueError):
        cell_llr(100.0, 1.5, 0.5, P)
    with pytest.raises(ValueError):
        cell_llr(100.0, 0.5, 1.0, P)


def test_hard_decision_ties_go_low():
    assert hard_decisions([150.0, 600.0, 150.1, 600.1], P).tolist() == [0, 1, 1, 2]


def test_estimate_sp_rate():
    y = np.array([200.0] * 10 + [1000.0] * 30 + [100.0] * 7)
    assert estimate_sp_rate(y, P) == pytest.approx(0.25)
    assert estimate_sp_rate(np.full((4, 4), 100.0), P) == 0.0


def test_estimate_sp_rate_separable_array(rng):
    levels = np.array([200.0] * 5 + [1000.0] * 45 + [100.0] * 50)
    y = levels + rng.normal(0, 30, levels.size).clip(-45, 45)  # stays inside decision bands
    assert estimate_sp_rate(y.reshape(10, 10), P) == pytest.approx(0.1)


def test_llr_moment_model():
    p = P.with_sigma(50)
    m, v = llr_moment_model(SP, 0.5, 0.5, p)
    assert m == pytest.approx(2 - np.log(2)) and v == pytest.approx(4.0)
    m, v = llr_moment_model(HRS, 0.5, 0.5, p)
    assert m == pytest.approx(162 + np.log(0.5)) and v == pytest.approx(324.0)
    assert llr_moment_model(LRS, 0.3, 0.5, p)[1] == llr_moment_model(SP, 0.3, 0.5, p)[1]
    for lam in (0.0, 1.0):
        with pytest.raises(ValueError):
            llr_moment_model(SP, lam, 0.5, p)


def test_transformer(rng):
    x = rng.integers(0, 2, (16, 16))
    y = read_array(x, [], P, rng)
    est = SneakPathLLR(sigma=30.0).fit(y)
    assert est.sp_rate_ == estimate_sp_rate(y, P)
    out = est.transform(y)
    assert out.shape == y.shape
    assert np.array_equal(out > 0, x == 0)
    fixed = clone(SneakPathLLR(sp_rate=0.2)).fit(y)
    assert fixed.sp_rate_ == 0.2
    assert SneakPathLLR().get_params()["q"] == 0.5
