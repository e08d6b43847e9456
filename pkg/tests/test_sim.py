import csv

import numpy as np
import pytest

from sneakpath.sim import RESULT_HEADER, SimConfig, code_graph, run_trial, run_trials, simulate, sweep, \
    wilson_half_width, write_results

from conftest import table_profile


@pytest.fixture(scope="module")
def small():
    cfg = SimConfig(table_profile("table1-row1"), 32, 2, 60.0, trials=40, seed=5)
    return cfg, code_graph(cfg)


def test_config_validation(small):
    cfg, _ = small
    with pytest.raises(ValueError):
        cfg.with_(trials=0)
    with pytest.raises(ValueError):
        cfg.with_(mode="awgn")
    assert cfg.with_(sigma=70.0).params.sigma == 70.0


@pytest.mark.parametrize("mode", ["reram", "mixed"])
def test_low_noise_error_free(small, mode):
    cfg, g = small
    res = simulate(cfg.with_(sigma=1.0, mode=mode, trials=100), g)
    assert res.bit_errors == 0 and res.word_errors == 0
    assert res.ber_ci == pytest.approx(3 / (100 * g.k)) and res.wer_ci == pytest.approx(0.03)


def test_replay_and_batch_independence(small):
    cfg, g = small
    cfg = cfg.with_(sigma=80.0, mode="reram")
    res = simulate(cfg, g)
    again = simulate(cfg.with_(batch=7), g)
    assert np.array_equal(res.per_trial, again.per_trial)
    assert res.bit_errors > 0
    for i in (0, 13, 39):
        assert run_trial(cfg, i, g) == (int(res.per_trial[i]), bool(res.per_trial[i] > 0))
    assert np.array_equal(run_trials(cfg, [3, 4], g)[0], res.per_trial[3:5])


def test_parallel_matches_serial(small):
    cfg, g = small
    cfg = cfg.with_(sigma=80.0, mode="mixed")
    assert np.array_equal(simulate(cfg, g).per_trial, simulate(cfg, g, n_jobs=2).per_trial)


def test_forced_lambda(small):
    cfg, g = small
    zero = simulate(cfg.with_(mode="mixed", force_lambda=0.0, sigma=60.0, trials=50), g)
    assert zero.bit_errors == 0
    # far above the lambda=1 Shannon limit (about 48.9 at rate 1/2)
    one = simulate(cfg.with_(mode="mixed", force_lambda=1.0, sigma=90.0, trials=20), g)
    assert one.word_errors > 0


def test_genie_lambda_runs(small):
    cfg, g = small
    res = simulate(cfg.with_(lambda_source="genie", sigma=1.0, trials=10), g)
    assert res.word_errors == 0


def test_sweep_and_csv(small, tmp_path):
    cfg, _ = small
    assert sweep(cfg, [], ("reram", "mixed")) == []
    out = sweep(cfg.with_(trials=8), [1.0, 90.0], ("reram", "mixed"))
    assert [(r.sigma, r.mode) for r in out] == [(1.0, "reram"), (1.0, "mixed"), (90.0, "reram"), (90.0, "mixed")]
    assert out[2].ber >= out[0].ber
    write_results(tmp_path / "r.csv", out)
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[0] == RESULT_HEADER and len(rows) == 5
    write_results(tmp_path / "e.csv", [])
    assert list(csv.reader(open(tmp_path / "e.csv"))) == [RESULT_HEADER]


def test_wilson():
    assert wilson_half_width(0, 1000) == pytest.approx(0.003)
    # binomial oracle: p=0.5, n=100 Wilson bounds 0.4038, 0.5962
    assert wilson_half_width(50, 100) == pytest.approx(0.0962, abs=5e-4)
    assert wilson_half_width(5, 100) < wilson_half_width(50, 100)
