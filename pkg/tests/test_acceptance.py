"""Acceptance criteria; each test prints one PASS/FAIL line before asserting.

Run with ``pytest tests/test_acceptance.py -s`` (lines are printed even without ``-s``).
"""
import time

import numpy as np
import pytest

from sneakpath.bound import BoundQuery, ppv_bound, q_function
from sneakpath.capacity import LambdaChannel, appendix_a_check, appendix_b_check, capacity_approx, \
    capacity_exact, dispersion_approx, dispersion_exact, shannon_limit_sigma
from sneakpath.channel import HRS, LRS, SP, ChannelParams, cell_llr, llr_moment_model
from sneakpath.de import check_output_means, decoding_threshold, phi, phi_inv
from sneakpath.ira import build_graph, encode, syndrome
from sneakpath.optimize import SearchSpec, solve_last_two
from sneakpath.sim import SimConfig, simulate
from sneakpath.spstats import design_lambda, gaussian_model, sample_sp_rates, sp_rate_mean, sp_rate_variance
from sneakpath.tables import TABLE1

from conftest import table_profile

ROWS = list(TABLE1)
CRIT8_SIGMAS = (66.0, 68.0)
CRIT8_TRIALS = 2000


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, detail
    return emit


def test_criterion_01_design_lambda(report):
    t0 = time.perf_counter()
    got = {k: round(design_lambda(128, k, 0.5), 4) for k in (2, 5, 1)}
    want = {2: 0.5338, 5: 0.8306, 1: 0.3398}
    dt = time.perf_counter() - t0
    report("1 design lambda", got == want and dt < 1, f"{got} vs {want}, {dt:.2f}s")


def test_criterion_02_degree_solve(report):
    t0 = time.perf_counter()
    worst = 0.0
    for name in ROWS:
        row = TABLE1[name]
        a = solve_last_two(SearchSpec(row.rate, row.dc, row.lam), [row.degrees[3]])
        worst = max(worst, abs(a[1] - row.degrees[10]), abs(a[2] - row.degrees[36]))
    dt = time.perf_counter() - t0
    report("2 degree solve", worst <= 1e-4 and dt < 1, f"max deviation {worst:.2e}, {dt:.2f}s")


def test_criterion_03_shannon_limits(report):
    t0 = time.perf_counter()
    got = [shannon_limit_sigma(TABLE1[n].rate, TABLE1[n].lam) for n in ROWS]
    want = [TABLE1[n].sigma_star for n in ROWS]
    dt = time.perf_counter() - t0
    ok = all(abs(g - w) <= 1 for g, w in zip(got, want)) and dt < 10
    report("3 Shannon limits", ok, f"{np.round(got, 2).tolist()} vs {want} (+-1), {dt:.1f}s")


def test_criterion_04_de_thresholds(report):
    t0 = time.perf_counter()
    got = [decoding_threshold(table_profile(n), TABLE1[n].lam, check_mean="paper-literal") for n in ROWS]
    want = [TABLE1[n].sigma_th for n in ROWS]
    dt = time.perf_counter() - t0
    ok = all(abs(g - w) <= 2 for g, w in zip(got, want)) and dt < 300
    report("4 DE thresholds", ok, f"{got} vs {want} (+-2), {dt:.1f}s")


def test_criterion_05_capacity_approximation(report):
    t0 = time.perf_counter()
    dc = dv = 0.0
    for lam in np.round(np.arange(0.1, 0.91, 0.1), 2):
        for sigma in (10, 20, 30, 40, 50):
            ch = LambdaChannel(float(lam), 0.5, ChannelParams(sigma=sigma))
            dc = max(dc, abs(capacity_exact(ch) - capacity_approx(ch)))
            dv = max(dv, abs(dispersion_exact(ch) - dispersion_approx(ch)))
    dt = time.perf_counter() - t0
    ok = dc <= 5e-3 and dv <= 1e-2 and dt < 120
    report("5 capacity approximation", ok, f"max |dC|={dc:.2e}, max |dV|={dv:.2e}, {dt:.1f}s")


@pytest.mark.slow
def test_criterion_06_sp_rate_statistics(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(606)
    lines, ok = [], True
    for n in (32, 128):
        for k in (1, 2, 5):
            s, _ = sample_sp_rates(n, k, 0.5, 100_000, rng)
            mean, var = sp_rate_mean(n, k, 0.5), sp_rate_variance(n, k, 0.5)
            se_mean = s.std(ddof=1) / np.sqrt(len(s))
            c = s - s.mean()
            se_var = np.sqrt((np.mean(c ** 4) - s.var() ** 2) / len(s))
            z_m, z_v = (s.mean() - mean) / se_mean, (s.var(ddof=1) - var) / se_var
            ks = gaussian_model(n, k, 0.5).ks_distance(s)
            good = abs(z_m) <= 3 and abs(z_v) <= 3 and ks <= 0.05
            ok &= good
            lines.append(f"N={n} K={k}: z_mean={z_m:+.1f} z_var={z_v:+.1f} KS={ks:.3f}{'' if good else ' x'}")
    dt = time.perf_counter() - t0
    report("6 SP-rate statistics", ok and dt < 600, "; ".join(lines) + f"; {dt:.0f}s")


def test_criterion_07_llr_gaussianity(report):
    p = ChannelParams(sigma=50.0)
    rng = np.random.default_rng(707)
    worst = 0.0
    for kind, level, sign in ((HRS, p.r0, 1), (LRS, p.r1, -1), (SP, p.r0_prime, 1)):
        llr = sign * cell_llr(level + rng.normal(0.0, p.sigma, 1_000_000), 0.5, 0.5, p)
        m, v = llr_moment_model(kind, 0.5, 0.5, p)
        worst = max(worst, abs(llr.mean() / m - 1), abs(llr.var() / v - 1))
    report("7 LLR Gaussianity", worst <= 0.02, f"max relative moment error {worst:.4f}")


@pytest.fixture(scope="module")
def crit8_results():
    t0 = time.perf_counter()
    cfg = SimConfig(table_profile("table1-row1"), 128, TABLE1["table1-row1"].k_sf, CRIT8_SIGMAS[0],
                    trials=CRIT8_TRIALS, seed=2024)
    graph = build_graph(cfg.profile, 128 * 128, cfg.profile.seed)
    res = {(s, m): simulate(cfg.with_(sigma=s, mode=m), graph) for s in CRIT8_SIGMAS for m in ("reram", "mixed")}
    return res, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_08_decomposition(report, crit8_results):
    res, dt = crit8_results
    lines, ok = [], True
    for s in CRIT8_SIGMAS:
        a, b = res[(s, "reram")], res[(s, "mixed")]
        std = np.hypot(a.wer_std, b.wer_std)
        in_range = all(1e-2 <= r.wer <= 1e-1 for r in (a, b))
        good = in_range and abs(a.wer - b.wer) <= 2 * std
        ok &= good
        lines.append(f"sigma={s:g}: reram {a.wer:.4f} mixed {b.wer:.4f} (2 std {2 * std:.4f})")
    report("8 decomposition equivalence", ok and dt < 1800, "; ".join(lines) + f"; {dt:.0f}s")


@pytest.mark.slow
def test_criterion_09_bound_ordering(report, crit8_results):
    res, _ = crit8_results
    row = TABLE1["table1-row1"]
    lines, ok = [], True
    for s in CRIT8_SIGMAS:
        bound = ppv_bound(BoundQuery(128, row.rate, gaussian_model(128, row.k_sf, 0.5),
                                     ChannelParams(sigma=s)))
        for mode in ("reram", "mixed"):
            r = res[(s, mode)]
            ok &= r.wer + r.wer_ci >= bound
        lines.append(f"sigma={s:g}: bound {bound:.3g}, wer {res[(s, 'reram')].wer:.3g}/{res[(s, 'mixed')].wer:.3g}")
    report("9 bound ordering", ok, "; ".join(lines))


def test_criterion_10_appendix_inequalities(report):
    t0 = time.perf_counter()
    fails = total = 0
    sigma = 1.0
    for s in np.arange(8.0, 40.0 + 1e-9, 0.5):
        for lam in np.round(np.arange(0.1, 0.9 + 1e-9, 0.05), 2):
            for check in (appendix_a_check, appendix_b_check):
                total += 1
                fails += not check(s * sigma, sigma, float(lam), 0.05).holds
    dt = time.perf_counter() - t0
    report("10 appendix inequalities", fails == 0 and dt < 60, f"{total - fails}/{total} hold, {dt:.1f}s")


def test_criterion_11_kernel_identities(report):
    m = np.array([0.3, 2.0, 17.0, 150.0])
    f1 = np.array([abs(float(check_output_means(v, 1)) - v) / v for v in m])
    x = np.geomspace(1e-3, 500, 200)
    rt = np.abs(phi_inv(phi(x)) - x) / x
    g = build_graph(table_profile("table1-row1"), 128 * 128, seed=0)
    rng = np.random.default_rng(1111)
    lin_ok = syn_ok = True
    for _ in range(10):
        u, v = rng.integers(0, 2, (2, 100, g.k), dtype=np.uint8)
        cu, cv = encode(g, u), encode(g, v)
        lin_ok &= np.array_equal(encode(g, u ^ v), cu ^ cv)
        syn_ok &= not syndrome(g, cu).any()
    checks = {"phi(0)=1": abs(phi(0.0) - 1) <= 1e-6, "f(1)=m": f1.max() <= 1e-6,
              "roundtrip": rt.max() <= 1e-6, "Q(0)=0.5": q_function(0.0) == 0.5,
              "linearity": lin_ok, "syndrome": syn_ok}
    report("11 kernel identities", all(checks.values()), ", ".join(f"{k} {'ok' if v else 'BAD'}" for k, v in checks.items()))
