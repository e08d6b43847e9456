"""Monte Carlo BER/WER of IRA codes over the array channel and its mixed lambda-Gaussian model."""
import csv
import time
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import binomtest

from .channel import ChannelParams, apply_sneak_paths, cell_llr, estimate_sp_rate
from .ira import IraProfile, bp_decode, build_graph, encode
from .spstats import gaussian_model, sample_scattered_sfs

MODES = ("reram", "mixed")
LAMBDA_SOURCES = ("estimated", "genie")
RESULT_HEADER = ["sigma", "channel_mode", "trials", "bit_errors", "word_errors",
                 "ber", "wer", "ber_ci", "wer_ci", "seed"]
MAX_DATA_REDRAWS = 100


@dataclass
class SimConfig:
    profile: IraProfile
    n: int
    k_sf: int
    sigma: float
    trials: int = 1000
    seed: int = 0
    mode: str = "reram"
    max_iters: int = 100
    lambda_source: str = "estimated"
    params: ChannelParams = None
    force_lambda: float = None  # mixed mode only
    batch: int = 32

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.lambda_source not in LAMBDA_SOURCES:
            raise ValueError(f"lambda_source must be one of {LAMBDA_SOURCES}")
        if self.params is None:
            self.params = ChannelParams(sigma=self.sigma)
        else:
            self.params = self.params.with_sigma(self.sigma)

    def with_(self, **kw):
        d = dict(self.__dict__)
        d.update(kw)
        if "sigma" in kw:
            d["params"] = self.params.with_sigma(kw["sigma"])
        return SimConfig(**d)


def trial_rng(config, index):
    """Generator for one trial, a pure function of (seed, index, mode)."""
    return np.random.default_rng(np.random.SeedSequence([config.seed, index, MODES.index(config.mode)]))


def _levels(cw, sp, params):
    return np.where(cw == 1, params.r1, np.where(sp, params.r0_prime, params.r0))


def _channel_reram(config, graph, rng):
    # redraw the data if no scattered SF set exists (counted as a resample)
    for redraw in range(MAX_DATA_REDRAWS):
        info = rng.integers(0, 2, graph.k, dtype=np.uint8)
        cw = encode(graph, info)
        x = cw.reshape(config.n, config.n)
        sfs = sample_scattered_sfs(x, config.k_sf, rng)
        if sfs is not None:
            break
    else:
        raise RuntimeError("could not place the SFs on any data draw")
    sp = apply_sneak_paths(x, sfs).ravel()
    return info, cw, sp, redraw


def _channel_mixed(config, graph, rng):
    info = rng.integers(0, 2, graph.k, dtype=np.uint8)
    cw = encode(graph, info)
    if config.force_lambda is not None:
        lam = config.force_lambda
    else:
        lam = float(gaussian_model(config.n, config.k_sf, 0.5).sample(rng))
    sp = (cw == 0) & (rng.random(cw.size) < lam)
    return info, cw, sp, 0


def _observe(config, graph, index):
    rng = trial_rng(config, index)
    make = _channel_reram if config.mode == "reram" else _channel_mixed
    info, cw, sp, redraws = make(config, graph, rng)
    p = config.params
    y = _levels(cw, sp, p) + rng.normal(0.0, p.sigma, cw.size)
    if config.lambda_source == "genie":
        zeros = np.count_nonzero(cw == 0)
        lam = np.count_nonzero(sp) / zeros if zeros else 0.0
    else:
        lam = estimate_sp_rate(y, p)
    return info, cell_llr(y, lam, 0.5, p), redraws


def run_trials(config, indices, graph):
    """Decode the given trials in one batch; returns per-trial (bit errors, word error, redraws)."""
    obs = [_observe(config, graph, i) for i in indices]
    info = np.array([o[0] for o in obs])
    llrs = np.array([o[1] for o in obs])
    bits, _, _ = bp_decode(graph, llrs, config.max_iters)
    errs = np.count_nonzero(bits[:, : graph.k] != info, axis=1)
    return errs, errs > 0, np.array([o[2] for o in obs])


def run_trial(config, index, graph=None):
    """Bit errors and word-error flag of one trial."""
    graph = graph if graph is not None else code_graph(config)
    errs, words, _ = run_trials(config, [index], graph)
    return int(errs[0]), bool(words[0])


def run_trial_reram(config, index, graph=None):
    return run_trial(config.with_(mode="reram"), index, graph)


def run_trial_mixed(config, index, graph=None):
    return run_trial(config.with_(mode="mixed"), index, graph)


def code_graph(config):
    return build_graph(config.profile, config.n * config.n, config.profile.seed)


def wilson_half_width(errors, total):
    """Half-width of the 95% Wilson interval; rule of three (3/total) when no errors."""
    if errors == 0:
        return 3.0 / total
    ci = binomtest(int(errors), int(total)).proportion_ci(0.95, method="wilson")
    return 0.5 * (ci.high - ci.low)


@dataclass
class SimResult:
    sigma: float
    mode: str
    trials: int
    bit_errors: int
    word_errors: int
    info_bits: int
    seed: int
    wall_time: float = 0.0
    redraws: int = 0
    per_trial: np.ndarray = field(default=None, repr=False)

    @property
    def ber(self):
        return self.bit_errors / (self.trials * self.info_bits)

    @property
    def wer(self):
        return self.word_errors / self.trials

    @property
    def ber_ci(self):
        return wilson_half_width(self.bit_errors, self.trials * self.info_bits)

    @property
    def wer_ci(self):
        return wilson_half_width(self.word_errors, self.trials)

    @property
    def wer_std(self):
        p = self.wer
        return np.sqrt(p * (1 - p) / self.trials)

    def row(self):
        return [self.sigma, self.mode, self.trials, self.bit_errors, self.word_errors,
                f"{self.ber:.6g}", f"{self.wer:.6g}", f"{self.ber_ci:.6g}", f"{self.wer_ci:.6g}", self.seed]


def simulate(config, graph=None, n_jobs=1):
    """Run ``config.trials`` trials; counts are summed in index order, so any ``n_jobs`` agrees."""
    t0 = time.perf_counter()
    graph = graph if graph is not None else code_graph(config)
    chunks = [range(i, min(i + config.batch, config.trials)) for i in range(0, config.trials, config.batch)]
    parts = Parallel(n_jobs=n_jobs)(delayed(run_trials)(config, list(c), graph) for c in chunks)
    errs = np.concatenate([p[0] for p in parts])
    redraws = int(sum(p[2].sum() for p in parts))
    return SimResult(config.sigma, config.mode, config.trials, int(errs.sum()),
                     int(np.count_nonzero(errs)), graph.k, config.seed,
                     time.perf_counter() - t0, redraws, errs)


def sweep(config, sigmas, modes=("reram",), n_jobs=1):
    graph = code_graph(config) if len(sigmas) else None
    return [simulate(config.with_(sigma=s, mode=m), graph, n_jobs) for s in sigmas for m in modes]


def write_results(path, results):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_HEADER)
        for r in results:
            w.writerow(r.row())
