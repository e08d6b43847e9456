"""Grid search over IRA info-degree fractions for the best DE threshold."""
import csv
import itertools
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .channel import ChannelParams
from .de import decoding_threshold
from .ira import IraProfile


def rate_constraint_target(rate, dc):
    """Required ``sum_d a_d / d`` for an IRA code of this rate and check degree."""
    if not 0.0 < rate < 1.0:
        raise ValueError(f"rate must be in (0, 1), got {rate}")
    if dc < 1:
        raise ValueError("dc must be >= 1")
    return rate / ((1.0 - rate) * dc)


@dataclass(frozen=True)
class SearchSpec:
    rate: float
    dc: int
    lam: float
    degrees: tuple = (3, 10, 36)
    q: float = 0.5
    step: float = 0.005
    params: ChannelParams = ChannelParams()
    ira_aware: bool = True
    check_mean: str = "paper-literal"
    variable_average: str = "mi"
    target: float = 1e-7
    max_iters: int = 2000
    resolution: float = 0.5

    def __post_init__(self):
        if len(self.degrees) < 2 or len(set(self.degrees)) != len(self.degrees):
            raise ValueError("need at least two distinct candidate degrees")
        if not 0.0 < self.step <= 0.1:
            raise ValueError(f"step must be in (0, 0.1], got {self.step}")


def solve_last_two(spec, free):
    """Fractions of the last two degrees given the others; ``None`` if negative."""
    target = rate_constraint_target(spec.rate, spec.dc)
    degs = np.asarray(spec.degrees, dtype=float)
    free = np.asarray(free, dtype=float)
    nf = len(free)
    rhs = np.array([1.0 - free.sum(), target - np.dot(free, 1.0 / degs[:nf])])
    mat = np.array([[1.0, 1.0], 1.0 / degs[nf:]])
    a = np.linalg.solve(mat, rhs)
    a[np.abs(a) < 1e-12] = 0.0
    if (a < 0).any():
        return None
    return np.concatenate([free, a])


def enumerate_feasible(spec):
    """All fraction vectors on the step grid that meet the rate and sum constraints.

    The first ``len(degrees) - 2`` fractions are scanned; the last two
    follow from the linear constraints.
    """
    grid = np.round(np.arange(0.0, 1.0 + spec.step / 2, spec.step), 10)
    out = []
    for free in itertools.product(grid, repeat=len(spec.degrees) - 2):
        if sum(free) > 1.0 + 1e-12:
            continue
        a = solve_last_two(spec, free)
        if a is not None:
            out.append(a)
    return out


def _profile(spec, a):
    return IraProfile(spec.rate, spec.dc, dict(zip(spec.degrees, map(float, a))), lam=spec.lam)


def _threshold(spec, a):
    try:
        return decoding_threshold(
            _profile(spec, a), spec.lam, spec.q, spec.params, ira_aware=spec.ira_aware,
            check_mean=spec.check_mean, variable_average=spec.variable_average,
            target=spec.target, max_iters=spec.max_iters, resolution=spec.resolution,
        )
    except ValueError:
        return float("nan")


@dataclass
class SearchResult:
    profile: IraProfile
    sigma_th: float
    scan: list  # (fractions, sigma_th) rows

    def write_scan(self, path):
        degs = self.profile.degrees.keys()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"a{d}" for d in sorted(degs)] + ["sigma_th"])
            for a, s in self.scan:
                w.writerow([f"{x:.6f}" for x in a] + [s])


def _best(rows):
    # highest threshold; ties go to the larger leading fraction (sparser graph)
    usable = [(s, tuple(a)) for a, s in rows if np.isfinite(s)]
    if not usable:
        raise ValueError("every candidate profile fails DE at sigma=1")
    s, a = max(usable)
    return np.array(a), s


def optimize(spec, refine=False, n_jobs=1):
    """Scan the feasible grid; optionally rescan the leading fraction at 1e-4 near the winner."""
    cands = enumerate_feasible(spec)
    if not cands:
        raise ValueError("no feasible degree distribution on the grid")
    sig = Parallel(n_jobs=n_jobs)(delayed(_threshold)(spec, a) for a in cands)
    rows = list(zip(cands, sig))
    best, s_best = _best(rows)
    if refine and len(spec.degrees) == 3:
        fine = np.round(np.arange(best[0] - spec.step, best[0] + spec.step + 5e-5, 1e-4), 6)
        extra = [a for a in (solve_last_two(spec, [f]) for f in fine if f >= 0) if a is not None]
        sig2 = Parallel(n_jobs=n_jobs)(delayed(_threshold)(spec, a) for a in extra)
        best, s_best = _best(rows + list(zip(extra, sig2)))
        rows += list(zip(extra, sig2))
    return SearchResult(_profile(spec, best), s_best, rows)
