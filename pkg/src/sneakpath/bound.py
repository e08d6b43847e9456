"""Normal-approximation finite-length word-error bound over the decomposed channel.

The output is a normal approximation, not an exact PPV achievability or
converse value.
"""
import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .capacity import LambdaChannel, capacity_approx, dispersion_approx
from .channel import ChannelParams
from .spstats import SpRateDistribution, gaussian_model

V_FLOOR = 1e-9


def q_function(x):
    """Standard normal upper tail."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


@dataclass
class BoundQuery:
    """``n`` is the array side; the blocklength is ``n**2``, so the Q argument scales with ``n``."""

    n: int
    rate: float
    dist: SpRateDistribution
    params: ChannelParams = ChannelParams()
    q: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise ValueError(f"rate must be in (0, 1), got {self.rate}")


def _word_error(n, rate, lam, q, params):
    ch = LambdaChannel(float(lam), q, params)
    c, v = capacity_approx(ch), dispersion_approx(ch)
    if v < V_FLOOR:
        return 0.0 if c > rate else 1.0
    return float(q_function(n * (c - rate) / np.sqrt(v)))


def _mixture_nodes(dist, nodes):
    if dist.model == "empirical":
        masses = np.asarray(dist.masses, dtype=float)
        if not np.isclose(masses.sum(), 1.0, atol=1e-9) or (masses < 0).any():
            raise ValueError("histogram masses must be non-negative and sum to 1")
        return np.asarray(dist.bin_centers, dtype=float), masses
    if dist.is_point_mass:
        return np.array([dist.mean]), np.array([1.0])
    lo = max(0.0, dist.mean - 6 * dist.std)
    hi = min(1.0, dist.mean + 6 * dist.std)
    if hi <= lo:
        raise ValueError("Gaussian model has no mass in [0, 1]")
    x, w = np.polynomial.legendre.leggauss(nodes)
    lam = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w * dist.pdf(lam)
    return lam, weights / weights.sum()


def ppv_bound(query, nodes=201):
    """Mixture over the SP-rate law of ``Q(N (C - R) / sqrt(V))``."""
    lams, weights = _mixture_nodes(query.dist, nodes)
    errs = np.array([_word_error(query.n, query.rate, lam, query.q, query.params) for lam in lams])
    return float(np.clip(np.dot(weights, errs), 0.0, 1.0))


def averaged_bound(query, sf_count_distribution, nodes=201):
    """Bound averaged over a distribution of the active-SF count.

    ``sf_count_distribution`` is a list of ``(K, probability)``; the
    SP-rate law for each K is the Gaussian model.
    """
    probs = np.array([p for _, p in sf_count_distribution], dtype=float)
    if (probs < 0).any() or not np.isclose(probs.sum(), 1.0, atol=1e-9):
        raise ValueError("SF-count probabilities must be non-negative and sum to 1")
    total = 0.0
    for k, p in sf_count_distribution:
        sub = BoundQuery(query.n, query.rate, gaussian_model(query.n, k, query.q), query.params, query.q)
        total += p * ppv_bound(sub, nodes)
    return total


def bound_curve(n, k, q, rate, sigmas, params=ChannelParams(), nodes=201):
    dist = gaussian_model(n, k, q)
    return [ppv_bound(BoundQuery(n, rate, dist, params.with_sigma(s), q), nodes) for s in sigmas]


def write_bound_csv(path, sigmas, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sigma", "bound_wer"])
        for s, v in zip(sigmas, values):
            w.writerow([s, f"{v:.10g}"])
