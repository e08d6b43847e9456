"""Capacity and dispersion of the lambda-Gaussian channel.

Input 1 reads ``R1 + Z``; input 0 reads ``R0' + Z`` with probability
``lambda`` and ``R0 + Z`` otherwise. Capacities are in bits, dispersions
in bits squared.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .channel import ChannelParams

LOG2 = np.log(2.0)
GH_NODES = 128


@lru_cache(maxsize=None)
def _hermite(n):
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return x, w / w.sum()


def gauss_expect(f, n=GH_NODES):
    """``E[f(Z)]`` for standard normal ``Z`` by Gauss-Hermite quadrature."""
    x, w = _hermite(n)
    return float(np.dot(w, f(x)))


def binary_entropy(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-(p * np.log2(p) + (1 - p) * np.log2(1 - p)))


def _logs(q):
    with np.errstate(divide="ignore"):
        return np.log(q), np.log1p(-q)


def biawgn_capacity(q, gamma, n=GH_NODES):
    """Mutual information of a BIAWGN channel with Bernoulli(q) input at SNR ``gamma**2``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    lq, l1q = _logs(q)

    def f(z):
        t = 2.0 * gamma * (z - gamma)
        a = -q * np.logaddexp(lq, l1q + t) if q > 0 else 0.0
        b = -(1 - q) * np.logaddexp(lq + t, l1q) if q < 1 else 0.0
        return a + b

    return gauss_expect(f, n) / LOG2


@dataclass(frozen=True)
class LambdaChannel:
    lam: float
    q: float = 0.5
    params: ChannelParams = ChannelParams()

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must be in [0, 1], got {self.lam}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must be in (0, 1), got {self.q}")

    @property
    def gamma(self):
        return self.params.gamma

    @property
    def q_prime(self):
        """Probability that the output is not an HRS read."""
        return self.q + (1 - self.q) * self.lam


@dataclass(frozen=True)
class CapacityDispersion:
    capacity: float
    dispersion: float


def capacity_approx(ch):
    lam, q, qp = ch.lam, ch.q, ch.q_prime
    return (
        binary_entropy(qp)
        - (1 - q) * binary_entropy(lam)
        + qp * biawgn_capacity(q / qp, ch.gamma)
    )


def capacity_alt(ch):
    """Equivalent form ``H(q) - q' H(q/q') + q' C_BIAWGN(q/q', gamma)``."""
    q, qp = ch.q, ch.q_prime
    return binary_entropy(q) - qp * binary_entropy(q / qp) + qp * biawgn_capacity(q / qp, ch.gamma)


def dispersion_approx(ch):
    lam, q, g = ch.lam, ch.q, ch.gamma
    if lam == 0.0:
        # noiseless limit: varentropy of the input
        h = binary_entropy(q)
        return max(q * np.log2(q) ** 2 + (1 - q) * np.log2(1 - q) ** 2 - h * h, 0.0)
    c = capacity_approx(ch)
    lq, l1q = _logs(q)
    llam = np.log(lam)

    def lrs(z):
        t = 2 * g * (z - g)
        return np.logaddexp(l1q + llam + t, lq) ** 2

    def sp(z):
        t = 2 * g * (z - g)
        return np.logaddexp(l1q, lq - llam + t) ** 2

    second = (
        q * gauss_expect(lrs)
        + (1 - q) * lam * gauss_expect(sp)
        + (1 - q) * (1 - lam) * l1q ** 2
    ) / LOG2 ** 2
    return max(second - c * c, 0.0)


def _info_density_terms(ch):
    """Per-component (weight, level, input) and a log-density helper for exact integrals."""
    p, q, lam = ch.params, ch.q, ch.lam
    s = p.sigma
    lq, l1q = _logs(q)
    with np.errstate(divide="ignore"):
        llam, l1lam = np.log(lam), np.log1p(-lam)

    def logpdf(y, mu):
        return -0.5 * ((y - mu) / s) ** 2

    def log_cond(y, x):
        if x == 1:
            return logpdf(y, p.r1)
        return np.logaddexp(llam + logpdf(y, p.r0_prime), l1lam + logpdf(y, p.r0))

    def log_marg(y):
        return logsumexp(
            [lq + logpdf(y, p.r1), l1q + llam + logpdf(y, p.r0_prime), l1q + l1lam + logpdf(y, p.r0)]
        )

    comps = [(q, p.r1, 1), ((1 - q) * lam, p.r0_prime, 0), ((1 - q) * (1 - lam), p.r0, 0)]
    return [(w, mu, x) for w, mu, x in comps if w > 0], log_cond, log_marg, s


def _exact_moment(ch, power):
    comps, log_cond, log_marg, s = _info_density_terms(ch)
    total = 0.0
    for w, mu, x in comps:
        def f(z, mu=mu, x=x):
            y = mu + s * z
            i = (log_cond(y, x) - log_marg(y)) / LOG2
            return np.exp(-0.5 * z * z) / np.sqrt(2 * np.pi) * i ** power

        val, _ = integrate.quad(f, -12.0, 12.0, points=[0.0], limit=200, epsabs=1e-12, epsrel=1e-11)
        total += w * val
    return total


def capacity_exact(ch):
    """Mutual information by adaptive quadrature over the full mixture densities."""
    return _exact_moment(ch, 1)


def dispersion_exact(ch):
    """Variance of the information density with the full mixture densities."""
    c = _exact_moment(ch, 1)
    return max(_exact_moment(ch, 2) - c * c, 0.0)


def capacity_dispersion(ch, exact=False):
    if exact:
        return CapacityDispersion(capacity_exact(ch), dispersion_exact(ch))
    return CapacityDispersion(capacity_approx(ch), dispersion_approx(ch))


def shannon_limit_sigma(rate, lam, q=0.5, params=ChannelParams(), tol=0.01):
    """Largest noise level whose approximate capacity still supports ``rate``."""
    if not 0.0 < rate < binary_entropy(q):
        raise ValueError(f"rate {rate} unreachable: capacity at sigma->0 is {binary_entropy(q):.6f}")

    def cap(s):
        return capacity_approx(LambdaChannel(lam, q, params.with_sigma(s)))

    lo = 1e-3 * (params.r0_prime - params.r1)
    if cap(lo) < rate:
        raise ValueError(f"rate {rate} unreachable even at sigma={lo}")
    hi = 2.0 * lo
    while cap(hi) >= rate:
        lo, hi = hi, 2.0 * hi
        if hi > 1e7:
            raise ValueError("capacity does not fall below the rate")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cap(mid) >= rate:
            lo = mid
        else:
            hi = mid
    return lo


def _softplus_moment(log_a, s, power):
    """``E[log(1 + a exp(-s (s - 2 Z) / 2))**power]`` for standard normal ``Z``."""
    if log_a == -np.inf:
        return 0.0
    c = log_a - 0.5 * s * s
    kink = -c / s  # where the exponent crosses zero

    def f(z):
        return np.exp(-0.5 * z * z) / np.sqrt(2 * np.pi) * np.logaddexp(0.0, c + s * z) ** power

    lo = min(-12.0, kink - 20.0)
    parts = [(lo, kink), (kink, kink + 20.0)]
    if kink + 20.0 < 12.0:
        parts.append((kink + 20.0, 12.0))
    return sum(integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-10, limit=200)[0] for a, b in parts)


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    bound: float
    holds: bool


def _appendix_setup(delta_r, sigma, lam, delta):
    if not lam >= delta > 0:
        raise ValueError("need lambda >= Delta > 0")
    if lam < 1.0:
        tau = delta_r / 2 + sigma ** 2 / delta_r * np.log(lam / (1 - lam))
        if tau <= 0:
            raise ValueError(f"tau={tau:.4g} <= 0: delta_r/sigma too small")
    beta = 2 * sigma ** 2 / delta_r * np.log((1 - delta) / delta)
    expo = np.exp(-((delta_r - beta) ** 2) / (8 * sigma ** 2))
    log_a = np.log((1 - lam) / lam) if lam < 1.0 else -np.inf
    return log_a, delta_r / sigma, expo


def appendix_a_check(delta_r, sigma, lam, delta):
    """Numeric check of the first-moment mixture-term bound."""
    log_a, s, expo = _appendix_setup(delta_r, sigma, lam, delta)
    lhs = _softplus_moment(log_a, s, 1)
    bound = expo / delta
    return BoundCheck(lhs, bound, lhs <= bound)


def appendix_b_check(delta_r, sigma, lam, delta):
    """Numeric check of the second-moment mixture-term bound."""
    log_a, s, expo = _appendix_setup(delta_r, sigma, lam, delta)
    lhs = _softplus_moment(log_a, s, 2)
    bound = (3 * delta_r ** 4 / (4 * sigma ** 4) + 3 / (2 * delta ** 2)) * expo
    return BoundCheck(lhs, bound, lhs <= bound)
