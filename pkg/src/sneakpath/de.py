"""Two-dimensional (p, m) density evolution over the lambda-Gaussian channel.

A message is reliable with probability ``p``; otherwise its LLR is
Gaussian with mean ``m`` and variance ``2m`` (nats). Reliable messages
carry infinite magnitude and are tracked through ``p`` only.
"""
import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator
from scipy.special import comb, logsumexp

from .bound import q_function
from .channel import ChannelParams

CHECK_MEAN_MODES = ("paper-literal", "conditional")
VARIABLE_AVERAGES = ("mean", "mi", "phi")

TABLE_KNOTS = 4096
TABLE_MIN, TABLE_MAX = 1e-4, 1e3


class ConsistentGaussianTable:
    """``E[h(U)]`` for ``U ~ N(x, 2x)`` tabulated in log space.

    ``kernel(u)`` is the symmetrised integrand ``h(u) + exp(-u) h(-u)``
    on ``u >= 0``; ``series`` gives ``(a, b)`` with ``value ~ 1 - a x + b x^2``
    near zero. Beyond the table the large-``x`` expansion of the scaled
    integral is used.
    """

    def __init__(self, kernel, series, knots=TABLE_KNOTS):
        self.kernel = kernel
        self.a, self.b = series
        xs = np.logspace(np.log10(TABLE_MIN), np.log10(TABLE_MAX), knots)
        log_x = np.log(xs)
        # interpolate the slowly varying scaled integral, not the value itself
        log_scaled = np.array([self._log_scaled_quad(x) for x in xs])
        lv = log_scaled + self._log_prefactor(xs)
        if not (np.diff(lv) < 0).all():
            raise RuntimeError("tabulated kernel is not strictly decreasing")
        self.log_x = log_x
        self.log_v = lv
        self._scaled = PchipInterpolator(log_x, log_scaled)
        self._dscaled = self._scaled.derivative()
        self._inv = PchipInterpolator(lv[::-1], log_x[::-1])
        self.moments = [
            integrate.quad(lambda u, j=j: u ** j * np.exp(0.5 * u) * kernel(u), 0, 120, limit=400)[0]
            for j in (0, 2, 4)
        ]
        self.lv_min, self.lv_max = lv[-1], lv[0]

    @staticmethod
    def _log_prefactor(x):
        return -x / 4 - 0.5 * np.log(4 * np.pi * x)

    def _log_scaled_quad(self, x):
        upper = min(80.0, np.sqrt(160.0 * x))
        f = lambda u: np.exp(0.5 * u - u * u / (4 * x)) * self.kernel(u)
        val, _ = integrate.quad(f, 0.0, upper, limit=400, epsabs=0.0, epsrel=1e-13)
        return np.log(val)

    def _log_value_quad(self, x):
        return self._log_prefactor(x) + self._log_scaled_quad(x)

    def _log_mid(self, lx):
        return self._scaled(lx) + self._log_prefactor(np.exp(lx))

    def _dlog_mid(self, lx):
        x = np.exp(lx)
        return self._dscaled(lx) - x / 4 - 0.5

    def _log_tail(self, x):
        c0, c2, c4 = self.moments
        return -x / 4 - 0.5 * np.log(4 * np.pi * x) + np.log(c0 - c2 / (4 * x) + c4 / (32 * x * x))

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        small = (x > 0) & (x < TABLE_MIN)
        mid = (x >= TABLE_MIN) & (x <= TABLE_MAX)
        big = x > TABLE_MAX
        out[small] = np.log1p(-self.a * x[small] + self.b * x[small] ** 2)
        out[mid] = self._log_mid(np.log(x[mid]))
        out[big] = self._log_tail(x[big])
        return out

    def exact(self, x):
        """Direct quadrature, bypassing the table."""
        return 1.0 if x == 0 else float(np.exp(self._log_value_quad(x)))

    def inverse_log(self, lv):
        """``x`` with ``log_value(x) == lv``; ``lv <= 0``."""
        lv = np.minimum(np.asarray(lv, dtype=float), 0.0)
        out = np.zeros_like(lv)
        near0 = lv > self.lv_max
        mid = (lv <= self.lv_max) & (lv >= self.lv_min)
        tail = lv < self.lv_min
        if near0.any():
            d = -np.expm1(lv[near0])  # 1 - value
            out[near0] = (self.a - np.sqrt(self.a ** 2 - 4 * self.b * d)) / (2 * self.b)
        if mid.any():
            t = lv[mid]
            lx = self._inv(t)
            for _ in range(2):
                lx = lx - (self._log_mid(lx) - t) / self._dlog_mid(lx)
                lx = np.clip(lx, self.log_x[0], self.log_x[-1])
            out[mid] = np.exp(lx)
        if tail.any():
            t = lv[tail]
            x = -4.0 * t
            for _ in range(30):
                h = 1e-6 * x
                g = self._log_tail(x) - t
                dg = (self._log_tail(x + h) - self._log_tail(x - h)) / (2 * h)
                step = g / dg
                x = x - step
                if np.all(np.abs(step) < 1e-12 * x):
                    break
            out[tail] = x
        return out


def _phi_kernel(u):
    return 4.0 / (1.0 + np.exp(u))


def _mi_kernel(u):
    # log2(1+e^-u) + e^-u log2(1+e^u)
    return (np.logaddexp(0.0, -u) + np.exp(-u) * np.logaddexp(0.0, u)) / np.log(2.0)


@lru_cache(maxsize=None)
def phi_table():
    return ConsistentGaussianTable(_phi_kernel, (0.5, 0.25))


@lru_cache(maxsize=None)
def mi_table():
    """Table of ``1 - J(m)``: the bits of uncertainty left in a consistent Gaussian LLR."""
    ln2 = np.log(2.0)
    return ConsistentGaussianTable(_mi_kernel, (1 / (4 * ln2), 1 / (16 * ln2)))


def log_phi(x):
    x = np.asarray(x, dtype=float)
    if (x < 0).any():
        raise ValueError("phi is defined for x >= 0")
    return phi_table().log_value(x)


def phi(x):
    """``1 - E[tanh(U/2)]`` for ``U ~ N(x, 2x)``; ``phi(0) = 1``."""
    out = np.exp(log_phi(x))
    return float(out) if np.ndim(out) == 0 else out


def phi_inv(y):
    y = np.asarray(y, dtype=float)
    if ((y <= 0) | (y > 1)).any():
        raise ValueError("phi_inv needs y in (0, 1]")
    out = phi_table().inverse_log(np.log(y))
    return float(out) if np.ndim(out) == 0 else out


def mutual_information(m):
    """Mutual information (bits) carried by a consistent Gaussian LLR of mean ``m``."""
    out = -np.expm1(mi_table().log_value(np.asarray(m, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MessagePdf:
    p: float
    m: float


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree distribution ``{degree: fraction}``."""

    degrees: tuple
    fractions: tuple

    def __post_init__(self):
        d = np.asarray(self.degrees)
        f = np.asarray(self.fractions, dtype=float)
        if len(d) != len(f) or len(d) == 0:
            raise ValueError("degrees and fractions must be non-empty and aligned")
        if (d < 1).any() or len(set(d.tolist())) != len(d):
            raise ValueError("degrees must be distinct and >= 1")
        if (f <= 0).any() or abs(f.sum() - 1.0) > 1e-9:
            raise ValueError(f"fractions must be positive and sum to 1, got sum {f.sum()!r}")

    @classmethod
    def from_dict(cls, mapping):
        items = sorted((int(d), float(a)) for d, a in mapping.items() if a != 0)
        return cls(tuple(d for d, _ in items), tuple(a for _, a in items))

    def as_dict(self):
        return dict(zip(self.degrees, self.fractions))

    @property
    def d(self):
        return np.asarray(self.degrees, dtype=float)

    @property
    def a(self):
        return np.asarray(self.fractions, dtype=float)

    def edge_average_degree(self):
        return float(np.dot(self.a, self.d))

    def node_average_degree(self):
        return float(1.0 / np.dot(self.a, 1.0 / self.d))


def initial_tuple(lam, q, params):
    """Channel message tuple: HRS reads are reliable, LRS/SP reads share one Gaussian."""
    if not 0.0 <= lam <= 1.0 or not 0.0 < q < 1.0:
        raise ValueError("need lambda in [0, 1] and q in (0, 1)")
    s2 = params.sigma ** 2
    if lam == 0.0:
        # no SP cells: LRS reads are judged against R0 only
        m0 = (params.r0 - params.r1) ** 2 / (2 * s2) + np.log(q / (1 - q))
        return MessagePdf(1.0 - q, max(float(m0), 0.0))
    p0 = (1 - q) * (1 - lam)
    w = lam * (1 - q)
    m0 = (params.r0_prime - params.r1) ** 2 / (2 * s2) + (q - w) / (q + w) * np.log(q / w)
    return MessagePdf(p0, float(m0))


def _table_for(average):
    return mi_table() if average == "mi" else phi_table()


def variable_update(dist_a, incoming, channel, average="mean"):
    """Degree-averaged variable-to-check tuple.

    ``average`` picks how means of different degrees are merged: ``mean``
    averages them directly, ``mi`` averages the mutual information and
    ``phi`` averages the check kernel, each over unreliable outputs.
    """
    if average not in VARIABLE_AVERAGES:
        raise ValueError(f"average must be one of {VARIABLE_AVERAGES}")
    d, a = dist_a.d, dist_a.a
    unrel = a * (1 - incoming.p) ** (d - 1)
    p = 1.0 - (1.0 - channel.p) * unrel.sum()
    if average == "mean":
        return MessagePdf(p, channel.m + (np.dot(a, d) - 1.0) * incoming.m)
    if unrel.sum() <= 0.0:
        return MessagePdf(p, channel.m)
    means = channel.m + (d - 1) * incoming.m
    table = _table_for(average)
    with np.errstate(divide="ignore"):
        lw = np.log(unrel / unrel.sum())
    lv = logsumexp(lw + table.log_value(means))
    return MessagePdf(p, float(table.inverse_log(np.array([lv]))[0]))


def check_output_means(m, i):
    """Mean of a check output with ``i`` unreliable Gaussian inputs of mean ``m``.

    ``f(i) = phi_inv(1 - (1 - phi(m))**i)``, so ``f(1) = m``.
    """
    i = np.asarray(i, dtype=float)
    table = phi_table()
    lp = float(table.log_value(np.array([m]))[0])
    ph = np.exp(lp)
    if ph > 1e-8:
        target = np.log(-np.expm1(i * np.log1p(-ph)))
    else:
        target = np.log(i) + lp + np.log1p(-(i - 1) * ph / 2)
    return table.inverse_log(target)


def check_update(dist_b, incoming, mode="paper-literal"):
    """Degree-averaged check-to-variable tuple.

    In ``paper-literal`` mode the mean is the plain binomial mixture of
    ``f(i)``; ``conditional`` divides by the unreliable probability.
    """
    if mode not in CHECK_MEAN_MODES:
        raise ValueError(f"mode must be one of {CHECK_MEAN_MODES}")
    pv = incoming.p
    d, b = dist_b.d, dist_b.a
    p = float(np.dot(b, pv ** (d - 1)))
    if pv >= 1.0:
        return MessagePdf(1.0, 0.0)
    dmax = int(d.max())
    f = check_output_means(incoming.m, np.arange(1, dmax))
    m = 0.0
    for deg, frac in zip(d.astype(int), b):
        i = np.arange(1, deg)
        w = comb(deg - 1, i) * pv ** (deg - 1 - i) * (1 - pv) ** i
        m += frac * np.dot(w, f[: deg - 1])
    if mode == "conditional" and p < 1.0:
        m /= 1.0 - p
    return MessagePdf(p, float(m))


@dataclass
class DeConfig:
    variable: DegreeDistribution
    check: DegreeDistribution
    lam: float
    q: float = 0.5
    params: ChannelParams = ChannelParams()
    max_iters: int = 2000
    epsilon: float = 1e-10
    target: float = 1e-7
    check_mean: str = "paper-literal"
    variable_average: str = "mi"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.target <= 0:
            raise ValueError("target must be positive")


@dataclass
class DeResult:
    pe: float
    p: float
    m: float
    iterations: int
    converged: bool
    monotone: bool
    trace: list = field(default_factory=list, repr=False)

    def write_trace(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "p_vc", "m_vc", "p_cv", "m_cv", "pe"])
            w.writerows(self.trace)


def error_probability(msg):
    return float((1.0 - msg.p) * q_function(np.sqrt(max(msg.m, 0.0) / 2.0)))


def run_de(config, record_trace=False):
    """Iterate from a silent check side until a fixed point, success or ``max_iters``.

    Success means the hard-decision error probability drops below
    ``config.target``; the run stops there since the mean then grows
    without bound.
    """
    channel = initial_tuple(config.lam, config.q, config.params)
    c2v = MessagePdf(0.0, 0.0)
    trace = []
    monotone = True
    prev_pe = np.inf
    v2c = channel
    pe = 1.0
    for it in range(1, config.max_iters + 1):
        v2c = variable_update(config.variable, c2v, channel, config.variable_average)
        pe = error_probability(v2c)
        if pe > prev_pe * (1 + 1e-9) + 1e-15:
            monotone = False
        prev_pe = pe
        if pe < config.target:
            if record_trace:
                trace.append([it, v2c.p, v2c.m, c2v.p, c2v.m, pe])
            return DeResult(pe, v2c.p, v2c.m, it, True, monotone, trace)
        new = check_update(config.check, v2c, config.check_mean)
        if record_trace:
            trace.append([it, v2c.p, v2c.m, new.p, new.m, pe])
        if abs(new.p - c2v.p) < config.epsilon and abs(new.m - c2v.m) < config.epsilon:
            return DeResult(pe, v2c.p, v2c.m, it, True, monotone, trace)
        c2v = new
    if not trace:
        # attach a short tail of the trajectory for diagnosis
        trace = [[config.max_iters, v2c.p, v2c.m, c2v.p, c2v.m, pe]]
    return DeResult(pe, v2c.p, v2c.m, config.max_iters, False, monotone, trace)


def ira_distributions(degrees, dc, ira_aware=True):
    """Edge distributions seen by DE for an IRA code.

    With ``ira_aware`` the accumulator parity bits join as degree-2
    variables and every check gains their two edges.
    """
    info = dict(degrees)
    if not ira_aware:
        return DegreeDistribution.from_dict(info), DegreeDistribution.from_dict({dc: 1.0})
    scale = dc / (dc + 2.0)
    var = {d: a * scale for d, a in info.items()}
    var[2] = var.get(2, 0.0) + 2.0 / (dc + 2.0)
    return DegreeDistribution.from_dict(var), DegreeDistribution.from_dict({dc + 2: 1.0})


def threshold_search(succeeds, resolution=0.5, start=1.0):
    """Largest ``sigma`` (to ``resolution``) at which ``succeeds(sigma)`` holds."""
    if not succeeds(start):
        raise ValueError(f"decoding fails even at sigma={start}: profile unusable")
    lo, hi = start, 2.0 * start
    while succeeds(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise ValueError("no failing sigma found")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if succeeds(mid):
            lo = mid
        else:
            hi = mid
    return lo


def decoding_threshold(
    profile, lam, q=0.5, params=ChannelParams(), *, ira_aware=True,
    check_mean="paper-literal", variable_average="mi", target=1e-7,
    max_iters=2000, resolution=0.5,
):
    """DE threshold ``sigma_th`` of an IRA profile on the lambda-Gaussian channel.

    ``profile`` is anything with ``degrees`` (``{d: a_d}``) and ``dc``.
    """
    var, chk = ira_distributions(profile.degrees, profile.dc, ira_aware)

    def succeeds(sigma):
        cfg = DeConfig(var, chk, lam, q, params.with_sigma(sigma), max_iters=max_iters,
                       target=target, check_mean=check_mean, variable_average=variable_average)
        return run_de(cfg).pe < target

    return threshold_search(succeeds, resolution)
