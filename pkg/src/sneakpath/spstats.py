"""Distribution of the sneak-path rate for Bernoulli(q) data and K active SFs."""
import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import stats


def _check_args(n, k, q):
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    if k >= n / 2:
        raise ValueError(f"k={k} too large for n={n}: need k < n/2")


def sp_rate_mean(n, k, q):
    """Large-N mean of the SP rate, keeping the O(1/N) term."""
    _check_args(n, k, q)
    if k == 0:
        return 0.0
    a = 1.0 - q * q
    return 1.0 - (1.0 - 2.0 * k / n) * a ** k - (2.0 * k / n) * a ** (k - 1)


def sp_rate_variance(n, k, q):
    """Leading O(1/N) variance of the SP rate."""
    _check_args(n, k, q)
    return (2.0 / n) * ((1.0 - 2 * q * q + q ** 3) ** k - (1.0 - q * q) ** (2 * k))


def nonscattered_mean(k, q):
    """Asymptotic SP rate when two of the K SFs share a row (or column)."""
    if k < 2:
        raise ValueError("non-scattered pattern needs at least two SFs")
    return 1.0 - (1.0 - 2 * q * q + q ** 3) * (1.0 - q * q) ** (k - 2)


def design_lambda(n, k, q):
    """Design SP rate ``mean + 3 std``, clamped to [0, 1]."""
    lam = sp_rate_mean(n, k, q) + 3.0 * np.sqrt(sp_rate_variance(n, k, q))
    return float(min(max(lam, 0.0), 1.0))


@dataclass
class SpRateDistribution:
    """SP-rate law for ``(n, k, q)``: a truncated Gaussian or a histogram.

    For ``model='empirical'`` the raw per-array rates are kept in
    ``samples`` and the histogram in ``bin_centers`` / ``masses``.
    """

    n: int
    k: int
    q: float
    mean: float
    variance: float
    model: str = "gaussian"
    bin_centers: np.ndarray = None
    masses: np.ndarray = None
    samples: np.ndarray = field(default=None, repr=False)
    resampled: int = 0

    @property
    def std(self):
        return float(np.sqrt(self.variance))

    @property
    def is_point_mass(self):
        return self.model == "gaussian" and self.variance <= 0.0

    def _truncnorm(self):
        a, b = (0.0 - self.mean) / self.std, (1.0 - self.mean) / self.std
        return stats.truncnorm(a, b, loc=self.mean, scale=self.std)

    def cdf(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.model == "empirical":
            return np.searchsorted(np.sort(self.samples), lam, side="right") / len(self.samples)
        if self.is_point_mass:
            return (lam >= self.mean).astype(float)
        return self._truncnorm().cdf(lam)

    def pdf(self, lam):
        if self.model != "gaussian" or self.is_point_mass:
            raise ValueError("pdf is only defined for a non-degenerate Gaussian model")
        return self._truncnorm().pdf(lam)

    def sample(self, rng, size=None):
        if self.model == "empirical":
            return rng.choice(self.bin_centers, size=size, p=self.masses)
        if self.is_point_mass:
            return np.full(size, self.mean) if size is not None else self.mean
        return self._truncnorm().rvs(size=size, random_state=rng)

    def ks_distance(self, samples):
        """Kolmogorov-Smirnov distance between ``samples`` and this model."""
        return float(stats.kstest(np.asarray(samples), self.cdf).statistic)

    def to_csv(self, path):
        if self.model != "empirical":
            raise ValueError("only empirical histograms export to CSV")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda_bin_center", "probability_mass"])
            for c, p in zip(self.bin_centers, self.masses):
                w.writerow([f"{c:.10g}", f"{p:.10g}"])


def gaussian_model(n, k, q):
    """Gaussian approximation of the SP-rate law, truncated to [0, 1]."""
    return SpRateDistribution(n, k, q, sp_rate_mean(n, k, q), sp_rate_variance(n, k, q))


def sample_scattered_sfs(x, k, rng, max_attempts=10_000):
    """Pick ``k`` active SFs uniformly among 1-cells with distinct rows and columns.

    Whole draws are rejected until rows and columns are all distinct, so
    the result is uniform over valid patterns. Returns ``None`` when
    ``max_attempts`` draws all fail.
    """
    n = x.shape[0]
    if k == 0:
        return np.empty((0, 2), dtype=np.int64)
    ones = np.flatnonzero(x)
    if len(ones) < k:
        return None
    for _ in range(max_attempts):
        idx = ones[rng.integers(0, len(ones), size=k)]
        rows, cols = np.divmod(idx, n)
        if len(np.unique(rows)) == k and len(np.unique(cols)) == k:
            return np.column_stack([rows, cols])
    return None


def _batch_sp_rates(x, rows, cols):
    # x: (B, N, N) bool; rows/cols: (B, K) SF coordinates
    b = np.arange(x.shape[0])[:, None]
    col_vecs = x[b, :, cols]  # (B, K, N): x[:, j_k]
    row_vecs = x[b, rows, :]  # (B, K, N): x[i_k, :]
    covered = np.zeros_like(x)
    for kk in range(rows.shape[1]):
        covered |= col_vecs[:, kk, :, None] & row_vecs[:, kk, None, :]
    n_sp = np.count_nonzero(covered & ~x, axis=(1, 2))
    n_zero = np.count_nonzero(~x, axis=(1, 2))
    return n_sp / n_zero


def sample_sp_rates(n, k, q, samples, rng, batch=256):
    """Monte Carlo SP rates of random arrays with ``k`` scattered active SFs.

    Returns ``(rates, resampled)`` where ``resampled`` counts arrays that
    were redrawn because they had no 0-cells or admitted no valid SF set.
    """
    _check_args(n, k, q)
    rates = np.empty(samples)
    resampled = 0
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        x = rng.random((size, n, n)) < q
        rows = np.empty((size, k), dtype=np.int64)
        cols = np.empty((size, k), dtype=np.int64)
        keep = np.ones(size, dtype=bool)
        for b in range(size):
            sfs = sample_scattered_sfs(x[b], k, rng) if x[b].sum() < n * n else None
            if sfs is None:
                keep[b] = False
                continue
            rows[b], cols[b] = sfs[:, 0], sfs[:, 1]
        resampled += int((~keep).sum())
        got = _batch_sp_rates(x[keep], rows[keep], cols[keep])
        rates[done:done + len(got)] = got
        done += len(got)
    return rates, resampled


def empirical_distribution(n, k, q, samples, rng, bins=100):
    """Histogram of the SP rate over ``samples`` random arrays."""
    if samples < 1:
        raise ValueError("need at least one sample")
    rates, resampled = sample_sp_rates(n, k, q, samples, rng)
    lo, hi = rates.min(), rates.max()
    if hi == lo:
        centers, masses = np.array([lo]), np.array([1.0])
    else:
        counts, edges = np.histogram(rates, bins=bins, range=(lo, hi))
        centers = 0.5 * (edges[:-1] + edges[1:])
        masses = counts / counts.sum()
    return SpRateDistribution(
        n, k, q, float(rates.mean()), float(rates.var(ddof=1)) if samples > 1 else 0.0,
        model="empirical", bin_centers=centers, masses=masses, samples=rates,
        resampled=resampled,
    )
