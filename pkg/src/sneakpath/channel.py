"""ReRAM crossbar channel: sneak paths, noisy readback, per-cell LLRs.

Arrays are numpy ``(N, N)`` arrays indexed from 0. Selector-failure
coordinates are ``(K, 2)`` integer arrays of ``(row, col)`` pairs.
"""
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

HRS, LRS, SP = "HRS", "LRS", "SP"


def effective_hrs_resistance(r0, rs):
    """Resistance of an HRS cell shunted by a sneak path, ``(1/r0 + 1/rs)^-1``."""
    if r0 <= 0 or rs <= 0:
        raise ValueError(f"resistances must be positive, got r0={r0}, rs={rs}")
    return 1.0 / (1.0 / r0 + 1.0 / rs)


@dataclass(frozen=True)
class ChannelParams:
    r0: float = 1000.0
    r1: float = 100.0
    rs: float = 250.0
    sigma: float = 30.0
    r0_prime: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        r0p = effective_hrs_resistance(self.r0, self.rs)
        if not self.r0 > r0p > self.r1 > 0:
            raise ValueError("need r0 > r0' > r1 > 0")
        object.__setattr__(self, "r0_prime", r0p)

    def with_sigma(self, sigma):
        return ChannelParams(self.r0, self.r1, self.rs, sigma)

    @property
    def gamma(self):
        """Half the LRS/SP level gap in noise units, ``(R0' - R1) / (2 sigma)``."""
        return (self.r0_prime - self.r1) / (2.0 * self.sigma)


def check_data_array(data):
    data = np.asarray(data)
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise ValueError(f"data array must be square, got shape {data.shape}")
    if not np.isin(data, (0, 1)).all():
        raise ValueError("data array entries must be 0 or 1")
    return data.astype(bool)


def check_sf_pattern(coords, n, scattered=False):
    """Validate selector-failure coordinates (0-based) and return a ``(K, 2)`` array."""
    coords = np.asarray(coords, dtype=np.int64).reshape(-1, 2)
    if coords.size and (coords.min() < 0 or coords.max() >= n):
        raise ValueError(f"SF coordinates must lie in [0, {n})")
    if len({tuple(c) for c in coords}) != len(coords):
        raise ValueError("duplicate SF coordinates")
    if scattered and (
        len(set(coords[:, 0])) != len(coords) or len(set(coords[:, 1])) != len(coords)
    ):
        raise ValueError("scattered SF pattern needs distinct rows and columns")
    return coords


def apply_sneak_paths(data, active_sfs):
    """Boolean mask of SP cells.

    Cell ``(m, n)`` is an SP cell iff it stores 0 and some active SF at
    ``(i, j)`` closes the loop ``x[m, j] = x[i, j] = x[i, n] = 1``.
    """
    x = check_data_array(data)
    sfs = check_sf_pattern(active_sfs, x.shape[0])
    if len(sfs) and not x[sfs[:, 0], sfs[:, 1]].all():
        raise ValueError("every SF passed must sit on a 1-cell (active SF)")
    covered = np.zeros_like(x)
    for i, j in sfs:
        covered |= np.outer(x[:, j], x[i, :])
    return covered & ~x


def read_array(data, active_sfs, params, rng):
    """Noisy resistance readback of the whole array."""
    x = check_data_array(data)
    sp = apply_sneak_paths(x, active_sfs)
    levels = np.where(x, params.r1, np.where(sp, params.r0_prime, params.r0))
    return levels + rng.normal(0.0, params.sigma, size=x.shape)


def _log_gauss(y, mean, sigma):
    # the 1/sqrt(2 pi) sigma factor cancels in every ratio used here
    return -((y - mean) ** 2) / (2.0 * sigma * sigma)


def cell_llr(y, lam, q, params):
    """LLR ``log P(x=0|y) / P(x=1|y)`` under a common SP rate ``lam``.

    Positive favours bit 0. Works elementwise on arrays.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be in (0, 1), got {q}")
    y = np.asarray(y, dtype=float)
    s = params.sigma
    with np.errstate(divide="ignore"):
        log_lam, log_1mlam = np.log(lam), np.log1p(-lam)
    num = np.logaddexp(
        log_lam + _log_gauss(y, params.r0_prime, s),
        log_1mlam + _log_gauss(y, params.r0, s),
    )
    return np.log1p(-q) - np.log(q) + num - _log_gauss(y, params.r1, s)


def hard_decisions(y, params):
    """Nearest-level labels: 0 for R1, 1 for R0', 2 for R0.

    Values exactly on a decision boundary go to the lower-resistance level.
    """
    y = np.asarray(y, dtype=float)
    lo = 0.5 * (params.r1 + params.r0_prime)
    hi = 0.5 * (params.r0_prime + params.r0)
    return np.where(y <= lo, 0, np.where(y <= hi, 1, 2))


def estimate_sp_rate(y, params):
    """Hard-decision SP-rate estimate ``n_R0' / (n_R0' + n_R0)``.

    Returns 0 when no cell is read in either HRS band: without HRS-band
    observations there is no evidence of sneak paths.
    """
    labels = hard_decisions(y, params)
    n_sp = int(np.count_nonzero(labels == 1))
    n_hrs = int(np.count_nonzero(labels == 2))
    if n_sp + n_hrs == 0:
        return 0.0
    return n_sp / (n_sp + n_hrs)


def llr_moment_model(cell_kind, lam, q, params):
    """Gaussian (mean, variance) of the channel LLR for one cell kind.

    For ``LRS`` the moments are those of ``-L`` so all three kinds share
    the data-favouring sign.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("LLR moments need 0 < lambda < 1")
    s2 = params.sigma ** 2
    if cell_kind == HRS:
        gap2 = (params.r0 - params.r1) ** 2
        return gap2 / (2 * s2) - np.log(q / ((1 - q) * (1 - lam))), gap2 / s2
    gap2 = (params.r0_prime - params.r1) ** 2
    shift = np.log(q / (lam * (1 - q)))
    if cell_kind == LRS:
        return gap2 / (2 * s2) + shift, gap2 / s2
    if cell_kind == SP:
        return gap2 / (2 * s2) - shift, gap2 / s2
    raise ValueError(f"unknown cell kind {cell_kind!r}")


class SneakPathLLR(TransformerMixin, BaseEstimator):
    """Map readback resistances to per-cell LLRs.

    ``fit`` estimates the array's SP rate from hard decisions unless
    ``sp_rate`` is given; ``transform`` returns LLRs of the same shape.

    Parameters
    ----------
    sigma : float
        Read-noise standard deviation in ohms.
    q : float
        Prior probability of a stored 1.
    sp_rate : float or None
        Fixed SP rate; ``None`` means estimate it in ``fit``.
    """

    def __init__(self, sigma=30.0, q=0.5, sp_rate=None, r0=1000.0, r1=100.0, rs=250.0):
        self.sigma = sigma
        self.q = q
        self.sp_rate = sp_rate
        self.r0 = r0
        self.r1 = r1
        self.rs = rs

    def _params(self):
        return ChannelParams(self.r0, self.r1, self.rs, self.sigma)

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=False)
        params = self._params()
        self.params_ = params
        if self.sp_rate is None:
            self.sp_rate_ = estimate_sp_rate(X, params)
        else:
            self.sp_rate_ = float(self.sp_rate)
        return self

    def transform(self, X):
        check_is_fitted(self, "sp_rate_")
        X = check_array(X, ensure_2d=False)
        return cell_llr(X, self.sp_rate_, self.q, self.params_)
