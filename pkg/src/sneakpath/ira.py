"""Systematic IRA codes: graph construction, accumulator encoding, BP decoding.

Codewords are ``info || parity``. Check ``j`` ties ``dc`` info bits to
parities ``p_j`` and ``p_{j-1}`` (the first check has no predecessor).
"""
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .de import ira_distributions

log = logging.getLogger(__name__)

LLR_CLIP = 30.0
RATE_DRIFT_MAX = 1e-3


@dataclass(frozen=True)
class IraProfile:
    """Rate, check degree and edge-perspective info-degree fractions ``{d: a_d}``."""

    rate: float
    dc: int
    degrees: dict
    seed: int = 0
    lam: float = None

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise ValueError(f"rate must be in (0, 1), got {self.rate}")
        if self.dc < 1:
            raise ValueError("dc must be >= 1")
        a = np.array(list(self.degrees.values()), dtype=float)
        if (a < 0).any() or abs(a.sum() - 1.0) > 1e-9:
            raise ValueError("edge fractions must be non-negative and sum to 1")
        if any(int(d) < 1 for d in self.degrees):
            raise ValueError("degrees must be >= 1")
        target = self.rate / ((1 - self.rate) * self.dc)
        got = sum(a_d / d for d, a_d in self.degrees.items())
        if abs(got - target) > 1e-6:
            raise ValueError(f"sum a_d/d = {got:.8f} but rate {self.rate} with dc={self.dc} needs {target:.8f}")

    @classmethod
    def from_node_fractions(cls, rate, dc, nodes, **kw):
        """Build from node-perspective fractions ``{d: nu_d}``."""
        tot = sum(nu * d for d, nu in nodes.items())
        return cls(rate, dc, {d: nu * d / tot for d, nu in nodes.items()}, **kw)

    def node_fractions(self):
        w = {d: a / d for d, a in self.degrees.items()}
        tot = sum(w.values())
        return {d: v / tot for d, v in w.items()}

    def mean_degree(self):
        """Node-average info degree ``(sum a_d/d)^-1``."""
        return 1.0 / sum(a / d for d, a in self.degrees.items())

    def de_distributions(self, ira_aware=True):
        return ira_distributions(self.degrees, self.dc, ira_aware)

    def to_dict(self, n=None):
        out = {
            "rate": self.rate,
            "dc": self.dc,
            "degrees": [{"d": int(d), "a": float(a)} for d, a in sorted(self.degrees.items())],
            "seed": self.seed,
        }
        if n is not None:
            out["n"] = n
        if self.lam is not None:
            out["lambda"] = self.lam
        return out

    @classmethod
    def from_dict(cls, obj):
        try:
            degrees = {int(e["d"]): float(e["a"]) for e in obj["degrees"]}
            return cls(float(obj["rate"]), int(obj["dc"]), degrees,
                       int(obj.get("seed", 0)), obj.get("lambda"))
        except KeyError as exc:
            raise ValueError(f"code file is missing field {exc}") from None


def load_code(path):
    """Read a code file; returns ``(profile, n)``."""
    with open(path) as fh:
        obj = json.load(fh)
    if "n" not in obj:
        raise ValueError("code file is missing field 'n'")
    return IraProfile.from_dict(obj), int(obj["n"])


def save_code(path, profile, n):
    with open(path, "w") as fh:
        json.dump(profile.to_dict(n), fh, indent=2)


@dataclass
class IraGraph:
    k: int
    m: int
    dc: int
    check_info: np.ndarray  # (m, dc) info-bit neighbours of each check
    adjusted: int = 0
    _edges: np.ndarray = field(default=None, init=False, repr=False)
    _gather: sparse.csr_matrix = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.check_info = np.asarray(self.check_info, dtype=np.int64)
        if self.check_info.shape != (self.m, self.dc):
            raise ValueError(f"check_info must have shape ({self.m}, {self.dc})")
        if self.m and (self.check_info.min() < 0 or self.check_info.max() >= self.k):
            raise ValueError("info neighbour index out of range")

    @property
    def n(self):
        return self.k + self.m

    @property
    def rate(self):
        return self.k / self.n

    def info_degrees(self):
        return np.bincount(self.check_info.ravel(), minlength=self.k)

    @property
    def edges(self):
        """``(m, dc + 2)`` variable indices per check; index ``n`` is a known-zero dummy."""
        if self._edges is None:
            par = self.k + np.arange(self.m)
            prev = np.concatenate([[self.n], par[:-1]])
            self._edges = np.column_stack([self.check_info, par, prev])
        return self._edges

    @property
    def gather(self):
        """Sparse ``(n + 1, edges)`` incidence summing check-major messages per variable."""
        if self._gather is None:
            e = self.edges.T.ravel()
            self._gather = sparse.csr_matrix(
                (np.ones(e.size), (e, np.arange(e.size))), shape=(self.n + 1, e.size)
            )
        return self._gather


def _largest_remainder(total, fractions):
    raw = total * np.asarray(fractions, dtype=float)
    counts = np.floor(raw).astype(np.int64)
    short = total - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def _rebalance(counts, degs, edges):
    """Shift whole nodes between degree classes so the edge total hits ``edges``.

    Searches offsets of up to ``max(degs)`` nodes per class (all classes
    but the first, which absorbs the node balance) and keeps the one
    moving the fewest edges. Returns ``counts`` unchanged if nothing fits.
    """
    diff = edges - int(np.dot(counts, degs))
    if diff == 0 or len(degs) < 2 or len(degs) > 4:
        return counts
    reach = int(degs.max())
    grid = np.array(np.meshgrid(*[np.arange(-reach, reach + 1)] * (len(degs) - 1), indexing="ij"))
    grid = grid.reshape(len(degs) - 1, -1).T
    delta = np.column_stack([-grid.sum(axis=1), grid])
    ok = (delta @ degs == diff) & ((counts + delta) >= 0).all(axis=1)
    if not ok.any():
        return counts
    delta = delta[ok]
    cost = np.abs(delta * degs).sum(axis=1)
    return counts + delta[np.argmin(cost)]


def _remove_repeats(sockets, dc, rng):
    """One greedy pass swapping sockets so no check sees an info bit twice."""
    table = sockets.reshape(-1, dc)
    m = table.shape[0]
    for j in range(m):
        row = table[j]
        _, idx, cnt = np.unique(row, return_index=True, return_counts=True)
        if (cnt == 1).all():
            continue
        seen = set()
        for pos in range(dc):
            v = row[pos]
            if v not in seen:
                seen.add(v)
                continue
            for _ in range(100):
                j2 = int(rng.integers(m))
                pos2 = int(rng.integers(dc))
                w = table[j2, pos2]
                if j2 != j and w not in seen and v not in table[j2]:
                    table[j, pos], table[j2, pos2] = w, v
                    seen.add(w)
                    break
    return table


def build_graph(profile, length, seed=None):
    """Random IRA graph with ``length`` code bits, deterministic in ``seed``.

    Node degrees come from largest-remainder rounding of the node
    fractions, then whole nodes move between classes until the edge total
    is exactly ``m * dc``. If no such move exists the highest-degree nodes
    are nudged by one each and their count is kept in ``adjusted``.
    """
    seed = profile.seed if seed is None else seed
    k = int(round(profile.rate * length))
    m = length - k
    if k < 1 or m < 1:
        raise ValueError(f"length {length} too short for rate {profile.rate}")
    if abs(k / length - profile.rate) > RATE_DRIFT_MAX * profile.rate:
        raise ValueError(f"realized rate {k / length:.6f} drifts more than 0.1% from {profile.rate}")
    nodes = profile.node_fractions()
    degs = np.array(sorted(nodes))
    counts = _rebalance(_largest_remainder(k, [nodes[d] for d in degs]), degs, m * profile.dc)
    node_deg = np.repeat(degs, counts)
    diff = m * profile.dc - int(node_deg.sum())
    adjusted = 0
    if diff:
        # last resort: nudge the highest-degree nodes by one each
        step = 1 if diff > 0 else -1
        order = np.argsort(-node_deg, kind="stable")
        for v in order[: abs(diff)]:
            node_deg[v] += step
        adjusted = abs(diff)
        log.info("adjusted %d node degrees by %+d to fit %d edges", adjusted, step, m * profile.dc)
    rng = np.random.default_rng(seed)
    sockets = rng.permutation(np.repeat(np.arange(k), node_deg))
    table = _remove_repeats(sockets, profile.dc, rng)
    return IraGraph(k, m, profile.dc, table, adjusted)


def encode(graph, info):
    """Systematic encoding; ``info`` is ``(k,)`` or a batch ``(B, k)`` of bits."""
    info = np.asarray(info, dtype=np.uint8)
    single = info.ndim == 1
    u = np.atleast_2d(info)
    if u.shape[1] != graph.k:
        raise ValueError(f"expected {graph.k} info bits, got {u.shape[1]}")
    s = np.bitwise_xor.reduce(u[:, graph.check_info], axis=2)
    parity = (np.cumsum(s, axis=1) & 1).astype(np.uint8)
    cw = np.concatenate([u, parity], axis=1)
    return cw[0] if single else cw


def syndrome(graph, bits):
    """Per-check parity of hard decisions, shape ``(B, m)``."""
    b = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    padded = np.concatenate([b, np.zeros((b.shape[0], 1), np.uint8)], axis=1)
    return np.bitwise_xor.reduce(padded[:, graph.edges], axis=2)


def _check_messages(v2c, lim):
    """Tanh rule over axis 1 of ``(B, D, m)`` messages, leave-one-out by division."""
    t = np.tanh(0.5 * v2c)
    tiny = np.float32(1e-12)
    t = np.where(np.abs(t) < tiny, np.copysign(tiny, t), t)
    prod = t[:, 0].copy()
    for d in range(1, t.shape[1]):
        prod *= t[:, d]
    out = prod[:, None, :] / t
    np.clip(out, -lim, lim, out=out)
    return 2.0 * np.arctanh(out)


def bp_decode(graph, llrs, max_iters=100):
    """Flooding sum-product decoding; positive LLR means bit 0.

    ``llrs`` is ``(n,)`` or ``(B, n)``. Returns ``(bits, converged, iters)``;
    each word stops at its first zero syndrome. Messages are float32.
    """
    llrs = np.asarray(llrs, dtype=float)
    single = llrs.ndim == 1
    L = np.atleast_2d(llrs)
    if L.shape[1] != graph.n:
        raise ValueError(f"expected {graph.n} LLRs, got {L.shape[1]}")
    if not np.isfinite(L).all():
        raise ValueError("LLRs must be finite")
    B = L.shape[0]
    L = np.concatenate([np.clip(L, -LLR_CLIP, LLR_CLIP), np.full((B, 1), LLR_CLIP)], axis=1)
    L = L.astype(np.float32)
    et, A = graph.edges.T, graph.gather
    bits = (L[:, : graph.n] < 0).astype(np.uint8)
    converged = ~syndrome(graph, bits).any(axis=1)
    iters = np.zeros(B, dtype=np.int64)
    active = np.flatnonzero(~converged)
    c2v = np.zeros((len(active),) + et.shape, dtype=np.float32)
    total = L[active]
    lim = np.float32(1 - 2 ** -20)  # caps check messages near 29 nats
    for it in range(1, max_iters + 1):
        if not len(active):
            break
        v2c = total[:, et] - c2v
        np.clip(v2c, -LLR_CLIP, LLR_CLIP, out=v2c)
        c2v = _check_messages(v2c, lim)
        total = L[active] + (A @ c2v.reshape(len(active), -1).T).T.astype(np.float32)
        hard = (total[:, : graph.n] < 0).astype(np.uint8)
        bits[active] = hard
        iters[active] = it
        ok = ~syndrome(graph, hard).any(axis=1)
        converged[active[ok]] = True
        active, c2v, total = active[~ok], c2v[~ok], total[~ok]
    if single:
        return bits[0], bool(converged[0]), int(iters[0])
    return bits, converged, iters
