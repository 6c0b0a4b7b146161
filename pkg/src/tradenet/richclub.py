"""Rich-club coefficients and their maximally random null models.

Clubs are threshold sets: nodes whose degree (or strength) is at least the
threshold. Undefined coefficients (club smaller than two) are NaN.

Null models:

* MRN -- degree-preserving link-end exchange. Two random links
  ``(a, b), (c, d)`` become ``(a, d), (c, b)`` unless that creates a
  self-loop or a parallel link.
* MRWN -- an MRN topology weighted so that every node recovers its
  original strength, by repeated proportional balancing
  ``w_ij += delta_i * w_ij / sum_j w_ij`` with ``delta_i = s_i - sum_j w_ij``.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (
    EmptyNetwork,
    InfeasibleStrengths,
    IsolatedPositiveStrength,
    NonConvergence,
    TooFewEdges,
    TradeNetError,
)
from .network import WeightedNetwork, degree_sequence, strength

DEFAULT_FRACTIONS = np.logspace(-4, 0, 100)


@dataclass
class RichClubCurve:
    thresholds: np.ndarray
    coefficient: np.ndarray
    club_size: np.ndarray

    def rows(self):
        return list(zip(self.thresholds.tolist(), self.coefficient.tolist(), self.club_size.tolist()))


@dataclass
class NullEnsembleResult:
    thresholds: np.ndarray
    original: np.ndarray
    club_size: np.ndarray
    null_mean: np.ndarray
    null_std: np.ndarray
    ensemble_size: int

    @property
    def rho(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = self.original / self.null_mean
        r[~np.isfinite(r)] = np.nan
        return r

    def rows(self):
        return list(zip(self.thresholds.tolist(), self.original.tolist(), self.club_size.tolist(),
                        self.null_mean.tolist(), self.rho.tolist()))


# ---------------------------------------------------------------- coefficients

def _club_curve(node_value, edge_key, edge_w, thresholds):
    """Club size, intra-club link count and weight for each threshold.

    A link lies inside the club at threshold t iff ``edge_key >= t``, where
    ``edge_key`` is the smaller endpoint value.
    """
    t = np.asarray(thresholds, dtype=float)
    nv = np.sort(node_value)
    size = nv.size - np.searchsorted(nv, t, side="left")
    order = np.argsort(edge_key)
    ek = edge_key[order]
    cw = np.concatenate([[0.0], np.cumsum(edge_w[order][::-1])])[::-1]
    pos = np.searchsorted(ek, t, side="left")
    n_in = ek.size - pos
    w_in = cw[pos]
    return size, n_in, w_in


def _density(x, size):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2.0 * x / (size * (size - 1.0))
    out[size < 2] = np.nan
    return out


def rich_club_curve(net: WeightedNetwork, degrees=None) -> RichClubCurve:
    """Unweighted coefficient ``phi(k) = 2 E_k / [n_k (n_k - 1)]``.

    ``degrees`` defaults to every realized degree value.
    """
    k = degree_sequence(net).astype(float)
    if degrees is None:
        degrees = np.unique(k)
    degrees = np.asarray(degrees, dtype=float)
    key = np.minimum(k[net.u], k[net.v])
    size, n_in, _ = _club_curve(k, key, np.ones(net.n_edges), degrees)
    return RichClubCurve(degrees, _density(n_in.astype(float), size), size)


def phi_unweighted(net: WeightedNetwork, k: float) -> float:
    return float(rich_club_curve(net, [k]).coefficient[0])


def weighted_rich_club_curve(net: WeightedNetwork, fractions=None, s=None) -> RichClubCurve:
    """Weighted coefficient ``R_w(s) = 2 W_s / [n_s (n_s - 1)]``.

    ``W_s`` sums each intra-club link once. Thresholds are given as
    fractions of the maximum strength (default: 100 log-spaced values in
    ``[1e-4, 1]``); the curve reports those fractions.
    """
    if s is None:
        s = strength(net)
    fractions = DEFAULT_FRACTIONS if fractions is None else np.asarray(fractions, dtype=float)
    smax = s.max() if s.size else 0.0
    key = np.minimum(s[net.u], s[net.v])
    size, _, w_in = _club_curve(s, key, net.w, fractions * smax)
    return RichClubCurve(fractions, _density(w_in, size), size)


def rw_weighted(net: WeightedNetwork, s_threshold: float) -> float:
    """``R_w`` for the club of nodes with strength >= ``s_threshold`` (absolute units)."""
    s = strength(net)
    key = np.minimum(s[net.u], s[net.v])
    size, _, w_in = _club_curve(s, key, net.w, [s_threshold])
    return float(_density(w_in, size)[0])


def fw_curve(net: WeightedNetwork, fractions=None) -> RichClubCurve:
    """Share of total weight carried inside the club, by ``s / s_max``."""
    if net.n_edges == 0:
        raise EmptyNetwork("network has no links")
    s = strength(net)
    fractions = DEFAULT_FRACTIONS if fractions is None else np.asarray(fractions, dtype=float)
    key = np.minimum(s[net.u], s[net.v])
    size, _, w_in = _club_curve(s, key, net.w, fractions * s.max())
    return RichClubCurve(fractions, w_in / net.w.sum(), size)


def fw_fraction(net: WeightedNetwork, s_threshold: float) -> float:
    """Fraction of total weight on links between nodes of strength >= ``s_threshold``."""
    if net.n_edges == 0:
        raise EmptyNetwork("network has no links")
    s = strength(net)
    key = np.minimum(s[net.u], s[net.v])
    _, _, w_in = _club_curve(s, key, net.w, [s_threshold])
    return float(w_in[0] / net.w.sum())


def half_trade_club_size(net: WeightedNetwork, share: float = 0.5) -> float:
    """Smallest strength club holding at least ``share`` of all trade, as a fraction of N.

    Candidate clubs are the threshold sets at each distinct strength value,
    so tied nodes join together.
    """
    if net.n_edges == 0:
        raise EmptyNetwork("network has no links")
    s = strength(net)
    levels = np.unique(s[s > 0])[::-1]
    key = np.minimum(s[net.u], s[net.v])
    size, _, w_in = _club_curve(s, key, net.w, levels)
    ok = np.flatnonzero(w_in >= share * net.w.sum())
    return float(size[ok[0]] / net.n_nodes)


def half_trade_threshold(net: WeightedNetwork, share: float = 0.5) -> float:
    """Largest ``s / s_max`` whose club still carries ``share`` of all trade."""
    s = strength(net)
    levels = np.unique(s[s > 0])[::-1]
    key = np.minimum(s[net.u], s[net.v])
    _, _, w_in = _club_curve(s, key, net.w, levels)
    ok = np.flatnonzero(w_in >= share * net.w.sum())
    return float(levels[ok[0]] / s.max())


# ----------------------------------------------------------------- null models

@njit(cache=True, nogil=True)
def _exchange_link_ends(eu, ev, adj, rng, n_accept, max_attempts):
    L = eu.size
    done = 0
    attempts = 0
    while done < n_accept and attempts < max_attempts:
        attempts += 1
        e1 = rng.integers(0, L)
        e2 = rng.integers(0, L)
        if e1 == e2:
            continue
        a = eu[e1]
        b = ev[e1]
        c = eu[e2]
        d = ev[e2]
        if rng.random() < 0.5:
            c, d = d, c
        if a == d or c == b or adj[a, d] or adj[c, b]:
            continue
        adj[a, b] = False
        adj[b, a] = False
        adj[c, d] = False
        adj[d, c] = False
        adj[a, d] = True
        adj[d, a] = True
        adj[c, b] = True
        adj[b, c] = True
        eu[e1] = a
        ev[e1] = d
        eu[e2] = c
        ev[e2] = b
        done += 1
    return done, attempts


def generate_mrn(net: WeightedNetwork, rng_seed=None, swap_factor: float = 10,
                 max_attempts: int | None = None) -> WeightedNetwork:
    """Degree-preserving randomization by link-end exchange.

    Performs ``swap_factor * L`` accepted exchanges (attempts capped at
    ``max_attempts``, default 100 per requested swap). The result carries
    placeholder unit weights; use :func:`generate_mrwn` to weight it.
    """
    L = net.n_edges
    if L < 2:
        raise TooFewEdges(f"link-end exchange needs >= 2 links, got {L}")
    rng = np.random.default_rng(rng_seed)
    n_accept = int(round(swap_factor * L))
    if max_attempts is None:
        max_attempts = 100 * n_accept + 1000
    eu = net.u.copy()
    ev = net.v.copy()
    adj = net.adjacency_matrix()
    done, attempts = _exchange_link_ends(eu, ev, adj, rng, n_accept, int(max_attempts))
    if done < n_accept:
        warnings.warn(f"only {done}/{n_accept} link-end exchanges accepted in {attempts} attempts",
                      RuntimeWarning, stacklevel=2)
    return WeightedNetwork(net.n_nodes, eu, ev, np.ones(L), net.labels)


@njit(cache=True, nogil=True)
def _node_sums(indptr, eid, w, out):
    for i in range(out.size):
        t = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            t += w[eid[p]]
        out[i] = t


@njit(cache=True, nogil=True)
def _balance(indptr, eid, w, s, tol, floor, max_sweeps):
    n = s.size
    sums = np.empty(n)
    res = np.inf
    for sweep in range(1, max_sweeps + 1):
        for i in range(n):
            tot = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                tot += w[eid[p]]
            if tot > 0.0:
                delta = s[i] - tot
                for p in range(indptr[i], indptr[i + 1]):
                    e = eid[p]
                    w[e] = w[e] + delta * (w[e] / tot)
        _node_sums(indptr, eid, w, sums)
        res = 0.0
        for i in range(n):
            r = abs(s[i] - sums[i]) / max(s[i], floor)
            if r > res:
                res = r
        for e in range(w.size):
            if not w[e] > 0.0:
                return -sweep, res
        if res < tol:
            return sweep, res
    return max_sweeps + 1, res


def generate_mrwn(topology: WeightedNetwork, target_strengths, rng_seed=None, tol: float = 1e-10,
                  max_sweeps: int = 100_000, floor: float = 1e-12, return_sweeps: bool = False):
    """Weight ``topology`` so node strengths match ``target_strengths``.

    Initial weights are uniform on (0, 1]; nodes are balanced in ascending
    id order each sweep until the largest relative strength residual drops
    below ``tol``. Raises NonConvergence when ``max_sweeps`` runs out.
    """
    s = np.asarray(target_strengths, dtype=float)
    if s.shape != (topology.n_nodes,):
        raise TradeNetError(f"expected {topology.n_nodes} target strengths, got {s.shape}")
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise InfeasibleStrengths("target strengths must be finite and non-negative")
    k = degree_sequence(topology)
    lonely = np.flatnonzero((k == 0) & (s > 0))
    if lonely.size:
        raise IsolatedPositiveStrength(f"node {lonely[0]} has positive target strength but no links")
    starved = np.flatnonzero((k > 0) & (s <= 0))
    if starved.size:
        raise InfeasibleStrengths(f"node {starved[0]} has links but zero target strength")
    rng = np.random.default_rng(rng_seed)
    # 1 - U[0,1) lies in (0, 1]
    w = 1.0 - rng.random(topology.n_edges)
    indptr, _, eid = topology.csr
    sweeps, res = _balance(indptr, eid, w, s, float(tol), float(floor), int(max_sweeps))
    if sweeps < 0:
        raise InfeasibleStrengths(f"weights lost positivity in sweep {-sweeps}")
    if sweeps > max_sweeps:
        raise NonConvergence(f"strength residual {res:.3g} after {max_sweeps} sweeps",
                             residual=res, sweeps=max_sweeps)
    out = topology.with_weights(w)
    return (out, sweeps) if return_sweeps else out


def adjacency_difference(a: WeightedNetwork, b: WeightedNetwork) -> float:
    """Fraction of the links of ``a`` that are absent from ``b``."""
    if a.n_edges == 0:
        return 0.0
    ea = set(zip(a.u.tolist(), a.v.tolist()))
    eb = set(zip(b.u.tolist(), b.v.tolist()))
    return len(ea - eb) / len(ea)


# -------------------------------------------------------------------- ensemble

def _member(net, s, k, seed, swap_factor, degrees, fractions, tol, max_sweeps):
    rng = np.random.default_rng(seed)
    mrn = generate_mrn(net, rng, swap_factor)
    if not np.array_equal(degree_sequence(mrn), k):
        raise AssertionError("MRN changed the degree sequence")
    phi = rich_club_curve(mrn, degrees).coefficient
    mrwn = generate_mrwn(mrn, s, rng, tol=tol, max_sweeps=max_sweeps)
    resid = np.abs(strength(mrwn) - s) / np.maximum(s, 1e-12)
    if resid.max() >= max(tol, 1e-12) * 10:
        raise AssertionError(f"MRWN strength residual {resid.max():.3g}")
    rw = weighted_rich_club_curve(mrwn, fractions, s=s).coefficient
    return phi, rw


def null_ensemble_curves(net: WeightedNetwork, ensemble_size: int, seed=0, swap_factor: float = 10,
                         degrees=None, fractions=None, threads: int | None = None,
                         tol: float = 1e-10, max_sweeps: int = 100_000):
    """Ensemble means of ``phi`` over MRNs and ``R_w`` over MRWNs.

    Each member gets its own RNG stream spawned from ``seed``. Returns
    ``(unweighted, weighted)`` NullEnsembleResult objects; their ``rho``
    is original / null mean.
    """
    if ensemble_size < 1:
        raise TradeNetError("ensemble_size must be >= 1")
    s = strength(net)
    k = degree_sequence(net)
    phi0 = rich_club_curve(net, degrees)
    rw0 = weighted_rich_club_curve(net, fractions, s=s)
    children = np.random.SeedSequence(seed).spawn(ensemble_size)
    args = (swap_factor, phi0.thresholds, rw0.thresholds, tol, max_sweeps)
    if threads is None or threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            members = list(pool.map(lambda c: _member(net, s, k, c, *args), children))
    else:
        members = [_member(net, s, k, c, *args) for c in children]
    phis = np.array([p for p, _ in members])
    rws = np.array([r for _, r in members])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        un = NullEnsembleResult(phi0.thresholds, phi0.coefficient, phi0.club_size,
                                np.nanmean(phis, axis=0), np.nanstd(phis, axis=0), ensemble_size)
        wt = NullEnsembleResult(rw0.thresholds, rw0.coefficient, rw0.club_size,
                                np.nanmean(rws, axis=0), np.nanstd(rws, axis=0), ensemble_size)
    return un, wt
