"""Gravity-law exchange dynamics producing synthetic trade networks.

N countries sit at random points of the unit square with GDP shares ``m``
summing to one. Each transaction picks a random pair, both sides invest
their gravity flow, the pooled investment is split at a random fraction,
debt is forbidden (a country short of funds is topped up), and all shares
are renormalized. Links are recorded after the second moment of ``m`` has
settled, until a target number of distinct links exists.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import BudgetExhausted, CoincidentPoints, TradeNetError
from .network import WeightedNetwork, link_density, mean_link_weight
from .report import AnalysisReport
from .scaling import collapse_curve, parabola_gof, strength_correlation_exponent, tail_exponent

log = logging.getLogger(__name__)


@dataclass
class SimConfig:
    n_countries: int = 187
    alpha: float = 0.5
    beta: float = 1.0
    theta: float = 0.5
    target_density: float = 0.59
    # overrides target_density when set
    target_links: int | None = None
    seed: int = 0
    # default 1000 * n_countries transactions
    burn_in_window: int | None = None
    drift_tol: float = 0.05
    max_transactions: int = 2_000_000_000
    periodic: bool = False

    def validate(self) -> "SimConfig":
        if int(self.n_countries) < 2:
            raise TradeNetError(f"n_countries must be >= 2, got {self.n_countries}")
        for name in ("alpha", "beta", "theta", "drift_tol"):
            if not math.isfinite(getattr(self, name)):
                raise TradeNetError(f"{name} must be finite")
        if not 0 < self.target_density <= 1:
            raise TradeNetError(f"target_density must lie in (0, 1], got {self.target_density}")
        if self.target_links is not None and not 1 <= self.target_links <= self.n_pairs:
            raise TradeNetError(f"target_links must lie in [1, {self.n_pairs}], got {self.target_links}")
        if self.burn_in_window is not None and self.burn_in_window < 1:
            raise TradeNetError("burn_in_window must be >= 1")
        if self.max_transactions < 0:
            raise TradeNetError("max_transactions must be >= 0")
        return self

    @property
    def n_pairs(self) -> int:
        return self.n_countries * (self.n_countries - 1) // 2

    @property
    def window(self) -> int:
        return self.burn_in_window or 1000 * self.n_countries

    def link_target(self) -> int:
        if self.target_links is not None:
            return int(self.target_links)
        return min(self.n_pairs, math.ceil(self.target_density * self.n_pairs - 1e-9))

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        aliases = {"n": "n_countries", "N": "n_countries"}
        names = {f.name for f in dataclasses.fields(cls)}
        kw = {}
        for k, v in d.items():
            k = aliases.get(k, k)
            if k not in names:
                raise TradeNetError(f"unknown config key {k!r}")
            kw[k] = v
        return cls(**kw)

    @classmethod
    def from_json(cls, path) -> "SimConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class TransactionOutcome:
    i: int
    j: int
    F_ij: float
    F_ji: float
    F_tilde: float
    epsilon: float
    delta_i: float
    delta_j: float


@dataclass
class SimState:
    config: SimConfig
    positions: np.ndarray
    m: np.ndarray
    # distance kernel l_ik^-theta, zero diagonal
    kernel: np.ndarray
    rng: np.random.Generator
    weights: np.ndarray = None
    counts: np.ndarray = None
    n_links: int = 0
    t: int = 0
    invested: float = 0.0
    trace: list = field(default_factory=list)
    stationary_at: int | None = None

    def __post_init__(self):
        n = self.m.size
        if self.weights is None:
            self.weights = np.zeros((n, n))
        if self.counts is None:
            self.counts = np.zeros((n, n), dtype=np.int64)

    @property
    def n(self) -> int:
        return self.m.size

    def reset_links(self):
        self.weights[:] = 0.0
        self.counts[:] = 0
        self.n_links = 0
        self.invested = 0.0

    def mean_m2(self) -> float:
        return float(np.mean(self.m ** 2))


def pair_distances(positions: np.ndarray, periodic: bool = False) -> np.ndarray:
    d = np.abs(positions[:, None, :] - positions[None, :, :])
    if periodic:
        d = np.minimum(d, 1.0 - d)
    return np.sqrt((d ** 2).sum(-1))


def distance_kernel(positions: np.ndarray, theta: float, periodic: bool = False) -> np.ndarray:
    dist = pair_distances(positions, periodic)
    off = ~np.eye(len(positions), dtype=bool)
    if np.any(dist[off] == 0):
        i, j = np.argwhere((dist == 0) & off)[0]
        raise CoincidentPoints(f"countries {i} and {j} share a position")
    k = np.zeros_like(dist)
    k[off] = dist[off] ** (-theta)
    return k


def init_world(config: SimConfig) -> SimState:
    """Random positions in the unit square and uniform random GDP shares."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n_countries
    pos = rng.random((n, 2))
    # coincident points are redrawn
    while True:
        dist = pair_distances(pos, config.periodic)
        np.fill_diagonal(dist, np.inf)
        clash = np.flatnonzero((dist == 0).any(axis=1))
        if clash.size == 0:
            break
        pos[clash[1:]] = rng.random((clash.size - 1, 2))
    m = rng.random(n)
    m /= m.sum()
    kernel = distance_kernel(pos, config.theta, config.periodic)
    return SimState(config=config, positions=pos, m=m, kernel=kernel, rng=rng)


def gravity_flow(state: SimState, i: int, j: int) -> float:
    """Investment of country ``i`` towards ``j``.

    ``F_ij = m_i^a * (m_j^b / l_ij^t) / sum_{k != i} (m_k^b / l_ik^t)``;
    the denominator is centered on ``i`` so ``F_ij != F_ji`` in general.
    """
    if i == j:
        raise TradeNetError("gravity flow needs i != j")
    if not np.all(np.isfinite(state.kernel[i])):
        raise CoincidentPoints(f"country {i} coincides with another")
    cfg = state.config
    mb = state.m ** cfg.beta
    return float(_flow(state.m, mb, state.kernel, cfg.alpha, i, j))


@njit(cache=True, nogil=True)
def _denominator(mb, kernel, i):
    d = 0.0
    for k in range(mb.size):
        d += kernel[i, k] * mb[k]
    return d


@njit(cache=True, nogil=True)
def _flow(m, mb, kernel, alpha, i, j):
    d = _denominator(mb, kernel, i)
    if d <= 0.0:
        return 0.0
    # ratio <= 1 keeps F_ij <= m_i^alpha exact in floating point
    return m[i] ** alpha * ((kernel[i, j] * mb[j]) / d)


@njit(cache=True, nogil=True)
def _apply(m, i, j, Fij, Fji, eps):
    Ft = Fij + Fji
    mi = m[i]
    mj = m[j]
    di = Fij - mi if Fij > mi else 0.0
    dj = Fji - mj if Fji > mj else 0.0
    m[i] = (mi - Fij + di) + eps * Ft
    m[j] = (mj - Fji + dj) + (1.0 - eps) * Ft
    s = 0.0
    for k in range(m.size):
        s += m[k]
    for k in range(m.size):
        m[k] /= s
    return Ft, di, dj


@njit(cache=True, nogil=True)
def _run(m, kernel, alpha, beta, rng, n_steps, weights, counts, n_links, stop_links,
         record, check, stats):
    """Run up to ``n_steps`` random transactions.

    Stops early once ``n_links >= stop_links`` (pass -1 to disable).
    ``stats``: [sum of mean m^2 over steps, invested total, sum-violations,
    negativity violations, flow-bound violations, max |sum m - 1|].
    """
    n = m.size
    mb = np.empty(n)
    done = 0
    while done < n_steps:
        if stop_links >= 0 and n_links >= stop_links:
            break
        i = rng.integers(0, n)
        j = rng.integers(0, n - 1)
        if j >= i:
            j += 1
        if beta == 1.0:
            for k in range(n):
                mb[k] = m[k]
        else:
            for k in range(n):
                mb[k] = m[k] ** beta
        Fij = _flow(m, mb, kernel, alpha, i, j)
        Fji = _flow(m, mb, kernel, alpha, j, i)
        if check:
            if Fij > m[i] ** alpha:
                stats[4] += 1
            if Fji > m[j] ** alpha:
                stats[4] += 1
        eps = rng.random()
        Ft, di, dj = _apply(m, i, j, Fij, Fji, eps)
        if record:
            a = min(i, j)
            b = max(i, j)
            if counts[a, b] == 0:
                n_links += 1
            counts[a, b] += 1
            weights[a, b] += Ft
            stats[1] += Ft
        m2 = 0.0
        tot = 0.0
        neg = False
        for k in range(n):
            m2 += m[k] * m[k]
            tot += m[k]
            if m[k] < 0.0:
                neg = True
        stats[0] += m2 / n
        if check:
            err = abs(tot - 1.0)
            if err > stats[5]:
                stats[5] = err
            if err > 1e-12:
                stats[2] += 1
            if neg:
                stats[3] += 1
        done += 1
    return done, n_links


def _stats():
    return np.zeros(6)


def run_transactions(state: SimState, n_steps: int, record: bool = True, stop_links: int = -1,
                     check: bool = False, stats: np.ndarray | None = None):
    """Advance the dynamics by up to ``n_steps`` transactions.

    Returns ``(steps_done, stats)``; see ``_run`` for the stats layout.
    """
    cfg = state.config
    if stats is None:
        stats = _stats()
    invested0 = stats[1]
    done, state.n_links = _run(state.m, state.kernel, float(cfg.alpha), float(cfg.beta), state.rng,
                               int(n_steps), state.weights, state.counts, int(state.n_links),
                               int(stop_links), bool(record), bool(check), stats)
    state.t += int(done)
    state.invested += float(stats[1] - invested0)
    return int(done), stats


def transact(state: SimState, i: int, j: int, epsilon: float | None = None) -> TransactionOutcome:
    """One transaction between ``i`` and ``j`` (mutates ``state``).

    Flows come from the pre-transaction shares. ``epsilon`` is drawn from
    the state's RNG unless forced.
    """
    if i == j:
        raise TradeNetError("transaction needs i != j")
    cfg = state.config
    mb = state.m ** cfg.beta
    Fij = float(_flow(state.m, mb, state.kernel, cfg.alpha, i, j))
    Fji = float(_flow(state.m, mb, state.kernel, cfg.alpha, j, i))
    eps = float(state.rng.random()) if epsilon is None else float(epsilon)
    Ft, di, dj = _apply(state.m, i, j, Fij, Fji, eps)
    a, b = min(i, j), max(i, j)
    if state.counts[a, b] == 0:
        state.n_links += 1
    state.counts[a, b] += 1
    state.weights[a, b] += Ft
    state.invested += Ft
    state.t += 1
    return TransactionOutcome(i, j, Fij, Fji, Ft, eps, di, dj)


def run_to_stationarity(state: SimState, window: int | None = None, drift_tol: float | None = None,
                        max_transactions: int | None = None, trace_every: int | None = None) -> SimState:
    """Transact until windowed means of <m^2> stop drifting.

    Two consecutive windows whose mean <m^2> differ by less than
    ``drift_tol`` (relative) mark the stationary state. Link bookkeeping is
    reset afterwards so recording starts in the stationary regime.
    """
    cfg = state.config
    window = int(window or cfg.window)
    drift_tol = cfg.drift_tol if drift_tol is None else drift_tol
    budget = cfg.max_transactions if max_transactions is None else max_transactions
    trace_every = int(trace_every or state.n)
    if window < 1:
        raise TradeNetError("window must be >= 1")
    start = state.t
    prev = None
    drift = math.inf
    while True:
        if state.t - start + window > budget:
            raise BudgetExhausted(
                f"no stationarity within {budget} transactions (last drift {drift:.3g})",
                transactions=state.t - start, last_drift=drift)
        acc = 0.0
        left = window
        while left:
            chunk = min(trace_every, left)
            stats = _stats()
            run_transactions(state, chunk, record=False, stats=stats)
            state.trace.append((state.t, stats[0] / chunk))
            acc += stats[0]
            left -= chunk
        cur = acc / window
        if prev is not None:
            drift = abs(cur - prev) / prev if prev > 0 else abs(cur - prev)
            log.debug("t=%d window mean m2=%.6g drift=%.3g", state.t, cur, drift)
            if drift < drift_tol:
                break
        prev = cur
    state.stationary_at = state.t
    state.reset_links()
    return state


def run_to_density(state: SimState, target_links: int | None = None,
                   max_transactions: int | None = None, chunk: int = 1 << 16):
    """Record transactions until ``target_links`` distinct pairs have traded.

    Returns ``(network, m)``; link weights are the summed investments
    ``F_ij + F_ji`` over every transaction of the pair.
    """
    cfg = state.config
    target = cfg.link_target() if target_links is None else int(target_links)
    if not 1 <= target <= cfg.n_pairs:
        raise TradeNetError(f"target_links must lie in [1, {cfg.n_pairs}]")
    budget = cfg.max_transactions if max_transactions is None else max_transactions
    start = state.t
    while state.n_links < target:
        left = budget - (state.t - start)
        if left <= 0:
            raise BudgetExhausted(
                f"only {state.n_links}/{target} links after {budget} transactions",
                transactions=state.t - start)
        run_transactions(state, min(chunk, left), record=True, stop_links=target)
    return network_from_state(state), state.m.copy()


def network_from_state(state: SimState) -> WeightedNetwork:
    a, b = np.nonzero(state.counts)
    w = state.weights[a, b]
    keep = w > 0
    if not keep.all():
        log.warning("%d traded pairs carry zero investment and are dropped", int((~keep).sum()))
    return WeightedNetwork(state.n, a[keep], b[keep], w[keep])


def simulate(config: SimConfig):
    """Full pipeline: init, burn-in to stationarity, record to target density.

    Returns ``(network, m, state)``.
    """
    state = init_world(config)
    run_to_stationarity(state)
    net, m = run_to_density(state)
    return net, m, state


def model_observables(net: WeightedNetwork, m, n_bins: int = 40, min_count: int = 10,
                      nu_bins: int = 20, nu_decades: float = 3.0, tail_decades: float = 1.0):
    """Weight collapse, GDP tail and strength-correlation exponent of a model network.

    Failed fits are reported as ``{"insufficient": reason}`` rather than raised.
    """
    rep = AnalysisReport()
    rep["network"] = {"n_nodes": net.n_nodes, "n_links": net.n_edges,
                      "density": link_density(net), "mean_weight": mean_link_weight(net)}
    try:
        curve = collapse_curve(net.w, n_bins=n_bins, min_count=min_count)
        sig = curve.params.sigma
        rep["collapse"] = {"w0": curve.params.w0, "sigma": sig,
                           "gof": parabola_gof(curve), "gof_2sigma": parabola_gof(curve, 2 * sig),
                           "curve": curve.rows()}
    except TradeNetError as exc:
        rep["collapse"] = {"insufficient": str(exc)}
    for key, fn in (("gdp_tail", lambda: tail_exponent(m, tail_decades)),
                    ("nu", lambda: strength_correlation_exponent(net, nu_bins, nu_decades))):
        try:
            rep[key] = fn().to_dict()
        except TradeNetError as exc:
            rep[key] = {"insufficient": str(exc)}
    rep.notes.append(f"nu fitted over the top {nu_decades:g} decades of link weight")
    rep.notes.append("link weights count invested amounts only; no-debt top-ups are excluded")
    rep.notes.append(f"GDP tail exponent from the CCDF over the top {tail_decades:g} decade(s) of m")
    return rep
