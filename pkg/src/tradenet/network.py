"""Undirected weighted network with dense integer node ids.

Edges are stored once per unordered pair as parallel arrays ``(u, v, w)``
with ``u < v``. Node labels (e.g. country codes) map bijectively onto the
ids ``0..N-1``; all analysis runs in id space.
"""
from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateEdge,
    EmptyNetwork,
    NonPositiveWeight,
    SelfLoop,
    TooFewNodes,
    TradeNetError,
)


class WeightedNetwork:
    """Immutable simple graph with strictly positive link weights.

    Use :func:`build_network` to construct one; the constructor trusts its
    inputs and only normalizes edge orientation.
    """

    def __init__(self, n_nodes, u, v, w, labels=None):
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        order = np.lexsort((hi, lo))
        self.n_nodes = int(n_nodes)
        self.u = lo[order]
        self.v = hi[order]
        self.w = np.asarray(w, dtype=np.float64)[order]
        for arr in (self.u, self.v, self.w):
            arr.setflags(write=False)
        if labels is None:
            labels = [str(i) for i in range(self.n_nodes)]
        self.labels = tuple(str(x) for x in labels)
        if len(self.labels) != self.n_nodes:
            raise TradeNetError(f"{len(self.labels)} labels for {self.n_nodes} nodes")
        if len(set(self.labels)) != self.n_nodes:
            raise TradeNetError("node labels must be unique")

    @property
    def n_edges(self) -> int:
        return int(self.u.size)

    def __repr__(self):
        return f"WeightedNetwork(N={self.n_nodes}, L={self.n_edges})"

    def edges(self):
        """Iterate ``(i, j, w)`` with ``i < j`` in sorted order."""
        for a, b, x in zip(self.u.tolist(), self.v.tolist(), self.w.tolist()):
            yield a, b, x

    @cached_property
    def _pair_index(self) -> dict:
        return {(a, b): k for k, (a, b) in enumerate(zip(self.u.tolist(), self.v.tolist()))}

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._pair_index

    def weight(self, i: int, j: int) -> float:
        """Weight of the link ``i--j``; 0.0 if absent."""
        k = self._pair_index.get((min(i, j), max(i, j)))
        return 0.0 if k is None else float(self.w[k])

    @cached_property
    def csr(self):
        """Incidence in CSR form: ``(indptr, neighbor, edge_id)``.

        ``neighbor[indptr[i]:indptr[i+1]]`` are the neighbors of ``i`` and
        ``edge_id`` the matching positions in ``u, v, w``.
        """
        n, L = self.n_nodes, self.n_edges
        src = np.concatenate([self.u, self.v])
        dst = np.concatenate([self.v, self.u])
        eid = np.concatenate([np.arange(L), np.arange(L)])
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return indptr, dst[order].astype(np.int64), eid[order].astype(np.int64)

    def neighbors(self, i: int) -> np.ndarray:
        indptr, nbr, _ = self.csr
        return nbr[indptr[i]:indptr[i + 1]]

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
        a[self.u, self.v] = True
        a[self.v, self.u] = True
        return a

    def weight_matrix(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes))
        a[self.u, self.v] = self.w
        a[self.v, self.u] = self.w
        return a

    def with_weights(self, w) -> "WeightedNetwork":
        """Same topology, new weights (aligned with ``self.u, self.v``)."""
        w = np.asarray(w, dtype=np.float64)
        if w.shape != self.w.shape:
            raise TradeNetError(f"expected {self.n_edges} weights, got {w.shape}")
        bad = np.flatnonzero(~(w > 0))
        if bad.size:
            k = int(bad[0])
            pair = (int(self.u[k]), int(self.v[k]))
            raise NonPositiveWeight(f"non-positive weight {w[k]} on {pair}", pair)
        return WeightedNetwork(self.n_nodes, self.u, self.v, w, self.labels)

    def label_index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}


def build_network(n_nodes: int, weighted_edges: Iterable[Sequence], labels=None) -> WeightedNetwork:
    """Validate an edge list and build a :class:`WeightedNetwork`.

    Raises SelfLoop, DuplicateEdge or NonPositiveWeight naming the
    offending pair; ids outside ``0..n_nodes-1`` raise TradeNetError.
    """
    n_nodes = int(n_nodes)
    seen = set()
    us, vs, ws = [], [], []
    for i, j, w in weighted_edges:
        i, j, w = int(i), int(j), float(w)
        if not (0 <= i < n_nodes and 0 <= j < n_nodes):
            raise TradeNetError(f"edge ({i}, {j}) out of range for N={n_nodes}")
        if i == j:
            raise SelfLoop(f"self-loop on node {i}", (i, j))
        if not w > 0:
            raise NonPositiveWeight(f"non-positive weight {w} on ({i}, {j})", (i, j))
        key = (min(i, j), max(i, j))
        if key in seen:
            raise DuplicateEdge(f"duplicate edge {key}", key)
        seen.add(key)
        us.append(key[0])
        vs.append(key[1])
        ws.append(w)
    return WeightedNetwork(n_nodes, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64),
                           np.array(ws), labels)


def strength(net: WeightedNetwork) -> np.ndarray:
    """Node strengths ``s_i = sum_j w_ij``; isolated nodes get 0."""
    n = net.n_nodes
    return np.bincount(net.u, weights=net.w, minlength=n) + np.bincount(net.v, weights=net.w, minlength=n)


def degree_sequence(net: WeightedNetwork) -> np.ndarray:
    n = net.n_nodes
    return np.bincount(net.u, minlength=n) + np.bincount(net.v, minlength=n)


def link_density(net: WeightedNetwork) -> float:
    """``L / [N(N-1)/2]``."""
    n = net.n_nodes
    if n < 2:
        raise TooFewNodes(f"link density needs N >= 2, got N={n}")
    return net.n_edges / (n * (n - 1) / 2)


def mean_link_weight(net: WeightedNetwork) -> float:
    if net.n_edges == 0:
        raise EmptyNetwork("network has no links")
    return float(net.w.mean())


def total_weight(net: WeightedNetwork) -> float:
    return float(net.w.sum())
