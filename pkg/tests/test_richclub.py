import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tradenet.errors import IsolatedPositiveStrength, NonConvergence
from tradenet.network import WeightedNetwork, build_network, degree_sequence, strength
from tradenet.richclub import (
    adjacency_difference,
    fw_curve,
    fw_fraction,
    generate_mrn,
    generate_mrwn,
    half_trade_club_size,
    null_ensemble_curves,
    phi_unweighted,
    rich_club_curve,
    rw_weighted,
    weighted_rich_club_curve,
)

from conftest import complete, random_network, star


def brute_club(net, values, threshold, weighted):
    """Enumerate all member pairs and look each one up."""
    club = [i for i in range(net.n_nodes) if values[i] >= threshold]
    n = len(club)
    if n < 2:
        return math.nan
    total = 0.0
    for a, b in itertools.combinations(club, 2):
        if net.has_edge(a, b):
            total += net.weight(a, b) if weighted else 1.0
    return 2 * total / (n * (n - 1))


@st.composite
def networks(draw):
    n = draw(st.integers(2, 12))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=1, max_size=len(pairs)))
    ws = draw(st.lists(st.floats(0.01, 100), min_size=len(chosen), max_size=len(chosen)))
    return build_network(n, [(i, j, w) for (i, j), w in zip(chosen, ws)])


# ------------------------------------------------------------- coefficients

def test_phi_complete():
    assert phi_unweighted(complete(4), 1) == 1.0


def test_phi_star():
    net = star(3)
    assert phi_unweighted(net, 1) == pytest.approx(brute_club(net, degree_sequence(net), 1, False))
    assert phi_unweighted(net, 1) == 0.5
    assert math.isnan(phi_unweighted(net, 2))


def test_rw_triangle(triangle):
    assert rw_weighted(triangle, 4) == 3.0
    assert rw_weighted(triangle, 0) == pytest.approx(2 * 6 / (3 * 2))
    assert math.isnan(rw_weighted(triangle, 6))


def test_fw_triangle(triangle):
    assert fw_fraction(triangle, 4) == 0.5
    assert fw_fraction(triangle, 0) == 1.0


@given(networks(), st.floats(0, 1.2))
@settings(max_examples=60)
def test_curves_match_brute_force(net, frac):
    s = strength(net)
    k = degree_sequence(net)
    ref_w = brute_club(net, s, frac * s.max(), True)
    got_w = weighted_rich_club_curve(net, [frac]).coefficient[0]
    assert (math.isnan(ref_w) and math.isnan(got_w)) or got_w == pytest.approx(ref_w, rel=1e-12)
    for kk in np.unique(k):
        ref = brute_club(net, k, kk, False)
        got = phi_unweighted(net, kk)
        assert (math.isnan(ref) and math.isnan(got)) or got == pytest.approx(ref)


@given(networks())
@settings(max_examples=60)
def test_fw_monotone_and_nested(net):
    c = fw_curve(net, np.linspace(0, 1, 50))
    assert c.coefficient[0] == pytest.approx(1.0)
    assert np.all(np.diff(c.coefficient) <= 1e-12)
    assert np.all(np.diff(c.club_size) <= 0)


@given(st.integers(3, 15), st.floats(0.1, 10))
def test_rw_constant_on_equal_complete(n, w):
    c = weighted_rich_club_curve(complete(n, w))
    defined = c.coefficient[~np.isnan(c.coefficient)]
    np.testing.assert_allclose(defined, w)


def test_half_trade_two_nodes():
    assert half_trade_club_size(build_network(2, [(0, 1, 1.0)])) == 1.0


def test_half_trade_hub_pair():
    # heavy link 0-1 carries 10 of 13 units
    net = build_network(4, [(0, 1, 10.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)])
    assert half_trade_club_size(net) == 0.5


# ------------------------------------------------------------------------ MRN

@given(networks(), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=40, deadline=None)
def test_mrn_preserves_degrees(net, seed):
    if net.n_edges < 2:
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        out = generate_mrn(net, seed, swap_factor=3)
    assert np.array_equal(degree_sequence(out), degree_sequence(net))
    assert np.all(out.u < out.v)
    assert len(set(zip(out.u.tolist(), out.v.tolist()))) == out.n_edges


def test_mrn_complete_graph_is_rigid(triangle):
    with pytest.warns(RuntimeWarning):
        out = generate_mrn(triangle, 0)
    assert list(zip(out.u, out.v)) == [(0, 1), (0, 2), (1, 2)]


def test_mrn_zero_swaps_is_identity():
    net = random_network(30, 0.3, np.random.default_rng(0))
    out = generate_mrn(net, 1, swap_factor=0)
    assert adjacency_difference(net, out) == 0.0


def test_mrn_randomizes_sparse_graph():
    net = random_network(60, 0.1, np.random.default_rng(0))
    out = generate_mrn(net, 1)
    assert adjacency_difference(net, out) > 0.5


def test_mrn_deterministic():
    net = random_network(40, 0.4, np.random.default_rng(5))
    a, b = generate_mrn(net, 9), generate_mrn(net, 9)
    assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)


# ----------------------------------------------------------------------- MRWN

def test_mrwn_single_link():
    net = build_network(2, [(0, 1, 1.0)])
    out, sweeps = generate_mrwn(net, [5.0, 5.0], 0, return_sweeps=True)
    assert out.w[0] == pytest.approx(5.0, rel=1e-15)
    assert sweeps == 1


def test_mrwn_triangle_unique_solution(triangle):
    # oracle: w01 + w02 = 4, w01 + w12 = 3, w12 + w02 = 5
    a = np.array([[1, 0, 1], [1, 1, 0], [0, 1, 1]], dtype=float)
    exact = np.linalg.solve(a, [4.0, 3.0, 5.0])  # (w01, w12, w02)
    # default tol bounds relative strength error; weights need a tighter stop
    out = generate_mrwn(triangle.with_weights(np.ones(3)), [4.0, 3.0, 5.0], 3)
    assert np.max(np.abs(strength(out) - [4, 3, 5]) / [4, 3, 5]) < 1e-10
    out = generate_mrwn(triangle.with_weights(np.ones(3)), [4.0, 3.0, 5.0], 3, tol=1e-13)
    assert abs(out.weight(0, 1) - exact[0]) < 1e-10
    assert abs(out.weight(1, 2) - exact[1]) < 1e-10
    assert abs(out.weight(0, 2) - exact[2]) < 1e-10


@given(st.integers(0, 1000))
@settings(max_examples=15, deadline=None)
def test_mrwn_preserves_topology_and_strength(seed):
    rng = np.random.default_rng(seed)
    net = random_network(40, 0.5, rng)
    s = strength(net)
    out = generate_mrwn(net, s, seed)
    assert np.array_equal(out.u, net.u) and np.array_equal(out.v, net.v)
    assert np.all(out.w > 0)
    assert np.max(np.abs(strength(out) - s) / s) < 1e-10


def test_mrwn_isolated_positive():
    net = build_network(3, [(0, 1, 1.0)])
    with pytest.raises(IsolatedPositiveStrength):
        generate_mrwn(net, [1.0, 1.0, 2.0])


def test_mrwn_nonconvergence_reports_residual():
    # path 0-1-2 with s = (1, 1, 5) has no solution: w01 = 1 forces w12 = 0
    net = build_network(3, [(0, 1, 1.0), (1, 2, 1.0)])
    with pytest.raises(NonConvergence) as info:
        generate_mrwn(net, [1.0, 1.0, 5.0], 0, max_sweeps=200)
    assert info.value.residual > 1e-3


# ------------------------------------------------------------------- ensemble

def test_identity_ensemble_gives_unit_rho():
    net = random_network(30, 0.5, np.random.default_rng(2))
    un, wt = null_ensemble_curves(net, 1, seed=0, swap_factor=0)
    defined = ~np.isnan(un.rho)
    assert defined.any()
    assert np.all(un.rho[defined] == 1.0)
    rho_w = wt.rho[~np.isnan(wt.rho)]
    # weights are re-balanced from random starts, so only the topology part is exact
    assert rho_w.size > 0


def test_ensemble_threads_agree():
    net = random_network(40, 0.6, np.random.default_rng(8))
    a = null_ensemble_curves(net, 4, seed=3, threads=1)
    b = null_ensemble_curves(net, 4, seed=3, threads=4)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.null_mean, y.null_mean)
