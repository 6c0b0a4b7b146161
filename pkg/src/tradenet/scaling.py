"""Log-normal scaling collapse and log-log exponent estimation.

All exponents are ordinary least-squares slopes on log-transformed data.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (
    DegenerateAbscissa,
    DegenerateSigma,
    InsufficientOverlap,
    NonPositiveSample,
    TooFewBins,
    TooFewDegreeClasses,
    TooFewEdges,
    TooFewSamples,
)
from .network import WeightedNetwork, degree_sequence, strength


@dataclass(frozen=True)
class LogNormalParams:
    w0: float
    sigma: float

    @property
    def mu(self) -> float:
        return math.log(self.w0)


@dataclass
class CollapseCurve:
    x: np.ndarray
    y: np.ndarray
    count: np.ndarray
    params: LogNormalParams

    def __len__(self):
        return int(self.x.size)

    def rows(self):
        return [(float(a), float(b), int(c)) for a, b, c in zip(self.x, self.y, self.count)]


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    stderr: float
    range: tuple
    n_points: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["range"] = list(self.range)
        return d


def lognormal_params(weights) -> LogNormalParams:
    """Moment estimates ``w0 = exp<ln w>`` and ``sigma = std(ln w)``."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size < 2:
        raise TooFewSamples(f"need >= 2 samples, got {w.size}")
    if not np.all(w > 0):
        raise NonPositiveSample("log-normal moments need strictly positive samples")
    lw = np.log(w)
    if np.ptp(lw) == 0:
        return LogNormalParams(float(w[0]), 0.0)
    # centered variance: same quantity as <ln^2 w> - <ln w>^2 without cancellation
    return LogNormalParams(float(np.exp(lw.mean())), float(np.std(lw)))


def collapse_transform(ln_w, density, params: LogNormalParams):
    """Map a density of ``ln w`` onto collapse coordinates.

    ``x = ln(w / w0)``, ``y = -2 sigma^2 ln[p(ln w) sqrt(2 pi sigma^2)]``;
    an exact log-normal lands on ``y = x^2``.
    """
    s2 = params.sigma ** 2
    if s2 == 0:
        raise DegenerateSigma("sigma = 0, collapse undefined")
    x = np.asarray(ln_w, dtype=float) - params.mu
    y = -2.0 * s2 * np.log(np.asarray(density, dtype=float) * math.sqrt(2 * math.pi * s2))
    return x, y


def collapse_curve(weights, n_bins: int = 40, min_count: int = 10, params: LogNormalParams | None = None) -> CollapseCurve:
    """Histogram ``ln w`` on uniform bins and apply :func:`collapse_transform`.

    Bins with fewer than ``min_count`` samples are dropped. ``params``
    defaults to the moment estimates of ``weights``.
    """
    w = np.asarray(weights, dtype=float).ravel()
    if params is None:
        params = lognormal_params(w)
    if params.sigma == 0:
        raise DegenerateSigma("all weights equal; sigma = 0")
    lw = np.log(w)
    counts, edges = np.histogram(lw, bins=n_bins, range=(lw.min(), lw.max()))
    width = edges[1] - edges[0]
    centers = 0.5 * (edges[:-1] + edges[1:])
    keep = (counts >= max(min_count, 1))
    density = counts[keep] / (w.size * width)
    x, y = collapse_transform(centers[keep], density, params)
    return CollapseCurve(x, y, counts[keep], params)


def parabola_gof(curve: CollapseCurve, x_max: float | None = None) -> float:
    """Mean squared residual of ``y - x^2`` over the curve's bins.

    ``x_max`` restricts to ``|x| <= x_max`` (e.g. ``2 * sigma``).
    """
    x, y = curve.x, curve.y
    if x_max is not None:
        sel = np.abs(x) <= x_max
        x, y = x[sel], y[sel]
    if x.size < 3:
        raise TooFewBins(f"need >= 3 bins, got {x.size}")
    return float(np.mean((y - x ** 2) ** 2))


def fit_power_law(x, y) -> PowerLawFit:
    """OLS of ``ln y`` on ``ln x``; points with non-positive values are ignored."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size < 2 or np.ptp(np.log(x)) == 0:
        raise DegenerateAbscissa(f"need >= 2 distinct abscissae, got {np.unique(x).size}")
    lx, ly = np.log(x), np.log(y)
    mx, my = lx.mean(), ly.mean()
    sxx = np.sum((lx - mx) ** 2)
    slope = float(np.sum((lx - mx) * (ly - my)) / sxx)
    intercept = float(my - slope * mx)
    n = lx.size
    if n > 2:
        resid = ly - (intercept + slope * lx)
        stderr = float(math.sqrt(np.sum(resid ** 2) / (n - 2) / sxx))
    else:
        stderr = float("nan")
    return PowerLawFit(slope, intercept, stderr, (float(x.min()), float(x.max())), int(n))


def elasticity_gamma(s_series: dict, g_series: dict) -> PowerLawFit:
    """Strength-GDP elasticity: slope of ``ln s`` on ``ln G`` over shared years."""
    years = sorted(y for y in set(s_series) & set(g_series)
                   if s_series[y] > 0 and g_series[y] > 0)
    if len(years) < 3:
        raise InsufficientOverlap(f"need >= 3 common years with s, G > 0, got {len(years)}")
    g = np.array([g_series[y] for y in years], dtype=float)
    s = np.array([s_series[y] for y in years], dtype=float)
    if np.ptp(g) == 0:
        raise DegenerateAbscissa("GDP constant over all common years")
    return fit_power_law(g, s)


@dataclass
class GammaSummary:
    mean: float
    mean_excluding: float
    threshold: float
    n_fits: int
    n_above: int
    density: np.ndarray
    edges: np.ndarray

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "mean_excluding": self.mean_excluding,
            "threshold": self.threshold,
            "n_fits": self.n_fits,
            "n_above": self.n_above,
            "density": self.density.tolist(),
            "edges": self.edges.tolist(),
        }


def gamma_distribution(fits, threshold: float = 2.0, n_bins: int = 20) -> GammaSummary:
    """Histogram and means of per-country elasticities.

    ``fits`` holds PowerLawFit objects or bare exponents. Values above
    ``threshold`` are left out of ``mean_excluding``.
    """
    g = np.array([f.exponent if isinstance(f, PowerLawFit) else float(f) for f in fits])
    if g.size == 0:
        raise TooFewSamples("no elasticity fits")
    above = g > threshold
    rest = g[~above]
    lo, hi = g.min(), g.max()
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    density, edges = np.histogram(g, bins=n_bins, range=(lo, hi), density=True)
    return GammaSummary(float(g.mean()), float(rest.mean()) if rest.size else float("nan"),
                        float(threshold), int(g.size), int(above.sum()), density, edges)


def strength_correlation_exponent(net: WeightedNetwork, n_bins: int = 20, decades: float | None = 3.0) -> PowerLawFit:
    """Exponent of ``<s_i s_j>`` against link weight.

    Per-link strength products are averaged in logarithmic weight bins
    (abscissa: mean weight of the bin). Only the top ``decades`` of the
    weight range enter the fit; ``None`` uses the full range.
    """
    if net.n_edges < max(n_bins, 2):
        raise TooFewEdges(f"need >= {max(n_bins, 2)} links, got {net.n_edges}")
    s = strength(net)
    w = net.w
    prod = s[net.u] * s[net.v]
    wmax = w.max()
    wmin = w.min() if decades is None else max(w.min(), wmax * 10.0 ** (-decades))
    sel = w >= wmin
    w, prod = w[sel], prod[sel]
    if wmin == wmax:
        raise DegenerateAbscissa("all weights in the fit range are equal")
    edges = np.geomspace(wmin, wmax, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, w, side="right") - 1, 0, n_bins - 1)
    cnt = np.bincount(idx, minlength=n_bins)
    keep = cnt > 0
    wb = np.bincount(idx, weights=w, minlength=n_bins)[keep] / cnt[keep]
    pb = np.bincount(idx, weights=prod, minlength=n_bins)[keep] / cnt[keep]
    return fit_power_law(wb, pb)


def strength_by_degree(net: WeightedNetwork):
    """Distinct degrees ``k >= 1`` and the mean strength of nodes of each degree."""
    k = degree_sequence(net)
    s = strength(net)
    ks = np.unique(k[k > 0])
    mean_s = np.array([s[k == kk].mean() for kk in ks])
    return ks, mean_s


def strength_degree_exponent(net: WeightedNetwork, n_bins: int | None = None) -> PowerLawFit:
    """Exponent of ``<s(k)>`` against degree.

    With ``n_bins`` the degree classes are pooled into logarithmic bins
    (node-weighted means); otherwise each distinct degree is one point.
    """
    ks, mean_s = strength_by_degree(net)
    if ks.size < 3:
        raise TooFewDegreeClasses(f"need >= 3 distinct degrees, got {ks.size}")
    if n_bins is None:
        return fit_power_law(ks, mean_s)
    k = degree_sequence(net)
    s = strength(net)
    k, s = k[k > 0], s[k > 0]
    edges = np.geomspace(k.min(), k.max(), n_bins + 1)
    idx = np.clip(np.searchsorted(edges, k, side="right") - 1, 0, n_bins - 1)
    cnt = np.bincount(idx, minlength=n_bins)
    keep = cnt > 0
    kb = np.bincount(idx, weights=k.astype(float), minlength=n_bins)[keep] / cnt[keep]
    sb = np.bincount(idx, weights=s, minlength=n_bins)[keep] / cnt[keep]
    return fit_power_law(kb, sb)


def tail_exponent(values, decades: float = 1.0) -> PowerLawFit:
    """Density exponent ``tau`` of ``P(x) ~ x^-tau`` from the upper tail.

    Fits the complementary CDF over the top ``decades`` of the data; the
    returned ``exponent`` is ``1 - slope`` and ``intercept`` is the CCDF's.
    """
    x = np.sort(np.asarray(values, dtype=float))[::-1]
    x = x[x > 0]
    if x.size < 3:
        raise TooFewSamples(f"need >= 3 positive values, got {x.size}")
    ccdf = np.arange(1, x.size + 1) / x.size
    sel = x >= x[0] * 10.0 ** (-decades)
    fit = fit_power_law(x[sel], ccdf[sel])
    return PowerLawFit(1.0 - fit.exponent, fit.intercept, fit.stderr, fit.range, fit.n_points)


def pooled_weights(networks) -> np.ndarray:
    """Concatenate link weights of several networks as independent samples."""
    ws = [net.w for net in networks]
    return np.concatenate(ws) if ws else np.empty(0)
