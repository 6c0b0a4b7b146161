"""Dyadic trade and GDP CSV ingestion.

Trade rows are directed observations ``reporter, partner, year, export,
import``; an empty field (or a configured sentinel such as ``-9``) means the
flow was not reported, which is kept distinct from a reported zero. Link
weights average the four flows of a pair:
``w_ij = (exp_ij + exp_ji + imp_ij + imp_ji) / 2`` with absent flows
contributing nothing.
"""
from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

from .errors import MalformedRow, NegativeValue, NonPositiveGdp, UnknownColumn
from .network import WeightedNetwork, build_network, strength

log = logging.getLogger(__name__)

TRADE_FIELDS = ("reporter", "partner", "year", "export", "import")


@dataclass(frozen=True)
class TradeRecord:
    reporter: str
    partner: str
    year: int
    export: float | None
    import_: float | None
    line: int | None = None


@dataclass
class GdpSeries:
    country: str
    entries: dict = field(default_factory=dict)


@dataclass
class TradeFormat:
    """Column mapping from a source file onto the canonical trade schema.

    ``columns`` maps canonical names (``reporter``, ``partner``, ``year``,
    ``export``, ``import``) to header names in the file. ``missing`` lists
    field values read as absent.
    """
    columns: dict = field(default_factory=lambda: {f: f for f in TRADE_FIELDS})
    missing: tuple = ("",)
    delimiter: str = ","
    year_range: tuple | None = None

    @classmethod
    def from_spec(cls, spec: str | None = None, missing=None, **kw) -> "TradeFormat":
        """Parse ``"reporter=acra,partner=acrb,..."`` style mappings."""
        cols = {f: f for f in TRADE_FIELDS}
        if spec:
            for item in spec.split(","):
                key, _, val = item.partition("=")
                key = key.strip()
                if key not in cols or not val:
                    raise UnknownColumn(f"bad column mapping {item!r}")
                cols[key] = val.strip()
        miss = ("",) if missing is None else tuple({"", *missing})
        return cls(columns=cols, missing=miss, **kw)


def _value(raw, missing, line, name):
    raw = raw.strip()
    if raw in missing:
        return None
    try:
        x = float(raw)
    except ValueError:
        raise MalformedRow(f"{name} value {raw!r} is not a number", line) from None
    if not math.isfinite(x):
        raise MalformedRow(f"{name} value {raw!r} is not finite", line)
    if x < 0:
        raise NegativeValue(f"negative {name} value {x}", line)
    return x


def parse_trade_file(path, fmt: TradeFormat | None = None) -> list[TradeRecord]:
    """Read a dyadic trade CSV into records (one per data row).

    Raises UnknownColumn when a mapped column is missing from the header,
    MalformedRow for bad or duplicated rows and self-trade, NegativeValue
    for negative flows. Rows outside ``fmt.year_range`` are skipped.
    """
    fmt = fmt or TradeFormat()
    records = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=fmt.delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRow("empty file", 1) from None
        pos = {}
        for canon in TRADE_FIELDS:
            col = fmt.columns[canon]
            if col not in header:
                raise UnknownColumn(f"column {col!r} (for {canon}) not in header {header}")
            pos[canon] = header.index(col)
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise MalformedRow(f"expected {len(header)} fields, got {len(row)}", line)
            rep = row[pos["reporter"]].strip()
            par = row[pos["partner"]].strip()
            if not rep or not par:
                raise MalformedRow("empty country code", line)
            if rep == par:
                raise MalformedRow(f"self-trade {rep}-{par}", line)
            try:
                year = int(row[pos["year"]].strip())
            except ValueError:
                raise MalformedRow(f"bad year {row[pos['year']]!r}", line) from None
            if fmt.year_range and not fmt.year_range[0] <= year <= fmt.year_range[1]:
                continue
            exp = _value(row[pos["export"]], fmt.missing, line, "export")
            imp = _value(row[pos["import"]], fmt.missing, line, "import")
            key = (rep, par, year)
            if key in seen:
                raise MalformedRow(f"duplicate record {rep}->{par} {year}", line)
            seen.add(key)
            records.append(TradeRecord(rep, par, year, exp, imp, line))
    return records


def _pair_flows(records):
    # (a, b) with a < b -> [exp_ab, exp_ba, imp_ab, imp_ba]
    flows = defaultdict(lambda: [None, None, None, None])
    for r in records:
        a, b = sorted((r.reporter, r.partner))
        f = flows[(a, b)]
        if r.reporter == a:
            f[0], f[2] = r.export, r.import_
        else:
            f[1], f[3] = r.export, r.import_
    return flows


def symmetrize(records) -> list[tuple[str, str, float]]:
    """Undirected link weights ``(a, b, w_ab)`` with ``a < b`` by label.

    Pairs whose four flows are all zero or absent produce no link.
    """
    out = []
    for (a, b), f in sorted(_pair_flows(records).items()):
        w = sum(x for x in f if x is not None) / 2.0
        if w > 0:
            out.append((a, b, w))
    return out


def mirror_discrepancies(records, rtol: float = 1e-9) -> int:
    """Count mirrored flow pairs (exp_ij vs imp_ji) that disagree."""
    n = 0
    for f in _pair_flows(records).values():
        exp_ab, exp_ba, imp_ab, imp_ba = f
        for x, y in ((exp_ab, imp_ba), (exp_ba, imp_ab)):
            if x is not None and y is not None and not math.isclose(x, y, rel_tol=rtol, abs_tol=0.0):
                n += 1
    return n


@dataclass
class YearNetworkSet:
    networks: dict
    labels: tuple
    discrepancies: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.networks)

    def __getitem__(self, year):
        return self.networks[year]

    @property
    def years(self):
        return sorted(self.networks)


def network_from_links(links, labels=None) -> WeightedNetwork:
    """Build a network from labelled links; nodes are the sorted labels in use."""
    if labels is None:
        labels = sorted({a for a, _, _ in links} | {b for _, b, _ in links})
    idx = {lab: i for i, lab in enumerate(labels)}
    return build_network(len(labels), [(idx[a], idx[b], w) for a, b, w in links], labels=labels)


def build_year_networks(records, years=None) -> YearNetworkSet:
    """One network per year, holding only countries with a non-zero link that year."""
    by_year = defaultdict(list)
    for r in records:
        by_year[r.year].append(r)
    wanted = sorted(by_year) if years is None else sorted(set(years) & set(by_year))
    nets, disc = {}, {}
    all_labels = set()
    for y in wanted:
        links = symmetrize(by_year[y])
        if not links:
            continue
        nets[y] = network_from_links(links)
        all_labels.update(nets[y].labels)
        disc[y] = mirror_discrepancies(by_year[y])
        if disc[y]:
            log.info("%d: %d mirror flows disagree", y, disc[y])
    return YearNetworkSet(nets, tuple(sorted(all_labels)), disc)


def parse_gdp_file(path) -> list[GdpSeries]:
    """Read ``country,year,gdp`` rows; empty gdp fields are skipped."""
    series = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRow("empty file", 1) from None
        for col in ("country", "year", "gdp"):
            if col not in header:
                raise UnknownColumn(f"column {col!r} not in header {header}")
        ci, yi, gi = (header.index(c) for c in ("country", "year", "gdp"))
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise MalformedRow(f"expected {len(header)} fields, got {len(row)}", line)
            country = row[ci].strip()
            if not country:
                raise MalformedRow("empty country code", line)
            try:
                year = int(row[yi].strip())
            except ValueError:
                raise MalformedRow(f"bad year {row[yi]!r}", line) from None
            raw = row[gi].strip()
            if not raw:
                continue
            try:
                g = float(raw)
            except ValueError:
                raise MalformedRow(f"gdp value {raw!r} is not a number", line) from None
            if not g > 0 or not math.isfinite(g):
                raise NonPositiveGdp(f"GDP must be positive, got {raw}", line)
            s = series.setdefault(country, GdpSeries(country))
            if year in s.entries:
                raise MalformedRow(f"duplicate GDP entry {country} {year}", line)
            s.entries[year] = g
    return list(series.values())


def strength_series(networks) -> dict:
    """``{country: {year: strength}}`` from a YearNetworkSet or ``{year: network}``."""
    if isinstance(networks, YearNetworkSet):
        networks = networks.networks
    out = defaultdict(dict)
    for y, net in networks.items():
        for lab, s in zip(net.labels, strength(net).tolist()):
            out[lab][y] = s
    return dict(out)


def five_year_blocks(years, start: int = 1951, width: int = 5) -> dict:
    """Group years into blocks ``start..start+width-1`` etc.; earlier years are dropped."""
    blocks = defaultdict(list)
    for y in sorted(years):
        if y < start:
            continue
        b0 = start + width * ((y - start) // width)
        blocks[(b0, b0 + width - 1)].append(y)
    return dict(blocks)


def write_edge_list(net: WeightedNetwork, path, labelled: bool = True):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        if labelled:
            wr.writerow(["source", "target", "weight"])
            for i, j, w in net.edges():
                wr.writerow([net.labels[i], net.labels[j], repr(w)])
        else:
            wr.writerow(["i", "j", "weight"])
            for i, j, w in net.edges():
                wr.writerow([i, j, repr(w)])


def read_edge_list(path) -> WeightedNetwork:
    """Read a 3-column edge list (``source,target,weight`` or ``i,j,weight``).

    Endpoints are treated as labels; nodes are their sorted union (numeric
    labels sort numerically).
    """
    links = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow("empty file", 1) from None
        if len(header) < 3:
            raise MalformedRow("edge list needs 3 columns", 1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 3:
                raise MalformedRow("edge list needs 3 columns", line)
            try:
                w = float(row[2])
            except ValueError:
                raise MalformedRow(f"bad weight {row[2]!r}", line) from None
            links.append((row[0].strip(), row[1].strip(), w))
    labels = sorted({a for a, _, _ in links} | {b for _, b, _ in links})
    if labels and all(lab.lstrip("-").isdigit() for lab in labels):
        labels = sorted(labels, key=int)
    return network_from_links(links, labels)
