"""Command-line front end: ``tradenet ingest | analyze | richclub | simulate``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 budget or
convergence failure. Every command writes a ``manifest.json`` into its
output directory.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BudgetExhausted, NonConvergence, TradeNetError
from .gravity import SimConfig, init_world, model_observables, run_to_density, run_to_stationarity
from .ingest import (
    TradeFormat,
    build_year_networks,
    five_year_blocks,
    parse_gdp_file,
    parse_trade_file,
    read_edge_list,
    strength_series,
    write_edge_list,
)
from .network import link_density, mean_link_weight, strength
from .report import AnalysisReport, write_csv
from .richclub import (
    DEFAULT_FRACTIONS,
    adjacency_difference,
    fw_curve,
    generate_mrn,
    half_trade_club_size,
    half_trade_threshold,
    null_ensemble_curves,
    rich_club_curve,
    weighted_rich_club_curve,
)
from .scaling import (
    collapse_curve,
    elasticity_gamma,
    gamma_distribution,
    lognormal_params,
    parabola_gof,
    pooled_weights,
    strength_correlation_exponent,
    strength_degree_exponent,
)

log = logging.getLogger("tradenet")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUDGET = 0, 1, 2, 3
THREADS_ENV = "TRADENET_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class Manifest:
    def __init__(self, command, argv, out_dir):
        self.out_dir = Path(out_dir)
        self.data = {"command": command, "argv": list(argv), "tool_version": __version__,
                     "config": {}, "seeds": [], "inputs": {}, "outputs": [], "status": "running"}

    def add_input(self, path):
        self.data["inputs"][str(path)] = _digest(path)

    def output(self, name) -> Path:
        self.data["outputs"].append(name)
        return self.out_dir / name

    def write(self, status, error=None):
        self.data["status"] = status
        if error:
            self.data["error"] = error
        with open(self.out_dir / "manifest.json", "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)


def _threads(value):
    if value is not None:
        return max(1, int(value))
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else (os.cpu_count() or 1)


def _require_files(*paths):
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise FileNotFoundError(f"no such file: {p}")


def _year_range(text):
    if not text:
        return None
    m = re.fullmatch(r"\s*(\d{4})\s*(?:-\s*(\d{4}))?\s*", text)
    if not m:
        raise UsageError(f"bad year range {text!r}; use YYYY or YYYY-YYYY")
    a = int(m.group(1))
    return a, int(m.group(2) or a)


def _insufficient(fn, *args, **kw):
    try:
        out = fn(*args, **kw)
        return out.to_dict() if hasattr(out, "to_dict") else out
    except TradeNetError as exc:
        return {"insufficient": str(exc)}


# ------------------------------------------------------------------ commands

def cmd_ingest(args, man: Manifest):
    _require_files(args.trade, args.gdp)
    yr = _year_range(args.years)
    fmt = TradeFormat.from_spec(args.columns, missing=args.missing, year_range=yr)
    man.data["config"] = {"columns": fmt.columns, "missing": list(fmt.missing), "years": yr}
    man.add_input(args.trade)
    records = parse_trade_file(args.trade, fmt)
    if args.gdp:
        man.add_input(args.gdp)
        parse_gdp_file(args.gdp)
    nets = build_year_networks(records)
    rows = []
    for y in nets.years:
        net = nets[y]
        write_edge_list(net, man.output(f"edges_{y}.csv"))
        rows.append((y, net.n_nodes, net.n_edges, link_density(net), mean_link_weight(net),
                     nets.discrepancies.get(y, 0)))
    write_csv(man.output("summary.csv"),
              ["year", "n_nodes", "n_links", "density", "mean_weight", "mirror_discrepancies"], rows)
    print(f"ingested {len(records)} records into {len(nets)} yearly networks")


def _load_networks(paths):
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(p.glob("edges_*.csv")))
        else:
            _require_files(p)
            files.append(p)
    if not files:
        raise TradeNetError("no edge-list files found")
    nets = {}
    for f in files:
        m = re.search(r"(\d{4})", f.stem)
        key = int(m.group(1)) if m else f.stem
        nets[key] = read_edge_list(f)
    return files, nets


def cmd_analyze(args, man: Manifest):
    for p in args.networks:
        if not Path(p).exists():
            raise FileNotFoundError(f"no such file or directory: {p}")
    _require_files(args.gdp)
    files, nets = _load_networks(args.networks)
    for f in files:
        man.add_input(f)
    man.data["config"] = {k: getattr(args, k) for k in ("bins", "min_count", "nu_bins", "nu_decades", "block_start")}
    rep = AnalysisReport()
    years = {}
    for key, net in nets.items():
        s = strength(net)
        entry = {"n_nodes": net.n_nodes, "n_links": net.n_edges,
                 "density": _insufficient(link_density, net),
                 "mean_weight": _insufficient(mean_link_weight, net),
                 "strength": dict(zip(net.labels, s.tolist())),
                 "lognormal": _insufficient(lambda w: vars(lognormal_params(w)), net.w),
                 "nu": _insufficient(strength_correlation_exponent, net, args.nu_bins, args.nu_decades),
                 "mu": _insufficient(strength_degree_exponent, net),
                 "half_trade_club_size": _insufficient(half_trade_club_size, net)}
        years[str(key)] = entry
    rep["years"] = years
    int_years = [k for k in nets if isinstance(k, int)]
    blocks = {}
    for (a, b), ys in five_year_blocks(int_years, start=args.block_start).items():
        w = pooled_weights([nets[y] for y in ys])
        name = f"{a}-{b}"
        try:
            curve = collapse_curve(w, n_bins=args.bins, min_count=args.min_count)
            write_csv(man.output(f"collapse_{name}.csv"), ["x", "y", "count"], curve.rows())
            blocks[name] = {"years": ys, "n_weights": int(w.size), "w0": curve.params.w0,
                            "sigma": curve.params.sigma,
                            "gof": _insufficient(parabola_gof, curve),
                            "gof_2sigma": _insufficient(parabola_gof, curve, 2 * curve.params.sigma)}
        except TradeNetError as exc:
            blocks[name] = {"years": ys, "insufficient": str(exc)}
    rep["collapse_blocks"] = blocks
    if args.gdp:
        man.add_input(args.gdp)
        gdp = {g.country: g.entries for g in parse_gdp_file(args.gdp)}
        sseries = strength_series({y: nets[y] for y in int_years})
        fits, skipped = {}, {}
        for c in sorted(set(sseries) & set(gdp)):
            try:
                fits[c] = elasticity_gamma(sseries[c], gdp[c])
            except TradeNetError as exc:
                skipped[c] = str(exc)
        panel = {"fits": {c: f.to_dict() for c, f in fits.items()}, "skipped": skipped}
        panel["summary"] = _insufficient(gamma_distribution, list(fits.values()), args.gamma_threshold)
        rep["gamma"] = panel
    rep.notes.append(f"nu fitted over the top {args.nu_decades:g} decades of link weight")
    rep.notes.append("collapse blocks pool yearly link weights as separate samples")
    rep.write_json(man.output("analysis.json"))
    print(f"analyzed {len(nets)} networks, {len(blocks)} collapse blocks")


def cmd_richclub(args, man: Manifest):
    _require_files(args.network)
    if args.ensemble < 0:
        raise UsageError("--ensemble must be >= 0")
    man.add_input(args.network)
    man.data["config"] = {"ensemble": args.ensemble, "swap_factor": args.swap_factor}
    man.data["seeds"] = [args.seed]
    net = read_edge_list(args.network)
    summary = {"n_nodes": net.n_nodes, "n_links": net.n_edges,
               "half_trade_club_size": half_trade_club_size(net),
               "half_trade_threshold": half_trade_threshold(net)}
    s = strength(net)
    smax = s.max()
    # realized strengths are added so every distinct club appears exactly once
    fractions = np.union1d(DEFAULT_FRACTIONS, s[s > 0] / smax)
    head = ["threshold", "strength", "coefficient", "club_size"]

    def with_strength(rows):
        return [(r[0], r[0] * smax) + tuple(r[1:]) for r in rows]

    write_csv(man.output("fw.csv"), head, with_strength(fw_curve(net, fractions).rows()))
    if args.ensemble == 0:
        write_csv(man.output("phi.csv"), ["degree", "coefficient", "club_size"], rich_club_curve(net).rows())
        write_csv(man.output("rw.csv"), head, with_strength(weighted_rich_club_curve(net, fractions).rows()))
    else:
        un, wt = null_ensemble_curves(net, args.ensemble, seed=args.seed, swap_factor=args.swap_factor,
                                      fractions=fractions, threads=_threads(args.threads),
                                      max_sweeps=args.max_sweeps)
        write_csv(man.output("phi.csv"), ["degree", "coefficient", "club_size", "null_mean", "rho"], un.rows())
        write_csv(man.output("rw.csv"), head + ["null_mean", "rho"], with_strength(wt.rows()))
        sample = generate_mrn(net, np.random.SeedSequence(args.seed).spawn(1)[0], args.swap_factor)
        summary["adjacency_difference"] = adjacency_difference(net, sample)
        summary["ensemble_size"] = args.ensemble
    with open(man.output("summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    print(f"half-trade club size {summary['half_trade_club_size']:.3f} of N")


def _sim_config(args) -> SimConfig:
    base = SimConfig.from_json(args.config).to_dict() if args.config else {}
    flags = {"n_countries": args.n, "alpha": args.alpha, "beta": args.beta, "theta": args.theta,
             "target_density": args.density, "target_links": args.links, "seed": args.seed,
             "burn_in_window": args.window, "drift_tol": args.drift_tol,
             "max_transactions": args.max_transactions}
    base.update({k: v for k, v in flags.items() if v is not None})
    if args.periodic:
        base["periodic"] = True
    try:
        return SimConfig.from_dict(base).validate()
    except TradeNetError as exc:
        raise UsageError(str(exc)) from None


def _simulate_one(cfg: SimConfig, out: Path, man: Manifest, prefix=""):
    state = init_world(cfg)
    try:
        run_to_stationarity(state)
        net, m = run_to_density(state)
    finally:
        write_csv(man.output(prefix + "trace.csv"), ["t", "mean_m2"], state.trace)
    write_edge_list(net, man.output(prefix + "edges.csv"), labelled=False)
    write_csv(man.output(prefix + "gdp.csv"), ["node", "m"], [(i, repr(x)) for i, x in enumerate(m.tolist())])
    rep = model_observables(net, m)
    rep["run"] = {"seed": cfg.seed, "stationary_at": state.stationary_at, "transactions": state.t,
                  "recorded_transactions": state.t - state.stationary_at, "invested": state.invested}
    rep.write_json(man.output(prefix + "observables.json"))
    return rep


def cmd_simulate(args, man: Manifest):
    cfg = args._cfg
    reps = max(1, args.replicas)
    configs = [SimConfig.from_dict({**cfg.to_dict(), "seed": cfg.seed + r}) for r in range(reps)]
    man.data["config"] = cfg.to_dict()
    man.data["seeds"] = [c.seed for c in configs]
    if args.config:
        man.add_input(args.config)
    if reps == 1:
        rep = _simulate_one(cfg, man.out_dir, man)
        c = rep["collapse"]
        print(f"L={rep['network']['n_links']} density={rep['network']['density']:.4f} "
              f"gof(|x|<=2s)={c.get('gof_2sigma', float('nan')):.3g}")
        return
    with ThreadPoolExecutor(max_workers=_threads(args.threads)) as pool:
        list(pool.map(lambda c: _simulate_one(c, man.out_dir, man, f"seed{c.seed}_"), configs))
    print(f"{reps} replicas written to {man.out_dir}")


# ---------------------------------------------------------------------- main

def build_parser():
    p = _Parser(prog="tradenet", description="Weighted trade-network analysis and gravity-model simulation.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("ingest", help="parse trade/GDP CSVs into yearly edge lists")
    q.add_argument("--trade", required=True)
    q.add_argument("--gdp")
    q.add_argument("--years", help="YYYY or YYYY-YYYY")
    q.add_argument("--columns", help="column mapping, e.g. reporter=acra,partner=acrb,export=expab,import=impab")
    q.add_argument("--missing", action="append", help="extra value read as absent (repeatable), e.g. -9")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_ingest)

    q = sub.add_parser("analyze", help="collapse curves, nu, mu and GDP elasticities")
    q.add_argument("networks", nargs="+", help="ingest output directory or edge-list files")
    q.add_argument("--gdp")
    q.add_argument("--bins", type=int, default=40)
    q.add_argument("--min-count", type=int, default=10)
    q.add_argument("--nu-bins", type=int, default=20)
    q.add_argument("--nu-decades", type=float, default=3.0)
    q.add_argument("--block-start", type=int, default=1951)
    q.add_argument("--gamma-threshold", type=float, default=2.0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_analyze)

    q = sub.add_parser("richclub", help="rich-club curves against MRN/MRWN null ensembles")
    q.add_argument("network")
    q.add_argument("--ensemble", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--swap-factor", type=float, default=10)
    q.add_argument("--max-sweeps", type=int, default=100_000)
    q.add_argument("--threads", type=int)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_richclub)

    q = sub.add_parser("simulate", help="run the gravity exchange model")
    q.add_argument("--config", help="JSON file with SimConfig fields; flags override it")
    q.add_argument("--n", type=int)
    q.add_argument("--alpha", type=float)
    q.add_argument("--beta", type=float)
    q.add_argument("--theta", type=float)
    q.add_argument("--density", type=float)
    q.add_argument("--links", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--window", type=int)
    q.add_argument("--drift-tol", type=float)
    q.add_argument("--max-transactions", type=int)
    q.add_argument("--periodic", action="store_true")
    q.add_argument("--replicas", type=int, default=1)
    q.add_argument("--threads", type=int)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    # validate everything that can fail before touching the output directory
    try:
        if args.command == "simulate":
            if args.config:
                _require_files(args.config)
            args._cfg = _sim_config(args)
        elif args.command == "ingest":
            _require_files(args.trade, args.gdp)
            _year_range(args.years)
        elif args.command == "richclub":
            _require_files(args.network)
        elif args.command == "analyze":
            for p in args.networks:
                if not Path(p).exists():
                    raise FileNotFoundError(f"no such file or directory: {p}")
            _require_files(args.gdp)
    except UsageError as exc:
        print(f"tradenet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, TradeNetError) as exc:
        print(f"tradenet: error: {exc}", file=sys.stderr)
        return EXIT_DATA

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = Manifest(args.command, argv, out)
    try:
        args.func(args, man)
    except UsageError as exc:
        man.write("failed", str(exc))
        print(f"tradenet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExhausted, NonConvergence) as exc:
        man.write("failed", str(exc))
        print(f"tradenet: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (OSError, TradeNetError) as exc:
        man.write("failed", str(exc))
        print(f"tradenet: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    man.write("ok")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
