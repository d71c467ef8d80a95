"""Command-line front end: ``keiretsunet {stats,analyze,null,battery,generate}``.

Exit codes: 0 success, 2 input or configuration error, 3 the data cannot
support the requested analysis.

Options can also come from ``--config FILE`` holding ``key = value`` lines
(keys are long option names); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from collections import Counter, defaultdict
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .community import consensus, write_ensemble, write_partition
from .errors import DegenerateAnalysisError, InputError
from .graph import ProjectionConfig, Weighting, write_bipartite_dot, write_dot, write_graphml
from .ingest import (
    FilterSpec,
    Macroarea,
    apply_filter,
    descriptive_stats,
    load_macroareas,
    macroarea_of,
    parse_memberships,
    parse_subsidiaries,
)
from .nullmodel import null_battery
from .stats import (
    BatteryRow,
    analyze,
    build_network,
    describe_filter,
    parse_battery,
    test_battery,
    write_results,
    write_table,
    write_wide,
)
from .synth import PlantSpec, generate, write_dataset

logger = logging.getLogger("keiretsunet")

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3

DEFAULTS = {
    "seed": 0,
    "runs": 1000,
    "mc_samples": 9999,
    "min_shared": 1,
    "replicas": 20,
    "swaps_per_edge": 20,
    "resolution": 1.0,
    "threads": 1,
}


class CLIError(InputError):
    pass


# -- argument parsing --------------------------------------------------------


def _inputs(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("inputs")
    g.add_argument("--data-dir", type=Path, help="directory holding subsidiaries.csv, memberships.csv[, macroareas.csv]")
    g.add_argument("--subsidiaries", type=Path, help="subsidiary survey CSV")
    g.add_argument("--memberships", type=Path, help="keiretsu membership CSV")
    g.add_argument("--macroareas", type=Path, help="country to macro-area CSV (default: bundled table)")


def _filters(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("filters")
    g.add_argument("--filter-region", choices=[m.value for m in Macroarea], help="keep one macro-area")
    g.add_argument("--filter-sector", type=int, action="append", help="keep a sector code (repeatable)")
    g.add_argument("--snapshot-year", type=int, help="keep subsidiaries established on or before this year")
    g.add_argument(
        "--include-nonmanufacturing",
        action="store_true",
        help="keep non-manufacturing subsidiaries (dropped by default)",
    )


def _analysis(p: argparse.ArgumentParser, weighted: bool = True) -> None:
    g = p.add_argument_group("analysis")
    g.add_argument("--min-shared", type=int, default=DEFAULTS["min_shared"], help="co-owned subsidiaries needed for a link")
    if weighted:
        g.add_argument("--weighted", action="store_true", help="cosine-similarity edge weights")
    g.add_argument("--runs", type=int, default=DEFAULTS["runs"], help="Louvain runs per network")
    g.add_argument("--mc-samples", type=int, default=DEFAULTS["mc_samples"], help="Monte-Carlo tables per test")
    g.add_argument("--resolution", type=float, default=DEFAULTS["resolution"])
    g.add_argument("--include-unaffiliated", action="store_true", help="add an Unaffiliated column")
    g.add_argument("--single-group", action="store_true", help="count dual-affiliated investors in their first group only")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value file mirroring the long options")
    p.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    p.add_argument("--threads", type=int, default=DEFAULTS["threads"], help="worker processes for Louvain runs")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="keiretsunet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="store_true", help="print version and default configuration")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("stats", help="descriptive co-investment tables")
    _common(p)
    _inputs(p)
    _filters(p)
    p.add_argument("--group-by", choices=["macroarea", "sector"], default="macroarea")
    p.add_argument("--out", type=Path, help="output directory (default: print to stdout)")

    p = sub.add_parser("analyze", help="full pipeline for one configuration")
    _common(p)
    _inputs(p)
    _filters(p)
    _analysis(p)
    p.add_argument("--out", type=Path, help="output directory (required)")

    p = sub.add_parser("null", help="configuration-model null replicas")
    _common(p)
    _inputs(p)
    _filters(p)
    _analysis(p)
    p.add_argument("--replicas", type=int, default=DEFAULTS["replicas"])
    p.add_argument("--swaps-per-edge", type=int, default=DEFAULTS["swaps_per_edge"])
    p.add_argument("--out", type=Path, help="output directory (required)")

    p = sub.add_parser("battery", help="hypothesis battery in table layout")
    _common(p)
    _inputs(p)
    _analysis(p, weighted=False)
    p.add_argument("--battery", type=Path, required=True, help="CSV: label,macroarea,sector_codes,snapshot_year,weighting")
    p.add_argument("--include-nonmanufacturing", action="store_true")
    p.add_argument("--out", type=Path, help="output directory (required)")

    p = sub.add_parser("generate", help="synthetic dataset with planted structure")
    _common(p)
    spec = PlantSpec()
    p.add_argument("--groups", type=int, default=spec.groups)
    p.add_argument("--investors-per-group", type=int, default=spec.investors_per_group)
    p.add_argument("--unaffiliated", type=int, default=spec.unaffiliated_investors)
    p.add_argument("--subsidiaries", type=int, default=spec.subsidiaries)
    p.add_argument("--p-in", type=float, default=spec.p_in)
    p.add_argument("--out", type=Path, help="output directory (required)")
    return parser


def _read_config(path: Path) -> dict[str, str]:
    if not path.is_file():
        raise CLIError(f"config file not found: {path}")
    values = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CLIError(f"{path}:{n}: expected key = value")
        values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


def _apply_config(sub: argparse.ArgumentParser, config: dict[str, str]) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in config.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise CLIError(f"unknown config key {key!r}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            conv = action.type or str
            defaults[key] = [conv(x.strip()) for x in raw.split(",") if x.strip()]
        else:
            conv = action.type or str
            try:
                defaults[key] = conv(raw)
            except ValueError:
                raise CLIError(f"config key {key!r}: bad value {raw!r}") from None
            if action.choices is not None and defaults[key] not in action.choices:
                raise CLIError(f"config key {key!r}: {raw!r} not one of {', '.join(map(str, action.choices))}")
    sub.set_defaults(**defaults)


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _apply_config(sub, _read_config(args.config))
        args = parser.parse_args(argv)
    return args


# -- helpers -----------------------------------------------------------------


class Timer:
    def __init__(self):
        self.stages: dict[str, float] = {}

    @contextmanager
    def __call__(self, stage: str):
        t0 = time.perf_counter()
        yield
        self.stages[stage] = round((time.perf_counter() - t0) * 1000.0, 3)


def _resolve(args, name: str, required: bool = True) -> Path | None:
    path = getattr(args, name, None)
    if path is None and args.data_dir is not None:
        candidate = args.data_dir / f"{name}.csv"
        if candidate.exists() or required:
            path = candidate
    if path is None:
        if required:
            raise CLIError(f"--{name} (or --data-dir) is required")
        return None
    if not path.is_file():
        raise CLIError(f"input file not found: {path}")
    return path


def _load(args):
    paths = {
        "subsidiaries": _resolve(args, "subsidiaries"),
        "memberships": _resolve(args, "memberships", required=getattr(args, "command", "") != "stats"),
        "macroareas": _resolve(args, "macroareas", required=False),
    }
    with paths["subsidiaries"].open(encoding="utf-8", newline="") as fh:
        records = parse_subsidiaries(fh, name=str(paths["subsidiaries"]))
    memberships = []
    if paths["memberships"] is not None:
        with paths["memberships"].open(encoding="utf-8", newline="") as fh:
            memberships = parse_memberships(fh, name=str(paths["memberships"]))
    if paths["macroareas"] is not None:
        with paths["macroareas"].open(encoding="utf-8", newline="") as fh:
            macro = load_macroareas(fh)
    else:
        macro = load_macroareas()
    return records, memberships, macro, {k: v for k, v in paths.items() if v is not None}


def _filter_spec(args) -> FilterSpec:
    return FilterSpec(
        macroarea=args.filter_region,
        sector_codes=frozenset(args.filter_sector) if args.filter_sector else None,
        snapshot_year=args.snapshot_year,
        manufacturing_only=not args.include_nonmanufacturing,
    )


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _config_snapshot(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if isinstance(v, Path):
            v = str(v)
        elif isinstance(v, (list, tuple)):
            v = [str(x) if isinstance(x, Path) else x for x in v]
        out[k] = v
    return out


def _write_manifest(out: Path, argv: list[str], args, inputs: dict[str, Path], timer: Timer) -> None:
    manifest = {
        "command_line": " ".join(["keiretsunet", *argv]),
        "tool_version": __version__,
        "seed": args.seed,
        "config": _config_snapshot(args),
        "inputs": {k: {"path": str(p), "sha256": _digest(p)} for k, p in inputs.items()},
        "timing_ms": timer.stages,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _open(out: Path, name: str):
    return (out / name).open("w", encoding="utf-8", newline="")


# -- commands ----------------------------------------------------------------


def cmd_stats(args, argv) -> int:
    timer = Timer()
    with timer("load"):
        records, _, macro, inputs = _load(args)
    with timer("stats"):
        records = apply_filter(records, _filter_spec(args), macro)
        rows = descriptive_stats(records, args.group_by, macro)
        sizes = _size_table(records, args.group_by, macro)
        countries = Counter(r.country for r in records)

    if args.out is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(rows[0].COLUMNS if rows else ["group"])
        for row in rows:
            writer.writerow(row.as_row())
        return EXIT_OK

    args.out.mkdir(parents=True, exist_ok=True)
    with _open(args.out, f"coinvestors_by_{args.group_by}.csv") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group", "n", "avg", "1", "2", "3", "4", "5+", "pct_2plus"])
        for row in rows:
            writer.writerow(row.as_row())
    with _open(args.out, f"size_by_{args.group_by}.csv") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group", "n", "avg_employees", "avg_capital"])
        writer.writerows(sizes)
    with _open(args.out, "firms_by_country.csv") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["country", "n"])
        for country, n in sorted(countries.items(), key=lambda kv: (-kv[1], kv[0])):
            writer.writerow([country, n])
    _write_manifest(args.out, argv, args, inputs, timer)
    return EXIT_OK


def _size_table(records, group_by, macro):
    groups = defaultdict(list)
    for r in records:
        key = macroarea_of(r.country, macro).value if group_by == "macroarea" else r.sector_code
        groups[key].append(r)
    if group_by == "macroarea":
        order = [m.value for m in Macroarea if m.value in groups]
    else:
        order = sorted(groups)
    out = []
    for key in order:
        rs = groups[key]
        emp = [r.num_employees for r in rs if r.num_employees is not None]
        cap = [r.paidup_capital for r in rs if r.paidup_capital is not None]
        out.append(
            [
                key,
                len(rs),
                f"{sum(emp) / len(emp):.1f}" if emp else "",
                f"{sum(cap) / len(cap):.3f}" if cap else "",
            ]
        )
    return out


def cmd_analyze(args, argv) -> int:
    timer = Timer()
    with timer("load"):
        records, memberships, macro, inputs = _load(args)
    spec = _filter_spec(args)
    projection = ProjectionConfig(args.min_shared, Weighting.COSINE if args.weighted else Weighting.UNWEIGHTED)
    with timer("analyze"):
        res = analyze(
            records,
            memberships,
            spec,
            projection,
            runs=args.runs,
            mc_samples=args.mc_samples,
            seed=args.seed,
            include_unaffiliated=args.include_unaffiliated,
            single_group=args.single_group,
            resolution=args.resolution,
            macroareas=macro,
            workers=args.threads,
        )
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    with timer("write"):
        with _open(out, "results.csv") as fh:
            write_results([BatteryRow(describe_filter(spec), projection.weighting, res.result)], fh)
        with _open(out, "contingency.csv") as fh:
            write_table(res.table, fh)
        with _open(out, "partition.csv") as fh:
            write_partition(consensus(res.ensemble), fh)
        with _open(out, "ensemble.csv") as fh:
            write_ensemble(res.ensemble, fh)
        write_graphml(res.network, out / "network.graphml")
        with _open(out, "network.dot") as fh:
            write_dot(res.network, fh)
        with _open(out, "bipartite.dot") as fh:
            write_bipartite_dot(res.bipartite, fh)
    _write_manifest(out, argv, args, inputs, timer)
    r = res.result
    print(f"chi_square={r.chi_square:.4f} p_value={r.p_value:.6f} verdict={r.verdict.value} {r.stars}".rstrip())
    return EXIT_OK


def cmd_null(args, argv) -> int:
    timer = Timer()
    with timer("load"):
        records, memberships, macro, inputs = _load(args)
    spec = _filter_spec(args)
    projection = ProjectionConfig(args.min_shared, Weighting.COSINE if args.weighted else Weighting.UNWEIGHTED)
    with timer("build"):
        _, net = build_network(records, memberships, spec, projection, macro)
    with timer("null"):
        results = null_battery(
            net,
            memberships,
            args.replicas,
            args.seed,
            runs=args.runs,
            mc_samples=args.mc_samples,
            swaps_per_edge=args.swaps_per_edge,
            include_unaffiliated=args.include_unaffiliated,
            resolution=args.resolution,
            workers=args.threads,
        )
    args.out.mkdir(parents=True, exist_ok=True)
    label = describe_filter(spec)
    with _open(args.out, "null_results.csv") as fh:
        write_results([BatteryRow(label, projection.weighting, r) for r in results], fh, replicas=True)
    _write_manifest(args.out, argv, args, inputs, timer)
    ps = sorted(r.p_value for r in results)
    median = ps[len(ps) // 2] if len(ps) % 2 else 0.5 * (ps[len(ps) // 2 - 1] + ps[len(ps) // 2])
    print(f"replicas={len(ps)} median_p={median:.6f} rejected_at_05={sum(p < 0.05 for p in ps)}")
    return EXIT_OK


def cmd_battery(args, argv) -> int:
    timer = Timer()
    with timer("load"):
        records, memberships, macro, inputs = _load(args)
        if not args.battery.is_file():
            raise CLIError(f"battery file not found: {args.battery}")
        with args.battery.open(encoding="utf-8", newline="") as fh:
            entries = parse_battery(
                fh, default_min_shared=args.min_shared, manufacturing_only=not args.include_nonmanufacturing
            )
        inputs["battery"] = args.battery
    with timer("battery"):
        rows = test_battery(
            records,
            memberships,
            entries,
            runs=args.runs,
            mc_samples=args.mc_samples,
            seed=args.seed,
            include_unaffiliated=args.include_unaffiliated,
            single_group=args.single_group,
            resolution=args.resolution,
            macroareas=macro,
            workers=args.threads,
        )
    args.out.mkdir(parents=True, exist_ok=True)
    with _open(args.out, "battery.csv") as fh:
        write_results(rows, fh)
    with _open(args.out, "battery_wide.csv") as fh:
        write_wide(rows, fh)
    _write_manifest(args.out, argv, args, inputs, timer)
    return EXIT_OK


def cmd_generate(args, argv) -> int:
    spec = PlantSpec(
        groups=args.groups,
        investors_per_group=args.investors_per_group,
        unaffiliated_investors=args.unaffiliated,
        subsidiaries=args.subsidiaries,
        p_in=args.p_in,
        seed=args.seed,
    )
    timer = Timer()
    with timer("generate"):
        records, memberships = generate(spec)
        paths = write_dataset(records, memberships, args.out)
    _write_manifest(args.out, argv, args, {}, timer)
    manifest = json.loads((args.out / "manifest.json").read_text(encoding="utf-8"))
    manifest["plant_spec"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(spec).items()}
    manifest["outputs"] = {k: {"path": str(p), "sha256": _digest(p)} for k, p in paths.items()}
    (args.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


COMMANDS = {
    "stats": cmd_stats,
    "analyze": cmd_analyze,
    "null": cmd_null,
    "battery": cmd_battery,
    "generate": cmd_generate,
}


def _version_text() -> str:
    spec = PlantSpec()
    lines = [f"keiretsunet {__version__}", "default configuration:"]
    lines += [f"  {k.replace('_', '-')} = {v}" for k, v in DEFAULTS.items()]
    lines.append(f"  p-in = {spec.p_in}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.version:
        print(_version_text())
        return EXIT_OK
    if args.command is None:
        build_parser().print_usage(sys.stderr)
        return EXIT_INPUT

    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        if args.command != "stats" and args.out is None:
            raise CLIError("--out is required")
        return COMMANDS[args.command](args, argv)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateAnalysisError as exc:
        msg = str(exc)
        if "insufficient co-investment structure" not in msg:
            msg = f"insufficient co-investment structure ({msg})"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
