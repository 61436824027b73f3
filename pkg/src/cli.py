"""
Command-line entry point
========================
    python -m src.cli <group> <command> [options]

Exit codes: 0 success, 2 input or parse errors, 3 budget or state errors,
4 numeric-integrity failures. Diagnostics go to stderr; JSON goes to stdout
unless --output is given.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import pandas as pd

from .common import (
    TOOL_NAME,
    TOOL_VERSION,
    InputError,
    NumericIntegrityError,
    ResourceBudgetError,
    Settings,
    StateError,
    load_config,
    meta_block,
    resolve_settings,
    setup_logging,
    write_json,
)
from .complex_core import (
    Graph,
    SimplicialComplex,
    build_epsilon_graph,
    clique_complex,
    from_set_system,
    k_skeleton_of_simplex,
)
from .experiments import aggregate_sweep, load_sweep_spec, run_sweep, write_table
from .formats import read_edge_list, read_faces, read_point_cloud, read_set_system, write_edge_list, write_faces
from .hardness_gadgets import (
    SAT_METHODS,
    alexander_suspension_reduction,
    brute_force_count,
    euler_sat_report,
    format_dimacs,
    random_cnf,
    read_dimacs,
    verify_homology_transfer,
)
from .homology_engine import (
    betti_numbers,
    boundary_matrix,
    clique_euler_characteristic,
    euler_characteristic,
    global_spectrum,
    spectrum,
    write_boundary_triplets,
)
from .lgz_simulator import LgzRunConfig, cost_report, estimate_normalized_betti
from .plot_sweeps import PLOT_KINDS, plot_sweep

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_NUMERIC = 4


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML config (must define 'budgets')")
    common.add_argument("--output", "-o", default=None, help="Artifact path; JSON goes to stdout when omitted")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--max-dim", type=int, default=None)
    common.add_argument("--max-simplices", type=int, default=None)
    common.add_argument("--eigensolver-cap", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument(
        "--timing",
        action="store_true",
        help="Add elapsed seconds to the JSON; omitted by default so seeded reruns are byte-identical",
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true")
    verbosity.add_argument("--quiet", "-q", action="store_true")
    return common


def _input_options() -> argparse.ArgumentParser:
    source = argparse.ArgumentParser(add_help=False)
    group = source.add_mutually_exclusive_group(required=True)
    group.add_argument("--points", help="Point cloud CSV (needs --eps)")
    group.add_argument("--edges", help="Edge list 'n <count>' + 'u v' lines; clique complex")
    group.add_argument("--faces", help="Maximal-face file; abstract complex")
    group.add_argument("--sets", help="Set-system file; needs --set-k")
    source.add_argument("--eps", type=float, default=None, help="Grouping scale for --points")
    source.add_argument("--set-k", type=int, default=None, help="Top dimension for --sets")
    return source


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL_NAME, description="Clique-complex homology workbench.")
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {TOOL_VERSION}")
    common, source = _common_options(), _input_options()
    groups = parser.add_subparsers(dest="group", required=True)

    cx = groups.add_parser("complex", help="Build or export complexes").add_subparsers(dest="command", required=True)
    p = cx.add_parser("build", parents=[common, source], help="Summarize a complex; --faces-out writes it")
    p.add_argument("--faces-out", default=None)
    p.set_defaults(handler=_cmd_complex_build)
    p = cx.add_parser("export", parents=[common, source], help="Write maximal faces (or the graph) to --output")
    p.add_argument("--format", choices=("faces", "edges"), default="faces")
    p.set_defaults(handler=_cmd_complex_export)

    hom = groups.add_parser("homology", help="Betti numbers and boundary matrices").add_subparsers(
        dest="command", required=True
    )
    p = hom.add_parser("betti", parents=[common, source])
    p.set_defaults(handler=_cmd_homology_betti)
    p = hom.add_parser("boundary", parents=[common, source], help="Sparse triplet export of d_k")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(handler=_cmd_homology_boundary)

    p = groups.add_parser("euler", parents=[common, source], help="Euler characteristic")
    p.set_defaults(handler=_cmd_euler, command=None)

    p = groups.add_parser("spectrum", parents=[common, source], help="Hodge Laplacian spectra")
    p.add_argument("--k", type=int, default=None, help="Single dimension; all dimensions when omitted")
    p.set_defaults(handler=_cmd_spectrum, command=None)

    sat = groups.add_parser("sat", help="#SAT through the Euler characteristic").add_subparsers(
        dest="command", required=True
    )
    p = sat.add_parser("count", parents=[common])
    p.add_argument("cnf", help="DIMACS CNF file")
    p.add_argument("--method", choices=SAT_METHODS, default="auto")
    p.add_argument("--verify", action="store_true", help="Cross-check against brute-force enumeration")
    p.set_defaults(handler=_cmd_sat_count)
    p = sat.add_parser("random", parents=[common], help="Write a random uniform CNF in DIMACS")
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--clauses", type=int, required=True)
    p.add_argument("--width", type=int, default=3)
    p.set_defaults(handler=_cmd_sat_random)

    red = groups.add_parser("reduce", help="Homology-transfer reduction").add_subparsers(dest="command", required=True)
    p = red.add_parser("cochordal", parents=[common])
    p.add_argument("--edges", required=True)
    p.add_argument("--legs", action="store_true", help="Also report the duality and suspension legs")
    p.add_argument("--graph-out", default=None, help="Write the complement-of-bipartite graph as an edge list")
    p.add_argument("--density-k", type=int, default=1, help="k for the clique-density certificate of the reduction graph")
    p.set_defaults(handler=_cmd_reduce_cochordal)

    lgz = groups.add_parser("lgz", help="Quantum estimator simulation and cost model").add_subparsers(
        dest="command", required=True
    )
    for name, handler in (("simulate", _cmd_lgz_simulate), ("cost", _cmd_lgz_cost)):
        p = lgz.add_parser(name, parents=[common, source])
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--samples", type=int, default=2000)
        p.add_argument("--qpe-bits", type=int, default=None)
        p.add_argument(
            "--additive-eps", type=float, default=0.05, help="Additive error target epsilon (--eps is the point-cloud scale)"
        )
        p.add_argument("--delta", type=float, default=0.1)
        p.add_argument("--rescale", choices=("exact", "gershgorin"), default=None)
        p.set_defaults(handler=handler)
    lgz.choices["cost"].add_argument("--beta", type=int, default=None, help="Override beta_k")
    lgz.choices["cost"].add_argument("--kappa", type=float, default=None, help="Override kappa")
    lgz.choices["cost"].add_argument("--csv", default=None, help="Append the report as a CSV row")

    rnd = groups.add_parser("random", help="Random-complex sweeps").add_subparsers(dest="command", required=True)
    p = rnd.add_parser("sweep", parents=[common])
    p.add_argument("--spec", required=True, help="Sweep spec (.yaml, .json or .toml)")
    p.add_argument("--csv", default=None, help="Row CSV path (defaults to the sweep file's output key)")
    p.add_argument("--aggregate", default=None, help="Aggregate CSV path")
    p.set_defaults(handler=_cmd_random_sweep)

    p = groups.add_parser("skeleton", parents=[common], help="k-skeleton of the n-simplex")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--faces-out", default=None)
    p.set_defaults(handler=_cmd_skeleton, command=None)

    p = groups.add_parser("plot", parents=[common], help="SVG charts from a sweep CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output-dir", default="results/figures")
    p.add_argument("--kind", choices=PLOT_KINDS, action="append", default=None)
    p.set_defaults(handler=_cmd_plot, command=None)
    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _settings(args: argparse.Namespace) -> Settings:
    config = load_config(args.config) if args.config else None
    overrides = {
        "seed": args.seed,
        "max_dim": args.max_dim,
        "max_simplices": args.max_simplices,
        "eigensolver_cap": args.eigensolver_cap,
        "threads": args.threads,
        "qpe_bits": getattr(args, "qpe_bits", None),
        "rescale": getattr(args, "rescale", None),
    }
    return resolve_settings(config, overrides)


def _command_name(args: argparse.Namespace) -> str:
    return " ".join(part for part in (args.group, args.command) if part)


def _graph_from_args(args: argparse.Namespace) -> Optional[Graph]:
    if args.points:
        if args.eps is None:
            raise InputError("--points needs --eps")
        return build_epsilon_graph(read_point_cloud(args.points), args.eps)
    if args.edges:
        return read_edge_list(args.edges)
    return None


def _complex_from_args(args: argparse.Namespace, settings: Settings) -> SimplicialComplex:
    graph = _graph_from_args(args)
    if graph is not None:
        return clique_complex(graph, max_dim=settings.max_dim, max_simplices=settings.max_simplices)
    if args.faces:
        return read_faces(args.faces)
    if args.set_k is None:
        raise InputError("--sets needs --set-k")
    return from_set_system(read_set_system(args.sets), args.set_k, max_simplices=settings.max_simplices)


def _emit(payload: dict, args: argparse.Namespace, settings: Settings, started: float, **meta) -> None:
    body = dict(payload)
    body["meta"] = meta_block(_command_name(args), settings, **meta)
    elapsed = time.perf_counter() - started
    LOGGER.info("%s finished in %.3fs", _command_name(args), elapsed)
    if args.timing:
        body["elapsed"] = elapsed
    text = write_json(body, args.output)
    if args.output is None or str(args.output) == "-":
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_complex_build(args, settings, started) -> None:
    cx = _complex_from_args(args, settings)
    if args.faces_out:
        write_faces(cx, args.faces_out)
    _emit({"complex": cx.summary()}, args, settings, started)


def _cmd_complex_export(args, settings, started) -> None:
    if not args.output:
        raise InputError("complex export needs --output")
    if args.format == "edges":
        graph = _graph_from_args(args)
        if graph is None:
            raise InputError("--format edges needs --points or --edges input")
        write_edge_list(graph, args.output)
    else:
        write_faces(_complex_from_args(args, settings), args.output)


def _cmd_homology_betti(args, settings, started) -> None:
    cx = _complex_from_args(args, settings)
    result = betti_numbers(cx, settings.primes, settings.rational_fallback)
    _emit(result.to_dict(), args, settings, started)


def _cmd_homology_boundary(args, settings, started) -> None:
    if not args.output:
        raise InputError("homology boundary needs --output for the triplet file")
    cx = _complex_from_args(args, settings)
    write_boundary_triplets(boundary_matrix(cx, args.k), args.output)


def _cmd_euler(args, settings, started) -> None:
    graph = _graph_from_args(args)
    if graph is not None and args.max_dim is None:
        chi, counts = clique_euler_characteristic(graph, max_states=settings.max_simplices)
        method = "clique-polynomial"
    else:
        cx = _complex_from_args(args, settings)
        chi, counts, method = euler_characteristic(cx), cx.counts, "enumeration"
    _emit({"chi": chi, "simplex_counts": counts, "method": method}, args, settings, started)


def _cmd_spectrum(args, settings, started) -> None:
    cx = _complex_from_args(args, settings)
    homology = betti_numbers(cx, settings.primes, settings.rational_fallback)
    dims = [args.k] if args.k is not None else [k for k in range(len(homology.betti)) if cx.count(k)]
    per_k = []
    for k in dims:
        expected = homology.betti[k] if k < len(homology.betti) else None
        per_k.append(spectrum(cx, k, settings.eigensolver_cap, expected_betti=expected).to_dict())
    payload = {"spectra": per_k, "betti": list(homology.betti)}
    if args.k is None and not cx.truncated:
        payload["global"] = {key: v for key, v in global_spectrum(cx, settings.eigensolver_cap).items() if key != "per_k"}
    _emit(payload, args, settings, started, tolerance_rule="max(|S_k|, n) * machine_eps * lambda_max")


def _cmd_sat_count(args, settings, started) -> None:
    formula = read_dimacs(args.cnf)
    report = euler_sat_report(formula, method=args.method, max_simplices=settings.max_simplices)
    payload = report.to_dict()
    if args.verify:
        brute = brute_force_count(formula, max_vars=settings.brute_force_max_vars)
        payload["brute_force"] = brute
        if brute != report.solutions:
            raise NumericIntegrityError(f"Euler count {report.solutions} != brute force {brute}")
    _emit(payload, args, settings, started)


def _cmd_sat_random(args, settings, started) -> None:
    text = format_dimacs(random_cnf(args.vars, args.clauses, args.width, settings.seed))
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_reduce_cochordal(args, settings, started) -> None:
    graph = read_edge_list(args.edges)
    report = verify_homology_transfer(
        graph,
        settings.primes,
        max_simplices=settings.max_simplices,
        include_legs=args.legs,
        density_k=args.density_k,
    )
    if args.graph_out:
        write_edge_list(alexander_suspension_reduction(graph), args.graph_out)
    _emit(report.to_dict(), args, settings, started)


def _lgz_config(args, settings) -> LgzRunConfig:
    return LgzRunConfig(
        k=args.k,
        samples_M=args.samples,
        qpe_bits=settings.qpe_bits,
        additive_eps=args.additive_eps,
        mult_delta=args.delta,
        seed=settings.seed,
        rescale=settings.rescale,
        eigensolver_cap=settings.eigensolver_cap,
    )


def _cmd_lgz_simulate(args, settings, started) -> None:
    cx = _complex_from_args(args, settings)
    estimate = estimate_normalized_betti(cx, args.k, _lgz_config(args, settings))
    _emit(estimate.to_dict(), args, settings, started)


def _cmd_lgz_cost(args, settings, started) -> None:
    cx = _complex_from_args(args, settings)
    report = cost_report(
        cx,
        args.k,
        _lgz_config(args, settings),
        beta_k=args.beta,
        kappa=args.kappa,
        clique_dense_exponent=settings.clique_dense_exponent,
    )
    if args.csv:
        row = pd.DataFrame([{k: v for k, v in report.to_dict().items() if k != "flags"}])
        row["flags"] = ";".join(report.flags)
        exists = Path(args.csv).exists()
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        row.to_csv(args.csv, index=False, mode="a" if exists else "w", header=not exists)
    _emit(report.to_dict(), args, settings, started)


def _cmd_random_sweep(args, settings, started) -> None:
    spec = load_sweep_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    settings.seed = spec.seed
    rows = run_sweep(spec, settings)
    csv_path = args.csv or spec.output or "results/sweep.csv"
    write_table(rows, csv_path)
    agg = aggregate_sweep(rows)
    agg_path = args.aggregate or str(Path(csv_path).with_name(Path(csv_path).stem + "_aggregate.csv"))
    write_table(agg, agg_path)
    summary = {
        "rows": len(rows),
        "skipped": int((rows["status"] == "skipped").sum()),
        "csv": csv_path,
        "aggregate_csv": agg_path,
    }
    _emit(summary, args, settings, started)


def _cmd_skeleton(args, settings, started) -> None:
    cx = k_skeleton_of_simplex(args.n, args.k, max_simplices=settings.max_simplices)
    if args.faces_out:
        write_faces(cx, args.faces_out)
    homology = betti_numbers(cx, settings.primes, settings.rational_fallback)
    _emit({"complex": cx.summary(), **homology.to_dict()}, args, settings, started)


def _cmd_plot(args, settings, started) -> None:
    written = plot_sweep(pd.read_csv(args.input), args.output_dir, tuple(args.kind or PLOT_KINDS))
    LOGGER.info("Wrote %s", ", ".join(str(p) for p in written))


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.getLogger().setLevel(level)
    handler: Callable = args.handler
    started = time.perf_counter()
    try:
        settings = _settings(args)
        handler(args, settings, started)
    except (ValueError, FileNotFoundError) as exc:
        LOGGER.error("%s", exc)
        return EXIT_INPUT
    except (ResourceBudgetError, StateError) as exc:
        LOGGER.error("%s", exc)
        return EXIT_RESOURCE
    except NumericIntegrityError as exc:
        LOGGER.error("%s", exc)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    setup_logging()
    sys.exit(main())
