"""Command-line entry point for reproducible batch runs.

Five subcommands: ``generate`` grows a network and writes its node/edge
tables, ``metrics`` measures a graph into a JSON report plus optional CSV
dumps, ``fit`` grid-searches model parameters against a target graph,
``compare`` runs model-vs-model significance tests, and ``rewire`` produces
a degree-preserving null model. Every artifact embeds the full option set
and seed it was produced from, and reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

import numpy as np

from . import baselines, fitting, metrics
from .graph import (
    GraphFileError,
    TemporalAttributedDigraph,
    bfs_seed_subgraph,
    read_graph,
    write_graph,
)
from .schedule import GrowthSchedule
from .walk import WalkParams

__all__ = ["main"]


class CliError(Exception):
    """User-facing failure; message printed to stderr, exit status 2."""


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None


def _write_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_echo(args: argparse.Namespace) -> dict:
    options = {k: v for k, v in vars(args).items() if k != "func"}
    return {"command": args.command, "options": options}


def _read_target(path: str) -> TemporalAttributedDigraph:
    try:
        return read_graph(path)
    except (OSError, GraphFileError) as exc:
        raise CliError(str(exc)) from None


def _parse_labels(labels: str | None, weights: str | None):
    if labels is None:
        return None
    names = [x.strip() for x in labels.split(",") if x.strip()]
    if not names:
        raise CliError("--attr-labels is empty")
    if weights is None:
        probs = [1.0 / len(names)] * len(names)
    else:
        try:
            probs = [float(x) for x in weights.split(",")]
        except ValueError as exc:
            raise CliError(f"--attr-weights: {exc}") from None
        if len(probs) != len(names):
            raise CliError("--attr-weights length differs from --attr-labels")
        total = sum(probs)
        if total <= 0:
            raise CliError("--attr-weights must sum to a positive value")
        probs = [p / total for p in probs]
    return dict(zip(names, probs))


def _build_schedule_and_initial(args, params_attributed: bool):
    """Resolve the schedule and initial graph for ``generate``."""
    if args.from_observed:
        observed = _read_target(args.from_observed)
        initial = bfs_seed_subgraph(observed, 0, fitting.SEED_FRACTION)
        if args.nodes is None:
            schedule = GrowthSchedule.from_observed(observed, initial.node_count)
        else:
            full = GrowthSchedule.from_observed(observed, initial.node_count)
            steps = args.nodes - initial.node_count
            if steps < 1:
                raise CliError("--nodes leaves no growth steps after the seed graph")
            if steps > full.steps:
                raise CliError(
                    f"--nodes asks for {steps} steps but the observed graph "
                    f"only supports {full.steps}"
                )
            schedule = GrowthSchedule(
                [full.m(t) for t in range(steps)],
                [full.epoch(t) for t in range(steps)],
                {
                    epoch: full.attribute_distribution(epoch)
                    for t in range(steps)
                    for epoch in [full.epoch(t)]
                }
                if full.attributed
                else None,
            )
        return schedule, initial

    attr_dist = _parse_labels(args.attr_labels, args.attr_weights)
    if params_attributed and attr_dist is None:
        raise CliError(
            "attributed parameters need --attr-labels (or --from-observed)"
        )
    if args.init:
        initial = _read_target(args.init)
    else:
        initial = TemporalAttributedDigraph()
        rng = random.Random(fitting.derive_seed(args.seed, 0xA77))
        for _ in range(2):
            label = None
            if attr_dist is not None:
                r = rng.random()
                acc = 0.0
                for name, p in attr_dist.items():
                    acc += p
                    if r < acc:
                        label = name
                        break
                else:
                    label = name
            initial.add_node(args.epoch, label)
        initial.add_edge(1, 0)
    if args.nodes is None:
        raise CliError("--nodes is required without --from-observed")
    steps = args.nodes - initial.node_count
    if steps < 1:
        raise CliError("--nodes must exceed the initial graph size")
    if args.dpl_alpha is not None:
        schedule = GrowthSchedule.densifying(
            steps,
            args.dpl_alpha,
            args.m,
            initial.node_count,
            epoch=args.epoch,
            attr_dist=attr_dist,
        )
    else:
        schedule = GrowthSchedule.constant(
            steps, args.m, epoch=args.epoch, attr_dist=attr_dist
        )
    return schedule, initial


def _cmd_generate(args) -> int:
    params = _load_json(args.params) if args.params else {}
    if args.model == "arw":
        walk_params = WalkParams.from_dict(params)  # validates early
        attributed = walk_params.attributed
    else:
        attributed = False
    if args.schedule:
        schedule = GrowthSchedule.from_json(open(args.schedule, encoding="utf-8").read())
        _, initial = _build_schedule_and_initial(args, attributed)
    else:
        schedule, initial = _build_schedule_and_initial(args, attributed)
    try:
        graph = fitting.grow_model(args.model, initial, schedule, params, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    write_graph(graph, args.out)
    _write_json(os.path.join(args.out, "config.json"), _config_echo(args))
    print(f"generated {graph.node_count} nodes, {graph.edge_count} edges -> {args.out}")
    return 0


def _histogram_csv(path, edges, counts, header):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            fh.write(f"{lo:.6g}\t{hi:.6g}\t{int(c)}\n")


def _cmd_metrics(args) -> int:
    graph = _read_target(args.graph)
    report: dict = {
        "config": _config_echo(args),
        "nodes": graph.node_count,
        "edges": graph.edge_count,
        "attributed": graph.attributed,
        "ingest_stats": vars(graph.ingest_stats),
    }
    indeg = metrics.in_degrees(graph)
    report["mean_out_degree"] = (
        graph.edge_count / graph.node_count if graph.node_count else 0.0
    )
    try:
        report["mean_local_clustering"] = metrics.mean_local_clustering(graph)
    except ValueError as exc:
        report["mean_local_clustering"] = None
        report["mean_local_clustering_error"] = str(exc)
    try:
        fit = metrics.lognormal_fit(indeg)
        report["lognormal"] = {"mu": fit.mu, "sigma": fit.sigma}
    except ValueError as exc:
        report["lognormal"] = None
        report["lognormal_error"] = str(exc)
    try:
        report["dpl_exponent"] = metrics.dpl_exponent(
            metrics.densification_series(graph, args.snapshots)
        )
    except ValueError as exc:
        report["dpl_exponent"] = None
        report["dpl_exponent_error"] = str(exc)
    try:
        report["effective_diameter"] = metrics.effective_diameter(
            graph, args.sample_size, args.seed
        )
        report["mean_path_length"] = metrics.mean_path_length(
            graph, args.sample_size, args.seed
        )
    except ValueError as exc:
        report["effective_diameter"] = None
        report["mean_path_length"] = None
        report["distance_error"] = str(exc)
    try:
        report["assortativity"] = metrics.global_assortativity(graph)
    except ValueError as exc:
        report["assortativity"] = None
        report["assortativity_error_reason"] = str(exc)

    if args.dump_csv:
        csv_dir = args.csv_dir or os.path.dirname(os.path.abspath(args.out))
        os.makedirs(csv_dir, exist_ok=True)
        degrees, counts = np.unique(indeg, return_counts=True)
        with open(
            os.path.join(csv_dir, "degree_histogram.csv"),
            "w",
            encoding="utf-8",
            newline="\n",
        ) as fh:
            fh.write("in_degree\tcount\n")
            for d, c in zip(degrees, counts):
                fh.write(f"{int(d)}\t{int(c)}\n")
        _, cvals = metrics.local_clustering_values(graph)
        if cvals.size:
            counts, edges = np.histogram(cvals, bins=20, range=(0.0, 1.0))
            _histogram_csv(
                os.path.join(csv_dir, "clustering_histogram.csv"),
                edges,
                counts,
                "bin_lo\tbin_hi\tcount",
            )
        curve = metrics.DegreeClusteringCurve.from_graph(graph)
        with open(
            os.path.join(csv_dir, "degree_clustering_curve.csv"),
            "w",
            encoding="utf-8",
            newline="\n",
        ) as fh:
            fh.write("in_degree\tnode_count\tmean_clustering\n")
            for d, n, c in zip(curve.degrees, curve.counts, curve.mean_clustering):
                fh.write(f"{int(d)}\t{int(n)}\t{c:.10g}\n")
        if report["assortativity"] is not None:
            nodes = range(graph.node_count)
            if graph.node_count > args.local_assort_sample:
                nodes = random.Random(args.seed).sample(
                    range(graph.node_count), args.local_assort_sample
                )
            values = metrics.local_assortativity_values(graph, nodes)
            if values.size:
                counts, edges = np.histogram(values, bins=41, range=(-1.0, 1.0))
                _histogram_csv(
                    os.path.join(csv_dir, "local_assortativity_histogram.csv"),
                    edges,
                    counts,
                    "bin_lo\tbin_hi\tcount",
                )
        report["csv_dir"] = csv_dir

    _write_json(args.out, report)
    print(f"metrics report -> {args.out}")
    return 0


def _cmd_fit(args) -> int:
    observed = _read_target(args.target)
    if args.grid_file:
        payload = _load_json(args.grid_file)
        if isinstance(payload, list):
            grid = fitting.GridSpec(cells=payload, replicates=args.replicates)
        else:
            grid = fitting.GridSpec(values=payload, replicates=args.replicates)
    else:
        try:
            grid = fitting.GridSpec.default(
                args.model, observed.attributed, replicates=args.replicates
            )
        except ValueError as exc:
            raise CliError(str(exc)) from None
    try:
        result = fitting.fit_grid(
            observed,
            args.model,
            grid,
            rng_seed=args.seed,
            workers=args.workers,
            include_assortativity=not args.exclude_assortativity,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    payload = {"config": _config_echo(args), **result.to_dict()}
    _write_json(args.out, payload)
    print(
        f"fit {args.model}: best {json.dumps(result.best_params, sort_keys=True)} "
        f"-> {args.out}"
    )
    return 0


def _load_model_file(path: str) -> tuple[str, dict]:
    payload = _load_json(path)
    if not isinstance(payload, dict) or "model" not in payload:
        raise CliError(f"{path}: expected an object with 'model' and 'params'")
    return payload["model"], payload.get("params", {})


def _cmd_compare(args) -> int:
    observed = _read_target(args.target)
    model_a = _load_model_file(args.a)
    model_b = _load_model_file(args.b)
    alphas = tuple(float(x) for x in args.alphas.split(",") if x.strip())
    try:
        result = fitting.compare_models(
            observed,
            model_a,
            model_b,
            replicates=args.replicates,
            rng_seed=args.seed,
            alphas=alphas,
            n_perm=args.n_perm,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    payload = {
        "config": _config_echo(args),
        "model_a": {"model": model_a[0], "params": model_a[1]},
        "model_b": {"model": model_b[0], "params": model_b[1]},
        **result.to_dict(),
    }
    _write_json(args.out, payload)
    print(f"comparison report -> {args.out}")
    return 0


def _cmd_rewire(args) -> int:
    graph = _read_target(args.graph)
    try:
        rewired = baselines.configuration_rewire(graph, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    write_graph(rewired, args.out)
    _write_json(os.path.join(args.out, "config.json"), _config_echo(args))
    print(f"rewired graph -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netgrow",
        description="Grow, measure, fit and compare attributed citation-style networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="grow a network and write its tables")
    gen.add_argument("--model", required=True, choices=fitting.MODEL_TAGS)
    gen.add_argument("--params", help="JSON file with model parameters")
    gen.add_argument("--nodes", type=int, help="total node count of the output")
    gen.add_argument("--m", type=float, default=3.0, help="constant out-degree target")
    gen.add_argument("--dpl-alpha", type=float, help="densification exponent for m(t)")
    gen.add_argument("--epoch", type=int, default=0, help="epoch for synthetic runs")
    gen.add_argument("--attr-labels", help="comma-separated attribute labels")
    gen.add_argument("--attr-weights", help="comma-separated label probabilities")
    gen.add_argument("--schedule", help="JSON schedule file")
    gen.add_argument("--from-observed", help="graph dir to derive schedule and seed from")
    gen.add_argument("--init", help="graph dir holding an explicit initial graph")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    met = sub.add_parser("metrics", help="measure a graph into a JSON report")
    met.add_argument("--graph", required=True)
    met.add_argument("--out", required=True)
    met.add_argument("--dump-csv", action="store_true")
    met.add_argument("--csv-dir")
    met.add_argument("--sample-size", type=int, default=1000)
    met.add_argument("--snapshots", type=int, default=10)
    met.add_argument("--local-assort-sample", type=int, default=1000)
    met.add_argument("--seed", type=int, default=0)
    met.set_defaults(func=_cmd_metrics)

    fit = sub.add_parser("fit", help="grid-search model parameters against a target")
    fit.add_argument("--target", required=True)
    fit.add_argument("--model", required=True, choices=fitting.MODEL_TAGS)
    fit.add_argument("--grid-file", help="JSON: {param: [values]} or [ {cell}, ... ]")
    fit.add_argument("--replicates", type=int, default=5)
    fit.add_argument("--workers", type=int, default=1)
    fit.add_argument("--exclude-assortativity", action="store_true")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=_cmd_fit)

    cmp_ = sub.add_parser("compare", help="model-vs-model significance tests")
    cmp_.add_argument("--target", required=True)
    cmp_.add_argument("--a", required=True, help="JSON {model, params} for model A")
    cmp_.add_argument("--b", required=True, help="JSON {model, params} for model B")
    cmp_.add_argument("--replicates", type=int, default=30)
    cmp_.add_argument("--n-perm", type=int, default=10_000)
    cmp_.add_argument("--alphas", default="0.01,0.001")
    cmp_.add_argument("--seed", type=int, default=0)
    cmp_.add_argument("--out", required=True)
    cmp_.set_defaults(func=_cmd_compare)

    rew = sub.add_parser("rewire", help="degree-preserving configuration rewiring")
    rew.add_argument("--graph", required=True)
    rew.add_argument("--seed", type=int, default=0)
    rew.add_argument("--out", required=True)
    rew.set_defaults(func=_cmd_rewire)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"netgrow: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, GraphFileError, ValueError) as exc:
        print(f"netgrow: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
