"""Grid-search parameter estimation and model-vs-model significance tests.

A candidate (model tag + parameter cell) is scored by growing replicate
networks under the observed graph's schedule and initialization, measuring
each against the observed graph (KS on in-degree and clustering
distributions, weighted relative error of the degree-clustering curve, and
absolute assortativity error when attributes are present), and averaging the
replicates. Cells are compared on the Euclidean norm of the min-max
normalized metric components.

Grid cells are embarrassingly parallel; each cell draws its random seeds
from the root seed and its own index, so results do not depend on worker
count or completion order.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .graph import TemporalAttributedDigraph, bfs_seed_subgraph
from .metrics import (
    DegreeClusteringCurve,
    global_assortativity,
    in_degrees,
    ks_statistic,
    local_clustering_values,
    wre,
)
from .schedule import GrowthSchedule
from .walk import WalkParams, grow

__all__ = [
    "MODEL_TAGS",
    "derive_seed",
    "grow_model",
    "MetricVector",
    "GridSpec",
    "CellResult",
    "FitResult",
    "evaluate_candidate",
    "replicate_metrics",
    "normalize_and_select",
    "fit_grid",
    "ModelComparison",
    "compare_models",
]

# fraction of the observed graph used for the BFS-induced initial network;
# desk-scale targets get a floor so early arrivals have nodes to link to
SEED_FRACTION = 0.001
MIN_SEED_NODES = 10

_SEED_MASK = (1 << 63) - 1


def derive_seed(root: int, *key: int) -> int:
    """Deterministic child seed for a component of a larger computation."""
    ss = np.random.SeedSequence([root & _SEED_MASK, *(k & _SEED_MASK for k in key)])
    return int(ss.generate_state(1, np.uint64)[0])


def _require_params(tag: str, params: dict, names: tuple[str, ...]) -> list[float]:
    unknown = set(params) - set(names)
    if unknown:
        raise ValueError(f"model {tag!r} got unknown parameters {sorted(unknown)}")
    missing = [n for n in names if n not in params]
    if missing:
        raise ValueError(f"model {tag!r} missing parameters {missing}")
    return [float(params[n]) for n in names]


def grow_model(
    tag: str,
    initial: TemporalAttributedDigraph,
    schedule: GrowthSchedule,
    params: dict,
    rng_seed: int,
) -> TemporalAttributedDigraph:
    """Grow one network with the named model; ``params`` is the JSON envelope."""
    tag = tag.lower()
    if tag == "arw":
        return grow(initial, schedule, WalkParams.from_dict(params), rng_seed)
    if tag == "uniform":
        _require_params(tag, params, ())
        return baselines.grow_uniform(initial, schedule, rng_seed)
    if tag == "dms":
        (a,) = _require_params(tag, params, ("attractiveness",))
        return baselines.grow_dms(initial, schedule, a, rng_seed)
    if tag == "hk":
        (p_t,) = _require_params(tag, params, ("p_triangle",))
        return baselines.grow_hk(initial, schedule, p_t, rng_seed)
    if tag == "san":
        p_t, sim = _require_params(tag, params, ("p_triangle", "similarity"))
        return baselines.grow_san(initial, schedule, p_t, sim, rng_seed)
    if tag == "ka":
        (sim,) = _require_params(tag, params, ("similarity",))
        return baselines.grow_ka(initial, schedule, sim, rng_seed)
    if tag == "rw_mu":
        (mu,) = _require_params(tag, params, ("mu",))
        return baselines.grow_rw_mu(initial, schedule, mu, rng_seed)
    if tag == "forest_fire":
        p_f, p_b = _require_params(tag, params, ("p_forward", "p_backward"))
        return baselines.grow_forest_fire(initial, schedule, p_f, p_b, rng_seed)
    raise ValueError(f"unknown model tag {tag!r}")


MODEL_TAGS = ("arw", "uniform", "dms", "hk", "san", "ka", "rw_mu", "forest_fire")


@dataclass(frozen=True)
class MetricVector:
    """Distances between one generated network and the observed one."""

    ks_in_degree: float
    ks_clustering: float
    wre: float
    assortativity_error: float | None = None

    def components(self, include_assortativity: bool = True) -> list[float]:
        values = [self.ks_in_degree, self.ks_clustering, self.wre]
        if include_assortativity and self.assortativity_error is not None:
            values.append(self.assortativity_error)
        return values

    @staticmethod
    def component_names(attributed: bool, include_assortativity: bool = True):
        names = ["ks_in_degree", "ks_clustering", "wre"]
        if attributed and include_assortativity:
            names.append("assortativity_error")
        return names

    def to_dict(self) -> dict:
        return {
            "ks_in_degree": self.ks_in_degree,
            "ks_clustering": self.ks_clustering,
            "wre": self.wre,
            "assortativity_error": self.assortativity_error,
        }


@dataclass
class _Target:
    """Observed-side features, computed once per fit."""

    in_degrees: np.ndarray
    clustering: np.ndarray
    curve: DegreeClusteringCurve
    assortativity: float | None

    @classmethod
    def from_graph(cls, observed: TemporalAttributedDigraph) -> "_Target":
        _, clustering = local_clustering_values(observed)
        try:
            assort = global_assortativity(observed)
        except ValueError:
            assort = None
        return cls(
            in_degrees=in_degrees(observed),
            clustering=clustering,
            curve=DegreeClusteringCurve.from_graph(observed),
            assortativity=assort,
        )


def _measure(target: _Target, generated: TemporalAttributedDigraph) -> MetricVector:
    _, gen_clustering = local_clustering_values(generated)
    if target.clustering.size == 0 or gen_clustering.size == 0:
        raise ValueError("clustering distribution undefined on one side")
    assort_err = None
    if target.assortativity is not None:
        assort_err = abs(target.assortativity - global_assortativity(generated))
    return MetricVector(
        ks_in_degree=ks_statistic(target.in_degrees, in_degrees(generated)),
        ks_clustering=ks_statistic(target.clustering, gen_clustering),
        wre=wre(target.curve, DegreeClusteringCurve.from_graph(generated)),
        assortativity_error=assort_err,
    )


def _mean_vector(vectors: list[MetricVector]) -> MetricVector:
    assort = [v.assortativity_error for v in vectors]
    mean_assort = None
    if all(a is not None for a in assort):
        mean_assort = float(np.mean(assort))
    return MetricVector(
        ks_in_degree=float(np.mean([v.ks_in_degree for v in vectors])),
        ks_clustering=float(np.mean([v.ks_clustering for v in vectors])),
        wre=float(np.mean([v.wre for v in vectors])),
        assortativity_error=mean_assort,
    )


def _derive_setup(observed, initial, schedule):
    if initial is None:
        fraction = max(
            SEED_FRACTION, min(1.0, MIN_SEED_NODES / max(1, observed.node_count))
        )
        initial = bfs_seed_subgraph(observed, start=0, fraction=fraction)
    if schedule is None:
        schedule = GrowthSchedule.from_observed(observed, initial.node_count)
    return initial, schedule


def replicate_metrics(
    observed: TemporalAttributedDigraph,
    tag: str,
    params: dict,
    replicates: int,
    rng_seed: int,
    initial: TemporalAttributedDigraph | None = None,
    schedule: GrowthSchedule | None = None,
) -> list[MetricVector]:
    """Per-replicate metric vectors for one candidate against ``observed``."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    initial, schedule = _derive_setup(observed, initial, schedule)
    target = _Target.from_graph(observed)
    out = []
    for rep in range(replicates):
        generated = grow_model(tag, initial, schedule, params, derive_seed(rng_seed, rep))
        out.append(_measure(target, generated))
    return out


def evaluate_candidate(
    observed: TemporalAttributedDigraph,
    tag: str,
    params: dict,
    replicates: int,
    rng_seed: int,
    initial: TemporalAttributedDigraph | None = None,
    schedule: GrowthSchedule | None = None,
) -> MetricVector:
    """Replicate-averaged metric vector for one candidate."""
    return _mean_vector(
        replicate_metrics(observed, tag, params, replicates, rng_seed, initial, schedule)
    )


# -- grids -------------------------------------------------------------------


def _lattice() -> list[float]:
    return [round(0.05 + 0.1 * k, 2) for k in range(10)]


@dataclass
class GridSpec:
    """Search space: a per-parameter value lattice or an explicit cell list.

    The explicit ``cells`` form exists for models too sensitive for a plain
    lattice sweep (the forest-fire model in particular, where the useful
    region is narrow and hand-picked).
    """

    values: dict[str, list[float]] | None = None
    cells: list[dict[str, float]] | None = None
    replicates: int = 5

    def __post_init__(self):
        if (self.values is None) == (self.cells is None):
            raise ValueError("give exactly one of values= or cells=")
        if self.values is not None:
            for name, options in self.values.items():
                if not options:
                    raise ValueError(f"empty value list for parameter {name!r}")
        elif not self.cells:
            raise ValueError("explicit cell list is empty")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")

    def param_names(self) -> list[str]:
        if self.values is not None:
            return list(self.values)
        return list(self.cells[0])

    def iter_cells(self) -> list[dict[str, float]]:
        if self.cells is not None:
            return [dict(cell) for cell in self.cells]
        names = self.param_names()
        return [
            dict(zip(names, combo))
            for combo in itertools.product(*(self.values[n] for n in names))
        ]

    @classmethod
    def default(cls, tag: str, attributed: bool, replicates: int = 5) -> "GridSpec":
        tag = tag.lower()
        lattice = _lattice()
        if tag == "arw":
            if attributed:
                values = {
                    "p_same": lattice,
                    "p_diff": lattice,
                    "p_jump": lattice,
                    "p_out": lattice,
                }
            else:
                values = {"p_link": lattice, "p_jump": lattice, "p_out": lattice}
        elif tag == "uniform":
            return cls(cells=[{}], replicates=replicates)
        elif tag == "dms":
            values = {"attractiveness": [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]}
        elif tag == "hk":
            values = {"p_triangle": lattice}
        elif tag == "san":
            values = {"p_triangle": lattice, "similarity": lattice}
        elif tag == "ka":
            values = {"similarity": lattice}
        elif tag == "rw_mu":
            values = {"mu": lattice}
        elif tag == "forest_fire":
            raise ValueError(
                "forest_fire needs a hand-picked explicit cell list; "
                "pass GridSpec(cells=[...])"
            )
        else:
            raise ValueError(f"unknown model tag {tag!r}")
        return cls(values=values, replicates=replicates)


@dataclass
class CellResult:
    params: dict[str, float]
    vector: MetricVector | None  # None when the cell failed to evaluate
    error: str | None = None
    truncated_links: int = 0  # walk-safeguard shortfalls summed over replicates
    normalized: list[float] | None = None
    score: float | None = None

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "metrics": self.vector.to_dict() if self.vector else None,
            "normalized": self.normalized,
            "score": self.score,
            "error": self.error,
            "truncated_links": self.truncated_links,
        }


@dataclass
class FitResult:
    model: str
    best_params: dict[str, float]
    cells: list[CellResult]
    include_assortativity: bool
    replicates: int
    param_order: list[str] = field(default_factory=list)

    def best_cell(self) -> CellResult:
        for cell in self.cells:
            if cell.params == self.best_params:
                return cell
        raise AssertionError("best_params not found among cells")

    def rank_of(self, params: dict[str, float]) -> int:
        """1-based rank of a cell's score among all valid cells."""
        mine = None
        for cell in self.cells:
            if cell.params == params:
                mine = cell
                break
        if mine is None or mine.score is None:
            raise ValueError(f"no scored cell with params {params}")
        better = sum(
            1 for c in self.cells if c.score is not None and c.score < mine.score
        )
        return better + 1

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "best_params": self.best_params,
            "include_assortativity": self.include_assortativity,
            "replicates": self.replicates,
            "param_order": self.param_order,
            "cells": [c.to_dict() for c in self.cells],
        }


def normalize_and_select(
    model: str,
    cells: list[CellResult],
    include_assortativity: bool,
    replicates: int,
    param_order: list[str] | None = None,
) -> FitResult:
    """Min-max normalize metric components across cells, score by Euclidean
    norm, and pick the argmin (ties broken by smallest parameter tuple)."""
    valid = [c for c in cells if c.vector is not None]
    if not valid:
        raise ValueError("no grid cell evaluated successfully")
    if param_order is None:
        param_order = list(valid[0].params)
    matrix = np.array(
        [c.vector.components(include_assortativity) for c in valid], dtype=np.float64
    )
    lo = matrix.min(axis=0)
    span = matrix.max(axis=0) - lo
    normalized = np.where(span > 0.0, (matrix - lo) / np.where(span > 0, span, 1.0), 0.0)
    scores = np.sqrt((normalized**2).sum(axis=1))
    for cell, row, score in zip(valid, normalized, scores):
        cell.normalized = [float(x) for x in row]
        cell.score = float(score)
    best = min(
        valid,
        key=lambda c: (c.score, tuple(c.params.get(name, 0.0) for name in param_order)),
    )
    return FitResult(
        model=model,
        best_params=dict(best.params),
        cells=cells,
        include_assortativity=include_assortativity,
        replicates=replicates,
        param_order=param_order,
    )


# -- parallel grid evaluation ---------------------------------------------------

_WORKER_CTX: dict | None = None


def _init_worker(ctx: dict) -> None:
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _cell_task(job: tuple[int, dict]) -> tuple[int, dict]:
    index, params = job
    ctx = _WORKER_CTX
    return index, _evaluate_cell(
        ctx["target"],
        ctx["initial"],
        ctx["schedule"],
        ctx["tag"],
        params,
        ctx["replicates"],
        derive_seed(ctx["rng_seed"], index),
    )


def _evaluate_cell(target, initial, schedule, tag, params, replicates, cell_seed) -> dict:
    vectors = []
    truncated = 0
    try:
        for rep in range(replicates):
            generated = grow_model(
                tag, initial, schedule, params, derive_seed(cell_seed, rep)
            )
            stats = getattr(generated, "growth_stats", None)
            if stats is not None:
                truncated += stats.missing_links
            vectors.append(_measure(target, generated))
    except ValueError as exc:
        return {"vector": None, "error": str(exc), "truncated": truncated}
    return {"vector": _mean_vector(vectors), "error": None, "truncated": truncated}


def fit_grid(
    observed: TemporalAttributedDigraph,
    tag: str,
    grid: GridSpec | None = None,
    rng_seed: int = 0,
    workers: int = 1,
    include_assortativity: bool = True,
    initial: TemporalAttributedDigraph | None = None,
    schedule: GrowthSchedule | None = None,
) -> FitResult:
    """Score every grid cell against ``observed`` and select the best.

    Deterministic for a fixed seed regardless of ``workers``: each cell's
    replicate seeds derive from the root seed and the cell's index.
    """
    initial, schedule = _derive_setup(observed, initial, schedule)
    if grid is None:
        grid = GridSpec.default(tag, observed.attributed)
    target = _Target.from_graph(observed)
    include_assortativity = include_assortativity and target.assortativity is not None
    cells = grid.iter_cells()
    jobs = list(enumerate(cells))
    results: list[dict | None] = [None] * len(jobs)
    ctx = {
        "target": target,
        "initial": initial,
        "schedule": schedule,
        "tag": tag,
        "replicates": grid.replicates,
        "rng_seed": rng_seed,
    }
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(ctx,)
        ) as pool:
            for index, outcome in pool.map(
                _cell_task, jobs, chunksize=max(1, len(jobs) // (workers * 8))
            ):
                results[index] = outcome
    else:
        _init_worker(ctx)
        for job in jobs:
            index, outcome = _cell_task(job)
            results[index] = outcome
    cell_results = [
        CellResult(
            params=params,
            vector=outcome["vector"],
            error=outcome["error"],
            truncated_links=outcome["truncated"],
        )
        for (_, params), outcome in zip(jobs, results)
    ]
    return normalize_and_select(
        tag,
        cell_results,
        include_assortativity,
        grid.replicates,
        param_order=grid.param_names(),
    )


# -- model comparison ---------------------------------------------------------


@dataclass
class ModelComparison:
    """Per-metric one-sided permutation tests between two fitted models.

    The alternative hypothesis is that model A's metric values are lower
    (better) than model B's.
    """

    metric_names: list[str]
    p_values: dict[str, float]
    means_a: dict[str, float]
    means_b: dict[str, float]
    significant: dict[str, dict[str, bool]]
    alphas: tuple[float, ...]
    replicates: int

    def to_dict(self) -> dict:
        return {
            "metric_names": self.metric_names,
            "p_values": self.p_values,
            "means_a": self.means_a,
            "means_b": self.means_b,
            "significant": self.significant,
            "alphas": list(self.alphas),
            "replicates": self.replicates,
        }


def compare_models(
    observed: TemporalAttributedDigraph,
    model_a: tuple[str, dict],
    model_b: tuple[str, dict],
    replicates: int,
    rng_seed: int = 0,
    alphas: tuple[float, ...] = (0.01, 0.001),
    n_perm: int = 10_000,
    initial: TemporalAttributedDigraph | None = None,
    schedule: GrowthSchedule | None = None,
) -> ModelComparison:
    """Test, metric by metric, whether model A fits ``observed`` better.

    Both models are grown with the same per-replicate seeds (common random
    numbers), so comparing a model against itself is exactly tied.
    """
    from .metrics import permutation_test_one_sided

    initial, schedule = _derive_setup(observed, initial, schedule)
    target = _Target.from_graph(observed)
    tag_a, params_a = model_a
    tag_b, params_b = model_b
    vectors_a = []
    vectors_b = []
    for rep in range(replicates):
        seed = derive_seed(rng_seed, rep)
        vectors_a.append(_measure(target, grow_model(tag_a, initial, schedule, params_a, seed)))
        vectors_b.append(_measure(target, grow_model(tag_b, initial, schedule, params_b, seed)))
    attributed = target.assortativity is not None
    names = MetricVector.component_names(attributed)
    p_values = {}
    means_a = {}
    means_b = {}
    significant = {}
    for i, name in enumerate(names):
        a_vals = [v.components(True)[i] for v in vectors_a]
        b_vals = [v.components(True)[i] for v in vectors_b]
        p = permutation_test_one_sided(
            a_vals, b_vals, n_perm=n_perm, rng_seed=derive_seed(rng_seed, 1000 + i)
        )
        p_values[name] = p
        means_a[name] = float(np.mean(a_vals))
        means_b[name] = float(np.mean(b_vals))
        significant[name] = {str(alpha): p <= alpha for alpha in alphas}
    return ModelComparison(
        metric_names=names,
        p_values=p_values,
        means_a=means_a,
        means_b=means_b,
        significant=significant,
        alphas=tuple(alphas),
        replicates=replicates,
    )
