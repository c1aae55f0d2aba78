"""Batch experiment runner: sweeps of seeded runs with CSV/JSON artifacts.

Seeds derive from (base_seed, config_index, run_index) through numpy's
SeedSequence, so sweeps are reproducible while individual runs stay
independent.  Output rows are ordered by (config, run) regardless of
completion order, and the CSV schema is fixed; timing is recorded in the
JSON sidecar only, keeping the CSV byte-reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .covering import check_covering, summarize_covering
from .engine import SprParams, preprocess_subdivide, run_and_contract
from .generators import generate
from .graph import GraphError, WeightedGraph

CSV_COLUMNS = (
    "family",
    "n",
    "k",
    "seed",
    "subdivided",
    "status",
    "max_distortion",
    "mean_distortion",
    "rounds",
    "late_coverage",
    "early_coverage",
)


@dataclass(frozen=True)
class ExperimentSpec:
    configs: tuple[dict, ...]
    seeds_per_config: int = 10
    base_seed: int = 0
    delta: float = 0.05
    subdivide: bool = False
    max_rounds: int | None = None
    analyze: bool = False

    def __post_init__(self):
        if self.seeds_per_config < 1:
            raise GraphError("seeds_per_config must be positive")
        if not self.configs:
            raise GraphError("at least one config required")
        for cfg in self.configs:
            if "family" not in cfg:
                raise GraphError(f"config missing 'family': {cfg}")
            k = cfg.get("k")
            if k is not None and int(k) < 2 and not cfg.get("allow_single_terminal"):
                raise GraphError(f"config {cfg} has k < 2; set allow_single_terminal")

    @staticmethod
    def from_json(text: str) -> "ExperimentSpec":
        doc = json.loads(text)
        return ExperimentSpec(
            configs=tuple(doc["configs"]),
            seeds_per_config=int(doc.get("seeds_per_config", 10)),
            base_seed=int(doc.get("base_seed", 0)),
            delta=float(doc.get("delta", 0.05)),
            subdivide=bool(doc.get("subdivide", False)),
            max_rounds=doc.get("max_rounds"),
            analyze=bool(doc.get("analyze", False)),
        )


@dataclass
class ExperimentRow:
    family: str
    n: int
    k: int
    seed: int
    subdivided: bool
    status: str
    max_distortion: float | None
    mean_distortion: float | None
    rounds: int | None
    late_coverage: bool | None
    early_coverage: bool | None
    wall_ms: float | None = None

    def csv_values(self) -> list[str]:
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, bool):
                return "1" if x else "0"
            if isinstance(x, float):
                return repr(x)
            return str(x)

        return [
            self.family,
            str(self.n),
            str(self.k),
            str(self.seed),
            "1" if self.subdivided else "0",
            self.status,
            fmt(self.max_distortion),
            fmt(self.mean_distortion),
            fmt(self.rounds),
            fmt(self.late_coverage),
            fmt(self.early_coverage),
        ]


def derive_seed(base_seed: int, config_index: int, run_index: int) -> int:
    """Documented splitting rule for sweep seeds."""
    seq = np.random.SeedSequence([base_seed, config_index, run_index])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def config_graph(spec: ExperimentSpec, config_index: int) -> WeightedGraph:
    cfg = dict(spec.configs[config_index])
    family = cfg.pop("family")
    cfg.pop("allow_single_terminal", None)
    graph_seed = derive_seed(spec.base_seed, config_index, 0xFFFFFFFF)
    graph = generate(family, cfg, seed=graph_seed)
    if spec.subdivide and graph.k >= 2:
        params = SprParams.for_graph(graph, delta=spec.delta)
        graph = preprocess_subdivide(graph, params).graph
    return graph


def _run_one(
    spec: ExperimentSpec, config_index: int, run_index: int, graph: WeightedGraph
) -> ExperimentRow:
    cfg = spec.configs[config_index]
    seed = derive_seed(spec.base_seed, config_index, run_index)
    t0 = time.perf_counter()
    try:
        params = SprParams.for_graph(
            graph, delta=spec.delta, seed=seed, max_rounds=spec.max_rounds
        )
        _, report, trace = run_and_contract(graph, params)
        late = early = None
        if graph.k >= 2:
            check = check_covering(trace, graph, params)
            late = check.any_late
            early = check.any_early
        return ExperimentRow(
            family=cfg["family"],
            n=graph.n,
            k=graph.k,
            seed=seed,
            subdivided=spec.subdivide,
            status="ok",
            max_distortion=report.max_ratio,
            mean_distortion=report.mean_ratio,
            rounds=trace.rounds,
            late_coverage=late,
            early_coverage=early,
            wall_ms=(time.perf_counter() - t0) * 1e3,
        )
    except Exception as exc:  # per-row failure; the sweep continues
        return ExperimentRow(
            family=cfg["family"],
            n=graph.n,
            k=graph.k,
            seed=seed,
            subdivided=spec.subdivide,
            status=f"error:{type(exc).__name__}",
            max_distortion=None,
            mean_distortion=None,
            rounds=None,
            late_coverage=None,
            early_coverage=None,
            wall_ms=(time.perf_counter() - t0) * 1e3,
        )


def _run_config(spec: ExperimentSpec, config_index: int) -> list[ExperimentRow]:
    cfg = spec.configs[config_index]
    try:
        graph = config_graph(spec, config_index)
    except Exception as exc:  # bad config: one error row per planned run
        return [
            ExperimentRow(
                family=cfg.get("family", "?"),
                n=0,
                k=0,
                seed=derive_seed(spec.base_seed, config_index, r),
                subdivided=spec.subdivide,
                status=f"error:{type(exc).__name__}",
                max_distortion=None,
                mean_distortion=None,
                rounds=None,
                late_coverage=None,
                early_coverage=None,
            )
            for r in range(spec.seeds_per_config)
        ]
    return [
        _run_one(spec, config_index, r, graph) for r in range(spec.seeds_per_config)
    ]


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> list[ExperimentRow]:
    """All rows, ordered by (config, run); row failures do not abort the sweep."""
    if jobs <= 1 or len(spec.configs) == 1:
        results = [_run_config(spec, ci) for ci in range(len(spec.configs))]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(_run_config, [spec] * len(spec.configs), range(len(spec.configs)))
            )
    return [row for config_rows in results for row in config_rows]


def rows_to_csv(rows: list[ExperimentRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_values())
    return buf.getvalue()


def rows_to_json(rows: list[ExperimentRow], spec: ExperimentSpec) -> str:
    doc = {
        "spec": {
            "configs": list(spec.configs),
            "seeds_per_config": spec.seeds_per_config,
            "base_seed": spec.base_seed,
            "delta": spec.delta,
            "subdivide": spec.subdivide,
            "max_rounds": spec.max_rounds,
        },
        "rows": [
            {
                "family": r.family,
                "n": r.n,
                "k": r.k,
                "seed": r.seed,
                "subdivided": r.subdivided,
                "status": r.status,
                "max_distortion": r.max_distortion,
                "mean_distortion": r.mean_distortion,
                "rounds": r.rounds,
                "late_coverage": r.late_coverage,
                "early_coverage": r.early_coverage,
                "wall_ms": r.wall_ms,
            }
            for r in rows
        ],
    }
    return json.dumps(doc, indent=2)


def analysis_summaries(spec: ExperimentSpec) -> list[dict]:
    """Covering-event summaries per config, for --analyze runs."""
    from .engine import run_spr

    out = []
    for ci, cfg in enumerate(spec.configs):
        graph = config_graph(spec, ci)
        if graph.k < 2:
            continue
        checks = []
        for r in range(spec.seeds_per_config):
            seed = derive_seed(spec.base_seed, ci, r)
            params = SprParams.for_graph(
                graph, delta=spec.delta, seed=seed, max_rounds=spec.max_rounds
            )
            _, trace = run_spr(graph, params)
            checks.append(check_covering(trace, graph, params))
        summary = summarize_covering(checks)
        out.append(
            {"config": dict(cfg), "n": graph.n, "k": graph.k,
             "covering": summary.to_json_dict()}
        )
    return out
