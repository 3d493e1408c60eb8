"""Benchmark orchestration: dataset, landmarks, witness diagram, diagnostics, CSV."""

from __future__ import annotations

import csv
import io
import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .cloud import (
    PointCloud,
    gen_gaussian_mixture,
    gen_phantom,
    gen_swiss_roll,
    gen_torus,
    read_cloud_csv,
    read_volume,
    volume_to_cloud,
)
from .density import estimate_density
from .diagnostics import DEFAULT_COVERAGE_RADIUS, bottleneck_distance, coverage_report
from .errors import InvalidArgument
from .landmarks import (
    FAST_AUTO_M,
    FULL_AUTO_M,
    METHODS,
    AutoMParams,
    CycleAwareParams,
    HybridParams,
    auto_m,
    select_cycle_aware,
    select_density,
    select_hybrid,
    select_random,
)
from .persistence import compute_persistence, rips_reference, write_diagram_csv
from .witness import WitnessParams, build_witness_filtration, landmark_knn

__all__ = [
    "CSV_HEADER",
    "PRESETS",
    "PresetConfig",
    "DatasetSpec",
    "RunConfig",
    "BenchmarkRecord",
    "load_dataset",
    "run_job",
    "run_benchmark",
    "format_records",
]

CSV_HEADER = (
    "dataset", "method", "n_retained", "m", "auto_m_used", "k_witness", "max_dim", "seed",
    "selection_seconds", "witness_seconds", "persistence_seconds",
    "cov_mean", "cov_mean_weighted", "cov_p95", "cov_p95_weighted", "cov_ratio",
    "h0_count", "h1_count", "h2_count", "bottleneck_h1",
)  # fmt: skip

TIMING_COLUMNS = ("selection_seconds", "witness_seconds", "persistence_seconds")


@dataclass(frozen=True)
class PresetConfig:
    name: str
    max_dim: int
    k_witness: int
    rips_reference_enabled: bool
    auto_m: AutoMParams
    thinning_cap: int


PRESETS = {
    "deep_dive": PresetConfig("deep_dive", 2, 8, True, FULL_AUTO_M, 1_000_000),
    "deep_dive_fast": PresetConfig("deep_dive_fast", 1, 4, False, FAST_AUTO_M, 1_000_000),
}

GENERATED = ("swiss_roll", "torus", "gaussian", "phantom")


@dataclass(frozen=True)
class DatasetSpec:
    """Where a run's point cloud comes from.

    ``kind`` is one of the generator names, ``"cloud"`` (CSV file) or
    ``"volume"`` (WVOL file).  Generated datasets use the record seed unless
    ``data_seed`` pins them.
    """

    kind: str
    n: int = 5000
    noise: float = 0.0
    major_radius: float = 1.0
    minor_radius: float = 0.35
    components: int = 5
    separation: float = 2.0
    dims: tuple = (64, 64, 64)
    path: str | None = None
    intensity_quantile: float = 0.75
    max_points: int | None = None
    data_seed: int | None = None

    @property
    def label(self) -> str:
        if self.kind in ("cloud", "volume"):
            return Path(self.path).stem
        return self.kind

    @property
    def is_volume(self) -> bool:
        return self.kind in ("volume", "phantom")


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSpec
    preset: str = "deep_dive"
    methods: tuple = ("hybrid",)
    seeds: tuple = (0,)
    m: int | None = None
    use_auto_m: bool = False
    k_witness: int | None = None
    max_dim: int | None = None
    alpha: float = 0.5
    epsilon: float = 1e-9
    pool_constant: float = 1.0
    coverage_radius: float = DEFAULT_COVERAGE_RADIUS
    rips_sample: int | None = None
    tau: float | None = None
    reserve: float = 0.1
    locality_radius: float = 0.05
    diagram_dir: str | None = None

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise InvalidArgument(f"unknown preset {self.preset!r}")
        for method in self.methods:
            if method not in METHODS:
                raise InvalidArgument(f"unknown method {method!r}")
        if self.m is not None and self.use_auto_m:
            raise InvalidArgument("--m and --auto-m are mutually exclusive")
        if self.m is not None and self.m < 1:
            raise InvalidArgument(f"m must be positive, got {self.m}")

    @property
    def preset_config(self) -> PresetConfig:
        return PRESETS[self.preset]

    @property
    def resolved_k(self) -> int:
        return self.k_witness if self.k_witness is not None else self.preset_config.k_witness

    @property
    def resolved_max_dim(self) -> int:
        return self.max_dim if self.max_dim is not None else self.preset_config.max_dim

    @property
    def resolved_rips_sample(self) -> int | None:
        if self.rips_sample is not None:
            return self.rips_sample if self.rips_sample > 0 else None
        return 300 if self.preset_config.rips_reference_enabled else None

    def wants_auto_m(self) -> bool:
        # volumes default to the automatic budget; an explicit m always wins
        if self.m is not None:
            return False
        return self.use_auto_m or self.dataset.is_volume


@dataclass(frozen=True)
class BenchmarkRecord:
    dataset: str
    method: str
    n_retained: int
    m: int
    auto_m_used: bool
    k_witness: int
    max_dim: int
    seed: int
    selection_seconds: float
    witness_seconds: float
    persistence_seconds: float
    cov_mean: float
    cov_mean_weighted: float
    cov_p95: float
    cov_p95_weighted: float
    cov_ratio: float
    h0_count: int
    h1_count: int
    h2_count: int
    bottleneck_h1: float | None = None
    diagram: object = field(default=None, compare=False, repr=False)
    reference: object = field(default=None, compare=False, repr=False)

    def row(self) -> list:
        out = []
        for name in CSV_HEADER:
            value = getattr(self, name)
            if name in TIMING_COLUMNS:
                out.append(f"{value:.3f}")
            elif name == "auto_m_used":
                out.append("true" if value else "false")
            elif name == "bottleneck_h1":
                out.append("" if value is None else ("inf" if math.isinf(value) else f"{value:.6f}"))
            elif isinstance(value, float):
                out.append(f"{value:.6f}")
            else:
                out.append(str(value))
        return out


def load_dataset(spec: DatasetSpec, seed: int, thinning_cap: int) -> PointCloud:
    s = seed if spec.data_seed is None else spec.data_seed
    cap = spec.max_points if spec.max_points is not None else thinning_cap
    if spec.kind == "swiss_roll":
        return gen_swiss_roll(spec.n, spec.noise, s)
    if spec.kind == "torus":
        return gen_torus(spec.n, spec.major_radius, spec.minor_radius, spec.noise, s)
    if spec.kind == "gaussian":
        return gen_gaussian_mixture(spec.n, spec.components, spec.separation, s)
    if spec.kind == "phantom":
        return volume_to_cloud(gen_phantom(spec.dims, s), spec.intensity_quantile, cap, s)
    if spec.kind == "cloud":
        return read_cloud_csv(spec.path)
    if spec.kind == "volume":
        return volume_to_cloud(read_volume(spec.path), spec.intensity_quantile, cap, s)
    raise InvalidArgument(f"unknown dataset kind {spec.kind!r}")


def _select(method, cloud, m, seed, config, prior_fn):
    """Run one selector; returns the landmark set and selection seconds.

    Density estimation counts as selection time.  For the cycle-aware method
    the prior hybrid pass that supplies the loops is excluded.
    """
    start = time.perf_counter()
    excluded = 0.0
    hybrid = HybridParams(config.alpha, config.epsilon, config.pool_constant, seed)
    if method == "random":
        landmarks = select_random(cloud, m, seed)
    else:
        dens = estimate_density(cloud, seed=seed)
        if method == "density":
            landmarks = select_density(cloud, dens, m, seed)
        elif method == "hybrid":
            landmarks = select_hybrid(cloud, dens, m, hybrid)
        else:
            mark = time.perf_counter()
            prior = prior_fn(select_hybrid(cloud, dens, m, hybrid))
            excluded = time.perf_counter() - mark
            tau = config.tau
            if tau is None:
                finite = [f.lifetime for f in prior.in_dim(1) if not f.essential]
                tau = 0.1 * max(finite, default=0.0)
            cyc = CycleAwareParams(tau, config.reserve, config.locality_radius)
            landmarks = select_cycle_aware(cloud, dens, m, hybrid, prior, cyc)
    return landmarks, time.perf_counter() - start - excluded


def _witness_diagram(cloud, landmarks, params):
    filt = build_witness_filtration(cloud, landmarks, params, landmark_knn(cloud, landmarks, params.k_witness))
    return filt, compute_persistence(filt, max_dim=params.max_dim)


def run_job(config: RunConfig, method: str, seed: int) -> BenchmarkRecord:
    """One (method, seed) pipeline run."""
    preset = config.preset_config
    cloud = load_dataset(config.dataset, seed, preset.thinning_cap)
    use_auto = config.wants_auto_m()
    if use_auto:
        m = auto_m(cloud.n, preset.auto_m)
    else:
        m = config.m if config.m is not None else 400
    params = WitnessParams(config.resolved_k, config.resolved_max_dim)
    m = min(m, cloud.n - 1)

    landmarks, sel_seconds = _select(
        method, cloud, m, seed, config, lambda lm: _witness_diagram(cloud, lm, params)[1]
    )

    t0 = time.perf_counter()
    filt = build_witness_filtration(cloud, landmarks, params)
    t1 = time.perf_counter()
    diagram = compute_persistence(filt, max_dim=params.max_dim)
    t2 = time.perf_counter()

    cov = coverage_report(cloud, landmarks, 0.95, config.coverage_radius)
    bottleneck = None
    reference = None
    sample = config.resolved_rips_sample
    if sample is not None:
        # H1 comparison only; the reference stops at triangles
        reference = rips_reference(cloud, min(sample, cloud.n), max_dim=1, seed=seed)
        bottleneck = bottleneck_distance(diagram, reference, 1)

    record = BenchmarkRecord(
        dataset=config.dataset.label,
        method=method,
        n_retained=cloud.n,
        m=landmarks.m,
        auto_m_used=use_auto,
        k_witness=params.k_witness,
        max_dim=params.max_dim,
        seed=seed,
        selection_seconds=sel_seconds,
        witness_seconds=t1 - t0,
        persistence_seconds=t2 - t1,
        cov_mean=cov.cov_mean,
        cov_mean_weighted=cov.cov_mean_weighted,
        cov_p95=cov.cov_p95,
        cov_p95_weighted=cov.cov_p95_weighted,
        cov_ratio=cov.cov_ratio,
        h0_count=diagram.count(0),
        h1_count=diagram.count(1),
        h2_count=diagram.count(2) if params.max_dim >= 2 else 0,
        bottleneck_h1=bottleneck,
        diagram=diagram,
        reference=reference,
    )
    if config.diagram_dir is not None:
        out = Path(config.diagram_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{record.dataset}_{method}_seed{seed}"
        write_diagram_csv(diagram, out / f"{stem}_witness.csv")
        if reference is not None:
            write_diagram_csv(reference, out / f"{stem}_rips.csv")
    return record


def _run_job_star(args):
    record = run_job(*args)
    # diagrams stay in the worker; only the row crosses the process boundary
    return replace(record, diagram=None, reference=None)


def run_benchmark(config: RunConfig, output=None, jobs: int = 1) -> list:
    """Run every (method, seed) combination and optionally write the CSV.

    Records are ordered by method (as given) then seed, whatever order the
    jobs finish in.
    """
    tasks = [(config, method, seed) for method in config.methods for seed in config.seeds]
    if jobs > 1 and len(tasks) > 1:
        # spawn: forking after the OpenMP runtime has started is unsafe
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
            records = list(pool.map(_run_job_star, tasks))
    else:
        records = [run_job(*t) for t in tasks]
    if output is not None:
        Path(output).write_text(format_records(records), encoding="ascii")
    return records


def format_records(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()

