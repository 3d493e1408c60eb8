"""Witness-complex persistent homology with density-aware hybrid landmark selection."""

__version__ = "0.1.0"

from .cloud import (
    PointCloud,
    VolumeGrid,
    gen_circle,
    gen_gaussian_mixture,
    gen_phantom,
    gen_swiss_roll,
    gen_torus,
    normalize_unit_cube,
    read_cloud_csv,
    read_volume,
    volume_to_cloud,
    write_cloud_csv,
    write_volume,
)
from .density import DensityEstimate, estimate_density, kde_density, silverman_bandwidth
from .diagnostics import CoverageReport, bottleneck_distance, coverage_report
from .errors import (
    DegenerateSpread,
    EmptySelection,
    EmptyWitnessSet,
    FormatError,
    InvalidArgument,
    InvalidFiltration,
    SampleSizeError,
    WhaleError,
)
from .filtration import SimplicialFiltration
from .landmarks import (
    FAST_AUTO_M,
    FULL_AUTO_M,
    AutoMParams,
    CycleAwareParams,
    HybridParams,
    LandmarkSet,
    auto_m,
    select_cycle_aware,
    select_density,
    select_hybrid,
    select_random,
)
from .persistence import (
    Feature,
    PersistenceDiagram,
    compute_persistence,
    read_diagram_csv,
    rips_filtration,
    rips_reference,
    write_diagram_csv,
)
from .witness import WitnessParams, build_witness_filtration, landmark_knn
from .benchmark import PRESETS, DatasetSpec, RunConfig, run_benchmark, run_job
