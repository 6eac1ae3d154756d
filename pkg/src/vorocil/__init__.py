"""Incremental Voronoi/Power-diagram classification engine.

The engine builds a classifier phase by phase without revisiting old
data: each phase contributes an immutable clique of Voronoi centers
(class prototypes, optionally probing-induced and residual centers), and
queries are resolved geometrically. A benchmark harness runs full
class-incremental protocols over feature files and reports accuracy,
forgetting, and geometric-uncertainty statistics.
"""

from .augment import (
    AugmentedLabelMap,
    DistanceTensor,
    consensus,
    hv,
    integrate,
    pearson,
    rotate90,
)
from .bench import EvalReport, RunConfig, avg_forgetting, emit_report, parse_mode, run_protocol
from .civd import CenterCluster, LayeredModel, assign_ccvd, influence
from .errors import ConfigError, DataError, VorocilError
from .geometry import (
    Bisector,
    Center,
    CenterKind,
    LinearProbe,
    assign_cell,
    bisector,
    constrain_bias,
    power_score,
    reduce_to_vd,
)
from .incremental import (
    IncrementalModel,
    PhaseClique,
    add_phase,
    compute_prototypes,
    deserialize_model,
    load_model,
    predict,
    predict_many,
    predict_oracle,
    predict_tournament,
    save_model,
    serialize_model,
)
from .ingestion import (
    FeatureDataset,
    PhaseManifest,
    SynthConfig,
    load_manifest,
    read_features,
    save_manifest,
    split_phases,
    synth_gaussian,
    write_features,
)
from .probing import ProbeConfig, cross_entropy_loss, train_probe, train_residual_probe
from .transforms import TransformParams, compose, l2_normalize, linear_transform, tukey

__version__ = "0.1.0"

__all__ = [
    "AugmentedLabelMap",
    "Bisector",
    "Center",
    "CenterCluster",
    "CenterKind",
    "ConfigError",
    "DataError",
    "DistanceTensor",
    "EvalReport",
    "FeatureDataset",
    "IncrementalModel",
    "LayeredModel",
    "LinearProbe",
    "PhaseClique",
    "PhaseManifest",
    "ProbeConfig",
    "RunConfig",
    "SynthConfig",
    "TransformParams",
    "VorocilError",
    "add_phase",
    "assign_ccvd",
    "assign_cell",
    "avg_forgetting",
    "bisector",
    "compose",
    "compute_prototypes",
    "consensus",
    "constrain_bias",
    "cross_entropy_loss",
    "deserialize_model",
    "emit_report",
    "hv",
    "influence",
    "integrate",
    "l2_normalize",
    "linear_transform",
    "load_manifest",
    "load_model",
    "parse_mode",
    "pearson",
    "power_score",
    "predict",
    "predict_many",
    "predict_oracle",
    "predict_tournament",
    "read_features",
    "reduce_to_vd",
    "rotate90",
    "run_protocol",
    "save_manifest",
    "save_model",
    "serialize_model",
    "split_phases",
    "synth_gaussian",
    "train_probe",
    "train_residual_probe",
    "tukey",
    "write_features",
]
