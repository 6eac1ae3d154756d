"""Pydantic request/response models for the REST service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ProbeConfigModel(BaseModel):
    epochs: int = 40
    batch_size: int = 64
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    seed: int = 0
    shuffle: bool = True


class TransformParamsModel(BaseModel):
    enabled: bool = True
    scale: float = 1.0
    shift: float = 0.0
    tukey_lambda: float = 0.5
    eps: float = 1e-8
    clamp_negative: bool = False


class SynthRequest(BaseModel):
    out_dir: str
    n_classes: int = Field(ge=1)
    n_dims: int = Field(ge=1)
    samples_per_class: int = Field(ge=1)
    spread: float = 10.0
    cov_scale: float = 1.0
    anisotropy: float = 1.0
    rotation_offset: float = 0.0
    augmentations: int = 1
    seed: int = 0
    phase_sizes: list[int]
    n_layers: int = 1
    layer_dims: list[int] | None = None


class SynthResponse(BaseModel):
    manifest_path: str
    feature_files: list[str]


class RunRequest(BaseModel):
    manifest_path: str
    out_dir: str
    mode: str = ""
    probe: ProbeConfigModel = ProbeConfigModel()
    transform: TransformParamsModel = TransformParamsModel()
    gamma: float = 1.0
    diagonal_augmentation: bool = False
    seed: int = 0


class ReportModel(BaseModel):
    mode: str
    seed: int
    phase_classes: list[list[int]]
    accuracy_matrix: list[list[float]]
    phase_accuracy: list[float]
    avg_accuracy: list[float]
    last_accuracy: float
    avg_forgetting: list[float]
    per_class_hv: dict[str, float] | None = None
    per_class_delta_accuracy: dict[str, float] | None = None
    hv_delta_pearson: float | None = None


class RunResponse(BaseModel):
    report: ReportModel
    out_dir: str
    files: list[str]


class EmitRequest(BaseModel):
    report: ReportModel
    out_dir: str


class EmitResponse(BaseModel):
    files: list[str]


class InspectRequest(BaseModel):
    path: str


class InspectResponse(BaseModel):
    format: str
    path: str
    summary: dict


class ModelCreateRequest(BaseModel):
    dim: int = Field(ge=1)
    use_dnc: bool = False
    use_residual: bool = False
    transform: TransformParamsModel = TransformParamsModel(enabled=False)
    probe: ProbeConfigModel = ProbeConfigModel()


class ModelInfo(BaseModel):
    model_id: str
    dim: int
    n_phases: int
    classes: list[int]
    use_dnc: bool
    use_residual: bool


class AddPhaseRequest(BaseModel):
    features: list[list[float]] | None = None
    labels: list[int] | None = None
    features_path: str | None = None
    pretransformed: bool = False


class PredictRequest(BaseModel):
    features: list[list[float]]
    pretransformed: bool = False


class PredictResponse(BaseModel):
    predictions: list[int]
