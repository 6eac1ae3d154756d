"""REST service wrapping the engine.

Stateless endpoints cover the benchmark surface (synth, run, report,
inspect); stateful model sessions expose the engine's streaming nature:
create a model, feed it phases as they arrive, and serve predictions
from any number of clients. Sessions live in process memory; snapshots
can be downloaded in the IVMD container format.
"""

from __future__ import annotations

import logging
import os
import threading
import uuid
from dataclasses import replace

import numpy as np
from fastapi import FastAPI, HTTPException, Response

from .. import __version__
from ..bench import (
    EvalReport,
    RunConfig,
    emit_report,
    inspect_file,
    run_protocol,
    synthesize_benchmark,
)
from ..errors import DataError, VorocilError
from ..incremental import IncrementalModel, add_phase, predict_many, serialize_model
from ..ingestion import SynthConfig, read_features
from ..probing import ProbeConfig
from ..transforms import TransformParams, compose
from .schemas import (
    AddPhaseRequest,
    EmitRequest,
    EmitResponse,
    HealthResponse,
    InspectRequest,
    InspectResponse,
    ModelCreateRequest,
    ModelInfo,
    PredictRequest,
    PredictResponse,
    ProbeConfigModel,
    ReportModel,
    RunRequest,
    RunResponse,
    SynthRequest,
    SynthResponse,
    TransformParamsModel,
)

logger = logging.getLogger("vorocil.service")


def _probe_config(m: ProbeConfigModel) -> ProbeConfig:
    return ProbeConfig(
        epochs=m.epochs,
        batch_size=m.batch_size,
        learning_rate=m.learning_rate,
        weight_decay=m.weight_decay,
        seed=m.seed,
        shuffle=m.shuffle,
    )


def _transform_params(m: TransformParamsModel) -> TransformParams:
    return TransformParams(
        enabled=m.enabled,
        scale=m.scale,
        shift=m.shift,
        tukey_lambda=m.tukey_lambda,
        eps=m.eps,
        clamp_negative=m.clamp_negative,
    )


class _Session:
    def __init__(self, model: IncrementalModel, probe: ProbeConfig):
        self.model = model
        self.probe = probe
        self.lock = threading.Lock()


class _Registry:
    def __init__(self) -> None:
        self._sessions: dict[str, _Session] = {}
        self._lock = threading.Lock()

    def create(self, model: IncrementalModel, probe: ProbeConfig) -> str:
        model_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._sessions[model_id] = _Session(model, probe)
        return model_id

    def get(self, model_id: str) -> _Session:
        with self._lock:
            session = self._sessions.get(model_id)
        if session is None:
            raise HTTPException(status_code=404, detail={"category": "data", "message": f"unknown model {model_id}"})
        return session

    def drop(self, model_id: str) -> None:
        with self._lock:
            if model_id not in self._sessions:
                raise HTTPException(status_code=404, detail={"category": "data", "message": f"unknown model {model_id}"})
            del self._sessions[model_id]


def create_app() -> FastAPI:
    logging.basicConfig(level=os.environ.get("VOROCIL_LOG", "WARNING").upper())
    app = FastAPI(title="vorocil", version=__version__)
    registry = _Registry()

    @app.exception_handler(VorocilError)
    async def engine_error(request, exc: VorocilError):
        from fastapi.responses import JSONResponse

        logger.info("engine error: %s", exc)
        return JSONResponse(
            status_code=400, content={"detail": {"category": exc.category, "message": str(exc)}}
        )

    @app.exception_handler(OSError)
    async def os_error(request, exc: OSError):
        from fastapi.responses import JSONResponse

        logger.info("I/O error: %s", exc)
        return JSONResponse(
            status_code=400, content={"detail": {"category": "runtime", "message": str(exc)}}
        )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/synth", response_model=SynthResponse)
    def synth(req: SynthRequest) -> SynthResponse:
        cfg = SynthConfig(
            n_classes=req.n_classes,
            n_dims=req.n_dims,
            samples_per_class=req.samples_per_class,
            spread=req.spread,
            cov_scale=req.cov_scale,
            anisotropy=req.anisotropy,
            rotation_offset=req.rotation_offset,
            augmentations=req.augmentations,
            seed=req.seed,
        )
        out = synthesize_benchmark(
            req.out_dir, cfg, req.phase_sizes, n_layers=req.n_layers, layer_dims=req.layer_dims
        )
        return SynthResponse(
            manifest_path=str(out.manifest_path), feature_files=[str(p) for p in out.feature_files]
        )

    @app.post("/runs", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        cfg = RunConfig(
            manifest_path=req.manifest_path,
            out_dir=req.out_dir,
            mode=req.mode,
            probe=_probe_config(req.probe),
            transform=_transform_params(req.transform),
            gamma=req.gamma,
            diagonal_augmentation=req.diagonal_augmentation,
            seed=req.seed,
        )
        report = run_protocol(cfg)
        files = sorted(str(p) for p in emit_report(report, req.out_dir))
        return RunResponse(report=ReportModel(**report.to_dict()), out_dir=req.out_dir, files=files)

    @app.post("/reports/emit", response_model=EmitResponse)
    def emit(req: EmitRequest) -> EmitResponse:
        report = EvalReport.from_dict(req.report.model_dump())
        files = emit_report(report, req.out_dir)
        return EmitResponse(files=[str(p) for p in files])

    @app.post("/inspect", response_model=InspectResponse)
    def inspect(req: InspectRequest) -> InspectResponse:
        summary = inspect_file(req.path)
        return InspectResponse(format=summary["format"], path=summary["path"], summary=summary)

    @app.post("/models", response_model=ModelInfo)
    def create_model(req: ModelCreateRequest) -> ModelInfo:
        model = IncrementalModel(
            dim=req.dim,
            transform=_transform_params(req.transform),
            use_dnc=req.use_dnc,
            use_residual=req.use_residual,
        )
        model_id = registry.create(model, _probe_config(req.probe))
        return ModelInfo(
            model_id=model_id,
            dim=model.dim,
            n_phases=0,
            classes=[],
            use_dnc=model.use_dnc,
            use_residual=model.use_residual,
        )

    def _model_info(model_id: str, model: IncrementalModel) -> ModelInfo:
        return ModelInfo(
            model_id=model_id,
            dim=model.dim,
            n_phases=model.n_phases,
            classes=model.class_ids(),
            use_dnc=model.use_dnc,
            use_residual=model.use_residual,
        )

    @app.get("/models/{model_id}", response_model=ModelInfo)
    def get_model(model_id: str) -> ModelInfo:
        session = registry.get(model_id)
        return _model_info(model_id, session.model)

    @app.post("/models/{model_id}/phases", response_model=ModelInfo)
    def add_model_phase(model_id: str, req: AddPhaseRequest) -> ModelInfo:
        session = registry.get(model_id)
        if req.features_path is not None:
            ds = read_features(req.features_path)
            features, labels = ds.features64, ds.labels.astype(np.int64)
        elif req.features is not None and req.labels is not None:
            features = np.asarray(req.features, dtype=np.float64)
            labels = np.asarray(req.labels, dtype=np.int64)
        else:
            raise DataError("provide either features_path or inline features and labels")
        if not req.pretransformed:
            features = compose(features, session.model.transform)
        with session.lock:
            session.model = add_phase(session.model, (features, labels), session.probe)
            model = session.model
        return _model_info(model_id, model)

    @app.post("/models/{model_id}/predict", response_model=PredictResponse)
    def predict_model(model_id: str, req: PredictRequest) -> PredictResponse:
        session = registry.get(model_id)
        features = np.asarray(req.features, dtype=np.float64)
        if not req.pretransformed:
            features = compose(features, session.model.transform)
        preds = predict_many(session.model, features)
        return PredictResponse(predictions=[int(p) for p in preds])

    @app.get("/models/{model_id}/snapshot")
    def snapshot(model_id: str) -> Response:
        session = registry.get(model_id)
        return Response(
            content=serialize_model(session.model), media_type="application/octet-stream"
        )

    @app.delete("/models/{model_id}")
    def delete_model(model_id: str) -> dict:
        registry.drop(model_id)
        return {"deleted": model_id}

    return app


def main() -> None:
    import uvicorn

    uvicorn.run(create_app(), host="127.0.0.1", port=8321)


if __name__ == "__main__":
    main()
