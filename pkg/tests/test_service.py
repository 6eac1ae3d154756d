from __future__ import annotations

import numpy as np
import pytest
from fastapi.testclient import TestClient

from vorocil.incremental import deserialize_model
from vorocil.service.app import create_app


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


@pytest.fixture(scope="module")
def benchmark(client, tmp_path_factory):
    out = str(tmp_path_factory.mktemp("svc"))
    response = client.post(
        "/synth",
        json={
            "out_dir": out,
            "n_classes": 6,
            "n_dims": 8,
            "samples_per_class": 30,
            "spread": 9.0,
            "cov_scale": 0.8,
            "seed": 4,
            "phase_sizes": [3, 3],
        },
    )
    assert response.status_code == 200
    return response.json()


def test_health(client):
    data = client.get("/health").json()
    assert data["status"] == "ok"


def test_synth_run_inspect_flow(client, benchmark, tmp_path_factory):
    out = str(tmp_path_factory.mktemp("svc_run"))
    response = client.post(
        "/runs",
        json={"manifest_path": benchmark["manifest_path"], "out_dir": out, "mode": "D"},
    )
    assert response.status_code == 200
    body = response.json()
    assert len(body["report"]["phase_accuracy"]) == 2
    assert len(body["files"]) == 3

    emitted = client.post("/reports/emit", json={"report": body["report"], "out_dir": out + "/again"})
    assert emitted.status_code == 200
    assert len(emitted.json()["files"]) == 3

    inspected = client.post("/inspect", json={"path": benchmark["feature_files"][0]})
    assert inspected.status_code == 200
    assert inspected.json()["format"] == "IVFS"


def test_run_config_error_maps_to_400(client, benchmark, tmp_path_factory):
    out = str(tmp_path_factory.mktemp("svc_err"))
    response = client.post(
        "/runs",
        json={"manifest_path": benchmark["manifest_path"], "out_dir": out, "mode": "L"},
    )
    assert response.status_code == 400
    assert response.json()["detail"]["category"] == "config"


def test_inspect_missing_file_maps_to_data(client):
    response = client.post("/inspect", json={"path": "/nonexistent/file.ivfs"})
    assert response.status_code == 400
    assert response.json()["detail"]["category"] == "data"


def test_model_session_lifecycle(client):
    created = client.post("/models", json={"dim": 3}).json()
    model_id = created["model_id"]

    rng = np.random.default_rng(0)
    phase0 = {
        "features": (rng.standard_normal((40, 3)) + np.array([[4.0, 0.0, 0.0]])).tolist(),
        "labels": [0] * 40,
    }
    phase0["features"][:20] = (rng.standard_normal((20, 3)) - np.array([[4.0, 0.0, 0.0]])).tolist()
    phase0["labels"][:20] = [1] * 20
    info = client.post(f"/models/{model_id}/phases", json=phase0).json()
    assert info["n_phases"] == 1
    assert sorted(info["classes"]) == [0, 1]

    phase1 = {
        "features": (rng.standard_normal((10, 3)) + np.array([[0.0, 8.0, 0.0]])).tolist(),
        "labels": [2] * 10,
    }
    info = client.post(f"/models/{model_id}/phases", json=phase1).json()
    assert info["n_phases"] == 2

    preds = client.post(
        f"/models/{model_id}/predict",
        json={"features": [[4.0, 0.0, 0.0], [-4.0, 0.0, 0.0], [0.0, 8.0, 0.0]]},
    ).json()["predictions"]
    assert preds == [0, 1, 2]

    snapshot = client.get(f"/models/{model_id}/snapshot")
    assert snapshot.status_code == 200
    model = deserialize_model(snapshot.content)
    assert model.n_phases == 2

    assert client.delete(f"/models/{model_id}").json() == {"deleted": model_id}
    assert client.get(f"/models/{model_id}").status_code == 404


def test_phase_collision_maps_to_data_error(client):
    created = client.post("/models", json={"dim": 2}).json()
    model_id = created["model_id"]
    payload = {"features": [[0.0, 0.0], [1.0, 1.0]], "labels": [0, 1]}
    assert client.post(f"/models/{model_id}/phases", json=payload).status_code == 200
    response = client.post(f"/models/{model_id}/phases", json=payload)
    assert response.status_code == 400
    assert response.json()["detail"]["category"] == "data"


def test_add_phase_requires_payload(client):
    created = client.post("/models", json={"dim": 2}).json()
    response = client.post(f"/models/{created['model_id']}/phases", json={})
    assert response.status_code == 400
    assert "features_path" in response.json()["detail"]["message"]


def test_add_phase_from_feature_file(client, tmp_path):
    import numpy as np

    from vorocil.ingestion import FeatureDataset, write_features

    rng = np.random.default_rng(3)
    ds = FeatureDataset(
        features=np.vstack([rng.standard_normal((10, 4)) + 5.0, rng.standard_normal((10, 4)) - 5.0]),
        labels=np.repeat([0, 1], 10).astype(np.uint32),
    )
    path = write_features(ds, tmp_path / "phase.ivfs")
    created = client.post("/models", json={"dim": 4}).json()
    info = client.post(
        f"/models/{created['model_id']}/phases", json={"features_path": str(path)}
    ).json()
    assert info["n_phases"] == 1
    assert sorted(info["classes"]) == [0, 1]
