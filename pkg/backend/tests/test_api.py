"""
Tests for the HTTP API
"""

import pytest
from fastapi.testclient import TestClient

import main
from backend.services import audio_io


@pytest.fixture
def client():
    return TestClient(main.app)


@pytest.fixture
def loaded(monkeypatch, tone_model):
    monkeypatch.setattr(main.app.state, "model", tone_model)
    return tone_model


def test_root(client):
    response = client.get("/")

    assert response.status_code == 200
    assert response.json()["status"] == "active"


def test_health_without_a_model(client, monkeypatch):
    monkeypatch.setattr(main.app.state, "model", None)

    response = client.get("/health")

    assert response.json()["model_loaded"] is False
    assert client.get("/model").status_code == 503


def test_model_summary(client, loaded):
    response = client.get("/model")

    assert response.status_code == 200
    body = response.json()
    assert body["labels"] == ["grumble", "alarm"]
    assert body["patterns"] == {"grumble": [3], "alarm": [10]}
    assert body["capacity"]["status"] == "boundary"


def test_classify_wav_body(client, loaded, tmp_path, tone_930):
    recording = audio_io.concatenate([tone_930] * 4)
    raw = audio_io.write_wav(recording, tmp_path / "calls.wav").read_bytes()

    response = client.post("/classify", params={"source_id": "calls.wav"}, content=raw)

    assert response.status_code == 200
    body = response.json()
    assert [row["label"] for row in body["classifications"]] == ["alarm"] * 4
    assert body["classifications"][0]["outcome"] == "retrieved:1"
    assert body["bouts"] == [{"source_file": "calls.wav", "class": "alarm", "start_time_s": 0.0, "end_time_s": 4.0}]
    assert body["outcomes"]["retrieved"] == 4


def test_classify_rejects_a_corrupt_body(client, loaded):
    response = client.post("/classify", content=b"not a wav file at all")

    assert response.status_code == 400
    assert "upload.wav" in response.json()["detail"]


def test_classify_without_a_model(client, monkeypatch):
    monkeypatch.setattr(main.app.state, "model", None)

    assert client.post("/classify", content=b"RIFF").status_code == 503


def test_evaluate(client):
    payload = {
        "predicted": [
            {"source_file": "rec.wav", "class": "grumble", "start_time_s": 282, "end_time_s": 285},
            {"source_file": "rec.wav", "class": "grumble", "start_time_s": 287, "end_time_s": 290},
        ],
        "labelled": [{"source_file": "rec.wav", "class": "grumble", "start_time_s": 286.6, "end_time_s": 290.2}],
    }

    response = client.post("/evaluate", json=payload)

    assert response.status_code == 200
    body = response.json()
    assert body["counts"]["grumble"] == {"tp": 1, "fp": 1, "fn": 0}
    assert body["overall_accuracy"] == 0.5


def test_evaluate_rejects_unknown_classes(client):
    payload = {"predicted": [], "labelled": [{"source_file": "r.wav", "class": "howl", "start_time_s": 0, "end_time_s": 3}]}

    response = client.post("/evaluate", json=payload)

    assert response.status_code == 400
