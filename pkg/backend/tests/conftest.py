"""
Shared test fixtures: synthetic exemplars, stored models and WAV helpers
"""

import os
from pathlib import Path
from typing import Callable

import pytest

from backend.models.audio import AudioBuffer
from backend.models.pattern import EncoderConfig
from backend.services import audio_io, classifier, fixtures

SAMPLE_RATE = 8000


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    """Keep HNN_* variables and stray .env files out of the tests"""
    for key in list(os.environ):
        if key.startswith("HNN_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)


@pytest.fixture(scope="session")
def model1_config() -> EncoderConfig:
    return EncoderConfig()


@pytest.fixture(scope="session")
def model2_config() -> EncoderConfig:
    return EncoderConfig(n_neurons=34)


@pytest.fixture(scope="session")
def grumble_exemplar() -> AudioBuffer:
    return fixtures.exemplar("grumble")


@pytest.fixture(scope="session")
def alarm_exemplar() -> AudioBuffer:
    return fixtures.exemplar("alarm")


@pytest.fixture(scope="session")
def noise_exemplar() -> AudioBuffer:
    return fixtures.exemplar("noise")


@pytest.fixture(scope="session")
def model1(grumble_exemplar, alarm_exemplar, model1_config):
    """14 neurons, grumble + alarm"""
    return classifier.store_from_audio(
        [(grumble_exemplar, "grumble"), (alarm_exemplar, "alarm")], model1_config
    )


@pytest.fixture(scope="session")
def model2(grumble_exemplar, alarm_exemplar, noise_exemplar, model2_config):
    """34 neurons, grumble + alarm + noise"""
    return classifier.store_from_audio(
        [(grumble_exemplar, "grumble"), (alarm_exemplar, "alarm"), (noise_exemplar, "noise")],
        model2_config,
    )


@pytest.fixture(scope="session")
def tone_320() -> AudioBuffer:
    return audio_io.synthesize_tone(320.0, 1.0, SAMPLE_RATE, 0.5)


@pytest.fixture(scope="session")
def tone_930() -> AudioBuffer:
    return audio_io.synthesize_tone(930.0, 1.0, SAMPLE_RATE, 0.5)


@pytest.fixture(scope="session")
def tone_model(tone_320, tone_930, model1_config):
    """320 Hz 'grumble' and 930 Hz 'alarm' single-tone exemplars"""
    return classifier.store_from_audio([(tone_320, "grumble"), (tone_930, "alarm")], model1_config)


@pytest.fixture
def wav_file(tmp_path) -> Callable[[AudioBuffer, str], Path]:
    """Write a buffer to a 16-bit WAV in the test's temp directory"""

    def write(buffer: AudioBuffer, name: str = "clip.wav") -> Path:
        return audio_io.write_wav(buffer, tmp_path / name)

    return write
