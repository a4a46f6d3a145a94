"""
Hopfield Call Monitor - Main Application
Classifies long field recordings into lemur call bouts with a Hopfield associative memory.
Run `python main.py serve` for the HTTP API or `python main.py --help` for the command line.
"""

import logging
import os
import sys
from contextlib import asynccontextmanager
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from fastapi import FastAPI, HTTPException, Query, Request

from backend.cli import __version__, main as cli_main
from backend.models.hopfield import HopfieldModel
from backend.models.spectrum import SpectralParams
from backend.services import audio_io, bout_extractor, classifier, hopfield_core, metrics, settings
from backend.utils.errors import InputError

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan manager"""
    model_path = os.getenv("HNN_MODEL_PATH")
    if model_path:
        try:
            app.state.model = hopfield_core.load_model(model_path)
            logger.info(f"Model loaded from {model_path}: {app.state.model.labels}")
        except Exception as e:
            logger.error(f"Model loading failed: {e}")
            logger.info("Continuing without a model - /classify is unavailable")
    logger.info("Hopfield Call Monitor started")
    yield
    logger.info("Shutting down Hopfield Call Monitor")


app = FastAPI(
    title="Hopfield Call Monitor",
    description="Hopfield-network classification of lemur calls in passive acoustic recordings",
    version=__version__,
    lifespan=lifespan
)
app.state.model = None


def _current_model() -> HopfieldModel:
    model: Optional[HopfieldModel] = getattr(app.state, "model", None)
    if model is None:
        raise HTTPException(status_code=503, detail="No model loaded; set HNN_MODEL_PATH")
    return model


@app.get("/")
async def root():
    """Root endpoint"""
    return {
        "message": "Hopfield Call Monitor API",
        "status": "active",
        "version": __version__
    }


@app.get("/health")
async def health():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "message": "Hopfield Call Monitor API is running",
        "version": __version__,
        "model_loaded": getattr(app.state, "model", None) is not None
    }


@app.get("/model")
async def model_summary():
    """Stored labels, network size and capacity status"""
    model = _current_model()
    return {
        "labels": model.labels,
        "capacity": model.capacity_status(),
        "encoder_config": model.encoder_config.model_dump(),
        "patterns": {s.label: list(s.pattern.active) for s in model.stored}
    }


@app.post("/classify")
async def classify(request: Request, source_id: str = Query(default="upload.wav")):
    """Classify a WAV file sent as the raw request body"""
    model = _current_model()
    try:
        config = settings.load_run_config()
        params: SpectralParams = config.spectral_params()
        buffer = audio_io.decode_wav(await request.body(), source_id)
        rows = classifier.classify_file(model, buffer, params, source_id=source_id,
                                        max_passes=config.max_passes)
        bouts = bout_extractor.extract_bouts(rows, config.bout_rules(), segment_length_s=params.segment_length_s)
        return {
            "source_id": source_id,
            "classifications": [
                {
                    "segment_index": r.segment_index,
                    "start_time_s": r.start_time_s,
                    "label": r.label,
                    "outcome": r.outcome_detail
                }
                for r in rows
            ],
            "bouts": [b.to_row() for b in bouts],
            "outcomes": classifier.outcome_breakdown(rows)
        }
    except InputError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error classifying {source_id}: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail="Internal error during classification")


@app.post("/evaluate")
async def evaluate(payload: Dict[str, Any]):
    """Score predicted bouts against labelled bouts"""
    try:
        rules = settings.load_run_config().bout_rules()
        predicted = bout_extractor.parse_bouts(payload.get("predicted", []), rules)
        labelled = bout_extractor.parse_bouts(payload.get("labelled", []), rules)
        counts, result = metrics.evaluate(predicted, labelled)
        return metrics.report_document(result, counts)
    except InputError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error evaluating bouts: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail="Internal error during evaluation")


if __name__ == "__main__":
    sys.exit(cli_main())
