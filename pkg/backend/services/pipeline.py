"""
Classification Coordinator - fans recordings out to worker threads and gathers results in input order
"""

import asyncio
import logging
import os
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field

from backend.models.classification import SegmentClassification
from backend.models.hopfield import HopfieldModel
from backend.models.spectrum import SpectralParams
from backend.services import audio_io, classifier
from backend.services.hopfield_core import DEFAULT_MAX_PASSES
from backend.utils.errors import EXIT_OK, InputError, exit_code_for


class FileResult(BaseModel):
    """Classification of one recording, or the reason it failed"""
    model_config = ConfigDict(frozen=True)

    path: str
    source_id: str
    classifications: List[SegmentClassification] = Field(default_factory=list)
    error: Optional[str] = None
    exit_code: int = EXIT_OK
    audio_seconds: float = 0.0
    decode_seconds: float = 0.0
    classify_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None


class ClassificationCoordinator:
    """Classifies many recordings against one immutable model"""

    def __init__(self, model: HopfieldModel, spectral_params: Optional[SpectralParams] = None,
                 max_passes: int = DEFAULT_MAX_PASSES, workers: Optional[int] = None):
        self.logger = logging.getLogger("pipeline.coordinator")
        self.model = model
        self.spectral_params = spectral_params or SpectralParams()
        self.max_passes = max_passes
        self.workers = workers or os.cpu_count() or 1
        self.files_done = 0
        self.files_failed = 0

    def classify_path(self, path: Union[str, Path]) -> FileResult:
        """Decode and classify one file; input errors become a failed FileResult"""
        source_id = Path(path).name
        try:
            started = time.perf_counter()
            buffer = audio_io.read_wav(path)
            decoded = time.perf_counter()
            rows = classifier.classify_file(self.model, buffer, self.spectral_params,
                                            source_id=source_id, max_passes=self.max_passes)
            finished = time.perf_counter()
        except InputError as e:
            self.logger.warning(f"Skipping {path}: {e}")
            return FileResult(path=str(path), source_id=source_id, error=str(e), exit_code=exit_code_for(e))
        except Exception as e:
            self.logger.error(f"Internal error while classifying {path}: {e}", exc_info=True)
            return FileResult(path=str(path), source_id=source_id, error=f"internal error: {e}",
                              exit_code=exit_code_for(e))

        self.logger.debug(f"{source_id}: {len(rows)} segments in {finished - decoded:.3f} s")
        return FileResult(
            path=str(path),
            source_id=source_id,
            classifications=rows,
            audio_seconds=buffer.duration_s,
            decode_seconds=decoded - started,
            classify_seconds=finished - decoded,
        )

    async def classify_paths(self, paths: Sequence[Union[str, Path]]) -> List[FileResult]:
        """Classify files concurrently; results come back in the order of paths"""
        semaphore = asyncio.Semaphore(self.workers)

        async def run_one(path: Union[str, Path]) -> FileResult:
            async with semaphore:
                return await asyncio.to_thread(self.classify_path, path)

        results = await asyncio.gather(*(run_one(p) for p in paths))
        self.files_done += sum(1 for r in results if r.ok)
        self.files_failed += sum(1 for r in results if not r.ok)
        self.logger.info(f"Classified {sum(1 for r in results if r.ok)}/{len(results)} files "
                         f"with {self.workers} workers")
        return list(results)

    def run(self, paths: Sequence[Union[str, Path]]) -> List[FileResult]:
        """Blocking entry point for the command line"""
        return asyncio.run(self.classify_paths(paths))

    def get_status(self) -> Dict[str, Any]:
        return {
            "labels": self.model.labels,
            "n_neurons": self.model.n_neurons,
            "workers": self.workers,
            "files_done": self.files_done,
            "files_failed": self.files_failed,
        }
