"""
Validation utilities for run configuration values
"""

from typing import Any, Dict, List

from backend.models.bout import BOUT_CLASSES
from backend.models.hopfield import UNID_LABEL

CAPACITY_POLICIES = ("strict", "boundary", "off")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def validate_label(label: str) -> Dict[str, Any]:
    """Check a class label for use in model files and CSVs"""
    errors = []
    cleaned = label.strip().lower() if isinstance(label, str) else ""
    if not cleaned:
        errors.append("Label must be a non-empty string")
    elif any(ch in cleaned for ch in ",\"\n\r"):
        errors.append(f"Label '{cleaned}' must not contain commas, quotes or line breaks")
    elif cleaned == UNID_LABEL:
        errors.append(f"Label '{UNID_LABEL}' is reserved for unidentified segments")
    elif cleaned == BOUT_CLASSES[-1]:
        errors.append(f"Label '{cleaned}' is reserved for bout output")

    return {
        "is_valid": len(errors) == 0,
        "errors": errors
    }


class InputValidator:
    """Class for validating merged configuration dictionaries"""

    @staticmethod
    def validate_run_config(data: Dict[str, Any]) -> Dict[str, Any]:
        """Range checks on a merged configuration before it becomes a RunConfig"""
        errors: List[str] = []

        low = data.get("band_low_hz", 0.0)
        high = data.get("band_high_hz", 1300.0)
        if not _is_number(low) or low < 0:
            errors.append("band_low_hz must be a non-negative number")
        if not _is_number(high) or high <= 0:
            errors.append("band_high_hz must be a positive number")
        elif _is_number(low) and low >= high:
            errors.append(f"band_low_hz ({low}) must be below band_high_hz ({high})")

        threshold = data.get("threshold", 0.1)
        if not _is_number(threshold) or not 0 < threshold < 1:
            errors.append("threshold must lie strictly between 0 and 1")

        n_neurons = data.get("n_neurons", 14)
        if not isinstance(n_neurons, int) or n_neurons < 2:
            errors.append("n_neurons must be an integer of at least 2")

        fft_length = data.get("fft_length", 1024)
        if not isinstance(fft_length, int) or fft_length < 2 or fft_length & (fft_length - 1):
            errors.append("fft_length must be a power of two")

        overlap = data.get("overlap", 0.5)
        if not _is_number(overlap) or not 0 <= overlap < 1:
            errors.append("overlap must lie in [0, 1)")

        segment_length = data.get("segment_length_s", 1.0)
        if not _is_number(segment_length) or segment_length <= 0:
            errors.append("segment_length_s must be positive")

        max_passes = data.get("max_passes", 100)
        if not isinstance(max_passes, int) or max_passes < 1:
            errors.append("max_passes must be a positive integer")

        policy = data.get("capacity_policy", "boundary")
        if policy not in CAPACITY_POLICIES:
            errors.append(f"capacity_policy must be one of: {', '.join(CAPACITY_POLICIES)}")

        for key in ("grumble_min_consecutive", "alarm_min_consecutive"):
            value = data.get(key, 1)
            if not isinstance(value, int) or value < 1:
                errors.append(f"{key} must be a positive integer")

        for key in ("grumble_separation_s", "alarm_separation_s"):
            value = data.get(key, 1.0)
            if not _is_number(value) or value < 1:
                errors.append(f"{key} must be at least 1 second")

        noncall_max = data.get("noncall_max_s", 60.0)
        if noncall_max is not None and (not _is_number(noncall_max) or noncall_max < 0):
            errors.append("noncall_max_s must be a non-negative number (0 means unbounded)")

        workers = data.get("workers")
        if workers is not None and (not isinstance(workers, int) or workers < 1):
            errors.append("workers must be a positive integer")

        level = data.get("log_level", "INFO")
        if not isinstance(level, str) or level.upper() not in LOG_LEVELS:
            errors.append(f"log_level must be one of: {', '.join(LOG_LEVELS)}")

        for exemplar in data.get("exemplars", []):
            label = exemplar.get("label", "") if isinstance(exemplar, dict) else getattr(exemplar, "label", "")
            errors.extend(validate_label(label)["errors"])

        return {
            "is_valid": len(errors) == 0,
            "errors": errors
        }
