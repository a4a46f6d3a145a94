"""
Hopfield core - Hebbian storage, energy and asynchronous retrieval dynamics
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import orjson
from pydantic import ValidationError

from backend.models.hopfield import (
    CapacityPolicy,
    ConvergenceResult,
    HopfieldModel,
    Outcome,
    StoredPattern,
    capacity_bound,
)
from backend.models.pattern import BipolarPattern, EncoderConfig
from backend.utils.errors import (
    CapacityExceeded,
    DimensionMismatch,
    DuplicateLabel,
    InputError,
    InvariantViolation,
    IoError,
    SchemaError,
)

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
DEFAULT_MAX_PASSES = 100
# nonzero fields are multiples of 1/N, far above this
ZERO_FIELD_TOL = 1e-9

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS


def check_capacity(n_patterns: int, n_neurons: int, policy: CapacityPolicy = "boundary") -> None:
    """Enforce the 0.138 N storage bound under the chosen policy"""
    if n_patterns < 1:
        raise InputError("at least one pattern must be stored")
    bound = capacity_bound(n_neurons)
    if n_patterns <= bound:
        return
    if policy == "off":
        logger.warning(f"Capacity check disabled: storing {n_patterns} patterns in {n_neurons} neurons "
                       f"(bound {bound})")
        return
    if policy == "boundary" and n_patterns == bound + 1:
        logger.warning(f"Storing {n_patterns} patterns in {n_neurons} neurons is one over the "
                       f"0.138N bound ({bound}); allowed by the boundary override")
        return
    raise CapacityExceeded(
        f"{n_patterns} patterns exceed the capacity of {n_neurons} neurons "
        f"(floor(0.138 x {n_neurons}) = {bound}, policy '{policy}'); increase the number of neurons"
    )


def hebbian_weights(patterns: np.ndarray) -> np.ndarray:
    """W = (1/N) sum_k x^k x^k^T with the diagonal zeroed"""
    n = patterns.shape[1]
    weights = patterns.T @ patterns / n
    np.fill_diagonal(weights, 0.0)
    return weights


def store(patterns: Sequence[Tuple[BipolarPattern, str]], encoder_config: EncoderConfig,
          capacity_policy: CapacityPolicy = "boundary",
          bias: Optional[Sequence[float]] = None) -> HopfieldModel:
    """Build an immutable model from labelled retrieval states"""
    n = encoder_config.n_neurons
    check_capacity(len(patterns), n, capacity_policy)

    seen = set()
    stored: List[StoredPattern] = []
    for pattern, label in patterns:
        if pattern.n_neurons != n:
            raise DimensionMismatch(f"pattern '{label}' has {pattern.n_neurons} neurons, network has {n}")
        try:
            entry = StoredPattern(label=label, pattern=pattern)
        except ValidationError as e:
            raise InputError(f"invalid label '{label}': {e.errors()[0]['msg']}") from e
        if entry.label in seen:
            raise DuplicateLabel(f"label '{entry.label}' is stored more than once")
        seen.add(entry.label)
        stored.append(entry)

    matrix = np.array([s.pattern.states for s in stored], dtype=np.float64)
    bias_vector = np.zeros(n) if bias is None else np.asarray(bias, dtype=np.float64)
    if bias_vector.shape != (n,):
        raise DimensionMismatch(f"bias has {bias_vector.size} entries, network has {n}")

    model = HopfieldModel(
        weights=hebbian_weights(matrix),
        bias=bias_vector,
        stored=tuple(stored),
        encoder_config=encoder_config,
        capacity_policy=capacity_policy,
    )
    logger.debug(f"Stored {model.n_patterns} patterns in a {n}-neuron network: {model.labels}")
    return model


def _check_dimension(model: HopfieldModel, state: BipolarPattern) -> None:
    if state.n_neurons != model.n_neurons:
        raise DimensionMismatch(f"state has {state.n_neurons} neurons, network has {model.n_neurons}")


def _energy(weights: np.ndarray, bias: np.ndarray, x: np.ndarray) -> float:
    return float(-0.5 * (x @ weights @ x) - bias @ x)


def energy(model: HopfieldModel, state: BipolarPattern) -> float:
    """E = -1/2 sum_ij w_ij x_i x_j - sum_i I_i x_i"""
    _check_dimension(model, state)
    return _energy(model.weights, model.bias, state.as_array())


def converge(model: HopfieldModel, initial: BipolarPattern, max_passes: int = DEFAULT_MAX_PASSES,
             record_energy: bool = False) -> ConvergenceResult:
    """Asynchronous updates in index order until a pass changes nothing or max_passes run out.

    A zero local field keeps the neuron's previous state. With record_energy the
    energy after every single-neuron update is returned, starting with the
    energy of the initial state.
    """
    _check_dimension(model, initial)
    if max_passes < 1:
        raise InputError(f"max_passes must be at least 1, got {max_passes}")

    weights, bias = model.weights, model.bias
    x = initial.as_array().copy()
    n = x.shape[0]
    trace: Optional[List[float]] = [_energy(weights, bias, x)] if record_energy else None

    flips = 0
    converged = False
    passes = 0
    while passes < max_passes:
        passes += 1
        changed = False
        for i in range(n):
            field = float(weights[i] @ x) + bias[i]
            if field > ZERO_FIELD_TOL:
                new = 1.0
            elif field < -ZERO_FIELD_TOL:
                new = -1.0
            else:
                new = x[i]
            if new != x[i]:
                x[i] = new
                flips += 1
                changed = True
            if trace is not None:
                trace.append(_energy(weights, bias, x))
        if not changed:
            converged = True
            break

    final_state = BipolarPattern(states=x.astype(int))
    label = model.label_of(final_state)
    if label is not None:
        outcome = Outcome.RETRIEVED
    elif converged:
        outcome = Outcome.SPURIOUS
    else:
        outcome = Outcome.NON_CONVERGENT

    return ConvergenceResult(
        final_state=final_state,
        outcome=outcome,
        label=label,
        passes_used=passes,
        flips=flips,
        final_energy=_energy(weights, bias, x),
        energy_trace=tuple(trace) if trace is not None else None,
    )


def model_to_document(model: HopfieldModel) -> Dict[str, Any]:
    """Self-describing JSON-ready form of a model"""
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "encoder_config": model.encoder_config.model_dump(),
        "capacity_policy": model.capacity_policy,
        "patterns": [{"label": s.label, "states": list(s.pattern.states)} for s in model.stored],
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
    }


def model_from_document(document: Dict[str, Any], source: str = "<model>") -> HopfieldModel:
    """Rebuild a model from its JSON document"""
    if not isinstance(document, dict):
        raise SchemaError("model document must be a JSON object", path=source)
    missing = [k for k in ("format_version", "encoder_config", "patterns", "weights", "bias")
               if k not in document]
    if missing:
        raise SchemaError(f"model document is missing {', '.join(missing)}", path=source)
    if document["format_version"] != MODEL_FORMAT_VERSION:
        raise SchemaError(f"unsupported model format version {document['format_version']}", path=source)

    try:
        stored = tuple(
            StoredPattern(label=entry["label"], pattern=BipolarPattern(states=entry["states"]))
            for entry in document["patterns"]
        )
        model = HopfieldModel(
            weights=document["weights"],
            bias=document["bias"],
            stored=stored,
            encoder_config=EncoderConfig(**document["encoder_config"]),
            capacity_policy=document.get("capacity_policy", "boundary"),
        )
    except (KeyError, TypeError) as e:
        raise SchemaError(f"malformed model document: {e}", path=source) from e
    except (ValidationError, ValueError) as e:
        raise InvariantViolation(f"model breaks a network invariant: {e}", path=source) from e

    expected = hebbian_weights(np.array([s.pattern.states for s in stored], dtype=np.float64))
    if not np.allclose(model.weights, expected, atol=1e-12, rtol=0):
        logger.warning(f"{source}: weights differ from the Hebbian sum of the stored patterns")
    return model


def dumps_model(model: HopfieldModel) -> bytes:
    return orjson.dumps(model_to_document(model), option=JSON_OPTIONS) + b"\n"


def save_model(model: HopfieldModel, path: Union[str, Path]) -> Path:
    """Write the model file; identical models always produce identical bytes"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(dumps_model(model))
    except OSError as e:
        raise IoError(f"cannot write model file: {e.strerror or e}", path=str(path)) from e
    return path


def load_model(path: Union[str, Path]) -> HopfieldModel:
    """Read and validate a model file"""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise IoError(f"cannot read model file: {e.strerror or e}", path=str(path)) from e
    try:
        document = orjson.loads(raw)
    except orjson.JSONDecodeError as e:
        raise SchemaError(f"model file is not valid JSON: {e}", path=str(path)) from e
    return model_from_document(document, source=str(path))
