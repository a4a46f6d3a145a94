"""
Exception hierarchy for the Hopfield call monitor
"""

from typing import Optional

# CLI exit codes
EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INTERNAL_ERROR = 2


class HopfieldAudioError(Exception):
    """Base class for all errors raised by this package"""


class InputError(HopfieldAudioError, ValueError):
    """Bad input data, bad configuration or a violated precondition (exit code 1)"""

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


# audio_io
class UnsupportedFormat(InputError):
    """WAV file uses a codec other than integer or float PCM"""


class CorruptHeader(InputError):
    """Truncated or invalid RIFF/WAVE structure"""


class EmptyAudio(InputError):
    """No samples, or too few for one segment"""


class AliasedFrequency(InputError):
    """Requested tone at or above the Nyquist frequency"""


class IoError(InputError):
    """File could not be read or written"""


# spectral / encoder
class SegmentTooShort(InputError):
    """Fewer samples than one FFT frame"""


class BandExceedsNyquist(InputError):
    """Frequency band reaches past the Nyquist frequency of the recording"""


class OutOfBand(InputError):
    """Frequency outside the encoder band"""


class ConfigMismatch(InputError):
    """Peaks were extracted with a different band than the encoder uses"""


# hopfield_core
class CapacityExceeded(InputError):
    """Too many patterns for the network size"""


class DimensionMismatch(InputError):
    """Pattern or state length differs from the network size"""


class DuplicateLabel(InputError):
    """Two stored patterns share a class label"""


class EmptyPeaks(InputError):
    """An exemplar has no above-threshold peaks and cannot be stored"""


# bouts / metrics
class UnsortedInput(InputError):
    """Classifications are not sorted and contiguous by segment index"""


class MixedSources(InputError):
    """Sequence mixes records from more than one source file"""


class SchemaError(InputError):
    """CSV or JSON document does not follow the expected schema"""


class InvariantViolation(InputError):
    """Record is well formed but breaks a domain invariant"""


# configuration
class ConfigError(InputError):
    """Invalid run configuration"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, path=path)


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the stable CLI exit code"""
    if isinstance(error, InputError):
        return EXIT_INPUT_ERROR
    return EXIT_INTERNAL_ERROR
