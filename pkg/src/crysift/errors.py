"""Exception hierarchy for crysift."""


class CrySiftError(Exception):
    """Base class for all library errors."""


class DegenerateInputError(CrySiftError, ValueError):
    """Input carries no usable signal (zero energy, empty band, ...)."""


class InstabilityError(CrySiftError, ArithmeticError):
    """Levinson-Durbin recursion produced a reflection coefficient with |k| >= 1."""


class NoDominantError(CrySiftError, ValueError):
    """Contour has no voiced frame to take a dominant F0 from."""


class EmptyEvaluationError(CrySiftError, ValueError):
    """No frame is eligible for the percentage-error metric."""


class AudioFormatError(CrySiftError):
    """Base class for audio file problems."""


class MalformedFileError(AudioFormatError):
    """RIFF/WAVE structure is truncated or inconsistent."""


class UnsupportedCodecError(AudioFormatError):
    """WAVE format tag or bit depth is not supported."""


class EmptyAudioError(AudioFormatError):
    """The data chunk holds no samples."""
