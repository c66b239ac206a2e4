class ExtractorError(Exception):
    """Base class for extractor errors."""


class ModelLoadFailure(ExtractorError):
    """The checkpoint could not be loaded or lacks the expected quantizer."""


class AudioDecodeFailure(ExtractorError):
    """One audio file could not be decoded as 16 kHz mono PCM."""
