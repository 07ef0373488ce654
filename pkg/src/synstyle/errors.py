"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: EmptyManifestError exits 1 (the caller
asked for work on an empty dataset, treated as a usage problem), every other
ValidationError exits 2, and OS-level failures exit 3.
"""


class SynstyleError(Exception):
    """Base class for all package errors."""


class ValidationError(SynstyleError, ValueError):
    """Input data violates a documented contract."""


class ImageFormatError(ValidationError):
    """PNG file is missing, malformed, or of an unsupported flavor."""


class ManifestError(ValidationError):
    """Dataset manifest is malformed or references missing files."""


class EmptyManifestError(ManifestError):
    """Manifest parsed correctly but contains no records."""


class FeatureFormatError(ValidationError):
    """Binary feature file is malformed or inconsistent."""


class PipelineError(SynstyleError):
    """Failure inside an iterative run, wrapped with iteration context."""
