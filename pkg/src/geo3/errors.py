"""Exception hierarchy shared by the engine, the catalog and the CLI."""


class Geo3Error(Exception):
    """Base class for every error raised by geo3."""


class DomainError(Geo3Error, ValueError):
    """A point lies outside the domain of a chart or field."""


class UsageError(Geo3Error, ValueError):
    """Inputs are inconsistent, e.g. fields living on different charts."""


class ParameterError(Geo3Error, ValueError):
    """A model parameter is outside its admissible range."""


class FrameError(Geo3Error):
    """A frame fails to be orthonormal at a sampled point."""


class FrameNotNaturalError(FrameError):
    """Bracket data do not have the shape required for a natural frame."""


class StructuralError(Geo3Error):
    """The differential of a map drops rank somewhere on the sample."""


class InconclusiveError(Geo3Error):
    """The harmonicity test landed between the two decision thresholds."""
