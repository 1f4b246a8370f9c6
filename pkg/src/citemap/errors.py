"""Exception hierarchy shared by every stage of the pipeline."""


class CitemapError(Exception):
    """Base class for data errors raised by citemap."""


class IngestError(CitemapError):
    pass


class EmptyScopeError(CitemapError):
    pass


class HistogramError(CitemapError):
    pass


class GainError(CitemapError):
    pass


class LotkaError(CitemapError):
    pass


class LayoutError(CitemapError):
    pass


class SynthError(CitemapError):
    pass


class ConfigError(Exception):
    """Invalid invocation or run configuration (not a data problem)."""
