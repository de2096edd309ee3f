"""Exception hierarchy shared by the library and the command line."""


class HpwlError(Exception):
    """Base class for every error raised by this package."""


class LoadError(HpwlError):
    """A data file could not be parsed."""


class ConfigError(HpwlError):
    """Invalid run configuration (missing label column, bad option...)."""


class ConstructionError(HpwlError):
    """The hypergraph could not be built from the given centroids."""


class RankDeficiencyError(HpwlError):
    """A low-rank factor lost full rank; re-initialise the solver."""


class DivergenceError(HpwlError):
    """The objective became non-finite during optimisation."""
