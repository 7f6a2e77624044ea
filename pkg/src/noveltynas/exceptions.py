"""Exception hierarchy shared by the package."""


class NoveltyNASError(Exception):
    """Base class for all package errors."""


class EncodingError(NoveltyNASError, ValueError):
    """A genotype has the wrong length or out-of-range components."""


class UnsupportedSpaceError(NoveltyNASError, ValueError):
    """The requested operation is not available for this search space."""


class DomainError(NoveltyNASError, ValueError):
    """Arguments are individually valid but incompatible with each other."""


class SelectionError(NoveltyNASError, ValueError):
    """A selection operator was asked for more than the pool can supply."""


class BenchmarkError(NoveltyNASError):
    """Base class for benchmark-file problems."""


class BenchmarkParseError(BenchmarkError, ValueError):
    pass


class KeyNotInSpaceError(BenchmarkError, ValueError):
    pass


class DuplicateKeyError(BenchmarkError, ValueError):
    pass


class OracleLookupError(NoveltyNASError, KeyError):
    """The oracle has no record for an architecture."""

    def __init__(self, key):
        super().__init__(key)
        self.key = key

    def __str__(self):
        return f"no benchmark record for architecture {self.key!r}"


class ConfigError(NoveltyNASError, ValueError):
    """Invalid search configuration; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
