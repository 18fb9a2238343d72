"""Exception hierarchy shared across the pipeline."""


class WikiKGError(Exception):
    """Base class for every error raised by this package."""


# -- ingest ---------------------------------------------------------------

class ParseError(WikiKGError):
    pass


class MalformedStatement(ParseError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ColumnCountMismatch(ParseError):
    def __init__(self, statement_index, expected, got):
        super().__init__(
            f"statement #{statement_index}: row has {got} columns, schema expects {expected}"
        )
        self.statement_index = statement_index
        self.expected = expected
        self.got = got


class XmlStructure(ParseError):
    def __init__(self, message, path):
        super().__init__(f"{message} at {path}")
        self.path = path


class TooManyMalformed(ParseError):
    """Raised when the share of skipped lines crosses the configured tolerance."""


# -- normalize ------------------------------------------------------------

class NormalizationError(WikiKGError, ValueError):
    pass


class UnparseableUrl(NormalizationError):
    pass


class InvalidIdentifier(NormalizationError):
    pass


class InvalidDoi(InvalidIdentifier):
    pass


class InvalidIsbn(InvalidIdentifier):
    pass


class UnknownScheme(NormalizationError):
    pass


class EmptyIdentifierSet(NormalizationError):
    pass


class RuleFileError(WikiKGError):
    pass


# -- graph / pipeline -----------------------------------------------------

class DuplicatePageId(WikiKGError):
    pass


class MissingGraph(WikiKGError):
    pass


class IntegrityViolationsPresent(WikiKGError):
    pass


class MissingMetrics(WikiKGError):
    pass


class ConfigError(WikiKGError):
    pass


class CreatedAfterAsOf(WikiKGError, ValueError):
    pass


# -- analysis -------------------------------------------------------------

class DegenerateVector(WikiKGError, ValueError):
    pass


class UnknownClassLabel(WikiKGError, ValueError):
    pass
