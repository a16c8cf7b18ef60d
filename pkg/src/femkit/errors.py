"""Exception types shared across the package."""


class FemkitError(Exception):
    """Base class for all package-specific errors."""


class ParseError(FemkitError):
    """Formula text could not be parsed. Carries the byte offset of the fault."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


class CorpusFormatError(FemkitError):
    """Malformed corpus record. Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyCorpusError(FemkitError):
    pass


class NoParseError(ParseError):
    """Query formula text could not be parsed."""


class EmptyGraphError(FemkitError):
    pass


class MissingEmbeddingError(FemkitError):
    pass


class UnknownFormulaError(FemkitError):
    pass


class EmptyMapError(FemkitError):
    pass


class SchemaError(FemkitError):
    pass


class EmptyCatalogError(FemkitError):
    pass


class UnknownVertexError(FemkitError):
    pass


class InsufficientDataError(FemkitError):
    pass


class NoJudgmentsOfTypeError(FemkitError):
    pass
