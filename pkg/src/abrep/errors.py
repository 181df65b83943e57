"""Exception types shared across the framework."""


class ModelError(Exception):
    """Base class for all errors raised by this package."""


class DeclarationError(ModelError):
    """A space, relation, or dynamics declaration is malformed."""


class OutOfDomain(ModelError):
    """A state does not belong to the space an operation requires."""


class MetricMismatch(ModelError):
    """A metric was applied to a space kind it does not measure."""


class NotEnumerable(ModelError):
    """Enumeration was requested for a continuous space."""


class SpaceMismatch(ModelError):
    """Two objects that must share a space do not."""


class NotInstantiable(ModelError):
    """No declared seed prepares a physical state for the target."""


class MissingInstantiation(ModelError):
    """The theory declares no instantiation procedure."""


class TheoryNotValidated(ModelError):
    """An operation that requires a validated theory got an unvalidated one."""


class EmptyDomain(ModelError):
    """Theory validation needs a non-empty domain and prediction family."""


class NotProductSpace(ModelError):
    """A factorization was requested over a space that is not a two-part product."""


class TooLarge(ModelError):
    """The brute-force search bound was exceeded."""


class ScenarioError(ModelError):
    """Base class for scenario-document problems."""


class ScenarioSyntaxError(ScenarioError):
    """The document text is not well formed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnknownReference(ScenarioError):
    """An identifier is used before, or without, being declared."""

    def __init__(self, path: str, identifier: str):
        self.path = path
        self.identifier = identifier
        super().__init__(f"{path}: unknown identifier {identifier!r}")


class DuplicateIdentifier(ScenarioError):
    """The same identifier is declared twice in one section."""

    def __init__(self, path: str, identifier: str):
        self.path = path
        self.identifier = identifier
        super().__init__(f"{path}: duplicate identifier {identifier!r}")


class VersionUnsupported(ScenarioError):
    """The document format version is not recognized."""
