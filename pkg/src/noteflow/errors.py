"""Exception types shared across the engine."""


class NoteflowError(Exception):
    """Base class for engine errors."""


class MalformedNotebook(NoteflowError):
    """Notebook file is not JSON or lacks a cells array."""


class TraceCellMismatch(NoteflowError):
    """Execution log references a cell position outside the document."""


class MissingManifest(NoteflowError):
    """Snapshot directory has no manifest.json."""


class ManifestSchemaError(NoteflowError):
    """manifest.json does not match the expected schema."""


class RegistrySchemaError(NoteflowError):
    """transforms.json failed validation."""


class AllNullColumn(NoteflowError):
    """Distribution mining on a column with no non-null values."""


class DegenerateColumn(NoteflowError):
    """Correlation mining on a zero-variance column."""


class UnknownNode(NoteflowError):
    """Node id not present in the flow graph."""


class SpecSchemaMismatch(NoteflowError):
    """Chart spec references columns absent from the target snapshot."""


class BundleFormatError(NoteflowError):
    """Serialized bundle failed to parse or validate."""
