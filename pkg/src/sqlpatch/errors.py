"""Exception types raised across the toolkit."""


class SqlPatchError(Exception):
    """Base class for all toolkit errors."""


class TokenizeError(SqlPatchError):
    pass


class ParseError(SqlPatchError):
    """Syntax or reference error while parsing SQL.

    ``position`` is the 1-based index of the offending token, when known.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class NormalizeError(SqlPatchError):
    pass


class SchemaError(SqlPatchError):
    pass


class MapError(SqlPatchError):
    """Invalid clause map (missing clauses, dangling placeholders, bad keys)."""


class PyDictError(SqlPatchError):
    """Malformed clause-dictionary text."""


class EditParseError(SqlPatchError):
    """Malformed special-token edit text."""


class ProgramError(SqlPatchError):
    """Malformed edit-program text; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class ExecError(SqlPatchError):
    """Edit-program statement could not be executed against the clause map."""


class ApplyError(SqlPatchError):
    """Clause-level edit action could not be anchored to the clause map."""


class ExecutionError(SqlPatchError):
    """A query failed while running on the database backend."""


class BackendUnavailable(SqlPatchError):
    """No database backend (or database file) is available for a db_id."""


class DatasetError(SqlPatchError):
    pass
