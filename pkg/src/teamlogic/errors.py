"""Exception hierarchy shared by every module."""


class TeamLogicError(Exception):
    """Base class for all errors raised by :mod:`teamlogic`."""


class ParseError(TeamLogicError):
    """Malformed formula, team, model or relation text."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class SemanticError(TeamLogicError):
    """An operation was applied outside its domain (wrong fragment, missing
    propositions, unknown world, invalid relation)."""


class ResourceGuardError(TeamLogicError):
    """A configured enumeration cap would be exceeded."""

    def __init__(self, what, value, cap, env_var=None, hint=None):
        self.what = what
        self.value = value
        self.cap = cap
        self.env_var = env_var
        self.hint = hint
        msg = f"{what} = {value} exceeds cap {cap}"
        if env_var:
            msg += f"; raise it with {env_var}"
        if hint:
            msg += f"; {hint}"
        super().__init__(msg)
