"""Exact model checking and uniform interpolation for propositional and modal
team logics."""
from .errors import ParseError, ResourceGuardError, SemanticError, TeamLogicError
from .syntax import parse, render

__version__ = "0.1.0"

__all__ = ["parse", "render", "ParseError", "ResourceGuardError",
           "SemanticError", "TeamLogicError", "__version__"]
