"""Formula AST, concrete grammar, printer and syntactic utilities.

Concrete syntax (ASCII), tightest binding first::

    ~p   <> f   [] f   E p. f        unary
    f & g                            conjunction
    f \\/ g   f \\/+ g                 split / non-empty split
    f || g                           classical (Boolean) disjunction

Atoms are propositions ``[a-z][a-z0-9_]*``, the constants ``bot``, ``top``,
``NE`` and the team atoms ``=(a1, ..., ah ; g)``, ``inc(a1, ... ; b1, ...)``
and ``ind(a1, ... ; b1, ...)`` whose arguments must be classical modal
formulas.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import ParseError, SemanticError

__all__ = [
    "Formula", "Prop", "NegProp", "Bottom", "Top", "NonEmpty", "Dep", "Inc",
    "Ind", "And", "Split", "NESplit", "Or", "Dia", "Box", "Exists",
    "BOT", "TOP", "NE", "Fragment", "parse", "render", "language_of",
    "free_props", "modal_depth", "classify", "substitute_const",
    "is_classical", "is_modal_free", "conj", "split_join", "or_join",
    "walk", "size",
]


class Formula:
    """Base class of all AST nodes. Nodes are immutable and compare
    structurally."""

    __slots__ = ()

    def __str__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class Prop(Formula):
    name: str

    def __repr__(self):
        return f"Prop({self.name!r})"


@dataclass(frozen=True, repr=False)
class NegProp(Formula):
    name: str

    def __repr__(self):
        return f"NegProp({self.name!r})"


@dataclass(frozen=True, repr=False)
class Bottom(Formula):
    def __repr__(self):
        return "BOT"


@dataclass(frozen=True, repr=False)
class Top(Formula):
    def __repr__(self):
        return "TOP"


@dataclass(frozen=True, repr=False)
class NonEmpty(Formula):
    def __repr__(self):
        return "NE"


BOT = Bottom()
TOP = Top()
NE = NonEmpty()


@dataclass(frozen=True)
class Dep(Formula):
    """Dependence atom ``=(args ; target)``; empty ``args`` is constancy."""
    args: tuple
    target: Formula


@dataclass(frozen=True)
class Inc(Formula):
    left: tuple
    right: tuple


@dataclass(frozen=True)
class Ind(Formula):
    left: tuple
    right: tuple


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Split(Formula):
    """Team disjunction: the team is covered by two parts."""
    left: Formula
    right: Formula


@dataclass(frozen=True)
class NESplit(Formula):
    """Non-empty split: both covering parts non-empty unless the team is."""
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    """Classical (Boolean) disjunction of team properties."""
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Dia(Formula):
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    """Bisimulation quantifier over ``var``."""
    var: str
    body: Formula


_BINARY = (And, Split, NESplit, Or)
_ATOMS = (Dep, Inc, Ind)
_CLASSICAL = (Prop, NegProp, Bottom, Top, And, Split, Dia, Box)


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal, including team-atom arguments."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, _BINARY):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, (Dia, Box, Exists)):
            stack.append(node.body)
        elif isinstance(node, Dep):
            stack.append(node.target)
            stack.extend(reversed(node.args))
        elif isinstance(node, (Inc, Ind)):
            stack.extend(reversed(node.right))
            stack.extend(reversed(node.left))


def size(f: Formula) -> int:
    return sum(1 for _ in walk(f))


def is_classical(f: Formula) -> bool:
    return all(isinstance(n, _CLASSICAL) for n in walk(f))


def is_modal_free(f: Formula) -> bool:
    return not any(isinstance(n, (Dia, Box)) for n in walk(f))


# --------------------------------------------------------------------------
# n-ary helpers

def _join(cls, items: Sequence[Formula], empty: Formula) -> Formula:
    items = list(items)
    if not items:
        return empty
    if len(items) <= 32:
        out = items[0]
        for g in items[1:]:
            out = cls(out, g)
        return out
    # keep the tree shallow so recursive consumers never hit the stack limit
    mid = len(items) // 2
    return cls(_join(cls, items[:mid], empty), _join(cls, items[mid:], empty))


def conj(items: Sequence[Formula]) -> Formula:
    """Conjunction of ``items``; the empty conjunction is ``top``."""
    return _join(And, items, TOP)


def split_join(items: Sequence[Formula]) -> Formula:
    """Split of ``items``; the empty split is ``bot`` (only the empty team)."""
    return _join(Split, items, BOT)


def or_join(items: Sequence[Formula], empty: Formula | None = None) -> Formula:
    """Classical disjunction. ``empty`` defaults to ``bot & NE`` which no team
    satisfies."""
    return _join(Or, items, And(BOT, NE) if empty is None else empty)


# --------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<splitne>\\/\+)
  | (?P<split>\\/)
  | (?P<oror>\|\|)
  | (?P<dia><>)
  | (?P<box>\[\])
  | (?P<amp>&)
  | (?P<tilde>~)
  | (?P<eq>=)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<comma>,)
  | (?P<semi>;)
  | (?P<dot>\.)
  | (?P<ne>NE\b)
  | (?P<exists>E\b)
  | (?P<ident>[a-z][a-z0-9_]*)
""", re.VERBOSE)

_KEYWORDS = {"bot", "top", "inc", "ind"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rfind("\n") + 1
        else:
            word = m.group()
            if kind == "ident" and word in _KEYWORDS:
                kind = word
            toks.append(_Tok(kind, word, line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.atom_depth = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def eat(self, kind):
        tok = self.tok
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise self.error(f"expected {kind}, found {shown!r}")
        self.i += 1
        return tok

    def parse(self):
        f = self.or_expr()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def or_expr(self):
        f = self.split_expr()
        while self.tok.kind == "oror":
            self.i += 1
            f = Or(f, self.split_expr())
        return f

    def split_expr(self):
        f = self.and_expr()
        while self.tok.kind in ("split", "splitne"):
            cls = Split if self.tok.kind == "split" else NESplit
            self.i += 1
            f = cls(f, self.and_expr())
        return f

    def and_expr(self):
        f = self.unary()
        while self.tok.kind == "amp":
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self):
        kind = self.tok.kind
        if kind == "tilde":
            self.i += 1
            return NegProp(self.eat("ident").text)
        if kind == "dia":
            self.i += 1
            return Dia(self.unary())
        if kind == "box":
            self.i += 1
            return Box(self.unary())
        if kind == "exists":
            self.i += 1
            var = self.eat("ident").text
            self.eat("dot")
            return Exists(var, self.unary())
        return self.atom()

    def atom(self):
        tok = self.tok
        kind = tok.kind
        if kind == "ident":
            self.i += 1
            return Prop(tok.text)
        if kind == "bot":
            self.i += 1
            return BOT
        if kind == "top":
            self.i += 1
            return TOP
        if kind == "ne":
            self.i += 1
            return NE
        if kind == "lpar":
            self.i += 1
            f = self.or_expr()
            self.eat("rpar")
            return f
        if kind == "eq":
            self.i += 1
            self.eat("lpar")
            args = self.arg_list(tok)
            self.eat("semi")
            target = self.arg(tok)
            self.eat("rpar")
            return Dep(tuple(args), target)
        if kind in ("inc", "ind"):
            self.i += 1
            self.eat("lpar")
            left = self.arg_list(tok)
            self.eat("semi")
            right = self.arg_list(tok)
            self.eat("rpar")
            if kind == "inc":
                if len(left) != len(right):
                    raise self.error(
                        f"inclusion atom arity mismatch: {len(left)} vs {len(right)}", tok)
                return Inc(tuple(left), tuple(right))
            return Ind(tuple(left), tuple(right))
        shown = tok.text or "end of input"
        raise self.error(f"unexpected {shown!r}")

    def arg_list(self, atom_tok):
        if self.tok.kind in ("semi", "rpar"):
            return []
        args = [self.arg(atom_tok)]
        while self.tok.kind == "comma":
            self.i += 1
            args.append(self.arg(atom_tok))
        return args

    def arg(self, atom_tok):
        start = self.tok
        self.atom_depth += 1
        try:
            f = self.or_expr()
        finally:
            self.atom_depth -= 1
        for node in walk(f):
            if isinstance(node, _ATOMS):
                raise self.error("team atom nested inside a team atom", start)
        if not is_classical(f):
            raise self.error("team-atom arguments must be classical modal formulas", start)
        return f


def parse(text: str) -> Formula:
    """Parse ``text`` into a formula.

    Raises :class:`ParseError` carrying line/column on malformed input,
    inclusion atoms with sides of different length, and nested team atoms.
    """
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# printing

_LEVEL = {Or: 1, Split: 2, NESplit: 2, And: 3}
_OPS = {Or: "||", Split: "\\/", NESplit: "\\/+", And: "&"}
_UNARY_LEVEL = 4


def _level(f):
    return _LEVEL.get(type(f), 5 if not isinstance(f, (Dia, Box, Exists)) else _UNARY_LEVEL)


def _wrap(f, min_level):
    s = render(f)
    return f"({s})" if _level(f) < min_level else s


def _args(items):
    return ", ".join(render(a) for a in items)


def render(f: Formula) -> str:
    """Deterministic, minimally parenthesised text that parses back to ``f``."""
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, NegProp):
        return "~" + f.name
    if isinstance(f, Bottom):
        return "bot"
    if isinstance(f, Top):
        return "top"
    if isinstance(f, NonEmpty):
        return "NE"
    if isinstance(f, Dep):
        return f"=({_args(f.args)} ; {render(f.target)})"
    if isinstance(f, Inc):
        return f"inc({_args(f.left)} ; {_args(f.right)})"
    if isinstance(f, Ind):
        return f"ind({_args(f.left)} ; {_args(f.right)})"
    if isinstance(f, _BINARY):
        lvl = _LEVEL[type(f)]
        return f"{_wrap(f.left, lvl)} {_OPS[type(f)]} {_wrap(f.right, lvl + 1)}"
    if isinstance(f, Dia):
        return "<> " + _wrap(f.body, _UNARY_LEVEL)
    if isinstance(f, Box):
        return "[] " + _wrap(f.body, _UNARY_LEVEL)
    if isinstance(f, Exists):
        return f"E {f.var}. " + _wrap(f.body, _UNARY_LEVEL)
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# language, depth, fragments

def language_of(f: Formula) -> frozenset:
    """All propositions occurring in ``f``, bound ones included."""
    out = set()
    for node in walk(f):
        if isinstance(node, (Prop, NegProp)):
            out.add(node.name)
        elif isinstance(node, Exists):
            out.add(node.var)
    return frozenset(out)


def free_props(f: Formula) -> frozenset:
    """Free propositions; ``E p.`` removes ``p``."""
    if isinstance(f, (Prop, NegProp)):
        return frozenset([f.name])
    if isinstance(f, _BINARY):
        return free_props(f.left) | free_props(f.right)
    if isinstance(f, (Dia, Box)):
        return free_props(f.body)
    if isinstance(f, Exists):
        return free_props(f.body) - {f.var}
    if isinstance(f, Dep):
        return frozenset().union(*(free_props(a) for a in f.args + (f.target,)))
    if isinstance(f, (Inc, Ind)):
        return frozenset().union(*(free_props(a) for a in f.left + f.right))
    return frozenset()


def modal_depth(f: Formula) -> int:
    """Maximal nesting of modalities; a team atom counts as deep as its
    deepest argument."""
    if isinstance(f, (Dia, Box)):
        return 1 + modal_depth(f.body)
    if isinstance(f, _BINARY):
        return max(modal_depth(f.left), modal_depth(f.right))
    if isinstance(f, Exists):
        return modal_depth(f.body)
    if isinstance(f, Dep):
        return max(modal_depth(a) for a in f.args + (f.target,))
    if isinstance(f, (Inc, Ind)):
        return max((modal_depth(a) for a in f.left + f.right), default=0)
    return 0


class Fragment(enum.IntEnum):
    """Rows of the team-logic table, in increasing order. ``EXT`` marks use of
    the bisimulation quantifier."""
    CPL = 0
    PDEP = 1
    PINC = 2
    PIND = 3
    FPTL = 4
    ML = 5
    MDEP = 6
    MINC = 7
    MIND = 8
    FMTL = 9
    EXT = 10


_ATOM_ROW = {Dep: (Fragment.PDEP, Fragment.MDEP),
             Inc: (Fragment.PINC, Fragment.MINC),
             Ind: (Fragment.PIND, Fragment.MIND)}


def classify(f: Formula) -> Fragment:
    """Least row covering the node kinds of ``f``.

    ``\\/+`` is attributed to the full logics (FPTL/FMTL), as are formulas
    mixing different kinds of team atoms or team atoms with NE/``||``: no
    smaller row contains them.
    """
    nodes = list(walk(f))
    if any(isinstance(n, Exists) for n in nodes):
        return Fragment.EXT
    modal = any(isinstance(n, (Dia, Box)) for n in nodes)
    full = any(isinstance(n, (NonEmpty, Or, NESplit)) for n in nodes)
    atoms = {type(n) for n in nodes if isinstance(n, _ATOMS)}
    idx = 1 if modal else 0
    if full or len(atoms) > 1:
        return (Fragment.FPTL, Fragment.FMTL)[idx]
    if atoms:
        return _ATOM_ROW[atoms.pop()][idx]
    return (Fragment.CPL, Fragment.ML)[idx]


def uses_nesplit(f: Formula) -> bool:
    return any(isinstance(n, NESplit) for n in walk(f))


# --------------------------------------------------------------------------
# substitution of constants

def substitute_const(f: Formula, p: str, value) -> Formula:
    """``f[p|top]`` or ``f[p|bot]``.

    ``value`` is ``TOP``/``BOT`` (or a bool). Occurrences bound by ``E p.``
    are left alone.
    """
    if isinstance(value, bool):
        value = TOP if value else BOT
    if value not in (TOP, BOT):
        raise SemanticError("only top/bot may be substituted")
    neg = BOT if value == TOP else TOP

    def sub(g):
        if isinstance(g, Prop):
            return value if g.name == p else g
        if isinstance(g, NegProp):
            return neg if g.name == p else g
        if isinstance(g, _BINARY):
            return type(g)(sub(g.left), sub(g.right))
        if isinstance(g, (Dia, Box)):
            return type(g)(sub(g.body))
        if isinstance(g, Exists):
            return g if g.var == p else Exists(g.var, sub(g.body))
        if isinstance(g, Dep):
            return Dep(tuple(sub(a) for a in g.args), sub(g.target))
        if isinstance(g, (Inc, Ind)):
            return type(g)(tuple(sub(a) for a in g.left), tuple(sub(a) for a in g.right))
        return g

    return sub(f)
