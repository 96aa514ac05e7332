"""Canonical k-types (Hintikka trees) and characteristic formulas.

A depth-``k`` type over ``P`` records the ``P``-label of a world and the set
of depth-``k-1`` types of its successors. Two pointed models are
``k``-bisimilar over ``P`` exactly when their types coincide, and the
characteristic formula of a type holds exactly at the worlds having it.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import syntax as S
from .config import limits
from .errors import ParseError, ResourceGuardError, SemanticError
from .kripke import KripkeModel, TeamModel

__all__ = [
    "TypeTree", "type_of", "enumerate_types", "count_types", "project_type",
    "char_formula", "team_char_formula", "realize", "universal_model",
    "format_type", "parse_type",
]


@dataclass(frozen=True)
class TypeTree:
    props: tuple
    label: frozenset
    children: tuple = ()
    depth: int = 0
    key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "props", tuple(sorted(self.props)))
        object.__setattr__(self, "label", frozenset(self.label))
        if not self.label <= set(self.props):
            raise SemanticError("type label outside its propositions")
        if self.depth == 0 and self.children:
            raise SemanticError("a depth-0 type has no children")
        uniq = {c.key: c for c in self.children}
        for c in uniq.values():
            if c.depth != self.depth - 1 or c.props != self.props:
                raise SemanticError("children must be types of depth k-1 over the same props")
        kids = tuple(uniq[k] for k in sorted(uniq))
        object.__setattr__(self, "children", kids)
        object.__setattr__(self, "key",
                           (self.depth, tuple(sorted(self.label)), tuple(c.key for c in kids)))

    def __lt__(self, other):
        return self.key < other.key

    def __str__(self):
        return format_type(self)


def type_of(M: KripkeModel, w, P, k: int) -> TypeTree:
    P = tuple(sorted(P))
    M.check_world(w)
    memo = {}

    def build(v, j):
        hit = memo.get((v, j))
        if hit is None:
            kids = () if j == 0 else tuple(build(u, j - 1) for u in M.successors(v))
            hit = memo[(v, j)] = TypeTree(P, M.labels[v] & set(P), kids, j)
        return hit

    return build(w, k)


def count_types(nprops: int, k: int) -> int:
    t = 1 << nprops
    for _ in range(k):
        t = (1 << nprops) * (1 << t) if t < 64 else float("inf")
    return t


def enumerate_types(P, k: int, cap=None) -> list:
    """Every depth-``k`` type over ``P`` exactly once, in canonical order."""
    P = tuple(sorted(P))
    cap = limits().type_cap if cap is None else cap
    total = count_types(len(P), k)
    if total > cap:
        raise ResourceGuardError(f"number of {k}-types over {len(P)} props", total, cap,
                                 "TL_TYPE_CAP")
    labels = [frozenset(p for j, p in enumerate(P) if i >> j & 1) for i in range(1 << len(P))]
    level = [TypeTree(P, l) for l in labels]
    for d in range(1, k + 1):
        level = [TypeTree(P, l, tuple(c for i, c in enumerate(level) if m >> i & 1), d)
                 for l in labels for m in range(1 << len(level))]
    return sorted(level)


def project_type(t: TypeTree, Q) -> TypeTree:
    """Forget the propositions outside ``Q``; children that become equal merge."""
    Q = set(Q)
    if not Q <= set(t.props):
        raise SemanticError(f"{sorted(Q - set(t.props))} not among the type's props")
    memo = {}

    def go(node):
        hit = memo.get(node.key)
        if hit is None:
            hit = memo[node.key] = TypeTree(tuple(Q), node.label & Q,
                                            tuple(go(c) for c in node.children), node.depth)
        return hit

    return go(t)


def char_formula(t: TypeTree, memo=None) -> S.Formula:
    """Classical formula true exactly at the worlds of type ``t``.

    Literals for the label, a diamond per child type, and a box over the
    split (read classically) of all child formulas; ``[] bot`` when there are
    no children. Passing the same ``memo`` dict across calls makes formulas
    of related types share subformula objects.
    """
    memo = {} if memo is None else memo

    def go(node):
        hit = memo.get(node.key)
        if hit is not None:
            return hit
        parts = [S.Prop(p) if p in node.label else S.NegProp(p) for p in node.props]
        if node.depth > 0:
            kids = [go(c) for c in node.children]
            parts += [S.Dia(c) for c in kids]
            parts.append(S.Box(S.split_join(kids)))
        hit = memo[node.key] = S.conj(parts)
        return hit

    return go(t)


def team_char_formula(TM: TeamModel, P, k: int) -> S.Formula:
    """Split over the distinct ``k``-types in the team of ``(char & NE)``;
    ``bot`` for the empty team."""
    types = sorted({type_of(TM.model, w, P, k) for w in TM.team})
    return S.split_join([S.And(char_formula(t), S.NE) for t in types])


def type_set_formula(types) -> S.Formula:
    return S.split_join([S.And(char_formula(t), S.NE) for t in sorted(set(types))])


def realize(t: TypeTree):
    """Tree-shaped model whose root has type ``t``; returns ``(model, root)``."""
    worlds, edges, labels = [], [], {}

    def build(node):
        w = f"n{len(worlds)}"
        worlds.append(w)
        labels[w] = node.label
        for c in node.children:
            edges.append((w, build(c)))
        return w

    root = build(t)
    return KripkeModel(worlds, edges, labels), root


def universal_model(P, k: int, cap=None):
    """One world per ``j``-type (``j <= k``) over ``P``; a ``j``-type points to
    the worlds of its children. Returns ``(model, roots)`` where ``roots``
    maps every ``k``-type to its world."""
    P = tuple(sorted(P))
    by_depth = [enumerate_types(P, j, cap) for j in range(k + 1)]
    name = {}
    worlds, labels = [], {}
    for j, level in enumerate(by_depth):
        for i, t in enumerate(level):
            w = f"t{j}_{i}"
            name[t.key] = w
            worlds.append(w)
            labels[w] = t.label
    edges = [(name[t.key], name[c.key]) for level in by_depth for t in level for c in t.children]
    M = KripkeModel(worlds, edges, labels)
    return M, {t: name[t.key] for t in by_depth[k]}


# --------------------------------------------------------------------------
# text encoding

def format_type(t: TypeTree) -> str:
    label = "{" + ",".join(sorted(t.label)) + "}"
    if t.depth == 0:
        return f"({label})"
    return f"({label} -> [" + ", ".join(format_type(c) for c in t.children) + "])"


_TYPE_TOKEN = re.compile(r"\s*(\(|\)|\{[^}]*\}|->|\[|\]|,)")


def parse_type(text: str, props, k=None) -> TypeTree:
    """Inverse of :func:`format_type` for types over ``props``.

    A childless ``(L -> [])`` node does not reveal its depth; pass ``k`` when
    the root's depth is larger than the longest explicit branch.
    """
    props = tuple(sorted(props))
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TYPE_TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"bad type encoding near {text[pos:pos + 10]!r}", 1, pos + 1)
        toks.append(m.group(1))
        pos = m.end()
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def eat(tok):
        nonlocal i
        if peek() != tok:
            raise ParseError(f"expected {tok!r} in type encoding, found {peek()!r}")
        i += 1

    def node():
        # raw tree: (label, children or None for a depth-0 leaf)
        nonlocal i
        eat("(")
        tok = peek()
        if tok is None or not tok.startswith("{"):
            raise ParseError("expected a label set in type encoding")
        label = frozenset(x.strip() for x in tok[1:-1].split(",") if x.strip())
        i += 1
        if peek() != "->":
            eat(")")
            return label, None
        i += 1
        eat("[")
        kids = []
        if peek() != "]":
            kids.append(node())
            while peek() == ",":
                i += 1
                kids.append(node())
        eat("]")
        eat(")")
        return label, kids

    def height(raw):
        label, kids = raw
        if kids is None:
            return 0
        return 1 + max((height(c) for c in kids), default=0)

    def build(raw, depth):
        label, kids = raw
        if kids is None:
            if depth != 0:
                raise ParseError("leaf node below depth 0 in type encoding")
            return TypeTree(props, label)
        if depth < 1:
            raise ParseError("type encoding deeper than requested")
        return TypeTree(props, label, tuple(build(c, depth - 1) for c in kids), depth)

    raw = node()
    if i != len(toks):
        raise ParseError("trailing input in type encoding")
    return build(raw, height(raw) if k is None else k)
