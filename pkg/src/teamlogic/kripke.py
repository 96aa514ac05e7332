"""Kripke models, pointed (singleton) semantics and modal team semantics."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import syntax as S
from .config import limits
from .errors import ParseError, ResourceGuardError, SemanticError
from .teamspace import PointSpace

__all__ = [
    "KripkeModel", "TeamModel", "eval_singleton", "truth_set", "truth_array",
    "truth_arrays",
    "successors_and_cover", "eval_team_modal", "team_property",
    "disjoint_union", "parse_model", "format_model", "enumerate_models",
    "team_models",
]


class KripkeModel:
    """Finite Kripke model ``(W, R, V)``; world ids are strings."""

    __slots__ = ("worlds", "edges", "labels", "_index", "_succ", "_space")

    def __init__(self, worlds, edges=(), labels=None):
        self.worlds = tuple(worlds)
        if len(set(self.worlds)) != len(self.worlds):
            raise SemanticError("duplicate world ids")
        self._index = {w: i for i, w in enumerate(self.worlds)}
        self.edges = frozenset((a, b) for a, b in edges)
        for a, b in self.edges:
            if a not in self._index or b not in self._index:
                raise SemanticError(f"edge ({a}, {b}) references an unknown world")
        labels = labels or {}
        extra = set(labels) - set(self.worlds)
        if extra:
            raise SemanticError(f"labels for unknown worlds {sorted(extra)}")
        self.labels = {w: frozenset(labels.get(w, ())) for w in self.worlds}
        succ = {w: [] for w in self.worlds}
        for a, b in sorted(self.edges, key=lambda e: (self._index[e[0]], self._index[e[1]])):
            succ[a].append(b)
        self._succ = {w: tuple(v) for w, v in succ.items()}
        self._space = None

    def successors(self, w) -> tuple:
        self.check_world(w)
        return self._succ[w]

    def index(self, w) -> int:
        return self._index[w]

    def check_world(self, w):
        if w not in self._index:
            raise SemanticError(f"unknown world {w!r}")

    def props(self) -> frozenset:
        return frozenset().union(*self.labels.values()) if self.labels else frozenset()

    def space(self) -> PointSpace:
        if self._space is None:
            succ = [sum(1 << self._index[v] for v in self._succ[w]) for w in self.worlds]
            self._space = PointSpace([self.labels[w] for w in self.worlds], succ,
                                     max_points=limits().max_worlds)
        return self._space

    def mask(self, team) -> int:
        m = 0
        for w in team:
            self.check_world(w)
            m |= 1 << self._index[w]
        return m

    def team_of(self, mask) -> frozenset:
        return frozenset(w for i, w in enumerate(self.worlds) if mask >> i & 1)

    def restrict_labels(self, props) -> "KripkeModel":
        props = frozenset(props)
        return KripkeModel(self.worlds, self.edges,
                           {w: l & props for w, l in self.labels.items()})

    def _key(self):
        return (self.worlds, self.edges, tuple(self.labels[w] for w in self.worlds))

    def __eq__(self, other):
        return isinstance(other, KripkeModel) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __len__(self):
        return len(self.worlds)

    def __repr__(self):
        return f"KripkeModel({format_model(self)})"


@dataclass(frozen=True)
class TeamModel:
    model: KripkeModel
    team: frozenset

    def __post_init__(self):
        object.__setattr__(self, "team", frozenset(self.team))
        for w in self.team:
            self.model.check_world(w)

    @property
    def mask(self) -> int:
        return self.model.mask(self.team)


# --------------------------------------------------------------------------
# pointed semantics

def truth_set(a: S.Formula, M: KripkeModel) -> frozenset:
    """Worlds where classical ``a`` holds under pointed semantics."""
    if not S.is_classical(a):
        raise SemanticError(f"not a classical formula: {S.render(a)}")
    return _truth(a, M, {})


def _truth(a, M, memo):
    key = id(a)
    if key in memo:
        return memo[key][1]
    W = frozenset(M.worlds)
    if isinstance(a, S.Prop):
        out = frozenset(w for w in W if a.name in M.labels[w])
    elif isinstance(a, S.NegProp):
        out = frozenset(w for w in W if a.name not in M.labels[w])
    elif isinstance(a, S.Bottom):
        out = frozenset()
    elif isinstance(a, S.Top):
        out = W
    elif isinstance(a, S.And):
        out = _truth(a.left, M, memo) & _truth(a.right, M, memo)
    elif isinstance(a, S.Split):
        out = _truth(a.left, M, memo) | _truth(a.right, M, memo)
    elif isinstance(a, S.Dia):
        body = _truth(a.body, M, memo)
        out = frozenset(w for w in W if any(v in body for v in M.successors(w)))
    elif isinstance(a, S.Box):
        body = _truth(a.body, M, memo)
        out = frozenset(w for w in W if all(v in body for v in M.successors(w)))
    else:
        raise SemanticError(f"not a classical formula: {S.render(a)}")
    memo[key] = (a, out)
    return out


def truth_array(a: S.Formula, M: KripkeModel) -> np.ndarray:
    """Boolean vector over ``M.worlds`` of pointed truth of classical ``a``.

    Same semantics as :func:`truth_set`, computed with a sparse adjacency
    matrix so that models with many thousands of worlds stay cheap.
    """
    return truth_arrays([a], M)[0]


def truth_arrays(formulas, M: KripkeModel) -> np.ndarray:
    """Row ``i`` is :func:`truth_array` of ``formulas[i]``. Subformula
    objects shared between the formulas are evaluated once."""
    from scipy import sparse
    formulas = list(formulas)
    for a in formulas:
        if not S.is_classical(a):
            raise SemanticError(f"not a classical formula: {S.render(a)}")
    n = len(M)
    rows = [M.index(x) for x, _ in M.edges]
    cols = [M.index(y) for _, y in M.edges]
    A = sparse.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)), shape=(n, n))
    props = sorted(M.props())
    lab = {p: np.array([p in M.labels[w] for w in M.worlds], dtype=bool) for p in props}
    none = np.zeros(n, dtype=bool)
    memo = {}

    def go(g):
        hit = memo.get(id(g))
        if hit is not None:
            return hit[1]
        if isinstance(g, S.Prop):
            out = lab.get(g.name, none)
        elif isinstance(g, S.NegProp):
            out = ~lab.get(g.name, none)
        elif isinstance(g, S.Bottom):
            out = none
        elif isinstance(g, S.Top):
            out = ~none
        elif isinstance(g, S.And):
            out = go(g.left) & go(g.right)
        elif isinstance(g, S.Split):
            out = go(g.left) | go(g.right)
        elif isinstance(g, S.Dia):
            out = (A @ go(g.body).astype(np.int32)) > 0
        else:
            out = (A @ (~go(g.body)).astype(np.int32)) == 0
        memo[id(g)] = (g, out)
        return out

    out = np.zeros((len(formulas), n), dtype=bool)
    for i, a in enumerate(formulas):
        out[i] = go(a)
    return out


def eval_singleton(a: S.Formula, M: KripkeModel, w) -> int:
    """``1`` if ``M, w |= a`` in the usual pointed semantics, else ``0``."""
    M.check_world(w)
    return int(w in truth_set(a, M))


def successors_and_cover(M: KripkeModel, X, Y):
    """``(R(X), X R Y)``: the successor set of ``X`` and whether every member
    of ``X`` has a successor in ``Y`` and every member of ``Y`` a predecessor
    in ``X``."""
    X, Y = frozenset(X), frozenset(Y)
    for w in X | Y:
        M.check_world(w)
    r_of = frozenset(v for x in X for v in M.successors(x))
    covers = (all(any(v in Y for v in M.successors(x)) for x in X)
              and all(any(y in M.successors(x) for x in X) for y in Y))
    return r_of, covers


# --------------------------------------------------------------------------
# team semantics, clause by clause

def eval_team_modal(f: S.Formula, TM: TeamModel, max_successors=None) -> bool:
    """Decide ``(M, X) |= f``.

    Diamonds search every ``Y`` inside ``R(X)`` with ``X R Y``; boxes move to
    ``R(X)``; team atoms compare pointed truth values of their arguments.
    """
    M = TM.model
    cap = limits().max_successors if max_successors is None else max_successors
    for node in S.walk(f):
        if isinstance(node, S.Exists):
            raise SemanticError("eliminate bisimulation quantifiers before evaluation")
    tmemo = {}
    memo = {}

    def truths(a):
        return _truth(a, M, tmemo)

    def pattern(args, w):
        return tuple(w in truths(a) for a in args)

    def sat(g, X):
        key = (id(g), X)
        hit = memo.get(key)
        if hit is None:
            hit = memo[key] = clause(g, X)
        return hit

    def clause(g, X):
        if isinstance(g, S.Prop):
            return all(g.name in M.labels[w] for w in X)
        if isinstance(g, S.NegProp):
            return all(g.name not in M.labels[w] for w in X)
        if isinstance(g, S.Bottom):
            return not X
        if isinstance(g, S.Top):
            return True
        if isinstance(g, S.NonEmpty):
            return bool(X)
        if isinstance(g, S.And):
            return sat(g.left, X) and sat(g.right, X)
        if isinstance(g, S.Or):
            return sat(g.left, X) or sat(g.right, X)
        if isinstance(g, (S.Split, S.NESplit)):
            nonempty = isinstance(g, S.NESplit)
            if nonempty and not X:
                return True
            members = sorted(X, key=M.index)
            for left in _subsets(members):
                if nonempty and not left:
                    continue
                if not sat(g.left, left):
                    continue
                rest = X - left
                for extra in _subsets(sorted(left, key=M.index)):
                    right = rest | extra
                    if nonempty and not right:
                        continue
                    if sat(g.right, right):
                        return True
            return False
        if isinstance(g, S.Box):
            r_of, _ = successors_and_cover(M, X, ())
            return sat(g.body, r_of)
        if isinstance(g, S.Dia):
            r_of, _ = successors_and_cover(M, X, ())
            if len(r_of) > cap:
                raise ResourceGuardError("|R(X)|", len(r_of), cap, "TL_MAX_SUCCESSORS")
            for Y in _subsets(sorted(r_of, key=M.index)):
                if successors_and_cover(M, X, Y)[1] and sat(g.body, Y):
                    return True
            return False
        if isinstance(g, S.Dep):
            return all(((w in truths(g.target)) == (v in truths(g.target)))
                       for w in X for v in X
                       if pattern(g.args, w) == pattern(g.args, v))
        if isinstance(g, S.Inc):
            return all(any(pattern(g.left, w) == pattern(g.right, v) for v in X) for w in X)
        if isinstance(g, S.Ind):
            return all(any(pattern(g.left, u) == pattern(g.left, w)
                           and pattern(g.right, u) == pattern(g.right, v) for u in X)
                       for w in X for v in X)
        raise TypeError(f"not a formula: {g!r}")

    return sat(f, frozenset(TM.team))


def _subsets(items):
    for r in range(len(items) + 1):
        for combo in itertools.combinations(items, r):
            yield frozenset(combo)


def team_property(f: S.Formula, M: KripkeModel) -> np.ndarray:
    """Truth of ``f`` on every team of ``M`` at once, indexed by team mask
    (bit ``i`` = ``M.worlds[i]``)."""
    return M.space().property(f)


# --------------------------------------------------------------------------
# constructions

def disjoint_union(M1: KripkeModel, M2: KripkeModel, tags=("1", "2")) -> KripkeModel:
    """Tagged disjoint union; world ``w`` of ``Mi`` becomes ``f"{tag_i}:{w}"``."""
    a, b = tags

    def ren(tag, w):
        return f"{tag}:{w}"

    worlds = [ren(a, w) for w in M1.worlds] + [ren(b, w) for w in M2.worlds]
    edges = [(ren(a, x), ren(a, y)) for x, y in M1.edges]
    edges += [(ren(b, x), ren(b, y)) for x, y in M2.edges]
    labels = {ren(a, w): l for w, l in M1.labels.items()}
    labels.update({ren(b, w): l for w, l in M2.labels.items()})
    return KripkeModel(worlds, edges, labels)


# --------------------------------------------------------------------------
# JSON model files

def parse_model(text: str):
    """Parse the JSON model format; returns ``(model, team_or_None)``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid model JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(data, dict) or "worlds" not in data:
        raise ParseError("model JSON needs a 'worlds' list")
    extra = sorted(set(data) - {"worlds", "edges", "val", "team"})
    if extra:
        raise ParseError(f"unknown model keys: {', '.join(extra)} "
                         "(expected worlds, edges, val, team)")
    try:
        M = KripkeModel([str(w) for w in data["worlds"]],
                        [tuple(map(str, e)) for e in data.get("edges", [])],
                        {str(w): list(v) for w, v in data.get("val", {}).items()})
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed model: {exc}") from None
    team = data.get("team")
    return M, (None if team is None else frozenset(map(str, team)))


def format_model(M: KripkeModel, team=None) -> str:
    data = {
        "worlds": list(M.worlds),
        "edges": sorted([list(e) for e in M.edges],
                        key=lambda e: (M.index(e[0]), M.index(e[1]))),
        "val": {w: sorted(M.labels[w]) for w in M.worlds},
    }
    if team is not None:
        data["team"] = sorted(team, key=M.index)
    return json.dumps(data)


# --------------------------------------------------------------------------
# exhaustive model grids

def _encode(n, edges, labels, perm):
    inv = [0] * n
    for i, p in enumerate(perm):
        inv[p] = i
    e = 0
    for a, b in edges:
        e |= 1 << (perm[a] * n + perm[b])
    return (e, tuple(labels[inv[i]] for i in range(n)))


@lru_cache(maxsize=None)
def _canonical_models(n, nprops, up_to_iso):
    pairs = [(a, b) for a in range(n) for b in range(n)]
    perms = list(itertools.permutations(range(n)))
    out = []
    for emask in range(1 << (n * n)):
        edges = [pairs[i] for i in range(n * n) if emask >> i & 1]
        for labels in itertools.product(range(1 << nprops), repeat=n):
            if up_to_iso:
                ident = _encode(n, edges, labels, perms[0])
                if any(_encode(n, edges, labels, p) < ident for p in perms[1:]):
                    continue
            out.append((tuple(edges), labels))
    return tuple(out)


def enumerate_models(n_worlds, props, up_to_iso=True, max_models=None):
    """Every Kripke model with ``n_worlds`` worlds ``w0..`` labelled over
    ``props`` (one representative per isomorphism class by default), in a
    fixed deterministic order."""
    props = tuple(sorted(props))
    cap = limits().max_grid_models if max_models is None else max_models
    total = (1 << (n_worlds * n_worlds)) * (1 << (len(props) * n_worlds))
    if total > cap:
        raise ResourceGuardError("labelled models", total, cap, "TL_MAX_GRID")
    worlds = [f"w{i}" for i in range(n_worlds)]
    for edges, labels in _canonical_models(n_worlds, len(props), up_to_iso):
        yield KripkeModel(
            worlds,
            [(worlds[a], worlds[b]) for a, b in edges],
            {worlds[i]: {p for j, p in enumerate(props) if labels[i] >> j & 1}
             for i in range(n_worlds)})


def team_models(max_worlds, props, up_to_iso=True, min_worlds=1):
    """All ``(model, team)`` pairs up to ``max_worlds`` worlds, every team."""
    for n in range(min_worlds, max_worlds + 1):
        for M in enumerate_models(n, props, up_to_iso):
            for mask in range(1 << n):
                yield TeamModel(M, M.team_of(mask))
