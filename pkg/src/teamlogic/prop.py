"""Propositional team semantics.

Teams carry an explicit proposition domain. Inside a domain ``D`` (sorted),
valuation ``i`` sets ``D[j]`` to bit ``j`` of ``i``; a team over ``D`` is then
identified with a mask over the ``2**|D|`` valuations, which is how
:class:`TeamProperty` stores its members.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import syntax as S
from .config import limits
from .errors import ParseError, ResourceGuardError, SemanticError
from .teamspace import PointSpace, image_masks

__all__ = [
    "Valuation", "Team", "TeamProperty", "ClosureReport", "eval_prop",
    "models_of", "closure_report", "project_team", "uniform_interpolant_prop",
    "synthesize_fptl", "entails_prop", "parse_team", "format_team",
    "parse_property", "format_property", "simplest_equivalent",
]


def _domain(props) -> tuple:
    return tuple(sorted(set(props)))


@dataclass(frozen=True, order=True)
class Valuation:
    domain: tuple
    bits: tuple

    @classmethod
    def of(cls, assignment: dict) -> "Valuation":
        dom = _domain(assignment)
        return cls(dom, tuple(int(bool(assignment[p])) for p in dom))

    @classmethod
    def from_index(cls, domain, index: int) -> "Valuation":
        return cls(tuple(domain), tuple(index >> j & 1 for j in range(len(domain))))

    @property
    def index(self) -> int:
        return sum(b << j for j, b in enumerate(self.bits))

    def __getitem__(self, p):
        try:
            return self.bits[self.domain.index(p)]
        except ValueError:
            raise KeyError(p) from None

    def as_dict(self) -> dict:
        return dict(zip(self.domain, self.bits))

    def restrict(self, props) -> "Valuation":
        return Valuation.of({p: v for p, v in self.as_dict().items() if p in props})

    def with_value(self, p, value) -> "Valuation":
        d = self.as_dict()
        d[p] = int(bool(value))
        return Valuation.of(d)


@dataclass(frozen=True)
class Team:
    domain: tuple
    members: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "domain", _domain(self.domain))
        object.__setattr__(self, "members", frozenset(self.members))
        for s in self.members:
            if s.domain != self.domain:
                raise SemanticError(f"valuation over {s.domain} in a team over {self.domain}")

    @classmethod
    def of(cls, domain, rows: Iterable[dict]) -> "Team":
        return cls(domain, frozenset(Valuation.of(r) for r in rows))

    @classmethod
    def from_mask(cls, domain, mask: int) -> "Team":
        domain = _domain(domain)
        n = 1 << len(domain)
        return cls(domain, frozenset(Valuation.from_index(domain, i)
                                     for i in range(n) if mask >> i & 1))

    @property
    def mask(self) -> int:
        m = 0
        for s in self.members:
            m |= 1 << s.index
        return m

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members, key=lambda s: s.index))

    def substitute(self, p, value) -> "Team":
        """``X[p|top]`` / ``X[p|bot]``."""
        if p not in self.domain:
            raise SemanticError(f"{p} not in team domain")
        return Team(self.domain, frozenset(s.with_value(p, value) for s in self.members))

    def __str__(self):
        return format_team(self)


class TeamProperty:
    """Extensional set of teams over a fixed domain."""

    def __init__(self, domain, table):
        self.domain = _domain(domain)
        table = np.asarray(table, dtype=bool)
        if table.shape != (1 << (1 << len(self.domain)),):
            raise SemanticError("property table has the wrong size for its domain")
        self.table = table

    @classmethod
    def from_teams(cls, domain, teams: Iterable[Team]) -> "TeamProperty":
        domain = _domain(domain)
        table = np.zeros(1 << (1 << len(domain)), dtype=bool)
        for t in teams:
            if t.domain != domain:
                raise SemanticError(f"team over {t.domain} in a property over {domain}")
            table[t.mask] = True
        return cls(domain, table)

    @property
    def masks(self) -> list:
        return [int(m) for m in np.flatnonzero(self.table)]

    @property
    def teams(self) -> list:
        return [Team.from_mask(self.domain, m) for m in self.masks]

    def __contains__(self, team: Team) -> bool:
        return team.domain == self.domain and bool(self.table[team.mask])

    def __len__(self):
        return int(self.table.sum())

    def __eq__(self, other):
        return (isinstance(other, TeamProperty) and self.domain == other.domain
                and np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.domain, self.table.tobytes()))

    def __repr__(self):
        return f"TeamProperty({self.domain}, {len(self)} teams)"


# --------------------------------------------------------------------------
# direct evaluation

def _check_prop_formula(f):
    for node in S.walk(f):
        if isinstance(node, (S.Dia, S.Box)):
            raise SemanticError("modal operator in a propositional formula")
        if isinstance(node, S.Exists):
            raise SemanticError("bisimulation quantifier in a propositional formula")


def eval_prop(f: S.Formula, X: Team) -> bool:
    """Decide ``X |= f`` clause by clause.

    The splits search covers of ``X``: every member goes left, right or to
    both parts. Results are memoised per (subformula, subteam), so each
    subformula is decided at most once per subset of ``X``.
    """
    _check_prop_formula(f)
    missing = S.language_of(f) - set(X.domain)
    if missing:
        raise SemanticError(f"team domain lacks {sorted(missing)}")
    members = list(X)
    rows = [s.as_dict() for s in members]
    full = (1 << len(members)) - 1
    memo = {}
    cmemo = {}

    def value(a, i):
        key = (id(a), i)
        if key not in cmemo:
            cmemo[key] = _classical(a, rows[i])
        return cmemo[key]

    def pattern(args, i):
        return tuple(value(a, i) for a in args)

    def sat(g, team):
        key = (id(g), team)
        hit = memo.get(key)
        if hit is None:
            hit = memo[key] = clause(g, team)
        return hit

    def elems(team):
        return [i for i in range(len(members)) if team >> i & 1]

    def clause(g, team):
        idx = elems(team)
        if isinstance(g, S.Prop):
            return all(rows[i][g.name] == 1 for i in idx)
        if isinstance(g, S.NegProp):
            return all(rows[i][g.name] == 0 for i in idx)
        if isinstance(g, S.Bottom):
            return team == 0
        if isinstance(g, S.Top):
            return True
        if isinstance(g, S.NonEmpty):
            return team != 0
        if isinstance(g, S.And):
            return sat(g.left, team) and sat(g.right, team)
        if isinstance(g, S.Or):
            return sat(g.left, team) or sat(g.right, team)
        if isinstance(g, (S.Split, S.NESplit)):
            nonempty = isinstance(g, S.NESplit)
            if nonempty and team == 0:
                return True
            for left in _submasks(team):
                if nonempty and left == 0:
                    continue
                if not sat(g.left, left):
                    continue
                # members not sent left must go right; left members may too
                rest = team & ~left
                for extra in _submasks(left):
                    right = rest | extra
                    if nonempty and right == 0:
                        continue
                    if sat(g.right, right):
                        return True
            return False
        if isinstance(g, S.Dep):
            return all(value(g.target, i) == value(g.target, j)
                       for i in idx for j in idx
                       if pattern(g.args, i) == pattern(g.args, j))
        if isinstance(g, S.Inc):
            return all(any(pattern(g.left, i) == pattern(g.right, j) for j in idx)
                       for i in idx)
        if isinstance(g, S.Ind):
            return all(any(pattern(g.left, k) == pattern(g.left, i)
                           and pattern(g.right, k) == pattern(g.right, j) for k in idx)
                       for i in idx for j in idx)
        raise TypeError(f"not a formula: {g!r}")

    return sat(f, full)


def _submasks(mask):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _classical(a, row) -> int:
    """Single-valuation truth of a classical propositional formula."""
    if isinstance(a, S.Prop):
        return row[a.name]
    if isinstance(a, S.NegProp):
        return 1 - row[a.name]
    if isinstance(a, S.Bottom):
        return 0
    if isinstance(a, S.Top):
        return 1
    if isinstance(a, S.And):
        return _classical(a.left, row) & _classical(a.right, row)
    if isinstance(a, S.Split):
        return _classical(a.left, row) | _classical(a.right, row)
    raise SemanticError(f"not a classical propositional formula: {S.render(a)}")


# --------------------------------------------------------------------------
# whole properties

def _guard_props(props, cap=None):
    cap = limits().max_props if cap is None else cap
    if len(props) > cap:
        raise ResourceGuardError("propositions", len(props), cap, "TL_MAX_PROPS")


def valuation_space(domain) -> PointSpace:
    domain = _domain(domain)
    labels = [{p for j, p in enumerate(domain) if i >> j & 1}
              for i in range(1 << len(domain))]
    return PointSpace(labels)


def models_of(f: S.Formula, props=None, cap=None) -> TeamProperty:
    """``||f||`` over ``props`` (default: the language of ``f``)."""
    _check_prop_formula(f)
    props = _domain(S.language_of(f) if props is None else props)
    missing = S.language_of(f) - set(props)
    if missing:
        raise SemanticError(f"domain lacks {sorted(missing)}")
    _guard_props(props, cap)
    return TeamProperty(props, valuation_space(props).property(f))


@dataclass(frozen=True)
class ClosureReport:
    downward: bool
    union: bool
    empty_team: bool
    local: bool
    witnesses: dict

    def as_dict(self) -> dict:
        out = {}
        for name in ("downward", "union", "empty_team", "local"):
            entry = {"holds": getattr(self, name)}
            if name in self.witnesses:
                entry["witness"] = [format_team(t) for t in self.witnesses[name]]
            out[name] = entry
        return out


def _downward_witness(table):
    n_teams = table.shape[0]
    n = n_teams.bit_length() - 1
    teams = np.arange(n_teams, dtype=np.int64)
    best = None
    for j in range(n):
        bit = np.int64(1 << j)
        bad = table & ((teams & bit) != 0) & ~table[teams ^ bit]
        hits = np.flatnonzero(bad)
        if hits.size and (best is None or hits[0] < best):
            best = int(hits[0])
    if best is None:
        return None
    y = min(s for s in _submasks(best) if not table[s])
    return best, y


def _union_witness(table):
    """F is union closed iff for every X the union of the members below X is
    again a member (whenever some member lies below X)."""
    n_teams = table.shape[0]
    n = n_teams.bit_length() - 1
    teams = np.arange(n_teams, dtype=np.int64)
    acc = np.where(table, teams, 0)
    has = table.copy()
    for j in range(n):
        va = acc.reshape(-1, 2, 1 << j)
        va[:, 1, :] |= va[:, 0, :]
        vh = has.reshape(-1, 2, 1 << j)
        vh[:, 1, :] |= vh[:, 0, :]
    bad = has & ~table[acc]
    hits = np.flatnonzero(bad)
    if not hits.size:
        return None
    x = int(hits[0])
    below = [m for m in range(x + 1) if table[m] and m & ~x == 0]
    cur = below[0]
    for m in below[1:]:
        if not table[cur | m]:
            return cur, m
        cur |= m
    raise AssertionError("union witness search failed")


def closure_report(f: S.Formula, props=None, cap=None) -> ClosureReport:
    """Decide downward/union closure, the empty-team property and locality of
    ``||f||`` over ``props`` by brute force; failures carry witness teams."""
    prop = models_of(f, props, cap)
    table, dom = prop.table, prop.domain
    wit = {}
    down = _downward_witness(table)
    if down:
        wit["downward"] = tuple(Team.from_mask(dom, m) for m in down)
    union = _union_witness(table)
    if union:
        wit["union"] = tuple(Team.from_mask(dom, m) for m in union)
    empty = bool(table[0])
    if not empty:
        wit["empty_team"] = (Team(dom),)
    loc = _locality_witness(table, dom, S.language_of(f))
    if loc:
        wit["local"] = tuple(Team.from_mask(dom, m) for m in loc)
    return ClosureReport(down is None, union is None, empty, loc is None, wit)


def _projection_indices(domain, keep):
    keep = _domain(keep)
    pos = [domain.index(p) for p in keep]
    return [sum((i >> j & 1) << k for k, j in enumerate(pos))
            for i in range(1 << len(domain))], keep


def _project_table_masks(domain, keep):
    """For every team over ``domain`` the mask of its projection to ``keep``."""
    idx, keep = _projection_indices(domain, keep)
    return image_masks(len(idx), [1 << i for i in idx]), keep


def _locality_witness(table, domain, lang):
    if set(lang) >= set(domain):
        return None
    proj, _ = _project_table_masks(domain, lang)
    order = np.argsort(proj, kind="stable")
    classes = proj[order]
    vals = table[order]
    starts = np.flatnonzero(np.r_[True, classes[1:] != classes[:-1]])
    for a, b in zip(starts, list(starts[1:]) + [len(order)]):
        seg = vals[a:b]
        if seg.any() and not seg.all():
            members = order[a:b]
            x = int(min(members[seg]))
            y = int(min(members[~seg]))
            return x, y
    return None


def project_team(X: Team, Q) -> Team:
    """``{s restricted to Q : s in X}``."""
    Q = set(Q)
    if not Q <= set(X.domain):
        raise SemanticError(f"{sorted(Q - set(X.domain))} not in team domain")
    return Team(tuple(Q), frozenset(s.restrict(Q) for s in X.members))


def project_property(prop: TeamProperty, Q) -> TeamProperty:
    """``{X restricted to Q : X in prop}``."""
    Q = set(Q)
    if not Q <= set(prop.domain):
        raise SemanticError(f"{sorted(Q - set(prop.domain))} not in domain")
    proj, keep = _project_table_masks(prop.domain, Q)
    table = np.zeros(1 << (1 << len(keep)), dtype=bool)
    table[np.unique(proj[prop.table])] = True
    return TeamProperty(keep, table)


def _literals(domain, index):
    return S.conj([S.Prop(p) if index >> j & 1 else S.NegProp(p)
                   for j, p in enumerate(domain)])


def synthesize_fptl(Y: TeamProperty) -> S.Formula:
    """A formula whose models over ``Y.domain`` are exactly ``Y``.

    Each member team ``X`` is pinned down by the split, over its valuations
    ``s``, of ``(literals of s) & NE``; the empty team by ``bot``. The result
    is the classical disjunction of these, ``bot & NE`` when ``Y`` is empty
    and ``top`` when ``Y`` holds every team.
    """
    if Y.table.all():
        return S.TOP
    disjuncts = []
    for m in Y.masks:
        if m == 0:
            disjuncts.append(S.BOT)
            continue
        parts = [S.And(_literals(Y.domain, i), S.NE)
                 for i in range(1 << len(Y.domain)) if m >> i & 1]
        disjuncts.append(S.split_join(parts))
    return S.or_join(disjuncts)


def uniform_interpolant_prop(f: S.Formula, Q, cap=None) -> S.Formula:
    """Uniform interpolant of ``f`` keeping the propositions ``Q``: the
    formula defining the projections onto ``Q`` of the models of ``f``."""
    Q = set(Q)
    lang = S.language_of(f)
    if not Q <= lang:
        raise SemanticError(f"{sorted(Q - lang)} not in the language of the formula")
    return synthesize_fptl(project_property(models_of(f, lang, cap), Q))


def entails_prop(f: S.Formula, g: S.Formula, cap=None):
    """``(holds, witness)``: whether every team over the joint language
    satisfying ``f`` satisfies ``g``; otherwise the least counterexample."""
    dom = _domain(S.language_of(f) | S.language_of(g))
    F = models_of(f, dom, cap).table
    G = models_of(g, dom, cap).table
    bad = np.flatnonzero(F & ~G)
    if bad.size:
        return False, Team.from_mask(dom, int(bad[0]))
    return True, None


def equivalent_prop(f, g, props=None, cap=None) -> bool:
    dom = _domain((S.language_of(f) | S.language_of(g)) | set(props or ()))
    return models_of(f, dom, cap) == models_of(g, dom, cap)


def _candidates(domain):
    lits = [c(p) for p in domain for c in (S.Prop, S.NegProp)]
    base = [S.TOP, S.BOT, S.NE] + lits
    base += [S.Dep((), S.Prop(p)) for p in domain]
    base += [S.Dep((S.Prop(a),), S.Prop(b)) for a in domain for b in domain if a != b]
    base += [S.Inc((S.Prop(a),), (S.Prop(b),)) for a in domain for b in domain if a != b]
    base += [S.Ind((S.Prop(a),), (S.Prop(b),)) for a, b in itertools.combinations(domain, 2)]
    yield from base
    for a, b in itertools.combinations(base, 2):
        yield S.And(a, b)
    for a, b in itertools.combinations(lits, 2):
        yield S.Split(a, b)
        yield S.Or(a, b)


def simplest_equivalent(prop: TeamProperty):
    """First formula from a small fixed catalogue (constants, literals,
    single team atoms and their pairwise conjunctions) whose models are
    exactly ``prop``; ``None`` when nothing in the catalogue matches."""
    if len(prop.domain) > 3:
        return None
    space = valuation_space(prop.domain)
    for c in _candidates(prop.domain):
        if np.array_equal(space.property(c), prop.table):
            return c
    return None


# --------------------------------------------------------------------------
# text formats

_PAIR_RE = re.compile(r"([a-z][a-z0-9_]*)\s*=\s*([01])")


def parse_team(text: str, domain=None) -> Team:
    """Parse ``{p=1 q=1; p=0 q=1}`` (``{}`` is the empty team)."""
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ParseError(f"team must be enclosed in braces: {text!r}")
    body = body[1:-1].strip()
    rows = []
    if body:
        for chunk in body.split(";"):
            chunk = chunk.strip()
            if not chunk:
                raise ParseError(f"empty valuation in {text!r}")
            leftover = _PAIR_RE.sub("", chunk).strip()
            if leftover:
                raise ParseError(f"cannot parse valuation {chunk!r}")
            row = {}
            for p, v in _PAIR_RE.findall(chunk):
                if p in row:
                    raise ParseError(f"{p} assigned twice in {chunk!r}")
                row[p] = int(v)
            rows.append(row)
    keys = {frozenset(r) for r in rows}
    if len(keys) > 1:
        raise ParseError("valuations of a team must share their propositions")
    found = _domain(next(iter(keys))) if keys else ()
    if domain is not None:
        domain = _domain(domain)
        if rows and found != domain:
            raise ParseError(f"team over {found}, expected {domain}")
        found = domain
    return Team.of(found, rows)


def format_team(X: Team) -> str:
    rows = [" ".join(f"{p}={b}" for p, b in zip(s.domain, s.bits)) for s in X]
    return "{" + "; ".join(rows) + "}"


def parse_property(text: str) -> TeamProperty:
    """TeamProperty file: ``props: p q`` header, then one team per line."""
    domain = None
    teams = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if domain is None:
            if not line.startswith("props:"):
                raise ParseError("missing 'props:' header", lineno, 1)
            domain = _domain(line[len("props:"):].split())
            continue
        try:
            teams.append(parse_team(line, domain))
        except ParseError as exc:
            raise ParseError(str(exc), lineno, 1) from None
    if domain is None:
        raise ParseError("missing 'props:' header")
    return TeamProperty.from_teams(domain, teams)


def format_property(prop: TeamProperty) -> str:
    lines = ["props: " + " ".join(prop.domain)]
    lines += [format_team(t) for t in prop.teams]
    return "\n".join(lines) + "\n"
