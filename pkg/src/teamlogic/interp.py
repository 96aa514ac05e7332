"""Bisimulation-quantifier elimination and uniform interpolation for modal
team logic, with independent checks of interpolant claims.

The exact engine rests on two facts. A formula of modal depth ``k`` over
``P`` cannot distinguish team models whose teams realise the same set of
``k``-types over ``P``, and every set of ``k``-types is realised by a team of
roots in the universal model ``U_k``. Evaluating ``f`` once on ``U_k``
therefore yields every type family it accepts; forgetting ``p`` projects each
family onto ``P - {p}`` and re-emits it as a split of characteristic
formulas.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import syntax as S
from .bisim import team_bisimilar
from .charform import (TypeTree, char_formula, count_types, project_type, realize,
                       type_of, type_set_formula, universal_model)
from .config import limits
from .errors import ResourceGuardError, SemanticError
from .kripke import (KripkeModel, TeamModel, enumerate_models,
                     eval_team_modal, format_model, team_property, truth_set)
from .prop import _candidates, entails_prop, format_team

__all__ = [
    "InterpReport", "TypeSpace", "bisim_quantifier_ml", "bisim_quantifier_team",
    "eliminate_quantifiers", "uniform_interpolant_modal", "bounded_entails_modal",
    "entails_exact", "equivalent_exact", "check_interpolant", "graft_witness",
    "exists_witness", "verify_witness", "simplest_equivalent_modal",
]


@dataclass
class InterpReport:
    input: str
    kept: list
    result: str
    mode: str
    checks: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["verdict"] != "fail" for c in self.checks)

    def to_dict(self) -> dict:
        return {"input": self.input, "kept": list(self.kept), "result": self.result,
                "mode": self.mode, "checks": list(self.checks), "stats": dict(self.stats)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# --------------------------------------------------------------------------
# exact evaluation over type families

class TypeSpace:
    """All ``k``-types over ``P`` realised as roots of ``U_k``.

    ``satisfying(f)`` gives, for every subset index ``s`` of the type list,
    whether the team of the corresponding roots satisfies ``f``.
    """

    def __init__(self, P, k: int, cap=None):
        self.props = tuple(sorted(P))
        self.k = k
        cap = limits().exact_type_cap if cap is None else cap
        total = count_types(len(self.props), k)
        if total > cap:
            raise ResourceGuardError(f"T_{k} over {len(self.props)} props", total, cap,
                                     "TL_EXACT_TYPE_CAP")
        self.model, roots = universal_model(self.props, k)
        self.types = sorted(roots)
        bits = np.array([1 << self.model.index(roots[t]) for t in self.types], dtype=np.int64)
        idx = np.arange(1 << len(self.types), dtype=np.int64)
        masks = np.zeros_like(idx)
        for j, b in enumerate(bits):
            masks |= np.where((idx >> j) & 1 == 1, b, 0)
        self.subset_masks = masks

    def __len__(self):
        return len(self.types)

    def _check(self, f):
        extra = S.language_of(f) - set(self.props)
        if extra:
            raise SemanticError(f"{sorted(extra)} outside the type space's propositions")
        if S.modal_depth(f) > self.k:
            raise SemanticError(f"modal depth {S.modal_depth(f)} exceeds {self.k}")

    def satisfying(self, f: S.Formula) -> np.ndarray:
        self._check(f)
        return team_property(f, self.model)[self.subset_masks]

    def family(self, s: int) -> tuple:
        return tuple(t for j, t in enumerate(self.types) if s >> j & 1)

    def team_model(self, s: int) -> TeamModel:
        """Small team model realising family ``s``: one tree per type."""
        M = KripkeModel([])
        team = []
        for j, t in enumerate(self.family(s)):
            R, root = realize(t)
            M = _tagged_union(M, R, f"t{j}")
            team.append(f"t{j}:{root}")
        return TeamModel(M, team)


def _tagged_union(M, R, tag):
    worlds = list(M.worlds) + [f"{tag}:{w}" for w in R.worlds]
    edges = list(M.edges) + [(f"{tag}:{a}", f"{tag}:{b}") for a, b in R.edges]
    labels = dict(M.labels)
    labels.update({f"{tag}:{w}": l for w, l in R.labels.items()})
    return KripkeModel(worlds, edges, labels)


def _exact_ok(props, k) -> bool:
    return count_types(len(props), k) <= limits().exact_type_cap


def entails_exact(f, g, props=None, k=None):
    """Exact ``f |= g`` for formulas of depth at most ``k`` over ``props``;
    ``(holds, counterexample team model)``."""
    props = (S.language_of(f) | S.language_of(g)) if props is None else frozenset(props)
    k = max(S.modal_depth(f), S.modal_depth(g)) if k is None else k
    ts = TypeSpace(props, k)
    bad = np.flatnonzero(ts.satisfying(f) & ~ts.satisfying(g))
    if bad.size:
        return False, ts.team_model(int(bad[0]))
    return True, None


def equivalent_exact(f, g, props=None, k=None) -> bool:
    props = (S.language_of(f) | S.language_of(g)) if props is None else frozenset(props)
    k = max(S.modal_depth(f), S.modal_depth(g)) if k is None else k
    ts = TypeSpace(props, k)
    return bool(np.array_equal(ts.satisfying(f), ts.satisfying(g)))


# --------------------------------------------------------------------------
# bounded entailment

def bounded_entails_modal(f, g, max_worlds: int = 3, props=None):
    """Search every team model with at most ``max_worlds`` worlds, labelled
    over the joint language, for a team satisfying ``f`` but not ``g``.

    Returns ``(holds, counterexample)``; ``holds`` only means that no
    counterexample exists within the bound. The counterexample is the first
    one in (size, model, team-mask) order.
    """
    for h in (f, g):
        if any(isinstance(n, S.Exists) for n in S.walk(h)):
            raise SemanticError("eliminate bisimulation quantifiers first")
    props = (S.language_of(f) | S.language_of(g)) if props is None else frozenset(props)
    for n in range(1, max_worlds + 1):
        for M in enumerate_models(n, props):
            bad = np.flatnonzero(team_property(f, M) & ~team_property(g, M))
            if bad.size:
                return False, TeamModel(M, M.team_of(int(bad[0])))
    return True, None


# --------------------------------------------------------------------------
# bisimulation quantifiers

def bisim_quantifier_ml(a: S.Formula, p: str, k=None) -> S.Formula:
    """Classical formula equivalent (pointed and team semantics) to
    ``E p. a`` for classical ``a``.

    The types of depth ``k`` accepted by ``a`` are found on ``U_k``; each is
    projected away from ``p`` and the distinct characteristic formulas are
    joined by split, which is ordinary disjunction on classical formulas.
    """
    if not S.is_classical(a):
        raise SemanticError(f"not a classical formula: {S.render(a)}")
    L = S.language_of(a)
    if p not in L:
        return a
    k = S.modal_depth(a) if k is None else k
    U, roots = universal_model(L, k)
    true_at = truth_set(a, U)
    keep = L - {p}
    kept = {}
    for t in sorted(roots):
        if roots[t] in true_at:
            q = project_type(t, keep)
            kept.setdefault(q.key, q)
    return S.split_join([char_formula(kept[key]) for key in sorted(kept)])


def _families_exact(f, L, k):
    ts = TypeSpace(L, k)
    sat = ts.satisfying(f)
    return [ts.family(int(s)) for s in np.flatnonzero(sat)], {"types": len(ts)}


def _families_bounded(f, L, k, max_worlds):
    seen = {}
    models = 0
    for n in range(1, max_worlds + 1):
        for M in enumerate_models(n, L):
            models += 1
            prop = team_property(f, M)
            types = [type_of(M, w, L, k) for w in M.worlds]
            for mask in np.flatnonzero(prop):
                fam = {types[i] for i in range(n) if int(mask) >> i & 1}
                seen.setdefault(tuple(sorted(t.key for t in fam)), tuple(sorted(fam)))
    return [seen[key] for key in sorted(seen)], {"grid_models": models, "max_worlds": max_worlds}


def _emit(families, keep):
    projected = {}
    for fam in families:
        proj = {}
        for t in fam:
            q = project_type(t, keep)
            proj[q.key] = q
        projected.setdefault(tuple(sorted(proj)), [proj[key] for key in sorted(proj)])
    return S.or_join([type_set_formula(projected[key]) for key in sorted(projected)])


def _entailment_check(f, g, max_worlds, clause="premise"):
    """One verification entry for ``f |= g`` using the strongest available
    route: propositional enumeration, exact type families, or the bounded
    model grid."""
    L = S.language_of(f) | S.language_of(g)
    k = max(S.modal_depth(f), S.modal_depth(g))
    if S.is_modal_free(f) and S.is_modal_free(g) and len(L) <= limits().max_props:
        ok, wit = entails_prop(f, g)
        entry = {"clause": clause, "verdict": "pass" if ok else "fail",
                 "bound": f"exact: all teams over {sorted(L)}"}
        if wit is not None:
            entry["witness"] = format_team(wit)
        return entry
    if _exact_ok(L, k):
        ok, wit = entails_exact(f, g, L, k)
        bound = f"exact: all families of {k}-types over {sorted(L)}"
    else:
        ok, wit = bounded_entails_modal(f, g, max_worlds, L)
        bound = f"team models with <= {max_worlds} worlds over {sorted(L)}"
    entry = {"clause": clause, "verdict": "pass" if ok else "fail", "bound": bound}
    if wit is not None:
        entry["witness"] = format_model(wit.model, wit.team)
    return entry


def bisim_quantifier_team(f: S.Formula, p: str, mode: str = "exact", max_worlds: int = 2):
    """Formula equivalent to ``E p. f`` under team semantics, with a report.

    ``exact`` mode needs ``T_k`` (for ``k = md(f)`` over the language of
    ``f``) within the exact type cap. ``bounded`` mode ranges only over
    type families realised by team models with at most ``max_worlds``
    worlds: a candidate that may be too strong, so the report re-checks
    ``f |= result``.
    """
    if mode not in ("exact", "bounded"):
        raise SemanticError(f"unknown mode {mode!r}")
    f = eliminate_quantifiers(f, mode, max_worlds)
    L = S.language_of(f)
    if p not in L:
        rep = InterpReport(S.render(f), sorted(L), S.render(f), "exact",
                           stats={"note": f"{p} does not occur"})
        return f, rep
    k = S.modal_depth(f)
    if mode == "exact":
        if not _exact_ok(L, k):
            T = count_types(len(L), k)
            raise ResourceGuardError(
                f"T_{k} over {len(L)} props", T, limits().exact_type_cap,
                "TL_EXACT_TYPE_CAP", hint="or use bounded mode")
        families, stats = _families_exact(f, L, k)
    else:
        families, stats = _families_bounded(f, L, k, max_worlds)
    keep = L - {p}
    theta = _emit(families, keep)
    stats.update(families=len(families), k=k, size=S.size(theta))
    rep = InterpReport(S.render(f), sorted(keep), S.render(theta), mode, stats=stats)
    if mode == "bounded":
        rep.checks.append(_entailment_check(f, theta, max_worlds))
    return theta, rep


def eliminate_quantifiers(f: S.Formula, mode: str = "exact", max_worlds: int = 2) -> S.Formula:
    """Replace every ``E p.`` subformula, innermost first."""

    def go(g):
        if isinstance(g, S.Exists):
            body = go(g.body)
            if S.is_classical(body):
                return bisim_quantifier_ml(body, g.var)
            return bisim_quantifier_team(body, g.var, mode, max_worlds)[0]
        if isinstance(g, (S.And, S.Split, S.NESplit, S.Or)):
            return type(g)(go(g.left), go(g.right))
        if isinstance(g, (S.Dia, S.Box)):
            return type(g)(go(g.body))
        return g

    if not any(isinstance(n, S.Exists) for n in S.walk(f)):
        return f
    return go(f)


# --------------------------------------------------------------------------
# uniform interpolation

def _modal_catalogue(props, k):
    yield from _candidates(props)
    if k < 1:
        return
    lits = [S.TOP, S.BOT] + [c(p) for p in props for c in (S.Prop, S.NegProp)]
    modal = [m(a) for a in lits for m in (S.Dia, S.Box)]
    yield from modal
    for a in modal:
        yield S.And(a, S.NE)
    for a, b in itertools.combinations(modal, 2):
        yield S.And(a, b)
        yield S.Or(a, b)
    for a in modal:
        for b in lits[2:]:
            yield S.And(b, a)


def simplest_equivalent_modal(theta: S.Formula, props=None, k=None):
    """First catalogue formula provably equivalent to ``theta`` (exact check
    over type families); ``None`` when none matches or the check is out of
    reach."""
    props = tuple(sorted(S.language_of(theta) if props is None else props))
    k = S.modal_depth(theta) if k is None else k
    if len(props) > 3 or not _exact_ok(props, k):
        return None
    ts = TypeSpace(props, k)
    target = ts.satisfying(theta)
    for c in _modal_catalogue(props, k):
        if S.modal_depth(c) <= k and np.array_equal(ts.satisfying(c), target):
            return c
    return None


def uniform_interpolant_modal(f: S.Formula, Q, mode: str = "exact", max_worlds: int = 2,
                              consequences=None, check_worlds: int = 3):
    """Forget the propositions of ``f`` outside ``Q`` one at a time, in
    lexicographic order, and check the interpolant clauses.

    ``consequences`` are the formulas for the third clause; by default a
    small built-in catalogue over ``Q``.
    """
    f = eliminate_quantifiers(f, mode, max_worlds)
    Q = frozenset(Q)
    L = S.language_of(f)
    if not Q <= L:
        raise SemanticError(f"{sorted(Q - L)} not in the language of the formula")
    theta = f
    steps = []
    modes = []
    for p in sorted(L - Q):
        theta, step = bisim_quantifier_team(theta, p, mode, max_worlds)
        modes.append(step.mode)
        steps.append({"forget": p, **step.stats})
    overall = "bounded" if "bounded" in modes else "exact"
    if consequences is None:
        k = S.modal_depth(f)
        consequences = [c for c in _modal_catalogue(tuple(sorted(Q)), min(k, 1))
                        if S.modal_depth(c) <= k]
    rep = check_interpolant(f, theta, Q, consequences, check_worlds)
    rep.mode = overall
    rep.stats = {"steps": steps, "size": S.size(theta)}
    return theta, rep


def check_interpolant(f, theta, Q, consequences=(), max_worlds: int = 3) -> InterpReport:
    """Verdicts for: language of ``theta`` within ``Q``; ``f |= theta``; and
    ``theta |= psi`` for each supplied consequence ``psi`` of ``f`` whose
    shared language with ``f`` lies in ``Q``. Consequences that do not meet
    that precondition are reported as ``skipped``."""
    Q = frozenset(Q)
    checks = []
    extra = S.language_of(theta) - Q
    lang = {"clause": "language", "verdict": "fail" if extra else "pass",
            "bound": "syntactic"}
    if extra:
        lang["witness"] = f"outside Q: {sorted(extra)}"
    checks.append(lang)
    checks.append(_entailment_check(f, theta, max_worlds, "premise"))
    for psi in consequences:
        name = f"consequence: {S.render(psi)}"
        if not (S.language_of(f) & S.language_of(psi)) <= Q:
            checks.append({"clause": name, "verdict": "skipped",
                           "bound": "shared language not within Q"})
            continue
        pre = _entailment_check(f, psi, max_worlds, name)
        if pre["verdict"] == "fail":
            checks.append({"clause": name, "verdict": "skipped",
                           "bound": "not a consequence: " + pre["bound"]})
            continue
        checks.append(_entailment_check(theta, psi, max_worlds, name))
    return InterpReport(S.render(f), sorted(Q), S.render(theta), "exact", checks)


# --------------------------------------------------------------------------
# witnesses for the quantifier clause

def graft_witness(M: KripkeModel, X, family, p: str, P, k: int) -> TeamModel:
    """Team model bisimilar to ``(M, X)`` over ``P - {p}`` whose team realises
    exactly the ``k``-types (over ``P``) in ``family``.

    Worlds of ``X`` are unravelled to depth ``k`` with ``p`` relabelled along
    the way; below depth ``k`` the copies point back into an untouched copy
    of ``M``. Requires the projections of ``family`` to be exactly the
    ``(P - {p})``-types of the worlds of ``X``.
    """
    P = frozenset(P)
    keep = P - {p}
    X = sorted(X, key=M.index)
    family = sorted(set(family))
    low = {j: {w: type_of(M, w, keep, j) for w in M.worlds} for j in range(k + 1)}
    proj = {t.key: project_type(t, keep) for t in family}
    worlds = [f"m:{w}" for w in M.worlds]
    edges = [(f"m:{a}", f"m:{b}") for a, b in M.edges]
    labels = {f"m:{w}": M.labels[w] for w in M.worlds}
    memo = {}

    def build(v, u: TypeTree):
        key = (v, u.key)
        if key in memo:
            return memo[key]
        name = f"x{len(memo)}"
        memo[key] = name
        worlds.append(name)
        labels[name] = (M.labels[v] - {p}) | ({p} if p in u.label else set())
        succ = M.successors(v)
        if u.depth == 0:
            edges.extend((name, f"m:{w}") for w in succ)
            return name
        used = set()
        for v2 in succ:
            c = next(c for c in u.children
                     if project_type(c, keep) == low[u.depth - 1][v2])
            used.add(c.key)
            edges.append((name, build(v2, c)))
        for c in u.children:
            if c.key not in used:
                v2 = next(v2 for v2 in succ if low[u.depth - 1][v2] == project_type(c, keep))
                edges.append((name, build(v2, c)))
        return name

    team = []
    used = set()
    for x in X:
        t = next((t for t in family if proj[t.key] == low[k][x]), None)
        if t is None:
            raise SemanticError(f"world {x!r} matches no type of the family")
        used.add(t.key)
        team.append(build(x, t))
    for t in family:
        if t.key not in used:
            x = next((x for x in X if low[k][x] == proj[t.key]), None)
            if x is None:
                raise SemanticError("a type of the family matches no world of the team")
            team.append(build(x, t))
    return TeamModel(KripkeModel(worlds, edges, labels), team)


def exists_witness(f: S.Formula, p: str, TM: TeamModel, families=None):
    """A team model ``(N, Y)``, bisimilar to ``TM`` over the language of ``f``
    without ``p``, that satisfies ``f``; ``None`` if no type family accepted
    by ``f`` projects onto the team's types (then ``E p. f`` fails at
    ``TM``). ``families`` may pass precomputed accepted families."""
    L = S.language_of(f) | {p}
    k = S.modal_depth(f)
    if families is None:
        families = _families_exact(f, L, k)[0]
    keep = L - {p}
    M = TM.model
    need = {type_of(M, x, keep, k).key for x in TM.team}
    for fam in families:
        if {project_type(t, keep).key for t in fam} == need:
            return graft_witness(M, TM.team, fam, p, L, k)
    return None


def verify_witness(f, p, TM, W: TeamModel) -> bool:
    """Independent check of a witness: full team bisimilarity over the
    language without ``p`` and direct evaluation of ``f``."""
    keep = S.language_of(f) - {p}
    ok, _ = team_bisimilar(W, TM, keep)
    return ok and eval_team_modal(f, W)
