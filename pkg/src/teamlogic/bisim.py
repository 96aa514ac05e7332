"""Bounded and maximal bisimulations restricted to a proposition set, team
bisimilarity, and amalgamation of models along a bisimulation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ParseError, SemanticError
from .kripke import KripkeModel, TeamModel

__all__ = [
    "BisimFamily", "Bisimulation", "bounded_bisim", "max_bisim", "bisim_partition",
    "is_bisimulation", "team_bisimilar", "amalgamate", "team_amalgamate",
    "pair_id", "projection", "format_bisim", "parse_bisim",
]


_SPARSE_FROM = 64


def _adjacency(M: KripkeModel):
    """Adjacency matrix; sparse once the model is large enough for it to pay."""
    n = len(M)
    rows = [M.index(a) for a, _ in M.edges]
    cols = [M.index(b) for _, b in M.edges]
    if n >= _SPARSE_FROM:
        return sparse.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)), shape=(n, n))
    A = np.zeros((n, n), dtype=np.int32)
    A[rows, cols] = 1
    return A


def _label_agreement(M, N, P) -> np.ndarray:
    P = frozenset(P)
    lm = [M.labels[w] & P for w in M.worlds]
    ln = [N.labels[w] & P for w in N.worlds]
    return np.array([[a == b for b in ln] for a in lm], dtype=bool).reshape(len(lm), len(ln))


def _refine(B0, B, A, An):
    """One step: keep pairs of ``B0`` whose successors match forth and back
    inside ``B``."""
    Bi = B.astype(np.int32)
    # products are written adjacency-first so sparse adjacencies work too
    # E[u, v'] : some successor u' of v' with B[u, u']
    E = np.asarray(An @ Bi.T).T > 0
    forth = np.asarray(A @ (~E).astype(np.int32)) == 0
    # F[v, u'] : some successor u of v with B[u, u']
    F = np.asarray(A @ Bi) > 0
    back = np.asarray(An @ (~F).astype(np.int32).T).T == 0
    return B0 & forth & back


def _pairs(M, N, mat) -> frozenset:
    rows, cols = np.nonzero(mat)
    return frozenset((M.worlds[i], N.worlds[j]) for i, j in zip(rows, cols))


class BisimFamily:
    """Layers ``B_0 ⊇ B_1 ⊇ ... ⊇ B_k`` of the greatest bounded bisimulation
    family between ``left`` and ``right``."""

    def __init__(self, left, right, props, matrices):
        self.left = left
        self.right = right
        self.props = frozenset(props)
        self.matrices = tuple(matrices)
        self.k = len(self.matrices) - 1

    @property
    def layers(self) -> list:
        return [_pairs(self.left, self.right, m) for m in self.matrices]

    def related(self, w, v, level=None) -> bool:
        level = self.k if level is None else level
        return bool(self.matrices[level][self.left.index(w), self.right.index(v)])


@dataclass(frozen=True)
class Bisimulation:
    pairs: frozenset
    props: frozenset
    rounds: int = 0

    def __contains__(self, pair):
        return pair in self.pairs

    def __len__(self):
        return len(self.pairs)


def bounded_bisim(M: KripkeModel, N: KripkeModel, P, k: int) -> BisimFamily:
    """``(w, v)`` lies in layer ``k`` iff ``(M, w)`` and ``(N, v)`` are
    ``k``-bisimilar over ``P``."""
    if k < 0:
        raise SemanticError("k must be non-negative")
    A, An = _adjacency(M), _adjacency(N)
    B0 = _label_agreement(M, N, P)
    mats = [B0]
    for _ in range(k):
        mats.append(_refine(B0, mats[-1], A, An))
    return BisimFamily(M, N, P, mats)


def _max_matrix(M, N, P):
    A, An = _adjacency(M), _adjacency(N)
    B0 = _label_agreement(M, N, P)
    B, rounds = B0, 0
    while True:
        nxt = _refine(B0, B, A, An)
        if np.array_equal(nxt, B):
            return B, rounds
        B, rounds = nxt, rounds + 1


def max_bisim(M: KripkeModel, N: KripkeModel, P) -> Bisimulation:
    """Greatest ``P``-bisimulation, by refinement to a fixpoint."""
    B, rounds = _max_matrix(M, N, P)
    return Bisimulation(_pairs(M, N, B), frozenset(P), rounds)


def bisim_partition(M: KripkeModel, P, k=None) -> tuple:
    """Class index of every world under ``P``-bisimilarity of ``M`` with
    itself (``k``-bisimilarity when ``k`` is given), by signature refinement.

    Worlds of a disjoint union share a class iff they are bisimilar, so this
    doubles as a canonical invariant for comparing many small models at once.
    """
    P = frozenset(P)
    succ = [[M.index(v) for v in M.successors(w)] for w in M.worlds]
    labels = [tuple(sorted(M.labels[w] & P)) for w in M.worlds]
    ids = {l: i for i, l in enumerate(sorted(set(labels)))}
    cls = [ids[l] for l in labels]
    rounds = 0
    while k is None or rounds < k:
        sigs = [(cls[i], tuple(sorted({cls[j] for j in succ[i]}))) for i in range(len(cls))]
        ids = {s: i for i, s in enumerate(sorted(set(sigs)))}
        nxt = [ids[s] for s in sigs]
        rounds += 1
        if len(ids) == len(set(cls)):
            # stable: further rounds only rename classes
            return tuple(nxt)
        cls = nxt
    return tuple(cls)


def is_bisimulation(M: KripkeModel, N: KripkeModel, pairs, P) -> bool:
    """Independent check of the bisimulation conditions for ``pairs``."""
    P = frozenset(P)
    pairs = frozenset(pairs)
    for v, u in pairs:
        if v not in M.labels or u not in N.labels:
            return False
        if M.labels[v] & P != N.labels[u] & P:
            return False
        for v2 in M.successors(v):
            if not any((v2, u2) in pairs for u2 in N.successors(u)):
                return False
        for u2 in N.successors(u):
            if not any((v2, u2) in pairs for v2 in M.successors(v)):
                return False
    return True


def _relation(M, N, P, k):
    if k is None:
        return _max_matrix(M, N, P)[0]
    return bounded_bisim(M, N, P, k).matrices[-1]


def team_bisimilar(TM: TeamModel, TN: TeamModel, P, k=None, relation=None):
    """``(holds, witness)``.

    On success the witness maps each world of either team to its least
    partner (``{"forth": {...}, "back": {...}}``); on failure it names the
    blocking world (``{"blocking": ("left" | "right", world)}``).
    """
    M, N = TM.model, TN.model
    B = _relation(M, N, P, k) if relation is None else relation
    X = sorted(TM.team, key=M.index)
    Y = sorted(TN.team, key=N.index)
    forth, back = {}, {}
    for x in X:
        partner = next((y for y in Y if B[M.index(x), N.index(y)]), None)
        if partner is None:
            return False, {"blocking": ("left", x)}
        forth[x] = partner
    for y in Y:
        partner = next((x for x in X if B[M.index(x), N.index(y)]), None)
        if partner is None:
            return False, {"blocking": ("right", y)}
        back[y] = partner
    return True, {"forth": forth, "back": back}


# --------------------------------------------------------------------------
# amalgamation

def pair_id(m, n) -> str:
    return f"<{m},{n}>"


def projection(B, side: int) -> frozenset:
    """Projection relation from amalgam worlds to the worlds of side 0 or 1."""
    return frozenset((pair_id(m, n), (m, n)[side]) for m, n in B)


def amalgamate(M: KripkeModel, N: KripkeModel, B, P, Q) -> KripkeModel:
    """Model on the pairs of ``B``: edges componentwise, ``P``-labels from
    ``M`` and ``Q``-labels from ``N``."""
    pairs = frozenset(B.pairs if isinstance(B, Bisimulation) else B)
    P, Q = frozenset(P), frozenset(Q)
    if not pairs:
        raise SemanticError("amalgamation needs a non-empty bisimulation")
    if not is_bisimulation(M, N, pairs, P & Q):
        raise SemanticError("relation is not a bisimulation over the shared propositions")
    order = sorted(pairs, key=lambda e: (M.index(e[0]), N.index(e[1])))
    worlds = [pair_id(m, n) for m, n in order]
    edges = [(pair_id(m, n), pair_id(m2, n2))
             for m, n in order for m2, n2 in order
             if (m, m2) in M.edges and (n, n2) in N.edges]
    labels = {}
    for m, n in order:
        left = M.labels[m] & P
        right = N.labels[n] & Q
        # the bisimulation makes both sides agree on the overlap
        assert left & Q == right & P, (m, n)
        labels[pair_id(m, n)] = left | right
    return KripkeModel(worlds, edges, labels)


def team_amalgamate(TM: TeamModel, TN: TeamModel, P, Q) -> TeamModel:
    """Team model ``(K, Z)`` that is ``P``-bisimilar to ``TM`` and
    ``Q``-bisimilar to ``TN``, with ``Z = (X x Y) ∩ B`` for the maximal
    shared-language bisimulation ``B``."""
    P, Q = frozenset(P), frozenset(Q)
    ok, wit = team_bisimilar(TM, TN, P & Q)
    if not ok:
        side, w = wit["blocking"]
        raise SemanticError(f"team models are not bisimilar over {sorted(P & Q)}: "
                            f"{side} world {w!r} has no partner")
    B = max_bisim(TM.model, TN.model, P & Q)
    if not B.pairs:
        return TeamModel(KripkeModel([]), frozenset())
    K = amalgamate(TM.model, TN.model, B, P, Q)
    Z = frozenset(pair_id(x, y) for x, y in B.pairs if x in TM.team and y in TN.team)
    return TeamModel(K, Z)


# --------------------------------------------------------------------------
# relation dumps

def format_bisim(pairs, props, M=None, N=None) -> str:
    pairs = list(pairs)
    if M is not None and N is not None:
        pairs.sort(key=lambda e: (M.index(e[0]), N.index(e[1])))
    else:
        pairs.sort()
    lines = ["props: " + " ".join(sorted(props))]
    lines += [f"{a} <-> {b}" for a, b in pairs]
    return "\n".join(lines) + "\n"


def parse_bisim(text: str):
    """Parse a relation dump; returns ``(pairs, props)``."""
    props = None
    pairs = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if props is None:
            if not line.startswith("props:"):
                raise ParseError("missing 'props:' header", lineno, 1)
            props = frozenset(line[len("props:"):].split())
            continue
        parts = line.split("<->")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise ParseError(f"expected 'w <-> v', got {line!r}", lineno, 1)
        pairs.add((parts[0].strip(), parts[1].strip()))
    if props is None:
        raise ParseError("missing 'props:' header")
    return frozenset(pairs), props
