"""Vectorised team semantics over a finite point space.

A *point* is either a valuation (propositional teams) or a world of a Kripke
model (modal teams). With ``n`` points, a team is an ``n``-bit mask and a team
property is a boolean array of length ``2**n`` indexed by that mask. Every
connective becomes an array operation; the split is an OR-convolution
computed with zeta/Moebius transforms, so whole properties over 16 points
(65,536 teams) are computed in well under a second.

This is the fast path behind ``models_of`` and the quantifier-elimination
engine. The clause-by-clause evaluators in :mod:`teamlogic.prop` and
:mod:`teamlogic.kripke` serve as its oracles.
"""
from __future__ import annotations

import numpy as np

from . import syntax as S
from .errors import SemanticError


def zeta(a: np.ndarray, n: int) -> np.ndarray:
    """Subset-sum transform: ``out[X] = sum(a[Y] for Y subset of X)``."""
    out = a.astype(np.int64, copy=True)
    for j in range(n):
        v = out.reshape(-1, 2, 1 << j)
        v[:, 1, :] += v[:, 0, :]
    return out


def moebius(a: np.ndarray, n: int) -> np.ndarray:
    out = a.astype(np.int64, copy=True)
    for j in range(n):
        v = out.reshape(-1, 2, 1 << j)
        v[:, 1, :] -= v[:, 0, :]
    return out


def or_convolve(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """``out[X]`` is true iff ``X = Y | Z`` with ``a[Y]`` and ``b[Z]``."""
    return moebius(zeta(a, n) * zeta(b, n), n) > 0


def image_masks(n: int, point_image) -> np.ndarray:
    """For every team ``X`` the mask ``OR(point_image[i] for i in X)``."""
    teams = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        out |= np.where((teams >> i) & 1 == 1, np.int64(point_image[i]), 0)
    return out


class PointSpace:
    """Points with proposition labels and (optionally) successor masks.

    ``labels[i]`` is the set of propositions true at point ``i``;
    ``succ[i]`` the bitmask of its successors (``None`` for a propositional
    space, where modalities are rejected).
    """

    def __init__(self, labels, succ=None, max_points=16):
        self.n = len(labels)
        if self.n > max_points:
            from .errors import ResourceGuardError
            raise ResourceGuardError("points", self.n, max_points, "TL_MAX_WORLDS")
        self.labels = [frozenset(l) for l in labels]
        self.succ = None if succ is None else [int(s) for s in succ]
        self.teams = np.arange(1 << self.n, dtype=np.int64)
        self.full = (1 << self.n) - 1
        self._classical = {}
        self._r_of = None
        self._pred = None

    # -- per-point classical semantics ------------------------------------
    def point_mask(self, truth) -> int:
        m = 0
        for i, t in enumerate(truth):
            if t:
                m |= 1 << i
        return m

    def classical(self, f: S.Formula) -> tuple:
        """Truth value of classical ``f`` at each point (split read as or)."""
        key = id(f)
        hit = self._classical.get(key)
        if hit is not None:
            return hit[1]
        n = self.n
        if isinstance(f, S.Prop):
            out = tuple(f.name in l for l in self.labels)
        elif isinstance(f, S.NegProp):
            out = tuple(f.name not in l for l in self.labels)
        elif isinstance(f, S.Bottom):
            out = (False,) * n
        elif isinstance(f, S.Top):
            out = (True,) * n
        elif isinstance(f, S.And):
            a, b = self.classical(f.left), self.classical(f.right)
            out = tuple(x and y for x, y in zip(a, b))
        elif isinstance(f, S.Split):
            a, b = self.classical(f.left), self.classical(f.right)
            out = tuple(x or y for x, y in zip(a, b))
        elif isinstance(f, (S.Dia, S.Box)):
            if self.succ is None:
                raise SemanticError("modal operator in a propositional formula")
            body = self.point_mask(self.classical(f.body))
            if isinstance(f, S.Dia):
                out = tuple(self.succ[i] & body != 0 for i in range(n))
            else:
                out = tuple(self.succ[i] & ~body == 0 for i in range(n))
        else:
            raise SemanticError(f"not a classical formula: {S.render(f)}")
        # keyed by identity (structural hashing of deep trees is quadratic);
        # the node is kept alive so its id cannot be reused
        self._classical[key] = (f, out)
        return out

    # -- successor bookkeeping ----------------------------------------------
    @property
    def r_of(self) -> np.ndarray:
        if self._r_of is None:
            self._r_of = image_masks(self.n, self.succ)
        return self._r_of

    @property
    def pred(self) -> np.ndarray:
        """``pred[Y]`` = points with at least one successor in ``Y``."""
        if self._pred is None:
            preds = [0] * self.n
            for i, s in enumerate(self.succ):
                for j in range(self.n):
                    if s >> j & 1:
                        preds[j] |= 1 << i
            self._pred = image_masks(self.n, preds)
        return self._pred

    # -- team semantics -------------------------------------------------------
    def _within(self, mask) -> np.ndarray:
        return (self.teams & ~np.int64(mask)) == 0

    def _meets(self, mask) -> np.ndarray:
        return (self.teams & np.int64(mask)) != 0

    def _keys(self, formulas):
        cols = [self.classical(a) for a in formulas]
        return [tuple(c[i] for c in cols) for i in range(self.n)]

    def _groups(self, keys) -> dict:
        out = {}
        for i, k in enumerate(keys):
            out[k] = out.get(k, 0) | (1 << i)
        return out

    def property(self, f: S.Formula) -> np.ndarray:
        """Boolean array over all ``2**n`` teams."""
        return self._prop(f, {})

    def _prop(self, f, memo):
        key = id(f)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        out = self._compute(f, memo)
        memo[key] = (f, out)
        return out

    def _compute(self, f, memo):
        n, T = self.n, self.teams
        if isinstance(f, (S.Prop, S.NegProp)):
            return self._within(self.point_mask(self.classical(f)))
        if isinstance(f, S.Bottom):
            return T == 0
        if isinstance(f, S.Top):
            return np.ones(1 << n, dtype=bool)
        if isinstance(f, S.NonEmpty):
            return T != 0
        if isinstance(f, S.And):
            return self._prop(f.left, memo) & self._prop(f.right, memo)
        if isinstance(f, S.Or):
            return self._prop(f.left, memo) | self._prop(f.right, memo)
        if isinstance(f, S.Split):
            return or_convolve(self._prop(f.left, memo), self._prop(f.right, memo), n)
        if isinstance(f, S.NESplit):
            a = self._prop(f.left, memo).copy()
            b = self._prop(f.right, memo).copy()
            a[0] = b[0] = False
            out = or_convolve(a, b, n)
            out[0] = True
            return out
        if isinstance(f, S.Dep):
            keys = self._keys(f.args)
            tgt = self.classical(f.target)
            out = np.ones(1 << n, dtype=bool)
            pos, neg = {}, {}
            for i, k in enumerate(keys):
                if tgt[i]:
                    pos[k] = pos.get(k, 0) | (1 << i)
                else:
                    neg[k] = neg.get(k, 0) | (1 << i)
            for k in pos.keys() & neg.keys():
                out &= ~(self._meets(pos[k]) & self._meets(neg[k]))
            return out
        if isinstance(f, S.Inc):
            left = self._groups(self._keys(f.left))
            right = self._groups(self._keys(f.right))
            out = np.ones(1 << n, dtype=bool)
            for k, m in left.items():
                out &= ~self._meets(m) | self._meets(right.get(k, 0))
            return out
        if isinstance(f, S.Ind):
            left = self._groups(self._keys(f.left))
            right = self._groups(self._keys(f.right))
            out = np.ones(1 << n, dtype=bool)
            for ma in left.values():
                for mb in right.values():
                    out &= ~(self._meets(ma) & self._meets(mb)) | self._meets(ma & mb)
            return out
        if isinstance(f, S.Box):
            if self.succ is None:
                raise SemanticError("modal operator in a propositional formula")
            return self._prop(f.body, memo)[self.r_of]
        if isinstance(f, S.Dia):
            if self.succ is None:
                raise SemanticError("modal operator in a propositional formula")
            body = self._prop(f.body, memo)
            out = np.zeros(1 << n, dtype=bool)
            r_of, pred = self.r_of, self.pred
            for y in np.flatnonzero(body):
                y = np.int64(y)
                # X R Y  iff  Y within R(X) and X within pred(Y)
                out |= ((T & ~pred[y]) == 0) & ((r_of & y) == y)
            return out
        if isinstance(f, S.Exists):
            raise SemanticError("eliminate bisimulation quantifiers before evaluation")
        raise TypeError(f"not a formula: {f!r}")
