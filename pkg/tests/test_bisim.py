import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import kripke_models, team_models
from teamlogic.bisim import (Bisimulation, amalgamate, bisim_partition, bounded_bisim,
                             format_bisim, is_bisimulation, max_bisim, pair_id, parse_bisim,
                             projection, team_amalgamate, team_bisimilar)
from teamlogic.errors import ParseError, SemanticError
from teamlogic.kripke import KripkeModel, TeamModel, disjoint_union, enumerate_models

CHAIN = KripkeModel(["w", "v"], [("w", "v")], {"w": {"p"}, "v": {"p"}})
LOOP = KripkeModel(["u"], [("u", "u")], {"u": {"p"}})

subsets = st.sets(st.sampled_from(["p", "q"]))


def tm(M, *team):
    return TeamModel(M, frozenset(team))


def naive_max(M, N, P):
    """Greatest fixpoint by deleting violating pairs one at a time."""
    P = frozenset(P)
    rel = {(a, b) for a in M.worlds for b in N.worlds if M.labels[a] & P == N.labels[b] & P}
    changed = True
    while changed:
        changed = False
        for a, b in sorted(rel):
            ok = (all(any((a2, b2) in rel for b2 in N.successors(b)) for a2 in M.successors(a))
                  and all(any((a2, b2) in rel for a2 in M.successors(a))
                          for b2 in N.successors(b)))
            if not ok:
                rel.discard((a, b))
                changed = True
    return frozenset(rel)


class TestBounded:
    def test_chain_vs_loop(self):
        fam = bounded_bisim(CHAIN, LOOP, {"p"}, 2)
        assert fam.related("w", "u", 1)
        assert not fam.related("w", "u", 2)
        assert fam.related("w", "u", 0)
        assert not fam.related("v", "u", 1)

    def test_identity(self):
        for k in range(4):
            fam = bounded_bisim(CHAIN, CHAIN, {"p"}, k)
            assert {(w, w) for w in CHAIN.worlds} <= fam.layers[-1]

    def test_empty_props_relate_everything(self):
        M = KripkeModel(["a"], [], {"a": {"p"}})
        N = KripkeModel(["b"], [], {})
        for k in range(3):
            assert bounded_bisim(M, N, set(), k).layers[-1] == {("a", "b")}
        assert bounded_bisim(M, N, {"p"}, 0).layers[0] == frozenset()

    def test_negative_k(self):
        with pytest.raises(SemanticError):
            bounded_bisim(CHAIN, LOOP, {"p"}, -1)

    @settings(max_examples=100, deadline=None)
    @given(kripke_models(max_worlds=3), kripke_models(max_worlds=3), subsets)
    def test_layers_shrink_and_stabilise(self, M, N, P):
        n = len(M) * len(N) + 1
        layers = bounded_bisim(M, N, P, n).layers
        assert all(b <= a for a, b in zip(layers, layers[1:]))
        assert layers[-1] == max_bisim(M, N, P).pairs
        for a, b in zip(layers, layers[1:]):
            if a == b:
                assert a == layers[-1]
                break


class TestMaximal:
    def test_chain_vs_loop(self):
        B = max_bisim(CHAIN, LOOP, {"p"})
        assert ("w", "u") not in B and len(B) == 0

    def test_self(self):
        B = max_bisim(CHAIN, CHAIN, {"p"})
        assert {("w", "w"), ("v", "v")} <= B.pairs
        assert B.rounds <= len(CHAIN) ** 2

    def test_disjoint_alphabets_can_relate(self):
        M = KripkeModel(["a"], [], {"a": {"q"}})
        N = KripkeModel(["b"], [], {"b": {"r"}})
        assert max_bisim(M, N, {"p"}).pairs == {("a", "b")}

    @settings(max_examples=150, deadline=None)
    @given(kripke_models(max_worlds=3), kripke_models(max_worlds=3), subsets)
    def test_against_naive_fixpoint(self, M, N, P):
        B = max_bisim(M, N, P)
        assert B.pairs == naive_max(M, N, P)
        assert is_bisimulation(M, N, B.pairs, P)

    @settings(max_examples=100, deadline=None)
    @given(kripke_models(max_worlds=3), kripke_models(max_worlds=3), subsets, subsets)
    def test_anti_monotone(self, M, N, P, extra):
        assert max_bisim(M, N, P | extra).pairs <= max_bisim(M, N, P).pairs

    @settings(max_examples=100, deadline=None)
    @given(kripke_models(max_worlds=3), kripke_models(max_worlds=3), subsets)
    def test_partition_agrees(self, M, N, P):
        U = disjoint_union(M, N)
        cls = dict(zip(U.worlds, bisim_partition(U, P)))
        B = max_bisim(M, N, P)
        for a, b in itertools.product(M.worlds, N.worlds):
            assert ((a, b) in B) == (cls[f"1:{a}"] == cls[f"2:{b}"])

    @settings(max_examples=100, deadline=None)
    @given(kripke_models(max_worlds=3), kripke_models(max_worlds=3), subsets,
           st.integers(0, 3))
    def test_bounded_partition_agrees(self, M, N, P, k):
        U = disjoint_union(M, N)
        cls = dict(zip(U.worlds, bisim_partition(U, P, k)))
        fam = bounded_bisim(M, N, P, k)
        for a, b in itertools.product(M.worlds, N.worlds):
            assert fam.related(a, b) == (cls[f"1:{a}"] == cls[f"2:{b}"])

    def test_sparse_path_agrees_with_dense(self):
        # a disjoint union of a whole grid crosses the sparse threshold
        models = list(enumerate_models(2, ["p"]))
        U = models[0]
        for i, M in enumerate(models[1:], 1):
            U = disjoint_union(U, M, ("a", f"m{i}"))
        assert len(U) >= 64
        B = max_bisim(U, U, {"p"})
        assert B.pairs == naive_max(U, U, {"p"})


class TestInvariantChecker:
    def test_rejects_label_mismatch(self):
        M = KripkeModel(["a"], [], {"a": {"p"}})
        N = KripkeModel(["b"])
        assert not is_bisimulation(M, N, {("a", "b")}, {"p"})

    def test_rejects_forth_failure(self):
        assert not is_bisimulation(CHAIN, LOOP, {("w", "u")}, {"p"})

    def test_rejects_unknown_world(self):
        assert not is_bisimulation(CHAIN, LOOP, {("x", "u")}, {"p"})

    def test_empty_relation(self):
        assert is_bisimulation(CHAIN, LOOP, set(), {"p"})


class TestTeams:
    def test_self(self):
        assert team_bisimilar(tm(CHAIN, "w"), tm(CHAIN, "w"), {"p"})[0]

    def test_empty(self):
        assert team_bisimilar(tm(CHAIN), tm(LOOP), {"p"})[0]
        ok, wit = team_bisimilar(tm(CHAIN), tm(LOOP, "u"), {"p"})
        assert not ok and wit == {"blocking": ("right", "u")}

    def test_levels(self):
        assert team_bisimilar(tm(CHAIN, "w"), tm(LOOP, "u"), {"p"}, k=1)[0]
        ok, wit = team_bisimilar(tm(CHAIN, "w"), tm(LOOP, "u"), {"p"}, k=2)
        assert not ok and wit["blocking"] == ("left", "w")

    def test_witness_maps(self):
        ok, wit = team_bisimilar(tm(CHAIN, "w", "v"), tm(CHAIN, "w", "v"), {"p"})
        assert ok and wit["forth"] == {"w": "w", "v": "v"} and wit["back"] == wit["forth"]

    @settings(max_examples=100, deadline=None)
    @given(team_models(max_worlds=3), team_models(max_worlds=3), subsets)
    def test_definition(self, A, B, P):
        rel = max_bisim(A.model, B.model, P).pairs
        expect = (all(any((x, y) in rel for y in B.team) for x in A.team)
                  and all(any((x, y) in rel for x in A.team) for y in B.team))
        assert team_bisimilar(A, B, P)[0] == expect


class TestAmalgamation:
    def test_identity(self):
        B = {(w, w) for w in CHAIN.worlds}
        K = amalgamate(CHAIN, CHAIN, B, {"p"}, {"p"})
        assert len(K) == 2
        assert K.edges == {(pair_id("w", "w"), pair_id("v", "v"))}
        assert K.labels[pair_id("v", "v")] == {"p"}

    def test_one_world(self):
        M = KripkeModel(["m"], [], {"m": {"p", "q"}})
        N = KripkeModel(["n"], [], {"n": {"q"}})
        K = amalgamate(M, N, {("m", "n")}, {"p", "q"}, {"q"})
        assert K.worlds == (pair_id("m", "n"),) and K.labels[pair_id("m", "n")] == {"p", "q"}

    def test_errors(self):
        with pytest.raises(SemanticError):
            amalgamate(CHAIN, LOOP, set(), {"p"}, {"p"})
        with pytest.raises(SemanticError):
            amalgamate(CHAIN, LOOP, {("w", "u")}, {"p"}, {"p"})

    def test_team_example(self):
        M = KripkeModel(["m"], [], {"m": {"p", "q"}})
        N = KripkeModel(["n"], [], {"n": {"q", "r"}})
        out = team_amalgamate(tm(M, "m"), tm(N, "n"), {"p", "q"}, {"q", "r"})
        assert out.team == {pair_id("m", "n")}
        assert out.model.labels[pair_id("m", "n")] == {"p", "q", "r"}

    def test_team_self(self):
        out = team_amalgamate(tm(CHAIN, "w", "v"), tm(CHAIN, "w", "v"), {"p"}, {"p"})
        assert {pair_id("w", "w"), pair_id("v", "v")} <= out.team

    def test_team_precondition(self):
        with pytest.raises(SemanticError, match="no partner"):
            team_amalgamate(tm(CHAIN, "w"), tm(LOOP, "u"), {"p"}, {"p"})

    def test_team_empty_relation(self):
        M = KripkeModel(["m"], [], {"m": {"q"}})
        N = KripkeModel(["n"])
        out = team_amalgamate(tm(M), tm(N), {"q"}, {"q"})
        assert len(out.model) == 0 and not out.team

    @settings(max_examples=100, deadline=None)
    @given(kripke_models(("p", "q"), 3), kripke_models(("q", "r"), 3))
    def test_projections_are_bisimulations(self, M, N):
        P, Q = {"p", "q"}, {"q", "r"}
        B = max_bisim(M, N, P & Q)
        if not B.pairs:
            return
        K = amalgamate(M, N, B, P, Q)
        assert is_bisimulation(K, M, projection(B.pairs, 0), P)
        assert is_bisimulation(K, N, projection(B.pairs, 1), Q)

    @settings(max_examples=100, deadline=None)
    @given(team_models(("p", "q"), 3), team_models(("q", "r"), 3))
    def test_team_amalgam_bisimilar_to_both(self, A, B):
        P, Q = {"p", "q"}, {"q", "r"}
        if not team_bisimilar(A, B, P & Q)[0]:
            return
        out = team_amalgamate(A, B, P, Q)
        assert team_bisimilar(A, out, P)[0]
        assert team_bisimilar(out, B, Q)[0]


class TestDump:
    def test_round_trip(self):
        B = max_bisim(CHAIN, CHAIN, {"p"})
        text = format_bisim(B.pairs, B.props, CHAIN, CHAIN)
        assert text.splitlines()[0] == "props: p"
        assert "w <-> w" in text.splitlines()
        assert parse_bisim(text) == (B.pairs, B.props)

    def test_comments_and_blank_lines(self):
        assert parse_bisim("# dump\nprops: p q\n\na <-> b  # pair\n") == \
            (frozenset({("a", "b")}), frozenset({"p", "q"}))

    @pytest.mark.parametrize("bad", ["a <-> b\n", "props: p\na b\n", "props: p\n <-> b\n", ""])
    def test_errors(self, bad):
        with pytest.raises(ParseError):
            parse_bisim(bad)


def test_bisimulation_is_a_value():
    B = Bisimulation(frozenset({("a", "b")}), frozenset({"p"}))
    assert ("a", "b") in B and len(B) == 1
