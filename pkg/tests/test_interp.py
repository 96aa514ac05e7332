import json

import numpy as np
import pytest
from hypothesis import given, settings

from strategies import classical, modal_corpus_one_prop, team_formulas
from teamlogic import syntax as S
from teamlogic.bisim import team_bisimilar
from teamlogic.charform import type_of
from teamlogic.errors import ResourceGuardError, SemanticError
from teamlogic.interp import (InterpReport, TypeSpace, bisim_quantifier_ml,
                              bisim_quantifier_team, bounded_entails_modal, check_interpolant,
                              eliminate_quantifiers, entails_exact, equivalent_exact,
                              exists_witness, graft_witness, simplest_equivalent_modal,
                              uniform_interpolant_modal, verify_witness)
from teamlogic.kripke import (KripkeModel, TeamModel, enumerate_models, eval_team_modal,
                              team_models, team_property)
from teamlogic.syntax import NE, TOP, parse, substitute_const

EX1 = parse("(p & q) \\/+ (~p & q)")
EX2 = parse("=(p ; q) & =( ; p)")


def eq(f, g, props=None):
    return equivalent_exact(f, g, props)


class TestTypeSpace:
    def test_families_realise_their_types(self):
        ts = TypeSpace(("p",), 1)
        for s in range(0, 1 << len(ts), 17):
            TM = ts.team_model(s)
            got = {type_of(TM.model, w, ("p",), 1) for w in TM.team}
            assert got == set(ts.family(s))

    def test_satisfying_matches_realisations(self):
        ts = TypeSpace(("p",), 1)
        for f in modal_corpus_one_prop():
            sat = ts.satisfying(f)
            for s in range(0, 1 << len(ts), 29):
                assert sat[s] == eval_team_modal(f, ts.team_model(s))

    def test_guard(self):
        with pytest.raises(ResourceGuardError, match="TL_EXACT_TYPE_CAP"):
            TypeSpace(("p", "q"), 1)

    def test_rejects_deep_or_foreign_formula(self):
        ts = TypeSpace(("p",), 1)
        with pytest.raises(SemanticError):
            ts.satisfying(parse("<><>p"))
        with pytest.raises(SemanticError):
            ts.satisfying(parse("q"))


class TestExactEntailment:
    def test_examples(self):
        assert entails_exact(parse("<> (p & NE)"), parse("<> p"))[0]
        ok, wit = entails_exact(parse("<> top"), parse("<> p"))
        assert not ok and eval_team_modal(parse("<> top"), wit)
        assert not eval_team_modal(parse("<> p"), wit)

    @settings(max_examples=40, deadline=None)
    @given(team_formulas(props=("p",), modal=True, max_leaves=4),
           team_formulas(props=("p",), modal=True, max_leaves=4))
    def test_agrees_with_grid_refutations(self, f, g):
        k = max(S.modal_depth(f), S.modal_depth(g))
        if k > 1:
            return
        exact = entails_exact(f, g, ("p",), k)[0]
        grid = bounded_entails_modal(f, g, 2, ("p",))[0]
        # the grid can only miss counterexamples
        assert grid or not exact


class TestBoundedEntailment:
    def test_examples(self):
        f = parse("<> (p & q)")
        assert bounded_entails_modal(f, f) == (True, None)
        assert bounded_entails_modal(f, parse("<> q"))[0]
        ok, wit = bounded_entails_modal(parse("<> q"), f)
        assert not ok and len(wit.model) == 1
        assert wit.model.labels[wit.model.worlds[0]] == {"q"}

    def test_rejects_quantifiers(self):
        with pytest.raises(SemanticError):
            bounded_entails_modal(parse("E p. p"), TOP)


class TestML:
    def test_examples(self):
        assert eq(bisim_quantifier_ml(parse("p & q"), "p"), parse("q"))
        assert bisim_quantifier_ml(parse("q"), "p") == parse("q")
        assert eq(bisim_quantifier_ml(parse("<> (p & q)"), "p"), parse("<> q"))

    def test_unsatisfiable(self):
        assert bisim_quantifier_ml(parse("p & ~p"), "p") == S.BOT

    def test_non_classical(self):
        with pytest.raises(SemanticError):
            bisim_quantifier_ml(parse("p & NE"), "p")

    @settings(max_examples=40, deadline=None)
    @given(classical(("p", "q"), modal=True, max_leaves=4))
    def test_pointed_clause(self, a):
        if S.modal_depth(a) > 1 or "p" not in S.language_of(a):
            return
        theta = bisim_quantifier_ml(a, "p")
        L = S.language_of(a)
        assert S.language_of(theta) <= L - {"p"}
        if len(L) == 1:
            assert entails_exact(a, theta, L, 1)[0]
        else:
            assert bounded_entails_modal(a, theta, 2)[0]

    @settings(max_examples=40, deadline=None)
    @given(classical(("p", "q"), modal=True, max_leaves=4))
    def test_team_transfer(self, a):
        L = S.language_of(a)
        if "p" not in L or S.modal_depth(a) > 1 or len(L) > 1:
            return
        ml = bisim_quantifier_ml(a, "p")
        team, _ = bisim_quantifier_team(a, "p")
        assert eq(ml, team, L - {"p"})


class TestTeamQuantifier:
    def test_examples(self):
        theta, rep = bisim_quantifier_team(parse("p & q & NE"), "p")
        assert eq(theta, parse("q & NE"))
        assert rep.mode == "exact" and rep.kept == ["q"]
        theta, _ = bisim_quantifier_team(parse("<> p"), "p")
        assert eq(theta, parse("<> top"), ())
        assert simplest_equivalent_modal(theta, (), 1) == parse("<> top")

    def test_absent_variable(self):
        f = parse("<> q & NE")
        assert bisim_quantifier_team(f, "p")[0] == f

    def test_excluded_middle(self):
        theta, _ = bisim_quantifier_team(parse("p \\/ ~p"), "p")
        assert eq(theta, TOP, ())

    def test_nothing_satisfies(self):
        theta, _ = bisim_quantifier_team(parse("p & ~p & NE"), "p")
        assert theta == S.And(S.BOT, NE)

    def test_guard_and_bounded_fallback(self):
        f = parse("<> (p & q)")
        with pytest.raises(ResourceGuardError, match="bounded mode"):
            bisim_quantifier_team(f, "p")
        theta, rep = bisim_quantifier_team(f, "p", mode="bounded", max_worlds=2)
        assert rep.mode == "bounded" and rep.passed
        assert rep.checks[0]["clause"] == "premise"
        assert rep.stats["max_worlds"] == 2
        assert bounded_entails_modal(theta, parse("<> q"), 2)[0]

    def test_unknown_mode(self):
        with pytest.raises(SemanticError):
            bisim_quantifier_team(parse("p"), "p", mode="fast")

    @pytest.mark.parametrize("f", [parse("p & q & NE"), parse("p \\/ ~p"), EX1, EX2,
                                   parse("inc(p;q) & NE"), parse("=(q;p) \\/+ q")])
    def test_exact_clause_both_ways(self, f):
        theta, _ = bisim_quantifier_team(f, "p")
        keep = S.language_of(f) - {"p"}
        # soundness: every model of f satisfies theta (theta ignores p)
        assert entails_exact(f, theta)[0]
        # completeness: every grid model of theta has a witness for f
        for TM in team_models(2, sorted(keep)):
            if eval_team_modal(theta, TM):
                W = exists_witness(f, "p", TM)
                assert W is not None and verify_witness(f, "p", TM, W)
            else:
                assert exists_witness(f, "p", TM) is None

    @pytest.mark.parametrize("f", modal_corpus_one_prop())
    def test_exact_clause_modal(self, f):
        theta, _ = bisim_quantifier_team(f, "p")
        assert entails_exact(f, theta, ("p",), 1)[0]
        for TM in team_models(2, []):
            if eval_team_modal(theta, TM):
                W = exists_witness(f, "p", TM)
                assert W is not None and verify_witness(f, "p", TM, W)

    def test_nested_quantifiers(self):
        f = parse("E p. (E q. (p & q & NE))")
        g = eliminate_quantifiers(f)
        assert not any(isinstance(n, S.Exists) for n in S.walk(g))
        assert eq(g, parse("NE"), ())

    def test_quantifier_under_modality(self):
        g = eliminate_quantifiers(parse("<> E p. (p & q)"))
        assert eq(g, parse("<> q"))


class TestCommutation:
    PAIRS = [("p & NE", "~p & q"), ("p", "q & NE"), ("=(;p)", "q"), ("inc(p;q)", "p & NE"),
             ("p \\/+ q", "~p"), ("<> p", "[] ~p")]

    @pytest.mark.parametrize("a,b", PAIRS)
    def test_split_and_or(self, a, b):
        f1, f2 = parse(a), parse(b)
        L = S.language_of(f1) | S.language_of(f2)
        k = max(S.modal_depth(f1), S.modal_depth(f2))
        if k and len(L) > 1:
            return
        e = lambda f: bisim_quantifier_team(f, "p")[0]
        keep = L - {"p"}
        assert eq(e(S.Split(f1, f2)), S.Split(e(f1), e(f2)), keep)
        assert eq(e(S.Or(f1, f2)), S.Or(e(f1), e(f2)), keep)
        assert eq(e(S.And(f1, NE)), S.And(e(f1), NE), keep)


class TestUniformInterpolation:
    def test_keep_everything(self):
        f = parse("<> p & NE")
        theta, rep = uniform_interpolant_modal(f, {"p"})
        assert theta == f and rep.passed

    def test_single_step(self):
        theta, rep = uniform_interpolant_modal(parse("p & q & NE"), {"q"})
        assert eq(theta, parse("q & NE")) and rep.passed

    def test_example_two(self):
        theta, rep = uniform_interpolant_modal(EX2, {"q"})
        assert eq(theta, parse("=(;q)"), {"q"})
        assert rep.passed
        assert [c["verdict"] for c in rep.checks[:2]] == ["pass", "pass"]

    def test_language_check(self):
        with pytest.raises(SemanticError):
            uniform_interpolant_modal(parse("p"), {"q"})

    def test_order_interchangeable(self):
        f = parse("(p & q & NE) \\/ (=(p;r) & ~q)")
        a, _ = bisim_quantifier_team(bisim_quantifier_team(f, "p")[0], "q")
        b, _ = bisim_quantifier_team(bisim_quantifier_team(f, "q")[0], "p")
        assert eq(a, b, {"r"})

    @settings(max_examples=30, deadline=None)
    @given(classical(("p", "q", "r"), max_leaves=5))
    def test_classical_matches_iterated_ml(self, a):
        L = S.language_of(a)
        Q = L & {"r"}
        theta, _ = uniform_interpolant_modal(a, Q, consequences=())
        ml = a
        for p in sorted(L - Q):
            ml = bisim_quantifier_ml(ml, p)
        assert eq(theta, ml, Q)

    def test_closure_preservation_on_grid(self):
        grid = [M for n in (1, 2) for M in enumerate_models(n, ["p"])]
        empty = [M for n in (1, 2) for M in enumerate_models(n, [])]

        def closed(f, models):
            down = union = True
            for M in models:
                T = team_property(f, M)
                n = len(T)
                for x in np.flatnonzero(T):
                    down &= all(T[y] for y in range(n) if y & ~int(x) == 0)
                    union &= all(T[int(x) | int(y)] for y in np.flatnonzero(T))
            return down, union

        for f in modal_corpus_one_prop():
            theta, _ = uniform_interpolant_modal(f, set(), consequences=())
            d0, u0 = closed(f, grid)
            d1, u1 = closed(theta, empty)
            assert (not d0 or d1) and (not u0 or u1), S.render(f)


class TestCheckInterpolant:
    def test_example_two(self):
        rep = check_interpolant(EX2, parse("=(;q)"), {"q"}, [parse("=(;q)")])
        assert rep.passed
        assert [c["verdict"] for c in rep.checks] == ["pass", "pass", "pass"]

    def test_example_one(self):
        theta = S.Split(substitute_const(EX1, "p", TOP), substitute_const(EX1, "p", S.BOT))
        rep = check_interpolant(EX1, theta, {"q"})
        premise = rep.checks[1]
        assert premise["clause"] == "premise" and premise["verdict"] == "fail"
        assert premise["witness"] == "{p=0 q=1; p=1 q=1}"
        assert not rep.passed

    def test_language_clause(self):
        rep = check_interpolant(parse("p & q"), parse("p"), {"q"})
        assert rep.checks[0]["verdict"] == "fail"

    def test_skips_non_consequences(self):
        rep = check_interpolant(parse("q"), parse("q"), {"q"}, [parse("~q"), parse("p")])
        assert [c["verdict"] for c in rep.checks[2:]] == ["skipped", "skipped"]

    def test_modal_route(self):
        rep = check_interpolant(parse("<> (p & q)"), parse("<> q"), {"q"}, [parse("<> top")])
        assert rep.passed and "<= 3 worlds" in rep.checks[1]["bound"]
        assert rep.checks[2]["bound"].startswith("exact")

    def test_report_json(self):
        rep = check_interpolant(EX2, parse("=(;q)"), {"q"}, [parse("=(;q)")])
        data = json.loads(rep.to_json())
        assert set(data) >= {"mode", "kept", "result", "checks"}
        assert all({"clause", "verdict", "bound"} <= set(c) for c in data["checks"])
        assert data["result"] == "=( ; q)"


class TestWitness:
    def test_graft_relabels_p(self):
        M = KripkeModel(["x", "a", "b"], [("x", "a"), ("x", "b")])
        f = parse("<> (p & NE) & <> (~p & NE)")
        TM = TeamModel(M, {"x"})
        W = exists_witness(f, "p", TM)
        assert W is not None and verify_witness(f, "p", TM, W)
        assert not eval_team_modal(f, TM)

    def test_graft_duplicates_children(self):
        # one successor must carry both a p-child and a non-p-child
        M = KripkeModel(["x", "a"], [("x", "a")])
        f = parse("<> (p & NE) & <> (~p & NE)")
        W = exists_witness(f, "p", TeamModel(M, {"x"}))
        assert W is not None and verify_witness(f, "p", TeamModel(M, {"x"}), W)

    def test_no_witness(self):
        M = KripkeModel(["x"])
        assert exists_witness(parse("<> p"), "p", TeamModel(M, {"x"})) is None

    def test_graft_mismatch(self):
        M = KripkeModel(["x"], [], {"x": {"q"}})
        fam = [type_of(KripkeModel(["y"]), "y", ("p", "q"), 0)]
        with pytest.raises(SemanticError):
            graft_witness(M, {"x"}, fam, "p", ("p", "q"), 0)

    def test_graft_whole_family_used(self):
        M = KripkeModel(["x"], [], {"x": {"q"}})
        fam = [type_of(KripkeModel(["y"], [], {"y": s}), "y", ("p", "q"), 0)
               for s in ({"q"}, {"p", "q"})]
        W = graft_witness(M, {"x"}, fam, "p", ("p", "q"), 0)
        assert {type_of(W.model, w, ("p", "q"), 0) for w in W.team} == set(fam)
        assert team_bisimilar(W, TeamModel(M, {"x"}), {"q"})[0]


def test_report_defaults():
    rep = InterpReport("p", ["p"], "p", "exact")
    assert rep.passed and rep.to_dict()["checks"] == []
