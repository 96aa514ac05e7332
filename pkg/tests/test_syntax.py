import pytest
from hypothesis import given, settings

from strategies import team_formulas
from teamlogic import syntax as S
from teamlogic.errors import ParseError, SemanticError
from teamlogic.syntax import (BOT, NE, TOP, And, Dep, Dia, Box, Exists, Fragment, Inc, Ind,
                              NegProp, NESplit, Or, Prop, Split, classify, free_props,
                              language_of, modal_depth, parse, render, substitute_const)

p, q, r = Prop("p"), Prop("q"), Prop("r")


class TestParse:
    def test_conjunction(self):
        assert parse("p & q") == And(p, q)

    def test_example_one(self):
        assert parse("(p & q) \\/+ (~p & q)") == NESplit(And(p, q), And(NegProp("p"), q))

    def test_example_two(self):
        assert parse("=(p ; q) & =( ; p)") == And(Dep((p,), q), Dep((), p))

    def test_precedence(self):
        # & binds tighter than the splits, which bind tighter than ||
        assert parse("p & q \\/ r || NE") == Or(Split(And(p, q), r), NE)
        assert parse("<> p & q") == And(Dia(p), q)
        assert parse("E p. p & q") == And(Exists("p", p), q)

    def test_left_associative(self):
        assert parse("p \\/ q \\/ r") == Split(Split(p, q), r)
        assert parse("p \\/+ q \\/ r") == Split(NESplit(p, q), r)

    def test_atoms(self):
        assert parse("inc(p, q ; q, r)") == Inc((p, q), (q, r))
        assert parse("ind(p ; q, r)") == Ind((p,), (q, r))
        assert parse("=(<>p ; q)") == Dep((Dia(p),), q)

    def test_constants(self):
        assert parse("bot || top & NE") == Or(BOT, And(TOP, NE))

    def test_error_position(self):
        with pytest.raises(ParseError) as exc:
            parse("p &\n  & q")
        assert exc.value.line == 2 and exc.value.column == 3

    def test_inc_arity(self):
        with pytest.raises(ParseError, match="same length|arity"):
            parse("inc(p, q ; r)")

    def test_nested_atom_rejected(self):
        with pytest.raises(ParseError):
            parse("=(=(p ; q) ; r)")

    def test_non_classical_argument_rejected(self):
        with pytest.raises(ParseError):
            parse("=(NE ; p)")
        with pytest.raises(ParseError):
            parse("=(p || q ; p)")

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            parse("p q")

    def test_keywords_are_not_props(self):
        with pytest.raises(ParseError):
            parse("inc")


class TestRender:
    def test_examples(self):
        assert render(And(p, q)) == "p & q"
        assert render(Dep((), q)) == "=( ; q)"
        assert render(Exists("p", Dia(p))) == "E p. <> p"

    def test_minimal_parentheses(self):
        assert render(And(Split(p, q), r)) == "(p \\/ q) & r"
        assert render(Split(p, Split(q, r))) == "p \\/ (q \\/ r)"
        assert render(Split(Split(p, q), r)) == "p \\/ q \\/ r"
        assert render(Dia(And(p, q))) == "<> (p & q)"

    @settings(max_examples=300, deadline=None)
    @given(team_formulas(modal=True, max_leaves=8))
    def test_round_trip(self, f):
        assert parse(render(f)) == f

    @given(team_formulas(modal=True, max_leaves=5))
    def test_round_trip_with_quantifier(self, f):
        g = Exists("p", Split(f, Dia(f)))
        assert parse(render(g)) == g


class TestLanguage:
    def test_examples(self):
        assert language_of(And(p, q)) == {"p", "q"}
        assert free_props(parse("E p. (p & q)")) == {"q"}
        assert language_of(parse("E p. (p & q)")) == {"p", "q"}
        assert language_of(parse("=(p;q) & =(;p)")) == {"p", "q"}

    def test_modal_depth(self):
        assert modal_depth(And(p, q)) == 0
        assert modal_depth(parse("[]<>p")) == 2
        assert modal_depth(parse("=( <>p ; q )")) == 1
        assert modal_depth(parse("inc(p ; [][]q) & <> r")) == 2


class TestClassify:
    def test_examples(self):
        assert classify(parse("p & (q \\/ ~q)")) == Fragment.CPL
        assert classify(parse("=(p;q) & <>p")) == Fragment.MDEP
        assert classify(parse("NE || p")) == Fragment.FPTL

    def test_rows(self):
        assert classify(parse("<> p")) == Fragment.ML
        assert classify(parse("inc(p;q)")) == Fragment.PINC
        assert classify(parse("ind(p;q) & []p")) == Fragment.MIND
        assert classify(parse("p \\/+ q")) == Fragment.FPTL
        assert classify(parse("<>(p \\/+ q)")) == Fragment.FMTL
        assert classify(parse("=(p;q) & inc(p;q)")) == Fragment.FPTL
        assert classify(parse("E p. p")) == Fragment.EXT

    @settings(max_examples=200, deadline=None)
    @given(team_formulas(modal=True, max_leaves=5), team_formulas(modal=True, max_leaves=5))
    def test_monotone(self, f, g):
        for h in (And(f, g), Split(f, g), Or(f, g), NESplit(f, g), Dia(f), Box(f)):
            assert classify(h) >= classify(f)


class TestSubstitution:
    def test_example_one(self):
        f = parse("(p & q) \\/+ (~p & q)")
        assert substitute_const(f, "p", TOP) == parse("(top & q) \\/+ (bot & q)")

    def test_example_two(self):
        f = parse("=(p ; q) & =( ; p)")
        assert substitute_const(f, "p", TOP) == parse("=(top ; q) & =( ; top)")

    def test_absent(self):
        assert substitute_const(q, "p", BOT) == q

    def test_bound_occurrence_kept(self):
        f = parse("p & E p. <> p")
        assert substitute_const(f, "p", True) == And(TOP, Exists("p", Dia(p)))

    def test_rejects_other_values(self):
        with pytest.raises(SemanticError):
            substitute_const(p, "p", q)

    @settings(max_examples=200, deadline=None)
    @given(team_formulas(modal=True, max_leaves=8))
    def test_language_drops_p(self, f):
        for v in (TOP, BOT):
            assert language_of(substitute_const(f, "p", v)) == language_of(f) - {"p"}


def test_join_helpers_stay_shallow():
    items = [Prop(f"x{i}") for i in range(500)]
    f = S.split_join(items)
    assert S.size(f) == 999
    assert render(parse(render(f))) == render(f)
    assert S.conj([]) == TOP and S.split_join([]) == BOT
    assert S.or_join([]) == And(BOT, NE)
