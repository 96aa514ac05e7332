"""Eliminating a bisimulation quantifier in modal team logic.

Run with ``python demos/03_modal_quantifier.py``.
"""
from teamlogic import parse, render
from teamlogic.interp import (bisim_quantifier_team, equivalent_exact,
                              exists_witness, simplest_equivalent_modal,
                              uniform_interpolant_modal, verify_witness)
from teamlogic.kripke import KripkeModel, TeamModel

# Exact mode enumerates the k-types over the formula's language, so the
# result is a split of characteristic formulas that we can simplify.
for text, expect in [("<> p", "<> top"), ("p & q & NE", "q & NE")]:
    f = parse(text)
    theta, rep = bisim_quantifier_team(f, "p")
    print(f"E p. {text}  ->  {render(theta)}")
    print("   catalogue match:", render(simplest_equivalent_modal(theta)))
    print(f"   equivalent to {expect}:", equivalent_exact(theta, parse(expect)))

# The clause is constructive: a team model of theta is grafted into a
# model of the original formula that agrees with it on every other atom.
f = parse("<> p")
theta, _ = bisim_quantifier_team(f, "p")
N = KripkeModel(["a", "b"], [("a", "b")], {})
TM = TeamModel(N, {"a"})
W = exists_witness(f, "p", TM)
print("\nwitness worlds:", sorted(W.model.worlds), " team:", sorted(W.team))
print("witness verified:", verify_witness(f, "p", TM, W))

# Two atoms at depth one exceed the exact type cap, so this one runs in
# bounded mode: families are collected from models with at most two worlds
# and every clause is re-checked on models with at most three.
g = parse("<> (p & q) & [] q")
theta, rep = uniform_interpolant_modal(g, ["q"], mode="bounded", max_worlds=2,
                                      consequences=[parse("<> q"), parse("[] q")])
print("\ninterpolant of", render(g), "over {q}:")
print("  ", render(theta))
for c in rep.checks:
    print(f"   {c['clause']:18s} {c['verdict']:5s} ({c['bound']})")
