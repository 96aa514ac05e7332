"""Propositional team logic: team tables, substitution and interpolants.

Run with ``python demos/01_propositional_interpolation.py``.
"""
import numpy as np

from teamlogic import parse, render
from teamlogic.prop import (closure_report, entails_prop, format_property, format_team,
                            models_of, uniform_interpolant_prop)
from teamlogic.syntax import BOT, TOP, Split, substitute_const

# A team over {p, q} is a set of valuations; a formula's meaning is the
# boolean table of all 16 teams it holds in, indexed by team bitmask.
phi = parse("(p & q) \\/+ (~p & q)")
prop = models_of(phi, ["p", "q"])
print("formula:", render(phi))
print("table shape:", prop.table.shape, " satisfied in", int(prop.table.sum()), "teams")
print(format_property(prop))

# The non-empty split is not downward closed, which is exactly why the
# naive elimination of p through top/bot substitution goes wrong here.
rep = closure_report(phi)
print("downward closed:", rep.downward,
      " witness:", [format_team(t) for t in rep.witnesses["downward"]])
split = Split(substitute_const(phi, "p", TOP), substitute_const(phi, "p", BOT))
ok, witness = entails_prop(phi, split)
print("phi entails phi[p|top] \\/ phi[p|bot]:", ok, " counterexample:", format_team(witness))

# The uniform interpolant over {q} is read off by projecting the table.
psi = parse("=(p ; q) & =( ; p)")
theta = uniform_interpolant_prop(psi, ["q"])
print("\ninterpolant of", render(psi), "over {q}:")
print("  ", render(theta))
same = np.array_equal(models_of(theta, ["q"]).table, models_of(parse("=( ; q)"), ["q"]).table)
print("   same teams as =( ; q):", same)
