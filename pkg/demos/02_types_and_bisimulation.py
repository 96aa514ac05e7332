"""Kripke models, k-bisimulation and characteristic formulas.

Run with ``python demos/02_types_and_bisimulation.py``.
"""
from teamlogic import render
from teamlogic.bisim import bisim_partition, bounded_bisim, team_bisimilar
from teamlogic.charform import char_formula, count_types, format_type, team_char_formula, type_of
from teamlogic.kripke import KripkeModel, TeamModel, enumerate_models, team_property

chain = KripkeModel(["w", "v"], [("w", "v")], {"w": {"p"}, "v": {"p"}})
loop = KripkeModel(["u"], [("u", "u")], {"u": {"p"}})

# Bounded bisimulation is a stack of boolean matrices, one per depth.
fam = bounded_bisim(chain, loop, ["p"], 3)
for i, mat in enumerate(fam.matrices):
    print(f"Z_{i}:", mat.astype(int).ravel().tolist())

# Types grow as a tower of exponentials.
print("\nnumber of k-types over {p}:", [count_types(1, k) for k in range(3)])
for k in range(3):
    t = type_of(chain, "w", ["p"], k)
    print(f"k={k}: {format_type(t):32s} chi = {render(char_formula(t))}")

# The team formula holds exactly in teams k-bisimilar to (chain, {w, v}).
source = TeamModel(chain, {"w", "v"})
chi = team_char_formula(source, ["p"], 1)
print("\nteam formula:", render(chi))
models = list(enumerate_models(2, ["p"]))
agree = 0
for N in models:
    table = team_property(chi, N)
    for mask in range(4):
        target = TeamModel(N, N.team_of(mask))
        agree += bool(table[mask]) == team_bisimilar(source, target, ["p"], k=1)[0]
print(f"agreement with team_bisimilar on {len(models) * 4} two-world team models:", agree)

# Partition refinement labels every world of a model with its class.
print("\nclasses of the chain (full, k=1, k=0):",
      bisim_partition(chain, ["p"]), bisim_partition(chain, ["p"], 1),
      bisim_partition(chain, ["p"], 0))
