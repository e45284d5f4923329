"""Equivariant sheaves, the application action, and Moerdijk site objects.

A formula-in-context spreads out into a sheaf: one fiber of tuples per
model, acted on by isomorphisms.  Site objects arise from open arrow sets
closed under inverses and composition; sections lift to morphisms out of
them, and definable sheaves cover every site element that has headroom.
"""

from modform import (
    BasicOpenI,
    BasicOpenM,
    IndexSet,
    basic_open_arrows,
    basic_open_points,
    definable_sheaf,
    density_certificate,
    fic,
    lift_section,
    model_class,
    moerdijk_sheaf,
    stable_opens_of_site,
)
from modform.logic import EQUALITY_THEORY, TOP

S = IndexSet(2)
mc = model_class(EQUALITY_THEORY, S)

print("== the generic object: one variable, no condition ==")
sheaf = definable_sheaf(mc, fic(["x"], TOP))
for p, (m, t) in enumerate(sheaf.points):
    print(f"  point {p}: model {m}, block tuple {t}")
print("invariants:", sheaf.check_invariants() or "all hold")

print()
print("== stabilization ==")
s0 = sheaf.section_image((0,))
print(f"section image at index 0: {sorted(s0)}")
print(f"its orbit closure: {sorted(sheaf.stabilize(s0))}  (the whole sheaf)")

print()
print("== a site object ==")
cond = BasicOpenM(fic(["x"], TOP), (0,))
N = basic_open_arrows(mc, BasicOpenI(cond, ((0, 0),), cond))
site = moerdijk_sheaf(mc, N)
print(f"N has {len(N)} arrows; the quotient has {len(site.classes)} classes over U = {sorted(site.U)}")

lattice = stable_opens_of_site(site)
print(f"stable opens of U closed under N: {[sorted(o) for o in lattice['lattice']]}")
print(f"isomorphic to the subsheaf lattice: {lattice['isomorphic']}")

print()
print("== sections lift, definables cover ==")
U = basic_open_points(mc, cond)
section = {x: sheaf.point_index[(x, (mc.models[x].block_key(0),))] for x in U}
N_s, inner, hat = lift_section(sheaf, U, section)
print(f"stabilizer of the section: {len(N_s)} arrows; lift is iso: {hat.is_isomorphism()}")

for ci in range(len(site.classes)):
    cert = density_certificate(mc, site, ci)
    tag = cert["status"]
    extra = f" via {cert['formula']} at {cert['params']}" if tag == "verified" else ""
    print(f"  class {ci}: {tag}{extra}")
