"""Why an m-th root metric with isotropic curvature has c = 0.

Walk through one x-dependent quartic: the spray and the Berwald curvature are
rational in y, while F carries the fractional power A^(1/4).  A nonzero c
would put that fractional class on one side only.
"""
from mroot import curvature as cv
from mroot import generate as gen
from mroot.metric import identity_suite

M = gen.quartic_x()
print("A =", M.A.render(), " m =", M.m)
print()
print(identity_suite(M).render())

sp = cv.spray_mroot(M)
print("\nspray coefficients (rational functions of y):")
for i, g in enumerate(sp.G):
    print(f"  G^{i + 1} =", g.render())
print("closed form agrees with the definition:", cv.spray_crosscheck(M).passed)

B = cv.berwald_E(M)
print("\nexponent classes in B:", [str(c) for c in B.classes])
print("exponent classes in F:", [str(c) for c in M.F.classes()])

for target in cv.TARGETS:
    v = cv.isotropy_reduction(M, target)
    print(f"\ntarget {target}: forced {v.witnesses.get('forced')}, class {v.witnesses.get('class')}")

# a Riemannian metric has no Cartan torsion, so nothing is forced by the argument
v = cv.isotropy_reduction(gen.conformal_riemannian(), "J")
print("\nconformal Riemannian, target J:", v.witnesses["branch"], "branch")
