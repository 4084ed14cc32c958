"""Dually flat conformal beta-changes: residual vs the three conditions.

The instance is a constant change of an x-independent generalized base.
Each mutation perturbs one coefficient by an x-dependent term.
"""
from mroot import generate as gen
from mroot import transforms as tr

M = gen.dually_flat_instance()
res = tr.dually_flat_residual(M)
print(res.render())
print(tr.check_dually_flat_conditions(M).render())

print("\nmutation                        residual  conditions")
for label, Mu in gen.dually_flat_mutations():
    r = tr.dually_flat_residual(Mu)
    c = tr.check_dually_flat_conditions(Mu)
    print(f"  {Mu.name:<30} {r.status:<9} {c.status}")

w = tr.theta_extract(gen.quartic_x())
print("\ntheta for the x-dependent quartic:", w.theta.render() if w else "none (A does not divide A_0)")
