"""Projectively flat beta-changes and the Berwald reduction cascade.

A Minkowski base plus an exact 1-form passes every step.  The instance
A = (1+x1)^5 Q, B = (1+x1)^2 |y|^2 is a rescaled Minkowski metric and
stops at the Hamel step; its flag curvature is far from zero.
"""
import numpy as np

from mroot import generate as gen
from mroot import numerics as nu
from mroot import transforms as tr

good = gen.closed_beta_minkowski()
v = tr.berwald_reduction_cascade(good)
print(v.render())
print(tr.minkowski_verdict(good).render())

bad = gen.cascade_instance(m=5, v_power=2)
v = tr.berwald_reduction_cascade(bad)
print()
print("cascade on the rescaled instance:", v.status)
for item in v.items:
    print(f"  [{item.status}] {item.name}")

Ks = [nu.flag_curvature_numeric(bad, x, y, np.array([-y[1], y[0]])) for x, y in nu.admissible_points(bad, 5, 0)]
print("flag curvature at 5 points:", np.round(Ks, 3))
