"""Numeric side: geodesics, Busemann-Hausdorff volume, S-curvature, Funk metric."""
import numpy as np

from mroot import generate as gen
from mroot import numerics as nu

# geodesics of a Minkowski quartic are straight lines
M = gen.quartic()
tr = nu.geodesic_integrate(M, [0.0, 0.0], [0.6, 0.8], 1000, 1e-3)
print("quartic geodesic end point:", tr.X[-1], " F drift:", f"{tr.drift:.1e}")

# for u Q the speed is conserved but the path bends
U = gen.uq()
tr = nu.geodesic_integrate(U, [0.0, 0.0], [0.6, 0.8], 1000, 1e-3)
print("uQ geodesic end point:     ", tr.X[-1], " F drift:", f"{tr.drift:.1e}")

for name, Mv in (("euclidean", gen.euclidean()), ("quartic", M)):
    vol = nu.bh_volume_sigma(Mv, [0.0, 0.0])
    print(f"{name}: Vol{{F<1}} = {vol.volume:.10f}, sigma = {vol.sigma:.10f} (est. error {vol.error:.1e})")

# F = u^(1/4) F0 gives y^i d_i ln sigma = (1/2) y1 / (1 + x1)
x, y = np.array([0.1, 0.2]), np.array([0.6, 0.8])
s = nu.s_curvature_numeric(U, x, y)
print(f"uQ: S = {s.S:.6f}, volume term = {s.volume_term:.8f} (expected {0.5 * y[0] / (1 + x[0]):.8f})")

print("Funk metric residuals:", {k: f"{v:.1e}" for k, v in nu.funk_validate(50).items()})
