"""The weighted extension problem and its Neumann trace.

Run:  python3 demos/03_extension_and_trace.py

For a in (-1, 1) the lift v(x, y) = phi(theta y^(1-a) L^((1-a)/2)) u solves
the degenerate equation y^a L v = d_y(y^a d_y v) on G x (0, inf), with
v(., 0) = u.  This script shows
  * that the spectral lift equals the Poisson-kernel convolution;
  * that the weighted residual falls at second order;
  * that y^a d_y v at y -> 0 recovers a multiple of L^((1-a)/2) u.
"""
import numpy as np

from subfrac import GridFunction, Lattice, euclidean, params_from_a
from subfrac.extension import (even_reflect, lift_poisson, lift_spectral, neumann_trace, residual_norm,
                               staggered_ygrid)
from subfrac.fractional import comparison_region, relative_l2
from subfrac.special import phi
from subfrac.spectral import apply_fractional_spectral, assemble_sublaplacian, eigendecompose

E1 = euclidean(1)

print("The extension profile phi for a few weights (phi(0) = 1, decreasing)")
t = np.array([0.0, 0.5, 1.0, 2.0, 4.0])
for a in (-0.5, 0.0, 0.5):
    print(f"  a = {a:+.1f}: " + "  ".join(f"{v:.4f}" for v in phi(params_from_a(a), t)))

lat = Lattice.box([0.05], [200])
u = GridFunction.sample(lat, lambda x: np.exp(-x[..., 0] ** 2))
S = eigendecompose(assemble_sublaplacian(E1, lat))
m = comparison_region(lat)
print("\nSpectral lift vs Poisson convolution on the line, u = exp(-x^2)")
for a in (-0.4, 0.0, 0.4):
    ys = [0.25, 0.5, 1.0]
    vs, vp = lift_spectral(S, a, u, ys), lift_poisson(E1, a, u, ys)
    errs = [relative_l2(vs.values[k][m], vp.values[k][m]) for k in range(3)]
    print(f"  a = {a:+.1f}: " + ", ".join(f"y={y}: {e:.2%}" for y, e in zip(ys, errs)))

print("\nResidual of the reflected lift (a = 0.4) under grid refinement")
prev = None
for h in (0.2, 0.1, 0.05):
    latk = Lattice.box([h], [int(round(8 / h))])
    uk = GridFunction.sample(latk, lambda x: np.exp(-x[..., 0] ** 2))
    op = assemble_sublaplacian(E1, latk)
    v = lift_spectral(eigendecompose(op), 0.4, uk, staggered_ygrid(h, 1.5))
    r, _ = residual_norm(E1, even_reflect(v), 0.25, op)
    order = "" if prev is None else f"  observed order {np.log2(prev / r):.2f}"
    print(f"  h = {h:5}: residual {r:.3e}{order}")
    prev = r

print("\nNeumann trace at a = 0: y -> 0 limit of d_y v against -L^(1/2) u")
v = lift_spectral(S, 0.0, u, [0.0, 5e-4, 1e-3])
tr = neumann_trace(v, [1e-3, 5e-4])
want = -apply_fractional_spectral(S, 0.5, u).values
print(f"  relative l2 error {relative_l2(tr.derivative_limit, want):.2e}")
print("  l2 norm of the weighted difference quotient at each level:")
for eps, norm in tr.table():
    print(f"    eps = {eps:.0e}: {norm:.6f}")
