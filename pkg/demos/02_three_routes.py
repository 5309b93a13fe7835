"""Three independent routes to L^(alpha/2) u on the Heisenberg group.

Run:  python3 demos/02_three_routes.py      (about a minute)

1. spectral: diagonalise the discrete sub-Laplacian and take eigenvalue powers;
2. pv: the principal-value singular integral with the kernel K = (2/alpha) R-tilde;
3. riesz: apply the discrete sub-Laplacian to the Riesz potential R_(2-alpha) * u.

None of them shares numerical machinery with the others, so agreement is a
real check.  On the line a zero-padded FFT gives a fourth, exact reference.
"""
import numpy as np

from subfrac import GridFunction, Lattice, euclidean, heisenberg1
from subfrac.fractional import cross_validate

print("Line, u = exp(-x^2), alpha = 1")
lat = Lattice.box([0.05], [400])
u = GridFunction.sample(lat, lambda x: np.exp(-x[..., 0] ** 2))
rep = cross_validate(euclidean(1), 1.0, u, tolerance=0.03)
for (a, b), d in sorted(rep.discrepancies.items()):
    print(f"  {a:8s} vs {b:8s}: relative l2 {d:.3%}")

print("\nHeisenberg group, 25^3 lattice, u = exp(-x^2 - y^2 - z^2/2)(1 + y/5)")
lat = Lattice.box([0.2, 0.2, 0.4], [12, 12, 12])
u = GridFunction.sample(lat, lambda x: np.exp(-(x[..., 0] ** 2 + x[..., 1] ** 2) - 0.5 * x[..., 2] ** 2)
                        * (1 + 0.2 * x[..., 1]))
for alpha in (0.5, 1.0, 1.5):
    rep = cross_validate(heisenberg1(), alpha, u, tolerance=0.07)
    pairs = ", ".join(f"{a}/{b} {d:.2%}" for (a, b), d in sorted(rep.discrepancies.items()))
    print(f"  alpha = {alpha}: {pairs}")
    centre = tuple(s // 2 for s in lat.shape)
    vals = ", ".join(f"{k} {v.values[centre]:.4f}" for k, v in sorted(rep.routes.items()))
    print(f"    value at the identity: {vals}")
