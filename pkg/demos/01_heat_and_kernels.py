"""Heat kernel and Riesz kernels on the Heisenberg group.

Run:  python3 demos/01_heat_and_kernels.py

The Heisenberg group has homogeneous dimension 4, so the heat kernel obeys
lambda^4 h(lambda^2 t, delta_lambda x) = h(t, x), and the Green function R_2
decays like gauge^-2.  This script prints both facts from the numbers.
"""
import numpy as np

from subfrac import dilate, gauge, heisenberg1, semicheck
from subfrac.heat import HeatProvider, heat_eval
from subfrac.kernels import gauge_sphere_flux, riesz_eval, riesz_tilde_eval

H = heisenberg1()
P = HeatProvider(H)

print("Heat kernel at t = 1")
for p in ([0, 0, 0], [1, 0, 0], [0, 0, 1], [1, 1, 1]):
    print(f"  h(1, {p}) = {heat_eval(P, 1.0, p):.8f}")
print("  (the value at the identity is 1/64 = 0.015625)")

p = np.array([0.6, -0.3, 0.8])
print("\nScaling: lambda^4 h(lambda^2, delta_lambda p) should not depend on lambda")
for lam in (0.5, 1.0, 2.0, 4.0):
    print(f"  lambda = {lam:3}:  {lam ** 4 * heat_eval(P, lam ** 2, dilate(H, lam, p)):.10f}")
print(f"Symmetry under (x, y, z) -> (-x, -y, z): {heat_eval(P, 1.0, semicheck(H, p)):.10f}")

print("\nGreen function R_2 along a dilation orbit (R_2 * gauge^2 is constant)")
for lam in (0.5, 1.0, 2.0):
    q = dilate(H, lam, p)
    print(f"  gauge = {gauge(H, q):.3f}:  R_2 = {riesz_eval(H, 2.0, q):.6f},  R_2 gauge^2 = "
          f"{riesz_eval(H, 2.0, q) * gauge(H, q) ** 2:.6f}")
print(f"R_2 at (1,0,0) times 8 pi: {riesz_eval(H, 2.0, [1, 0, 0]) * 8 * np.pi:.8f}")

fn = lambda q: riesz_eval(H, 2.0, q, fast=True)
print("\nFlux of the horizontal gradient of R_2 through gauge spheres (expected -1)")
for r in (0.5, 1.0, 2.0):
    print(f"  radius {r}: {gauge_sphere_flux(H, fn, r):+.6f}")

print("\nThe kernel of the singular-integral form of L^(alpha/2), degree -4 - alpha")
for alpha in (0.5, 1.0, 1.5):
    a, b = riesz_tilde_eval(H, alpha, [p, dilate(H, 2.0, p)])
    print(f"  alpha = {alpha}: log2 ratio under dilation by 2 = {np.log2(b / a):+.4f}")
