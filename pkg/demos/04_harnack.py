"""A Harnack experiment for the nonlocal operator on the Heisenberg group.

Run:  python3 demos/04_harnack.py      (under a minute)

Nonnegative bump data are placed outside the gauge ball Omega; the discrete
Dirichlet problem L^(1/2) u = 0 in Omega is solved; and sup/inf of u is
recorded on every ball B(x, r) whose double B(x, 2r) stays in Omega.  The
Harnack inequality predicts a bound independent of the data, the ball and
the scale, so the quotients should stay bounded across random instances and
be unchanged by a dilation of the whole set-up.
"""
from subfrac import heisenberg1
from subfrac.harnack import HarnackConfig, campaign, dilation_stress

cfg = HarnackConfig(heisenberg1())
res = campaign(cfg, instances=12, seed=1)
print(f"{len(res.reports)} instances, {len(res.reports[0].records)} balls each")
print(f"maximum principle held on every instance: {res.max_principle_ok}")
print(f"smallest interior value: {res.min_interior:.3e}")
print("largest sup/inf per instance:")
print("  " + "  ".join(f"{r.max_quotient:.2f}" for r in res.reports))
print(f"overall maximum: {res.max_quotient:.2f}")
print(f"bound on the part of the operator dropped by truncation: {res.tail_bound:.3e}")

out = dilation_stress(cfg, (1.0, 0.5, 2.0), instances=4, seed=1)
print("\nSame data and lattice carried by dilations:")
for lam, v in out["lambdas"].items():
    print(f"  lambda = {lam}: max quotient {v['max_quotient']:.6f}, drift {v['drift']:.1e}")
