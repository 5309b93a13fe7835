"""Frozen reference values.

Each constant was computed once, independently of the package (closed
forms, or mpmath at 30 digits), and pasted here.  Tests compare against
these literals so a regression in shared code cannot move both sides.
"""

# closed forms
SQRT_PI_OVER_2_OVER_E = 0.46106850444789454   # K_{1/2}(1) = sqrt(pi/2) e^-1
EXP_MINUS_1 = 0.36787944117144233             # phi(1) at a = 0
HALF_OVER_SQRT_PI = 0.28209479177387814       # C_a at a = 0; also (4 pi)^-1/2
INV_4PI = 0.07957747154594767                 # R_2 on R^3 at |p| = 1
INV_2PI = 0.15915494309189535                 # rtilde_1 on R^1 at x = 1
INV_PI = 0.3183098861837907                   # Poisson kernel on R^1, a = 0, at (0, 1)
INV_8PI = 0.039788735772973836                # R_2 on H^1 at gauge 1 is 1/(8 pi)

# mpmath: besselk
K_03_AT_2 = 0.11603697434811926
K_025_AT_20_SCALED = 0.9954345230382866       # K_{1/4}(20) e^20 sqrt(40/pi)

# mpmath (30 digits): phi'(0) = -int_0^inf s^-alpha phi(s) ds
PHI_PRIME0 = {-0.4: -1.9982279657922557, 0.4: -0.702337215344088, 0.5: -0.6759782400672847}
PHI_AT_1_A_HALF = 0.3745831474608376

# mpmath: Heisenberg heat kernel at t = 1, keyed by (r, z)
H1_UNIT = {
    (0.0, 0.0): 0.015625,
    (1.0, 0.0): 0.009844231993507695,
    (0.0, 1.0): 0.01344312045603133,
    (1.0, 1.0): 0.00892327837567132,
    (0.5, 2.0): 0.008358403709014021,
}
