"""Free radial kernels: closed forms, subordination and a spectral check.

Run with ``python demos/01_free_kernels.py``.
"""
import numpy as np

from hardykernels import (
    CouplingParams,
    EvalPoint,
    bessel_heat_2,
    cauchy_heat_closed,
    spectral_heat,
    subordinated_heat,
)

# For alpha = 2 the kernel is a modified Bessel function times a Gaussian.
# For alpha = 1 it has a hypergeometric closed form. Everything else is
# obtained by subordinating the alpha = 2 kernel to a one-sided stable law.

zeta = 1.0
pt = EvalPoint(1.0, 0.8, 1.3)
print("alpha = 2, closed form:", bessel_heat_2(zeta, pt).value)

# The subordination route is generic, so at alpha = 1 it can be compared
# with the closed form.
a = subordinated_heat(CouplingParams(zeta, 1.0), pt)
b = cauchy_heat_closed(zeta, pt)
print(f"alpha = 1: subordination {a.value:.15g}, closed form {b.value:.15g}")

# The Hankel transform of exp(-t k^alpha) is an independent route that
# only uses Bessel functions J.
for alpha in (0.5, 1.5):
    sub = subordinated_heat(CouplingParams(zeta, alpha), pt).value
    spec = spectral_heat(zeta, alpha, pt).value
    print(f"alpha = {alpha}: subordination {sub:.12g}, spectral {spec:.12g}, rel diff {abs(sub / spec - 1):.1e}")

# Scaling: p(t, r, s) = t^(-(2 zeta + 1) / alpha) p(1, r t^(-1/alpha), s t^(-1/alpha)).
alpha = 1.5
p = CouplingParams(zeta, alpha)
for t in (0.1, 1.0, 10.0):
    lhs = subordinated_heat(p, EvalPoint(t, 0.8, 1.3)).value
    rhs = t ** (-(2 * zeta + 1) / alpha) * subordinated_heat(p, EvalPoint(t, 0.8, 1.3).scaled(alpha)).value
    print(f"t = {t:5}: scaling defect {abs(lhs / rhs - 1):.1e}")

# Heavy tails: for alpha < 2 the kernel decays like a power of s far away.
s = 2.0 ** np.arange(2, 9)
vals = [subordinated_heat(p, EvalPoint(1.0, 1.0, x)).value for x in s]
slopes = np.diff(np.log(vals)) / np.diff(np.log(s))
print("log-log slopes in s:", np.round(slopes, 3), "(tail exponent -(2 zeta + 1 + alpha) =", -(2 * zeta + 1 + alpha), ")")
