"""Kernels perturbed by a Hardy potential and their two-sided envelopes.

Run with ``python demos/02_hardy_perturbation.py``. The first call for a
new eta builds a Duhamel table, which takes a minute or two; tables are
cached under ~/.cache/hardykernels.
"""
import numpy as np

from hardykernels import (
    CouplingParams,
    EvalPoint,
    coupling_psi,
    eta_from_kappa,
    kappa_crit,
    perturbed_envelope,
    perturbed_heat,
)

# The coupling kappa of the potential kappa / r^alpha is parametrised by the
# exponent eta of the invariant function r^(-eta).
zeta, alpha = 1.0, 1.0
print("critical coupling:", kappa_crit(2 * zeta + 1, alpha))
for eta in (-0.4, 0.5, 1.0):
    k = coupling_psi(zeta, alpha, eta)
    print(f"eta = {eta:5}: kappa = {k:+.6f}, back to eta = {eta_from_kappa(zeta, alpha, k):.12g}")

# Attractive (eta > 0) and repulsive (eta < 0) potentials change the kernel
# near the origin by the factor (1 ^ r/t^(1/alpha))^(-eta) in each variable.
rs = 2.0 ** np.arange(-6, 3)
for eta in (0.5, -0.4):
    p = CouplingParams(zeta, alpha, eta)
    ratios = []
    for r in rs:
        pt = EvalPoint(1.0, r, 1.0)
        ratios.append(perturbed_heat(p, pt).value / perturbed_envelope(p, pt).upper)
    print(f"eta = {eta:5}: kernel / envelope over r in [1/64, 4]:", np.round(ratios, 3))

# For alpha = 2 the perturbed kernel is again a Bessel kernel in closed form,
# and the envelope uses two Gaussian constants.
p = CouplingParams(zeta, 2.0, 0.5)
pt = EvalPoint(1.0, 0.1, 2.0)
env = perturbed_envelope(p, pt)
v = perturbed_heat(p, pt).value
print(f"alpha = 2: kernel / lower comparison {v / env.lower:.3f}, kernel / upper comparison {v / env.upper:.3f}")
