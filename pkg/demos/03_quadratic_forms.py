"""Quadratic forms: Hardy inequality, ground-state representation, sharpness.

Run with ``python demos/03_quadratic_forms.py``.
"""
from hardykernels import (
    CouplingParams,
    TestFunction,
    dirichlet_form,
    gsr_residual,
    hardy_form,
    kappa_crit,
    semigroup_form,
    standard_suite,
)
from hardykernels.forms import hardy_functional, sharpness_witness

zeta, alpha = 1.0, 1.0
kc = kappa_crit(2 * zeta + 1, alpha)

# At the critical coupling the Hardy functional E[u] - kappa_c V[u] stays
# nonnegative on every test function.
for u in standard_suite():
    e = dirichlet_form(zeta, alpha, u).value
    print(f"{u.kind:18s} E = {e:.6f}  (E - kappa_c V) / E = {hardy_functional(zeta, alpha, kc, u) / e:.4f}")

# Slightly above it a log-flattened ground-state bump makes it negative.
u, value = sharpness_witness(zeta, alpha, factor=1.05)
print("witness at 1.05 kappa_c:", u.to_dict(), "value", value)

# The ground-state representation writes the Hardy form as a positive
# weighted double integral; the residual compares the two expressions.
u = TestFunction.smooth_bump(1.5, 1.0)
for eta in (0.5, -0.5):
    p = CouplingParams(zeta, alpha, eta)
    print(f"eta = {eta:5}: Hardy form {hardy_form(p, u).value:.8f}, GSR residual {gsr_residual(p, u):.1e}")

# The form is the t -> 0 limit of (u - P_t u, u) / t.
p = CouplingParams(zeta, alpha, 0.0)
for t in (0.1, 0.01, 0.001):
    print(f"t = {t}: semigroup form {semigroup_form(p, t, u).value:.6f}")
print("Dirichlet form:", dirichlet_form(zeta, alpha, u).value)
