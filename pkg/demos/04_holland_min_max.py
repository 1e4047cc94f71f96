"""The nonsymmetric eigenvalue as a saddle value of a symmetric functional.

With phi and phi~ the direct and adjoint eigenfunctions, the pair
alpha = sqrt(phi phi~) and beta = log(phi / phi~) / 2 turns the eigenproblem
into a min over alpha of a max over beta.  Perturbing beta can only lower
the inner value; perturbing alpha can only raise the outer one.

Run: python3 demos/04_holland_min_max.py
"""
import numpy as np

from schwarzeig import (
    CoefficientSet1D,
    J_functional,
    assemble,
    holland_max_check,
    holland_transform,
    principal_eig,
)

c = CoefficientSet1D.from_exprs(mu="1 + cos(2*pi*x)", a="2 + sin(2*pi*x)", q="0.8", n=256)
p = principal_eig(assemble(c, 0.0))
hp = holland_transform(p)
print(f"k0                  = {p.k:.12f}")
print(f"J(alpha, beta)      = {J_functional(c, hp.alpha, hp.beta):.12f}")
print(f"max formula at beta = {holland_max_check(c, hp.beta):.12f}")
print(f"transform residual  = {hp.residual:.1e}")

rng = np.random.default_rng(0)
x = c.spec.x
for scale in (0.01, 0.1, 1.0):
    bump = scale * np.sin(2 * np.pi * (x + rng.uniform()))
    lower = holland_max_check(c, hp.beta + bump)
    print(f"beta perturbed by {scale:<4g}: max formula = {lower:.10f} (<= k0: {lower <= p.k + 1e-9})")
