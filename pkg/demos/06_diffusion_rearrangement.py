"""Rearranging the diffusion coefficient.

The harmonic rearrangement a_* = 1 / (1/a)* moves the low-diffusion zones
together.  Paired with the growth rate (mu a)* / a_* it never raises k.

Run: python3 demos/06_diffusion_rearrangement.py
"""
from schwarzeig import CoefficientSet1D, GridSpec1D, harmonic_rearrange, k_lambda, sample, schwarz

spec = GridSpec1D(1.0, 256)
a = sample("2 + cos(2*pi*x) + 0.6*sin(4*pi*x)", spec)
mu = sample("1 + sin(6*pi*x)", spec)
a_s = harmonic_rearrange(a)
mu_s = schwarz(mu * a) / a_s
for lam in (0.0, 1.0, 2.0):
    k = k_lambda(CoefficientSet1D.build(mu, a), lam)
    ks = k_lambda(CoefficientSet1D.build(mu_s, a_s), lam)
    print(f"lambda={lam:g}: k(a, mu) = {k:.6f}  k(a_*, (mu a)*/a_*) = {ks:.6f}")
