"""Spreading speeds, their lower bound and the effect of the period.

Run: python3 demos/03_speed_and_period.py
"""
import math

from schwarzeig import CoefficientSet1D, cell_mean, effective_diffusivity_1d, spreading_speed
from schwarzeig.experiments import period_scan

c = CoefficientSet1D.from_exprs(mu="1 + cos(2*pi*x)", a="2 + cos(2*pi*x)", n=256)
s = spreading_speed(c)
D = effective_diffusivity_1d(c.a)
bound = 2 * math.sqrt(D * cell_mean(c.mu))
print(f"c* = {s.c_star:.8f} at lambda* = {s.lambda_star:.6f} ({s.evaluations} eigen-solves)")
print(f"effective diffusivity D = {D:.10f} (sqrt 3 = {math.sqrt(3):.10f})")
print(f"lower bound 2 sqrt(D mean(mu)) = {bound:.8f}")

# Shrinking the period homogenizes the environment: k decreases with L and
# tends to -mean(mu) - lambda^2 D as L -> 0.
rep = period_scan(a="2 + cos(2*pi*x)", mu="1 + cos(2*pi*x)", lam=1.0, L_list=(0.01, 0.1, 0.5, 1, 2, 4))
for L, k in zip(rep.config["L"], rep.meta["k"]):
    print(f"L={L:<5g} k = {k:.8f}")
print(rep.summary())
