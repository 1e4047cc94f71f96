"""Concentrating a fragmented habitat lowers the principal eigenvalue.

The Schwarz rearrangement keeps the distribution of growth-rate values and
gathers the best ones in one block at the middle of the cell.  A lower k
means faster population growth.

Run: python3 demos/02_concentrated_habitat.py
"""
from schwarzeig import CoefficientSet1D, GridSpec1D, k_lambda, sample, same_distribution, schwarz, spreading_speed

spec = GridSpec1D(1.0, 128)
patchy = sample("2*indicator(0, 0.125) + 2*indicator(0.5, 0.625) - 0.3", spec)
gathered = schwarz(patchy)
print("same distribution of values:", same_distribution(patchy, gathered))
print("gathered profile (every 8th node):", gathered.values[::8].tolist())

for lam in (0.0, 1.0, 2.0):
    k_patchy = k_lambda(CoefficientSet1D.build(patchy), lam)
    k_gathered = k_lambda(CoefficientSet1D.build(gathered), lam)
    print(f"lambda={lam:g}: k(patchy) = {k_patchy:.6f}  k(gathered) = {k_gathered:.6f}")

c_patchy = spreading_speed(CoefficientSet1D.build(patchy)).c_star
c_gathered = spreading_speed(CoefficientSet1D.build(gathered)).c_star
print(f"spreading speed: patchy {c_patchy:.6f}, gathered {c_gathered:.6f}")
