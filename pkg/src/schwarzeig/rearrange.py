"""Schwarz rearrangement, Steiner symmetrization and the harmonic rearrangement.

Placement rule on an even grid of ``n`` nodes with centre ``c = n // 2``:
sort the values ascending, put the largest at index ``c`` and then fill
``c-1, c+1, c-2, c+2, ...`` (left first).  The result is nondecreasing on
indices ``1..c``, nonincreasing on ``c..n-1``, has its minimum at index 0 and
is symmetric about ``c`` up to one grid cell.  Output values are always an
exact permutation of the input values.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .gridfn import GridFn1D, GridFn2D

__all__ = [
    "schwarz_permutation",
    "schwarz",
    "schwarz_values",
    "steiner",
    "harmonic_rearrange",
    "same_distribution",
    "dirichlet_energy",
]


def _placement(n: int) -> np.ndarray:
    # target index for the k-th largest value
    if n % 2:
        raise ValueError(f"rearrangement needs an even number of nodes, got {n}")
    c = n // 2
    order = [c]
    for k in range(1, c):
        order += [c - k, c + k]
    order.append(0)
    return np.array(order)


def schwarz_permutation(keys) -> np.ndarray:
    """Index array ``p`` such that ``keys[p]`` is the Schwarz form of ``keys``."""
    keys = np.asarray(keys)
    n = keys.shape[0]
    ranked = np.argsort(keys, kind="stable")[::-1]  # largest first
    perm = np.empty(n, dtype=int)
    perm[_placement(n)] = ranked
    return perm


def schwarz_values(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return values[schwarz_permutation(values)]


def schwarz(f: GridFn1D) -> GridFn1D:
    """Periodic Schwarz rearrangement of a 1D grid function."""
    return GridFn1D(f.spec, schwarz_values(f.values))


def steiner(f: GridFn2D, order: Sequence[str] = ("x", "y")) -> GridFn2D:
    """Successive Schwarz rearrangements along the axes in ``order``.

    Along ``"x"`` every slice ``x -> f(x, y_j)`` is rearranged, then along
    ``"y"`` every slice ``y -> f(x_i, y)``.  The result depends on the order.
    """
    order = tuple(order)
    if sorted(order) != ["x", "y"]:
        raise ValueError(f"order must list 'x' and 'y' exactly once, got {order}")
    v = np.array(f.values)
    for axis in order:
        if axis == "x":
            v = np.stack([schwarz_values(v[:, j]) for j in range(v.shape[1])], axis=1)
        else:
            v = np.stack([schwarz_values(v[i, :]) for i in range(v.shape[0])], axis=0)
    return GridFn2D(f.spec, v)


def harmonic_rearrange(a: GridFn1D) -> GridFn1D:
    """``a_* = 1 / (1/a)^*``, computed as a permutation of ``a`` itself.

    Ordering by ``1/a`` ascending is ordering by ``a`` descending, so the
    smallest diffusivity lands in the centre of the cell and the output is an
    exact permutation of the input values.
    """
    if np.any(a.values <= 0):
        raise ValueError("harmonic rearrangement needs a strictly positive coefficient")
    perm = schwarz_permutation(-a.values)
    return GridFn1D(a.spec, a.values[perm])


def same_distribution(f, g) -> bool:
    if f.spec != g.spec:
        raise ValueError("grid functions live on different grids")
    return bool(np.array_equal(np.sort(f.values, axis=None), np.sort(g.values, axis=None)))


def dirichlet_energy(f: GridFn1D) -> float:
    """Periodic forward-difference energy ``sum (f[i+1]-f[i])^2 / h``."""
    d = np.roll(f.values, -1) - f.values
    return float(np.sum(d * d) / f.spec.h)
