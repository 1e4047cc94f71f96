"""Dispersion curves ``lam -> k_lam`` and KPP spreading speeds.

The speed in a fixed direction is ``c* = min_{lam > 0} -k_lam / lam``.
Because ``lam -> k_lam`` is concave and ``k_0 < 0``, ``g(lam) = -k_lam / lam``
is strictly quasi-convex, so a bracketing search is reliable.  The golden
section result is polished with the stationarity condition
``k_lam = lam dk/dlam``, whose derivative comes from the adjoint eigenvector.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .gridfn import GridFn1D, cell_mean, cell_mean2d
from .operators import (
    CoefficientSet1D,
    SolverError,
    assemble,
    dk_dlambda,
    k_lambda,
    principal_eig,
)

__all__ = [
    "NoInvasionError",
    "DispersionCurve",
    "SpeedResult",
    "dispersion_curve",
    "spreading_speed",
    "j_shifted",
    "drift_shift",
    "large_drift_limit_diagonal",
    "LAMBDA_MAX",
]

LAMBDA_MAX = 1e6
_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class NoInvasionError(ValueError):
    """Raised when ``k_0 >= 0``: the population does not persist, no positive speed."""


@dataclass(frozen=True)
class DispersionCurve:
    direction: object
    lams: tuple
    ks: tuple
    residuals: tuple
    errors: tuple = ()

    def concavity_defect(self) -> float:
        """Largest amount by which an interior point falls below its chord."""
        lam = np.asarray(self.lams, dtype=float)
        k = np.asarray(self.ks, dtype=float)
        ok = np.isfinite(k)
        lam, k = lam[ok], k[ok]
        worst = 0.0
        for i in range(1, lam.size - 1):
            t = (lam[i] - lam[i - 1]) / (lam[i + 1] - lam[i - 1])
            chord = (1 - t) * k[i - 1] + t * k[i + 1]
            worst = max(worst, chord - k[i])
        return worst

    def is_concave(self, tol: float = 1e-8) -> bool:
        return self.concavity_defect() <= tol

    def to_rows(self):
        return [{"lambda": l, "k": k, "residual": r} for l, k, r in zip(self.lams, self.ks, self.residuals)]


@dataclass(frozen=True)
class SpeedResult:
    c_star: float
    lambda_star: float
    bracket: tuple
    evaluations: int
    k_star: float = math.nan


def _direction(c, e):
    if isinstance(c, CoefficientSet1D):
        return 1.0 if e is None else float(e)
    if e is None:
        raise ValueError("a 2D coefficient set needs a direction e")
    return (float(e[0]), float(e[1]))


def dispersion_curve(c, e=None, lam_grid: Sequence[float] = (0, 0.25, 0.5, 1, 2, 5),
                     tol: Optional[float] = None) -> DispersionCurve:
    """One principal eigenvalue per ``lam``; solver failures are recorded, not raised."""
    lams = [float(v) for v in lam_grid]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lambda grid must be strictly increasing")
    e = _direction(c, e)
    ks, res, errs = [], [], []
    for lam in lams:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                p = principal_eig(assemble(c, lam, e), tol, adjoint=False)
            ks.append(p.k)
            res.append(p.residual_direct)
            errs.append("")
        except SolverError as exc:
            ks.append(math.nan)
            res.append(math.nan)
            errs.append(str(exc))
    return DispersionCurve(e, tuple(lams), tuple(ks), tuple(res), tuple(errs))


def spreading_speed(c, e=None, tol: float = 1e-8, eig_tol: Optional[float] = None,
                    bracket: Optional[tuple] = None, lam_max: float = LAMBDA_MAX) -> SpeedResult:
    """``c* = min_{lam > 0} -k_{lam e} / lam`` by golden section plus a derivative polish.

    The bracket is found by geometric expansion from ``lam = 1`` unless an
    explicit ``bracket=(lo, hi)`` is given (useful in 2D, where large
    ``lam`` breaks stencil positivity).
    """
    e = _direction(c, e)
    count = [0]

    def k_at(lam):
        count[0] += 1
        return k_lambda(c, lam, e, eig_tol)

    k0 = k_at(0.0)
    if k0 >= 0:
        raise NoInvasionError(f"no KPP invasion regime: k_0 = {k0:.6g} >= 0")

    cache = {}

    def g(lam):
        if lam not in cache:
            cache[lam] = -k_at(lam) / lam
        return cache[lam]

    if bracket is None:
        lo, mid, hi = 0.5, 1.0, 2.0
        while g(hi) < g(mid):
            lo, mid, hi = mid, hi, 2.0 * hi
            if hi > lam_max:
                raise SolverError(f"bracket expansion exceeded lambda_max = {lam_max:g}")
        while g(lo) < g(mid):
            lo, mid, hi = 0.5 * lo, lo, mid
    else:
        lo, hi = float(bracket[0]), float(bracket[1])
        if not 0 < lo < hi:
            raise ValueError("bracket must satisfy 0 < lo < hi")

    a, b = lo, hi
    x1 = b - _PHI * (b - a)
    x2 = a + _PHI * (b - a)
    while b - a > tol * 0.5 * (a + b):
        if g(x1) <= g(x2):
            b, x2 = x2, x1
            x1 = b - _PHI * (b - a)
        else:
            a, x1 = x1, x2
            x2 = a + _PHI * (b - a)
    lam_star = min((x1, x2), key=g)

    # stationarity h(lam) = k - lam k' changes sign at the minimizer
    def h(lam):
        count[0] += 1
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = principal_eig(assemble(c, lam, e), eig_tol)
        return p.k - lam * dk_dlambda(p)

    # golden section on a flat minimum is limited by eigenvalue noise, so
    # widen the window around lam_star until h changes sign
    try:
        d = 1e-6 * lam_star
        while d < lam_star:
            wa, wb = max(lam_star - d, 0.5 * lam_star), lam_star + d
            ha, hb = h(wa), h(wb)
            if ha * hb < 0:
                lam_star = brentq(h, wa, wb, xtol=1e-14 * wb, rtol=4 * np.finfo(float).eps)
                break
            d *= 10.0
    except SolverError:
        pass
    k_star = k_at(lam_star)
    return SpeedResult(-k_star / lam_star, lam_star, (lo, hi), count[0], k_star)


def drift_shift(c, e=None) -> float:
    """Cell mean of ``e.A e`` (of ``a`` in 1D), the coefficient of ``lam^2`` at constant ``mu``."""
    if isinstance(c, CoefficientSet1D):
        e = _direction(c, e)
        return e * e * cell_mean(c.a)
    e1, e2 = _direction(c, e)
    return cell_mean2d(c.a11 * (e1 * e1) + c.a12 * (2 * e1 * e2) + c.a22 * (e2 * e2))


def j_shifted(c, e, lam: float, tol: Optional[float] = None) -> float:
    """``k_{lam e} + lam^2 mean(e.A e)``.

    For ``A = I`` and a unit ``e`` the shift is ``lam^2``; for the diagonal
    direction ``e = (1, -1)`` it is ``2 lam^2``, which removes the exact
    ``lam``-dependence of ``k`` for a growth rate of the form ``mu0(x + y)``.
    """
    return k_lambda(c, lam, e, tol) + lam * lam * drift_shift(c, e)


def large_drift_limit_diagonal(mu0: GridFn1D, tol: Optional[float] = None):
    """Limits of ``j_{lam e}`` as ``lam -> infinity`` for ``e = (1, -1)``, ``A = I``.

    Returns ``(lim for mu0(x + y), lim for mu0(x))``.  Along the drift the
    admissible eigenfunctions are constant on the lines ``x - y = const``.
    For ``mu0(x + y)`` these are functions of ``x + y``, giving
    ``2 k_0(mu0 / 2)``.  For ``mu0(x)`` the constraint averages ``mu0`` and
    the limit is ``-mean(mu0)``.
    """
    if not isinstance(mu0, GridFn1D):
        raise ValueError("unsupported structure: expected a 1D profile mu0")
    half = CoefficientSet1D.build(mu0 * 0.5)
    return 2.0 * k_lambda(half, 0.0, None, tol), -cell_mean(mu0)
