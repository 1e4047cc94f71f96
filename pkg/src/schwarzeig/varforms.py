"""Variational characterizations of the principal eigenvalue.

Everything here is written so that the identities hold exactly on the grid,
not only in the limit ``h -> 0``.  The key object is the bilinear pairing

    J(alpha, beta) = <alpha e^{-beta}, M (alpha e^{beta})> / <alpha, alpha>

for the assembled matrix ``M``.  In the continuum this equals

    int grad(alpha) A grad(alpha) - int (mu + grad(beta) A grad(beta)
        + q.grad(beta) - div(q)/2) alpha^2,

divided by ``int alpha^2``.  On the grid, ``J(., beta)`` is the Rayleigh
quotient of the symmetric matrix ``sym(e^{-beta} M e^{beta})`` and is concave
in ``beta``.  Its saddle point is the Holland pair built from the direct and
adjoint eigenvectors.  Its off-diagonal weights carry the ``beta``-dependent
potential, which matches the continuum zero-order modification to
``O(h^2)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .gridfn import GridFn1D, GridFn2D, cell_mean
from .operators import (
    CoefficientSet1D,
    CoefficientSet2D,
    EigenPair,
    OperatorMatrix,
    assemble,
    gradient_form,
    principal_eig,
)

__all__ = [
    "HollandPair",
    "CellProblemSolution",
    "rayleigh",
    "effective_diffusivity_1d",
    "effective_diffusivity_nd",
    "holland_transform",
    "J_functional",
    "beta_max",
    "min_formula_1d",
    "thm21_functional_1d",
    "holland_max_check",
    "symmetrized",
]


def _vec(f) -> np.ndarray:
    return f.flat() if isinstance(f, GridFn2D) else np.asarray(f.values)


@dataclass(frozen=True, eq=False)
class HollandPair:
    """``alpha = sqrt(phi phi~)`` with mean(alpha^2) = 1, ``beta = log(phi/phi~)/2`` mean zero."""

    alpha: object
    beta: object
    residual: float


@dataclass(frozen=True, eq=False)
class CellProblemSolution:
    chi: object
    D: float
    residual: float


# --------------------------------------------------------------------------
# Rayleigh quotient and effective diffusivity


def rayleigh(a, mu, alpha) -> float:
    """``(int a alpha'^2 - int mu alpha^2) / int alpha^2``.

    The gradient term uses the same forward differences and half-node
    coefficients as the assembled operator, so for ``alpha`` the principal
    eigenfunction of the self-adjoint problem this returns ``k_0`` to solver
    precision.  ``a`` may be a 2D scalar field, in which case ``A = a I``.
    """
    v = _vec(alpha)
    den = float(v @ v)
    if den == 0.0:
        raise ValueError("alpha is identically zero")
    if isinstance(a, GridFn2D):
        G, W = gradient_form(CoefficientSet2D.scalar(a, mu))
    else:
        G, W = gradient_form(a)
    g = G @ v
    return float(g @ (W @ g) - _vec(mu) @ (v * v)) / den


def effective_diffusivity_1d(a: GridFn1D) -> float:
    """Harmonic mean ``1 / mean(1/a)``."""
    if a.min() <= 0:
        raise ValueError("diffusion coefficient must be strictly positive")
    return 1.0 / cell_mean(1.0 / a)


def effective_diffusivity_nd(c, e=(1.0, 0.0)) -> CellProblemSolution:
    """Effective diffusivity of a 2D matrix field in direction ``e``.

    ``c`` is a :class:`CoefficientSet2D` (only ``a11, a12, a22`` are used).
    The corrector ``chi`` minimizes the discrete energy
    ``(G chi + g_e)^T W (G chi + g_e)``, where ``g_e`` holds the constant
    differences of ``x -> e.x``.  The stencil is the one used for the
    operator, so ``D`` is the minimized quadratic form itself.
    """
    e1, e2 = float(e[0]), float(e[1])
    spec = c.spec
    G, W = gradient_form(c)
    N = spec.size
    ge = np.concatenate([np.full(N, e1), np.full(N, e2), np.full(N, e1), np.full(N, e2)])
    K = (G.T @ W @ G).tocsc()
    rhs = -(G.T @ (W @ ge))
    chi = np.zeros(N)
    try:
        lu = spla.splu(K[1:, 1:].tocsc())
    except RuntimeError as exc:
        raise np.linalg.LinAlgError(f"singular cell problem: {exc}") from None
    chi[1:] = lu.solve(rhs[1:])
    chi -= chi.mean()
    grad = G @ chi + ge
    D = float(grad @ (W @ grad)) / N
    residual = float(np.abs(K @ chi - rhs).max())
    return CellProblemSolution(GridFn2D.from_flat(spec, chi), D, residual)


# --------------------------------------------------------------------------
# the pairing J and its saddle point


def symmetrized(M: OperatorMatrix, beta) -> OperatorMatrix:
    """``sym(e^{-beta} M e^{beta})`` as an operator on the same grid."""
    b = _vec(beta)
    m = M.matrix.tocoo()
    vals = m.data * np.exp(b[m.col] - b[m.row])
    X = sp.csr_matrix((vals, (m.row, m.col)), shape=m.shape)
    S = (0.5 * (X + X.T)).tocsr()
    return OperatorMatrix(S, M.spec, 0.0, M.direction, (S, S * 0, S * 0),
                          M.stencil_positive, M.fingerprint)


def _pairing(M: OperatorMatrix, a: np.ndarray, b: np.ndarray) -> float:
    u = a * np.exp(b)
    w = a * np.exp(-b)
    return float(w @ (M.matrix @ u)) / float(a @ a)


def holland_transform(p: EigenPair) -> HollandPair:
    """Change of variables ``alpha = sqrt(phi phi~)``, ``beta = ln(phi / phi~) / 2``.

    ``residual`` is the largest discrete flux divergence of
    ``alpha^2 (A grad beta + q / 2)``: the gradient of ``J(alpha, .)`` at
    ``beta``, scaled by ``|M|_inf max(alpha^2)``.
    """
    if p.phi_adj is None:
        raise ValueError("the eigenpair has no adjoint eigenfunction")
    phi, psi = _vec(p.phi), _vec(p.phi_adj)
    if phi.min() <= 0 or psi.min() <= 0:
        raise ValueError("eigenfunctions must be strictly positive")
    alpha = np.sqrt(phi * psi)
    alpha /= math.sqrt(float(np.mean(alpha * alpha)))
    beta = 0.5 * np.log(phi / psi)
    beta -= beta.mean()
    res = 0.0
    if p.operator is not None:
        g = _beta_gradient(p.operator, alpha, beta)
        scale = float(abs(p.operator.matrix).sum(axis=1).max()) * float((alpha * alpha).max())
        res = float(np.abs(g).max()) / scale
        wrap = p.operator.to_gridfn
    else:
        wrap = (lambda v: GridFn2D.from_flat(p.phi.spec, v)) if isinstance(p.phi, GridFn2D) \
            else (lambda v: GridFn1D(p.phi.spec, v))
    return HollandPair(wrap(alpha), wrap(beta), res)


def J_functional(c, alpha, beta, lam: float = 0.0, e=None) -> float:
    """Donsker-Varadhan pairing ``J(alpha, beta)`` for coefficients ``c``.

    Normalized by ``int alpha^2 / |C|``, so for ``alpha`` with
    ``mean(alpha^2) = 1`` this is the continuum ``J`` for the unit-mass
    ``alpha / sqrt(|C|)``.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        M = assemble(c, lam, e)
    return _pairing(M, _vec(alpha), _vec(beta))


def _offdiag(M: OperatorMatrix):
    m = M.matrix.tocoo()
    keep = m.row != m.col
    return m.row[keep], m.col[keep], m.data[keep]


def _beta_gradient(M: OperatorMatrix, a, b):
    # gradient of sum_{i != j} (-M_ij) a_i a_j exp(b_j - b_i) in b
    i, j, m = _offdiag(M)
    t = -m * a[i] * a[j] * np.exp(b[j] - b[i])
    n = a.size
    return np.bincount(j, t, n) - np.bincount(i, t, n)


def beta_max(M: OperatorMatrix, alpha, beta0=None, tol: float = 1e-14, maxiter: int = 100):
    """Maximize ``J(alpha, .)`` by Newton's method.

    The objective is concave in ``beta`` (strictly, up to constants) when
    ``M`` has nonpositive off-diagonal entries.  Returns ``(beta, J)`` with
    ``beta`` of mean zero.
    """
    a = _vec(alpha)
    n = a.size
    i, j, m = _offdiag(M)
    w = -m * a[i] * a[j]
    if np.any(w < 0):
        warnings.warn("positive off-diagonal entries: J(alpha, .) may not be concave", stacklevel=2)
    b = np.zeros(n) if beta0 is None else _vec(beta0).copy()

    def f(bb):
        t = w * np.exp(bb[j] - bb[i])
        return math.fsum(t), t

    F, t = f(b)
    for _ in range(maxiter):
        g = np.bincount(j, t, n) - np.bincount(i, t, n)
        if np.abs(g).max() <= tol * F:
            break
        s = t + 0.0
        H = sp.csr_matrix((np.concatenate([s, s, -s, -s]),
                           (np.concatenate([i, j, i, j]), np.concatenate([i, j, j, i]))),
                          shape=(n, n)).tocsc()
        d = np.zeros(n)
        d[1:] = spla.spsolve(H[1:, 1:], -g[1:])
        slope = float(g @ d)
        if slope >= 0:
            break
        step = 1.0
        while True:
            Fn, tn = f(b + step * d)
            if Fn <= F + 1e-4 * step * slope or step < 1e-12:
                break
            step *= 0.5
        if Fn >= F:
            break
        b, F, t = b + step * d, Fn, tn
    b -= b.mean()
    diag = M.matrix.diagonal()
    J = (math.fsum(diag * a * a) - F) / float(a @ a)
    return b, J


def min_formula_1d(a: GridFn1D, mu: GridFn1D, lam: float, alpha: GridFn1D,
                   form: str = "discrete") -> float:
    """Value of the min-max functional whose minimum over ``alpha`` is ``k_lam(a, mu)``.

    ``form="discrete"`` evaluates ``max_beta J_lam(alpha, beta)`` on the
    grid (exact discrete counterpart).  ``form="closed"`` evaluates the
    continuum expression

        (int a alpha'^2 - int mu alpha^2) / int alpha^2
            - lam^2 D(alpha^2 a) / mean(alpha^2)

    with ``D`` the harmonic mean.  The two agree to ``O(h^2)``.
    """
    if alpha.min() <= 0:
        raise ValueError("alpha must be strictly positive")
    if form == "closed":
        m2 = cell_mean(alpha * alpha)
        D = effective_diffusivity_1d(alpha * alpha * a)
        return rayleigh(a, mu, alpha) - lam * lam * D / m2
    if form != "discrete":
        raise ValueError(f"unknown form {form!r}")
    c = CoefficientSet1D.build(mu, a)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        M = assemble(c, lam)
    return beta_max(M, alpha)[1]


def holland_max_check(c, beta, lam: float = 0.0, e=None, tol: Optional[float] = None) -> float:
    """Principal eigenvalue of the self-adjoint operator ``sym(e^{-beta} M e^{beta})``.

    This is the modified self-adjoint problem whose maximum over ``beta``
    equals ``k_0(A, q, mu)``.  Its diagonal is that of ``M``.  The
    ``beta``-dependent potential ``grad(beta) A grad(beta) + q.grad(beta)
    - div(q)/2`` enters through the symmetrized off-diagonal weights.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        M = assemble(c, lam, e)
    S = symmetrized(M, beta)
    return principal_eig(S, tol, adjoint=False).k


# name used by external callers
thm21_functional_1d = min_formula_1d
