"""Finite-difference periodic operators and their principal eigenpairs.

The 1D operator is

    -(a phi')' - 2 lam a phi' - q phi' - (lam^2 a + lam a' + lam q + mu) phi

and the 2D operator, for a drift vector ``v = lam e``,

    -div(A grad phi) - 2 v.A grad phi - q.grad phi
        - (v.A v + div(A v) + q.v + mu) phi.

The diffusion part is the conservative form ``G^T W G`` built from forward
differences with half-node coefficients (harmonic mean of the two
neighbours) and, in 2D, central differences for the cross term ``a12``.
It is symmetric, so without drift the assembled matrix is its own
transpose.  First-order terms and ``a'``, ``div(A e)`` use central
differences.

The matrix is stored as three pieces, ``M(lam) = M0 + lam M1 + lam^2 M2``,
which gives ``dM/dlam`` for free.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .gridfn import (
    GridFn1D,
    GridFn2D,
    GridSpec1D,
    GridSpec2D,
    fingerprint,
    sample,
    sample2d,
)

__all__ = [
    "SolverError",
    "CoefficientSet1D",
    "CoefficientSet2D",
    "OperatorMatrix",
    "EigenPair",
    "assemble",
    "assemble_1d",
    "assemble_2d",
    "diffusion_matrix",
    "principal_eig",
    "adjoint_consistency",
    "dk_dlambda",
    "dk_dmu",
    "k_lambda",
    "default_tol",
    "half_node_mean",
]

MAX_ITER = 100_000


class SolverError(RuntimeError):
    """Perron iteration failed (no convergence or loss of positivity)."""


def half_node_mean(u, v):
    """Harmonic mean, the half-node diffusion coefficient."""
    return 2.0 * u * v / (u + v)


# --------------------------------------------------------------------------
# coefficients


@dataclass(frozen=True, eq=False)
class CoefficientSet1D:
    """Diffusion ``a`` (> 0), drift ``q`` and growth rate ``mu`` on one grid."""

    a: GridFn1D
    q: GridFn1D
    mu: GridFn1D

    def __post_init__(self):
        if not (self.a.spec == self.q.spec == self.mu.spec):
            raise ValueError("a, q and mu must share one grid")
        if self.a.min() <= 0:
            raise ValueError("diffusion coefficient must be strictly positive")

    @property
    def spec(self) -> GridSpec1D:
        return self.a.spec

    @property
    def ndim(self) -> int:
        return 1

    @classmethod
    def from_exprs(cls, mu="0", a="1", q="0", L=1.0, n=128) -> "CoefficientSet1D":
        spec = GridSpec1D(L, n)
        return cls(sample(a, spec), sample(q, spec), sample(mu, spec))

    @classmethod
    def build(cls, mu: GridFn1D, a: Optional[GridFn1D] = None, q: Optional[GridFn1D] = None):
        spec = mu.spec
        a = GridFn1D.constant(spec, 1.0) if a is None else a
        q = GridFn1D.constant(spec, 0.0) if q is None else q
        return cls(a, q, mu)

    def replace(self, **kw) -> "CoefficientSet1D":
        d = dict(a=self.a, q=self.q, mu=self.mu)
        d.update(kw)
        return CoefficientSet1D(**d)

    def fingerprint(self) -> str:
        return "-".join(fingerprint(f) for f in (self.a, self.q, self.mu))


@dataclass(frozen=True, eq=False)
class CoefficientSet2D:
    """Symmetric diffusion field ``(a11, a12, a22)``, drift ``(q1, q2)``, ``mu``."""

    a11: GridFn2D
    a12: GridFn2D
    a22: GridFn2D
    q1: GridFn2D
    q2: GridFn2D
    mu: GridFn2D

    def __post_init__(self):
        fields = (self.a11, self.a12, self.a22, self.q1, self.q2, self.mu)
        if any(f.spec != self.mu.spec for f in fields):
            raise ValueError("all coefficient fields must share one grid")
        lo, _ = self.ellipticity
        if lo <= 0:
            raise ValueError("diffusion matrix is not uniformly elliptic")

    @property
    def spec(self) -> GridSpec2D:
        return self.mu.spec

    @property
    def ndim(self) -> int:
        return 2

    @property
    def ellipticity(self):
        """Bounds ``(gamma, Gamma)`` on the eigenvalues of ``A`` over the grid."""
        m = 0.5 * (self.a11.values + self.a22.values)
        r = np.hypot(0.5 * (self.a11.values - self.a22.values), self.a12.values)
        return float((m - r).min()), float((m + r).max())

    @property
    def divergence_free(self) -> bool:
        cx, cy = _central_2d(self.spec)
        div = cx @ self.q1.flat() + cy @ self.q2.flat()
        scale = 1.0 + max(np.abs(self.q1.values).max(), np.abs(self.q2.values).max())
        return bool(np.abs(div).max() <= 1e-9 * scale / min(self.spec.h1, self.spec.h2))

    @classmethod
    def scalar(cls, a: GridFn2D, mu: GridFn2D, q=None) -> "CoefficientSet2D":
        """``A = a(x, y) I`` with optional drift pair ``q``."""
        zero = GridFn2D.constant(mu.spec, 0.0)
        q1, q2 = (zero, zero) if q is None else q
        return cls(a, zero, a, q1, q2, mu)

    @classmethod
    def from_exprs(cls, mu="0", a="1", q=("0", "0"), L1=1.0, L2=1.0, n1=48, n2=48):
        spec = GridSpec2D(L1, L2, n1, n2)
        af = sample2d(a, spec)
        return cls.scalar(af, sample2d(mu, spec), (sample2d(q[0], spec), sample2d(q[1], spec)))

    def replace(self, **kw) -> "CoefficientSet2D":
        d = dict(a11=self.a11, a12=self.a12, a22=self.a22, q1=self.q1, q2=self.q2, mu=self.mu)
        d.update(kw)
        return CoefficientSet2D(**d)

    def fingerprint(self) -> str:
        fs = (self.a11, self.a12, self.a22, self.q1, self.q2, self.mu)
        return "-".join(fingerprint(f) for f in fs)


Coefficients = Union[CoefficientSet1D, CoefficientSet2D]


# --------------------------------------------------------------------------
# difference operators


def _shift(n: int) -> sp.csr_matrix:
    # (S u)_i = u_{i+1 mod n}
    i = np.arange(n)
    return sp.csr_matrix((np.ones(n), (i, (i + 1) % n)), shape=(n, n))


def _ops_1d(spec: GridSpec1D):
    S = _shift(spec.n)
    eye = sp.identity(spec.n, format="csr")
    fwd = (S - eye) / spec.h
    cen = (S - S.T) / (2 * spec.h)
    return fwd.tocsr(), cen.tocsr()


def _ops_2d(spec: GridSpec2D):
    s1, s2 = _shift(spec.n1), _shift(spec.n2)
    i1, i2 = sp.identity(spec.n1), sp.identity(spec.n2)
    sx = sp.kron(i2, s1, format="csr")  # x index runs fastest
    sy = sp.kron(s2, i1, format="csr")
    eye = sp.identity(spec.size, format="csr")
    fx = ((sx - eye) / spec.h1).tocsr()
    fy = ((sy - eye) / spec.h2).tocsr()
    cx = ((sx - sx.T) / (2 * spec.h1)).tocsr()
    cy = ((sy - sy.T) / (2 * spec.h2)).tocsr()
    return fx, fy, cx, cy


def _central_2d(spec: GridSpec2D):
    _, _, cx, cy = _ops_2d(spec)
    return cx, cy


def gradient_form(c_or_a, spec=None):
    """Discrete energy pieces ``(G, W)`` with ``G^T W G`` the diffusion matrix.

    For a 1D coefficient ``a`` (GridFn1D) ``G`` is the forward difference and
    ``W`` holds half-node values of ``a``.  For a 2D coefficient set, ``G``
    stacks forward x, forward y, central x and central y differences and
    ``W`` couples the two central blocks through ``a12``.  The quadrature
    weight ``h`` (or ``h1 h2``) is not included.
    """
    if isinstance(c_or_a, GridFn1D):
        a = c_or_a.values
        fwd, _ = _ops_1d(c_or_a.spec)
        w = half_node_mean(a, np.roll(a, -1))
        return fwd, sp.diags(w)
    c = c_or_a
    spec = c.spec
    fx, fy, cx, cy = _ops_2d(spec)
    a11, a12, a22 = c.a11.values, c.a12.values, c.a22.values
    w11 = half_node_mean(a11, np.roll(a11, -1, axis=0)).ravel(order="F")
    w22 = half_node_mean(a22, np.roll(a22, -1, axis=1)).ravel(order="F")
    d12 = sp.diags(a12.ravel(order="F"))
    z = sp.csr_matrix((spec.size, spec.size))
    G = sp.vstack([fx, fy, cx, cy], format="csr")
    W = sp.bmat(
        [
            [sp.diags(w11), None, None, None],
            [None, sp.diags(w22), None, None],
            [None, None, z, d12],
            [None, None, d12, z],
        ],
        format="csr",
    )
    return G, W


def diffusion_matrix(c_or_a) -> sp.csr_matrix:
    """Discrete ``-div(A grad .)``, symmetric with constants in its kernel."""
    G, W = gradient_form(c_or_a)
    return (G.T @ W @ G).tocsr()


# --------------------------------------------------------------------------
# assembly


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Sparse discretization of ``-L_lam``.

    ``matrix = M0 + lam * M1 + lam**2 * M2`` where ``M1, M2`` are taken along
    ``direction`` (a float in 1D, a pair in 2D).
    """

    matrix: sp.csr_matrix
    spec: Union[GridSpec1D, GridSpec2D]
    lam: float
    direction: object
    parts: tuple
    stencil_positive: bool
    fingerprint: str = ""

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def volume(self) -> float:
        return self.spec.volume

    @property
    def weight(self) -> float:
        """Quadrature weight per node."""
        s = self.spec
        return s.h if isinstance(s, GridSpec1D) else s.h1 * s.h2

    def dmatrix(self) -> sp.csr_matrix:
        """``dM/dlam`` at this ``lam``."""
        _, m1, m2 = self.parts
        return (m1 + 2.0 * self.lam * m2).tocsr()

    def to_gridfn(self, vec):
        if isinstance(self.spec, GridSpec1D):
            return GridFn1D(self.spec, vec)
        return GridFn2D.from_flat(self.spec, vec)


def _offdiag_positive(m: sp.csr_matrix) -> bool:
    off = m - sp.diags(m.diagonal())
    off = off.tocoo()
    return bool(off.nnz == 0 or off.data.max() <= 0.0)


def _parts_1d(c: CoefficientSet1D, e: float = 1.0):
    a, q, mu = c.a.values, c.q.values, c.mu.values
    _, cen = _ops_1d(c.spec)
    K = diffusion_matrix(c.a)
    m0 = K - sp.diags(q) @ cen - sp.diags(mu)
    m1 = -sp.diags(2.0 * e * a) @ cen - sp.diags(e * (cen @ a) + e * q)
    m2 = -sp.diags(e * e * a)
    return m0.tocsr(), m1.tocsr(), m2.tocsr()


def _parts_2d(c: CoefficientSet2D, e):
    e1, e2 = float(e[0]), float(e[1])
    f = lambda g: g.values.ravel(order="F")  # noqa: E731
    a11, a12, a22 = f(c.a11), f(c.a12), f(c.a22)
    q1, q2, mu = f(c.q1), f(c.q2), f(c.mu)
    _, _, cx, cy = _ops_2d(c.spec)
    K = diffusion_matrix(c)
    ae1 = a11 * e1 + a12 * e2
    ae2 = a12 * e1 + a22 * e2
    m0 = K - sp.diags(q1) @ cx - sp.diags(q2) @ cy - sp.diags(mu)
    div_ae = cx @ ae1 + cy @ ae2
    m1 = (
        -2.0 * sp.diags(ae1) @ cx
        - 2.0 * sp.diags(ae2) @ cy
        - sp.diags(div_ae + q1 * e1 + q2 * e2)
    )
    m2 = -sp.diags(e1 * ae1 + e2 * ae2)
    return m0.tocsr(), m1.tocsr(), m2.tocsr()


def assemble(c: Coefficients, lam: float = 0.0, e=None) -> OperatorMatrix:
    """Assemble ``-L`` at drift ``lam * e``.

    ``e`` defaults to ``+1`` in 1D and is required in 2D (any nonzero
    vector; it is not normalized).
    """
    lam = float(lam)
    if isinstance(c, CoefficientSet1D):
        e = 1.0 if e is None else float(e)
        parts = _parts_1d(c, e)
    else:
        if e is None:
            if lam != 0.0:
                raise ValueError("a 2D drift needs a direction e")
            e = (1.0, 0.0)
        e = (float(e[0]), float(e[1]))
        parts = _parts_2d(c, e)
    m0, m1, m2 = parts
    m = (m0 + lam * m1 + lam * lam * m2).tocsr()
    m.eliminate_zeros()
    positive = _offdiag_positive(m)
    if not positive:
        warnings.warn("stencil positivity violated (positive off-diagonal entries)", stacklevel=2)
    return OperatorMatrix(m, c.spec, lam, e, parts, positive, c.fingerprint())


def assemble_1d(c: CoefficientSet1D, lam: float) -> OperatorMatrix:
    return assemble(c, lam, 1.0)


def assemble_2d(c: CoefficientSet2D, v) -> OperatorMatrix:
    """Assemble with the drift vector ``v = lam e`` given directly."""
    return assemble(c, 1.0, v)


# --------------------------------------------------------------------------
# Perron iteration


@dataclass(eq=False)
class EigenPair:
    k: float
    phi: object
    phi_adj: object
    residual_direct: float
    residual_adjoint: float
    iterations: int
    k_adjoint: float = math.nan
    bracket: tuple = (math.nan, math.nan)
    operator: Optional[OperatorMatrix] = field(default=None, repr=False)


def default_tol(spec) -> float:
    return 1e-10 if isinstance(spec, GridSpec1D) else 1e-8


def _perron(A: sp.csr_matrix, tol: float, maxiter: int, shift=None, x0=None):
    """Smallest-real eigenpair of a Z-matrix by shifted inverse iteration.

    For ``s`` below the eigenvalue ``k``, ``(A - s I)^{-1}`` is entrywise
    positive and its Perron root is ``1/(k - s)``.  The Collatz-Wielandt
    quotients ``x_i / y_i`` with ``y = (A - s I)^{-1} x`` bracket ``k - s``,
    which gives a certified interval ``[lo, hi]`` for ``k`` at every step.
    The shift is moved up to just below ``lo`` whenever the bracket is tight
    relative to the distance ``lo - s``.
    """
    n = A.shape[0]
    A = A.tocsc()
    eye = sp.identity(n, format="csc")
    ones = np.ones(n)
    if shift is None:
        shift = float((A @ ones).min()) - 1.0
    s = shift
    lu = spla.splu((A - s * eye).tocsc())
    x = ones / math.sqrt(n) if x0 is None else np.abs(x0) / np.linalg.norm(x0)
    lo, hi = -math.inf, math.inf
    best = math.inf
    stall = 0
    retreats = 0
    for it in range(1, maxiter + 1):
        y = lu.solve(x)
        if not np.all(y > 0):
            if retreats < 8:
                # shift landed at or above k through round-off; back off
                retreats += 1
                s -= 10.0 ** retreats * max(hi - lo if math.isfinite(hi) else 1.0, 1e-8 * (1 + abs(s)))
                lu = spla.splu((A - s * eye).tocsc())
                continue
            raise SolverError("eigenvector lost positivity; check stencil positivity")
        r = x / y
        lo, hi = s + float(r.min()), s + float(r.max())
        x = y / np.linalg.norm(y)
        width = hi - lo
        if width <= 2 * tol:
            return 0.5 * (lo + hi), x, it, (lo, hi), s
        if width < 0.5 * best:
            best, stall = width, 0
        else:
            stall += 1
        floor = 1e3 * np.finfo(float).eps * max(1.0, abs(lo))
        if stall > 20 and width <= 2 * max(tol, floor):
            return 0.5 * (lo + hi), x, it, (lo, hi), s
        if stall > 200:
            raise SolverError(f"Perron iteration stalled at bracket width {width:.3e}")
        gap = lo - s
        if gap > 8 * width:
            s = lo - max(2 * width, 1e-9 * (1.0 + abs(lo)))
            lu = spla.splu((A - s * eye).tocsc())
    raise SolverError(f"no convergence within {maxiter} iterations")


def principal_eig(M: OperatorMatrix, tol: Optional[float] = None, adjoint: bool = True,
                  maxiter: int = MAX_ITER) -> EigenPair:
    """Principal eigenpair of ``M`` and of its transpose.

    ``phi`` is positive with ``int phi^2 = |C|``; ``phi_adj`` is positive with
    ``int phi phi_adj = |C|``.  The residual ``|M phi - k phi|_inf /
    |phi|_inf`` is reported as computed; for very fine grids it is limited
    by the round-off floor ``~ eps * |M|_inf`` rather than by ``tol``.
    """
    tol = default_tol(M.spec) if tol is None else float(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = M.matrix
    w, vol = M.weight, M.volume
    k, x, its, bracket, s = _perron(A, tol, maxiter)
    phi = x * math.sqrt(vol / (w * float(np.dot(x, x))))
    res = float(np.abs(A @ phi - k * phi).max() / np.abs(phi).max())
    phi_adj, k_adj, res_adj = None, math.nan, math.nan
    if adjoint:
        AT = A.T.tocsr()
        diff = AT - A
        diff.eliminate_zeros()
        if diff.nnz == 0:
            k_adj, xa = k, x
        else:
            k_adj, xa, its_a, _, _ = _perron(AT, tol, maxiter, shift=s)
            its += its_a
        phi_adj = xa * (vol / (w * float(np.dot(phi, xa))))
        res_adj = float(np.abs(A.T @ phi_adj - k_adj * phi_adj).max() / np.abs(phi_adj).max())
        phi_adj = M.to_gridfn(phi_adj)
    return EigenPair(k, M.to_gridfn(phi), phi_adj, res, res_adj, its, k_adj, bracket, M)


def adjoint_consistency(p: EigenPair) -> float:
    return abs(p.k - p.k_adjoint)


def dk_dlambda(p: EigenPair) -> float:
    """Derivative of ``k`` along the drift parameter, ``<phi~, M' phi> / <phi~, phi>``."""
    if p.phi_adj is None or p.operator is None:
        raise ValueError("need an eigenpair computed with its adjoint")
    phi = _vec(p.phi)
    psi = _vec(p.phi_adj)
    return float(psi @ (p.operator.dmatrix() @ phi) / (psi @ phi))


def dk_dmu(p: EigenPair, eta) -> float:
    """Derivative of ``k`` in the growth-rate direction ``eta``: ``-<phi~, eta phi> / <phi~, phi>``.

    For a symmetric operator with ``mean(phi^2) = 1`` this is ``-mean(eta phi^2)``.
    """
    if p.phi_adj is None:
        raise ValueError("need an eigenpair computed with its adjoint")
    phi = _vec(p.phi)
    psi = _vec(p.phi_adj)
    return float(-(psi @ (_vec(eta) * phi)) / (psi @ phi))


def _vec(f) -> np.ndarray:
    return f.flat() if isinstance(f, GridFn2D) else f.values


def k_lambda(c: Coefficients, lam: float = 0.0, e=None, tol: Optional[float] = None) -> float:
    """Principal eigenvalue ``k_{lam e}`` (no adjoint solve)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        M = assemble(c, lam, e)
    return principal_eig(M, tol, adjoint=False).k
