"""Verification drivers that produce machine-readable reports.

Every driver returns a :class:`Report` holding one :class:`Assertion` per
checked relation.  An assertion stores both sides, a signed margin (positive
means the relation holds with room to spare) and a pass flag.  Inequalities
between eigenvalues are checked at two resolutions ``n`` and ``2n`` with the
tolerance ``tol_assert = 10 (solver tol + |k_n - k_{n/2}|)``, so that a
discrete violation below truncation error is not reported as a failure.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .dispersion import (
    NoInvasionError,
    j_shifted,
    large_drift_limit_diagonal,
    spreading_speed,
)
from .gridfn import (
    GridFn1D,
    GridFn2D,
    GridSpec1D,
    GridSpec2D,
    cell_mean,
    fingerprint,
    sample,
)
from .operators import (
    CoefficientSet1D,
    CoefficientSet2D,
    SolverError,
    _central_2d,
    assemble,
    dk_dlambda,
    k_lambda,
    principal_eig,
)
from .rearrange import harmonic_rearrange, schwarz, steiner
from .varforms import (
    J_functional,
    effective_diffusivity_1d,
    holland_max_check,
    holland_transform,
)

__all__ = [
    "Assertion",
    "Report",
    "RandomCoefficientSpec",
    "TrigSeries",
    "tol_assert",
    "verify_rearrangement",
    "verify_holland",
    "period_scan",
    "counterexample_2d",
    "verify_diffusion_rearrangement",
    "conjecture_scan",
    "equivalence_check",
    "EXPERIMENTS",
]

DEFAULT_LAMBDAS = (0.0, 0.25, 0.5, 1.0, 2.0, 5.0)
SOLVER_TOL = 1e-10


# --------------------------------------------------------------------------
# reports


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


@dataclass
class Assertion:
    desc: str
    lhs: Optional[float]
    rhs: Optional[float]
    margin: float
    passed: bool

    def to_dict(self) -> dict:
        return {"desc": self.desc, "lhs": _num(self.lhs), "rhs": _num(self.rhs),
                "margin": float(self.margin), "pass": bool(self.passed)}


@dataclass
class Report:
    experiment: str
    config: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    # recording helpers; margin > 0 (or >= 0) means the relation holds

    def add(self, desc, lhs, rhs, margin, passed) -> Assertion:
        margin = float(margin)
        if not math.isfinite(margin):
            margin, passed = -1.0, False
        a = Assertion(desc, lhs, rhs, margin, bool(passed))
        self.assertions.append(a)
        return a

    def leq(self, desc, lhs, rhs, tol=0.0) -> Assertion:
        """``lhs <= rhs`` up to ``tol``; margin ``rhs - lhs``."""
        m = rhs - lhs
        return self.add(desc, lhs, rhs, m, m >= -tol)

    def less(self, desc, lhs, rhs) -> Assertion:
        """Strict ``lhs < rhs``."""
        m = rhs - lhs
        return self.add(desc, lhs, rhs, m, m > 0)

    def close(self, desc, lhs, rhs, tol) -> Assertion:
        """``|lhs - rhs| <= tol``; margin ``tol - |lhs - rhs|``."""
        m = tol - abs(lhs - rhs)
        return self.add(desc, lhs, rhs, m, m >= 0)

    def failure(self, desc, exc) -> Assertion:
        return self.add(f"{desc}: solver failure ({exc})", None, None, -1.0, False)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "assertions": [a.to_dict() for a in self.assertions],
            "pass": self.passed,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "desc", "lhs", "rhs", "margin", "pass"])
        for a in self.assertions:
            d = a.to_dict()
            w.writerow([self.experiment, d["desc"],
                        "" if d["lhs"] is None else repr(d["lhs"]),
                        "" if d["rhs"] is None else repr(d["rhs"]),
                        repr(d["margin"]), "true" if d["pass"] else "false"])
        return buf.getvalue()

    def write(self, path, fmt: Optional[str] = None) -> None:
        path = Path(path)
        fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
        text = self.to_csv() if fmt == "csv" else self.to_json()
        atomic_write(path, text)

    def summary(self) -> str:
        bad = sum(not a.passed for a in self.assertions)
        state = "PASS" if self.passed else "FAIL"
        return f"{self.experiment}: {state} ({len(self.assertions) - bad}/{len(self.assertions)} assertions)"


def atomic_write(path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def tol_assert(k_n: float, k_half: float, solver_tol: float = SOLVER_TOL) -> float:
    return 10.0 * (solver_tol + abs(k_n - k_half))


def _map(fn: Callable, items, jobs: int = 1):
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# random corpus


@dataclass(frozen=True)
class TrigSeries:
    """``c0 + sum_k (a_k cos(2 pi k x / L) + b_k sin(2 pi k x / L))``."""

    c0: float
    cos: tuple
    sin: tuple

    @property
    def amplitude(self) -> float:
        return float(sum(abs(v) for v in self.cos) + sum(abs(v) for v in self.sin))

    def shifted(self, c: float) -> "TrigSeries":
        return TrigSeries(self.c0 + c, self.cos, self.sin)

    def to_expr(self) -> str:
        parts = [repr(float(self.c0))]
        for k, (ca, sb) in enumerate(zip(self.cos, self.sin), start=1):
            parts.append(f"{ca!r}*cos(2*pi*{k}*x/L)")
            parts.append(f"{sb!r}*sin(2*pi*{k}*x/L)")
        return " + ".join(parts).replace("+ -", "- ")

    def __call__(self, x, L: float = 1.0):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, float(self.c0))
        for k, (ca, sb) in enumerate(zip(self.cos, self.sin), start=1):
            t = 2 * math.pi * k * x / L
            out = out + ca * np.cos(t) + sb * np.sin(t)
        return out

    def sample(self, spec: GridSpec1D) -> GridFn1D:
        return GridFn1D(spec, self(spec.x, spec.L))


@dataclass(frozen=True)
class RandomCoefficientSpec:
    """Truncated Fourier series with at most ``modes`` modes and ``1/k`` amplitude decay."""

    seed: int = 42
    modes: int = 6
    amplitude: float = 2.0
    floor: float = 0.2

    def __post_init__(self):
        if self.modes < 1 or self.amplitude <= 0 or self.floor <= 0:
            raise ValueError("modes >= 1, amplitude > 0 and floor > 0 are required")

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])

    def series(self, rng, c0: float = 0.0) -> TrigSeries:
        m = int(rng.integers(1, self.modes + 1))
        k = np.arange(1, m + 1)
        ca = self.amplitude * rng.uniform(-1, 1, m) / k / 2
        sb = self.amplitude * rng.uniform(-1, 1, m) / k / 2
        return TrigSeries(c0, tuple(float(v) for v in ca), tuple(float(v) for v in sb))

    def growth(self, rng) -> TrigSeries:
        return self.series(rng, float(rng.uniform(-1.0, 2.0)))

    def diffusion(self, rng) -> TrigSeries:
        # floor plus the series' worst-case oscillation keeps min(a) >= floor
        s = self.series(rng)
        return s.shifted(self.floor + s.amplitude + float(rng.uniform(0.0, 1.0)))


def _is_schwarz(f: GridFn1D) -> bool:
    return bool(np.array_equal(schwarz(f).values, f.values))


def _k(a, mu, lam, q=None, tol=SOLVER_TOL):
    return k_lambda(CoefficientSet1D.build(mu, a, q), lam, None, tol)


# --------------------------------------------------------------------------
# rearrangement inequality


def _rearrangement_case(args):
    mu_t, lam_list, n = args
    out = []
    for m in (n, 2 * n):
        ks = {}
        for res in (m, m // 2):
            spec = GridSpec1D(1.0, res)
            mu = mu_t(spec) if callable(mu_t) else sample(mu_t, spec)
            ms = schwarz(mu)
            one = GridFn1D.constant(spec, 1.0)
            for lam in lam_list:
                ks[res, lam] = (_k(one, mu, lam), _k(one, ms, lam))
        for lam in lam_list:
            k, ks_ = ks[m, lam]
            kh, ksh = ks[m // 2, lam]
            tol = max(tol_assert(k, kh), tol_assert(ks_, ksh))
            out.append((m, lam, k, ks_, tol))
    return out


@dataclass(frozen=True)
class _Sampler:
    ts: TrigSeries

    def __call__(self, spec):
        return self.ts.sample(spec)


def verify_rearrangement(mu_exprs: Optional[Sequence[str]] = None, lam_list=(0, 0.5, 1, 2, 5),
                         n: int = 128, cases: int = 50, seed: int = 42, jobs: int = 1) -> Report:
    """``k_lam(mu*) <= k_lam(mu)`` on a random corpus or on given expressions."""
    lam_list = tuple(float(v) for v in lam_list)
    rc = RandomCoefficientSpec(seed)
    if mu_exprs:
        items = list(mu_exprs)
        labels = list(mu_exprs)
    else:
        rng = rc.rng(1)
        series = [rc.growth(rng) for _ in range(cases)]
        items = [_Sampler(s) for s in series]
        labels = [s.to_expr() for s in series]
    rep = Report("verify-rearrangement",
                 {"n": n, "lambdas": list(lam_list), "seed": seed,
                  "cases": len(items), "mu": labels if mu_exprs else None})
    t0 = time.perf_counter()
    results = _map(_rearrangement_case, [(it, lam_list, n) for it in items], jobs)
    fps = []
    for idx, (label, rows) in enumerate(zip(labels, results)):
        spec = GridSpec1D(1.0, n)
        mu = items[idx](spec) if callable(items[idx]) else sample(items[idx], spec)
        fps.append(fingerprint(mu))
        symmetric = _is_schwarz(mu)
        for m, lam, k, ks_, tol in rows:
            rep.leq(f"case {idx} n={m} lambda={lam:g}: k(mu*) <= k(mu)", ks_, k, tol)
            if symmetric:
                rep.close(f"case {idx} n={m} lambda={lam:g}: Schwarz-symmetric input gives equality",
                          ks_, k, 10 * SOLVER_TOL)
    rep.meta = {"grid": {"L": 1.0, "n": [n, 2 * n]}, "fingerprints": fps,
                "wall_time": time.perf_counter() - t0}
    return rep


# --------------------------------------------------------------------------
# Holland transform and min-max formulas


def _stream_drift(spec: GridSpec2D, psi: GridFn2D):
    # q = (d_y psi, -d_x psi) with central differences: discretely divergence free
    cx, cy = _central_2d(spec)
    p = psi.flat()
    return GridFn2D.from_flat(spec, cy @ p), GridFn2D.from_flat(spec, -(cx @ p))


def _random_2d(rc: RandomCoefficientSpec, rng, spec: GridSpec2D, stream_scale: float = 0.3):
    X, Y = spec.mesh()

    def field2(c0, amp):
        out = np.full(spec.shape, c0)
        for _ in range(int(rng.integers(1, 4))):
            kx, ky = rng.integers(0, 3, 2)
            if kx == 0 and ky == 0:
                kx = 1
            ph = rng.uniform(0, 2 * math.pi)
            out = out + amp * rng.uniform(-1, 1) * np.cos(
                2 * math.pi * (kx * X / spec.L1 + ky * Y / spec.L2) + ph) / (1 + kx + ky)
        return out

    amp = rc.amplitude / 2
    a11 = field2(0.0, amp)
    a11 = a11 - a11.min() + rc.floor + rng.uniform(0, 1)
    a22 = field2(0.0, amp)
    a22 = a22 - a22.min() + rc.floor + rng.uniform(0, 1)
    mu = field2(float(rng.uniform(-1, 2)), amp)
    psi = GridFn2D(spec, stream_scale * field2(0.0, 1.0))
    q1, q2 = _stream_drift(spec, psi)
    z = GridFn2D.constant(spec, 0.0)
    return CoefficientSet2D(GridFn2D(spec, a11), z, GridFn2D(spec, a22), q1, q2, GridFn2D(spec, mu))


def _smooth_perturbation(rng, spec, scale):
    if isinstance(spec, GridSpec1D):
        ts = RandomCoefficientSpec(0, modes=4, amplitude=2 * scale).series(rng)
        return ts.sample(spec)
    X, Y = spec.mesh()
    out = np.zeros(spec.shape)
    for kx in range(3):
        for ky in range(3):
            if kx or ky:
                out += scale * rng.uniform(-1, 1) * np.cos(
                    2 * math.pi * (kx * X / spec.L1 + ky * Y / spec.L2) + rng.uniform(0, 2 * math.pi)) / (kx + ky)
    return GridFn2D(spec, out)


def _positive_perturbation(rng, spec, alpha, scale=0.5):
    d = _smooth_perturbation(rng, spec, scale)
    return alpha * d.map(np.exp)


def _holland_case(rep: Report, tag: str, c, rng, eig_tol: float, perturb: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        M = assemble(c, 0.0)
    p = principal_eig(M, eig_tol)
    k0 = p.k
    hp = holland_transform(p)
    rep.close(f"{tag}: F(beta_opt) = k0", holland_max_check(c, hp.beta, tol=eig_tol), k0, 1e-6)
    rep.close(f"{tag}: J(alpha, beta) at the transform pair = k0", J_functional(c, hp.alpha, hp.beta), k0, 1e-6)
    rep.leq(f"{tag}: flux-divergence residual of the transform pair", hp.residual, 1e-6)
    worst_F, worst_Jb, worst_Ja = -math.inf, -math.inf, math.inf
    j0 = J_functional(c, hp.alpha, hp.beta)
    spec = c.spec
    for _ in range(perturb):
        b = hp.beta + _smooth_perturbation(rng, spec, 0.5)
        worst_F = max(worst_F, holland_max_check(c, b, tol=eig_tol))
        worst_Jb = max(worst_Jb, J_functional(c, hp.alpha, b))
        worst_Ja = min(worst_Ja, J_functional(c, _positive_perturbation(rng, spec, hp.alpha), hp.beta))
    rep.leq(f"{tag}: max F(beta) over {perturb} random beta <= k0", worst_F, k0, 1e-9)
    rep.leq(f"{tag}: J(alpha, .) is maximal at beta_opt", worst_Jb, j0, 1e-9)
    rep.leq(f"{tag}: J(., beta_opt) is minimal at alpha_opt", j0, worst_Ja, 1e-9)
    return p, hp


def verify_holland(cases_1d: int = 20, cases_2d: int = 5, n: int = 128, n2d: int = 48,
                   seed: int = 42, perturb: int = 20, gradient_case: bool = True) -> Report:
    """Max formula, saddle structure of ``J`` and the Holland transform.

    1D cases use a constant drift, 2D cases a divergence-free drift built as
    the rotated gradient of a stream function.  The optional gradient-drift
    case ``q = a Q'`` checks ``beta_opt = -Q/2`` and the classical formula
    ``k0(a, 0, mu - a Q'^2/4 - (a Q')'/2)`` to grid accuracy.
    """
    rc = RandomCoefficientSpec(seed)
    rng = rc.rng(2)
    rep = Report("verify-holland", {"cases_1d": cases_1d, "cases_2d": cases_2d, "n": n,
                                    "n2d": n2d, "seed": seed, "perturbations": perturb})
    t0 = time.perf_counter()
    spec = GridSpec1D(1.0, n)
    fps = []
    for i in range(cases_1d):
        a = rc.diffusion(rng).sample(spec)
        mu = rc.growth(rng).sample(spec)
        q = GridFn1D.constant(spec, float(rng.uniform(-2, 2)))
        c = CoefficientSet1D.build(mu, a, q)
        fps.append(c.fingerprint())
        try:
            _holland_case(rep, f"1d case {i}", c, rng, 1e-11, perturb)
        except SolverError as exc:
            rep.failure(f"1d case {i}", exc)
    spec2 = GridSpec2D(1.0, 1.0, n2d, n2d)
    for i in range(cases_2d):
        c = _random_2d(rc, rng, spec2)
        fps.append(c.fingerprint())
        rep.add(f"2d case {i}: drift is discretely divergence free", None, None, 0.0, c.divergence_free)
        try:
            _holland_case(rep, f"2d case {i}", c, rng, 1e-11, perturb)
        except SolverError as exc:
            rep.failure(f"2d case {i}", exc)
    if gradient_case:
        _gradient_drift_case(rep, n)
    rep.meta = {"fingerprints": fps, "wall_time": time.perf_counter() - t0}
    return rep


def _gradient_drift_case(rep: Report, n: int):
    spec = GridSpec1D(1.0, n)
    a = sample("1.5 + 0.5*sin(2*pi*x)", spec)
    Q = sample("0.4*cos(2*pi*x)", spec)
    dQ = sample("-0.8*pi*sin(2*pi*x)", spec)
    # (a Q')' in closed form
    d_aQ = sample("pi*cos(2*pi*x)*(-0.8*pi*sin(2*pi*x))"
                  " + (1.5 + 0.5*sin(2*pi*x))*(-1.6*pi*pi*cos(2*pi*x))", spec)
    mu = sample("1 + cos(2*pi*x)", spec)
    c = CoefficientSet1D.build(mu, a, a * dQ)
    p = principal_eig(assemble(c, 0.0), 1e-11)
    hp = holland_transform(p)
    Qc = Q.values - Q.values.mean()
    err = float(np.abs(hp.beta.values + Qc / 2).max())
    rep.leq("gradient drift: |beta_opt + Q/2| (grid accuracy)", err, 1e-3)
    classical = _k(a, mu - 0.25 * a * dQ * dQ - 0.5 * d_aQ, 0.0)
    rep.close("gradient drift: classical formula k0(a, 0, mu - aQ'^2/4 - (aQ')'/2) = k0",
              classical, p.k, 1e-3)


# --------------------------------------------------------------------------
# period scaling


def period_scan(a: str = "1", mu: str = "1 + cos(2*pi*x)", q: str = "0", lam: float = 1.0,
                L_list=(0.01, 0.1, 0.5, 1, 2, 4), n: int = 256, tol_limit: float = 1e-2,
                tol_mono: float = 1e-9) -> Report:
    """``L -> k_{lam}(a_L, q_L, mu_L)`` through the rescaling identity on one grid.

    With ``f_L(x) = f(x / L)`` the eigenvalue on the cell of length ``L`` is
    ``k_{lam L}(a, L q, L^2 mu) / L^2`` on the unit cell, and the speed is
    ``c*(a, L q, L^2 mu) / L``.
    """
    spec = GridSpec1D(1.0, n)
    af, muf, qf = sample(a, spec), sample(mu, spec), sample(q, spec)
    if np.ptp(qf.values) > 0:
        raise ValueError("the period scan needs a divergence-free (constant) drift in 1D")
    mbar = cell_mean(muf)
    if mbar <= 0:
        raise ValueError("the period scan needs a positive mean growth rate")
    Ls = sorted(float(v) for v in L_list)
    rep = Report("period-scan", {"a": a, "mu": mu, "q": q, "lambda": lam, "L": Ls, "n": n})
    t0 = time.perf_counter()
    ks = []
    for L in Ls:
        cL = CoefficientSet1D.build(muf * (L * L), af, qf * L)
        tol = min(SOLVER_TOL, 1e-3 * tol_mono * L * L)
        ks.append(k_lambda(cL, lam * L, None, max(tol, 1e-15)) / (L * L))
    for (L1, k1), (L2, k2) in zip(zip(Ls, ks), zip(Ls[1:], ks[1:])):
        rep.leq(f"k(L={L2:g}) <= k(L={L1:g})", k2, k1, tol_mono)
    D = effective_diffusivity_1d(af)
    rep.close(f"k(L={Ls[0]:g}) -> -mean(mu) - lambda^2 D_e(a)", ks[0], -mbar - lam * lam * D, tol_limit)
    L = Ls[0]
    cL = CoefficientSet1D.build(muf * (L * L), af, qf * L)
    cs = spreading_speed(cL, tol=1e-10).c_star / L
    rep.close(f"c*(L={L:g}) -> 2 sqrt(D_e(a) mean(mu))", cs, 2 * math.sqrt(D * mbar), tol_limit)
    rep.meta = {"k": ks, "D_e": D, "mean_mu": mbar, "wall_time": time.perf_counter() - t0}
    return rep


# --------------------------------------------------------------------------
# 2D counterexample


def _diagonal_profile(mu0: GridFn1D, spec: GridSpec2D) -> GridFn2D:
    n = mu0.spec.n
    idx = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return GridFn2D(spec, mu0.values[idx])


def _stencil_cap(spec: GridSpec2D) -> float:
    # drift 2 lam |e_i| stays below 2 / h for e = (1, -1), A = I
    return 0.95 / max(spec.h1, spec.h2)


def counterexample_2d(mu0: str = "5 + 4*cos(2*pi*x)", lam_list=(1, 2, 5, 10, 20, 30), n: int = 48,
                      gap: float = 0.05, j_tol: float = 5e-3, eig_tol: float = 1e-10) -> Report:
    """Steiner symmetrization can lower the speed in 2D.

    With ``e = (1, -1)``, ``A = I`` and ``mu(x, y) = mu0(x + y)``, the shifted
    eigenvalue ``j = k + 2 lam^2`` does not depend on ``lam``.  The Steiner
    rearrangement ``mu*(x, y) = mu0(x)`` has larger ``k`` for large drift.  The
    speed reversal is checked for ``mu + M`` with ``M = k_{lam0 e}(mu) +
    lam0 c0``, ``c0 = -dk/dlam`` at the ``lam`` of largest gap: this makes
    ``c*(mu + M) = c0``, attained at ``lam0``.  A profile that is not already
    Schwarz-symmetric is replaced by its rearrangement, which does not change
    the construction since translations do not change eigenvalues.
    """
    spec1 = GridSpec1D(1.0, n)
    spec = GridSpec2D(1.0, 1.0, n, n)
    e = (1.0, -1.0)
    lam_list = tuple(float(v) for v in lam_list)
    rep = Report("counterexample-2d", {"mu0": mu0, "lambdas": list(lam_list), "n": n, "e": list(e),
                                       "gap": gap, "j_tol": j_tol})
    t0 = time.perf_counter()
    raw = sample(mu0, spec1)
    m0 = schwarz(raw)
    meta = {"mu0_replaced_by_rearrangement": not _is_schwarz(raw)}
    if np.ptp(m0.values) == 0:
        meta["degenerate"] = "degenerate input: mu0 is constant, no gap is possible"
        rep.add("mu0 is nonconstant", None, None, -1.0, False)
        rep.meta = meta
        return rep
    mu = _diagonal_profile(m0, spec)
    star = steiner(mu, ("x", "y"))
    expected = np.repeat(m0.values[:, None], n, axis=1)
    diff = float(np.abs(star.values - expected).max())
    rep.add("steiner(mu0(x+y)) = mu0(x)", diff, 0.0, -diff, diff == 0.0)
    one = GridFn2D.constant(spec, 1.0)
    cm = CoefficientSet2D.scalar(one, mu)
    cs = CoefficientSet2D.scalar(one, star)
    jm, js = [], []
    for lam in lam_list:
        jm.append(j_shifted(cm, e, lam, eig_tol))
        js.append(j_shifted(cs, e, lam, eig_tol))
    lim_mu, lim_star = large_drift_limit_diagonal(m0, eig_tol)
    spread = max(jm) - min(jm)
    rep.leq("j(mu) constant across lambda (max - min)", spread, j_tol)
    rep.close("j(mu) = 2 k0(mu0/2)", float(np.mean(jm)), lim_mu, 1e-6)
    gaps = [b - a for a, b in zip(jm, js)]
    i0 = int(np.argmax(gaps))
    lam0 = lam_list[i0]
    rep.less(f"exists lambda <= {max(lam_list):g} with k(mu*) - k(mu) > {gap:g} (best lambda={lam0:g})",
             gap, gaps[i0])
    rep.less("large-drift limits: lim j(mu) < lim j(mu*)", lim_mu, lim_star)
    rep.close(f"gap at lambda={lam_list[-1]:g} approaches the limit gap", gaps[-1], lim_star - lim_mu, 1e-2)

    # speed reversal for mu + M
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p0 = principal_eig(assemble(cm, lam0, e), eig_tol)
    c0 = -dk_dlambda(p0)
    M = p0.k + lam0 * c0
    hi = min(1.5 * lam0, _stencil_cap(spec))
    br = (0.5 * lam0, hi)
    try:
        c_mu = spreading_speed(cm.replace(mu=mu + M), e, tol=1e-8, eig_tol=eig_tol, bracket=br).c_star
        c_st = spreading_speed(cs.replace(mu=star + M), e, tol=1e-8, eig_tol=eig_tol, bracket=br).c_star
        rep.close("c*(mu + M) = c0 by construction", c_mu, c0, 1e-6 * max(1.0, abs(c0)))
        rep.less(f"c*(mu* + M) < c*(mu + M) with M = {M:.6g}", c_st, c_mu)
    except (SolverError, NoInvasionError) as exc:
        rep.failure("speed reversal", exc)
    # the unshifted speeds for reference (not part of the claim)
    try:
        u_mu = spreading_speed(cm, e, tol=1e-8, eig_tol=eig_tol, lam_max=_stencil_cap(spec)).c_star
        u_st = spreading_speed(cs, e, tol=1e-8, eig_tol=eig_tol, lam_max=_stencil_cap(spec)).c_star
        meta["unshifted_speeds"] = {"mu": u_mu, "mu_star": u_st}
    except (SolverError, NoInvasionError) as exc:
        meta["unshifted_speeds"] = str(exc)
    meta.update({"j_mu": jm, "j_mu_star": js, "gaps": gaps, "limits": [lim_mu, lim_star],
                 "lambda0": lam0, "c0": c0, "M": M, "wall_time": time.perf_counter() - t0})
    rep.meta = meta
    return rep


# --------------------------------------------------------------------------
# diffusion rearrangement and the open conjecture


def _diffusion_case(args):
    a_t, mu_t, lam_list, n, with_speed = args
    out = {"k": [], "k0": [], "c": None}
    for m in (n, 2 * n):
        vals = {}
        for res in (m, m // 2):
            spec = GridSpec1D(1.0, res)
            a, mu = a_t(spec), mu_t(spec)
            a_s = harmonic_rearrange(a)
            mu_s = schwarz(mu * a) / a_s
            one = GridFn1D.constant(spec, 1.0)
            for lam in lam_list:
                vals[res, lam] = (_k(a, mu, lam), _k(a_s, mu_s, lam),
                                  _k(a, one, lam), _k(a_s, one, lam))
        for lam in lam_list:
            cur, half = vals[m, lam], vals[m // 2, lam]
            t1 = max(tol_assert(cur[0], half[0]), tol_assert(cur[1], half[1]))
            t2 = max(tol_assert(cur[2], half[2]), tol_assert(cur[3], half[3]))
            out["k"].append((m, lam, cur[0], cur[1], t1))
            out["k0"].append((m, lam, cur[2], cur[3], t2))
    if with_speed:
        res = []
        for m in (n, n // 2):
            spec = GridSpec1D(1.0, m)
            a = a_t(spec)
            one = GridFn1D.constant(spec, 1.0)
            res.append((spreading_speed(CoefficientSet1D.build(one, a), tol=1e-10).c_star,
                        spreading_speed(CoefficientSet1D.build(one, harmonic_rearrange(a)), tol=1e-10).c_star))
        (c, cs), (ch, csh) = res
        out["c"] = (c, cs, 10 * (1e-8 + max(abs(c - ch), abs(cs - csh))))
    return out


@dataclass(frozen=True)
class _ExprSampler:
    expr: str

    def __call__(self, spec):
        return sample(self.expr, spec)


def _pairs(a_exprs, mu_exprs, cases, seed, stream):
    rc = RandomCoefficientSpec(seed)
    if a_exprs or mu_exprs:
        a_exprs = list(a_exprs or ["1"])
        mu_exprs = list(mu_exprs or ["1"])
        if len(a_exprs) == 1:
            a_exprs = a_exprs * len(mu_exprs)
        if len(mu_exprs) == 1:
            mu_exprs = mu_exprs * len(a_exprs)
        if len(a_exprs) != len(mu_exprs):
            raise ValueError("a and mu lists must have equal length (or length 1)")
        return [(_ExprSampler(x), _ExprSampler(y), x, y) for x, y in zip(a_exprs, mu_exprs)]
    rng = rc.rng(stream)
    out = []
    for _ in range(cases):
        a, mu = rc.diffusion(rng), rc.growth(rng)
        out.append((_Sampler(a), _Sampler(mu), a.to_expr(), mu.to_expr()))
    return out


def verify_diffusion_rearrangement(a_exprs=None, mu_exprs=None, lam_list=(0, 1, 2), n: int = 128,
                                   cases: int = 30, seed: int = 42, jobs: int = 1) -> Report:
    """``k(a_*, (mu a)* / a_*) <= k(a, mu)`` and, for constant growth, ``k(a_*, 1) <= k(a, 1)``
    and ``c*(a_*, 1) >= c*(a, 1)``."""
    lam_list = tuple(float(v) for v in lam_list)
    pairs = _pairs(a_exprs, mu_exprs, cases, seed, 3)
    rep = Report("verify-diffusion", {"n": n, "lambdas": list(lam_list), "seed": seed,
                                      "cases": len(pairs),
                                      "pairs": [[x, y] for _, _, x, y in pairs] if (a_exprs or mu_exprs) else None})
    t0 = time.perf_counter()
    results = _map(_diffusion_case, [(a, m, lam_list, n, True) for a, m, _, _ in pairs], jobs)
    for i, r in enumerate(results):
        for m, lam, k, ks, tol in r["k"]:
            rep.leq(f"case {i} n={m} lambda={lam:g}: k(a_*, (mu a)*/a_*) <= k(a, mu)", ks, k, tol)
        for m, lam, k, ks, tol in r["k0"]:
            rep.leq(f"case {i} n={m} lambda={lam:g}: k(a_*, 1) <= k(a, 1)", ks, k, tol)
        c, cs, tol = r["c"]
        rep.leq(f"case {i} n={n}: c*(a, 1) <= c*(a_*, 1)", c, cs, tol)
    rep.meta = {"wall_time": time.perf_counter() - t0}
    return rep


def _conjecture_case(args):
    a_t, mu_t, lam_list, n = args
    out = []
    for m in (n, 2 * n):
        vals = {}
        for res in (m, m // 2):
            spec = GridSpec1D(1.0, res)
            a, mu = a_t(spec), mu_t(spec)
            for lam in lam_list:
                vals[res, lam] = (_k(a, mu, lam), _k(harmonic_rearrange(a), schwarz(mu), lam))
        for lam in lam_list:
            cur, half = vals[m, lam], vals[m // 2, lam]
            out.append((m, lam, cur[0], cur[1], max(tol_assert(cur[0], half[0]), tol_assert(cur[1], half[1]))))
    return out


def conjecture_scan(a_exprs=None, mu_exprs=None, lam_list=(0, 1, 2), n: int = 128, cases: int = 30,
                    seed: int = 42, jobs: int = 1) -> Report:
    """Exploratory scan of ``k(a, mu) >= k(a_*, mu*)``.

    Each row is labelled "consistent" or "violation candidate".  The
    relation is open, so the scan is informative only and callers should not
    treat a violation candidate as a failed check.
    """
    lam_list = tuple(float(v) for v in lam_list)
    pairs = _pairs(a_exprs, mu_exprs, cases, seed, 4)
    rep = Report("conjecture-scan", {"n": n, "lambdas": list(lam_list), "seed": seed, "cases": len(pairs),
                                     "pairs": [[x, y] for _, _, x, y in pairs]})
    t0 = time.perf_counter()
    results = _map(_conjecture_case, [(a, m, lam_list, n) for a, m, _, _ in pairs], jobs)
    labels = {"consistent": 0, "violation candidate": 0}
    for i, rows in enumerate(results):
        for m, lam, k, ks, tol in rows:
            ok = k - ks >= -tol
            label = "consistent" if ok else "violation candidate"
            labels[label] += 1
            rep.add(f"case {i} n={m} lambda={lam:g}: k(a_*, mu*) <= k(a, mu): {label}", ks, k, k - ks, ok)
    rep.meta = {"exploratory": True, "labels": labels, "wall_time": time.perf_counter() - t0}
    return rep


# --------------------------------------------------------------------------
# equivalence between eigenvalue and speed comparisons


def equivalence_check(c1, c2, e=None, lam_grid=(0.5, 1, 2, 5, 10), M_grid=None,
                      eig_tol: float = 1e-10, tol: float = 1e-9, lam_max: Optional[float] = None) -> Report:
    """Sampled consistency of two equivalent comparisons.

    (2) ``k_{lam e}(mu1) >= k_{lam e}(mu2)`` for all ``lam > 0``;
    (1) ``c*(mu1 + M) <= c*(mu2 + M)`` for all ``M > k_0(mu1)``.

    ``c1`` and ``c2`` differ only in their growth rates.  Sampling cannot
    prove (1), so a report where both sides hold reads "no sampled
    violation".  When (2) fails at ``lam0``, the shift ``M = k_{lam0 e}(mu1)
    + lam0 c0`` with ``c0 = -dk/dlam (mu1)`` must exhibit a violation of (1).
    """
    is2d = isinstance(c1, CoefficientSet2D)
    if is2d and e is None:
        raise ValueError("a 2D equivalence check needs a direction e")
    if lam_max is None:
        lam_max = _stencil_cap(c1.spec) / max(abs(e[0]), abs(e[1])) if is2d else 1e6
    lam_grid = tuple(float(v) for v in lam_grid)
    rep = Report("equivalence-check", {"lambdas": list(lam_grid), "M": None if M_grid is None else list(M_grid),
                                       "e": None if e is None else (list(e) if is2d else e),
                                       "fingerprints": [c1.fingerprint(), c2.fingerprint()]})
    t0 = time.perf_counter()
    k1 = [k_lambda(c1, lam, e, eig_tol) for lam in lam_grid]
    k2 = [k_lambda(c2, lam, e, eig_tol) for lam in lam_grid]
    holds2 = [a - b >= -tol for a, b in zip(k1, k2)]
    for lam, a, b in zip(lam_grid, k1, k2):
        rep.add(f"(2) at lambda={lam:g}: k(mu1) >= k(mu2) [{'holds' if a - b >= -tol else 'fails'}]",
                a, b, a - b, True)
    k01 = k_lambda(c1, 0.0, e, eig_tol)

    def speed(c, M, br=None):
        return spreading_speed(c.replace(mu=c.mu + M), e, tol=1e-9, eig_tol=eig_tol,
                               bracket=br, lam_max=lam_max).c_star

    if M_grid is None:
        M_grid = [k01 + d for d in (0.5, 1.0, 2.0, 5.0)]
    sampled = []
    for M in M_grid:
        if M <= k01:
            continue
        try:
            s1, s2 = speed(c1, M), speed(c2, M)
        except NoInvasionError:
            continue
        except SolverError as exc:
            rep.failure(f"(1) at M={M:g}", exc)
            continue
        sampled.append((M, s1, s2))
    if all(holds2):
        for M, s1, s2 in sampled:
            rep.leq(f"(2) holds on all sampled lambda, so (1) at M={M:g}: c*(mu1+M) <= c*(mu2+M) "
                    f"[no sampled violation]", s1, s2, tol)
    else:
        i0 = int(np.argmin([a - b for a, b in zip(k1, k2)]))
        lam0 = lam_grid[i0]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = principal_eig(assemble(c1, lam0, e), eig_tol)
        c0 = -dk_dlambda(p)
        M = p.k + lam0 * c0
        br = (0.5 * lam0, min(2.0 * lam0, lam_max))
        try:
            s1, s2 = speed(c1, M, br), speed(c2, M, br)
            rep.less(f"(2) fails at lambda={lam0:g}, so (1) fails at the constructed M={M:.6g}: "
                     f"c*(mu2+M) < c*(mu1+M)", s2, s1)
        except (SolverError, NoInvasionError) as exc:
            rep.failure(f"(1) at constructed M={M:g}", exc)
        for Ms, s1, s2 in sampled:
            rep.add(f"(1) at M={Ms:g}: c*(mu1+M) <= c*(mu2+M) "
                    f"[{'holds' if s1 <= s2 + tol else 'fails'}]", s1, s2, s2 - s1, True)
    rep.meta = {"k1": k1, "k2": k2, "k0_mu1": k01, "wall_time": time.perf_counter() - t0}
    return rep


EXPERIMENTS = {
    "rearrangement": verify_rearrangement,
    "holland": verify_holland,
    "period": period_scan,
    "counterexample": counterexample_2d,
    "diffusion": verify_diffusion_rearrangement,
    "equivalence": equivalence_check,
    "conjecture": conjecture_scan,
}
