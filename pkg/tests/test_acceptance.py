"""Acceptance criteria 1 to 11 at their stated tolerances.

Each check returns ``(passed, detail)``.  Under pytest every criterion
prints one ``ACCEPTANCE <n> PASS|FAIL`` line; running this file directly
prints the same lines without pytest.
"""
import math
import sys
import time

import numpy as np
import pytest

from oracles import dense_k, schwarz_oracle
from schwarzeig.dispersion import spreading_speed
from schwarzeig.experiments import (
    RandomCoefficientSpec,
    counterexample_2d,
    period_scan,
    verify_diffusion_rearrangement,
    verify_holland,
    verify_rearrangement,
)
from schwarzeig.gridfn import GridFn1D, GridFn2D, GridSpec1D, GridSpec2D, sample, sample2d
from schwarzeig.operators import CoefficientSet1D, CoefficientSet2D, assemble, dk_dmu, k_lambda, principal_eig
from schwarzeig.rearrange import dirichlet_energy, schwarz
from schwarzeig.varforms import effective_diffusivity_1d, effective_diffusivity_nd, min_formula_1d


def _failed(rep):
    bad = [a for a in rep.assertions if not a.passed]
    return f"{len(rep.assertions) - len(bad)}/{len(rep.assertions)} assertions" + (
        f"; first failure: {bad[0].desc}" if bad else "")


def _random_1d(rc, rng, spec, drift=True):
    a = rc.diffusion(rng).sample(spec)
    mu = rc.growth(rng).sample(spec)
    q = GridFn1D.constant(spec, float(rng.uniform(-1, 1)) if drift else 0.0)
    return CoefficientSet1D.build(mu, a, q)


def check_1():
    t0 = time.perf_counter()
    worst_k, worst_c = 0.0, 0.0
    for mu0 in (0.5, 1.0, 3.0):
        c = CoefficientSet1D.from_exprs(mu=repr(mu0), n=32)
        for lam in (0, 1, 2, 5):
            worst_k = max(worst_k, abs(k_lambda(c, lam) - (-mu0 - lam * lam)))
        s = spreading_speed(c)
        worst_c = max(worst_c, abs(s.c_star - 2 * math.sqrt(mu0)), abs(s.lambda_star - math.sqrt(mu0)))
    dt = time.perf_counter() - t0
    ok = worst_k <= 1e-10 and worst_c <= 1e-7 and dt < 1.0
    return ok, f"max |k - exact| = {worst_k:.1e}, max speed error = {worst_c:.1e}, {dt:.2f} s"


def check_2():
    t0 = time.perf_counter()
    rep = verify_rearrangement(lam_list=(0, 0.5, 1, 2, 5), n=128, cases=50, seed=42)
    dt = time.perf_counter() - t0
    ok = rep.passed and len(rep.assertions) == 50 * 5 * 2 and dt < 60
    return ok, f"{_failed(rep)} at n=128 and 256, {dt:.1f} s"


def check_3():
    rep = verify_holland(cases_1d=20, cases_2d=5, n=128, n2d=48, seed=42, perturb=20)
    return rep.passed, _failed(rep)


def check_4():
    rc = RandomCoefficientSpec(seed=42)
    rng = rc.rng(10)
    spec = GridSpec1D(1.0, 128)
    worst_eq, worst_low = 0.0, math.inf
    for lam in (0.0, 0.7, 2.0):
        c = _random_1d(rc, rng, spec, drift=False)
        p = principal_eig(assemble(c, lam))
        alpha = (p.phi * p.phi_adj).map(np.sqrt)
        worst_eq = max(worst_eq, abs(min_formula_1d(c.a, c.mu, lam, alpha) - p.k))
        for _ in range(200):
            pert = rc.series(rng).sample(spec)
            scale = float(rng.uniform(1e-3, 0.5))
            trial = alpha * pert.map(lambda v: np.exp(scale * v))
            worst_low = min(worst_low, min_formula_1d(c.a, c.mu, lam, trial) - p.k)
    ok = worst_eq <= 1e-6 and worst_low >= -1e-8
    return ok, f"|F(sqrt(phi phi~)) - k| <= {worst_eq:.1e}, min over 600 random alpha of F - k = {worst_low:.2e}"


def check_5():
    spec = GridSpec1D(1.0, 128)
    # small diffusion and a large eta make the eps^2 term dominate eigenvalue round-off
    c = CoefficientSet1D.from_exprs(mu="1+cos(2*pi*x)", a="0.1*(1.5+0.5*sin(2*pi*x))", q="0.6", n=128)
    eta = sample("10*cos(2*pi*x) + 5*sin(4*pi*x)", spec)
    p = principal_eig(assemble(c, 0.0), 1e-14)
    exact = dk_dmu(p, eta)

    def fd(eps):
        kp = k_lambda(c.replace(mu=c.mu + eta * eps), 0.0, None, 1e-14)
        km = k_lambda(c.replace(mu=c.mu - eta * eps), 0.0, None, 1e-14)
        return (kp - km) / (2 * eps)

    e1, e2 = abs(fd(1e-3) - exact), abs(fd(5e-4) - exact)
    ratio = e1 / e2
    ok = 3.5 <= ratio <= 4.5 and e1 <= 1e-4
    return ok, f"error(1e-3) = {e1:.2e}, error(5e-4) = {e2:.2e}, ratio = {ratio:.3f}"


def check_6():
    D1 = effective_diffusivity_1d(sample("2+cos(2*pi*x)", GridSpec1D(1.0, 64)))
    spec = GridSpec2D(1.0, 1.0, 64, 64)
    zero = GridFn2D.constant(spec, 0.0)
    errs = []
    for expr in ("2+cos(2*pi*x)", "1.5+sin(2*pi*x)+0.3*cos(4*pi*x)"):
        across = CoefficientSet2D.scalar(sample2d(expr, spec), zero)
        along = CoefficientSet2D.scalar(sample2d(expr.replace("x", "y"), spec), zero)
        a1 = sample(expr, GridSpec1D(1.0, 64))
        errs.append(abs(effective_diffusivity_nd(across, (1.0, 0.0)).D - effective_diffusivity_1d(a1)))
        errs.append(abs(effective_diffusivity_nd(along, (1.0, 0.0)).D - float(a1.values.mean())))
    ok = abs(D1 - math.sqrt(3)) <= 1e-10 and max(errs) <= 1e-6
    return ok, f"|D(2+cos) - sqrt 3| = {abs(D1 - math.sqrt(3)):.1e}, laminar 64^2 max error = {max(errs):.1e}"


def check_7():
    rep = period_scan(a="1", mu="1 + cos(2*pi*x)", lam=1.0, L_list=(0.01, 0.1, 0.5, 1, 2, 4), n=256,
                      tol_limit=1e-2, tol_mono=1e-9)
    return rep.passed, _failed(rep) + f"; k(L) = {[round(v, 6) for v in rep.meta['k']]}"


def check_8():
    t0 = time.perf_counter()
    rep = counterexample_2d(mu0="5 + 4*cos(2*pi*x)", lam_list=(1, 2, 5, 10, 20, 30), n=48, gap=0.05, j_tol=5e-3)
    dt = time.perf_counter() - t0
    m = rep.meta
    return rep.passed and dt < 300, (f"{_failed(rep)}; max gap {max(m['gaps']):.4f} at lambda={m['lambda0']:g}, "
                                     f"{dt:.1f} s")


def check_9():
    rep = verify_diffusion_rearrangement(lam_list=(0, 1, 2), n=128, cases=30, seed=42)
    return rep.passed, _failed(rep)


def check_10():
    rc = RandomCoefficientSpec(seed=42)
    rng = rc.rng(11)
    n = 512
    spec = GridSpec1D(1.0, n)
    worst = 0.0
    for i in range(10):
        c = _random_1d(rc, rng, spec)
        lam = float(rng.uniform(0, 2))
        k = k_lambda(c, lam)
        kd = dense_k(c.a.values, c.q.values, c.mu.values, lam)
        worst = max(worst, abs(k - kd))
    ks = [k_lambda(CoefficientSet1D.from_exprs(mu="1+cos(2*pi*x)", a="2+sin(2*pi*x)", q="0.5", n=m), 1.0)
          for m in (64, 128, 256)]
    ratio = abs(ks[0] - ks[1]) / abs(ks[1] - ks[2])
    ok = worst <= 1e-8 and 3.5 <= ratio <= 4.5
    return ok, f"max |Perron - dense| at n=512 = {worst:.1e}, refinement ratio = {ratio:.3f}"


def check_11():
    rng = np.random.default_rng(42)
    failures = 0
    for _ in range(100):
        n = 2 * int(rng.integers(2, 129))
        spec = GridSpec1D(1.0, n)
        f = GridFn1D(spec, rng.normal(size=n))
        g = GridFn1D(spec, np.abs(rng.normal(size=n)))
        fs, gs = schwarz(f), schwarz(g)
        checks = [
            np.array_equal(schwarz(fs).values, fs.values),
            np.array_equal(fs.values, schwarz_oracle(f.values)),
            np.array_equal(np.sort(fs.values), np.sort(f.values)),
            dirichlet_energy(fs) <= dirichlet_energy(f) * (1 + 1e-12),
            float(np.sum(f.values * g.values**2)) <= float(np.sum(fs.values * gs.values**2)) + 1e-9,
        ]
        failures += not all(checks)
    return failures == 0, f"{failures} failures over 100 random functions"


CRITERIA = {
    1: ("constant-coefficient exactness", check_1),
    2: ("rearrangement inequality suite", check_2),
    3: ("Holland transform and min-max formulas", check_3),
    4: ("min formula along lambda", check_4),
    5: ("growth-rate derivative formula", check_5),
    6: ("effective diffusivity", check_6),
    7: ("period scan", check_7),
    8: ("2D counterexample", check_8),
    9: ("diffusion rearrangement suite", check_9),
    10: ("dense oracle equivalence and refinement", check_10),
    11: ("rearrangement unit suite", check_11),
}


def _line(num, ok, detail):
    return f"ACCEPTANCE {num:2d} {'PASS' if ok else 'FAIL'}  {CRITERIA[num][0]}: {detail}"


@pytest.mark.slow
@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_acceptance(num, capsys):
    ok, detail = CRITERIA[num][1]()
    with capsys.disabled():
        print("\n" + _line(num, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for num in sorted(CRITERIA):
        ok, detail = CRITERIA[num][1]()
        results.append(ok)
        print(_line(num, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
