import math

import numpy as np
import pytest

from oracles import FROZEN
from schwarzeig.gridfn import GridFn1D, GridFn2D, GridSpec1D, GridSpec2D, cell_mean, cell_mean2d, sample, sample2d
from schwarzeig.operators import CoefficientSet1D, CoefficientSet2D, assemble, k_lambda, principal_eig
from schwarzeig.varforms import (
    J_functional,
    beta_max,
    effective_diffusivity_1d,
    effective_diffusivity_nd,
    holland_max_check,
    holland_transform,
    rayleigh,
    min_formula_1d,
    thm21_functional_1d,
)


def _smooth(rng, spec, scale, modes=3):
    x = spec.x
    out = np.zeros(spec.n)
    for k in range(1, modes + 1):
        out += scale / k * (rng.uniform(-1, 1) * np.cos(2 * np.pi * k * x) + rng.uniform(-1, 1) * np.sin(2 * np.pi * k * x))
    return GridFn1D(spec, out)


@pytest.fixture
def nonsym():
    return CoefficientSet1D.from_exprs(mu="1+cos(2*pi*x)+0.3*sin(4*pi*x)", a="2+cos(2*pi*x)", q="0.7", n=128)


# Rayleigh quotient and effective diffusivity


def test_rayleigh_examples():
    spec = GridSpec1D(1.0, 128)
    a, mu = sample("1.5+0.5*cos(2*pi*x)", spec), sample("1+sin(2*pi*x)", spec)
    assert abs(rayleigh(a, mu, GridFn1D.constant(spec, 3.0)) + cell_mean(mu)) <= 1e-14
    c = CoefficientSet1D.build(mu, a)
    p = principal_eig(assemble(c, 0.0))
    assert abs(rayleigh(a, mu, p.phi) - p.k) <= 1e-10
    rng = np.random.default_rng(0)
    for _ in range(50):
        alpha = GridFn1D(spec, rng.uniform(0.1, 2.0, spec.n))
        assert rayleigh(a, mu, alpha) >= p.k - 1e-8
    with pytest.raises(ValueError):
        rayleigh(a, mu, GridFn1D.constant(spec, 0.0))


def test_effective_diffusivity_1d_examples():
    assert effective_diffusivity_1d(GridFn1D.constant(GridSpec1D(1.0, 16), 2.5)) == pytest.approx(2.5, abs=1e-15)
    D = effective_diffusivity_1d(sample("2+cos(2*pi*x)", GridSpec1D(1.0, 64)))
    assert abs(D - FROZEN["deff_2pluscos"]) <= 1e-10
    two = sample("1 + indicator(0, 0.5)", GridSpec1D(1.0, 16))
    assert effective_diffusivity_1d(two) == pytest.approx(4 / 3, abs=1e-15)
    with pytest.raises(ValueError):
        effective_diffusivity_1d(GridFn1D(GridSpec1D(1.0, 4), [1, -1, 1, 1]))


def _scalar2d(expr, n=64):
    spec = GridSpec2D(1.0, 1.0, n, n)
    return CoefficientSet2D.scalar(sample2d(expr, spec), GridFn2D.constant(spec, 0.0))


def test_effective_diffusivity_nd_examples():
    sol = effective_diffusivity_nd(_scalar2d("1", 16), (1.0, 0.0))
    assert abs(sol.D - 1) <= 1e-12 and np.abs(sol.chi.values).max() <= 1e-12
    lam = _scalar2d("2+cos(2*pi*x)")
    sol = effective_diffusivity_nd(lam, (1.0, 0.0))
    a1 = sample("2+cos(2*pi*x)", GridSpec1D(1.0, 64))
    assert abs(sol.D - effective_diffusivity_1d(a1)) <= 1e-6
    assert abs(cell_mean2d(sol.chi)) <= 1e-12
    par = _scalar2d("2+cos(2*pi*y)")
    sol = effective_diffusivity_nd(par, (1.0, 0.0))
    assert abs(sol.D - cell_mean2d(par.a11)) <= 1e-6
    assert np.abs(sol.chi.values).max() <= 1e-10


def test_effective_diffusivity_bounds_checkerboard():
    c = _scalar2d("2 + cos(2*pi*x)*cos(2*pi*y) + 0.5*sin(2*pi*(x+2*y))", 32)
    for e in [(1.0, 0.0), (0.0, 1.0), (math.sqrt(0.5), math.sqrt(0.5))]:
        sol = effective_diffusivity_nd(c, e)
        harm = 1.0 / cell_mean2d(1.0 / c.a11)
        arith = cell_mean2d(c.a11)
        assert harm - 1e-10 <= sol.D <= arith + 1e-10
        assert sol.residual <= 1e-8


# Holland transform and J


def test_holland_symmetric_case():
    c = CoefficientSet1D.from_exprs(mu="1+cos(2*pi*x)", a="1.5+0.5*sin(2*pi*x)", n=128)
    p = principal_eig(assemble(c, 0.0))
    hp = holland_transform(p)
    assert np.abs(hp.beta.values).max() <= 1e-12
    np.testing.assert_allclose(hp.alpha.values, p.phi.values / math.sqrt(cell_mean(p.phi * p.phi)), atol=1e-12)
    assert abs(cell_mean(hp.alpha * hp.alpha) - 1) <= 1e-12


def test_holland_gradient_drift():
    errs = []
    for n in (128, 256):
        spec = GridSpec1D(1.0, n)
        a = sample("1.5 + 0.5*sin(2*pi*x)", spec)
        dQ = sample("-0.8*pi*sin(2*pi*x)", spec)
        Q = sample("0.4*cos(2*pi*x)", spec)
        c = CoefficientSet1D.build(sample("1+cos(2*pi*x)", spec), a, a * dQ)
        hp = holland_transform(principal_eig(assemble(c, 0.0)))
        errs.append(np.abs(hp.beta.values + (Q.values - Q.values.mean()) / 2).max())
    assert errs[0] <= 1e-3
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_holland_transform_random_residual():
    rng = np.random.default_rng(1)
    spec = GridSpec1D(1.0, 256)
    for _ in range(3):
        a = _smooth(rng, spec, 0.5)
        a = a - a.min() + 0.5
        q = _smooth(rng, spec, 1.0)
        c = CoefficientSet1D.build(_smooth(rng, spec, 1.0) + 1.0, a, q)
        hp = holland_transform(principal_eig(assemble(c, 0.0)))
        assert hp.residual <= 1e-6
        assert abs(cell_mean(hp.beta)) <= 1e-12 and hp.alpha.min() > 0


def test_holland_transform_needs_adjoint():
    c = CoefficientSet1D.from_exprs(mu="1", n=16)
    with pytest.raises(ValueError):
        holland_transform(principal_eig(assemble(c, 0.0), adjoint=False))


def test_J_examples(nonsym):
    spec = nonsym.spec
    zero = GridFn1D.constant(spec, 0.0)
    sym = nonsym.replace(q=zero)
    alpha = sample("1 + 0.3*cos(2*pi*x)", spec)
    r = rayleigh(sym.a, sym.mu, alpha)
    assert abs(J_functional(sym, alpha, zero) - r) <= 1e-12 * (1 + abs(r))

    p = principal_eig(assemble(nonsym, 0.0))
    hp = holland_transform(p)
    j0 = J_functional(nonsym, hp.alpha, hp.beta)
    assert abs(j0 - p.k) <= 1e-6
    rng = np.random.default_rng(2)
    for _ in range(20):
        b = hp.beta + _smooth(rng, spec, 0.5)
        assert J_functional(nonsym, hp.alpha, b) <= j0 + 1e-9


def test_beta_max_recovers_holland_beta(nonsym):
    p = principal_eig(assemble(nonsym, 0.0))
    hp = holland_transform(p)
    beta, J = beta_max(assemble(nonsym, 0.0), hp.alpha)
    assert abs(J - p.k) <= 1e-10
    np.testing.assert_allclose(beta, hp.beta.values, atol=1e-8)


def test_holland_max_check(nonsym):
    p = principal_eig(assemble(nonsym, 0.0))
    hp = holland_transform(p)
    assert abs(holland_max_check(nonsym, hp.beta) - p.k) <= 1e-6
    zero = GridFn1D.constant(nonsym.spec, 0.0)
    sym = nonsym.replace(q=zero)
    assert abs(holland_max_check(sym, zero) - k_lambda(sym)) <= 1e-10
    rng = np.random.default_rng(3)
    for _ in range(20):
        b = hp.beta + _smooth(rng, nonsym.spec, 1.0)
        assert holland_max_check(nonsym, b) <= p.k + 1e-9


def test_min_max_equals_max_min(nonsym):
    # inner optima are exact: beta by Newton, alpha by the symmetric eigen-solve
    spec = nonsym.spec
    M = assemble(nonsym, 0.0)
    hp = holland_transform(principal_eig(M))
    rng = np.random.default_rng(4)
    alphas = [hp.alpha] + [hp.alpha * _smooth(rng, spec, 0.3).map(np.exp) for _ in range(10)]
    betas = [hp.beta] + [hp.beta + _smooth(rng, spec, 0.5) for _ in range(10)]
    min_max = min(beta_max(M, a)[1] for a in alphas)
    max_min = max(holland_max_check(nonsym, b) for b in betas)
    assert abs(min_max - max_min) <= 2e-10


# the min formula along lambda


@pytest.mark.parametrize("lam", [0.0, 0.5, 2.0])
def test_min_formula_constant_alpha(lam):
    spec = GridSpec1D(1.0, 64)
    mu = sample("1+cos(2*pi*x)", spec)
    one = GridFn1D.constant(spec, 1.0)
    expected = -cell_mean(mu) - lam**2
    assert abs(min_formula_1d(one, mu, lam, one) - expected) <= 1e-10
    assert abs(min_formula_1d(one, mu, lam, one, form="closed") - expected) <= 1e-12


def test_min_formula_at_zero_is_rayleigh():
    spec = GridSpec1D(1.0, 64)
    a, mu = sample("2+sin(2*pi*x)", spec), sample("1+cos(2*pi*x)", spec)
    alpha = sample("1 + 0.4*cos(2*pi*x) + 0.1*sin(6*pi*x)", spec)
    r = rayleigh(a, mu, alpha)
    assert abs(min_formula_1d(a, mu, 0.0, alpha) - r) <= 1e-10
    assert abs(min_formula_1d(a, mu, 0.0, alpha, form="closed") - r) <= 1e-12
    with pytest.raises(ValueError):
        min_formula_1d(a, mu, 1.0, alpha, form="other")
    with pytest.raises(ValueError):
        min_formula_1d(a, mu, 1.0, alpha * 0.0)
    assert thm21_functional_1d is min_formula_1d


def test_min_formula_closed_form_converges():
    errs = []
    for n in (64, 128):
        spec = GridSpec1D(1.0, n)
        a, mu = sample("2+sin(2*pi*x)", spec), sample("1+cos(2*pi*x)", spec)
        p = principal_eig(assemble(CoefficientSet1D.build(mu, a), 1.5))
        alpha = (p.phi * p.phi_adj).map(np.sqrt)
        errs.append(abs(min_formula_1d(a, mu, 1.5, alpha, form="closed") - p.k))
    assert errs[1] < errs[0] / 3
