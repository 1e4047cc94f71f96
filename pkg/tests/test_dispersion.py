import math

import numpy as np
import pytest

from schwarzeig.gridfn import GridFn1D, GridSpec1D, cell_mean, sample
from schwarzeig.operators import CoefficientSet1D, CoefficientSet2D, SolverError, k_lambda
from schwarzeig.dispersion import (
    NoInvasionError,
    dispersion_curve,
    drift_shift,
    j_shifted,
    large_drift_limit_diagonal,
    spreading_speed,
)
from schwarzeig.varforms import effective_diffusivity_1d


def test_constant_curve_is_exact():
    c = CoefficientSet1D.from_exprs(mu="3", n=32)
    curve = dispersion_curve(c, lam_grid=(0, 0.5, 1, 2, 5))
    np.testing.assert_allclose(curve.ks, [-3 - l * l for l in curve.lams], atol=1e-10)
    assert curve.is_concave()
    assert all(r <= 1e-8 for r in curve.residuals)
    assert curve.to_rows()[1] == {"lambda": 0.5, "k": curve.ks[1], "residual": curve.residuals[1]}


def test_cos_curve_concave_and_below_mean():
    c = CoefficientSet1D.from_exprs(mu="cos(2*pi*x)", n=128)
    curve = dispersion_curve(c, lam_grid=np.linspace(0, 6, 25))
    assert curve.concavity_defect() <= 1e-8
    assert curve.ks[0] <= -cell_mean(c.mu)


def test_curve_rejects_unsorted_grid():
    c = CoefficientSet1D.from_exprs(mu="1", n=16)
    with pytest.raises(ValueError):
        dispersion_curve(c, lam_grid=(0, 2, 1))


@pytest.mark.parametrize("mu0,D", [(1.0, 1.0), (4.0, 1.0), (2.0, 0.5)])
def test_constant_speed(mu0, D):
    c = CoefficientSet1D.from_exprs(mu=str(mu0), a=str(D), n=32)
    s = spreading_speed(c)
    assert abs(s.c_star - 2 * math.sqrt(D * mu0)) <= 1e-7
    assert abs(s.lambda_star - math.sqrt(mu0 / D)) <= 1e-7
    assert s.bracket[0] < s.lambda_star < s.bracket[1]
    assert abs(s.c_star + s.k_star / s.lambda_star) <= 1e-12


def test_speed_matches_dense_scan():
    c = CoefficientSet1D.from_exprs(mu="1+cos(2*pi*x)", n=128)
    s = spreading_speed(c)
    assert s.c_star >= 2.0 - 1e-8
    lams = np.arange(0.5, 3.0, 1e-3)
    scan = min(-k_lambda(c, l) / l for l in lams)
    # the scan can only miss the minimum from above
    assert s.c_star <= scan + 1e-8
    assert scan - s.c_star <= 1e-5


def test_speed_lower_bound_random():
    rng = np.random.default_rng(7)
    spec = GridSpec1D(1.0, 128)
    x = spec.x
    for _ in range(5):
        a = GridFn1D(spec, 1.5 + 0.8 * np.cos(2 * np.pi * x + rng.uniform(0, 6)))
        mu = GridFn1D(spec, rng.uniform(0.5, 2) + rng.uniform(-2, 2) * np.sin(2 * np.pi * x + rng.uniform(0, 6)))
        # a divergence-free, mean-zero drift in 1D is zero
        c = CoefficientSet1D.build(mu, a)
        s = spreading_speed(c)
        assert s.c_star >= 2 * math.sqrt(effective_diffusivity_1d(a) * cell_mean(mu)) - 1e-8


def test_averaging_comparison_constant_diffusion():
    # with a variable diffusion the comparison can fail for lam > 0, so a is constant here
    rng = np.random.default_rng(8)
    spec = GridSpec1D(1.0, 128)
    x = spec.x
    for D in (0.5, 1.0, 2.0):
        mu = GridFn1D(spec, rng.uniform(0.5, 2) + rng.uniform(-2, 2) * np.sin(2 * np.pi * x + rng.uniform(0, 6)))
        a = GridFn1D.constant(spec, D)
        flat = CoefficientSet1D.build(GridFn1D.constant(spec, cell_mean(mu)), a)
        assert spreading_speed(CoefficientSet1D.build(mu, a)).c_star >= spreading_speed(flat).c_star - 1e-8


def test_no_invasion():
    with pytest.raises(NoInvasionError, match="no KPP invasion regime"):
        spreading_speed(CoefficientSet1D.from_exprs(mu="-1", n=16))
    assert issubclass(NoInvasionError, ValueError)


def test_bracket_limit_and_explicit_bracket():
    with pytest.raises(SolverError):
        spreading_speed(CoefficientSet1D.from_exprs(mu="100", n=16), lam_max=5.0)
    c = CoefficientSet1D.from_exprs(mu="1", n=16)
    s = spreading_speed(c, bracket=(0.2, 4.0))
    assert abs(s.c_star - 2) <= 1e-7
    with pytest.raises(ValueError):
        spreading_speed(c, bracket=(2.0, 1.0))


def test_two_dimensional_requires_direction():
    c = CoefficientSet2D.from_exprs(mu="1", n1=8, n2=8)
    with pytest.raises(ValueError):
        spreading_speed(c)
    s = spreading_speed(c, (1.0, 0.0), bracket=(0.2, 4.0))
    assert abs(s.c_star - 2) <= 1e-6


def test_j_shifted_examples():
    c = CoefficientSet2D.from_exprs(mu="1.5", n1=16, n2=16)
    for lam in (0.5, 2.0):
        assert abs(j_shifted(c, (1.0, 0.0), lam) + 1.5) <= 1e-8
    assert drift_shift(c, (1.0, -1.0)) == pytest.approx(2.0)
    diag = CoefficientSet2D.from_exprs(mu="5+4*cos(2*pi*(x+y))", n1=32, n2=32)
    j = [j_shifted(diag, (1.0, -1.0), lam) for lam in (1, 5, 10)]
    assert max(j) - min(j) <= 1e-8


def test_large_drift_limits():
    spec = GridSpec1D(1.0, 64)
    lo, hi = large_drift_limit_diagonal(GridFn1D.constant(spec, 2.0))
    assert lo == pytest.approx(-2.0, abs=1e-10) and hi == pytest.approx(-2.0, abs=1e-14)
    lo, hi = large_drift_limit_diagonal(sample("5+4*cos(2*pi*x)", spec))
    assert hi == pytest.approx(-5.0, abs=1e-12)
    assert lo < hi - 0.05
    with pytest.raises(ValueError):
        large_drift_limit_diagonal(np.ones(4))
