import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from graphlap import functions as F
from graphlap import geometry as geo
from graphlap import kernels as K
from graphlap import operators as op
from graphlap import sampling as smp
from graphlap.geometry import Cone
from graphlap.stats import loglog_slope

TOL = 1e-8
IND = K.indicator_ball(1)
I = geo.interval(-1.0, 1.0)
G_UNIF = smp.uniform(I)
SQ = F.polynomial([(1.0, (2,))], 1)
X1 = F.linear([1.0])
DISK = geo.Ball([0.0, 0.0], 1.0)
BOTTOM = (0.0, -1.0)


# --- empirical ---------------------------------------------------------------


def test_empirical_constant_is_exactly_zero():
    b = smp.sample(G_UNIF, 1000, seed=1)
    assert op.empirical_laplacian(IND, F.constant(2.5, 1), [0.0], 0.1, b) == 0.0


def test_empirical_no_points_in_support():
    pts = np.array([[0.5], [0.9], [-0.7]])
    assert op.empirical_laplacian(IND, SQ, [0.0], 0.1, pts) == 0.0


def test_empirical_direct_formula():
    pts = np.array([[0.05], [-0.02], [0.3]])
    eps = 0.1
    want = (0.05 ** 2 + 0.02 ** 2) / (3 * eps ** 3)
    assert op.empirical_laplacian(IND, SQ, [0.0], eps, pts) == pytest.approx(want, rel=1e-15)


def test_empirical_permutation_invariance_bitwise():
    k = K.tilted_gaussian(2)
    f = F.trig(1.0, [3.0, -2.0], 0.2)
    b = smp.sample(smp.uniform(geo.Box([-1, -1], [1, 1])), 20_000, seed=3).points
    base = op.empirical_laplacian(k, f, [0.1, 0.2], 0.2, b)
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert op.empirical_laplacian(k, f, [0.1, 0.2], 0.2, b[rng.permutation(len(b))]) == base


def test_empirical_errors():
    b = smp.sample(G_UNIF, 10, seed=1)
    with pytest.raises(op.OperatorError):
        op.empirical_laplacian(IND, SQ, [0.0], 0.0, b)
    with pytest.raises(op.OperatorError):
        op.empirical_laplacian(IND, SQ, [0.0, 0.0], 0.1, b)
    with pytest.raises(op.OperatorError):
        op.empirical_laplacian(K.gaussian(2), SQ, [0.0], 0.1, b)


def test_remainder_second_moment_scales_like_eps_squared():
    n, reps = 2000, 400
    eps_list = [0.2, 0.1, 0.05, 0.025]
    var = []
    for eps in eps_list:
        z = [op.quadratic_remainder_statistic(IND, SQ, [0.0], eps, smp.sample(G_UNIF, n, 9, r))
             for r in range(reps)]
        var.append(np.var(z, ddof=1))
    assert loglog_slope(eps_list, var) >= 1.8
    # exact value for this configuration: eps^2 / 5 - eps^3 / 9
    for eps, v in zip(eps_list, var):
        assert abs(v / (eps ** 2 / 5 - eps ** 3 / 9) - 1) < 0.25


# --- averaging operator ------------------------------------------------------


def test_averaging_motivating_example():
    v = op.averaging_operator(IND, SQ, G_UNIF, [0.0], 0.01)
    assert abs(v.value - 1.0 / 3.0) < 1e-3
    assert abs(v.value - 1.0 / 3.0) < 10 * TOL  # exact for this configuration


def test_averaging_constant_and_linear_vanish():
    assert abs(op.averaging_operator(IND, F.constant(1.0, 1), G_UNIF, [0.1], 0.2).value) <= TOL
    g2 = smp.uniform(geo.Box([-1, -1], [1, 1]))
    v = op.averaging_operator(K.epanechnikov(2), F.linear([1.0, -3.0], 2.0), g2, [0.1, 0.2], 0.3)
    assert abs(v.value) <= TOL


def test_operator_value_is_sum_of_components():
    v = op.averaging_operator(K.gaussian(1), F.trig(1.0, [2.0]), smp.linear(I, [0.5]), [0.1], 0.1)
    assert abs(v.value - sum(v.components.values())) <= 1e-12
    assert set(v.components) == {"first_order", "remainder"}


def test_rate_law_exact():
    f = F.holder(0.5, [0.0])
    eps_list = [0.2, 0.1, 0.05, 0.025, 0.02]
    vals = [op.averaging_operator(IND, f, G_UNIF, [0.0], e).value for e in eps_list]
    for e, v in zip(eps_list, vals):
        assert abs(v - 0.5 * e ** 0.5 * 2 / 3.5) <= TOL
    assert abs(loglog_slope(eps_list, vals) - 0.5) <= 0.05


def test_interior_consistency_along_eps():
    k = K.indicator_ball(2)
    g = smp.linear(geo.Box([-1, -1], [1, 1]), [0.3, -0.2])
    f = F.trig(1.0, [1.3, 0.7], 0.4)
    p = [0.0, 0.0]
    lim = op.limit_laplacian(k, f, g, p).value
    errs = [abs(op.averaging_operator(k, f, g, p, e).value - lim) for e in (0.2, 0.1, 0.05, 0.025)]
    assert all(b <= a + 2 * TOL for a, b in zip(errs, errs[1:]))
    assert errs[-1] < errs[0] / 4


def test_singular_kernel_rejected_in_the_interior():
    k = K.power_law(2, 0.5)
    g = smp.uniform(geo.Box([0, 0], [1, 1]))
    f = F.polynomial([(1.0, (2, 0))], 2)
    with pytest.raises(K.KernelError):
        op.averaging_operator(k, f, g, [0.5, 0.5], 0.1)
    with pytest.raises(K.KernelError):
        op.limit_laplacian(k, f, g, [0.5, 0.5])
    # at the corner the cone is a wedge and the kernel is accepted
    v = op.averaging_operator(k, f, g, [0.0, 0.0], 0.1)
    assert math.isfinite(v.value) and v.value > 0


# --- limits ------------------------------------------------------------------


def test_limit_laplacian_examples():
    assert abs(op.limit_laplacian(IND, SQ, G_UNIF, [0.0]).value - 1 / 3) <= TOL
    assert abs(op.limit_laplacian(IND, F.linear([2.0], 1.0), G_UNIF, [0.3]).value) <= TOL
    g = smp.uniform(geo.Box([-1, -1], [1, 1]))
    f = F.polynomial([(1.0, (2, 0)), (1.0, (0, 2))], 2)
    v = op.limit_laplacian(K.gaussian(2), f, g, [0.0, 0.0])
    assert abs(v.value - math.pi * 0.25) <= 4 * TOL
    assert set(v.components) == {"gradient", "hessian"}


def test_limit_gradient_term():
    # grad f . M grad g with M = 2/3 for the indicator: f = x, g = (1 + x)/2
    v = op.limit_laplacian(IND, X1, smp.linear(I, [1.0]), [0.0])
    assert abs(v.components["gradient"] - 0.5 * 2 / 3) <= TOL
    assert v.components["hessian"] == 0.0


def test_limit_laplacian_requires_interior():
    with pytest.raises(op.OperatorError):
        op.limit_laplacian(IND, SQ, G_UNIF, [1.0])


def test_cone_version_examples():
    g = smp.linear(geo.Box([-1, -1], [1, 1]), [0.2, 0.1])
    f = F.trig(1.0, [1.0, 2.0])
    a = op.limit_laplacian(K.gaussian(2), f, g, [0.1, 0.1])
    b = op.limit_laplacian_cone(K.gaussian(2), f, g, [0.1, 0.1], Cone.full(2))
    assert abs(a.value - b.value) <= 1e-12
    half = smp.uniform(geo.interval(0.0, 1.0))
    v = op.limit_laplacian_cone(IND, SQ, half, [0.0], Cone.half_space((1.0,)))
    assert abs(v.value - 1 / 3) <= TOL
    assert op.limit_laplacian_cone(IND, SQ, half, [0.0], Cone("degenerate", 1)).value == 0.0


def test_cusp_gives_zero():
    cusp = geo.Cusp()
    g = smp.Density(cusp, lambda x: np.ones(len(x)), lambda x: np.zeros_like(x), sup=1.0)
    f = F.polynomial([(1.0, (2, 0)), (1.0, (0, 1))], 2)
    for k in (K.gaussian(2), K.power_law(2, 0.5)):
        v = op.combined_limit(k, f, g, [0.0, 0.0])
        assert v.value == 0.0


# --- boundary ----------------------------------------------------------------


def test_boundary_correction_flat_is_zero():
    S = geo.HalfSpace((0.0, 1.0))
    bd = geo.boundary_data_at(S, (0.0, 0.0))
    v = op.boundary_correction(K.tilted_gaussian(2), F.linear([1.0, 0.5]), (0.0, 0.0), bd)
    assert v.value == 0.0


def test_boundary_correction_even_tangential_is_zero():
    bd = geo.boundary_data_at(DISK, BOTTOM)
    for k in (K.gaussian(2), K.epanechnikov(2), K.tilted_gaussian(2, axis=1)):
        v = op.boundary_correction(k, F.linear([1.0, 0.5]), BOTTOM, bd)
        assert abs(v.value) <= TOL


def test_boundary_correction_tilted_disk():
    bd = geo.boundary_data_at(DISK, BOTTOM)
    line, _ = quad(lambda x: math.exp(-x * x) * (1 - 0.5 * x * math.exp(-x * x)) * x ** 3,
                   -math.inf, math.inf, epsabs=1e-13)
    for cf in (0.5, 1.0):
        v = op.boundary_correction(K.tilted_gaussian(2), X1_2D, BOTTOM, bd, convention_factor=cf)
        assert abs(v.value - (-1.0 * cf * 1.0 * line)) <= TOL
    with pytest.raises(op.OperatorError):
        op.boundary_correction(K.tilted_gaussian(2), X1_2D, BOTTOM, bd, convention_factor=2.0)


X1_2D = F.linear([1.0, 0.0])


def test_boundary_vector_is_tangential():
    bd = geo.boundary_data_at(geo.Ball([0.0, 0.0, 0.0], 1.0), (0.0, 0.0, -1.0))
    v = op.boundary_vector(K.tilted_gaussian(3), bd)
    assert abs(v @ bd.normal) <= 1e-14
    assert abs(v[0]) > 1e-3


def test_combined_limit_interior_and_half_line():
    assert op.combined_limit(IND, SQ, G_UNIF, [0.2]).value == \
        op.limit_laplacian(IND, SQ, G_UNIF, [0.2]).value
    half = smp.uniform(geo.interval(0.0, 1.0))
    assert abs(op.combined_limit(IND, SQ, half, [0.0]).value - 1 / 3) <= TOL


def test_combined_limit_divergent_regime():
    half = smp.uniform(geo.interval(0.0, 1.0))
    with pytest.raises(op.DivergentRegimeError) as exc:
        op.combined_limit(IND, X1, half, [0.0])
    assert abs(exc.value.residual - 0.5) <= TOL


def test_combined_limit_flat_and_even_cases_reduce_to_cone():
    g = smp.uniform(geo.Box([-1, 0], [1, 2]))
    # zero normal derivative at the disk bottom: f = x^2 + 0.3 x + (y + 1)^2
    f = F.polynomial([(1.0, (2, 0)), (0.3, (1, 0)), (1.0, (0, 2)), (2.0, (0, 1)), (1.0, (0, 0))], 2)
    p = (0.0, 0.0)
    c = op.combined_limit(K.tilted_gaussian(2, axis=1), F.polynomial([(1.0, (2, 0)), (1.0, (0, 2))], 2),
                          g, p)
    base = op.limit_laplacian_cone(K.tilted_gaussian(2, axis=1),
                                   F.polynomial([(1.0, (2, 0)), (1.0, (0, 2))], 2), g, p,
                                   Cone.half_space((0.0, 1.0)))
    assert c.components["boundary"] == 0.0 and c.value == base.value
    gd = smp.uniform(DISK)
    ce = op.combined_limit(K.gaussian(2), f, gd, BOTTOM)
    be = op.limit_laplacian_cone(K.gaussian(2), f, gd, BOTTOM, Cone.half_space((0.0, 1.0)))
    assert abs(ce.components["boundary"]) <= TOL
    assert abs(ce.value - be.value) <= 2 * TOL


# --- variances ---------------------------------------------------------------


def test_clt_variance_examples():
    assert op.clt_variance(IND, F.constant(1.0, 1), G_UNIF, [0.0]) == 0.0
    assert abs(op.clt_variance(IND, X1, G_UNIF, [0.0]) - 1 / 3) <= TOL
    g = smp.uniform(geo.Box([-0.5, -0.5], [0.5, 0.5]))
    v = op.clt_variance(K.gaussian(2), F.linear([1.0, 1.0]), g, [0.0, 0.0])
    assert abs(v - math.pi / 4) <= 4 * TOL


def test_finite_eps_variance_limits():
    g = smp.linear(I, [1.0])
    s2 = op.clt_variance(IND, X1, g, [0.0])
    assert abs(op.finite_eps_variance(IND, X1, g, [0.0], 1e-3) - s2) <= TOL
    # uniform g, even K: the subtracted square vanishes
    for eps in (0.1, 0.3, 0.5):
        assert abs(op.finite_eps_variance(IND, X1, G_UNIF, [0.0], eps)
                   - op.clt_variance(IND, X1, G_UNIF, [0.0])) <= TOL


def test_finite_eps_variance_signs_differ_by_twice_the_square():
    g = smp.linear(I, [1.0])
    eps = 0.1
    m = op.finite_eps_variance(IND, X1, g, [0.0], eps)
    p = op.finite_eps_variance(IND, X1, g, [0.0], eps, sign="plus")
    # first moment of K(-t) t g(eps t) is eps * (1/2) * (2/3)
    assert abs((p - m) - 2 * eps * (eps / 3) ** 2) <= 4 * TOL
    with pytest.raises(op.OperatorError):
        op.finite_eps_variance(IND, X1, g, [0.0], eps, sign="other")


def test_cancellation_residual_interior_even_is_zero():
    r = op.cancellation_residual(K.gaussian(2), F.linear([1.0, 2.0]), (0.0, 0.0), DISK, 0.05, 1.0)
    assert abs(r) <= TOL


def test_cancellation_residual_half_line_scaling():
    S = geo.HalfSpace((1.0,))
    for eps in (0.1, 0.05, 0.025):
        r = op.cancellation_residual(IND, X1, [0.0], S, eps, 1.0)
        assert abs(r * 2 * eps - 1.0) < 0.01
        assert abs(r - 1 / (2 * eps)) <= TOL


def test_cancellation_residual_rho_independence():
    k = K.tilted_gaussian(2)
    for eps in (0.1, 0.05):
        a = op.cancellation_residual(k, X1_2D, BOTTOM, DISK, eps, 0.5)
        b = op.cancellation_residual(k, X1_2D, BOTTOM, DISK, eps, 2.0)
        assert abs(a - b) <= 2 * TOL


# --- linearity ---------------------------------------------------------------

_F1 = F.polynomial([(1.0, (2,)), (0.5, (3,))], 1)
_F2 = F.trig(0.7, [2.0], 0.1)
_G = smp.linear(I, [0.6])
_BATCH = smp.sample(_G, 5000, seed=4)


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=25, deadline=None)
def test_linearity_in_f(a, b):
    h = F.linear_combination([(a, _F1), (b, _F2)])
    p, eps = [0.1], 0.2
    for fn in (lambda f: op.averaging_operator(IND, f, _G, p, eps).value,
               lambda f: op.limit_laplacian(IND, f, _G, p).value,
               lambda f: op.combined_limit(IND, f, _G, p).value):
        lhs, r1, r2 = fn(h), fn(_F1), fn(_F2)
        assert abs(lhs - (a * r1 + b * r2)) <= 5 * TOL
    e = lambda f: op.empirical_laplacian(IND, f, p, eps, _BATCH)
    lhs, r1, r2 = e(h), e(_F1), e(_F2)
    assert abs(lhs - (a * r1 + b * r2)) <= 1e-12 * max(1.0, abs(r1) + abs(r2)) * 10


_BD = geo.boundary_data_at(DISK, BOTTOM)


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=25, deadline=None)
def test_boundary_correction_linear_in_f(a, b):
    f1, f2 = F.linear([1.0, 0.3]), F.trig(1.0, [1.0, 0.5])
    h = F.linear_combination([(a, f1), (b, f2)])
    k = K.tilted_gaussian(2)
    c = lambda f: op.boundary_correction(k, f, BOTTOM, _BD).value
    assert abs(c(h) - (a * c(f1) + b * c(f2))) <= 5 * TOL


@pytest.mark.parametrize("k,g,p", [
    (IND, G_UNIF, [0.3]),
    (K.gaussian(1), smp.linear(I, [0.8]), [0.0]),
    (K.tilted_gaussian(2), smp.uniform(DISK), (0.1, -0.2)),
])
def test_constants_annihilated(k, g, p):
    c = F.constant(-4.0, k.dim)
    assert abs(op.averaging_operator(k, c, g, p, 0.1).value) <= TOL
    assert op.combined_limit(k, c, g, p).value == 0.0
    assert op.cancellation_residual(k, c, p, g.domain, 0.1, 1.0) == 0.0
    b = smp.sample(g, 500, seed=0)
    assert op.empirical_laplacian(k, c, p, 0.1, b) == 0.0


def test_singular_kernel_at_corner_matches_wedge_limit():
    # f = |x|^2 at the corner of the unit square, g = 1: D_eps f = int_quarter disk |t|^1.5 = pi/7
    k = K.power_law(2, 0.5)
    g = smp.uniform(geo.Box([0, 0], [1, 1]))
    f = F.polynomial([(1.0, (2, 0)), (1.0, (0, 2))], 2)
    for eps in (0.2, 0.05):
        assert abs(op.averaging_operator(k, f, g, [0.0, 0.0], eps).value - math.pi / 7) <= 1e-7
    assert abs(op.combined_limit(k, f, g, [0.0, 0.0]).value - math.pi / 7) <= 1e-7
