import math

import numpy as np
import pytest

from graphlap import geometry as geo
from graphlap import kernels as K
from graphlap.quadrature import (IntegralTask, NonConvergenceError, PolarRegion, frame_from_axis,
                                 integrate, integrate_subspace, mc_integrate)


def _ball_radial(R):
    def radial(sigma):
        n = len(sigma)
        return np.zeros((n, 1)), np.full((n, 1), R)
    return radial


def test_interval_second_moment():
    region = geo.Cone.full(1).polar_region(_ball_radial(1.0))
    res = integrate(IntegralTask(lambda t: t[:, 0] ** 2, region, tol=1e-12))
    assert abs(res.value - 2.0 / 3.0) < 1e-10


def test_upper_half_disk_first_moment():
    region = geo.Cone.half_space((0.0, 1.0)).polar_region(_ball_radial(1.0))
    res = integrate(IntegralTask(lambda t: t[:, 1], region, tol=1e-10))
    assert abs(res.value - 2.0 / 3.0) < 1e-8


def test_zero_integrand_is_exactly_zero():
    region = geo.Cone.full(2).polar_region(_ball_radial(1.0))
    res = integrate(IntegralTask(lambda t: np.zeros(len(t)), region))
    assert res.value == 0.0


@pytest.mark.parametrize("d", [2, 3, 4])
def test_ball_volume(d):
    region = geo.Cone.full(d).polar_region(_ball_radial(1.0))
    res = integrate(IntegralTask(lambda t: np.ones(len(t)), region, tol=1e-9))
    assert abs(res.value - math.pi ** (d / 2) / math.gamma(d / 2 + 1)) < 1e-8


def test_half_space_3d_volume():
    region = geo.Cone.half_space((0.0, 0.0, 1.0)).polar_region(_ball_radial(1.0))
    res = integrate(IntegralTask(lambda t: t[:, 2], region, tol=1e-10))
    # int over the upper half ball of t_3 = pi / 4
    assert abs(res.value - math.pi / 4) < 1e-8


def test_cone_additivity():
    k = K.tilted_gaussian(2)
    full = K.first_moment_vector(k, "full", 1e-9)
    up = K.first_moment_vector(k, geo.Cone.half_space((0.3, 0.7)), 1e-9)
    down = K.first_moment_vector(k, geo.Cone.half_space((-0.3, -0.7)), 1e-9)
    assert np.allclose(up + down, full, atol=2e-9)


def test_linearity():
    region = geo.Cone.full(2).polar_region(_ball_radial(2.0))
    phi = lambda t: np.exp(-t[:, 0] ** 2) * t[:, 1] ** 2
    psi = lambda t: np.cos(t[:, 0] + t[:, 1])
    a, b = 1.7, -0.4
    r1 = integrate(IntegralTask(phi, region, tol=1e-10))
    r2 = integrate(IntegralTask(psi, region, tol=1e-10))
    r3 = integrate(IntegralTask(lambda t: a * phi(t) + b * psi(t), region, tol=1e-10))
    assert abs(r3.value - (a * r1.value + b * r2.value)) <= 3e-10 * 3


def test_vector_valued_integrand():
    region = geo.Cone.full(2).polar_region(_ball_radial(1.0))
    res = integrate(IntegralTask(lambda t: np.stack([t[:, 0] ** 2, t[:, 1] ** 2], axis=1),
                                 region, tol=1e-10))
    assert np.allclose(res.value, [math.pi / 4, math.pi / 4], atol=1e-9)


def test_singular_origin_integrand():
    # int over the unit disk of |t|^-1.5 = 2 pi / 0.5
    region = geo.Cone.full(2).polar_region(_ball_radial(1.0), singular_origin=True)
    res = integrate(IntegralTask(lambda t: np.linalg.norm(t, axis=1) ** -1.5, region, tol=1e-8))
    assert abs(res.value - 4 * math.pi) < 1e-6


def test_unbounded_radial_rejected():
    region = geo.Cone.full(2).polar_region(_ball_radial(math.inf))
    with pytest.raises(ValueError):
        integrate(IntegralTask(lambda t: np.exp(-np.sum(t * t, axis=1)), region))


def test_nonconvergence_is_reported():
    # oscillation far beyond the refinement budget
    region = geo.Cone.full(2).polar_region(_ball_radial(1.0))
    with pytest.raises(NonConvergenceError):
        integrate(IntegralTask(lambda t: np.sin(1e7 * t[:, 0] * t[:, 1]), region, tol=1e-14))


def test_task_validation():
    region = geo.Cone.full(1).polar_region(_ball_radial(1.0))
    with pytest.raises(ValueError):
        IntegralTask(lambda t: t[:, 0], region, tol=0.0)
    with pytest.raises(ValueError):
        IntegralTask(lambda t: t[:, 0], region, truncation_radius=-1.0)


def test_truncation_radius_applied():
    region = geo.Cone.full(1).polar_region(_ball_radial(5.0))
    res = integrate(IntegralTask(lambda t: np.ones(len(t)), region, truncation_radius=0.5))
    assert abs(res.value - 1.0) < 1e-12


@pytest.mark.parametrize("axis", [(1.0, 0.0), (0.6, -0.8), (0.0, 0.0, 1.0), (1.0, 2.0, -2.0),
                                  (0.5, 0.5, 0.5, 0.5), (0.0, -2e-12, 1.0), (1e-13, 0.0, -1.0),
                                  (0.0, 0.0, -1.0)])
def test_frame_orthonormal_with_axis_last(axis):
    F = frame_from_axis(axis)
    a = np.asarray(axis) / np.linalg.norm(axis)
    assert np.allclose(F.T @ F, np.eye(len(a)), atol=1e-14)
    assert np.allclose(F[:, -1], a, atol=1e-14)
    assert np.max(np.abs(F[:, :-1].T @ a)) <= 1e-15


def test_subspace_odd_integrand_vanishes():
    E = np.array([[1.0], [0.0]])
    k = K.gaussian(2)
    res = integrate_subspace(lambda x: k(-x) * x[:, 0] * x[:, 0] ** 2, E, _ball_radial(7.0),
                             tol=1e-10)
    assert abs(res.value) < 1e-10


def test_subspace_tilted_line_integral():
    from scipy.integrate import quad

    k = K.tilted_gaussian(2)
    E = np.array([[1.0], [0.0]])
    res = integrate_subspace(lambda x: k(-x) * x[:, 0] ** 3, E, _ball_radial(7.0), tol=1e-11)
    ref, _ = quad(lambda x: math.exp(-x * x) * (1 - 0.5 * x * math.exp(-x * x)) * x ** 3,
                  -math.inf, math.inf, epsabs=1e-13)
    assert abs(res.value - ref) < 1e-9
    assert abs(ref - (-0.117498)) < 1e-6


def test_subspace_point_mass():
    res = integrate_subspace(lambda x: np.full(len(x), 3.5), np.zeros((1, 0)), _ball_radial(1.0))
    assert res.value == 3.5


def test_mc_constant_on_interval():
    r = mc_integrate(lambda x: np.ones(len(x)), geo.interval(0.0, 1.0), 1000, seed=3)
    assert r.value == 1.0 and r.stderr == 0.0


def test_mc_second_moment_matches_deterministic():
    r = mc_integrate(lambda x: x[:, 0] ** 2, geo.interval(-1.0, 1.0), 10 ** 6, seed=11)
    assert abs(r.value - 2.0 / 3.0) < 4 * r.stderr


def test_mc_determinism_and_validation():
    f = lambda x: np.sin(x[:, 0])
    a = mc_integrate(f, geo.interval(0.0, 2.0), 5000, seed=9)
    b = mc_integrate(f, geo.interval(0.0, 2.0), 5000, seed=9)
    assert a == b
    with pytest.raises(ValueError):
        mc_integrate(f, geo.interval(0.0, 1.0), 999, seed=1)


def _moment_battery():
    """Twenty kernel-moment integrands: (kernel, cone, integrand-maker, box half-width)."""
    up = geo.Cone.half_space((0.0, 1.0))
    right = geo.Cone.half_space((1.0,))
    out = []
    for k, w in [(K.gaussian(2), 6.0), (K.indicator_ball(2), 1.0), (K.epanechnikov(2), 1.0),
                 (K.indicator_box([1.0, 0.5]), 1.0), (K.tilted_gaussian(2), 6.0)]:
        for cone in (geo.Cone.full(2), up):
            out.append((k, cone, 2, w))
            out.append((k, cone, 1, w))
    return out


@pytest.mark.parametrize("case", range(20))
def test_deterministic_vs_mc_battery(case):
    k, cone, order, w = _moment_battery()[case]
    tol = 1e-9
    if order == 2:
        det = K.second_moment_matrix(k, cone, 1, tol).matrix[[0, 1], [0, 1]]
        fn = lambda t: (k(-t) * cone.contains(t))[:, None] * t ** 2
    else:
        det = K.first_moment_vector(k, cone, tol)
        fn = lambda t: (k(-t) * cone.contains(t))[:, None] * t
    box = geo.Box([-w, -w], [w, w])
    mc = mc_integrate(fn, box, 400_000, seed=100 + case)
    assert np.all(np.abs(mc.value - det) <= 4 * mc.stderr + 1e-12)
