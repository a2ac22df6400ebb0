"""The empirical graph Laplacian, its expectation, and their limits.

Notation: K is the kernel, g the sampling density on S, f the test
function and p the evaluation point.

* ``empirical_laplacian``  (1 / (n eps^(d+2))) sum_j K((p - X_j)/eps) (f(X_j) - f(p))
* ``averaging_operator``   eps^-2 int_{(S-p)/eps} K(-t) (f(p + eps t) - f(p)) g(p + eps t) dt
* ``limit_laplacian``      grad f . M grad g + (g(p)/2) sum_ij H_ij M_ij,  M_ij = int K(-t) t_i t_j
* ``limit_laplacian_cone`` the same with moments over the limiting cone at p
* ``boundary_correction``  tangent-plane term for curved boundaries
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .functions import TestFunction
from .kernels import (DEFAULT_TOL, Kernel, KernelError, first_moment_vector,
                      second_moment_matrix)
from .quadrature import IntegralTask, PolarRegion, integrate, integrate_subspace
from .sampling import Density, SampleBatch

# default convention for the boundary-graph Hessian (Taylor half)
CONVENTION_FACTOR = 0.5


class OperatorError(ValueError):
    pass


class DivergentRegimeError(ArithmeticError):
    """The cancellation condition fails, so the limit operator is undefined.

    ``residual`` holds ``grad f(p) . v`` with v the first moment of K over
    the limiting cone; the rescaled operator grows like ``residual / eps``.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class OperatorValue:
    """Operator value with its additive breakdown.

    ``value`` is the exactly rounded sum of ``components``.
    """

    components: dict
    error: float = 0.0
    value: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "value", math.fsum(self.components.values()))

    def __float__(self):
        return self.value


def _point(p, d):
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size != d:
        raise OperatorError(f"point has dimension {p.size}, expected {d}")
    return p


def _check_dims(k, f, density=None):
    if f.dim != k.dim or (density is not None and density.dim != k.dim):
        raise OperatorError("kernel, function and density dimensions differ")


# ---------------------------------------------------------------------------
# empirical


def empirical_laplacian(k: Kernel, f: TestFunction, p, eps: float, batch) -> float:
    """Random graph Laplacian at ``p`` for the sample ``batch``.

    Nonzero terms are accumulated with ``math.fsum``, which is exactly
    rounded and therefore independent of the order of the batch.
    """
    _check_dims(k, f)
    if not eps > 0:
        raise OperatorError("eps must be positive")
    X = batch.points if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    X = np.atleast_2d(X)
    if X.shape[1] != k.dim:
        raise OperatorError("sample dimension differs from the kernel dimension")
    n = len(X)
    if n == 0:
        raise OperatorError("empty batch")
    p = _point(p, k.dim)
    diff = (p - X) / eps
    if k.singular:
        keep = np.any(X != p, axis=1)  # X_j = p has probability zero
        X, diff = X[keep], diff[keep]
    w = k(diff)
    nz = w != 0.0
    if not np.any(nz):
        return 0.0
    terms = w[nz] * (f(X[nz]) - f.value_at(p))
    return math.fsum(terms.tolist()) / (n * eps ** (k.dim + 2))


def linearized_statistic(k: Kernel, f: TestFunction, p, eps: float, batch) -> float:
    """``(n eps^(d+2))^(-1/2) sum_j K((p - X_j)/eps) grad f(p) . (X_j - p)`` (uncentered)."""
    X = np.atleast_2d(batch.points if isinstance(batch, SampleBatch) else batch)
    p = _point(p, k.dim)
    w = k((p - X) / eps)
    nz = w != 0.0
    terms = w[nz] * ((X[nz] - p) @ f.grad_at(p))
    return math.fsum(terms.tolist()) / math.sqrt(len(X) * eps ** (k.dim + 2))


def quadratic_remainder_statistic(k: Kernel, f: TestFunction, p, eps: float, batch) -> float:
    """Like :func:`linearized_statistic` with ``f(X) - f(p) - grad f(p).(X - p)``."""
    X = np.atleast_2d(batch.points if isinstance(batch, SampleBatch) else batch)
    p = _point(p, k.dim)
    w = k((p - X) / eps)
    nz = w != 0.0
    Xn = X[nz]
    rem = f(Xn) - f.value_at(p) - (Xn - p) @ f.grad_at(p)
    return math.fsum((w[nz] * rem).tolist()) / math.sqrt(len(X) * eps ** (k.dim + 2))


# ---------------------------------------------------------------------------
# quadrature-based operators


def _cone_or_none(S, p):
    try:
        return geo.cone_at(S, p)
    except geo.NoAnalyticCone:
        return None


def _check_singular(k: Kernel, cone):
    if k.singular and (cone is None or cone.kind not in ("wedge", "degenerate")):
        raise KernelError("singular kernels are only supported at corner or cusp points")


def rescaled_region(k: Kernel, S, p, eps: float, tol: float, degree: float = 2.0,
                    rho: float = math.inf) -> PolarRegion:
    """Polar description of ``(S - p)/eps``, clipped to the kernel support and ``rho/eps``."""
    R = min(k.truncation_radius(1, tol, degree), rho / eps)
    cone = _cone_or_none(S, p)

    def radial(sigma):
        lo, hi = S.ray_intervals(p, sigma)
        cap = np.minimum(k.radial_extent(-sigma), R)[:, None]
        lo = lo / eps
        hi = np.minimum(hi / eps, cap)
        return lo, np.where(hi > lo, hi, lo)

    if cone is None or cone.kind in ("full", "degenerate"):
        return geo.Cone.full(k.dim).polar_region(radial, singular_origin=k.singular)
    return cone.polar_region(radial, singular_origin=k.singular)


def averaging_operator(k: Kernel, f: TestFunction, density: Density, p, eps: float,
                       tol: float = DEFAULT_TOL) -> OperatorValue:
    """Expectation of the graph Laplacian, by deterministic quadrature.

    Components: ``first_order`` is the contribution of the linear part
    ``eps grad f(p) . t`` of the increment and ``remainder`` the rest.
    """
    _check_dims(k, f, density)
    if not eps > 0:
        raise OperatorError("eps must be positive")
    S = density.domain
    p = _point(p, k.dim)
    if S.classify(p) == "outside":
        raise OperatorError("p is not in S")
    _check_singular(k, _cone_or_none(S, p))
    fp = f.value_at(p)
    gf = f.grad_at(p)
    inv = 1.0 / (eps * eps)

    def integrand(t):
        y = p + eps * t
        w = k(-t) * density(y) * inv
        lin = eps * (t @ gf)
        return np.stack([w * lin, w * (f(y) - fp - lin)], axis=1)

    region = rescaled_region(k, S, p, eps, tol, degree=2.0 + 1.0)
    res = integrate(IntegralTask(integrand, region, tol=tol, label="averaging"))
    a, b = (float(v) for v in np.asarray(res.value))
    return OperatorValue({"first_order": a, "remainder": b}, res.error)


def _moment_terms(k, f, density, p, cone, tol):
    M = second_moment_matrix(k, cone, 1, tol)
    gf = f.grad_at(p)
    Hf = f.hess_at(p)
    gg = np.asarray(density.grad(p.reshape(1, -1)), dtype=float)[0]
    gp = density.at(p)
    grad_term = float(gf @ M.matrix @ gg)
    hess_term = 0.5 * gp * float(np.sum(Hf * M.matrix))
    return {"gradient": grad_term, "hessian": hess_term}, M.error


def limit_laplacian(k: Kernel, f: TestFunction, density: Density, p,
                    tol: float = DEFAULT_TOL) -> OperatorValue:
    """Interior limit operator with full-space second moments."""
    _check_dims(k, f, density)
    p = _point(p, k.dim)
    if not density.domain.is_interior(p):
        raise OperatorError("limit_laplacian needs an interior point")
    _check_singular(k, geo.Cone.full(k.dim))
    comps, err = _moment_terms(k, f, density, p, geo.Cone.full(k.dim), tol)
    return OperatorValue(comps, err)


def limit_laplacian_cone(k: Kernel, f: TestFunction, density: Density, p, cone,
                         tol: float = DEFAULT_TOL) -> OperatorValue:
    """Limit operator with moments restricted to ``cone``.

    The density gradient is taken from the density's own formula, which
    extends continuously to the boundary.
    """
    _check_dims(k, f, density)
    p = _point(p, k.dim)
    if cone.is_null:
        return OperatorValue({"gradient": 0.0, "hessian": 0.0}, 0.0)
    comps, err = _moment_terms(k, f, density, p, cone, tol)
    return OperatorValue(comps, err)


def boundary_vector(k: Kernel, bd: geo.BoundaryData, tol: float = DEFAULT_TOL,
                    convention_factor: float = CONVENTION_FACTOR,
                    g_at_p: float = 1.0) -> np.ndarray:
    """``v_T = -g(p) c int_{tangent plane} K(-x') x' (y^T H y) dy`` with ``x' = E y``.

    ``c`` is the convention factor applied to the stored Hessian.
    """
    E = bd.tangent_frame
    d = bd.normal.size
    if E.shape[1] == 0:
        return np.zeros(d)
    H = convention_factor * bd.hessian
    if not np.any(H):
        return np.zeros(d)
    R = k.truncation_radius(1, tol, degree=3.0)

    def integrand(x):
        y = x @ E
        q = np.einsum("ni,ij,nj->n", y, H, y)
        return (k(-x) * q)[:, None] * x

    def radial(sigma):
        hi = np.minimum(k.radial_extent(-sigma), R)
        return np.zeros((len(sigma), 1)), hi[:, None]

    res = integrate_subspace(integrand, E, radial, tol=tol)
    v = -g_at_p * np.asarray(res.value, dtype=float)
    return geo.tangential_component(v, bd)


def boundary_correction(k: Kernel, f: TestFunction, p, bd: geo.BoundaryData,
                        tol: float = DEFAULT_TOL, convention_factor: float = CONVENTION_FACTOR,
                        g_at_p: float = 1.0) -> OperatorValue:
    """``grad_T f(p) . v_T(p)``: the curvature term at a C^2 boundary point.

    Equals ``-g(p) int K(-x') (grad f(p) . x') (x'^T H_conv x') dx'`` over the
    tangent plane, with ``H_conv = convention_factor * H``.
    """
    p = _point(p, k.dim)
    if not np.allclose(bd.point, p):
        raise OperatorError("boundary data belong to a different point")
    if convention_factor not in (0.5, 1.0):
        raise OperatorError("convention_factor must be 1 or 1/2")
    v = boundary_vector(k, bd, tol, convention_factor, g_at_p)
    gT = geo.tangential_component(f.grad_at(p), bd)
    return OperatorValue({"boundary": float(gT @ v)}, tol)


def cone_cancellation(k: Kernel, f: TestFunction, p, cone, tol: float = DEFAULT_TOL) -> float:
    """``grad f(p) . int_cone K(-t) t dt``; must vanish for the limit to exist."""
    if cone.is_null:
        return 0.0
    return float(f.grad_at(p) @ first_moment_vector(k, cone, tol))


def combined_limit(k: Kernel, f: TestFunction, density: Density, p, S=None,
                   tol: float = DEFAULT_TOL,
                   convention_factor: float = CONVENTION_FACTOR) -> OperatorValue:
    """Limit of the averaging operator at any point of S.

    Interior points give :func:`limit_laplacian`.  At C^2 boundary points
    the cone operator plus the boundary correction is returned; at corners
    and cusps only the cone operator.  Raises :class:`DivergentRegimeError`
    when the cone cancellation condition fails.
    """
    S = density.domain if S is None else S
    p = _point(p, k.dim)
    cls = S.classify(p)
    if cls == "outside":
        raise OperatorError("p is not in S")
    cone = geo.cone_at(S, p)
    _check_singular(k, cone)
    resid = cone_cancellation(k, f, p, cone, tol)
    scale = float(np.sum(np.abs(f.grad_at(p))))
    if abs(resid) > 10.0 * tol * scale + 1e-12:
        raise DivergentRegimeError(
            f"cancellation condition fails at p: grad f . first moment = {resid:.6g}", resid)
    if cls == "interior":
        return limit_laplacian(k, f, density, p, tol)
    base = limit_laplacian_cone(k, f, density, p, cone, tol)
    comps = dict(base.components)
    err = base.error
    comps["boundary"] = 0.0
    if cone.kind == "half_space":
        try:
            bd = geo.boundary_data_at(S, p)
        except geo.GeometryError:
            bd = None
        if bd is not None:
            corr = boundary_correction(k, f, p, bd, tol, convention_factor, density.at(p))
            comps["boundary"] = corr.components["boundary"]
            err += corr.error
    return OperatorValue(comps, err)


def clt_variance(k: Kernel, f: TestFunction, density: Density, p,
                 tol: float = DEFAULT_TOL) -> float:
    """``s^2 = g(p) grad f^T M2 grad f`` with M2 the K^2 moments over the cone at p."""
    _check_dims(k, f, density)
    p = _point(p, k.dim)
    cone = _cone_or_none(density.domain, p)
    if cone is None:
        raise OperatorError("no analytic cone at p")
    if cone.is_null:
        return 0.0
    gf = f.grad_at(p)
    if not np.any(gf):
        return 0.0
    M2 = second_moment_matrix(k, cone, 2, tol).matrix
    return max(0.0, density.at(p) * float(gf @ M2 @ gf))


def finite_eps_variance(k: Kernel, f: TestFunction, density: Density, p, eps: float,
                        tol: float = DEFAULT_TOL, sign: str = "minus") -> float:
    """Variance of the linearized statistic at bandwidth ``eps``.

    ``int K^2(-t) (grad f . t)^2 g(p + eps t) dt  -/+  eps^d (int K(-t) (grad f . t) g(p + eps t) dt)^2``.
    ``sign='plus'`` gives the variant with the added square, kept for comparison.
    """
    if sign not in ("minus", "plus"):
        raise OperatorError("sign must be 'minus' or 'plus'")
    _check_dims(k, f, density)
    if not eps > 0:
        raise OperatorError("eps must be positive")
    p = _point(p, k.dim)
    gf = f.grad_at(p)

    def integrand(t):
        kv = k(-t)
        lin = t @ gf
        g = density(p + eps * t)
        return np.stack([kv * kv * lin * lin * g, kv * lin * g], axis=1)

    region = rescaled_region(k, density.domain, p, eps, tol, degree=2.0)
    a, b = (float(v) for v in np.asarray(integrate(IntegralTask(integrand, region, tol=tol)).value))
    s = -1.0 if sign == "minus" else 1.0
    return a + s * eps ** k.dim * b * b


def cancellation_residual(k: Kernel, f: TestFunction, p, S, eps: float, rho: float,
                          tol: float = DEFAULT_TOL) -> float:
    """``grad f(p) . (1/eps) int_{(S-p)/eps, |t| < rho/eps} K(-t) t dt``."""
    if not (eps > 0 and rho > 0):
        raise OperatorError("eps and rho must be positive")
    p = _point(p, k.dim)
    gf = f.grad_at(p)
    region = rescaled_region(k, S, p, eps, tol, degree=1.0, rho=rho)
    res = integrate(IntegralTask(lambda t: k(-t) * (t @ gf), region, tol=tol * eps))
    return float(res.value) / eps
