"""Deterministic polar-coordinate quadrature and a seeded Monte Carlo oracle.

Every integral in the package is written in polar form about the origin,

    int_region phi(t) dt = int_{directions} int_{r in I(sigma)} phi(r sigma) r^(m-1) dr dsigma,

where ``I(sigma)`` is the set of radii along ``sigma`` that belong to the
region (a union of at most a few intervals).  Cones, rescaled domains and
kernel supports all reduce to a direction range plus radial intervals, so
the discontinuities of indicator functions sit on interval endpoints and
never inside a quadrature panel.

The first angle is integrated adaptively (``scipy.integrate.quad_vec``),
the remaining angles and the radius with nested-refinement Gauss-Legendre /
trapezoid product rules.  Integrals of vector-valued integrands are
supported throughout; tolerances are absolute and per component.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _sp_integrate

MAX_REFINEMENT = 20
_GL_ORDER = 8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)
# radial refinement levels: 2**level panels of _GL_ORDER nodes
_RADIAL_MIN_LEVEL = 1
_RADIAL_MAX_LEVEL = 12
_SINGULAR_POWER = 4.0


class NonConvergenceError(ArithmeticError):
    """Quadrature did not reach the requested tolerance.

    The best available estimate and its error estimate are attached so
    callers can inspect them, but they are never returned silently.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class IntegralResult:
    value: object  # float or ndarray
    error: float
    evaluations: int = 0


@dataclass(frozen=True)
class MCResult:
    value: object
    stderr: object
    n: int


RadialFn = Callable[[np.ndarray], tuple]


@dataclass(frozen=True)
class PolarRegion:
    """A star-shaped-by-rays region described in polar coordinates.

    Parameters
    ----------
    frame : (d, m) array
        Orthonormal columns.  Directions are generated in the m-dimensional
        frame coordinates and mapped to ambient space by ``frame @ s``.
        The last column is the polar axis.
    angle_range : (float, float)
        Range of the first angle.  For m == 2 this is the planar angle
        theta with ``s = (cos theta, sin theta)`` (so ``sin theta`` is the
        component along the axis); for m >= 3 it is the polar angle
        measured from the axis.  Ignored for m == 1.
    signs : tuple of +1/-1
        Allowed directions along the single frame vector when m == 1.
    radial : callable
        ``radial(sigma) -> (lo, hi)`` for ambient unit directions of shape
        (k, d); ``lo`` and ``hi`` have shape (k, j) and describe j radial
        intervals per direction (empty when ``hi <= lo``).  Must be finite.
    breakpoints : tuple of float
        Known discontinuities of the first-angle integrand.
    singular_origin : bool
        Use a graded radial map near r = 0 for integrands that blow up
        at the origin.
    """

    frame: np.ndarray
    radial: RadialFn
    angle_range: tuple = (0.0, 2.0 * math.pi)
    signs: tuple = (1.0, -1.0)
    breakpoints: tuple = ()
    singular_origin: bool = False

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    def first_angle_of(self, directions: np.ndarray) -> np.ndarray:
        """First-angle coordinate of ambient directions (m >= 2)."""
        s = np.atleast_2d(directions) @ self.frame
        if self.dim == 2:
            theta = np.arctan2(s[:, 1], s[:, 0])
            lo, _ = self.angle_range
            # shift into [lo, lo + 2 pi)
            return lo + np.mod(theta - lo, 2.0 * math.pi)
        cosang = np.clip(s[:, -1] / np.linalg.norm(s, axis=1), -1.0, 1.0)
        return np.arccos(cosang)

    def with_breakpoints(self, extra: Sequence[float]) -> "PolarRegion":
        lo, hi = self.angle_range
        pts = set(self.breakpoints)
        for x in extra:
            if lo < x < hi:
                pts.add(float(x))
        return PolarRegion(self.frame, self.radial, self.angle_range, self.signs,
                           tuple(sorted(pts)), self.singular_origin)


@dataclass(frozen=True)
class IntegralTask:
    """An integrand together with its region and accuracy request."""

    integrand: Callable[[np.ndarray], np.ndarray]
    region: PolarRegion
    tol: float = 1e-8
    rel_tol: float = 0.0
    truncation_radius: float = math.inf
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not self.truncation_radius > 0:
            raise ValueError("truncation radius must be positive")


# ---------------------------------------------------------------------------
# building blocks


def frame_from_axis(axis) -> np.ndarray:
    """Orthonormal (d, d) frame whose last column is ``axis``.

    For d == 2 the first column is the axis rotated by -90 degrees, so the
    planar angle theta in the frame satisfies ``sigma . axis = sin theta``.
    """
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    d = a.size
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        return np.array([[a[1], a[0]], [-a[0], a[1]]])
    # Householder reflection mapping e_d to -s a, with the sign chosen so
    # that e_d + s a has no cancellation (|v| >= 1)
    s = 1.0 if a[-1] >= 0 else -1.0
    e = np.zeros(d)
    e[-1] = 1.0
    v = e + s * a
    v /= np.linalg.norm(v)
    Q = np.eye(d) - 2.0 * np.outer(v, v)
    # Q e_d = -s a; flip the last column so it equals a
    Q[:, -1] *= -s
    return Q


def _composite_gl(a: float, b: float, level: int):
    panels = 2 ** level
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return x, w


def _unit_gl(level: int):
    return _composite_gl(0.0, 1.0, level)


def _inner_angles(m: int, level: int):
    """Rule for the angles after the first one.

    Returns ``(coords, weights)`` where coords has shape (q, m - 2) holding
    (phi_2, ..., psi) and weights include the Jacobian factors that do not
    involve the first angle.
    """
    if m <= 2:
        return np.zeros((1, 0)), np.ones(1)
    npsi = 16 * 2 ** level
    psi = 2.0 * math.pi * np.arange(npsi) / npsi
    wpsi = np.full(npsi, 2.0 * math.pi / npsi)
    if m == 3:
        return psi[:, None], wpsi
    if m == 4:
        phi2, w2 = _composite_gl(0.0, math.pi, level)
        P2, PS = np.meshgrid(phi2, psi, indexing="ij")
        W = np.outer(w2 * np.sin(phi2), wpsi)
        return np.stack([P2.ravel(), PS.ravel()], axis=1), W.ravel()
    raise ValueError("polar quadrature supports dimension <= 4")


def _directions(m: int, first, inner: np.ndarray) -> np.ndarray:
    """Frame-coordinate unit vectors for a first angle and inner angles."""
    if m == 2:
        return np.array([[math.cos(first), math.sin(first)]])
    s1, c1 = math.sin(first), math.cos(first)
    if m == 3:
        psi = inner[:, 0]
        return np.stack([s1 * np.cos(psi), s1 * np.sin(psi), np.full_like(psi, c1)], axis=1)
    phi2, psi = inner[:, 0], inner[:, 1]
    s2 = np.sin(phi2)
    return np.stack([s1 * s2 * np.cos(psi), s1 * s2 * np.sin(psi),
                     s1 * np.cos(phi2), np.full_like(psi, c1)], axis=1)


def _first_angle_jacobian(m: int, first: float) -> float:
    if m == 2:
        return 1.0
    return math.sin(first) ** (m - 2)


def _radial_sum(fn, sigma_amb: np.ndarray, wdir: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                m: int, level: int, singular: bool):
    """Sum_k wdir_k * sum_j int_{lo_kj}^{hi_kj} fn(r sigma_k) r^(m-1) dr at one level."""
    s, ws = _unit_gl(level)
    length = np.clip(hi - lo, 0.0, None)  # (k, j)
    active = length > 0
    if not np.any(active):
        return None
    kk, jj = np.nonzero(active)
    a = lo[kk, jj]
    L = length[kk, jj]
    if singular:
        # r = a + L * s^q concentrates nodes near the interval start
        sq = s ** _SINGULAR_POWER
        dr = _SINGULAR_POWER * s ** (_SINGULAR_POWER - 1.0)
    else:
        sq = s
        dr = np.ones_like(s)
    r = a[:, None] + L[:, None] * sq[None, :]  # (p, q)
    pts = r[:, :, None] * sigma_amb[kk][:, None, :]
    vals = np.asarray(fn(pts.reshape(-1, sigma_amb.shape[1])), dtype=float)
    vals = vals.reshape(r.shape + vals.shape[1:])
    w = (ws * dr)[None, :] * L[:, None] * r ** (m - 1) * wdir[kk][:, None]
    extra = vals.ndim - 2
    w = w.reshape(w.shape + (1,) * extra)
    return np.sum(vals * w, axis=(0, 1))


def _per_direction_radial(fn, sigma_amb, lo, hi, m, singular, tol):
    """Per-direction radial integrals ``sum_j int fn(r sigma_k) r^(m-1) dr``, shape (k, ...)."""
    prev = None
    err = math.inf
    k = sigma_amb.shape[0]
    for level in range(_RADIAL_MIN_LEVEL, _RADIAL_MAX_LEVEL + 1):
        s, ws = _unit_gl(level)
        if singular:
            sq = s ** _SINGULAR_POWER
            dr = _SINGULAR_POWER * s ** (_SINGULAR_POWER - 1.0)
        else:
            sq, dr = s, np.ones_like(s)
        length = np.clip(hi - lo, 0.0, None)
        kk, jj = np.nonzero(length > 0)
        if kk.size == 0:
            return np.zeros(k)
        a, L = lo[kk, jj], length[kk, jj]
        r = a[:, None] + L[:, None] * sq[None, :]
        pts = r[:, :, None] * sigma_amb[kk][:, None, :]
        vals = np.asarray(fn(pts.reshape(-1, sigma_amb.shape[1])), dtype=float)
        vals = vals.reshape(r.shape + vals.shape[1:])
        w = (ws * dr)[None, :] * L[:, None] * r ** (m - 1)
        w = w.reshape(w.shape + (1,) * (vals.ndim - 2))
        rows = np.sum(vals * w, axis=1)
        cur = np.zeros((k,) + rows.shape[1:])
        np.add.at(cur, kk, rows)
        if prev is not None:
            err = float(np.max(np.abs(cur - prev)))
            if err <= tol:
                return cur
        prev = cur
    raise NonConvergenceError("radial rule did not converge", estimate=prev, error=err)


def _converged_radial(fn, sigma_amb, wdir, lo, hi, m, singular, tol):
    """Refine the radial rule until two successive levels agree within tol."""
    prev = None
    evals = 0
    for level in range(_RADIAL_MIN_LEVEL, _RADIAL_MAX_LEVEL + 1):
        cur = _radial_sum(fn, sigma_amb, wdir, lo, hi, m, level, singular)
        evals += sigma_amb.shape[0] * _GL_ORDER * 2 ** level
        if cur is None:
            return 0.0, 0.0, evals
        if prev is not None:
            err = float(np.max(np.abs(np.asarray(cur) - np.asarray(prev))))
            if err <= tol:
                return cur, err, evals
        prev = cur
    raise NonConvergenceError("radial rule did not converge", estimate=prev, error=err)


# ---------------------------------------------------------------------------
# public integrators


def integrate(task: IntegralTask) -> IntegralResult:
    """Integrate ``task.integrand`` over ``task.region``.

    The integrand receives an array of ambient points with shape (N, d) and
    returns shape (N,) or (N, k).  Raises :class:`NonConvergenceError` when
    the tolerance cannot be met within the refinement budget.
    """
    region = task.region
    fn = task.integrand
    m = region.dim
    tol = task.tol
    radial = region.radial
    if math.isfinite(task.truncation_radius):
        R = task.truncation_radius
        inner_radial = radial

        def radial(sig):
            lo, hi = inner_radial(sig)
            return lo, np.minimum(hi, R)

    if m == 0:
        val = np.asarray(fn(np.zeros((1, region.ambient_dim))), dtype=float)[0]
        return IntegralResult(val, 0.0, 1)

    if m == 1:
        total = 0.0
        err_total = 0.0
        evals = 0
        axis = region.frame[:, 0]
        for sgn in region.signs:
            sig = (sgn * axis)[None, :]
            lo, hi = radial(sig)
            lo, hi = _check_radial(lo, hi)
            val, err, ev = _adaptive_radial_1d(fn, sig, lo, hi, tol / len(region.signs),
                                               task.rel_tol, region.singular_origin)
            total = total + val
            err_total += err
            evals += ev
        return IntegralResult(total, err_total, evals)

    a, b = region.angle_range
    span = b - a
    inner_tol = tol / (20.0 * max(span, 1.0))
    counter = {"evals": 0}
    frame = region.frame

    def angular(first):
        jac = _first_angle_jacobian(m, first)
        if jac == 0.0:
            return 0.0 * _zero_like(fn, region.ambient_dim)
        prev = None
        err = math.inf
        for level in range(0, 6):
            coords, winner = _inner_angles(m, level)
            s = _directions(m, first, coords)
            sig = s @ frame.T
            lo, hi = _check_radial(*radial(sig))
            cur, _, ev = _converged_radial(fn, sig, winner * jac, lo, hi, m,
                                           region.singular_origin, inner_tol)
            counter["evals"] += ev
            if m == 2:
                return np.asarray(cur, dtype=float)
            if prev is not None:
                err = float(np.max(np.abs(np.asarray(cur) - np.asarray(prev))))
                if err <= inner_tol:
                    return np.asarray(cur, dtype=float)
            prev = cur
        if m == 3:
            return _adaptive_psi(first, jac)
        raise NonConvergenceError("inner angular rule did not converge", estimate=prev, error=err)

    def _adaptive_psi(first, jac):
        # kinked radial limits (box supports): bisect azimuth panels level by level,
        # all active panels evaluated in one batch
        edges = np.linspace(0.0, 2.0 * math.pi, 17)
        panels = np.stack([edges[:-1], edges[1:]], axis=1)
        total = 0.0
        # kink panels shrink like h^2, so a fixed per-panel threshold keeps the
        # accepted-panel count (and the summed error) bounded
        budget = 4.0 * inner_tol
        panel_tol = budget / 256.0
        for _ in range(2 * MAX_REFINEMENT):
            mid = 0.5 * panels.sum(axis=1)
            sub = np.concatenate([panels, np.stack([panels[:, 0], mid], axis=1),
                                  np.stack([mid, panels[:, 1]], axis=1)])
            half = 0.5 * (sub[:, 1] - sub[:, 0])
            psi = (0.5 * sub.sum(axis=1)[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
            wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
            s = _directions(3, first, psi[:, None])
            sig = s @ frame.T
            lo, hi = _check_radial(*radial(sig))
            per = _per_direction_radial(fn, sig, lo, hi, 3, region.singular_origin,
                                        panel_tol / (4.0 * math.pi))
            counter["evals"] += per.shape[0] * _GL_ORDER
            contrib = per * (wts * jac).reshape((-1,) + (1,) * (per.ndim - 1))
            q = len(panels)
            by_panel = contrib.reshape((3 * q, _GL_ORDER) + per.shape[1:]).sum(axis=1)
            coarse, fine = by_panel[:q], by_panel[q:2 * q] + by_panel[2 * q:]
            diff = np.abs(fine - coarse).reshape(q, -1).max(axis=1)
            ok = diff <= panel_tol
            total = total + fine[ok].sum(axis=0)
            if ok.all():
                return np.asarray(total, dtype=float)
            bad = panels[~ok]
            m_bad = 0.5 * bad.sum(axis=1)
            panels = np.concatenate([np.stack([bad[:, 0], m_bad], axis=1),
                                     np.stack([m_bad, bad[:, 1]], axis=1)])
        raise NonConvergenceError("inner angular rule did not converge")

    points = [p for p in region.breakpoints if a < p < b]
    res = _sp_integrate.quad_vec(angular, a, b, epsabs=tol, epsrel=task.rel_tol, norm="max",
                                 limit=2 ** 11, points=points or None, full_output=True)
    value, err, info = res
    if not info.success:
        raise NonConvergenceError(f"angular integration failed: {info.message}",
                                  estimate=value, error=err)
    if isinstance(value, np.ndarray) and value.ndim == 0:
        value = float(value)
    return IntegralResult(value, float(err), counter["evals"])


def _zero_like(fn, d):
    probe = np.asarray(fn(np.zeros((1, d))), dtype=float)
    return np.zeros(probe.shape[1:]) if probe.ndim > 1 else 0.0


def _check_radial(lo, hi):
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape:
        lo, hi = np.broadcast_arrays(lo, hi)
    if not np.all(np.isfinite(hi[hi > lo])):
        raise ValueError("radial interval is unbounded; supply a truncation radius")
    return lo, hi


def _adaptive_radial_1d(fn, sig, lo, hi, tol, rel_tol, singular):
    """Adaptive integration along a single ray (used when m == 1)."""
    total = 0.0
    err_total = 0.0
    evals = 0
    d = sig.shape[1]
    for j in range(lo.shape[1]):
        a, b = float(lo[0, j]), float(hi[0, j])
        if not b > a:
            continue

        if singular:
            L = b - a

            def g(s, a=a, L=L):
                r = a + L * s ** _SINGULAR_POWER
                v = np.asarray(fn((r * sig).reshape(1, d)), dtype=float)[0]
                return v * _SINGULAR_POWER * s ** (_SINGULAR_POWER - 1.0) * L
            lo_s, hi_s = 0.0, 1.0
        else:
            def g(r):
                return np.asarray(fn((r * sig).reshape(1, d)), dtype=float)[0]
            lo_s, hi_s = a, b
        val, err, info = _sp_integrate.quad_vec(g, lo_s, hi_s, epsabs=tol, epsrel=rel_tol,
                                                norm="max", limit=2 ** 11, full_output=True)
        if not info.success:
            raise NonConvergenceError(f"radial integration failed: {info.message}",
                                      estimate=val, error=err)
        evals += info.neval
        total = total + val
        err_total += float(err)
    if isinstance(total, np.ndarray) and total.ndim == 0:
        total = float(total)
    return total, err_total, evals


def integrate_subspace(integrand, tangent_frame, radial: RadialFn, tol: float = 1e-8,
                       rel_tol: float = 0.0) -> IntegralResult:
    """Integrate over the linear span of ``tangent_frame`` (shape (d, d-1)).

    The integrand is evaluated at ambient points ``x = E y``; the measure is
    Lebesgue measure in the orthonormal coordinates y.  A 0-dimensional
    subspace carries the unit point mass at the origin.
    """
    E = np.asarray(tangent_frame, dtype=float)
    if E.ndim != 2:
        raise ValueError("tangent frame must be a 2-D array")
    region = PolarRegion(frame=E, radial=radial, angle_range=(0.0, 2.0 * math.pi))
    return integrate(IntegralTask(integrand, region, tol=tol, rel_tol=rel_tol))


def mc_integrate(integrand, region, n: int, seed: int) -> MCResult:
    """Plain Monte Carlo estimate of the integral of ``integrand`` over ``region``.

    ``region`` must expose ``volume`` and ``sample_uniform(rng, n)``; the
    estimate is ``volume * mean`` with standard error
    ``volume * std / sqrt(n)``.  Fully determined by ``seed``.
    """
    if n < 1000:
        raise ValueError("Monte Carlo integration needs n >= 1000")
    from .sampling import derive_seed

    rng = np.random.default_rng(derive_seed(seed, 0))
    pts = region.sample_uniform(rng, n)
    vals = np.asarray(integrand(pts), dtype=float)
    vol = float(region.volume)
    mean = vals.mean(axis=0)
    sd = vals.std(axis=0, ddof=1)
    return MCResult(vol * mean, vol * sd / math.sqrt(n), n)


def gauss_legendre(a: float, b: float, level: int = 0):
    """Composite Gauss-Legendre nodes and weights on [a, b] (2**level panels)."""
    return _composite_gl(a, b, level)
