"""Sampling domains, their limiting cones, and boundary data.

A domain S is described by a membership predicate, the radial intervals
cut out of each ray from a base point (``ray_intervals``), and, where the
boundary is C^2, a defining function ``phi`` with ``S = {phi >= 0}`` near
the boundary.  The limiting cone of ``(S - p) / eps`` is returned in closed
form for every built-in kind.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .quadrature import PolarRegion, frame_from_axis

ATOL = 1e-12


class GeometryError(ValueError):
    pass


class NoAnalyticCone(GeometryError):
    """The domain kind has no closed-form limiting cone at this point."""


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class Cone:
    """Cone with vertex at the origin, stored analytically.

    ``kind`` is one of ``full``, ``half_space`` (``{t : t . axis >= 0}``),
    ``wedge`` (planar, opening ``angle`` symmetric about ``axis``) or
    ``degenerate`` (Lebesgue-null).  Equality compares tags and parameters.
    """

    kind: str
    dim: int
    axis: Optional[tuple] = None
    angle: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("full", "half_space", "wedge", "degenerate"):
            raise GeometryError(f"unknown cone kind {self.kind!r}")
        if self.kind in ("half_space", "wedge"):
            if self.axis is None or len(self.axis) != self.dim:
                raise GeometryError("cone axis must match the dimension")
            a = np.asarray(self.axis, dtype=float)
            object.__setattr__(self, "axis", tuple(float(x) for x in a / np.linalg.norm(a)))
        if self.kind == "wedge":
            if self.dim != 2:
                raise GeometryError("wedge cones are planar")
            if not (self.angle is not None and 0 < self.angle <= math.pi):
                raise GeometryError("wedge angle must lie in (0, pi]")

    @classmethod
    def full(cls, dim: int) -> "Cone":
        return cls("full", dim)

    @classmethod
    def half_space(cls, normal) -> "Cone":
        return cls("half_space", len(normal), tuple(normal))

    def contains(self, t) -> np.ndarray:
        t = np.atleast_2d(np.asarray(t, dtype=float))
        if self.kind == "full":
            return np.ones(len(t), dtype=bool)
        if self.kind == "degenerate":
            return np.zeros(len(t), dtype=bool)
        a = np.asarray(self.axis)
        if self.kind == "half_space":
            return t @ a >= 0.0
        nt = np.linalg.norm(t, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            cosang = np.where(nt > 0, (t @ a) / nt, 1.0)
        return cosang >= math.cos(0.5 * self.angle) - 1e-15

    @property
    def is_null(self) -> bool:
        return self.kind == "degenerate"

    def frame(self) -> np.ndarray:
        if self.axis is None:
            e = np.zeros(self.dim)
            e[-1] = 1.0
            return frame_from_axis(e)
        return frame_from_axis(self.axis)

    def polar_region(self, radial, breakpoints=(), singular_origin=False) -> PolarRegion:
        """Polar description of the cone intersected with ``radial`` limits."""
        if self.is_null:
            raise GeometryError("a degenerate cone has no polar region")
        F = self.frame()
        d = self.dim
        signs = (1.0, -1.0)
        arange = (0.0, 2.0 * math.pi) if d == 2 else (0.0, math.pi)
        if self.kind == "half_space":
            if d == 1:
                signs = (1.0,)  # frame column is the axis itself
                F = np.asarray(self.axis, dtype=float).reshape(1, 1)
            elif d == 2:
                arange = (0.0, math.pi)
            else:
                arange = (0.0, 0.5 * math.pi)
        elif self.kind == "wedge":
            arange = (0.5 * math.pi - 0.5 * self.angle, 0.5 * math.pi + 0.5 * self.angle)
        region = PolarRegion(frame=F, radial=radial, angle_range=arange, signs=signs,
                             singular_origin=singular_origin)
        if d == 2 and self.kind == "full":
            region = region.with_breakpoints([0.5 * math.pi, 1.5 * math.pi])
        if d >= 3 and self.kind == "full":
            region = region.with_breakpoints([0.5 * math.pi])
        return region.with_breakpoints(breakpoints)


# ---------------------------------------------------------------------------
# boundary data


@dataclass(frozen=True)
class BoundaryData:
    """Local boundary description at ``point``.

    ``hessian`` holds the true second-derivative array of the boundary
    graph ``gamma`` in tangent-frame coordinates: near the point the
    boundary is ``{p + E y + gamma(y) u}`` with ``gamma(y) = y^T H y / 2 + o(|y|^2)``
    and S on the side of the inward normal ``u``.
    """

    point: np.ndarray
    normal: np.ndarray
    tangent_frame: np.ndarray  # (d, d-1)
    hessian: np.ndarray  # (d-1, d-1)

    def __post_init__(self):
        E = self.tangent_frame
        u = self.normal
        if E.size:
            if not np.allclose(E.T @ E, np.eye(E.shape[1]), atol=1e-12):
                raise GeometryError("tangent frame is not orthonormal")
            if np.max(np.abs(E.T @ u)) > 1e-12:
                raise GeometryError("normal is not orthogonal to the tangent frame")


def tangential_component(v, bd: BoundaryData) -> np.ndarray:
    """Projection of ``v`` onto the tangent plane of ``bd``."""
    v = np.asarray(v, dtype=float)
    if v.shape != bd.normal.shape:
        raise GeometryError("dimension mismatch")
    E = bd.tangent_frame
    if E.size == 0:
        return np.zeros_like(v)
    return E @ (E.T @ v)


# ---------------------------------------------------------------------------
# domains


class Domain:
    """Base class; subclasses fill in membership and ray geometry."""

    kind = "domain"

    def __init__(self, dim: int):
        if dim < 1:
            raise GeometryError("dimension must be positive")
        self.dim = dim

    # membership ----------------------------------------------------------
    def contains(self, x) -> np.ndarray:
        raise NotImplementedError

    def __contains__(self, x) -> bool:
        return bool(self.contains(np.asarray(x, dtype=float).reshape(1, -1))[0])

    def classify(self, p) -> str:
        """'interior', 'boundary' or 'outside'."""
        raise NotImplementedError

    def is_interior(self, p) -> bool:
        return self.classify(p) == "interior"

    # sampling ------------------------------------------------------------
    bounding_box: Optional[tuple] = None
    volume: Optional[float] = None

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.bounding_box is None:
            raise GeometryError(f"{self.kind} domain is unbounded; no uniform sampler")
        lo, hi = (np.asarray(b, dtype=float) for b in self.bounding_box)
        out = []
        have = 0
        while have < n:
            m = max(64, int(1.3 * (n - have)) + 64)
            x = lo + (hi - lo) * rng.random((m, self.dim))
            x = x[self.contains(x)]
            out.append(x)
            have += len(x)
        return np.concatenate(out)[:n]

    # rays ----------------------------------------------------------------
    def ray_intervals(self, p, sigma) -> tuple:
        """Radii ``r >= 0`` with ``p + r sigma`` in S, for unit directions ``sigma``.

        Returns ``(lo, hi)`` arrays of shape (k, j).
        """
        return _ray_intervals_by_search(self, p, sigma)

    # cones and boundary --------------------------------------------------
    def cone_at(self, p) -> Cone:
        raise NoAnalyticCone(f"no analytic cone for {self.kind}")

    def defining_function(self, p):
        """``(phi, grad phi, hess phi)`` at a C^2 boundary point, S = {phi >= 0}."""
        raise GeometryError(f"boundary of {self.kind} is not C^2 at {p}")

    def _check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float).reshape(-1)
        if p.size != self.dim:
            raise GeometryError("dimension mismatch")
        return p


def _ray_intervals_by_search(domain, p, sigma, r_max=1e3, grid=4001):
    """Generic fallback: scan each ray and bisect membership changes."""
    p = np.asarray(p, dtype=float)
    sigma = np.atleast_2d(sigma)
    # geometric grid resolves features near the base point
    r = np.concatenate([[0.0], np.geomspace(1e-9, r_max, grid - 1)])
    k = sigma.shape[0]
    pts = p[None, None, :] + r[None, :, None] * sigma[:, None, :]
    inside = domain.contains(pts.reshape(-1, domain.dim)).reshape(k, -1)

    def refine(i, a, b, a_in):
        for _ in range(60):
            mid = 0.5 * (a + b)
            if bool(domain.contains((p + mid * sigma[i])[None, :])[0]) == a_in:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    intervals = []
    for i in range(k):
        row = inside[i]
        segs = []
        start = 0.0 if row[0] else None
        for j in range(1, len(r)):
            if row[j] != row[j - 1]:
                edge = refine(i, r[j - 1], r[j], row[j - 1])
                if row[j]:
                    start = edge
                else:
                    segs.append((start, edge))
                    start = None
        if start is not None:
            segs.append((start, math.inf))
        intervals.append(segs)
    j = max(1, max(len(s) for s in intervals))
    lo = np.zeros((k, j))
    hi = np.zeros((k, j))
    for i, segs in enumerate(intervals):
        for jj, (a, b) in enumerate(segs):
            lo[i, jj], hi[i, jj] = a, b
    return lo, hi


class FullSpace(Domain):
    kind = "full_space"

    def contains(self, x):
        x = np.atleast_2d(x)
        return np.ones(len(x), dtype=bool)

    def classify(self, p):
        self._check_point(p)
        return "interior"

    def ray_intervals(self, p, sigma):
        k = np.atleast_2d(sigma).shape[0]
        return np.zeros((k, 1)), np.full((k, 1), math.inf)

    def cone_at(self, p):
        self._check_point(p)
        return Cone.full(self.dim)


class Box(Domain):
    """Closed axis-aligned box; in one dimension the kind is ``interval``."""

    def __init__(self, low, high):
        low = np.atleast_1d(np.asarray(low, dtype=float))
        high = np.atleast_1d(np.asarray(high, dtype=float))
        if low.shape != high.shape or np.any(high <= low):
            raise GeometryError("box needs low < high componentwise")
        super().__init__(low.size)
        self.low, self.high = low, high
        self.kind = "interval" if self.dim == 1 else "box"
        self.bounding_box = (low.copy(), high.copy())
        self.volume = float(np.prod(high - low))

    def contains(self, x):
        x = np.atleast_2d(x)
        return np.all((x >= self.low) & (x <= self.high), axis=1)

    def _active(self, p):
        scale = np.maximum(1.0, np.abs(self.high - self.low))
        at_lo = np.abs(p - self.low) <= ATOL * scale
        at_hi = np.abs(p - self.high) <= ATOL * scale
        return at_lo, at_hi

    def classify(self, p):
        p = self._check_point(p)
        if not self.contains(p[None, :])[0]:
            at_lo, at_hi = self._active(p)
            return "boundary" if np.any(at_lo | at_hi) and np.all(
                (p >= self.low - ATOL) & (p <= self.high + ATOL)) else "outside"
        at_lo, at_hi = self._active(p)
        return "boundary" if np.any(at_lo | at_hi) else "interior"

    def ray_intervals(self, p, sigma):
        p = np.asarray(p, dtype=float)
        sigma = np.atleast_2d(sigma)
        lo = np.zeros(len(sigma))
        hi = np.full(len(sigma), math.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(self.dim):
                s = sigma[:, i]
                a = (self.low[i] - p[i]) / s
                b = (self.high[i] - p[i]) / s
                tmin = np.where(s > 0, a, np.where(s < 0, b, -math.inf))
                tmax = np.where(s > 0, b, np.where(s < 0, a, math.inf))
                flat_out = (s == 0) & ((p[i] < self.low[i]) | (p[i] > self.high[i]))
                tmax = np.where(flat_out, -math.inf, tmax)
                lo = np.maximum(lo, tmin)
                hi = np.minimum(hi, tmax)
        hi = np.where(hi > lo, hi, lo)
        return lo[:, None], hi[:, None]

    def cone_at(self, p):
        p = self._check_point(p)
        cls = self.classify(p)
        if cls == "outside":
            raise GeometryError("point is outside the domain")
        if cls == "interior":
            return Cone.full(self.dim)
        at_lo, at_hi = self._active(p)
        normals = []
        for i in range(self.dim):
            e = np.zeros(self.dim)
            if at_lo[i]:
                e[i] = 1.0
                normals.append(e)
            elif at_hi[i]:
                e[i] = -1.0
                normals.append(e)
        if len(normals) == 1:
            return Cone.half_space(tuple(normals[0]))
        if self.dim == 2 and len(normals) == 2:
            axis = normals[0] + normals[1]
            return Cone("wedge", 2, tuple(axis), 0.5 * math.pi)
        raise NoAnalyticCone("box edges and corners in d >= 3 have no stored cone")

    def defining_function(self, p):
        p = self._check_point(p)
        at_lo, at_hi = self._active(p)
        if np.count_nonzero(at_lo | at_hi) != 1:
            raise GeometryError("boundary is not C^2 at a box corner or edge")
        i = int(np.nonzero(at_lo | at_hi)[0][0])
        g = np.zeros(self.dim)
        g[i] = 1.0 if at_lo[i] else -1.0
        return 0.0, g, np.zeros((self.dim, self.dim))


def interval(low: float, high: float) -> Box:
    return Box([low], [high])


class Ball(Domain):
    kind = "ball"

    def __init__(self, center, radius: float = 1.0):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if not radius > 0:
            raise GeometryError("radius must be positive")
        super().__init__(center.size)
        self.center = center
        self.radius = float(radius)
        self.bounding_box = (center - radius, center + radius)
        d = self.dim
        self.volume = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius ** d

    def contains(self, x):
        x = np.atleast_2d(x)
        return np.sum((x - self.center) ** 2, axis=1) <= self.radius ** 2

    def classify(self, p):
        p = self._check_point(p)
        dist = np.linalg.norm(p - self.center)
        if abs(dist - self.radius) <= ATOL * max(1.0, self.radius):
            return "boundary"
        return "interior" if dist < self.radius else "outside"

    def ray_intervals(self, p, sigma):
        p = np.asarray(p, dtype=float)
        sigma = np.atleast_2d(sigma)
        q = p - self.center
        b = sigma @ q
        c = q @ q - self.radius ** 2
        if abs(c) <= ATOL * max(1.0, self.radius ** 2):
            c = 0.0  # base point on the sphere
        disc = b * b - c
        ok = disc >= 0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        r1 = -b - sq
        r2 = -b + sq
        if c == 0.0:
            # exact roots 0 and -2b avoid cancellation
            r1 = np.minimum(0.0, -2.0 * b)
            r2 = np.maximum(0.0, -2.0 * b)
        lo = np.maximum(r1, 0.0)
        hi = np.where(ok, np.maximum(r2, lo), lo)
        return lo[:, None], hi[:, None]

    def cone_at(self, p):
        cls = self.classify(p)
        if cls == "outside":
            raise GeometryError("point is outside the domain")
        if cls == "interior":
            return Cone.full(self.dim)
        return Cone.half_space(tuple((self.center - np.asarray(p, dtype=float)) / self.radius))

    def defining_function(self, p):
        p = self._check_point(p)
        if self.classify(p) != "boundary":
            raise GeometryError("point is not on the boundary")
        q = p - self.center
        return (self.radius ** 2 - q @ q, -2.0 * q, -2.0 * np.eye(self.dim))


class HalfSpace(Domain):
    """``{x : x . normal >= offset}`` with unit inward ``normal``."""

    kind = "half_space"

    def __init__(self, normal, offset: float = 0.0):
        n = np.atleast_1d(np.asarray(normal, dtype=float))
        super().__init__(n.size)
        self.normal = n / np.linalg.norm(n)
        self.offset = float(offset)

    def contains(self, x):
        x = np.atleast_2d(x)
        return x @ self.normal >= self.offset

    def classify(self, p):
        p = self._check_point(p)
        s = p @ self.normal - self.offset
        if abs(s) <= ATOL * max(1.0, abs(self.offset)):
            return "boundary"
        return "interior" if s > 0 else "outside"

    def ray_intervals(self, p, sigma):
        sigma = np.atleast_2d(sigma)
        s = self.offset - np.asarray(p, dtype=float) @ self.normal
        if self.classify(p) == "boundary":
            s = 0.0
        c = sigma @ self.normal
        with np.errstate(divide="ignore", invalid="ignore"):
            lo = np.where(c > 0, np.maximum(s / c, 0.0), 0.0)
            hi = np.where(c > 0, math.inf, np.where(c < 0, s / c, math.inf if s <= 0 else 0.0))
        hi = np.where(hi > lo, hi, lo)
        return lo[:, None], hi[:, None]

    def cone_at(self, p):
        cls = self.classify(p)
        if cls == "outside":
            raise GeometryError("point is outside the domain")
        if cls == "interior":
            return Cone.full(self.dim)
        return Cone.half_space(tuple(self.normal))

    def defining_function(self, p):
        p = self._check_point(p)
        return p @ self.normal - self.offset, self.normal.copy(), np.zeros((self.dim, self.dim))


def _rot(v, ang):
    c, s = math.cos(ang), math.sin(ang)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


class Wedge(Domain):
    """Planar wedge ``{x : angle(x - apex, axis) <= angle / 2}``, angle in (0, pi]."""

    kind = "wedge"

    def __init__(self, apex=(0.0, 0.0), axis=(0.0, 1.0), angle: float = math.pi / 3):
        super().__init__(2)
        if not 0 < angle <= math.pi:
            raise GeometryError("wedge angle must lie in (0, pi]")
        self.apex = np.asarray(apex, dtype=float)
        a = np.asarray(axis, dtype=float)
        self.axis = a / np.linalg.norm(a)
        self.angle = float(angle)
        e_plus = _rot(self.axis, 0.5 * angle)
        e_minus = _rot(self.axis, -0.5 * angle)
        self.normals = (_rot(e_plus, -0.5 * math.pi), _rot(e_minus, 0.5 * math.pi))
        self._halves = tuple(HalfSpace(n, float(n @ self.apex)) for n in self.normals)

    def contains(self, x):
        x = np.atleast_2d(x)
        return self._halves[0].contains(x) & self._halves[1].contains(x)

    def classify(self, p):
        p = self._check_point(p)
        c = [h.classify(p) for h in self._halves]
        if "outside" in c:
            return "outside"
        return "boundary" if "boundary" in c else "interior"

    def ray_intervals(self, p, sigma):
        lo1, hi1 = self._halves[0].ray_intervals(p, sigma)
        lo2, hi2 = self._halves[1].ray_intervals(p, sigma)
        lo = np.maximum(lo1, lo2)
        hi = np.minimum(hi1, hi2)
        return lo, np.where(hi > lo, hi, lo)

    def cone_at(self, p):
        p = self._check_point(p)
        c = [h.classify(p) for h in self._halves]
        if "outside" in c:
            raise GeometryError("point is outside the domain")
        if c == ["boundary", "boundary"]:
            return Cone("wedge", 2, tuple(self.axis), self.angle)
        for h, ci in zip(self._halves, c):
            if ci == "boundary":
                return Cone.half_space(tuple(h.normal))
        return Cone.full(2)

    def defining_function(self, p):
        p = self._check_point(p)
        c = [h.classify(p) for h in self._halves]
        if c.count("boundary") != 1:
            raise GeometryError("boundary is not C^2 at the wedge apex")
        h = self._halves[c.index("boundary")]
        return h.defining_function(p)


class ParabolicGraph(Domain):
    """``{x : x_d >= a |x'|^2}``; the boundary is tangent to x_d = 0 at the origin."""

    kind = "parabolic_graph"

    def __init__(self, dim: int = 2, curvature: float = 1.0):
        if dim < 2:
            raise GeometryError("parabolic graph needs d >= 2")
        super().__init__(dim)
        self.a = float(curvature)

    def gamma(self, y):
        y = np.atleast_2d(y)
        return self.a * np.sum(y * y, axis=1)

    def phi(self, x):
        x = np.atleast_2d(x)
        return x[:, -1] - self.gamma(x[:, :-1])

    def contains(self, x):
        return self.phi(x) >= 0.0

    def classify(self, p):
        p = self._check_point(p)
        v = float(self.phi(p)[0])
        if abs(v) <= ATOL * max(1.0, abs(p[-1])):
            return "boundary"
        return "interior" if v > 0 else "outside"

    def ray_intervals(self, p, sigma):
        p = np.asarray(p, dtype=float)
        sigma = np.atleast_2d(sigma)
        pp, pd = p[:-1], p[-1]
        sp, sd = sigma[:, :-1], sigma[:, -1]
        # phi(p + r sigma) = A r^2 + B r + C
        A = -self.a * np.sum(sp * sp, axis=1)
        B = sd - 2.0 * self.a * (sp @ pp)
        C = pd - self.a * (pp @ pp)
        if self.classify(p) == "boundary":
            C = 0.0
        return _quadratic_nonneg(A, B, np.full_like(A, C))

    def cone_at(self, p):
        cls = self.classify(p)
        if cls == "outside":
            raise GeometryError("point is outside the domain")
        if cls == "interior":
            return Cone.full(self.dim)
        _, g, _ = self.defining_function(p)
        return Cone.half_space(tuple(g / np.linalg.norm(g)))

    def defining_function(self, p):
        p = self._check_point(p)
        g = np.zeros(self.dim)
        g[:-1] = -2.0 * self.a * p[:-1]
        g[-1] = 1.0
        H = np.zeros((self.dim, self.dim))
        H[:-1, :-1] = -2.0 * self.a * np.eye(self.dim - 1)
        return float(self.phi(p)[0]), g, H


def _quadratic_nonneg(A, B, C):
    """Radii r >= 0 with A r^2 + B r + C >= 0, as up to two intervals."""
    k = A.size
    lo = np.zeros((k, 2))
    hi = np.zeros((k, 2))
    for i in range(k):
        segs = _quad_segments(float(A[i]), float(B[i]), float(C[i]))
        for j, (a, b) in enumerate(segs[:2]):
            lo[i, j], hi[i, j] = a, b
    return lo, hi


def _quad_segments(A, B, C):
    eps = 1e-15
    if abs(A) <= eps:
        if abs(B) <= eps:
            return [(0.0, math.inf)] if C >= 0 else []
        root = -C / B
        if B > 0:
            return [(max(root, 0.0), math.inf)]
        return [(0.0, root)] if root > 0 or (root == 0 and C >= 0) else []
    disc = B * B - 4 * A * C
    if disc < 0:
        return [(0.0, math.inf)] if A > 0 else []
    sq = math.sqrt(disc)
    # numerically stable roots
    qv = -0.5 * (B + math.copysign(sq, B))
    r1 = qv / A
    r2 = C / qv if qv != 0 else r1
    r1, r2 = min(r1, r2), max(r1, r2)
    if A < 0:
        a, b = max(r1, 0.0), r2
        return [(a, b)] if b > a else []
    segs = []
    if r1 > 0:
        segs.append((0.0, r1))
    segs.append((max(r2, 0.0), math.inf))
    return segs


class Cusp(Domain):
    """``{(x1, x2) : x2 >= sqrt(|x1|)}``; its cone at the apex is Lebesgue-null."""

    kind = "cusp"

    def __init__(self):
        super().__init__(2)

    def contains(self, x):
        x = np.atleast_2d(x)
        return x[:, 1] >= np.sqrt(np.abs(x[:, 0]))

    def classify(self, p):
        p = self._check_point(p)
        v = p[1] - math.sqrt(abs(p[0]))
        if abs(v) <= ATOL:
            return "boundary"
        return "interior" if v > 0 else "outside"

    def ray_intervals(self, p, sigma):
        p = np.asarray(p, dtype=float)
        sigma = np.atleast_2d(sigma)
        if np.allclose(p, 0.0):
            s1, s2 = sigma[:, 0], sigma[:, 1]
            with np.errstate(divide="ignore", invalid="ignore"):
                start = np.where(s2 > 0, np.abs(s1) / (s2 * s2), math.inf)
            lo = np.where(np.isfinite(start), start, 0.0)
            hi = np.where(np.isfinite(start), math.inf, 0.0)
            return lo[:, None], hi[:, None]
        return _ray_intervals_by_search(self, p, sigma)

    def cone_at(self, p):
        p = self._check_point(p)
        cls = self.classify(p)
        if cls == "outside":
            raise GeometryError("point is outside the domain")
        if cls == "interior":
            return Cone.full(2)
        if np.allclose(p, 0.0):
            return Cone("degenerate", 2)
        _, g, _ = self.defining_function(p)
        return Cone.half_space(tuple(g / np.linalg.norm(g)))

    def defining_function(self, p):
        p = self._check_point(p)
        if abs(p[0]) <= ATOL:
            raise GeometryError("cusp apex is not a C^2 boundary point")
        s = math.copysign(1.0, p[0])
        r = abs(p[0])
        g = np.array([-0.5 * s / math.sqrt(r), 1.0])
        H = np.array([[0.25 * r ** -1.5, 0.0], [0.0, 0.0]])
        return p[1] - math.sqrt(r), g, H


# ---------------------------------------------------------------------------
# operations


def cone_at(S: Domain, p) -> Cone:
    """Limiting cone of ``(S - p) / eps`` as eps -> 0."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if S.classify(p) == "outside":
        raise GeometryError("p is not in S")
    return S.cone_at(p)


def boundary_data_at(S: Domain, p) -> BoundaryData:
    """Inward normal, tangent frame and boundary-graph Hessian at ``p``.

    With ``S = {phi >= 0}`` near p, ``u = grad phi / |grad phi|`` and the
    graph Hessian in the tangent frame E is ``-E^T (hess phi) E / |grad phi|``.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if S.classify(p) != "boundary":
        raise GeometryError("p is not on the boundary of S")
    _, g, Hphi = S.defining_function(p)
    ng = np.linalg.norm(g)
    if ng == 0:
        raise GeometryError("degenerate defining function")
    u = g / ng
    F = frame_from_axis(u)
    E = F[:, :-1]
    H = -(E.T @ Hphi @ E) / ng
    H = 0.5 * (H + H.T)
    return BoundaryData(point=p, normal=u, tangent_frame=E, hessian=H)


def indicator_limit_check(S: Domain, p, cone: Cone, eps_list, rho: float, n_mc: int,
                          seed: int) -> list:
    """Monte Carlo measure of the set where ``(S - p)/eps`` and ``cone`` disagree.

    Points ``t`` are drawn uniformly in the ball of radius ``rho`` (the same
    draws for every eps); each estimate is the fraction of that ball on
    which the two indicators differ, so values lie in [0, 1].
    """
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list) or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be positive and strictly decreasing")
    if not rho > 0:
        raise ValueError("rho must be positive")
    if n_mc < 10_000:
        raise ValueError("n_mc must be at least 1e4")
    from .sampling import derive_seed

    p = np.asarray(p, dtype=float).reshape(-1)
    rng = np.random.default_rng(derive_seed(seed, 0))
    unit = Ball(np.zeros(S.dim), 1.0)
    t = rho * unit.sample_uniform(rng, n_mc)
    in_cone = cone.contains(t)
    out = []
    for eps in eps_list:
        in_set = S.contains(p + eps * t)
        out.append(float(np.mean(in_set != in_cone)))
    return out
