"""Seeded sampling from densities supported on domains.

Seeds are derived with the splitmix64 finalizer: for master seed m and
replication r,

    z = m + (r + 1) * 0x9E3779B97F4A7C15            (mod 2^64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9        (mod 2^64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB        (mod 2^64)
    seed = z ^ (z >> 31)

The finalizer is a bijection of 64-bit words, so distinct replications of
one master seed always receive distinct seeds.  Each seed drives its own
``numpy.random.default_rng`` (PCG64) stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import Box, Domain, GeometryError

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SamplingError(ValueError):
    pass


class EnvelopeError(SamplingError):
    """The density exceeded its declared rejection envelope."""


def derive_seed(master: int, replication: int) -> int:
    """Mix ``(master, replication)`` into a 64-bit seed (splitmix64 finalizer)."""
    z = (int(master) + (int(replication) + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


@dataclass(frozen=True)
class Density:
    """Probability density g on a domain.

    ``sup`` bounds g on the domain and is the rejection envelope constant:
    proposals are uniform on the bounding box and accepted with
    probability ``g(x) / sup``.  ``theta`` is the Hölder exponent of the
    gradient (``C^{1,theta}``); ``theta = 1`` for smooth built-ins.
    """

    domain: Domain
    pdf: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    sup: float
    theta: float = 1.0
    name: str = "custom"
    params: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if not self.sup > 0:
            raise SamplingError("envelope constant must be positive")
        if not 0.0 <= self.theta <= 1.0:
            raise SamplingError("theta must lie in [0, 1]")

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.where(self.domain.contains(x), self.pdf(x), 0.0)

    def at(self, p) -> float:
        return float(self(np.asarray(p, dtype=float).reshape(1, -1))[0])


def uniform(domain: Domain) -> Density:
    if domain.volume is None:
        raise SamplingError("uniform density needs a bounded domain")
    c = 1.0 / domain.volume
    d = domain.dim
    return Density(domain, lambda x: np.full(len(x), c), lambda x: np.zeros((len(x), d)),
                   sup=c, name="uniform")


def linear(box: Box, slope) -> Density:
    """Density proportional to ``1 + slope . (x - center)`` on a box."""
    b = np.atleast_1d(np.asarray(slope, dtype=float))
    if b.size != box.dim:
        raise SamplingError("slope length must equal the dimension")
    center = 0.5 * (box.low + box.high)
    half = 0.5 * (box.high - box.low)
    if np.sum(np.abs(b) * half) > 1.0:
        raise SamplingError("linear density must stay nonnegative on the box")
    c = 1.0 / box.volume  # the linear part integrates to zero
    sup = c * (1.0 + float(np.sum(np.abs(b) * half)))
    return Density(box, lambda x: c * (1.0 + (x - center) @ b),
                   lambda x: np.tile(c * b, (len(x), 1)), sup=sup, name="linear",
                   params=tuple(b.tolist()))


def product(box: Box, slopes) -> Density:
    """Product ``prod_i g_i(x_i)`` of one-dimensional linear densities on a box."""
    b = np.atleast_1d(np.asarray(slopes, dtype=float))
    if b.size != box.dim:
        raise SamplingError("one slope per coordinate")
    center = 0.5 * (box.low + box.high)
    half = 0.5 * (box.high - box.low)
    if np.any(np.abs(b) * half > 1.0):
        raise SamplingError("each factor must stay nonnegative")
    c = 1.0 / (2.0 * half)

    def pdf(x):
        return np.prod(c * (1.0 + b * (x - center)), axis=1)

    def grad(x):
        fac = c * (1.0 + b * (x - center))
        out = np.empty_like(x)
        for i in range(box.dim):
            others = np.prod(np.delete(fac, i, axis=1), axis=1)
            out[:, i] = c[i] * b[i] * others
        return out

    sup = float(np.prod(c * (1.0 + np.abs(b) * half)))
    return Density(box, pdf, grad, sup=sup, name="product", params=tuple(b.tolist()))


def custom_polynomial(box: Box, terms) -> Density:
    """Density proportional to a polynomial ``sum coef * x^powers`` on a box.

    The normalizing constant and the envelope are computed from the terms;
    the polynomial must be positive on the box (checked on a grid).
    """
    terms = [(float(c), tuple(int(p) for p in pw)) for c, pw in terms]
    d = box.dim
    if any(len(pw) != d for _, pw in terms):
        raise SamplingError("every term needs one power per coordinate")

    def raw(x):
        out = np.zeros(len(x))
        for c, pw in terms:
            out += c * np.prod(x ** np.array(pw), axis=1)
        return out

    def raw_grad(x):
        out = np.zeros_like(x)
        for c, pw in terms:
            pw = np.array(pw)
            for i in range(d):
                if pw[i] == 0:
                    continue
                q = pw.copy()
                q[i] -= 1
                out[:, i] += c * pw[i] * np.prod(x ** q, axis=1)
        return out

    mass = 0.0
    for c, pw in terms:
        mass += c * math.prod((box.high[i] ** (pw[i] + 1) - box.low[i] ** (pw[i] + 1)) / (pw[i] + 1)
                              for i in range(d))
    grid = np.stack(np.meshgrid(*[np.linspace(box.low[i], box.high[i], 41) for i in range(d)],
                                indexing="ij"), axis=-1).reshape(-1, d)
    vals = raw(grid)
    if mass <= 0 or np.min(vals) < 0:
        raise SamplingError("polynomial density must be nonnegative with positive mass")
    # grid maximum plus a Lipschitz margin over the grid spacing
    h = np.max((box.high - box.low) / 40.0)
    lip = float(np.max(np.linalg.norm(raw_grad(grid), axis=1)))
    sup = (float(np.max(vals)) + lip * h * math.sqrt(d)) / mass
    return Density(box, lambda x: raw(x) / mass, lambda x: raw_grad(x) / mass, sup=sup,
                   name="custom_polynomial", params=tuple(terms))


@dataclass(frozen=True)
class SampleBatch:
    points: np.ndarray
    seed: int
    replication: int

    def __len__(self):
        return len(self.points)


def sample_points(density: Density, n: int, rng: np.random.Generator) -> np.ndarray:
    """Rejection sampling from the bounding box; chunks are consumed in order."""
    if n < 1:
        raise SamplingError("n must be at least 1")
    dom = density.domain
    if dom.bounding_box is None:
        raise SamplingError("unbounded domain without a declared proposal")
    lo, hi = (np.asarray(b, dtype=float) for b in dom.bounding_box)
    box_vol = float(np.prod(hi - lo))
    accept_rate = 1.0 / (density.sup * box_vol)
    out = []
    have = 0
    while have < n:
        m = int(min(max(256, 1.2 * (n - have) / accept_rate + 64), 4_000_000))
        x = lo + (hi - lo) * rng.random((m, dom.dim))
        u = rng.random(m)
        g = density(x)
        if np.any(g > density.sup * (1.0 + 1e-12)):
            raise EnvelopeError(f"density exceeds its envelope {density.sup}")
        x = x[u * density.sup < g]
        out.append(x)
        have += len(x)
    return np.concatenate(out)[:n]


def sample(density: Density, n: int, seed: int, replication: int = 0) -> SampleBatch:
    """``n`` i.i.d. draws from ``density``, determined by ``(seed, replication)``."""
    s = derive_seed(seed, replication)
    pts = sample_points(density, n, np.random.default_rng(s))
    return SampleBatch(pts, int(seed), int(replication))


def density_gradient(density: Density, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != density.dim:
        raise SamplingError("dimension mismatch")
    if not density.domain.is_interior(x):
        raise SamplingError("gradient requested at a point that is not interior to S")
    return np.asarray(density.grad(x.reshape(1, -1)), dtype=float)[0]


def density_from_spec(spec: dict, domain: Optional[Domain]) -> Density:
    spec = dict(spec)
    kind = spec.pop("type", None)
    spec.pop("domain", None)
    if domain is None:
        raise SamplingError("density needs a domain")
    try:
        if kind == "uniform":
            if spec:
                raise TypeError(f"unexpected keys {sorted(spec)}")
            return uniform(domain)
        if kind in ("linear", "product", "custom_polynomial"):
            if not isinstance(domain, Box):
                raise SamplingError(f"{kind} density needs a box or interval domain")
            if kind == "linear":
                return linear(domain, **spec)
            if kind == "product":
                return product(domain, **spec)
            return custom_polynomial(domain, **spec)
    except TypeError as exc:
        raise SamplingError(f"bad parameters for density {kind!r}: {exc}") from None
    except GeometryError as exc:
        raise SamplingError(str(exc)) from None
    raise SamplingError(f"unknown density type {kind!r}")
