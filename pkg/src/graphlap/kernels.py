"""Kernels K(t), their symmetry metadata, moment integrals and admissibility.

A :class:`Kernel` is vectorized: ``k(t)`` takes an array of shape (N, d) and
returns shape (N,).  Each kernel carries a radial envelope ``h`` with
``|K(t)| <= h(|t|)``, used to choose truncation radii and to decide whether
moment integrals are finite.
"""
from __future__ import annotations

import itertools
import math
import threading
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _sp_integrate

from .geometry import Cone
from .quadrature import IntegralTask, NonConvergenceError, integrate

DEFAULT_TOL = 1e-8

# (alpha, eta) pairs meaning  int |K|^alpha |t|^eta < inf
KT4_PAIRS = ((4, 4), (4, 1), (1, 4), (1, 1))


def rate_pairs(theta: float) -> tuple:
    """Moment pairs needed for the O(eps^theta) rate."""
    return ((1, 2 + theta), (1, 3 + theta))


class KernelError(ValueError):
    pass


class AdmissibilityError(KernelError):
    """A requested moment integral of the kernel diverges."""


_custom_ids = itertools.count(1)


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d (2 for d = 1)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass(frozen=True)
class PowerEnvelope:
    """``|K(t)| <= C / (|t|^tau + |t|^beta)``; ``beta = inf`` means compact support."""

    C: float
    tau: float
    beta: float

    def verdict(self, alpha: float, eta: float, d: int) -> bool:
        tail = math.isinf(self.beta) or alpha * self.beta - eta > d
        core = alpha * self.tau - eta < d
        return bool(tail and core)


class Kernel:
    """A kernel on R^d with declared symmetries.

    Parameters
    ----------
    dim : int
    func : callable
        Vectorized map (N, d) -> (N,).
    envelope : callable
        Nonincreasing ``h(r)`` with ``|K(t)| <= h(|t|)``; vectorized in r.
    name, params :
        Identify the kernel; built-ins with equal name and params share
        their moment cache entries.
    even, product, radial : bool
        Declared symmetry flags.
    tangential_axis : int, optional
        For kernels that are even except along one coordinate axis ``a``:
        K is even on hyperplanes orthogonal to ``e_a``.
    support_radius : float
        ``K(t) = 0`` for ``|t| > support_radius``.
    singular : bool
        K is unbounded at the origin and must not be evaluated there.
    power_envelope : PowerEnvelope, optional
        Envelope of power form, enabling analytic admissibility verdicts.
    extent : callable, optional
        ``extent(sigma) -> (k,)`` radius beyond which K vanishes along each
        unit direction; defaults to the support radius.
    factors : list of Kernel, optional
        One-dimensional factors of a product kernel; moments over full space
        and coordinate half-spaces are then computed factor by factor.
    """

    def __init__(self, dim: int, func: Callable, envelope: Callable, *, name: str = "custom",
                 params: tuple = (), even: bool = False, product: bool = False,
                 radial: bool = False, tangential_axis: Optional[int] = None,
                 support_radius: float = math.inf, singular: bool = False,
                 power_envelope: Optional[PowerEnvelope] = None,
                 extent: Optional[Callable] = None, token=None,
                 factors: Optional[Sequence["Kernel"]] = None):
        if dim < 1:
            raise KernelError("kernel dimension must be positive")
        if not support_radius > 0:
            raise KernelError("support radius must be positive")
        self.dim = int(dim)
        self._func = func
        self._envelope = envelope
        self.name = name
        self.params = tuple(params)
        self.even = bool(even)
        self.product = bool(product)
        self.radial = bool(radial)
        self.tangential_axis = tangential_axis
        self.support_radius = float(support_radius)
        self.singular = bool(singular)
        self.power_envelope = power_envelope
        self._extent = extent
        self.factors = list(factors) if factors is not None else None
        self.token = token if token is not None else (name, self.params, dim)
        self._trunc_cache = {}

    def __repr__(self):
        return f"Kernel({self.name}, d={self.dim}, params={self.params})"

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if t.ndim == 1:
            t = t.reshape(-1, self.dim) if self.dim == 1 else t.reshape(1, -1)
        if t.shape[1] != self.dim:
            raise KernelError(f"expected points of dimension {self.dim}, got {t.shape[1]}")
        return np.asarray(self._func(t), dtype=float)

    def envelope(self, r) -> np.ndarray:
        return np.asarray(self._envelope(np.asarray(r, dtype=float)), dtype=float)

    def is_even_tangential(self, normal) -> bool:
        """Whether ``K(x') = K(-x')`` for every ``x'`` orthogonal to ``normal``."""
        if self.even:
            return True
        if self.tangential_axis is None:
            return False
        u = np.asarray(normal, dtype=float)
        u = u / np.linalg.norm(u)
        return bool(abs(abs(u[self.tangential_axis]) - 1.0) < 1e-12)

    def radial_extent(self, sigma) -> np.ndarray:
        """Radius along each unit direction beyond which K vanishes."""
        sigma = np.atleast_2d(sigma)
        if self._extent is not None:
            return np.asarray(self._extent(sigma), dtype=float)
        return np.full(sigma.shape[0], self.support_radius)

    def truncation_radius(self, power: int = 1, tol: float = DEFAULT_TOL,
                          degree: float = 2.0) -> float:
        """Radius R* with ``|S^{d-1}| int_{R*}^inf h^power r^(d-1+degree) dr < tol / 10``."""
        if math.isfinite(self.support_radius):
            return self.support_radius
        key = (power, tol, degree)
        if key in self._trunc_cache:
            return self._trunc_cache[key]
        d = self.dim
        area = sphere_area(d)

        def tail(R):
            with warnings.catch_warnings():
                # slow algebraic tails are judged by the loop below, not by quad
                warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
                val, _ = _sp_integrate.quad(
                    lambda r: float(self.envelope(r)) ** power * r ** (d - 1 + degree),
                    R, math.inf, limit=200)
            return area * val

        R = 1.0
        while tail(R) >= tol / 10.0:
            R *= 1.25
            if R > 1e8:
                raise AdmissibilityError("envelope tail does not decay; no truncation radius")
        self._trunc_cache[key] = R
        return R


def eval_kernel(k: Kernel, t) -> float:
    """Evaluate K at a single point ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.size != k.dim:
        raise KernelError(f"dimension mismatch: kernel is {k.dim}-D, point is {t.size}-D")
    if k.singular and not np.any(t):
        raise KernelError("singular kernel evaluated at the origin")
    return float(k(t.reshape(1, -1))[0])


# ---------------------------------------------------------------------------
# built-in kernels


def _norm(t):
    return np.sqrt(np.sum(t * t, axis=1))


def gaussian(dim: int = 1, scale: float = 1.0) -> Kernel:
    """``exp(-|t|^2 / scale^2)``."""
    s2 = float(scale) ** 2
    return Kernel(dim, lambda t: np.exp(-np.sum(t * t, axis=1) / s2),
                  lambda r: np.exp(-np.asarray(r) ** 2 / s2),
                  name="gaussian", params=(float(scale),), even=True, product=True, radial=True,
                  power_envelope=None)


def indicator_ball(dim: int = 1, radius: float = 1.0) -> Kernel:
    """Indicator of the open ball of the given radius; for d = 1 this is 1_(-R, R)."""
    R = float(radius)
    return Kernel(dim, lambda t: (np.sum(t * t, axis=1) < R * R).astype(float),
                  lambda r: (np.asarray(r) <= R).astype(float),
                  name="indicator_ball", params=(R,), even=True, radial=True,
                  product=(dim == 1), support_radius=R,
                  power_envelope=PowerEnvelope(2.0 * max(1.0, R) ** 2, 0.0, math.inf))


def indicator_box(half_widths) -> Kernel:
    """Indicator of the open box ``prod (-w_i, w_i)``."""
    w = np.atleast_1d(np.asarray(half_widths, dtype=float))
    if np.any(w <= 0):
        raise KernelError("box half-widths must be positive")
    R = float(np.linalg.norm(w))

    def extent(sigma):
        with np.errstate(divide="ignore"):
            return np.min(w / np.abs(sigma), axis=1)

    return Kernel(w.size, lambda t: np.all(np.abs(t) < w, axis=1).astype(float),
                  lambda r: (np.asarray(r) <= R).astype(float),
                  name="indicator_box", params=tuple(w.tolist()), even=True, product=True,
                  support_radius=R, extent=extent, factors=[indicator_ball(1, x) for x in w],
                  power_envelope=PowerEnvelope(2.0 * max(1.0, R) ** 2, 0.0, math.inf))


def epanechnikov(dim: int = 1) -> Kernel:
    """``(1 - |t|^2)_+``."""
    return Kernel(dim, lambda t: np.clip(1.0 - np.sum(t * t, axis=1), 0.0, None),
                  lambda r: np.clip(1.0 - np.asarray(r) ** 2, 0.0, None),
                  name="epanechnikov", even=True, radial=True, support_radius=1.0,
                  power_envelope=PowerEnvelope(2.0, 0.0, math.inf))


def product(factors: Sequence[Kernel]) -> Kernel:
    """``K(t) = prod_i K_i(t_i)`` for one-dimensional factors with nonincreasing envelopes."""
    factors = list(factors)
    if not factors or any(f.dim != 1 for f in factors):
        raise KernelError("product kernels need one-dimensional factors")
    if any(f.singular for f in factors):
        raise KernelError("singular factors are not supported in product kernels")
    d = len(factors)
    sups = [float(f.envelope(0.0)) for f in factors]

    def func(t):
        out = np.ones(t.shape[0])
        for i, f in enumerate(factors):
            out *= f(t[:, i:i + 1])
        return out

    def env(r):
        # some |t_i| >= |t| / sqrt(d)
        r = np.asarray(r, dtype=float) / math.sqrt(d)
        best = np.zeros_like(r)
        for i, f in enumerate(factors):
            rest = math.prod(s for j, s in enumerate(sups) if j != i)
            best = np.maximum(best, f.envelope(r) * rest)
        return best

    radii = np.array([f.support_radius for f in factors])
    support = float(np.linalg.norm(radii)) if np.all(np.isfinite(radii)) else math.inf

    def extent(sigma):
        with np.errstate(divide="ignore", invalid="ignore"):
            e = np.where(np.isfinite(radii)[None, :], radii[None, :] / np.abs(sigma), math.inf)
        return np.min(e, axis=1)

    return Kernel(d, func, env, name="product", params=tuple(f.token for f in factors),
                  even=all(f.even for f in factors), product=True,
                  support_radius=support, extent=extent, factors=factors)


def power_law(dim: int = 2, exponent: float = 0.5, radius: float = 1.0) -> Kernel:
    """Singular kernel ``|t|^(-a) 1{|t| <= R}`` with ``0 < a < d``."""
    a, R = float(exponent), float(radius)
    if not 0 < a < dim:
        raise KernelError("power-law exponent must lie in (0, d)")

    def func(t):
        r = _norm(t)
        with np.errstate(divide="ignore"):
            return np.where(r <= R, r ** (-a), 0.0)

    def env(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(r <= R, r ** (-a), 0.0)

    return Kernel(dim, func, env, name="power_law", params=(a, R), even=True, radial=True,
                  support_radius=R, singular=True,
                  power_envelope=PowerEnvelope(2.0 * max(1.0, R) ** a, a, math.inf))


def tilted_gaussian(dim: int = 2, tilt: float = 0.5, axis: int = 0) -> Kernel:
    """``exp(-|t|^2) (1 + tilt * t_a exp(-t_a^2))``, odd in the ``t_a`` direction only."""
    if not 0 <= axis < dim:
        raise KernelError("tilt axis out of range")
    c = float(tilt)
    bound = 1.0 + abs(c) / math.sqrt(2.0 * math.e)

    def func(t):
        ta = t[:, axis]
        return np.exp(-np.sum(t * t, axis=1)) * (1.0 + c * ta * np.exp(-ta * ta))

    return Kernel(dim, func, lambda r: bound * np.exp(-np.asarray(r) ** 2),
                  name="tilted_gaussian", params=(c, int(axis)), even=(c == 0.0),
                  tangential_axis=axis)


def power_envelope_kernel(dim: int = 1, tau: float = 0.0, beta: float = 4.0,
                          C: float = 1.0) -> Kernel:
    """Radial kernel ``C / (|t|^tau + |t|^beta)`` attaining its power envelope."""
    tau, beta = float(tau), float(beta)
    if tau < 0 or beta < 0:
        raise KernelError("envelope exponents must be nonnegative")

    def prof(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return C / (r ** tau + r ** beta)

    return Kernel(dim, lambda t: prof(_norm(t)), prof, name="power_envelope",
                  params=(tau, beta, float(C)), even=True, radial=True,
                  singular=tau > 0, power_envelope=PowerEnvelope(float(C), tau, beta))


def custom(dim: int, func: Callable, envelope: Callable, *, even=False, product=False,
           radial=False, support_radius=math.inf, singular=False, n_probes: int = 1000,
           seed: int = 0) -> Kernel:
    """User kernel; declared flags are verified by probing before use."""
    k = Kernel(dim, func, envelope, name="custom", even=even, product=product, radial=radial,
               support_radius=support_radius, singular=singular,
               token=("custom", next(_custom_ids)))
    failures = [name for name, ok in validate_symmetry(k, n_probes, seed).items() if not ok]
    if failures:
        raise KernelError(f"declared properties do not hold: {', '.join(failures)}")
    return k


def validate_symmetry(k: Kernel, n_probes: int = 1000, seed: int = 0) -> dict:
    """Probe declared flags and the envelope bound at pseudo-random points."""
    rng = np.random.default_rng(seed)
    d = k.dim
    scale = k.support_radius if math.isfinite(k.support_radius) else 3.0
    t = rng.normal(size=(n_probes, d)) * (scale / math.sqrt(d))
    t = t[_norm(t) > 1e-9]
    v = k(t)
    atol = 1e-12 * max(1.0, float(np.max(np.abs(v))))
    out = {"envelope": bool(np.all(np.abs(v) <= k.envelope(_norm(t)) * (1 + 1e-12) + 1e-15))}
    if k.even:
        out["even"] = bool(np.allclose(k(-t), v, rtol=1e-12, atol=atol))
    if k.radial:
        q = rng.normal(size=t.shape)
        q *= (_norm(t) / _norm(q))[:, None]
        out["radial"] = bool(np.allclose(k(q), v, rtol=1e-10, atol=atol))
    if math.isfinite(k.support_radius):
        far = t / _norm(t)[:, None] * (k.support_radius * (1.01 + rng.random(len(t)))[:, None])
        out["support"] = bool(np.all(k(far) == 0.0))
    if k.product and d > 1:
        # K(a)K(b) = K(a_S b_S^c) K(b_S a_S^c) for swapped first coordinates
        a, b = t, rng.permutation(t)
        a2, b2 = a.copy(), b.copy()
        a2[:, 0], b2[:, 0] = b[:, 0], a[:, 0]
        lhs = k(a) * k(b)
        out["product"] = bool(np.allclose(k(a2) * k(b2), lhs, rtol=1e-10, atol=atol ** 2))
    return out


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class MomentMatrix:
    matrix: np.ndarray
    region: Cone
    power: int
    error: float = 0.0


class _MomentCache:
    def __init__(self):
        self._data = {}
        self._lock = threading.Lock()

    def get_or_compute(self, key, fn):
        with self._lock:
            if key in self._data:
                return self._data[key]
        value = fn()  # pure; a concurrent duplicate computes the same value
        with self._lock:
            return self._data.setdefault(key, value)

    def clear(self):
        with self._lock:
            self._data.clear()

    def __len__(self):
        return len(self._data)


MOMENT_CACHE = _MomentCache()


def _as_cone(k: Kernel, region) -> Cone:
    if region is None or (isinstance(region, str) and region in ("full", "full_space")):
        return Cone.full(k.dim)
    if not isinstance(region, Cone):
        raise KernelError("region must be 'full' or a Cone")
    if region.dim != k.dim:
        raise KernelError("region and kernel dimensions differ")
    return region


def kernel_region(k: Kernel, cone: Cone, power: int, tol: float, degree: float):
    """Polar region of ``cone`` clipped to where ``K(-t)`` can be nonzero."""
    R = k.truncation_radius(power, tol, degree)

    def radial(sigma):
        hi = np.minimum(k.radial_extent(-sigma), R)
        return np.zeros((len(sigma), 1)), hi[:, None]

    return cone.polar_region(radial, singular_origin=k.singular)


def _coordinate_axis(cone: Cone):
    """``(index, sign)`` when the cone is full space or a coordinate half-space."""
    if cone.kind == "full":
        return None, 0.0
    if cone.kind != "half_space":
        return False
    a = np.asarray(cone.axis)
    i = int(np.argmax(np.abs(a)))
    if abs(abs(a[i]) - 1.0) > 1e-15:
        return False
    return i, math.copysign(1.0, a[i])


def _factor_integral(f: Kernel, power: int, q: int, side: float, tol: float):
    """``int f(-s)^power s^q ds`` over the line (side 0) or the half-line ``side * s >= 0``."""
    R = f.truncation_radius(power, tol, q)
    total = err = 0.0
    for lo, hi, sgn in ((-R, 0.0, -1.0), (0.0, R, 1.0)):
        if side and sgn != side:
            continue
        val, e = _sp_integrate.quad(
            lambda s: float(f(np.array([[-s]]))[0]) ** power * s ** q, lo, hi,
            epsabs=tol * 1e-3, epsrel=1e-13, limit=400)
        total += val
        err += e
    return total, err


def _factorized_moment(k: Kernel, idx, sign, power: int, order: int, tol: float):
    d = k.dim
    table, errs = [], []
    for l, f in enumerate(k.factors):
        side = sign if l == idx else 0.0
        row = [_factor_integral(f, power, q, side, tol) for q in range(order + 1)]
        table.append([v for v, _ in row])
        errs.extend(e for _, e in row)

    def prod(skip):
        return math.prod(table[l][0] for l in range(d) if l not in skip)

    if order == 1:
        val = np.array([table[i][1] * prod({i}) for i in range(d)])
    else:
        val = np.empty((d, d))
        for i in range(d):
            for j in range(d):
                if i == j:
                    val[i, i] = table[i][2] * prod({i})
                else:
                    val[i, j] = table[i][1] * table[j][1] * prod({i, j})
    scale = max(1.0, max(abs(x) for row in table for x in row)) ** (d - 1)
    return val, float(sum(errs) * scale)


def _moment(k: Kernel, cone: Cone, power: int, order: int, tol: float):
    if power not in (1, 2):
        raise KernelError("power must be 1 or 2")
    _require_finite(k, power, order, cone)
    d = k.dim
    if cone.is_null:
        return np.zeros((d, d)) if order == 2 else np.zeros(d), 0.0
    axis = _coordinate_axis(cone)
    if k.factors is not None and axis is not False:
        return _factorized_moment(k, axis[0], axis[1], power, order, tol)

    def integrand(t):
        w = k(-t) ** power
        if order == 1:
            return w[:, None] * t
        return (w[:, None, None] * t[:, :, None] * t[:, None, :]).reshape(len(t), d * d)

    region = kernel_region(k, cone, power, tol, order)
    res = integrate(IntegralTask(integrand, region, tol=tol, label=f"moment{order}"))
    val = np.asarray(res.value, dtype=float)
    if order == 2:
        val = val.reshape(d, d)
    return val, res.error


def _require_finite(k: Kernel, power: int, eta: float, cone: Cone):
    env = k.power_envelope
    if env is not None and not env.verdict(power, eta, k.dim):
        raise AdmissibilityError(
            f"int |K|^{power} |t|^{eta} diverges for {k.name} (tau={env.tau}, beta={env.beta})")


def second_moment_matrix(k: Kernel, region="full", power: int = 1,
                         tol: float = DEFAULT_TOL) -> MomentMatrix:
    """``M_ij = int_region K(-t)^power t_i t_j dt``, cached per kernel token."""
    cone = _as_cone(k, region)
    key = (k.token, cone, power, 2, tol)
    val, err = MOMENT_CACHE.get_or_compute(key, lambda: _moment(k, cone, power, 2, tol))
    return MomentMatrix(val.copy(), cone, power, err)


def first_moment_vector(k: Kernel, region="full", tol: float = DEFAULT_TOL) -> np.ndarray:
    """``v_i = int_region K(-t) t_i dt``, cached per kernel token."""
    cone = _as_cone(k, region)
    key = (k.token, cone, 1, 1, tol)
    val, _ = MOMENT_CACHE.get_or_compute(key, lambda: _moment(k, cone, 1, 1, tol))
    return val.copy()


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class PairVerdict:
    alpha: float
    eta: float
    verdict: str  # "finite" | "divergent" | "unknown"
    method: str  # "analytic" | "numeric"


@dataclass(frozen=True)
class AdmissibilityReport:
    verdicts: tuple

    @property
    def admissible(self) -> bool:
        return all(v.verdict == "finite" for v in self.verdicts)

    def as_dict(self) -> dict:
        return {(v.alpha, v.eta): v.verdict for v in self.verdicts}


# decade shells [10^j, 10^(j+1)] used by the numeric test
_SHELL_DECADES = 10
_FINITE_RATIO = 0.75
_DIVERGENT_RATIO = 0.95


def _shell_integral(k: Kernel, alpha: float, eta: float, a: float, b: float) -> float:
    d = k.dim
    if k.radial:
        def f(s):  # s = log r
            r = math.exp(s)
            return abs(float(k.envelope(r))) ** alpha * r ** (eta + d)
        # k.envelope equals |K| along rays for built-in radial kernels
        val, _ = _sp_integrate.quad(f, math.log(a), math.log(b), limit=200, epsrel=1e-10)
        return sphere_area(d) * val

    def integrand(t):
        return np.abs(k(t)) ** alpha * _norm(t) ** eta

    def radial(sigma):
        n = len(sigma)
        return np.full((n, 1), a), np.full((n, 1), b)

    region = Cone.full(d).polar_region(radial)
    scale = max(1e-300, b ** (eta + d))
    return float(integrate(IntegralTask(integrand, region, tol=1e-9 * scale)).value)


def _decade_ratio(k, alpha, eta, outward: bool) -> tuple:
    """Ratio of the last two decade-shell increments, plus the last increment."""
    incs = []
    for j in range(_SHELL_DECADES):
        if outward:
            a, b = 10.0 ** j, 10.0 ** (j + 1)
        else:
            a, b = 10.0 ** (-j - 1), 10.0 ** (-j)
        incs.append(_shell_integral(k, alpha, eta, a, b))
    last, prev = incs[-1], incs[-2]
    if prev == 0.0:
        return 0.0, last
    return last / prev, last


def numeric_admissibility(k: Kernel, alpha: float, eta: float) -> str:
    """Growing-radius verdict for ``int |K|^alpha |t|^eta < inf``.

    The integral is split into decade shells toward infinity and toward the
    origin.  A shell sequence whose last increment ratio is below 0.75 is
    summable; a ratio at or above 0.95 means the increments do not shrink.
    Anything in between is reported as ``unknown``.
    """
    verdicts = []
    outer_needed = not math.isfinite(k.support_radius)
    inner_needed = k.singular
    if outer_needed:
        verdicts.append(_classify_ratio(*_decade_ratio(k, alpha, eta, True)))
    if inner_needed:
        verdicts.append(_classify_ratio(*_decade_ratio(k, alpha, eta, False)))
    if "divergent" in verdicts:
        return "divergent"
    if "unknown" in verdicts:
        return "unknown"
    return "finite"


def _classify_ratio(ratio, last):
    if last == 0.0 or ratio < _FINITE_RATIO:
        return "finite"
    if ratio >= _DIVERGENT_RATIO:
        return "divergent"
    return "unknown"


def check_admissibility(k: Kernel, pairs=KT4_PAIRS, method: str = "auto") -> AdmissibilityReport:
    """Verdicts for ``int |K|^alpha |t|^eta < inf`` over each ``(alpha, eta)`` pair.

    With a power envelope ``C / (|t|^tau + |t|^beta)`` the verdict is
    analytic: finite iff ``alpha beta - eta > d`` and ``alpha tau - eta < d``.
    Otherwise (or with ``method='numeric'``) the decade-shell test is used.
    """
    if method not in ("auto", "analytic", "numeric"):
        raise KernelError("method must be auto, analytic or numeric")
    out = []
    for alpha, eta in pairs:
        if alpha <= 0:
            raise KernelError("alpha must be positive")
        env = k.power_envelope
        if method != "numeric" and env is not None:
            ok = env.verdict(alpha, eta, k.dim)
            out.append(PairVerdict(alpha, eta, "finite" if ok else "divergent", "analytic"))
        elif method == "analytic":
            out.append(PairVerdict(alpha, eta, "unknown", "analytic"))
        else:
            try:
                v = numeric_admissibility(k, alpha, eta)
            except NonConvergenceError:
                v = "unknown"
            out.append(PairVerdict(alpha, eta, v, "numeric"))
    return AdmissibilityReport(tuple(out))


# ---------------------------------------------------------------------------
# config


def kernel_from_spec(spec: dict, dim: int) -> Kernel:
    """Build a kernel from its config sub-schema."""
    spec = dict(spec)
    kind = spec.pop("type", None)
    try:
        if kind == "gaussian":
            return gaussian(dim, **spec)
        if kind == "indicator_ball":
            return indicator_ball(dim, **spec)
        if kind == "indicator_box":
            hw = spec.pop("half_widths", [1.0] * dim)
            if spec:
                raise TypeError(f"unexpected keys {sorted(spec)}")
            if len(hw) != dim:
                raise KernelError("half_widths length must equal the dimension")
            return indicator_box(hw)
        if kind == "epanechnikov":
            if spec:
                raise TypeError(f"unexpected keys {sorted(spec)}")
            return epanechnikov(dim)
        if kind == "product":
            facs = spec.pop("factors")
            if spec:
                raise TypeError(f"unexpected keys {sorted(spec)}")
            if len(facs) != dim:
                raise KernelError("product needs one factor per dimension")
            return product([kernel_from_spec(f, 1) for f in facs])
        if kind == "power_law":
            return power_law(dim, **spec)
        if kind == "tilted_gaussian":
            return tilted_gaussian(dim, **spec)
        if kind == "power_envelope":
            return power_envelope_kernel(dim, **spec)
    except TypeError as exc:
        raise KernelError(f"bad parameters for kernel {kind!r}: {exc}") from None
    raise KernelError(f"unknown kernel type {kind!r}")
