"""Test functions f with exact gradients and Hessians."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class FunctionError(ValueError):
    pass


@dataclass(frozen=True)
class TestFunction:
    """f : R^d -> R with exact first and second derivatives.

    ``f``, ``grad`` and ``hess`` are vectorized over points of shape (N, d)
    and return shapes (N,), (N, d) and (N, d, d).  ``theta`` is the Hölder
    exponent of the Hessian (class C^{2,theta}).
    """

    __test__ = False  # not a pytest class

    dim: int
    f: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    theta: float = 1.0
    name: str = "custom"
    params: tuple = field(default=(), compare=False)

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.f(_pts(x, self.dim)), dtype=float)

    def value_at(self, p) -> float:
        return float(self(np.asarray(p, dtype=float).reshape(1, -1))[0])

    def grad_at(self, p) -> np.ndarray:
        return np.asarray(self.grad(np.asarray(p, dtype=float).reshape(1, -1)), dtype=float)[0]

    def hess_at(self, p) -> np.ndarray:
        return np.asarray(self.hess(np.asarray(p, dtype=float).reshape(1, -1)), dtype=float)[0]

    def scaled(self, a: float) -> "TestFunction":
        return linear_combination([(a, self)])

    def __add__(self, other: "TestFunction") -> "TestFunction":
        return linear_combination([(1.0, self), (1.0, other)])


def _pts(x, d):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, d) if d == 1 else x.reshape(1, -1)
    if x.shape[1] != d:
        raise FunctionError(f"expected {d}-dimensional points")
    return x


def polynomial(terms, dim: int) -> TestFunction:
    """``sum_k c_k prod_i x_i^(a_ki)`` from ``terms = [(c, (a_1, ..., a_d)), ...]``."""
    cs = np.array([float(c) for c, _ in terms])
    A = np.array([[int(a) for a in pw] for _, pw in terms], dtype=int).reshape(len(terms), -1)
    if A.shape[1] != dim or np.any(A < 0):
        raise FunctionError("powers must be nonnegative, one per coordinate")

    def mono(x, powers):
        # x^powers with 0^0 = 1 and negative powers treated as zero monomials
        out = np.ones(len(x))
        for i, a in enumerate(powers):
            if a < 0:
                return np.zeros(len(x))
            if a:
                out = out * x[:, i] ** a
        return out

    def f(x):
        return sum(c * mono(x, a) for c, a in zip(cs, A)) if len(cs) else np.zeros(len(x))

    def grad(x):
        out = np.zeros_like(x)
        for c, a in zip(cs, A):
            for i in range(dim):
                if a[i]:
                    b = a.copy()
                    b[i] -= 1
                    out[:, i] += c * a[i] * mono(x, b)
        return out

    def hess(x):
        out = np.zeros((len(x), dim, dim))
        for c, a in zip(cs, A):
            for i in range(dim):
                for j in range(dim):
                    b = a.copy()
                    coef = b[i]
                    b[i] -= 1
                    coef *= b[j]
                    b[j] -= 1
                    if coef:
                        out[:, i, j] += c * coef * mono(x, b)
        return out

    return TestFunction(dim, f, grad, hess, theta=1.0, name="polynomial",
                        params=tuple((float(c), tuple(int(v) for v in a)) for c, a in zip(cs, A)))


def constant(value: float, dim: int) -> TestFunction:
    return polynomial([(value, (0,) * dim)], dim)


def linear(coefs, offset: float = 0.0) -> TestFunction:
    coefs = np.atleast_1d(np.asarray(coefs, dtype=float))
    d = coefs.size
    terms = [(offset, (0,) * d)] + [(c, tuple(int(i == j) for j in range(d)))
                                    for i, c in enumerate(coefs)]
    return polynomial(terms, d)


def trig(amplitude: float, wavevector, phase: float = 0.0) -> TestFunction:
    """``amplitude * sin(w . x + phase)``."""
    w = np.atleast_1d(np.asarray(wavevector, dtype=float))
    A, ph = float(amplitude), float(phase)
    d = w.size
    return TestFunction(
        d,
        lambda x: A * np.sin(x @ w + ph),
        lambda x: (A * np.cos(x @ w + ph))[:, None] * w[None, :],
        lambda x: (-A * np.sin(x @ w + ph))[:, None, None] * np.outer(w, w)[None],
        theta=1.0, name="trig", params=(A, tuple(w.tolist()), ph))


def holder(theta: float, center, scale: float = 1.0) -> TestFunction:
    """``scale * |x - q|^(2 + theta)``, of class C^{2,theta} exactly."""
    if not 0.0 <= theta <= 1.0:
        raise FunctionError("theta must lie in [0, 1]")
    q = np.atleast_1d(np.asarray(center, dtype=float))
    s, th = float(scale), float(theta)
    d = q.size

    def f(x):
        return s * np.linalg.norm(x - q, axis=1) ** (2.0 + th)

    def grad(x):
        y = x - q
        r = np.linalg.norm(y, axis=1)
        return (s * (2.0 + th) * r ** th)[:, None] * y

    def hess(x):
        y = x - q
        r = np.linalg.norm(y, axis=1)
        eye = np.broadcast_to(np.eye(d), (len(x), d, d))
        out = (s * (2.0 + th) * r ** th)[:, None, None] * eye
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(r > 0, s * (2.0 + th) * th * r ** (th - 2.0), 0.0)
        return out + c[:, None, None] * y[:, :, None] * y[:, None, :]

    return TestFunction(d, f, grad, hess, theta=th, name="holder",
                        params=(th, tuple(q.tolist()), s))


def linear_combination(pairs) -> TestFunction:
    """``sum_k a_k f_k`` for ``pairs = [(a_k, f_k), ...]``."""
    pairs = [(float(a), g) for a, g in pairs]
    d = pairs[0][1].dim
    if any(g.dim != d for _, g in pairs):
        raise FunctionError("dimension mismatch in linear combination")
    return TestFunction(
        d,
        lambda x: sum(a * np.asarray(g.f(x)) for a, g in pairs),
        lambda x: sum(a * np.asarray(g.grad(x)) for a, g in pairs),
        lambda x: sum(a * np.asarray(g.hess(x)) for a, g in pairs),
        theta=min(g.theta for _, g in pairs), name="combination",
        params=tuple((a, g.name, g.params) for a, g in pairs))


def function_from_spec(spec: dict, dim: int) -> TestFunction:
    spec = dict(spec)
    kind = spec.pop("type", None)
    try:
        if kind == "polynomial":
            terms = spec.pop("terms")
            if spec:
                raise TypeError(f"unexpected keys {sorted(spec)}")
            return polynomial([(t["coef"], t["powers"]) for t in terms], dim)
        if kind == "trig":
            f = trig(**spec)
        elif kind == "holder":
            spec.setdefault("center", [0.0] * dim)
            f = holder(**spec)
        else:
            raise FunctionError(f"unknown function type {kind!r}")
    except (TypeError, KeyError) as exc:
        raise FunctionError(f"bad parameters for function {kind!r}: {exc}") from None
    if f.dim != dim:
        raise FunctionError("function parameters do not match the dimension")
    return f
