import numpy as np
import pytest

from graphlap import functions as F

FUNCS = [
    F.polynomial([(1.0, (2,)), (1.0, (1,))], 1),
    F.polynomial([(0.5, (3, 1)), (-2.0, (0, 2)), (1.0, (1, 1))], 2),
    F.linear([1.0, -2.0, 0.5], 3.0),
    F.trig(1.5, [2.0, -1.0], 0.3),
    F.holder(0.5, [0.1]),
    F.holder(0.3, [0.2, -0.1], 2.0),
    F.polynomial([(1.0, (1, 0))], 2) + F.trig(0.5, [1.0, 1.0]),
]


@pytest.mark.parametrize("f", FUNCS, ids=lambda f: f.name)
def test_derivatives_match_finite_differences(f):
    rng = np.random.default_rng(0)
    h = 1e-5
    for _ in range(100):
        x = rng.uniform(-1, 1, f.dim)
        E = np.eye(f.dim)
        g_fd = np.array([(f.value_at(x + h * e) - f.value_at(x - h * e)) / (2 * h) for e in E])
        H_fd = np.array([(f.grad_at(x + h * e) - f.grad_at(x - h * e)) / (2 * h) for e in E])
        g, H = f.grad_at(x), f.hess_at(x)
        assert np.all(np.abs(g_fd - g) <= 1e-5 * max(1.0, np.max(np.abs(g))))
        assert np.all(np.abs(H_fd - H) <= 1e-5 * max(1.0, np.max(np.abs(H))))
        assert np.allclose(H, H.T, atol=1e-14)


def test_holder_values():
    f = F.holder(0.5, [0.0])
    assert f.value_at([0.25]) == pytest.approx(0.25 ** 2.5)
    assert f.theta == 0.5
    assert np.all(f.hess_at([0.0]) == 0.0)


def test_combination_and_constant():
    c = F.constant(3.0, 2)
    assert c.value_at([0.4, -1.0]) == 3.0
    assert np.all(c.grad_at([0.4, -1.0]) == 0.0)
    f = F.linear([1.0, 2.0]).scaled(-2.0)
    assert f.value_at([1.0, 1.0]) == -6.0
    with pytest.raises(F.FunctionError):
        F.linear([1.0]) + F.linear([1.0, 2.0])


def test_function_from_spec():
    f = F.function_from_spec({"type": "polynomial",
                              "terms": [{"coef": 1.0, "powers": [2]}, {"coef": 1.0, "powers": [1]}]}, 1)
    assert f.value_at([2.0]) == 6.0
    h = F.function_from_spec({"type": "holder", "theta": 0.5}, 1)
    assert h.value_at([1.0]) == 1.0
    with pytest.raises(F.FunctionError):
        F.function_from_spec({"type": "trig", "amplitude": 1.0, "wavevector": [1.0, 1.0]}, 1)
    with pytest.raises(F.FunctionError):
        F.function_from_spec({"type": "spline"}, 1)
    with pytest.raises(F.FunctionError):
        F.polynomial([(1.0, (-1,))], 1)
