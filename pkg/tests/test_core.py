import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zohcbf.core import (
    ClassK,
    InputSet,
    LinearClassK,
    NondifferentiablePointError,
    hdot,
    lie_derivatives,
)
from zohcbf.reach import unicycle_arc


def test_lie_derivatives_integrator(integrator):
    Lf, Lg = lie_derivatives(integrator.model, integrator.barrier, np.array([0.5]))
    assert Lf == pytest.approx(0.0)
    assert Lg == pytest.approx([1.0])


def test_lie_derivatives_double_integrator(double_int):
    Lf, Lg = lie_derivatives(double_int.model, double_int.barrier, np.array([1.0, 2.0]))
    assert Lf == pytest.approx(2.0)
    assert Lg == pytest.approx([0.0])


def test_lie_derivatives_unicycle_fd_oracle(uni, rng):
    # oracle: finite differences of h along the closed-form flow; the
    # heading x3 = pi at zero bearing sits exactly on the wrap fold (the
    # excluded set), so the oracle runs at differentiable headings
    states = [np.array([20.0, 0.0, 2.5])] + list(uni.safe_sampler(rng, 10))
    for x in states:
        u = np.array([3.0, 0.1])
        eps = 1e-6
        h = lambda y: float(uni.barrier.h(np.asarray(y)[None])[0])
        hd_fd = (h(unicycle_arc(x, u, eps)) - h(unicycle_arc(x, u, -eps))) / (2 * eps)
        Lf, Lg = lie_derivatives(uni.model, uni.barrier, x)
        assert Lf + Lg @ u == pytest.approx(hd_fd, rel=1e-5, abs=1e-7)


def test_lie_derivatives_rejects_nondifferentiable(uni):
    # deep inside the obstacle influence the radicand is negative
    with pytest.raises(NondifferentiablePointError):
        lie_derivatives(uni.model, uni.barrier, np.array([1.0, 0.0, np.pi]))


def test_hdot_examples(integrator, double_int):
    assert hdot(integrator.model, integrator.barrier, np.array([0.0]), np.array([0.7])) == pytest.approx(0.7)
    assert hdot(integrator.model, integrator.barrier, np.array([0.0]), np.array([-1.0])) == pytest.approx(-1.0)
    for u in (-1.0, 0.0, 0.3):
        assert hdot(double_int.model, double_int.barrier, np.array([1.0, 2.0]), np.array([u])) == pytest.approx(2.0)


@given(x1=st.floats(-1.5, 1.5), x2=st.floats(-1.5, 1.5), u=st.floats(-1, 1))
@settings(max_examples=40, deadline=None)
def test_hdot_finite_difference_consistency(x1, x2, u):
    # hdot equals (h(x + eps*(f+gu)) - h(x)) / eps up to O(eps)
    from zohcbf.systems import make_system

    b = make_system("double-integrator")
    x = np.array([x1, x2])
    uu = np.array([u])
    eps = 1e-6
    xdot = b.model.xdot(x, uu)
    h = lambda y: float(b.barrier.h(np.asarray(y)[None])[0])
    fd = (h(x + eps * xdot) - h(x)) / eps
    assert hdot(b.model, b.barrier, x, uu) == pytest.approx(fd, rel=1e-4, abs=1e-9)


def test_psi_matches_dense_hdot_derivative(double_int):
    # psi along a constant-input flow vs differentiating hdot(t) numerically
    x = np.array([-1.0, 0.3])
    u = np.array([0.7])
    dt = 1e-4
    xs = [x.copy()]
    for _ in range(2):
        cur = xs[-1]
        k1 = double_int.model.xdot(cur, u)
        k2 = double_int.model.xdot(cur + 0.5 * dt * k1, u)
        k3 = double_int.model.xdot(cur + 0.5 * dt * k2, u)
        k4 = double_int.model.xdot(cur + dt * k3, u)
        xs.append(cur + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
    hd = [hdot(double_int.model, double_int.barrier, y, u) for y in xs]
    oracle = (hd[2] - hd[0]) / (2 * dt)
    psi = float(double_int.barrier.psi(x[None], u[None])[0])
    assert psi == pytest.approx(oracle, rel=1e-4, abs=1e-8)
    assert psi == pytest.approx(0.7, rel=1e-4)  # for this plant psi == u


@given(
    st.lists(st.tuples(st.floats(-3, 3), st.floats(0, 3)), min_size=1, max_size=4)
)
@settings(max_examples=60, deadline=None)
def test_umax_matches_corner_bruteforce(bounds):
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[0] + b[1] for b in bounds])
    iset = InputSet(lo, hi)
    brute = max(np.linalg.norm(c) for c in iset.corners())
    assert iset.u_max == pytest.approx(brute, rel=1e-12)


def test_input_set_validation():
    with pytest.raises(ValueError):
        InputSet(np.array([1.0]), np.array([0.0]))


def test_linear_classk_roundtrip():
    alpha = LinearClassK(2.5)
    assert alpha(0.0) == 0.0
    lam = np.linspace(-3, 3, 11)
    vals = alpha(lam)
    assert np.all(np.diff(vals) > 0)
    for v in lam:
        assert alpha.inverse(float(alpha(v))) == pytest.approx(v, abs=1e-9)


def test_generic_classk_bisection_inverse():
    cubic = ClassK(alpha=lambda lam: np.asarray(lam) ** 3 + np.asarray(lam))
    assert cubic(0.0) == 0.0
    for v in np.linspace(-2, 2, 9):
        assert cubic.inverse(float(cubic(v))) == pytest.approx(v, abs=1e-9)


@pytest.mark.parametrize("system", ["unicycle", "spacecraft"])
def test_grad_h_matches_finite_differences(system, rng):
    from zohcbf.systems import make_system

    b = make_system(system)
    X = b.safe_sampler(rng, 30)
    grads = np.asarray(b.barrier.grad_h(X))
    eps = 1e-6
    for i in range(X.shape[1]):
        step = eps * (1 + np.abs(X[:, i]))
        xp, xm = X.copy(), X.copy()
        xp[:, i] += step
        xm[:, i] -= step
        fd = (np.asarray(b.barrier.h(xp)) - np.asarray(b.barrier.h(xm))) / (2 * step)
        assert np.allclose(grads[:, i], fd, rtol=1e-5, atol=1e-7)
