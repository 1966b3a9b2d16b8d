import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zohcbf.core import InputSet, LinearClassK
from zohcbf.engine import SupConfig
from zohcbf.margins import make_margin
from zohcbf.qp import QPProblem, build_constraint, kkt_residual, solve_filter

BOX1 = InputSet(np.array([-1.0]), np.array([1.0]))
BOX2 = InputSet(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))


def test_active_constraint():
    sol = solve_filter(QPProblem(np.array([1.0]), ((np.array([1.0]), 0.5),), BOX1))
    assert sol.optimal
    assert sol.u == pytest.approx([0.5], abs=1e-10)


def test_inactive_constraint_returns_nominal_exactly():
    sol = solve_filter(QPProblem(np.array([-0.3]), ((np.array([1.0]), 0.5),), BOX1))
    assert sol.optimal
    assert sol.u[0] == -0.3  # bit-exact pass-through


def test_infeasible_chebyshev():
    sol = solve_filter(QPProblem(np.array([0.0]), ((np.array([1.0]), -2.0),), BOX1))
    assert sol.status == "infeasible-relaxed"
    assert sol.u == pytest.approx([-1.0], abs=1e-7)
    assert sol.violation == pytest.approx(1.0, abs=1e-7)


def test_halfspace_projection_vs_dense_grid():
    prob = QPProblem(np.array([1.0, 1.0]), ((np.array([1.0, 1.0]), 1.0),), BOX2)
    sol = solve_filter(prob)
    assert sol.u == pytest.approx([0.5, 0.5], abs=1e-10)
    # dense grid oracle
    g = np.linspace(-1, 1, 401)
    U = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2)
    U = U[U @ np.array([1.0, 1.0]) <= 1.0 + 1e-12]
    u_g = U[np.argmin(np.sum((U - prob.u_nom) ** 2, axis=1))]
    assert np.linalg.norm(sol.u - u_g) <= 2 * (2 / 400)


def test_zero_row_handling():
    vac = solve_filter(QPProblem(np.array([0.2]), ((np.zeros(1), 0.5),), BOX1))
    assert vac.optimal and vac.u[0] == 0.2
    bad = solve_filter(QPProblem(np.array([0.2]), ((np.zeros(1), -0.5),), BOX1))
    assert bad.status == "infeasible-relaxed"
    assert bad.violation == pytest.approx(0.5, abs=1e-9)


def test_nonfinite_row_rejected():
    with pytest.raises(ValueError):
        QPProblem(np.array([0.0]), ((np.array([np.nan]), 0.0),), BOX1)


@given(
    u1=st.floats(-0.9, 0.9), u2=st.floats(-0.9, 0.9),
    a1=st.floats(-2, 2), a2=st.floats(-2, 2),
)
@settings(max_examples=60, deadline=None)
def test_projection_idempotence(u1, u2, a1, a2):
    u_nom = np.array([u1, u2])
    a = np.array([a1, a2])
    b = float(a @ u_nom) + 0.1  # strictly feasible by construction
    sol = solve_filter(QPProblem(u_nom, ((a, b),), BOX2))
    assert sol.optimal
    assert np.all(np.abs(sol.u - u_nom) <= 1e-10)


@given(data=st.data())
@settings(max_examples=40, deadline=None)
def test_kkt_residual_small(data):
    m = data.draw(st.integers(1, 3))
    u_nom = np.array([data.draw(st.floats(-2, 2)) for _ in range(m)])
    rows = []
    for _ in range(data.draw(st.integers(0, 2))):
        a = np.array([data.draw(st.floats(-1.5, 1.5)) for _ in range(m)])
        rows.append((a, data.draw(st.floats(-1, 2))))
    box = InputSet(-np.ones(m), np.ones(m))
    prob = QPProblem(u_nom, tuple(rows), box)
    sol = solve_filter(prob)
    if sol.optimal:
        assert kkt_residual(prob, sol) <= 1e-8


def test_build_constraint_integrator(integrator):
    cfg = SupConfig(budget=256, refine_rounds=0, top_k=8, inflation=1.0, seed=3)
    m = make_margin(integrator, "phi3l", gamma=1.0, local_config=cfg)
    a, b = build_constraint(integrator.model, integrator.barrier, m, np.array([-1.0]), 0.1)
    assert a == pytest.approx([1.0])
    assert b == pytest.approx(10.0, abs=1e-9)


def test_build_constraint_static_vacuous(static_sys):
    cfg = SupConfig(budget=128, refine_rounds=0, top_k=8, inflation=1.0, seed=3)
    m = make_margin(static_sys, "phi2l", alpha=LinearClassK(1.0), local_config=cfg)
    a, b = build_constraint(static_sys.model, static_sys.barrier, m, np.array([-0.4]), 0.1)
    assert a == pytest.approx([0.0])
    assert b == pytest.approx(0.4, abs=1e-12)
    assert b >= 0.0  # vacuous on the safe set


def test_omega_box_rows(craft):
    # rate rows: a = ±e_i, b = (gamma/T)(0.2 ∓ omega_i); curvature-free
    from zohcbf.sim import aux_barrier_row

    x = craft.scenario.x0.copy()
    x[3] = 0.12
    for b_idx, barrier in enumerate(craft.barriers[1:]):
        a, b = aux_barrier_row(craft.model, barrier, 1.0, 0.1, x)
        i, sign = divmod(b_idx, 2)
        s = 1.0 if sign == 0 else -1.0
        expect = np.zeros(3)
        expect[i] = s
        assert a == pytest.approx(expect)
        assert b == pytest.approx(10.0 * (0.2 - s * x[3 + i]), abs=1e-9)
