import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zohcbf.engine import SupConfig
from zohcbf.margins import eta
from zohcbf.systems import (
    Scenario,
    make_system,
    spacecraft_nominal,
    unicycle_nominal,
    wrap_pi,
)


def test_wrap_pi_examples():
    assert wrap_pi(0.0) == 0.0
    assert wrap_pi(3 * np.pi / 2) == pytest.approx(-np.pi / 2)
    assert wrap_pi(-5 * np.pi / 2) == pytest.approx(-np.pi / 2)
    # boundary convention
    assert wrap_pi(np.pi) == pytest.approx(np.pi)
    assert wrap_pi(-np.pi) == pytest.approx(-np.pi)


@given(lam=st.floats(-50, 50))
@settings(max_examples=100, deadline=None)
def test_wrap_pi_range_and_periodicity(lam):
    w = wrap_pi(lam)
    assert -np.pi <= w <= np.pi
    assert np.cos(w) == pytest.approx(np.cos(lam), abs=1e-9)
    assert np.sin(w) == pytest.approx(np.sin(lam), abs=1e-9)


def test_unicycle_parameters(uni):
    assert uni.input_set.u_max == pytest.approx(np.sqrt(25.0625))
    assert uni.input_set.lo == pytest.approx([0.0, -0.25])
    assert uni.input_set.hi == pytest.approx([5.0, 0.25])


def test_unicycle_h_nan_inside_influence_core(uni):
    # radicand negative: evaluation is flagged, not silently extended
    assert np.isnan(uni.barrier.h(np.array([[1.0, 0.0, np.pi]]))[0])


def test_unicycle_h_value(uni):
    # heading aligned with bearing: theta_err = 0, h = rho - r
    assert uni.barrier.h(np.array([[15.0, 0.0, 0.0]]))[0] == pytest.approx(-5.0)


def test_unicycle_nominal(uni):
    scen = uni.scenario
    u = unicycle_nominal(np.array([0.0, -20.0, np.pi / 2]), scen, uni.input_set)
    assert u == pytest.approx([5.0, 0.0], abs=1e-12)  # aligned and far
    u = unicycle_nominal(np.concatenate([scen.target, [0.3]]), scen, uni.input_set)
    assert u == pytest.approx([0.0, 0.0])
    # heading 90 degrees off: turn rate saturates
    u = unicycle_nominal(np.array([0.0, -20.0, np.pi]), scen, uni.input_set)
    assert abs(u[1]) == pytest.approx(0.25)


def test_spacecraft_parameters(craft):
    assert craft.input_set.u_max == pytest.approx(0.01 * np.sqrt(3))
    assert len(craft.barriers) == 7  # pointing + six rate rows


def test_spacecraft_nominal(craft):
    scen = craft.scenario
    p = scen.target.copy()
    x = np.concatenate([p, np.zeros(3)])
    assert spacecraft_nominal(x, scen, craft.input_set) == pytest.approx(np.zeros(3), abs=1e-12)
    # pure damping when aligned but rotating
    om = np.array([0.01, -0.02, 0.005])
    u = spacecraft_nominal(np.concatenate([p, om]), scen, craft.input_set)
    assert u == pytest.approx(np.clip(-scen.gain_d * om, -0.01, 0.01), abs=1e-12)
    # orthogonal target with large gain saturates the infinity norm
    strong = Scenario(x0=scen.x0, target=np.array([0.0, 0.0, 1.0]), gain_p=10.0, gain_d=0.2)
    u = spacecraft_nominal(np.concatenate([np.array([1.0, 0.0, 0.0]), np.zeros(3)]), strong, craft.input_set)
    assert np.max(np.abs(u)) == pytest.approx(0.01)
    assert u == pytest.approx([0.0, -0.01, 0.0], abs=1e-12)  # along p x target


def test_spacecraft_nominal_antiparallel_deterministic(craft):
    scen = Scenario(x0=craft.scenario.x0, target=np.array([-1.0, 0.0, 0.0]))
    x = np.concatenate([np.array([1.0, 0.0, 0.0]), np.zeros(3)])
    u1 = spacecraft_nominal(x, scen, craft.input_set)
    u2 = spacecraft_nominal(x, scen, craft.input_set)
    assert np.array_equal(u1, u2)
    assert np.linalg.norm(u1) > 0  # singular geometry still acts


def test_omega_box_barriers(craft, rng):
    x0 = np.concatenate([np.array([1.0, 0.0, 0.0]), np.zeros(3)])
    for b in craft.barriers[1:]:
        assert b.h(x0[None])[0] == pytest.approx(-0.2)
    boundary = x0.copy()
    boundary[3] = 0.2
    assert craft.barriers[1].h(boundary[None])[0] == pytest.approx(0.0)
    # psi vanishes identically: eta = 0 for any state and horizon
    X = craft.safe_sampler(rng, 8)
    U = craft.input_set.sample(rng, 8)
    for b in craft.barriers[1:]:
        assert np.all(np.asarray(b.psi(X, U)) == 0.0)
    from dataclasses import replace

    cfg = SupConfig(budget=64, refine_rounds=0, top_k=4, inflation=1.0, seed=3)
    rate_bundle = replace(craft, barriers=(craft.barriers[1],))
    assert eta(rate_bundle, X[0], 0.1, cfg) == 0.0


def test_corridor_geometry():
    b = make_system("corridor")
    assert len(b.barriers) == 2
    centers = sorted(abs(float(bar.name.split("@")[1].split(",")[0])) for bar in b.barriers)
    assert centers[0] == pytest.approx(10.15)
    # the gap midpoint is safe for both obstacles when heading straight up
    mid = np.array([0.0, 0.0, np.pi / 2])
    for bar in b.barriers:
        assert float(bar.h(mid[None])[0]) < 0.0


def test_registry_rejects_unknown():
    with pytest.raises(KeyError):
        make_system("hovercraft")
