import numpy as np
import pytest

from zohcbf.core import LinearClassK
from zohcbf.engine import SupConfig
from zohcbf.margins import (
    compute_global_constants,
    eta,
    local_margins,
    make_margin,
    phi0_global,
    phi3_global,
    phi3_local,
    physical_margin,
    physical_margin_inf,
    upsilon,
)

ALPHA = LinearClassK(1.0)
EXACT = SupConfig(budget=512, refine_rounds=4, top_k=8, inflation=1.0, seed=3)
EXACT_LOCAL = SupConfig(budget=256, refine_rounds=0, top_k=8, inflation=1.0, seed=3)


def test_phi0_global_limit_branch(integrator):
    # drift-free scalar plant: l1 = 1, l2 = 0, Delta = 1 -> limit formula
    val = phi0_global(0.1, np.array([[-1.0]]), integrator.barrier, ALPHA,
                      l1=1.0, l2=0.0, delta=1.0)
    assert val[0] == pytest.approx(0.9, abs=1e-12)


def test_phi0_global_degenerate_l2_continuity(integrator):
    x = np.array([[-1.0]])
    lim = phi0_global(0.1, x, integrator.barrier, ALPHA, l1=1.0, l2=0.0, delta=1.0)[0]
    near = phi0_global(0.1, x, integrator.barrier, ALPHA, l1=1.0, l2=1e-8, delta=1.0)[0]
    assert abs(lim - near) <= 1e-9


def test_phi0_global_rejects_negative_constants(integrator):
    with pytest.raises(ValueError):
        phi0_global(0.1, np.array([[-1.0]]), integrator.barrier, ALPHA, l1=-1.0, l2=0.0, delta=1.0)


def test_phi1_local_integrator(integrator):
    m = make_margin(integrator, "phi1l", alpha=ALPHA, config=EXACT, local_config=EXACT_LOCAL)
    # l1(x) = Lip(alpha(-h)) = 1 and Delta(x) = 1 on the reach ball
    assert m.phi(0.1, np.array([-1.0])) == pytest.approx(0.9, rel=1e-6)


def test_phi_static_system_margins_vanish(static_sys):
    for variant in ("phi1l", "phi2l"):
        m = make_margin(static_sys, variant, alpha=ALPHA, config=EXACT, local_config=EXACT_LOCAL)
        # f = g = 0: the margin is exactly alpha(-h)
        assert m.phi(0.1, np.array([-0.7])) == pytest.approx(0.7, abs=1e-12)
        assert m.nu(0.1, np.array([-0.7])) == pytest.approx(0.0, abs=1e-12)


def test_upsilon_identity(double_int):
    x = np.array([-1.0, 0.2])
    assert upsilon(double_int.model, double_int.barrier, ALPHA, x, x, np.array([0.5])) == 0.0


def test_upsilon_integrator_hand_expansion(integrator):
    # only the barrier terms differ: upsilon = h(z) - h(x) = z - x
    for x, z in ((-1.0, -0.8), (-0.5, -1.2)):
        val = upsilon(integrator.model, integrator.barrier, ALPHA,
                      np.array([x]), np.array([z]), np.array([0.3]))
        assert val == pytest.approx(z - x, abs=1e-12)


def test_upsilon_bounded_by_local_lipschitz(uni, rng):
    # |upsilon(x, z, u)| <= l1(x) ||z - x|| for z in the reach
    for x in uni.safe_sampler(rng, 5):
        lm = local_margins(uni, x, 0.1, ALPHA, EXACT_LOCAL, need=("nu1",))
        reach = uni.local_reach(x, 0.1)
        P = rng.uniform(reach.space.lo, reach.space.hi, size=(64, reach.space.dim))
        Z, _ = reach.space.states_and_valid(P)
        for z in Z[:16]:
            u = uni.input_set.sample(rng, 1)[0]
            v = upsilon(uni.model, uni.barrier, ALPHA, x, z, u)
            assert abs(v) <= lm.l1_x * np.linalg.norm(z - x) + 1e-6


def test_phi2_local_integrator(integrator):
    # sup of upsilon over the reach interval [x-T, x+T] is exactly T
    m = make_margin(integrator, "phi2l", alpha=ALPHA, config=EXACT, local_config=EXACT_LOCAL)
    nu2 = m.nu(0.1, np.array([-1.0]))
    assert nu2 == pytest.approx(0.1, rel=0.02)
    assert m.phi(0.1, np.array([-1.0])) == pytest.approx(0.9, rel=0.005)


def test_eta_integrator_zero(integrator):
    assert eta(integrator, np.array([-1.0]), 0.1, EXACT_LOCAL) == pytest.approx(0.0, abs=1e-9)


def test_eta_double_integrator_one(double_int):
    assert eta(double_int, np.array([-1.0, 0.0]), 0.1, EXACT_LOCAL) == pytest.approx(1.0, rel=1e-6)


def test_eta_clamped_nonnegative():
    # a barrier concave along every flow: psi < 0 everywhere, so eta clamps to 0
    from dataclasses import replace
    from zohcbf.core import Barrier, default_psi
    from zohcbf.systems import make_system

    b = make_system("integrator1d")
    concave = Barrier(
        h=lambda x: -np.asarray(x, dtype=float)[..., 0] ** 2 - 1.0,
        grad_h=lambda x: -2.0 * np.asarray(x, dtype=float),
    )
    concave = replace(concave, psi=default_psi(b.model, concave))
    bundle = replace(b, barriers=(concave,))
    assert eta(bundle, np.array([0.5]), 0.1, EXACT_LOCAL) == 0.0


def test_phi3_local_examples(integrator, double_int):
    assert phi3_local(0.1, np.array([-1.0]), integrator, 1.0, EXACT_LOCAL) == pytest.approx(10.0, abs=1e-9)
    assert phi3_local(0.1, np.array([-1.0, 0.0]), double_int, 1.0, EXACT_LOCAL) == pytest.approx(9.95, rel=1e-6)
    # at the boundary the condition forces hdot <= -T*eta/2
    at_boundary = phi3_local(0.1, np.array([0.0, 0.0]), double_int, 1.0, EXACT_LOCAL)
    assert at_boundary == pytest.approx(-0.05, rel=1e-6)
    assert at_boundary <= 0.0


def test_phi3_gamma_validation(integrator):
    with pytest.raises(ValueError):
        phi3_local(0.1, np.array([-1.0]), integrator, 0.0, EXACT_LOCAL)
    with pytest.raises(ValueError):
        make_margin(integrator, "phi3g", gamma=1.5)


def test_margin_function_identities(uni, rng):
    # phi + nu - alpha(-h) == 0 for variants 0-2; phi3 + nu3 + (gamma/T) h == 0
    consts_cfg = SupConfig(budget=1024, refine_rounds=4, top_k=8, inflation=1.05, seed=0)
    X = uni.safe_sampler(rng, 5)
    for variant in ("phi0g", "phi1g", "phi2g"):
        m = make_margin(uni, variant, alpha=ALPHA, config=consts_cfg)
        for x in X:
            hx = float(uni.barrier.h(x[None])[0])
            phi_val = m.phi(0.1, x)
            # the exponential margin reaches 1e49; the identity holds to
            # relative float precision at that magnitude
            tol = 1e-9 + 1e-12 * abs(phi_val)
            assert phi_val + m.nu(0.1, x) - (-hx) == pytest.approx(0.0, abs=tol)
    m = make_margin(uni, "phi3g", gamma=0.8, config=consts_cfg)
    for x in X:
        hx = float(uni.barrier.h(x[None])[0])
        assert m.phi(0.1, x) + m.nu(0.1, x) + (0.8 / 0.1) * hx == pytest.approx(0.0, abs=1e-9)


def test_global_margin_caching(uni):
    cfg = SupConfig(budget=256, refine_rounds=2, top_k=8, inflation=1.05, seed=5)
    a = compute_global_constants(uni, 0.05, ALPHA, cfg)
    b = compute_global_constants(uni, 0.05, ALPHA, cfg)
    assert a is b  # cache hit, provenance included


def test_physical_margin_global_closed_form(integrator):
    pm = physical_margin(integrator, "phi1g", 0.1, alpha=ALPHA, config=EXACT)
    assert pm.value == pytest.approx(0.1, rel=1e-6)  # alpha^{-1}(l_h T Delta)


def test_physical_margin_local_ray_method(integrator):
    pm = physical_margin(integrator, "phi2l", 0.1, alpha=ALPHA, config=EXACT, n_rays=32)
    # zero manifold of phi2l sits at h = -nu2l(x) ~ -0.1
    assert pm.value == pytest.approx(0.1, rel=0.05)
    assert not pm.empty_manifold


def test_physical_margin_inf_integrator(integrator):
    # Lip(h) = 1, Delta = 1: the linear-family limit is l_h * T * Delta
    assert physical_margin_inf(integrator, "phi1g", 0.1, EXACT) == pytest.approx(0.1, rel=1e-6)
    assert physical_margin_inf(integrator, "phi3g", 0.1, EXACT) == pytest.approx(0.0, abs=1e-9)


def test_physical_margin_inf_grid_matches_analytic(integrator):
    a = physical_margin_inf(integrator, "phi0g", 0.1, EXACT)
    g = physical_margin_inf(integrator, "phi0g", 0.1, EXACT, gamma_grid=True)
    assert g == pytest.approx(a, rel=1e-6)


def test_local_margin_ordering_small(uni, craft, rng):
    cfg = SupConfig(budget=128, refine_rounds=0, top_k=8, inflation=1.05, seed=7)
    for bundle in (uni, craft):
        for x in bundle.safe_sampler(rng, 10):
            lm = local_margins(bundle, x, 0.1, ALPHA, cfg)
            assert lm.nu2l <= lm.nu1l + 1e-9
            assert lm.nu3l <= 0.5 * lm.nu1l + 1e-9
