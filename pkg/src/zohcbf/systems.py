"""Case-study plants and toy benches.

The two production systems:

* unicycle with a polar obstacle barrier — position/heading kinematics, the
  barrier penalizes pointing at the obstacle, so the effective exclusion
  radius depends on heading. Its gradient field has a fold on the heading
  wrap manifold and the barrier value itself is undefined deep inside the
  obstacle's influence region (negative radicand), both of which the
  sampling machinery must dodge.
* spacecraft pointing — unit pointing vector plus angular rate, keep-out
  cone around a fixed direction with a velocity-augmented barrier, and a
  rate box enforced through six extra one-sided barriers (their curvature
  term is identically zero, so those rows cost nothing).

Toy systems (static, 1-D integrator, double integrator) ship in the same
registry so the CLI and tests can drive them through identical plumbing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    Barrier,
    ClassK,
    DynamicsModel,
    InputSet,
    LinearClassK,
    default_psi,
)
from .engine import SupConfig
from .reach import (
    BoxSpace,
    MappedSpace,
    ReachBound,
    SampleSpace,
    delta0_bound,
    reach_ball,
    reach_exact_unicycle,
    reach_flow,
    unicycle_arc,
)

__all__ = [
    "wrap_pi",
    "SystemBundle",
    "unicycle",
    "spacecraft",
    "corridor_unicycle",
    "integrator_1d",
    "double_integrator",
    "static_system",
    "omega_box_barriers",
    "unicycle_nominal",
    "spacecraft_nominal",
    "SYSTEMS",
    "make_system",
]


def _cross3(a, b):
    # np.cross burns time in axis normalization; these are always (..., 3)
    ax, ay, az = a[..., 0], a[..., 1], a[..., 2]
    bx, by, bz = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx], axis=-1)


def wrap_pi(lam):
    """Wrap to [-pi, pi]; ties use round-half-even so wrap_pi(pi) = pi and
    wrap_pi(-pi) = -pi."""
    lam = np.asarray(lam, dtype=float)
    out = lam - 2.0 * np.pi * np.round(lam / (2.0 * np.pi))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Scenario:
    x0: np.ndarray
    target: np.ndarray
    duration: float = 30.0
    gain_v: float = 1.0
    gain_w: float = 1.0
    gain_p: float = 0.02
    gain_d: float = 0.2


@dataclass(frozen=True)
class SystemBundle:
    """Everything downstream code needs to know about one plant."""

    name: str
    model: DynamicsModel
    input_set: InputSet
    barriers: tuple  # main barrier first
    domain_region: SampleSpace  # working domain D (states where dynamics live)
    safe_region: SampleSpace  # S ∩ D
    lipschitz_regions: tuple  # regions over which global dynamics-Lipschitz sups run
    flow_map: Callable  # flow_map(x0, u, tau) batched constant-input flow
    local_reach: Callable  # local_reach(x, T) -> ReachBound
    nominal: Callable  # nominal(x, scenario) -> u
    scenario: Scenario
    in_domain: Callable  # in_domain(x) -> bool, for simulator termination
    reached: Callable  # reached(x, scenario) -> bool
    post_step: Optional[Callable] = None  # state projection after each RK4 step
    safe_sampler: Optional[Callable] = None  # safe_sampler(rng, n) -> states

    @property
    def barrier(self) -> Barrier:
        return self.barriers[0]


# ---------------------------------------------------------------------------
# unicycle
# ---------------------------------------------------------------------------


def _uni_theta(x, center, sigma):
    return wrap_pi(
        x[..., 2] - sigma * np.arctan2(x[..., 1] - center[1], x[..., 0] - center[0])
    )


def _uni_radicand(x, center, sigma):
    dx = x[..., 0] - center[0]
    dy = x[..., 1] - center[1]
    return dx * dx + dy * dy - _uni_theta(x, center, sigma) ** 2


def unicycle_barrier(center=(0.0, 0.0), rho=10.0, sigma=1.0) -> Barrier:
    center = np.asarray(center, dtype=float)

    def h(x):
        q = _uni_radicand(x, center, sigma)
        return np.where(q >= 0.0, rho - np.sqrt(np.maximum(q, 0.0)), np.nan)

    def grad_h(x):
        x = np.asarray(x, dtype=float)
        dx = x[..., 0] - center[0]
        dy = x[..., 1] - center[1]
        th = _uni_theta(x, center, sigma)
        r2 = dx * dx + dy * dy
        q = r2 - th * th
        root = np.sqrt(np.where(q > 0.0, q, np.nan))
        gq = np.stack(
            [
                2.0 * dx - 2.0 * th * sigma * dy / r2,
                2.0 * dy + 2.0 * th * sigma * dx / r2,
                -2.0 * th,
            ],
            axis=-1,
        )
        return -gq / (2.0 * root)[..., None]

    def guard(x, scale):
        # heading-error fold at |theta| = pi; theta moves at most ~2x the
        # state perturbation near the safe set, hence the factor
        th = _uni_theta(x, center, sigma)
        return (np.pi - np.abs(th)) < 2.0 * np.asarray(scale)

    return Barrier(
        h=h,
        grad_h=grad_h,
        nondiff_set_description=(
            "wrap fold |theta_err| = pi (heading antipodal to bearing) and the "
            "set where the radicand is nonpositive"
        ),
        nondiff_guard=guard,
        name="polar-obstacle",
    )


def unicycle_nominal(x, scenario: Scenario, input_set: InputSet):
    """Proportional speed toward the target, proportional heading correction;
    both clipped to the input box. Zero input at the target itself."""
    x = np.asarray(x, dtype=float)
    dx = scenario.target[0] - x[0]
    dy = scenario.target[1] - x[1]
    dist = math.hypot(dx, dy)
    if dist < 1e-9:
        return np.zeros(2)
    bearing = math.atan2(dy, dx)
    u1 = np.clip(scenario.gain_v * dist, input_set.lo[0], input_set.hi[0])
    u2 = np.clip(
        scenario.gain_w * wrap_pi(bearing - x[2]), input_set.lo[1], input_set.hi[1]
    )
    return np.array([u1, u2])


def unicycle(
    obstacles: Sequence = ((0.0, 0.0),),
    rho: float = 10.0,
    sigma: float = 1.0,
    box_half: float = 40.0,
    q_floor: float = 0.21,
    x0=(0.0, -20.0, np.pi / 2),
    target=(0.0, 20.0),
    duration: float = 45.0,
) -> SystemBundle:
    """Unicycle bundle.

    ``q_floor`` is the calibrated floor on the barrier radicand for the
    domain over which the global dynamics-Lipschitz constants are taken: the
    gradient of L_g h diverges as the radicand -> 0, so the constants are a
    property of how much of that shell the working domain includes. The
    default reproduces the reference margin tables; sensitivity is roughly
    l_{Lg h} ∝ q_floor^(-3/2).
    """
    obstacles = tuple(np.asarray(c, dtype=float) for c in obstacles)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x)

    def g(x):
        x = np.asarray(x, dtype=float)
        c, s = np.cos(x[..., 2]), np.sin(x[..., 2])
        zero = np.zeros_like(c)
        one = np.ones_like(c)
        return np.stack(
            [
                np.stack([c, zero], axis=-1),
                np.stack([s, zero], axis=-1),
                np.stack([zero, one], axis=-1),
            ],
            axis=-2,
        )

    model = DynamicsModel(
        dim_state=3, dim_input=2, f=f, g=g, lipschitz_f=0.0, lipschitz_g=1.0
    )
    input_set = InputSet(lo=np.array([0.0, -0.25]), hi=np.array([5.0, 0.25]))

    barriers = []
    for c in obstacles:
        b = unicycle_barrier(c, rho, sigma)
        barriers.append(replace(b, psi=default_psi(model, b), name=f"obstacle@{c[0]:g},{c[1]:g}"))
    main = barriers[0]
    center = obstacles[0]

    lo3 = np.array([-box_half, -box_half, -np.pi])
    hi3 = np.array([box_half, box_half, np.pi])

    def any_q(x):
        qs = [np.asarray(_uni_radicand(x, c, sigma)) for c in obstacles]
        return np.min(np.stack(qs, axis=0), axis=0)

    domain_region = BoxSpace(
        lo3,
        hi3,
        mask=lambda X: any_q(X) >= q_floor,
        description=f"box(±{box_half:g}) with radicand >= {q_floor:g}",
    )

    def safe_mask(X):
        ok = np.ones(X.shape[0], dtype=bool)
        for b in barriers:
            hv = np.asarray(b.h(X))
            ok &= np.isfinite(hv) & (hv <= 0.0)
        return ok

    safe_region = BoxSpace(lo3, hi3, mask=safe_mask, description=f"S ∩ box(±{box_half:g})")

    # shell region: parametrized by (theta, ln q, bearing) so samples land on
    # the thin high-gradient layer right above the radicand floor
    q_hi = 40.0
    shell_lo = np.array([-np.pi + 0.01, np.log(q_floor), -np.pi])
    shell_hi = np.array([np.pi - 0.01, np.log(q_hi), np.pi])

    def shell_states(P):
        th, q, beta = P[:, 0], np.exp(P[:, 1]), P[:, 2]
        r = np.sqrt(q + th * th)
        return np.stack(
            [
                center[0] + r * np.cos(beta),
                center[1] + r * np.sin(beta),
                wrap_pi(sigma * beta + th),
            ],
            axis=-1,
        )

    shell_region = MappedSpace(
        shell_lo,
        shell_hi,
        shell_states,
        description=f"radicand shell [{q_floor:g}, {q_hi:g}]",
    )

    def flow_map(x0_, u, tau):
        return unicycle_arc(x0_, u, tau)

    def local_reach(x, T):
        return reach_exact_unicycle(x, input_set, T)

    # speed gain 0.25 keeps the line-of-sight rate within the turn authority
    # near the target (k_v * sin(err) <= 0.25); k_v = 1 orbits forever
    scenario = Scenario(
        x0=np.asarray(x0, dtype=float),
        target=np.asarray(target, dtype=float),
        duration=duration,
        gain_v=0.25,
        gain_w=1.0,
    )

    def in_domain(x):
        if not np.all(np.isfinite(x)):
            return False
        if abs(x[0]) > box_half or abs(x[1]) > box_half:
            return False
        return bool(np.isfinite(main.h(np.asarray(x)[None])[0]))

    def reached(x, scen):
        return math.hypot(x[0] - scen.target[0], x[1] - scen.target[1]) <= 0.5

    def safe_sampler(rng, n):
        out = np.empty((0, 3))
        while len(out) < n:
            X = rng.uniform(lo3, hi3, size=(4 * n, 3))
            X = X[safe_mask(X)]
            # keep clear of the wrap fold so derivative checks are valid
            X = X[np.pi - np.abs(_uni_theta(X, center, sigma)) > 0.2]
            out = np.concatenate([out, X])
        return out[:n]

    return SystemBundle(
        name="unicycle" if len(obstacles) == 1 else "corridor",
        model=model,
        input_set=input_set,
        barriers=tuple(barriers),
        domain_region=domain_region,
        safe_region=safe_region,
        lipschitz_regions=(shell_region, safe_region),
        flow_map=flow_map,
        local_reach=local_reach,
        nominal=lambda x, scen: unicycle_nominal(x, scen, input_set),
        scenario=scenario,
        in_domain=in_domain,
        reached=reached,
        safe_sampler=safe_sampler,
    )


def corridor_unicycle(gap: float = 0.3, rho: float = 10.0, **kw) -> SystemBundle:
    """Two obstacles leaving a narrow passage on the y-axis."""
    half = rho + gap / 2.0
    return unicycle(obstacles=((-half, 0.0), (half, 0.0)), rho=rho, **kw)


# ---------------------------------------------------------------------------
# spacecraft pointing
# ---------------------------------------------------------------------------


def _sc_w(x, s):
    p, om = x[..., :3], x[..., 3:]
    return np.einsum("...i,...i->...", np.broadcast_to(s, p.shape), _cross3(om, p))


def spacecraft_barrier(s, theta: float, mu: float) -> Barrier:
    s = np.asarray(s, dtype=float)

    def h(x):
        x = np.asarray(x, dtype=float)
        w = _sc_w(x, s)
        return x[..., :3] @ s - np.cos(theta) + mu * w * np.abs(w)

    def grad_h(x):
        x = np.asarray(x, dtype=float)
        p, om = x[..., :3], x[..., 3:]
        w = _sc_w(x, s)[..., None]
        gp = s + 2.0 * mu * np.abs(w) * _cross3(np.broadcast_to(s, om.shape), om)
        go = 2.0 * mu * np.abs(w) * _cross3(p, np.broadcast_to(s, p.shape))
        return np.concatenate([gp, go], axis=-1)

    return Barrier(
        h=h,
        grad_h=grad_h,
        nondiff_set_description=(
            "the rate term carries |s·(ω×p)|: the gradient is continuous but "
            "second derivatives jump on {s·(ω×p) = 0}"
        ),
        name="keep-out-cone",
    )


def omega_box_barriers(model: DynamicsModel, omega_max: float = 0.2) -> tuple:
    """Six one-sided rate barriers ±ω_i <= ω_max.

    hdot = ±u_i depends on the input only, so the curvature term ψ vanishes
    identically and the rows enter the QP with zero margin cost.
    """
    out = []
    for i in range(3):
        for sign in (1.0, -1.0):
            e = np.zeros(6)
            e[3 + i] = sign

            def h(x, e=e):
                x = np.asarray(x, dtype=float)
                return x @ e - omega_max

            def grad_h(x, e=e):
                x = np.asarray(x, dtype=float)
                return np.broadcast_to(e, x.shape).copy()

            def psi(x, u):
                x = np.asarray(x, dtype=float)
                return np.zeros(x.shape[:-1])

            out.append(
                Barrier(
                    h=h,
                    grad_h=grad_h,
                    psi=psi,
                    name=f"omega{'+-'[sign < 0]}{i}",
                )
            )
    return tuple(out)


def spacecraft_nominal(x, scenario: Scenario, input_set: InputSet):
    """PD slew toward the target pointing direction.

    Rotation axis p × target; for the antiparallel singularity the axis
    falls back deterministically to the smallest-index basis vector
    projected orthogonal to p.
    """
    x = np.asarray(x, dtype=float)
    p, om = x[:3], x[3:]
    target = scenario.target
    e = _cross3(p, target)
    if np.linalg.norm(e) < 1e-12 and p @ target < 0.0:
        for i in range(3):
            basis = np.zeros(3)
            basis[i] = 1.0
            cand = basis - (basis @ p) * p
            if np.linalg.norm(cand) > 1e-6:
                e = cand / np.linalg.norm(cand)
                break
    u = scenario.gain_p * e - scenario.gain_d * om
    return input_set.clip(u)


def spacecraft(
    s=(1.0, 0.0, 0.0),
    theta: float = np.pi / 5,
    mu: float = 100.0,
    u_inf: float = 0.01,
    omega_max: float = 0.2,
    omega_lip: float = 0.17,
    start_angle: float = np.deg2rad(70.0),
    duration: float = 240.0,
) -> SystemBundle:
    """Spacecraft pointing bundle.

    ``omega_lip`` is the calibrated rate box for the global dynamics-
    Lipschitz sups: the one-sided gradient of L_f h peaks in a thin layer
    whose reported size in the reference tables corresponds to a slightly
    smaller rate domain than the enforced ||ω||∞ <= 0.2; value-level sups
    (Δ, Lip(h), flow suprema) all use the full box.
    """
    s = np.asarray(s, dtype=float)
    s = s / np.linalg.norm(s)

    def f(x):
        x = np.asarray(x, dtype=float)
        p, om = x[..., :3], x[..., 3:]
        return np.concatenate([_cross3(om, p), np.zeros_like(om)], axis=-1)

    def g(x):
        x = np.asarray(x, dtype=float)
        batch = x.shape[:-1]
        G = np.zeros(batch + (6, 3))
        idx = np.arange(3)
        G[..., 3 + idx, idx] = 1.0
        return G

    # Lip(f) over the rate box: ||Jf|| = sqrt(||p||^2 + ||ω||^2); 5% slack
    # covers the intra-period rate excursion beyond the enforced box.
    l_f = float(np.sqrt(1.0 + 3.0 * (1.05 * omega_max) ** 2))
    model = DynamicsModel(
        dim_state=6, dim_input=3, f=f, g=g, lipschitz_f=l_f, lipschitz_g=0.0
    )
    input_set = InputSet(lo=-u_inf * np.ones(3), hi=u_inf * np.ones(3))

    main = spacecraft_barrier(s, theta, mu)
    main = replace(main, psi=default_psi(model, main))
    barriers = (main,) + omega_box_barriers(model, omega_max)

    def region(omega_bound, safe_only):
        lo = np.concatenate([-np.ones(3), -omega_bound * np.ones(3)])
        hi = np.concatenate([np.ones(3), omega_bound * np.ones(3)])

        def to_states(P):
            p = P[:, :3]
            norm = np.linalg.norm(p, axis=-1, keepdims=True)
            p = p / np.maximum(norm, 1e-9)
            return np.concatenate([p, P[:, 3:]], axis=-1)

        def mask(X):
            ok = np.linalg.norm(X[:, :3], axis=-1) > 1e-6
            if safe_only:
                ok &= np.asarray(main.h(X)) <= 0.0
            return ok

        tag = "S ∩ " if safe_only else ""
        return MappedSpace(
            lo, hi, to_states, mask=mask,
            description=f"{tag}sphere × rate-box(±{omega_bound:g})",
        )

    domain_region = region(omega_max, safe_only=False)
    safe_region = region(omega_max, safe_only=True)
    lip_region = region(omega_lip, safe_only=False)

    def post_step(x):
        x = np.asarray(x, dtype=float)
        p = x[..., :3]
        norm = np.linalg.norm(p, axis=-1, keepdims=True)
        return np.concatenate([p / np.maximum(norm, 1e-12), x[..., 3:]], axis=-1)

    def flow_map(x0_, u, tau):
        from .reach import _rk4_flow

        return _rk4_flow(model, x0_, u, tau, substeps=8, post_step=post_step)

    def local_reach(x, T):
        d0 = delta0_bound(model, input_set, x, T)
        return reach_ball(model, input_set, x, T, delta=d0)

    p0 = np.array([np.cos(start_angle), np.sin(start_angle), 0.0])
    # small out-of-plane component: a target exactly mirrored through the
    # cone axis leaves the filtered slew stuck at a symmetric saddle
    target = np.array([np.cos(start_angle), -np.sin(start_angle), 0.15])
    target /= np.linalg.norm(target)
    # low gains keep the approach rate small enough that the hold-period
    # rows stay feasible with the 0.01-per-axis torque authority
    scenario = Scenario(
        x0=np.concatenate([p0, np.zeros(3)]),
        target=target,
        duration=duration,
        gain_p=0.004,
        gain_d=0.12,
    )

    def in_domain(x):
        if not np.all(np.isfinite(x)):
            return False
        if abs(np.linalg.norm(x[:3]) - 1.0) > 1e-6:
            return False
        return bool(np.max(np.abs(x[3:])) <= omega_max + 0.05)

    def reached(x, scen):
        cosang = float(np.clip(x[:3] @ scen.target, -1.0, 1.0))
        return math.acos(cosang) <= 0.1

    def safe_sampler(rng, n):
        out = np.empty((0, 6))
        while len(out) < n:
            p = rng.normal(size=(4 * n, 3))
            p /= np.linalg.norm(p, axis=-1, keepdims=True)
            om = rng.uniform(-omega_max, omega_max, size=(4 * n, 3))
            X = np.concatenate([p, om], axis=-1)
            X = X[np.asarray(main.h(X)) <= 0.0]
            out = np.concatenate([out, X])
        return out[:n]

    return SystemBundle(
        name="spacecraft",
        model=model,
        input_set=input_set,
        barriers=barriers,
        domain_region=domain_region,
        safe_region=safe_region,
        lipschitz_regions=(lip_region,),
        flow_map=flow_map,
        local_reach=local_reach,
        nominal=lambda x, scen: spacecraft_nominal(x, scen, input_set),
        scenario=scenario,
        in_domain=in_domain,
        reached=reached,
        post_step=post_step,
        safe_sampler=safe_sampler,
    )


# ---------------------------------------------------------------------------
# toy benches
# ---------------------------------------------------------------------------


def _toy_bundle(name, model, input_set, barrier, lo, hi, x0, target) -> SystemBundle:
    barrier = replace(barrier, psi=default_psi(model, barrier))
    region = BoxSpace(lo, hi, description=f"box {name}")

    def safe_mask(X):
        hv = np.asarray(barrier.h(X))
        return np.isfinite(hv) & (hv <= 0.0)

    safe_region = BoxSpace(lo, hi, mask=safe_mask, description=f"S ∩ box {name}")

    def flow_map(x0_, u, tau):
        from .reach import _rk4_flow

        return _rk4_flow(model, x0_, u, tau, substeps=8)

    def local_reach(x, T):
        cfg = SupConfig(budget=128, refine_rounds=2, top_k=4, inflation=1.0)
        return reach_ball(model, input_set, x, T, config=cfg)

    def nominal(x, scen):
        return input_set.clip(scen.target[: input_set.dim] * 0.0 + 1.0)

    scen = Scenario(x0=np.asarray(x0, float), target=np.asarray(target, float), duration=2.0)

    def safe_sampler(rng, n):
        out = np.empty((0, len(lo)))
        while len(out) < n:
            X = rng.uniform(lo, hi, size=(4 * n, len(lo)))
            X = X[safe_mask(X)]
            out = np.concatenate([out, X])
        return out[:n]

    return SystemBundle(
        name=name,
        model=model,
        input_set=input_set,
        barriers=(barrier,),
        domain_region=region,
        safe_region=safe_region,
        lipschitz_regions=(region,),
        flow_map=flow_map,
        local_reach=local_reach,
        nominal=nominal,
        scenario=scen,
        in_domain=lambda x: bool(np.all(np.isfinite(x))),
        reached=lambda x, s: False,
        safe_sampler=safe_sampler,
    )


def integrator_1d(u_lo=-1.0, u_hi=1.0, box=4.0) -> SystemBundle:
    model = DynamicsModel(
        dim_state=1,
        dim_input=1,
        f=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        g=lambda x: np.ones(np.asarray(x).shape[:-1] + (1, 1)),
        lipschitz_f=0.0,
        lipschitz_g=0.0,
    )
    barrier = Barrier(
        h=lambda x: np.asarray(x, dtype=float)[..., 0],
        grad_h=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        name="x<=0",
    )
    return _toy_bundle(
        "integrator1d",
        model,
        InputSet(np.array([u_lo]), np.array([u_hi])),
        barrier,
        np.array([-box]),
        np.array([box]),
        x0=np.array([-1.0]),
        target=np.array([0.0]),
    )


def double_integrator(u_max=1.0, box=2.0) -> SystemBundle:
    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        out[..., 0] = x[..., 1]
        return out

    def g(x):
        x = np.asarray(x, dtype=float)
        G = np.zeros(x.shape[:-1] + (2, 1))
        G[..., 1, 0] = 1.0
        return G

    model = DynamicsModel(dim_state=2, dim_input=1, f=f, g=g,
                          lipschitz_f=1.0, lipschitz_g=0.0)
    barrier = Barrier(
        h=lambda x: np.asarray(x, dtype=float)[..., 0],
        grad_h=lambda x: np.stack(
            [np.ones(np.asarray(x).shape[:-1]), np.zeros(np.asarray(x).shape[:-1])],
            axis=-1,
        ),
        name="x1<=0",
    )
    return _toy_bundle(
        "double-integrator",
        model,
        InputSet(np.array([-u_max]), np.array([u_max])),
        barrier,
        np.array([-box, -box]),
        np.array([box, box]),
        x0=np.array([-1.0, 0.0]),
        target=np.array([0.0, 0.0]),
    )


def static_system(box=2.0) -> SystemBundle:
    model = DynamicsModel(
        dim_state=1,
        dim_input=1,
        f=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        g=lambda x: np.zeros(np.asarray(x).shape[:-1] + (1, 1)),
        lipschitz_f=0.0,
        lipschitz_g=0.0,
    )
    barrier = Barrier(
        h=lambda x: np.asarray(x, dtype=float)[..., 0],
        grad_h=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        name="x<=0",
    )
    return _toy_bundle(
        "static",
        model,
        InputSet(np.array([-1.0]), np.array([1.0])),
        barrier,
        np.array([-box]),
        np.array([box]),
        x0=np.array([-1.0]),
        target=np.array([0.0]),
    )


SYSTEMS = {
    "unicycle": unicycle,
    "corridor": corridor_unicycle,
    "spacecraft": spacecraft,
    "integrator1d": integrator_1d,
    "double-integrator": double_integrator,
    "static": static_system,
}


def make_system(name: str, **overrides) -> SystemBundle:
    if name not in SYSTEMS:
        raise KeyError(f"unknown system {name!r}; choose from {sorted(SYSTEMS)}")
    return SYSTEMS[name](**overrides)
