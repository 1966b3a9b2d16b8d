"""The seven hold-period margin conditions and their physical margins.

Variants 0-2 keep the continuous-time barrier inequality satisfied between
samples and have the shape  phi(T, x) = alpha(-h(x)) - nu(T, x); variant 3
descends from a discrete-time barrier condition and reads
phi3(T, x) = -(gamma/T) h(x) - (T/2) eta(T, x).

Global variants precompute constants over the safe set intersected with the
working domain; local variants maximize over the one-step reach bound of the
query state. Every supremum comes from the shared sampling engine and is
reported with provenance (budget, seed, inflation) because the table values
are estimation-dependent.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Barrier, ClassK, DynamicsModel, LinearClassK
from .engine import SupConfig, maximize
from .reach import ReachBound, delta_sup, lipschitz_estimate
from .systems import SystemBundle

__all__ = [
    "VARIANTS",
    "GlobalConstants",
    "compute_global_constants",
    "clear_cache",
    "upsilon",
    "eta",
    "LocalMargins",
    "local_margins",
    "phi0_global",
    "phi1_global",
    "phi1_local",
    "phi2_local",
    "phi2_global",
    "phi3_local",
    "phi3_global",
    "MarginFunction",
    "make_margin",
    "PhysicalMargin",
    "physical_margin",
    "physical_margin_inf",
    "margins_table",
    "physical_table",
    "provenance_report",
]

VARIANTS = ("phi0g", "phi1l", "phi1g", "phi2l", "phi2g", "phi3l", "phi3g")
GLOBAL_VARIANTS = ("phi0g", "phi1g", "phi2g", "phi3g")


def _nu0_formula(l1: float, l2: float, delta: float, T: float) -> float:
    # (l1 Δ / l2)(e^{l2 T} - 1); the l2 -> 0 limit is l1 Δ T
    if l2 < 1e-12:
        return l1 * delta * T
    return l1 * delta / l2 * np.expm1(l2 * T)


# ---------------------------------------------------------------------------
# global constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GlobalConstants:
    system: str
    T: float
    alpha_name: str
    delta: float
    l_h: float
    l_alpha_h: float
    l_Lfh: float
    l_Lgh: float
    u_max: float
    nu2g: float
    sup_eta: float
    sup_dh: float
    provenance: dict = field(repr=False, default_factory=dict)

    @property
    def l2(self) -> float:
        return self.l_Lfh + self.l_Lgh * self.u_max

    @property
    def l1(self) -> float:
        return self.l2 + self.l_alpha_h

    @property
    def nu0g(self) -> float:
        return _nu0_formula(self.l1, self.l2, self.delta, self.T)

    @property
    def nu1g(self) -> float:
        return self.l1 * self.T * self.delta

    @property
    def nu3g(self) -> float:
        return 0.5 * self.T * self.sup_eta

    def nu(self, variant: str) -> float:
        return {
            "phi0g": self.nu0g,
            "phi1g": self.nu1g,
            "phi2g": self.nu2g,
            "phi3g": self.nu3g,
        }[variant]


_CACHE: dict = {}


def clear_cache() -> None:
    _CACHE.clear()


def _alpha_key(alpha: ClassK) -> str:
    return alpha.name


def _Lfh_fn(model: DynamicsModel, barrier: Barrier):
    def fn(X):
        grad = np.asarray(barrier.grad_h(X))
        return np.einsum("...n,...n->...", grad, np.asarray(model.f(X)))

    return fn


def _Lgh_fn(model: DynamicsModel, barrier: Barrier):
    def fn(X):
        grad = np.asarray(barrier.grad_h(X))
        return np.einsum("...n,...nm->...m", grad, np.asarray(model.g(X)))

    return fn


def _alpha_h_fn(barrier: Barrier, alpha: ClassK):
    def fn(X):
        return np.asarray(alpha(-np.asarray(barrier.h(X))))

    return fn


def _pair_objective(bundle: SystemBundle, T: float, value_fn, eval_input: bool = False):
    """Joint sampler over (y in S∩D, constant-input flow point z of y).

    ``value_fn(Y, Z, U_eval)`` consumes matched batches. The parameter block
    is [safe-region params | generating input | tau] plus an evaluation
    input when the functional is not reducible to input-box corners.
    """
    safe = bundle.safe_region
    iset = bundle.input_set
    m = iset.dim
    dsafe = safe.dim
    lo = np.concatenate([safe.lo, iset.lo, [0.0]] + ([iset.lo] if eval_input else []))
    hi = np.concatenate([safe.hi, iset.hi, [T]] + ([iset.hi] if eval_input else []))

    def objective(P):
        Y, ok = safe.states_and_valid(P[:, :dsafe])
        ug = P[:, dsafe : dsafe + m]
        tau = P[:, dsafe + m]
        ue = P[:, dsafe + m + 1 :] if eval_input else None
        Z = bundle.flow_map(Y, ug, tau)
        v = np.asarray(value_fn(Y, Z, ue), dtype=float)
        return np.where(ok, v, np.nan)

    return objective, lo, hi


def upsilon(
    model: DynamicsModel,
    barrier: Barrier,
    alpha: ClassK,
    x: np.ndarray,
    z: np.ndarray,
    u: np.ndarray,
):
    """Difference of the continuous-time barrier condition between two
    states under a common input:
    L_f h(z) - L_f h(x) + (L_g h(z) - L_g h(x))·u - alpha(-h(z)) + alpha(-h(x)).
    """
    Lf = _Lfh_fn(model, barrier)
    Lg = _Lgh_fn(model, barrier)
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    val = (
        Lf(z)
        - Lf(x)
        + np.einsum("...m,...m->...", Lg(z) - Lg(x), np.broadcast_to(u, z.shape[:-1] + (u.shape[-1],)))
        - np.asarray(alpha(-np.asarray(barrier.h(z))))
        + np.asarray(alpha(-np.asarray(barrier.h(x))))
    )
    if val.ndim == 0:
        v = float(val)
        if not np.isfinite(v):
            raise ValueError("upsilon evaluated at a nondifferentiable point")
        return v
    return val


def compute_global_constants(
    bundle: SystemBundle,
    T: float,
    alpha: ClassK = None,
    config: SupConfig = SupConfig(),
) -> GlobalConstants:
    """All constants behind the four global margins, cached per
    (system, T, alpha, engine config)."""
    alpha = alpha or LinearClassK(1.0)
    key = (
        bundle.name,
        round(T, 12),
        _alpha_key(alpha),
        config,
        bundle.domain_region.description,
        tuple(r.description for r in bundle.lipschitz_regions),
    )
    if key in _CACHE:
        return _CACHE[key]

    t0 = time.perf_counter()
    model, barrier, iset = bundle.model, bundle.barrier, bundle.input_set
    prov: dict = {
        "budget": config.budget,
        "refine_rounds": config.refine_rounds,
        "inflation": config.inflation,
        "seed": config.seed,
        "domain": bundle.domain_region.description,
        "lipschitz_domains": [r.description for r in bundle.lipschitz_regions],
    }

    delta = delta_sup(model, iset, bundle.domain_region, config)
    prov["delta_raw"] = delta.raw_value

    guard = barrier.nondiff_guard
    l_h = lipschitz_estimate(barrier.h, bundle.safe_region, config, guard=guard)
    prov["l_h_raw"] = l_h.raw_value

    if alpha.local_slope_bound is not None and alpha.name.startswith("linear"):
        l_alpha_h = alpha.local_slope_bound * l_h.value
    elif alpha.lipschitz_of_alpha_comp_h is not None:
        l_alpha_h = float(
            alpha.lipschitz_of_alpha_comp_h(barrier, bundle.safe_region, config)
        )
    else:
        l_alpha_h = lipschitz_estimate(
            _alpha_h_fn(barrier, alpha), bundle.safe_region, config, guard=guard
        ).value

    Lf_fn, Lg_fn = _Lfh_fn(model, barrier), _Lgh_fn(model, barrier)
    l_Lfh = max(
        lipschitz_estimate(Lf_fn, region, config, guard=guard).value
        for region in bundle.lipschitz_regions
    )
    l_Lgh = max(
        lipschitz_estimate(Lg_fn, region, config, guard=guard).value
        for region in bundle.lipschitz_regions
    )

    # sup of upsilon over S x reach x U; exact corner reduction in the
    # evaluation input (upsilon is affine in u)
    corners = iset.corners()
    alpha_mh = _alpha_h_fn(barrier, alpha)

    def ups_corners(Y, Z, _):
        dLf = Lf_fn(Z) - Lf_fn(Y)
        dLg = Lg_fn(Z) - Lg_fn(Y)
        da = alpha_mh(Y) - alpha_mh(Z)
        return dLf + np.max(dLg @ corners.T, axis=-1) + da

    obj, lo, hi = _pair_objective(bundle, T, ups_corners)
    nu2g = maximize(obj, lo, hi, config)
    prov["nu2g_raw"] = nu2g.raw_value

    def dh_val(Y, Z, _):
        return np.asarray(barrier.h(Z)) - np.asarray(barrier.h(Y))

    obj, lo, hi = _pair_objective(bundle, T, dh_val)
    sup_dh = maximize(obj, lo, hi, config)
    prov["sup_dh_raw"] = sup_dh.raw_value

    def psi_val(Y, Z, U):
        return np.asarray(barrier.psi(Z, U))

    obj, lo, hi = _pair_objective(bundle, T, psi_val, eval_input=True)
    sup_psi = maximize(obj, lo, hi, config)
    prov["sup_psi_raw"] = sup_psi.raw_value

    prov["wall_time"] = time.perf_counter() - t0
    consts = GlobalConstants(
        system=bundle.name,
        T=T,
        alpha_name=alpha.name,
        delta=delta.value,
        l_h=l_h.value,
        l_alpha_h=l_alpha_h,
        l_Lfh=l_Lfh,
        l_Lgh=l_Lgh,
        u_max=iset.u_max,
        nu2g=nu2g.value,
        sup_eta=max(sup_psi.value, 0.0),
        sup_dh=sup_dh.value,
        provenance=prov,
    )
    _CACHE[key] = consts
    return consts


# ---------------------------------------------------------------------------
# local margins (shared-sample evaluation)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalMargins:
    x: np.ndarray
    T: float
    delta_x: float
    l_Lfh_x: float
    l_Lgh_x: float
    l_alpha_h_x: float
    u_max: float
    eta_x: float
    nu1l: float
    nu2l: float
    nu3l: float

    @property
    def l1_x(self) -> float:
        return self.l_Lfh_x + self.l_Lgh_x * self.u_max + self.l_alpha_h_x


def _state_seed(config: SupConfig, x: np.ndarray, T: float) -> int:
    raw = np.asarray(x, dtype=float).tobytes() + np.float64(T).tobytes()
    return (config.seed + zlib.crc32(raw)) % (2**31 - 1)


def local_margins(
    bundle: SystemBundle,
    x: np.ndarray,
    T: float,
    alpha: ClassK = None,
    config: SupConfig = SupConfig(budget=256, refine_rounds=0, top_k=8),
    reach: Optional[ReachBound] = None,
    need: tuple = ("nu1", "nu2", "nu3"),
) -> LocalMargins:
    """Local margins from one shared sample pass over the reach bound of x.

    Sharing is structural, not cosmetic: the Lipschitz estimates fold in the
    difference quotients of the very samples that drive the upsilon and
    curvature suprema, and the speed bound dominates the sampled flows, so
    nu2l <= nu1l and nu3l <= nu1l/2 hold by construction on the shared set.
    ``need`` limits the work when a caller evaluates a single variant.
    """
    alpha = alpha or LinearClassK(1.0)
    x = np.asarray(x, dtype=float)
    model, barrier, iset = bundle.model, bundle.barrier, bundle.input_set
    reach = reach or bundle.local_reach(x, T)
    space = reach.space

    rng = np.random.default_rng(_state_seed(config, x, T))
    P = rng.uniform(space.lo, space.hi, size=(config.budget, space.dim))
    Z, ok = space.states_and_valid(P)
    Z = Z[ok]
    if Z.shape[0] == 0:
        raise ValueError("local reach sampling produced no valid states")
    Z = np.concatenate([x[None], Z], axis=0)

    corners = iset.corners()
    Lf_fn, Lg_fn = _Lfh_fn(model, barrier), _Lgh_fn(model, barrier)
    guard = barrier.nondiff_guard

    # speed bound over the reach: ball bounds carry their generating
    # constant (which dominates every speed inside the ball by construction),
    # flow covers take the exact corner maximum over the sampled states
    if reach.kind == "ball" and reach.delta_used is not None:
        delta_x = float(reach.delta_used)
    else:
        fx = np.asarray(model.f(Z))
        gx = np.asarray(model.g(Z))
        v = fx[:, None, :] + np.einsum("xnm,cm->xcn", gx, corners)
        delta_x = float(np.nanmax(np.linalg.norm(v, axis=-1)))

    def masked(vals):
        return vals[np.isfinite(vals)]

    def lip_scalar(fn):
        g = _fd_grad_states(fn, Z, guard)
        gn = np.linalg.norm(g, axis=-1)
        dq = _diff_quotients(fn, Z, x)
        return float(np.nanmax(np.concatenate([masked(gn), masked(dq)])))

    def lip_vector(fn):
        J = _fd_jac_states(fn, Z, guard)
        finite = np.all(np.isfinite(J.reshape(J.shape[0], -1)), axis=1)
        gn = np.full(J.shape[0], np.nan)
        if np.any(finite):
            gn[finite] = np.linalg.norm(J[finite], ord=2, axis=(-2, -1))
        dq = _diff_quotients(fn, Z, x, vector=True)
        return float(np.nanmax(np.concatenate([masked(gn), masked(dq)])))

    l_Lfh_x = l_Lgh_x = l_alpha_h_x = nu1l = float("nan")
    if "nu1" in need:
        l_Lfh_x = lip_scalar(Lf_fn)
        l_Lgh_x = lip_vector(Lg_fn)
        if alpha.local_slope_bound is not None and alpha.name.startswith("linear"):
            l_alpha_h_x = alpha.local_slope_bound * lip_scalar(barrier.h)
        else:
            l_alpha_h_x = lip_scalar(_alpha_h_fn(barrier, alpha))
        l1_x = l_Lfh_x + l_Lgh_x * iset.u_max + l_alpha_h_x
        nu1l = l1_x * T * delta_x * config.inflation

    nu2l = float("nan")
    if "nu2" in need:
        alpha_mh = _alpha_h_fn(barrier, alpha)
        dLf = Lf_fn(Z) - Lf_fn(x[None])
        dLg = Lg_fn(Z) - Lg_fn(x[None])
        da = alpha_mh(np.broadcast_to(x, Z.shape)) - alpha_mh(Z)
        ups = dLf + np.max(dLg @ corners.T, axis=-1) + da
        nu2l = float(np.nanmax(ups))
        nu2l = nu2l * config.inflation if nu2l > 0 else nu2l / config.inflation

    eta_x = nu3l = float("nan")
    if "nu3" in need:
        u_eval = np.concatenate([corners, iset.sample(rng, 4)], axis=0)
        K = u_eval.shape[0]
        Zrep = np.repeat(Z, K, axis=0)
        Urep = np.tile(u_eval, (Z.shape[0], 1))
        psi_vals = np.asarray(barrier.psi(Zrep, Urep))
        eta_x = max(float(np.nanmax(psi_vals)), 0.0) * config.inflation
        nu3l = 0.5 * T * eta_x

    return LocalMargins(
        x=x,
        T=T,
        delta_x=delta_x,
        l_Lfh_x=l_Lfh_x,
        l_Lgh_x=l_Lgh_x,
        l_alpha_h_x=l_alpha_h_x,
        u_max=iset.u_max,
        eta_x=eta_x,
        nu1l=nu1l,
        nu2l=nu2l,
        nu3l=nu3l,
    )


def _fd_grad_states(fn, Z, guard, step=1e-6):
    n = Z.shape[-1]
    cols = []
    for i in range(n):
        h = step * (1.0 + np.abs(Z[..., i]))
        zp, zm = Z.copy(), Z.copy()
        zp[..., i] += h
        zm[..., i] -= h
        cols.append((np.asarray(fn(zp)) - np.asarray(fn(zm))) / (2 * h))
    g = np.stack(cols, axis=-1)
    if guard is not None:
        scale = step * (1.0 + np.linalg.norm(Z, axis=-1))
        g = np.where(guard(Z, 2 * scale)[..., None], np.nan, g)
    return g


def _fd_jac_states(fn, Z, guard, step=1e-6):
    n = Z.shape[-1]
    cols = []
    for i in range(n):
        h = step * (1.0 + np.abs(Z[..., i]))
        zp, zm = Z.copy(), Z.copy()
        zp[..., i] += h
        zm[..., i] -= h
        cols.append((np.asarray(fn(zp)) - np.asarray(fn(zm))) / (2 * h)[:, None])
    J = np.stack(cols, axis=-1)
    if guard is not None:
        scale = step * (1.0 + np.linalg.norm(Z, axis=-1))
        J = np.where(guard(Z, 2 * scale)[..., None, None], np.nan, J)
    return J


def _diff_quotients(fn, Z, center, vector=False):
    d = np.linalg.norm(Z - center, axis=-1)
    diff = np.asarray(fn(Z)) - np.asarray(fn(np.asarray(center)[None]))[0]
    mag = np.linalg.norm(diff, axis=-1) if vector else np.abs(diff)
    out = mag / np.maximum(d, 1e-12)
    return np.where(d > 1e-9, out, 0.0)


def eta(
    bundle: SystemBundle,
    x: np.ndarray,
    T: float,
    config: SupConfig = SupConfig(budget=256, refine_rounds=0, top_k=8),
    reach: Optional[ReachBound] = None,
) -> float:
    """Nonnegative curvature bound over the reach of x: max{sup psi, 0}."""
    lm = local_margins(bundle, x, T, config=config, reach=reach, need=("nu3",))
    return lm.eta_x


# ---------------------------------------------------------------------------
# the seven margin functions
# ---------------------------------------------------------------------------


def phi0_global(T, x, barrier: Barrier, alpha: ClassK, l1, l2, delta):
    if min(l1, l2, delta) < 0:
        raise ValueError("global constants must be nonnegative")
    return np.asarray(alpha(-np.asarray(barrier.h(x)))) - _nu0_formula(l1, l2, delta, T)


def phi1_global(T, x, barrier: Barrier, alpha: ClassK, l1, delta):
    return np.asarray(alpha(-np.asarray(barrier.h(x)))) - l1 * T * delta


def phi1_local(T, x, bundle: SystemBundle, alpha: ClassK, config=None, reach=None):
    lm = local_margins(bundle, x, T, alpha, config or SupConfig(budget=256, refine_rounds=0),
                       reach, need=("nu1",))
    return float(alpha(-float(bundle.barrier.h(np.asarray(x)[None])[0]))) - lm.nu1l


def phi2_local(T, x, bundle: SystemBundle, alpha: ClassK, config=None, reach=None):
    lm = local_margins(bundle, x, T, alpha, config or SupConfig(budget=256, refine_rounds=0),
                       reach, need=("nu2",))
    return float(alpha(-float(bundle.barrier.h(np.asarray(x)[None])[0]))) - lm.nu2l


def phi2_global(T, x, barrier: Barrier, alpha: ClassK, nu2g):
    return np.asarray(alpha(-np.asarray(barrier.h(x)))) - nu2g


def phi3_local(T, x, bundle: SystemBundle, gamma: float, config=None, reach=None):
    if not (0.0 < gamma <= 1.0):
        raise ValueError("gamma must lie in (0, 1]")
    eta_x = eta(bundle, x, T, config or SupConfig(budget=256, refine_rounds=0), reach)
    hx = float(bundle.barrier.h(np.asarray(x)[None])[0])
    return -(gamma / T) * hx - 0.5 * T * eta_x


def phi3_global(T, x, barrier: Barrier, gamma: float, sup_eta):
    if not (0.0 < gamma <= 1.0):
        raise ValueError("gamma must lie in (0, 1]")
    hx = np.asarray(barrier.h(x))
    return -(gamma / T) * hx - 0.5 * T * sup_eta


@dataclass
class MarginFunction:
    """One margin condition bound to a system; evaluates phi(T, x) and the
    controller margin nu(T, x)."""

    bundle: SystemBundle
    variant: str
    alpha: ClassK = None
    gamma: float = 1.0
    config: SupConfig = SupConfig()
    local_config: SupConfig = SupConfig(budget=256, refine_rounds=0, top_k=8)
    barrier: Barrier = None  # defaults to the bundle's main barrier

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must lie in (0, 1]")
        self.alpha = self.alpha or LinearClassK(1.0)
        self.barrier = self.barrier or self.bundle.barrier

    @property
    def is_local(self) -> bool:
        return self.variant.endswith("l")

    def cached_global_constants(self, T: float) -> Optional[GlobalConstants]:
        if self.is_local:
            return None
        return compute_global_constants(self.bundle, T, self.alpha, self.config)

    def nu(self, T: float, x) -> float:
        hx = float(self.barrier.h(np.asarray(x)[None])[0])
        if self.variant.startswith("phi3"):
            return -(self.gamma / T) * hx - self.phi(T, x)
        return float(self.alpha(-hx)) - self.phi(T, x)

    def phi(self, T: float, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.variant == "phi0g":
            c = self.cached_global_constants(T)
            return float(phi0_global(T, x[None], self.barrier, self.alpha, c.l1, c.l2, c.delta)[0])
        if self.variant == "phi1g":
            c = self.cached_global_constants(T)
            return float(phi1_global(T, x[None], self.barrier, self.alpha, c.l1, c.delta)[0])
        if self.variant == "phi2g":
            c = self.cached_global_constants(T)
            return float(phi2_global(T, x[None], self.barrier, self.alpha, c.nu2g)[0])
        if self.variant == "phi3g":
            c = self.cached_global_constants(T)
            return float(phi3_global(T, x[None], self.barrier, self.gamma, c.sup_eta)[0])
        if self.variant == "phi1l":
            return phi1_local(T, x, self.bundle, self.alpha, self.local_config)
        if self.variant == "phi2l":
            return phi2_local(T, x, self.bundle, self.alpha, self.local_config)
        return phi3_local(T, x, self.bundle, self.gamma, self.local_config)


def make_margin(bundle: SystemBundle, variant: str, alpha=None, gamma=1.0,
                config: SupConfig = SupConfig(),
                local_config: SupConfig = None) -> MarginFunction:
    return MarginFunction(
        bundle=bundle,
        variant=variant,
        alpha=alpha,
        gamma=gamma,
        config=config,
        local_config=local_config or SupConfig(budget=256, refine_rounds=0, top_k=8,
                                               inflation=config.inflation,
                                               seed=config.seed),
    )


# ---------------------------------------------------------------------------
# physical margins
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhysicalMargin:
    value: float
    variant: str
    T: float
    alpha_or_gamma: str
    empty_manifold: bool = False


def physical_margin(
    bundle: SystemBundle,
    variant: str,
    T: float,
    alpha: ClassK = None,
    gamma: float = 1.0,
    config: SupConfig = SupConfig(),
    n_rays: int = 256,
    ray_seed: int = 7,
) -> PhysicalMargin:
    """Worst-case depth in the safe set at which the hold-period condition
    pins hdot to zero: sup{-h(x) : phi(T, x) = 0}.

    Global variants have closed forms through alpha^{-1}; local variants
    root-find phi = 0 along random rays from the deepest sampled safe state.
    """
    alpha = alpha or LinearClassK(1.0)
    tag = f"gamma={gamma:g}" if variant.startswith("phi3") else alpha.name
    if variant in GLOBAL_VARIANTS:
        c = compute_global_constants(bundle, T, alpha, config)
        if variant == "phi3g":
            val = (T / gamma) * c.nu3g
        else:
            val = alpha.inverse(c.nu(variant))
        return PhysicalMargin(float(val), variant, T, tag)

    margin = make_margin(bundle, variant, alpha=alpha, gamma=gamma, config=config)
    rng = np.random.default_rng(ray_seed)
    anchors = bundle.safe_sampler(rng, 256)
    hvals = np.asarray(bundle.barrier.h(anchors))
    anchor = anchors[int(np.argmin(hvals))]

    lo, hi = bundle.safe_region.lo, bundle.safe_region.hi
    best = None
    for _ in range(n_rays):
        direction = rng.normal(size=anchor.shape[0])
        direction /= np.linalg.norm(direction)
        # span the ray until it exits the domain box
        with np.errstate(divide="ignore"):
            t_exit = np.min(
                np.where(
                    direction > 0,
                    (hi - anchor) / np.where(direction == 0, np.inf, direction),
                    (lo - anchor) / np.where(direction == 0, -np.inf, direction),
                )
            )
        t_exit = float(min(t_exit, 1e6))

        def phi_at(t):
            return margin.phi(T, anchor + t * direction)

        a, fa = 0.0, phi_at(0.0)
        if fa <= 0:
            continue
        b = None
        for t in np.linspace(0.05 * t_exit, t_exit, 12):
            ft = phi_at(t)
            if not np.isfinite(ft) or ft <= 0.0:
                b = t
                break
        if b is None:
            continue
        for _ in range(60):
            midt = 0.5 * (a + b)
            fm = phi_at(midt)
            if np.isfinite(fm) and fm > 0:
                a = midt
            else:
                b = midt
            if b - a < 1e-8 * (1 + abs(b)):
                break
        root = anchor + 0.5 * (a + b) * direction
        depth = -float(bundle.barrier.h(root[None])[0])
        if np.isfinite(depth) and (best is None or depth > best):
            best = depth
    if best is None:
        return PhysicalMargin(0.0, variant, T, tag, empty_manifold=True)
    return PhysicalMargin(best, variant, T, tag)


def physical_margin_inf(
    bundle: SystemBundle,
    variant: str,
    T: float,
    config: SupConfig = SupConfig(),
    gamma_grid: bool = False,
) -> float:
    """Infimum of the physical margin over linear alpha(λ) = Γλ, Γ >= 1
    (variants 0-2), or over gamma in (0, 1] (variant 3, attained at 1).

    For the linear family the Γ -> ∞ limits are closed forms:
    variant 0: Lip(h)·Δ·(e^{l2 T} − 1)/l2, variant 1: Lip(h)·T·Δ,
    variant 2: the largest one-period increase of h. The Γ-grid evaluation
    exists as a cross-check; a non-monotone grid (impossible for the linear
    family, a symptom of sup noise otherwise) falls back to the grid min.
    """
    c = compute_global_constants(bundle, T, LinearClassK(1.0), config)
    if variant in ("phi3g", "phi3l"):
        return (T**2 / 2.0) * c.sup_eta
    if variant in ("phi2g", "phi2l"):
        return c.sup_dh
    if variant in ("phi1g", "phi1l"):
        limit = c.l_h * T * c.delta
        grid_fn = lambda G: (c.l2 + G * c.l_h) * T * c.delta / G
    else:
        if c.l2 < 1e-12:
            limit = c.l_h * c.delta * T
            grid_fn = lambda G: (c.l2 + G * c.l_h) * c.delta * T / G
        else:
            limit = c.l_h * c.delta * np.expm1(c.l2 * T) / c.l2
            grid_fn = lambda G: (
                (c.l2 + G * c.l_h) * c.delta / c.l2 * np.expm1(c.l2 * T) / G
            )
    if gamma_grid:
        Gs = np.logspace(0, 6, 25)
        vals = np.array([grid_fn(G) for G in Gs])
        if np.any(np.diff(vals) > 1e-12 * np.abs(vals[:-1])):
            return float(np.min(vals))
        return float(min(np.min(vals), limit))
    return float(limit)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


def margins_table(bundle: SystemBundle, T: float, config: SupConfig = SupConfig(),
                  alpha: ClassK = None, gamma: float = 1.0) -> list[dict]:
    alpha = alpha or LinearClassK(1.0)
    c = compute_global_constants(bundle, T, alpha, config)
    rows = []
    for variant in GLOBAL_VARIANTS:
        rows.append(
            {
                "variant": f"nu{variant[3]}g",
                "nu": c.nu(variant),
                "samples": config.budget,
                "inflation": config.inflation,
                "seed": config.seed,
            }
        )
    return rows


def physical_table(bundle: SystemBundle, Ts, config: SupConfig = SupConfig()) -> list[dict]:
    rows = []
    for variant in GLOBAL_VARIANTS:
        for T in Ts:
            rows.append(
                {
                    "variant": f"delta{variant[3]}g_inf",
                    "T": T,
                    "delta_inf": physical_margin_inf(bundle, variant, T, config),
                }
            )
    return rows


def provenance_report(bundle: SystemBundle, T: float,
                      config: SupConfig = SupConfig(), alpha: ClassK = None) -> str:
    c = compute_global_constants(bundle, T, alpha, config)
    lines = [
        f"system={c.system} T={c.T:g} alpha={c.alpha_name}",
        f"delta={c.delta:.6g} l_h={c.l_h:.6g} l_alpha_h={c.l_alpha_h:.6g}",
        f"l_Lfh={c.l_Lfh:.6g} l_Lgh={c.l_Lgh:.6g} u_max={c.u_max:.6g}",
        f"l1={c.l1:.6g} l2={c.l2:.6g}",
        f"nu0g={c.nu0g:.6g} nu1g={c.nu1g:.6g} nu2g={c.nu2g:.6g} nu3g={c.nu3g:.6g}",
        f"sup_eta={c.sup_eta:.6g} sup_dh={c.sup_dh:.6g}",
    ]
    for k, v in sorted(c.provenance.items()):
        lines.append(f"  {k}: {v}")
    return "\n".join(lines)
