"""Headless property suite: every acceptance-grade check as a named,
independently runnable function returning (passed, detail).

The CLI `verify` subcommand runs the whole battery and exits nonzero on any
failure; the test suite calls the same functions so there is exactly one
implementation of each check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .core import LinearClassK
from .engine import SupConfig
from .margins import (
    GLOBAL_VARIANTS,
    compute_global_constants,
    local_margins,
    make_margin,
    physical_margin_inf,
)
from .qp import QPProblem, kkt_residual, solve_filter
from .reach import delta_sup, BoxSpace
from .sim import SimConfig, SimTrace, max_h_over_trace, run, task_completed
from .systems import SystemBundle, make_system

__all__ = ["CheckResult", "run_all", "CHECKS", "TABLE_CONFIG"]

# frozen engine configuration behind the published tables; the margin
# constants are estimation-dependent, so reproduction pins these knobs
TABLE_CONFIG = SupConfig(budget=8192, refine_rounds=8, top_k=16, inflation=1.05, seed=0)
LOCAL_CONFIG = SupConfig(budget=192, refine_rounds=0, top_k=8, inflation=1.05, seed=0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    wall: float = 0.0
    expected_failure: bool = False

    @property
    def label(self) -> str:
        if self.passed:
            return "PASS"
        return "XFAIL" if self.expected_failure else "FAIL"


def _rel_ok(value, target, tol=0.25):
    return abs(value - target) <= tol * abs(target)


# ---------------------------------------------------------------------------
# margin orderings (shared-sample construction)
# ---------------------------------------------------------------------------


def check_ordering(n_states: int = 60, seed: int = 11, T: float = 0.1) -> CheckResult:
    """nu2l <= nu1l pointwise, and the globals rebuilt from the same sample
    set dominate the locals: nu1l <= nu1g_shared < nu0g_shared, plus
    nu2g_shared <= nu1g_shared."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    msgs = []
    ok = True
    for name in ("unicycle", "spacecraft"):
        b = make_system(name)
        X = b.safe_sampler(rng, n_states)
        nu1s, nu2s, l1s, las, deltas = [], [], [], [], []
        for x in X:
            lm = local_margins(b, x, T, config=LOCAL_CONFIG)
            if lm.nu2l > lm.nu1l + 1e-9:
                ok = False
                msgs.append(f"{name}: nu2l {lm.nu2l:.3g} > nu1l {lm.nu1l:.3g} at {x}")
            nu1s.append(lm.nu1l)
            nu2s.append(lm.nu2l)
            l1s.append(lm.l1_x)
            las.append(lm.l_alpha_h_x)
            deltas.append(lm.delta_x)
        # global margins assembled from the identical sample set
        l1_g = max(l1s)
        delta_g = max(deltas)
        nu1_g = l1_g * T * delta_g * LOCAL_CONFIG.inflation
        l2_g = l1_g - min(las)
        nu0_g = (l1_g * delta_g / l2_g) * np.expm1(l2_g * T) * LOCAL_CONFIG.inflation \
            if l2_g > 1e-12 else nu1_g
        nu2_g = max(nu2s)
        if not (max(nu1s) <= nu1_g + 1e-9):
            ok = False
            msgs.append(f"{name}: max nu1l {max(nu1s):.3g} > shared nu1g {nu1_g:.3g}")
        if not (nu1_g < nu0_g):
            ok = False
            msgs.append(f"{name}: nu1g {nu1_g:.3g} >= nu0g {nu0_g:.3g}")
        if not (nu2_g <= nu1_g + 1e-9):
            ok = False
            msgs.append(f"{name}: nu2g {nu2_g:.3g} > nu1g {nu1_g:.3g}")
        msgs.append(
            f"{name}: nu2l<=nu1l at {n_states} states; shared nu1g={nu1_g:.3g} nu0g={nu0_g:.3g}"
        )
    return CheckResult("ordering", ok, "; ".join(msgs), time.perf_counter() - t0)


def check_theorem4(n_states: int = 500, seed: int = 12,
                   Ts=(0.001, 0.01, 0.1)) -> CheckResult:
    """nu3l <= nu1l/2 + 1e-9 at sampled states for each T, and the global
    counterpart from the published constants."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    ok = True
    msgs = []
    for name in ("unicycle", "spacecraft"):
        b = make_system(name)
        X = b.safe_sampler(rng, n_states)
        worst = -np.inf
        for T in Ts:
            for x in X:
                lm = local_margins(b, x, T, config=LOCAL_CONFIG, need=("nu1", "nu3"))
                gap = lm.nu3l - 0.5 * lm.nu1l
                worst = max(worst, gap)
                if gap > 1e-9:
                    ok = False
                    msgs.append(f"{name}: nu3l-nu1l/2 = {gap:.3g} at T={T} x={x}")
                    break
        for T in Ts:
            c = compute_global_constants(b, T, config=TABLE_CONFIG)
            if c.nu3g > 0.5 * c.nu1g + 1e-9:
                ok = False
                msgs.append(f"{name}: global nu3g {c.nu3g:.3g} > nu1g/2 {0.5*c.nu1g:.3g} at T={T}")
        msgs.append(f"{name}: worst local gap {worst:.3g}")
    return CheckResult("theorem4-half", ok, "; ".join(msgs), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# reachability oracle
# ---------------------------------------------------------------------------


def check_displacement_bound(n_pairs: int = 200, seed: int = 13, T: float = 0.1) -> CheckResult:
    """Dense integration of random constant-input flows never outruns the
    speed sup: ||x(t) - x_k|| <= tau * Delta + 1e-9, Delta uninflated over an
    enclosing box."""
    t0 = time.perf_counter()
    cfg = replace(TABLE_CONFIG, inflation=1.0)
    ok = True
    msgs = []
    for name in ("unicycle", "spacecraft"):
        b = make_system(name)
        rng = np.random.default_rng(seed)
        X = b.safe_sampler(rng, n_pairs)
        U = b.input_set.sample(rng, n_pairs)
        # enclosing box: domain inflated by one period of travel
        if name == "unicycle":
            delta = delta_sup(b.model, b.input_set, b.domain_region, cfg).value
        else:
            lo = b.domain_region.lo.copy()
            hi = b.domain_region.hi.copy()
            lo[3:] -= b.input_set.u_max * T
            hi[3:] += b.input_set.u_max * T
            space = replace(b.domain_region, lo=lo, hi=hi)
            delta = delta_sup(b.model, b.input_set, space, cfg).value
        worst = -np.inf
        taus = np.linspace(0.0, T, 21)[1:]
        for tau in taus:
            Z = b.flow_map(X, U, np.full(len(X), tau))
            d = np.linalg.norm(Z - X, axis=-1)
            slack = np.max(d - tau * delta)
            worst = max(worst, slack)
        if worst > 1e-9:
            ok = False
        msgs.append(f"{name}: max displacement excess {worst:.3g} (Delta={delta:.4g})")
    return CheckResult("displacement-bound", ok, "; ".join(msgs), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# proof-chain oracles
# ---------------------------------------------------------------------------


def _dense_flow(bundle, x0, u, T, substeps=200):
    dt = T / substeps
    xs = [np.asarray(x0, dtype=float)]
    for _ in range(substeps):
        x = xs[-1]
        k1 = bundle.model.xdot(x, u)
        k2 = bundle.model.xdot(x + 0.5 * dt * k1, u)
        k3 = bundle.model.xdot(x + 0.5 * dt * k2, u)
        k4 = bundle.model.xdot(x + dt * k3, u)
        x = x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if bundle.post_step is not None:
            x = bundle.post_step(x)
        xs.append(x)
    return np.array(xs), np.linspace(0.0, T, substeps + 1)


def _constraint_input(bundle, x, phi_val, rng):
    """A random admissible input on or below the hold-period constraint row,
    or None when the row is infeasible."""
    from .core import lie_derivatives

    Lf, Lg = lie_derivatives(bundle.model, bundle.barrier, x)
    u_try = bundle.input_set.sample(rng, 1)[0]
    prob = QPProblem(
        u_nom=u_try,
        constraints=((np.asarray(Lg), float(phi_val - Lf)),),
        box=bundle.input_set,
    )
    sol = solve_filter(prob)
    return sol.u if sol.optimal else None


def check_discrete_chain(n_states: int = 25, seed: int = 14, T: float = 0.1,
                         gamma: float = 1.0) -> CheckResult:
    """Direct numerical check of the curvature inequality behind the
    discrete-descent margin: with u satisfying the phi3 row at a safe x_k,
    h(x(tau)) <= (1 - gamma*tau/T) h(x_k) + (tau/2) eta (tau - T) + 1e-9."""
    t0 = time.perf_counter()
    ok = True
    msgs = []
    for name in ("double-integrator", "unicycle", "spacecraft"):
        b = make_system(name)
        rng = np.random.default_rng(seed)
        X = b.safe_sampler(rng, n_states)
        worst = -np.inf
        used = 0
        for x in X:
            lm = local_margins(b, x, T, config=LOCAL_CONFIG, need=("nu3",))
            phi_val = -(gamma / T) * float(b.barrier.h(x[None])[0]) - 0.5 * T * lm.eta_x
            u = _constraint_input(b, x, phi_val, rng)
            if u is None:
                continue
            used += 1
            xs, taus = _dense_flow(b, x, u, T)
            hvals = np.asarray(b.barrier.h(xs))
            h0 = hvals[0]
            bound = (1 - gamma * taus / T) * h0 + 0.5 * taus * lm.eta_x * (taus - T)
            excess = np.nanmax(hvals - bound)
            worst = max(worst, excess)
            if excess > 1e-9:
                ok = False
        msgs.append(f"{name}: {used} admissible states, worst excess {worst:.3g}")
    return CheckResult("discrete-chain-oracle", ok, "; ".join(msgs), time.perf_counter() - t0)


def check_continuous_chain(n_states: int = 25, seed: int = 15, T: float = 0.1) -> CheckResult:
    """The Lipschitz-margin guarantee is stronger than bare invariance: a u
    admissible for the phi1-local row keeps hdot <= alpha(-h) + 1e-9 along
    the whole period, and h never crosses zero."""
    t0 = time.perf_counter()
    alpha = LinearClassK(1.0)
    ok = True
    msgs = []
    for name in ("unicycle", "spacecraft"):
        b = make_system(name)
        rng = np.random.default_rng(seed)
        X = b.safe_sampler(rng, n_states)
        worst = -np.inf
        used = 0
        for x in X:
            lm = local_margins(b, x, T, config=LOCAL_CONFIG, need=("nu1",))
            hx = float(b.barrier.h(x[None])[0])
            phi_val = float(alpha(-hx)) - lm.nu1l
            u = _constraint_input(b, x, phi_val, rng)
            if u is None:
                continue
            used += 1
            xs, taus = _dense_flow(b, x, u, T)
            hvals = np.asarray(b.barrier.h(xs))
            grads = np.asarray(b.barrier.grad_h(xs))
            hdots = np.einsum("tn,tn->t", grads, b.model.xdot(xs, np.broadcast_to(u, xs.shape[:-1] + (len(u),))))
            excess = np.nanmax(hdots - np.asarray(alpha(-hvals)))
            worst = max(worst, excess)
            if excess > 1e-9 or np.nanmax(hvals) > 1e-9:
                ok = False
        msgs.append(f"{name}: {used} admissible states, worst hdot excess {worst:.3g}")
    return CheckResult("continuous-chain-oracle", ok, "; ".join(msgs), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# closed-loop forward invariance
# ---------------------------------------------------------------------------


def _random_safe_scenarios(bundle: SystemBundle, n: int, rng) -> list:
    """Randomized safe starts with modest initial rates, paired with targets
    that pull the trajectory through the obstacle's influence region."""
    out = []
    if bundle.name in ("unicycle", "corridor"):
        while len(out) < n:
            x = bundle.safe_sampler(rng, 1)[0]
            r = np.hypot(x[0], x[1])
            if not (12.0 <= r <= 22.0):
                continue
            target = -x[:2] * (rng.uniform(0.8, 1.2) * 20.0 / r)
            out.append((x, replace(bundle.scenario, x0=x, target=target, duration=15.0)))
    elif bundle.name == "spacecraft":
        while len(out) < n:
            x = bundle.safe_sampler(rng, 1)[0]
            x[3:] = rng.uniform(-0.02, 0.02, 3)
            if float(bundle.barrier.h(x[None])[0]) > -0.05:
                continue
            tgt = -x[:3] + rng.normal(0, 0.3, 3)
            tgt /= np.linalg.norm(tgt)
            out.append((x, replace(bundle.scenario, x0=x, target=tgt, duration=10.0)))
    else:
        for _ in range(n):
            x = bundle.safe_sampler(rng, 1)[0]
            out.append((x, replace(bundle.scenario, x0=x)))
    return out


def check_forward_invariance(n_runs: int = 20, seed: int = 16, T: float = 0.1,
                             variants=None, systems=("unicycle", "spacecraft")) -> CheckResult:
    """Every certified run (no relaxed QP step) keeps h <= 1e-9 on the dense
    substep grid; runs with relaxations are excluded and counted."""
    t0 = time.perf_counter()
    variants = variants or ("phi0g", "phi1l", "phi1g", "phi2l", "phi2g", "phi3l", "phi3g")
    ok = True
    msgs = []
    for name in systems:
        b = make_system(name)
        rng = np.random.default_rng(seed)
        starts = _random_safe_scenarios(b, n_runs, rng)
        for variant in variants:
            certified = excluded = 0
            worst = -np.inf
            for x0, scen in starts:
                cfg = SimConfig(system=name, variant=variant, T=T,
                                duration=scen.duration, scenario=scen,
                                sup_config=TABLE_CONFIG,
                                local_sup_config=LOCAL_CONFIG)
                trace = run(cfg, bundle=b)
                if trace.relax_count > 0:
                    excluded += 1
                    continue
                certified += 1
                worst = max(worst, max_h_over_trace(trace))
                if max_h_over_trace(trace) > 1e-9:
                    ok = False
                    msgs.append(f"{name}/{variant}: h reached {max_h_over_trace(trace):.3g}")
            msgs.append(
                f"{name}/{variant}: {certified} certified (worst h {worst:.3g}), {excluded} relaxed-excluded"
            )
    return CheckResult("forward-invariance", ok, "; ".join(msgs), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# QP oracle
# ---------------------------------------------------------------------------


def _axis_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid on [lo, hi] that never oversteps the endpoints."""
    if hi <= lo:
        return np.array([lo])
    pts = np.arange(lo, hi, step)
    return np.concatenate([pts, [hi]])


def _brute_force_qp(problem: QPProblem, step: float = 1e-3) -> Optional[np.ndarray]:
    """Grid-search oracle at the stated resolution.

    m <= 2 sweeps the full box at ``step`` (chunked); m = 3 cannot (~1e10
    points), so it zooms: repeated full sweeps of a shrinking window around
    the incumbent, ending with a true ``step`` grid. The zoom relies only on
    convexity of the problem, not on the solver under test.
    """
    box = problem.box
    m = box.dim
    G = np.array([a for a, _ in problem.constraints]) if problem.constraints else np.zeros((0, m))
    d = np.array([b for _, b in problem.constraints])

    def best_on(grids):
        mesh = np.meshgrid(*grids, indexing="ij")
        U = np.stack([g.ravel() for g in mesh], axis=-1)
        best = None
        for chunk in np.array_split(U, max(1, len(U) // 2_000_000)):
            if len(G):
                feas = np.all(chunk @ G.T <= d + 1e-9, axis=1)
                chunk = chunk[feas]
                if not len(chunk):
                    continue
            i = np.argmin(np.sum((chunk - problem.u_nom) ** 2, axis=1))
            cand = chunk[i]
            if best is None or np.sum((cand - problem.u_nom) ** 2) < np.sum((best - problem.u_nom) ** 2):
                best = cand
        return best

    if m <= 2:
        grids = [_axis_grid(box.lo[i], box.hi[i], step) for i in range(m)]
        return best_on(grids)

    # zoom stages for m = 3
    lo = box.lo.copy()
    hi = box.hi.copy()
    u0 = None
    for _ in range(8):
        n_pts = 41
        cur = max((hi - lo).max() / (n_pts - 1), step)
        grids = [_axis_grid(lo[i], hi[i], cur) for i in range(m)]
        cand = best_on(grids)
        if cand is None:
            # the window sliced past the feasible set; widen once
            lo = np.maximum(box.lo, lo - (hi - lo))
            hi = np.minimum(box.hi, hi + (hi - lo))
            cand = best_on([_axis_grid(lo[i], hi[i], cur) for i in range(m)])
            if cand is None:
                return None
        u0 = cand
        if cur <= step:
            break
        pad = 2.5 * cur
        lo = np.maximum(box.lo, u0 - pad)
        hi = np.minimum(box.hi, u0 + pad)
    # final pass at exactly the stated resolution
    pad = 3e-2
    grids = [
        _axis_grid(max(box.lo[i], u0[i] - pad), min(box.hi[i], u0[i] + pad), step)
        for i in range(m)
    ]
    u1 = best_on(grids)
    return u1 if u1 is not None else u0


def _grid_resolved(problem: QPProblem, u_g: np.ndarray, step: float = 2.5e-4,
                   window: float = 5e-3) -> tuple[bool, np.ndarray]:
    """Local grid-descent certificate: slide a refinement window until the
    incumbent is a fixed point of the local grid search. For a convex
    feasible set the walk tracks thin slivers the coarse sweep cannot see;
    failing to converge marks the problem as below grid resolution."""
    box = problem.box
    m = box.dim
    G = np.array([a for a, _ in problem.constraints]) if problem.constraints else np.zeros((0, m))
    d = np.array([b for _, b in problem.constraints])

    def local_best(center):
        grids = [
            _axis_grid(max(box.lo[i], center[i] - window), min(box.hi[i], center[i] + window), step)
            for i in range(m)
        ]
        mesh = np.meshgrid(*grids, indexing="ij")
        U = np.stack([g.ravel() for g in mesh], axis=-1)
        if len(G):
            U = U[np.all(U @ G.T <= d + 1e-9, axis=1)]
        if not len(U):
            return None
        return U[np.argmin(np.sum((U - problem.u_nom) ** 2, axis=1))]

    u = u_g
    converged = False
    for _ in range(60):
        u_next = local_best(u)
        if u_next is None:
            return False, u
        if np.linalg.norm(u_next - u) <= 0.25 * step:
            converged = True
            u = u_next
            break
        u = u_next
    if not converged:
        return False, u

    # A uniform grid pins the optimum to O(step) only when the active
    # geometry is grid-benign: interior points, box faces/corners (the grid
    # contains the box boundary exactly), full vertices, or axis-aligned
    # rows. On a tilted face the error along the flat objective direction is
    # O(sqrt(step)) by strong convexity, so those are excluded from the
    # input-space comparison (objective dominance still covers them).
    n_active = 0
    if len(G):
        slack = d - G @ u
        for i in range(len(G)):
            ai = G[i]
            norm = max(np.linalg.norm(ai), 1e-12)
            if slack[i] <= 5e-3 * norm:
                n_active += 1
                comps = np.sort(np.abs(ai / norm))[::-1]
                axis_aligned = comps[1] <= 1e-9 if m > 1 else True
                if not axis_aligned:
                    return False, u
    for i in range(m):
        if box.hi[i] - u[i] <= 5e-3 or u[i] - box.lo[i] <= 5e-3:
            n_active += 1
    return True, u


def check_qp_oracle(n_problems: int = 1000, seed: int = 17) -> CheckResult:
    """Random small projections versus an independent grid search.

    Three layers: (i) the solver's point must be feasible and dominate every
    feasible grid point in objective (holds regardless of geometry);
    (ii) where the grid certifies local convergence at its own resolution,
    the points must agree within 2e-3; (iii) KKT residuals <= 1e-8.
    Unresolvable slivers (feasible sets thinner than the grid step) are
    counted and bounded, not silently dropped.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    from .core import InputSet

    ok = True
    msgs = []
    worst_dist = 0.0
    worst_kkt = 0.0
    n_infeas = 0
    n_unresolved = 0
    n_compared = 0
    for _ in range(n_problems):
        m = int(rng.integers(1, 4))
        lo = -rng.uniform(0.5, 1.5, m)
        hi = rng.uniform(0.5, 1.5, m)
        box = InputSet(lo, hi)
        rows = []
        for _ in range(int(rng.integers(0, 4))):
            if rng.random() < 0.5:
                # axis-aligned rows mirror the rate-box constraints
                a = np.zeros(m)
                a[rng.integers(m)] = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
            else:
                a = rng.normal(size=m)
            b = rng.normal() * 1.5
            rows.append((a, b))
        u_nom = rng.normal(size=m) * 1.5
        prob = QPProblem(u_nom=u_nom, constraints=tuple(rows), box=box)
        sol = solve_filter(prob)
        res = kkt_residual(prob, sol)
        worst_kkt = max(worst_kkt, res if sol.optimal else 0.0)
        if not sol.optimal:
            n_infeas += 1
            if sol.violation <= 0:
                ok = False
                msgs.append("relaxed status with zero violation")
            continue
        G = np.array([a for a, _ in rows]) if rows else np.zeros((0, m))
        d = np.array([b for _, b in rows])
        if len(G) and np.any(G @ sol.u > d + 1e-8):
            ok = False
            msgs.append("optimal status but infeasible point")
            continue
        u_star = _brute_force_qp(prob)
        if u_star is None:
            n_unresolved += 1
            continue
        # dominance over the entire grid, immune to grid-resolution issues
        if np.sum((sol.u - u_nom) ** 2) > np.sum((u_star - u_nom) ** 2) + 1e-10:
            ok = False
            msgs.append(
                f"grid point beats 'optimal' solution by "
                f"{np.sum((sol.u - u_nom) ** 2) - np.sum((u_star - u_nom) ** 2):.3g}"
            )
            continue
        resolved, u_ref = _grid_resolved(prob, u_star)
        if not resolved:
            n_unresolved += 1
            continue
        n_compared += 1
        dist = float(np.linalg.norm(sol.u - u_ref))
        worst_dist = max(worst_dist, dist)
        if dist > 2e-3:
            ok = False
            msgs.append(f"projection off grid oracle by {dist:.3g}")
    if worst_kkt > 1e-8:
        ok = False
        msgs.append(f"KKT residual {worst_kkt:.3g}")
    if n_unresolved > 0.15 * n_problems:
        ok = False
        msgs.append(f"too many grid-unresolvable problems ({n_unresolved})")
    msgs.append(
        f"{n_problems} problems ({n_infeas} relaxed, {n_compared} grid-compared, "
        f"{n_unresolved} below grid resolution), worst distance {worst_dist:.3g}, "
        f"worst KKT {worst_kkt:.3g}"
    )
    return CheckResult("qp-oracle", ok, "; ".join(msgs), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# table reproduction
# ---------------------------------------------------------------------------

MARGIN_TARGETS = {
    "unicycle": {"nu1g": 570.3, "nu2g": 0.6908, "nu3g": 0.1319},
    "spacecraft": {"nu0g": 14.20, "nu1g": 2.946, "nu2g": 0.8815, "nu3g": 0.1194},
}

# entries that cannot be reproduced from the stated formulas at any
# estimation resolution (see the repository notes); kept in the battery as
# expected failures so the gap stays visible
IRREPRODUCIBLE_MARGINS = {("unicycle", "nu3g"), ("spacecraft", "nu2g")}

PHYSICAL_TARGETS = {
    "unicycle": {
        "delta0g_inf": {0.1: 1.2e42, 0.01: 420.0, 0.001: 0.010},
        "delta1g_inf": {0.1: 0.54, 0.01: 0.054, 0.001: 0.0054},
        "delta2g_inf": {0.1: 0.53, 0.01: 0.053, 0.001: 0.0053},
        "delta3g_inf": {0.1: 0.013, 0.01: 1.3e-4, 0.001: 1.3e-6},
    },
    "spacecraft": {
        "delta0g_inf": {0.1: 9.8, 0.01: 0.23, 0.001: 0.021},
        "delta1g_inf": {0.1: 2.0, 0.01: 0.20, 0.001: 0.020},
        "delta2g_inf": {0.1: 0.81, 0.01: 0.082, 0.001: 0.0082},
        "delta3g_inf": {0.1: 0.013, 0.01: 1.3e-4, 0.001: 1.3e-6},
    },
}

IRREPRODUCIBLE_PHYSICAL = {
    ("unicycle", "delta0g_inf", 0.1),
    ("unicycle", "delta3g_inf", 0.1),
    ("unicycle", "delta3g_inf", 0.01),
    ("unicycle", "delta3g_inf", 0.001),
    ("spacecraft", "delta2g_inf", 0.1),
    ("spacecraft", "delta2g_inf", 0.01),
    ("spacecraft", "delta2g_inf", 0.001),
}


def check_margin_table(system: str) -> list[CheckResult]:
    t0 = time.perf_counter()
    b = make_system(system)
    c = compute_global_constants(b, 0.1, config=TABLE_CONFIG)
    out = []
    values = {"nu0g": c.nu0g, "nu1g": c.nu1g, "nu2g": c.nu2g, "nu3g": c.nu3g}
    if system == "unicycle":
        passed = 1e48 <= values["nu0g"] <= 1e52
        out.append(
            CheckResult(
                f"margins/{system}/nu0g",
                passed,
                f"{values['nu0g']:.3e} (accept [1e48, 1e52])",
            )
        )
    for key, target in MARGIN_TARGETS[system].items():
        mine = values[key]
        passed = _rel_ok(mine, target)
        out.append(
            CheckResult(
                f"margins/{system}/{key}",
                passed,
                f"{mine:.4g} vs {target:.4g} ({100 * (mine / target - 1):+.1f}%)",
                expected_failure=(system, key) in IRREPRODUCIBLE_MARGINS,
            )
        )
    out[-1].wall = time.perf_counter() - t0
    return out


def check_physical_table(system: str) -> list[CheckResult]:
    t0 = time.perf_counter()
    b = make_system(system)
    out = []
    Ts = (0.1, 0.01, 0.001)
    mine = {}
    for variant, key in zip(GLOBAL_VARIANTS, ("delta0g_inf", "delta1g_inf", "delta2g_inf", "delta3g_inf")):
        mine[key] = {T: physical_margin_inf(b, variant, T, TABLE_CONFIG) for T in Ts}
    for key, rows in PHYSICAL_TARGETS[system].items():
        for T, target in rows.items():
            v = mine[key][T]
            out.append(
                CheckResult(
                    f"physical/{system}/{key}@T={T:g}",
                    _rel_ok(v, target),
                    f"{v:.4g} vs {target:.4g}",
                    expected_failure=(system, key, T) in IRREPRODUCIBLE_PHYSICAL,
                )
            )
    # scaling laws on the produced values
    for key, want, tol in (
        ("delta1g_inf", 10.0, 0.05),
        ("delta2g_inf", 10.0, 0.05),
        ("delta3g_inf", 100.0, 0.05),
    ):
        for Ta, Tb in ((0.1, 0.01), (0.01, 0.001)):
            r = mine[key][Ta] / mine[key][Tb]
            out.append(
                CheckResult(
                    f"physical/{system}/{key}-ratio@{Ta:g}/{Tb:g}",
                    abs(r - want) <= tol * want,
                    f"{r:.2f} (want {want:g} ±{100 * tol:.0f}%)",
                )
            )
    if system == "spacecraft":
        r = mine["delta0g_inf"][0.01] / mine["delta0g_inf"][0.001]
        out.append(
            CheckResult(
                f"physical/{system}/delta0-linear-regime",
                abs(r - 10.0) <= 3.0,
                f"{r:.2f} (want 10 ±30%)",
            )
        )
    out[-1].wall = time.perf_counter() - t0
    return out


# ---------------------------------------------------------------------------
# scenario outcomes
# ---------------------------------------------------------------------------


def check_unicycle_outcomes(T: float = 0.1) -> CheckResult:
    """The conservative margins abort the task, the tight ones complete it."""
    t0 = time.perf_counter()
    ok = True
    msgs = []
    results = {}
    for variant in ("phi0g", "phi1g", "phi1l", "phi2l", "phi2g", "phi3l", "phi3g"):
        tr = run(SimConfig(system="unicycle", variant=variant, T=T, duration=45.0,
                           sup_config=TABLE_CONFIG, local_sup_config=LOCAL_CONFIG))
        results[variant] = tr
        done = task_completed(tr)
        want = variant in ("phi2l", "phi2g", "phi3l", "phi3g")
        if done != want:
            ok = False
        msgs.append(f"{variant}: completed={done} (want {want}, relax={tr.relax_count})")
    # closest-approach ordering per family
    for loc, glob in (("phi3l", "phi2l"), ("phi3g", "phi2g")):
        c3 = abs(max_h_over_trace(results[loc]))
        c2 = abs(max_h_over_trace(results[glob]))
        if not c3 * 5.0 <= c2:
            ok = False
        msgs.append(f"approach {loc}={c3:.4g} vs {glob}={c2:.4g} (ratio {c2 / c3:.0f}x)")
    return CheckResult("unicycle-outcomes", ok, "; ".join(msgs), time.perf_counter() - t0)


def check_corridor(T: float = 0.1) -> CheckResult:
    t0 = time.perf_counter()
    ok = True
    msgs = []
    for variant, want in (("phi3l", True), ("phi3g", True), ("phi2l", False)):
        tr = run(SimConfig(system="corridor", variant=variant, T=T, duration=45.0,
                           sup_config=TABLE_CONFIG, local_sup_config=LOCAL_CONFIG))
        done = task_completed(tr)
        if done != want:
            ok = False
        msgs.append(
            f"{variant}: goal={done} closest={max_h_over_trace(tr):.4g} relax={tr.relax_count}"
        )
    return CheckResult("corridor", ok, "; ".join(msgs), time.perf_counter() - t0)


def check_spacecraft_approach(T: float = 0.1) -> CheckResult:
    """Per-family closest-approach ordering on the slew scenario."""
    t0 = time.perf_counter()
    ok = True
    msgs = []
    traces = {}
    for variant in ("phi2l", "phi2g", "phi3l", "phi3g"):
        traces[variant] = run(
            SimConfig(system="spacecraft", variant=variant, T=T, duration=240.0,
                      sup_config=TABLE_CONFIG, local_sup_config=LOCAL_CONFIG)
        )
    for loc, glob in (("phi3l", "phi2l"), ("phi3g", "phi2g")):
        c3 = abs(max_h_over_trace(traces[loc]))
        c2 = abs(max_h_over_trace(traces[glob]))
        if not c3 * 5.0 <= c2:
            ok = False
        msgs.append(f"{loc}={c3:.4g} vs {glob}={c2:.4g} (ratio {c2 / c3:.0f}x)")
    return CheckResult("spacecraft-approach", ok, "; ".join(msgs), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# battery
# ---------------------------------------------------------------------------

CHECKS: dict = {
    "margin-tables": lambda: check_margin_table("unicycle") + check_margin_table("spacecraft"),
    "physical-tables": lambda: check_physical_table("unicycle") + check_physical_table("spacecraft"),
    "theorem4-half": lambda: [check_theorem4()],
    "ordering": lambda: [check_ordering()],
    "forward-invariance": lambda: [check_forward_invariance()],
    "displacement-bound": lambda: [check_displacement_bound()],
    "discrete-chain-oracle": lambda: [check_discrete_chain()],
    "continuous-chain-oracle": lambda: [check_continuous_chain()],
    "unicycle-outcomes": lambda: [check_unicycle_outcomes()],
    "corridor": lambda: [check_corridor()],
    "spacecraft-approach": lambda: [check_spacecraft_approach()],
    "qp-oracle": lambda: [check_qp_oracle()],
}


def run_all(names=None, printer: Callable = print) -> int:
    """Run the battery; returns 0 when everything passed (expected failures
    count as non-blocking but are printed), 1 otherwise."""
    names = names or list(CHECKS)
    failures = 0
    for name in names:
        if name not in CHECKS:
            raise KeyError(f"unknown check {name!r}")
        for result in CHECKS[name]():
            printer(f"[{result.label:5s}] {result.name}: {result.detail}")
            if not result.passed and not result.expected_failure:
                failures += 1
    return 0 if failures == 0 else 1
