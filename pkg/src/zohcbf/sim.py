"""Zero-order-hold closed-loop simulator.

At each sample time t_k = kT the margin condition is evaluated at x_k, one
QP row per active barrier is stacked into the min-norm filter, and the
resulting input is held constant while the continuous dynamics are
integrated with fixed-step RK4 (``substeps`` stages per period). Every
substep is logged; safety claims are made on that dense grid, not just at
the samples, because the entire point of the hold-period margins is
inter-sample behavior.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .core import lie_derivatives
from .engine import SupConfig
from .margins import MarginFunction, make_margin
from .qp import QPProblem, QPSolution, solve_filter
from .systems import Scenario, SystemBundle, make_system

__all__ = ["SimConfig", "SimTrace", "run", "max_h_over_trace", "task_completed", "write_trace_csv", "trace_filename"]


@dataclass(frozen=True)
class SimConfig:
    system: str = "unicycle"
    variant: str = "phi3l"
    T: float = 0.1
    duration: float = 30.0
    substeps: int = 50
    seed: int = 0
    gamma: float = 1.0
    alpha_slope: float = 1.0
    filter_enabled: bool = True
    system_overrides: dict = field(default_factory=dict)
    scenario: Optional[Scenario] = None
    sup_config: SupConfig = SupConfig()
    local_sup_config: SupConfig = SupConfig(budget=256, refine_rounds=0, top_k=8)

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("period T must be positive")
        if self.substeps < 10:
            raise ValueError("at least 10 integrator substeps per period")


@dataclass
class SimTrace:
    """Dense per-substep log plus per-period controller records."""

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    h: np.ndarray
    hdot: np.ndarray
    phi: np.ndarray  # per substep, value at the owning sample
    nu: np.ndarray
    qp_status: list
    qp_violation: np.ndarray
    sample_t: np.ndarray
    sample_x: np.ndarray
    margin_wall: np.ndarray
    relax_count: int = 0
    terminated: str = "completed"  # "completed" | "left-domain" | "nonfinite"
    reached: bool = False

    def __len__(self):
        return len(self.t)


def aux_barrier_row(model, barrier, gamma: float, T: float, x) -> tuple[np.ndarray, float]:
    """QP row for an auxiliary barrier with identically-zero curvature
    (psi == 0): the discrete-descent condition costs no margin, so
    a = L_g h(x), b = -(gamma/T) h(x) - L_f h(x)."""
    from .core import lie_derivatives

    Lf, Lg = lie_derivatives(model, barrier, np.asarray(x, dtype=float))
    h_val = float(barrier.h(np.asarray(x, dtype=float)[None])[0])
    return np.asarray(Lg, dtype=float), float(-(gamma / T) * h_val - Lf)


def _rk4_step(model, x, u, dt, post_step=None):
    k1 = model.xdot(x, u)
    k2 = model.xdot(x + 0.5 * dt * k1, u)
    k3 = model.xdot(x + 0.5 * dt * k2, u)
    k4 = model.xdot(x + dt * k3, u)
    out = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if post_step is not None:
        out = post_step(out)
    return out


def run(config: SimConfig, bundle: Optional[SystemBundle] = None) -> SimTrace:
    """Simulate the closed loop; deterministic for a fixed seed.

    The initial state must be safe for every active barrier. The run
    terminates early (flagged, not an error) when the state leaves the
    working domain; a non-finite state raises.
    """
    bundle = bundle or make_system(config.system, **config.system_overrides)
    scen = config.scenario or bundle.scenario
    model = bundle.model
    from .core import LinearClassK

    alpha = LinearClassK(config.alpha_slope)
    margin = make_margin(
        bundle,
        config.variant,
        alpha=alpha,
        gamma=config.gamma,
        config=config.sup_config,
        local_config=config.local_sup_config,
    )

    x = np.asarray(scen.x0, dtype=float).copy()
    for b in bundle.barriers:
        h0 = float(b.h(x[None])[0])
        if not (np.isfinite(h0) and h0 <= 0.0):
            raise ValueError(f"initial state violates barrier {b.name}: h={h0:g}")

    n_periods = int(np.ceil(config.duration / config.T))
    dt = config.T / config.substeps

    ts, xs, us, hs, hds, phis, nus = [], [], [], [], [], [], []
    statuses, violations = [], []
    sample_ts, sample_xs, walls = [], [], []
    relax_count = 0
    terminated = "completed"
    reached = False

    main = bundle.barrier
    for k in range(n_periods):
        t_k = k * config.T
        ok_domain = bundle.in_domain(x)
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(f"non-finite state at t={t_k:g}")
        if not ok_domain:
            terminated = "left-domain"
            break

        t0 = time.perf_counter()
        phi_k = margin.phi(config.T, x)
        nu_k = margin.nu(config.T, x)
        rows = []
        Lf, Lg = lie_derivatives(model, main, x)
        rows.append((np.asarray(Lg, dtype=float), float(phi_k - Lf)))
        # auxiliary barriers ride along as hold-period rows of the discrete
        # condition with zero curvature cost (their psi vanishes identically)
        for b in bundle.barriers[1:]:
            rows.append(aux_barrier_row(model, b, config.gamma, config.T, x))
        wall = time.perf_counter() - t0

        if config.filter_enabled:
            u_nom = bundle.nominal(x, scen)
            sol = solve_filter(QPProblem(u_nom=u_nom, constraints=tuple(rows), box=bundle.input_set))
            u_k = sol.u
            status, viol = sol.status, sol.violation
            if not sol.optimal:
                relax_count += 1
        else:
            u_k = bundle.input_set.clip(bundle.nominal(x, scen))
            status, viol = "unfiltered", 0.0

        sample_ts.append(t_k)
        sample_xs.append(x.copy())
        walls.append(wall)

        for j in range(config.substeps):
            ts.append(t_k + j * dt)
            xs.append(x.copy())
            us.append(u_k.copy())
            hs.append(float(main.h(x[None])[0]))
            grad_ok = np.isfinite(hs[-1])
            if grad_ok:
                try:
                    hds.append(float(np.dot(np.asarray(main.grad_h(x[None]))[0], model.xdot(x, u_k))))
                except Exception:
                    hds.append(float("nan"))
            else:
                hds.append(float("nan"))
            phis.append(phi_k)
            nus.append(nu_k)
            statuses.append(status)
            violations.append(viol)
            x = _rk4_step(model, x, u_k, dt, bundle.post_step)

        if bundle.reached(x, scen):
            reached = True

    # final state row
    ts.append(len(sample_ts) * config.T if terminated == "completed" else ts[-1] + dt)
    xs.append(x.copy())
    us.append(us[-1].copy() if us else np.zeros(model.dim_input))
    hs.append(float(main.h(x[None])[0]))
    hds.append(float("nan"))
    phis.append(phis[-1] if phis else float("nan"))
    nus.append(nus[-1] if nus else float("nan"))
    statuses.append(statuses[-1] if statuses else "none")
    violations.append(violations[-1] if violations else 0.0)

    return SimTrace(
        t=np.array(ts),
        x=np.array(xs),
        u=np.array(us),
        h=np.array(hs),
        hdot=np.array(hds),
        phi=np.array(phis),
        nu=np.array(nus),
        qp_status=statuses,
        qp_violation=np.array(violations),
        sample_t=np.array(sample_ts),
        sample_x=np.array(sample_xs),
        margin_wall=np.array(walls),
        relax_count=relax_count,
        terminated=terminated,
        reached=reached,
    )


def max_h_over_trace(trace: SimTrace) -> float:
    """Largest barrier value over the dense grid: the signed closest approach
    to the boundary. Safety of the run is exactly ``max_h_over_trace <= 0``."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    vals = trace.h[np.isfinite(trace.h)]
    return float(np.max(vals)) if len(vals) else float("nan")


def task_completed(trace: SimTrace) -> bool:
    """Certified task completion: the target was reached, the run finished
    inside the working domain, and the safety certificate held at every step
    (no relaxed QP solutions). A run that only arrives via uncertified
    relaxed inputs does not count as completing the safety task."""
    return trace.reached and trace.relax_count == 0 and trace.terminated == "completed"


def trace_filename(config: SimConfig) -> str:
    return f"{config.system}_{config.variant}_T{config.T:g}_seed{config.seed}.csv"


def write_trace_csv(trace: SimTrace, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = trace.x.shape[1]
    m = trace.u.shape[1]
    header = (
        ["t"]
        + [f"x{i}" for i in range(n)]
        + [f"u{i}" for i in range(m)]
        + ["h", "hdot", "phi", "nu", "qp_status", "qp_violation"]
    )
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(trace)):
            w.writerow(
                [f"{trace.t[i]:.9g}"]
                + [f"{v:.12g}" for v in trace.x[i]]
                + [f"{v:.12g}" for v in trace.u[i]]
                + [
                    f"{trace.h[i]:.12g}",
                    f"{trace.hdot[i]:.12g}",
                    f"{trace.phi[i]:.12g}",
                    f"{trace.nu[i]:.12g}",
                    trace.qp_status[i],
                    f"{trace.qp_violation[i]:.12g}",
                ]
            )
    return path
