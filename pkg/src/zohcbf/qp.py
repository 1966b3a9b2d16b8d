"""Min-norm safety filter: Euclidean projection of a nominal input onto the
intersection of half-spaces a_i·u <= b_i with the input box.

The objective ||u - u_nom|| is strictly convex, so the minimizer is unique;
for the small input dimensions here (m <= 6) an exact active-set enumeration
over KKT candidates is both simpler and more reproducible than an iterative
solver. Infeasibility is a status, not an error: the filter then returns the
box-feasible input minimizing the worst constraint residual (a Chebyshev
relaxation solved as an LP), which is what lets a closed-loop run continue
and visibly diverge instead of crashing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .core import Barrier, DynamicsModel, InputSet
from .margins import MarginFunction

__all__ = ["QPProblem", "QPSolution", "solve_filter", "build_constraint", "kkt_residual"]

_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class QPProblem:
    u_nom: np.ndarray
    constraints: tuple  # of (a: (m,) array, b: float)
    box: InputSet

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u_nom, dtype=float))
        object.__setattr__(self, "u_nom", u)
        rows = []
        for a, b in self.constraints:
            a = np.atleast_1d(np.asarray(a, dtype=float))
            if a.shape != (self.box.dim,) or not np.all(np.isfinite(a)) or not np.isfinite(b):
                raise ValueError("constraint row must be finite and match the input dimension")
            rows.append((a, float(b)))
        object.__setattr__(self, "constraints", tuple(rows))


@dataclass(frozen=True)
class QPSolution:
    u: np.ndarray
    status: str  # "optimal" | "infeasible-relaxed"
    violation: float = 0.0
    active_set: tuple = ()
    kkt_residual: float = float("nan")

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _stack_rows(problem: QPProblem):
    m = problem.box.dim
    G = [a for a, _ in problem.constraints]
    d = [b for _, b in problem.constraints]
    eye = np.eye(m)
    for i in range(m):
        G.append(eye[i])
        d.append(problem.box.hi[i])
        G.append(-eye[i])
        d.append(-problem.box.lo[i])
    return np.array(G, dtype=float), np.array(d, dtype=float)


def _project_active_set(u_nom, G, d, labels, box=None):
    """Exact projection onto {Gu <= d} by KKT enumeration.

    Returns (u, active, residual) or None when the system is infeasible.
    Rows that cannot bind anywhere in the box (sup over the box of a·u is
    already <= b) are dropped exactly before enumerating.
    """
    m = u_nom.shape[0]
    n_rows = G.shape[0]
    # zero rows cannot be active; they are feasibility facts only
    zero = np.linalg.norm(G, axis=1) < 1e-14
    if np.any(zero & (d < -_FEAS_TOL)):
        return None
    # constraint rows (never the box rows) that cannot bind anywhere in the
    # box are exact-redundant and skipped during enumeration
    redundant = np.zeros(n_rows, dtype=bool)
    if box is not None:
        nc = n_rows - 2 * m
        if nc > 0:
            Gc = G[:nc]
            sup_box = Gc @ (0.5 * (box.lo + box.hi)) + np.abs(Gc) @ (
                0.5 * (box.hi - box.lo)
            )
            redundant[:nc] = sup_box <= d[:nc] + 1e-12
    cand_rows = [i for i in range(n_rows) if not zero[i] and not redundant[i]]

    def feasible(u):
        return np.all(G @ u <= d + 1e-8)

    if feasible(u_nom):
        return u_nom.copy(), (), 0.0

    best = None
    for k in range(1, m + 1):
        for combo in combinations(cand_rows, k):
            A = G[list(combo)]
            M = A @ A.T
            rhs = A @ u_nom - d[list(combo)]
            try:
                lam = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                continue
            if np.any(lam < -1e-10):
                continue
            u = u_nom - A.T @ lam
            if not feasible(u):
                continue
            res = float(np.linalg.norm(u - u_nom + A.T @ lam))
            obj = float(np.dot(u - u_nom, u - u_nom))
            if best is None or obj < best[3] - 1e-15:
                best = (u, tuple(labels[i] for i in combo), res, obj)
        if best is not None:
            # the projection is unique; a valid KKT point at size k is it
            break
    if best is None:
        return None
    return best[0], best[1], best[2]


def solve_filter(problem: QPProblem) -> QPSolution:
    """Solve min ||u - u_nom|| over {a_i·u <= b_i} ∩ box.

    Feasible: the unique projection, with the active row labels and the KKT
    stationarity residual. Infeasible: the Chebyshev point — box-feasible u
    minimizing max_i(a_i·u - b_i) — with that worst residual reported as
    ``violation``; among Chebyshev minimizers the one closest to u_nom is
    returned so the result stays deterministic.
    """
    G, d = _stack_rows(problem)
    labels = list(range(len(problem.constraints))) + [
        f"box{i // 2}{'+' if i % 2 == 0 else '-'}"
        for i in range(2 * problem.box.dim)
    ]

    out = _project_active_set(problem.u_nom, G, d, labels, box=problem.box)
    if out is not None:
        u, active, res = out
        return QPSolution(u=u, status="optimal", violation=0.0,
                          active_set=active, kkt_residual=res)

    # Chebyshev relaxation: min t s.t. a_i·u - t <= b_i, u in box. Extreme
    # margin values (the exponential global margin can reach 1e50) are
    # clamped for the LP only; rows clamped by the same amount dominate the
    # max identically, so the argmin is unchanged, and the reported
    # violation is recomputed against the true rows.
    nc = len(problem.constraints)
    m = problem.box.dim
    Gc = G[:nc]
    d_lp = np.maximum(d[:nc], -1e9)
    A_ub = np.hstack([Gc, -np.ones((nc, 1))])
    c = np.zeros(m + 1)
    c[-1] = 1.0
    bounds = [(problem.box.lo[i], problem.box.hi[i]) for i in range(m)] + [(None, None)]
    lp = linprog(c, A_ub=A_ub, b_ub=d_lp, bounds=bounds, method="highs")
    if not lp.success:
        raise RuntimeError(f"relaxation LP failed: {lp.message}")
    t_star = float(lp.x[-1])

    slack = 1e-9 * max(1.0, abs(t_star))
    relaxed_d = d.copy()
    relaxed_d[:nc] = d_lp + t_star + slack
    out = _project_active_set(problem.u_nom, G, relaxed_d, labels, box=problem.box)
    if out is None:  # numerically razor-thin relaxed set; widen and retry
        relaxed_d[:nc] += 1e4 * slack
        out = _project_active_set(problem.u_nom, G, relaxed_d, labels, box=problem.box)
    if out is None:
        relaxed_d[:nc] += 1e7 * slack
        out = _project_active_set(problem.u_nom, G, relaxed_d, labels, box=problem.box)
    u, active, res = out
    violation = float(max(np.max(Gc @ u - d[:nc], initial=0.0), 0.0))
    if violation <= 1e-10:
        return QPSolution(u=u, status="optimal", violation=0.0,
                          active_set=active, kkt_residual=res)
    return QPSolution(u=u, status="infeasible-relaxed", violation=violation,
                      active_set=active, kkt_residual=res)


def kkt_residual(problem: QPProblem, sol: QPSolution) -> float:
    """Stationarity + feasibility residual of a solution, recomputed from
    scratch: nonnegative multipliers on the near-active rows must explain
    the objective gradient."""
    from scipy.optimize import nnls

    G, d = _stack_rows(problem)
    slack = G @ sol.u - d
    if sol.status == "infeasible-relaxed":
        slack[: len(problem.constraints)] -= sol.violation
    feas = float(np.max(np.maximum(slack, 0.0), initial=0.0))
    grad = sol.u - problem.u_nom
    act = np.abs(slack) < 1e-6
    if not np.any(act):
        return feas + float(np.linalg.norm(grad))
    A = G[act]
    _, stat = nnls(A.T, -grad)
    return feas + float(stat)


def build_constraint(
    model: DynamicsModel,
    barrier: Barrier,
    margin: MarginFunction,
    x_k: np.ndarray,
    T: float,
) -> tuple[np.ndarray, float]:
    """One QP row from the hold-period condition at the sampled state:
    a·u <= b with a = L_g h(x_k), b = phi(T, x_k) − L_f h(x_k)."""
    from .core import lie_derivatives

    Lf, Lg = lie_derivatives(model, barrier, np.asarray(x_k, dtype=float))
    phi = margin.phi(T, x_k)
    if not np.isfinite(phi):
        raise ValueError(f"margin evaluation failed at {x_k!r}")
    return np.asarray(Lg, dtype=float), float(phi - Lf)
