"""One-step reachable-set over-approximations and suprema of functionals
over them.

Two reach-bound kinds are supported:

* ``ball`` — the norm ball of radius T·Δ around the sample state, valid by
  the displacement bound ||x(kT+τ) − x_k|| <= τΔ.
* ``flow`` — the set of constant-input flows {flow(x_k, u, τ) : u ∈ U,
  τ ∈ [0, T)}. Under a zero-order hold the input is constant within a
  period, so this cover is exact up to integration error and is the tight
  choice whenever flows are cheap.

Both expose a parameter box plus a map from parameters to states so the
same sup engine drives everything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Barrier, DynamicsModel, InputSet
from .engine import SupConfig, SupEstimate, maximize

__all__ = [
    "SampleSpace",
    "BoxSpace",
    "MappedSpace",
    "ReachBound",
    "delta_sup",
    "delta0_bound",
    "reach_ball",
    "reach_flow",
    "unicycle_arc",
    "reach_exact_unicycle",
    "sup_over_reach",
    "lipschitz_estimate",
]


@dataclass(frozen=True)
class SampleSpace:
    """A parameter box with a map into state space.

    ``to_states`` maps (N, d) parameters to (N, n) states. ``mask`` returns
    False for parameters whose mapped state must be discarded (outside an
    implicit region); the engine sees those as NaN objective values.
    """

    lo: np.ndarray
    hi: np.ndarray
    to_states: Callable[[np.ndarray], np.ndarray]
    mask: Optional[Callable[[np.ndarray], np.ndarray]] = None
    description: str = "box"

    @property
    def dim(self) -> int:
        return np.atleast_1d(self.lo).shape[0]

    def states_and_valid(self, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        X = self.to_states(P)
        if self.mask is None:
            return X, np.ones(X.shape[0], dtype=bool)
        return X, self.mask(X)


def BoxSpace(lo, hi, mask=None, description="box") -> SampleSpace:
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    return SampleSpace(lo, hi, to_states=lambda P: P, mask=mask, description=description)


def MappedSpace(lo, hi, to_states, mask=None, description="mapped") -> SampleSpace:
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    return SampleSpace(lo, hi, to_states=to_states, mask=mask, description=description)


@dataclass(frozen=True)
class ReachBound:
    """Over-approximation of the states reachable from ``center`` within one
    hold period."""

    center: np.ndarray
    horizon: float
    kind: str  # "ball" | "flow"
    space: SampleSpace
    delta_used: Optional[float] = None

    @property
    def radius(self) -> float:
        if self.kind != "ball":
            raise ValueError("radius only defined for ball bounds")
        return self.horizon * self.delta_used


def delta_sup(
    model: DynamicsModel,
    input_set: InputSet,
    space: SampleSpace,
    config: SupConfig,
) -> SupEstimate:
    """sup over region × U of ||f(x) + g(x)u||.

    The norm is convex in u, so the inner max over the input box is exact
    corner enumeration; only the state dimension is sampled.
    """
    corners = input_set.corners()

    def objective(P):
        X, ok = space.states_and_valid(P)
        fx = np.asarray(model.f(X))
        gx = np.asarray(model.g(X))
        # (N, 2^m, n) = f + g @ corner
        v = fx[:, None, :] + np.einsum("xnm,cm->xcn", gx, corners)
        speed = np.linalg.norm(v, axis=-1).max(axis=1)
        bad = ~ok | ~np.isfinite(speed)
        if np.all(bad):
            i = int(np.argmax(~ok)) if np.any(~ok) else 0
            raise ValueError(
                f"delta_sup: dynamics non-finite over region (sample {X[i]!r})"
            )
        return np.where(bad, np.nan, speed)

    return maximize(objective, space.lo, space.hi, config)


def delta0_bound(
    model: DynamicsModel, input_set: InputSet, x_k: np.ndarray, T: float
) -> float:
    """Closed-form local over-estimate of the speed bound:
    (||f(x_k)|| + ||g(x_k)||·u_max) / (1 − (l_f + l_g·u_max)·T)."""
    if model.lipschitz_f is None or model.lipschitz_g is None:
        raise ValueError("delta0_bound needs declared lipschitz_f and lipschitz_g")
    x_k = np.asarray(x_k, dtype=float)
    denom = 1.0 - (model.lipschitz_f + model.lipschitz_g * input_set.u_max) * T
    if denom <= 0:
        raise ValueError(
            f"time-step too large for the closed-form speed bound (denominator {denom:.3g})"
        )
    fn = float(np.linalg.norm(model.f(x_k)))
    gn = float(np.linalg.norm(np.asarray(model.g(x_k)), ord=2))
    return (fn + gn * input_set.u_max) / denom


def _ball_space(center: np.ndarray, radius: float) -> SampleSpace:
    center = np.asarray(center, dtype=float)
    n = center.shape[0]

    def to_states(P):
        # cube -> ball, radially; boundary-biased, which suits sup search
        norm = np.linalg.norm(P, axis=-1, keepdims=True)
        scale = np.where(norm > 1.0, 1.0 / np.maximum(norm, 1e-300), 1.0)
        return center + radius * P * scale

    return MappedSpace(
        -np.ones(n), np.ones(n), to_states, description=f"ball(r={radius:.4g})"
    )


def reach_ball(
    model: DynamicsModel,
    input_set: InputSet,
    x_k: np.ndarray,
    T: float,
    delta: Optional[float] = None,
    config: Optional[SupConfig] = None,
) -> ReachBound:
    """Ball reach bound of radius T·Δ.

    When ``delta`` is not supplied it is grown to self-consistency: Δ must
    dominate the speed sup over the ball it generates. Two fixed-point
    passes; errors out if the iteration is still expanding.
    """
    x_k = np.asarray(x_k, dtype=float)
    if delta is None:
        if config is None:
            raise ValueError("reach_ball needs either delta or a sup config")
        # seed with the exact corner max at the center, then grow until the
        # speed sup over the generated ball is dominated
        corners = input_set.corners()
        fx = np.asarray(model.f(x_k[None]))[0]
        gx = np.asarray(model.g(x_k[None]))[0]
        v0 = float(np.max(np.linalg.norm(fx[None, :] + corners @ gx.T, axis=-1)))
        delta = max(v0, 1e-12) * 1.2
        for _ in range(3):
            est = delta_sup(model, input_set, _ball_space(x_k, T * delta), config)
            if est.value <= delta:
                delta = max(est.value, v0)
                break
            delta = est.value * 1.1
        else:
            est = delta_sup(model, input_set, _ball_space(x_k, T * delta), config)
            if est.value > delta:
                raise ValueError("reach_ball fixed point is not contracting")
    return ReachBound(
        center=x_k,
        horizon=T,
        kind="ball",
        space=_ball_space(x_k, T * delta),
        delta_used=float(delta),
    )


def _rk4_flow(model: DynamicsModel, x0: np.ndarray, u: np.ndarray, tau: np.ndarray,
              substeps: int, post_step=None) -> np.ndarray:
    """Vectorized fixed-step RK4 of the constant-input closed loop.

    x0 (N, n), u (N, m), tau (N,) -> states at time tau.
    """
    x = np.array(x0, dtype=float)
    dt = (np.asarray(tau, dtype=float) / substeps)[..., None]
    for _ in range(substeps):
        k1 = model.xdot(x, u)
        k2 = model.xdot(x + 0.5 * dt * k1, u)
        k3 = model.xdot(x + 0.5 * dt * k2, u)
        k4 = model.xdot(x + dt * k3, u)
        x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if post_step is not None:
            x = post_step(x)
    return x


def reach_flow(
    model: DynamicsModel,
    input_set: InputSet,
    x_k: np.ndarray,
    T: float,
    substeps: int = 8,
    post_step=None,
    flow_map: Optional[Callable] = None,
) -> ReachBound:
    """Constant-input-flow cover of the reach set, parametrized by (u, τ).

    ``flow_map(x0, u, tau)`` may supply a closed-form flow; otherwise RK4.
    """
    x_k = np.asarray(x_k, dtype=float)
    m = input_set.dim
    lo = np.concatenate([input_set.lo, [0.0]])
    hi = np.concatenate([input_set.hi, [T]])

    if flow_map is None:
        def flow_map(x0, u, tau):  # noqa: E731 kept local
            return _rk4_flow(model, x0, u, tau, substeps, post_step)

    def to_states(P):
        u = P[:, :m]
        tau = P[:, m]
        x0 = np.broadcast_to(x_k, (P.shape[0], x_k.shape[0]))
        return flow_map(x0, u, tau)

    return ReachBound(
        center=x_k,
        horizon=T,
        kind="flow",
        space=MappedSpace(lo, hi, to_states, description=f"flow(T={T:g})"),
    )


def unicycle_arc(x: np.ndarray, u: np.ndarray, tau) -> np.ndarray:
    """Closed-form unicycle flow under constant (v, ω): a circular arc, with
    the ω→0 straight-line limit handled through sinc."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    tau = np.asarray(tau, dtype=float)
    u1, u2 = u[..., 0], u[..., 1]
    half = 0.5 * u2 * tau
    chord = u1 * tau * np.sinc(half / np.pi)
    ang = x[..., 2] + half
    return np.stack(
        [
            x[..., 0] + chord * np.cos(ang),
            x[..., 1] + chord * np.sin(ang),
            x[..., 2] + u2 * tau,
        ],
        axis=-1,
    )


def reach_exact_unicycle(x_k: np.ndarray, input_set: InputSet, T: float) -> ReachBound:
    """Exact reach cover for the unicycle via the closed-form arc."""
    x_k = np.asarray(x_k, dtype=float)
    m = input_set.dim
    lo = np.concatenate([input_set.lo, [0.0]])
    hi = np.concatenate([input_set.hi, [T]])

    def to_states(P):
        x0 = np.broadcast_to(x_k, (P.shape[0], 3))
        return unicycle_arc(x0, P[:, :m], P[:, m])

    return ReachBound(
        center=x_k,
        horizon=T,
        kind="flow",
        space=MappedSpace(lo, hi, to_states, description=f"arc(T={T:g})"),
    )


def sup_over_reach(
    fn: Callable,
    bound: ReachBound,
    input_set: Optional[InputSet] = None,
    config: SupConfig = SupConfig(),
) -> SupEstimate:
    """sup of ``fn`` over the reach bound, times the configured inflation.

    ``fn(z)`` for state functionals, ``fn(z, u)`` when ``input_set`` is
    given; non-finite samples (the excluded set Z) are discarded.
    """
    space = bound.space
    if input_set is None:
        def objective(P):
            X, ok = space.states_and_valid(P)
            v = np.asarray(fn(X), dtype=float)
            return np.where(ok, v, np.nan)

        return maximize(objective, space.lo, space.hi, config)

    m = input_set.dim
    lo = np.concatenate([space.lo, input_set.lo])
    hi = np.concatenate([space.hi, input_set.hi])
    d_space = space.dim

    def objective(P):
        X, ok = space.states_and_valid(P[:, :d_space])
        v = np.asarray(fn(X, P[:, d_space:]), dtype=float)
        return np.where(ok, v, np.nan)

    return maximize(objective, lo, hi, config)


def lipschitz_estimate(
    fn: Callable,
    space: SampleSpace,
    config: SupConfig,
    center: Optional[np.ndarray] = None,
    fd_step: float = 1e-6,
    guard: Optional[Callable] = None,
) -> SupEstimate:
    """Estimated Lipschitz constant of ``fn`` over the region: the sup of the
    finite-difference gradient norm (spectral norm for vector outputs),
    inflated.

    With ``center`` given, difference quotients |fn(z) − fn(center)|/||z −
    center|| over the sampled states are folded in, which keeps the estimate
    honest across derivative jumps that pointwise gradients cannot see.
    ``guard(x, scale)`` masks states whose FD stencil straddles the excluded
    set.
    """
    center_val = None if center is None else np.asarray(fn(np.asarray(center)[None]))[0]

    def objective(P):
        X, ok = space.states_and_valid(P)
        n = X.shape[-1]
        f0 = np.asarray(fn(X))
        grads = []
        for i in range(n):
            step = fd_step * (1.0 + np.abs(X[..., i]))
            xp = X.copy()
            xm = X.copy()
            xp[..., i] += step
            xm[..., i] -= step
            denom = (2.0 * step).reshape((-1,) + (1,) * (f0.ndim - 1))
            grads.append((np.asarray(fn(xp)) - np.asarray(fn(xm))) / denom)
        J = np.stack(grads, axis=-1)  # (N, n) or (N, k, n)
        finite = np.all(np.isfinite(J.reshape(J.shape[0], -1)), axis=1)
        val = np.full(J.shape[0], np.nan)
        if J.ndim == 2:
            val[finite] = np.linalg.norm(J[finite], axis=-1)
        elif np.any(finite):
            val[finite] = np.linalg.norm(J[finite], ord=2, axis=(-2, -1))
        if guard is not None:
            scale = fd_step * (1.0 + np.linalg.norm(X, axis=-1))
            val = np.where(guard(X, 2.0 * scale), np.nan, val)
        if center_val is not None:
            d = np.linalg.norm(X - np.asarray(center), axis=-1)
            diff = f0 - center_val
            if diff.ndim > 1:
                dq = np.linalg.norm(diff, axis=-1) / np.maximum(d, 1e-12)
            else:
                dq = np.abs(diff) / np.maximum(d, 1e-12)
            dq = np.where(d > 1e-9, dq, 0.0)
            val = np.maximum(val, dq)
        return np.where(ok, val, np.nan)

    return maximize(objective, space.lo, space.hi, config)
