"""Core abstractions: control-affine dynamics, barrier functions, class-K
functions, and box input sets.

Every callable here is *batched*: a state argument has shape ``(..., n)`` and
scalar results come back with shape ``(...,)``. Points where a barrier or its
derivatives are undefined are signalled with NaN so that sampling-based
consumers can discard them; the scalar entry points (`lie_derivatives`,
`hdot`) convert NaN into an exception instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "NondifferentiablePointError",
    "InputSet",
    "DynamicsModel",
    "Barrier",
    "ClassK",
    "LinearClassK",
    "SafeSet",
    "fd_gradient",
    "fd_jacobian_states",
    "default_psi",
    "lie_derivatives",
    "hdot",
]


class NondifferentiablePointError(ValueError):
    """Raised when a derivative is requested at a point of the exclusion set."""


def _as_batch(x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


@dataclass(frozen=True)
class InputSet:
    """Axis-aligned box of admissible inputs.

    Covers both case studies: per-component interval bounds and an
    infinity-norm ball. ``u_max`` is the exact maximal 2-norm over the box,
    which is attained at a corner.
    """

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1-D arrays of equal length")
        if np.any(lo > hi):
            raise ValueError("input box is empty: lo > hi on some component")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def u_max(self) -> float:
        # max ||u||_2 over a box decomposes per component
        return float(np.sqrt(np.sum(np.maximum(self.lo**2, self.hi**2))))

    def corners(self) -> np.ndarray:
        """All 2^m corners, shape (2^m, m)."""
        m = self.dim
        bits = np.array(
            [[(k >> i) & 1 for i in range(m)] for k in range(2**m)], dtype=float
        )
        return self.lo + bits * (self.hi - self.lo)

    def contains(self, u: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.all((u >= self.lo - tol) & (u <= self.hi + tol), axis=-1)

    def clip(self, u: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(u, dtype=float), self.lo, self.hi)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))


def fd_gradient(fn: Callable, x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of a batched scalar function.

    Step per coordinate is ``rel_step * (1 + |x_i|)``.
    """
    x, single = _as_batch(x)
    n = x.shape[-1]
    g = np.empty_like(x)
    for i in range(n):
        step = rel_step * (1.0 + np.abs(x[..., i]))
        xp = x.copy()
        xm = x.copy()
        xp[..., i] += step
        xm[..., i] -= step
        g[..., i] = (np.asarray(fn(xp)) - np.asarray(fn(xm))) / (2.0 * step)
    return g[0] if single else g


def fd_jacobian_states(fn: Callable, x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of a batched vector function.

    ``fn`` maps (..., n) -> (..., k); the result has shape (..., k, n).
    """
    x, single = _as_batch(x)
    n = x.shape[-1]
    cols = []
    for i in range(n):
        step = rel_step * (1.0 + np.abs(x[..., i]))
        xp = x.copy()
        xm = x.copy()
        xp[..., i] += step
        xm[..., i] -= step
        cols.append((np.asarray(fn(xp)) - np.asarray(fn(xm))) / (2.0 * step)[..., None])
    J = np.stack(cols, axis=-1)
    return J[0] if single else J


@dataclass(frozen=True)
class DynamicsModel:
    """Control-affine system ``xdot = f(x) + g(x) u``.

    ``f`` maps (..., n) -> (..., n); ``g`` maps (..., n) -> (..., n, m).
    Jacobians default to central finite differences. ``lipschitz_f`` and
    ``lipschitz_g`` are optional bounds over a declared working domain,
    consumed by the closed-form reachability bound.
    """

    dim_state: int
    dim_input: int
    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    jac_f: Optional[Callable[[np.ndarray], np.ndarray]] = None
    jac_g: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lipschitz_f: Optional[float] = None
    lipschitz_g: Optional[float] = None

    def __post_init__(self):
        if self.dim_state <= 0 or self.dim_input <= 0:
            raise ValueError("state and input dimensions must be positive")
        if self.jac_f is None:
            object.__setattr__(
                self, "jac_f", lambda x: fd_jacobian_states(self.f, x)
            )
        if self.jac_g is None:
            # column-stacked Jacobian of vec(g); adequate for Lipschitz probing
            def _jac_g(x):
                def flat_g(y):
                    G = np.asarray(self.g(y))
                    return G.reshape(G.shape[:-2] + (-1,))

                return fd_jacobian_states(flat_g, x)

            object.__setattr__(self, "jac_g", _jac_g)

    def xdot(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """f(x) + g(x) u, batched over leading dimensions."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        fx = np.asarray(self.f(x))
        gx = np.asarray(self.g(x))
        if x.ndim == 1 and u.ndim == 1:
            return fx + gx @ u
        return fx + np.einsum("...nm,...m->...n", gx, np.broadcast_to(u, x.shape[:-1] + (self.dim_input,)))


@dataclass(frozen=True)
class Barrier:
    """Scalar constraint function; the safe set is ``h(x) <= 0``.

    ``grad_h`` is defined almost everywhere; ``psi(x, u)`` is the derivative
    of ``hdot`` along the constant-input flow (the curvature of h between
    samples) and may be a finite-difference default built from ``grad_h``.
    ``nondiff_guard(x, scale)`` returns a boolean mask marking states within
    ``scale`` of the exclusion set Z, where derivative estimates must be
    discarded rather than trusted.
    """

    h: Callable[[np.ndarray], np.ndarray]
    grad_h: Callable[[np.ndarray], np.ndarray]
    psi: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    nondiff_set_description: str = "empty"
    nondiff_guard: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    name: str = "h"

    def guard_mask(self, x: np.ndarray, scale: float) -> np.ndarray:
        """True where x is too close to the nondifferentiable set."""
        if self.nondiff_guard is None:
            x = np.asarray(x, dtype=float)
            return np.zeros(x.shape[:-1], dtype=bool)
        return self.nondiff_guard(x, scale)


def default_psi(model: DynamicsModel, barrier: Barrier, rel_step: float = 1e-6):
    """Finite-difference curvature ψ(x,u): directional derivative of hdot
    along the closed-loop vector field, with crossings of the exclusion set
    reported as NaN."""

    def psi(x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        v = model.xdot(x, u)
        speed = np.linalg.norm(v, axis=-1)
        sp = np.maximum(speed, 1e-12)
        step = (rel_step / sp)[..., None]
        xp = x + step * v
        xm = x - step * v

        def hd(y):
            grad = np.asarray(barrier.grad_h(y))
            return np.einsum("...n,...n->...", grad, model.xdot(y, u))

        out = (hd(xp) - hd(xm)) / (2.0 * rel_step) * sp
        bad = barrier.guard_mask(xp, rel_step) | barrier.guard_mask(xm, rel_step)
        return np.where(bad, np.nan, out)

    return psi


@dataclass(frozen=True)
class ClassK:
    """Extended class-K function: continuous, strictly increasing, alpha(0)=0.

    ``alpha_inv`` defaults to a bisection inverse on [0, 1e12].
    ``local_slope_bound`` is a Γ with alpha(λ) <= Γλ near 0, used by the
    physical-margin analysis. ``lipschitz_of_alpha_comp_h`` may be set to a
    callable (barrier, region, config) -> float; when absent the margin
    machinery falls back to a generic estimate of Lip(alpha(-h)).
    """

    alpha: Callable[[np.ndarray], np.ndarray]
    alpha_inv: Optional[Callable[[float], float]] = None
    local_slope_bound: Optional[float] = None
    lipschitz_of_alpha_comp_h: Optional[Callable] = None
    name: str = "alpha"

    def __call__(self, lam):
        return self.alpha(np.asarray(lam, dtype=float))

    def inverse(self, v: float) -> float:
        if self.alpha_inv is not None:
            return float(self.alpha_inv(v))
        return _bisect_inverse(self.alpha, float(v))


def _bisect_inverse(alpha, v: float, tol: float = 1e-12) -> float:
    if v == 0.0:
        return 0.0
    sign = 1.0 if v > 0 else -1.0
    hi = sign
    # expand until alpha(hi) brackets v
    for _ in range(200):
        if sign * float(alpha(hi)) >= sign * v:
            break
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sign * float(alpha(mid)) < sign * v:
            lo = mid
        else:
            hi = mid
        if abs(hi - lo) < tol * (1.0 + abs(hi)):
            break
    return 0.5 * (lo + hi)


def LinearClassK(slope: float = 1.0) -> ClassK:
    """alpha(λ) = slope·λ with exact inverse."""
    if slope <= 0:
        raise ValueError("class-K slope must be positive")
    return ClassK(
        alpha=lambda lam: slope * np.asarray(lam, dtype=float),
        alpha_inv=lambda v: v / slope,
        local_slope_bound=slope,
        name=f"linear({slope:g})",
    )


@dataclass(frozen=True)
class SafeSet:
    """h(x) <= 0 intersected with an axis-aligned working box.

    A bounded working domain is mandatory: global suprema are only meaningful
    over a compact set, and neither case study has a compact safe set on its
    own.
    """

    barrier: Barrier
    domain_lo: np.ndarray
    domain_hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.domain_lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.domain_hi, dtype=float))
        if np.any(lo > hi):
            raise ValueError("working domain box is empty")
        object.__setattr__(self, "domain_lo", lo)
        object.__setattr__(self, "domain_hi", hi)

    def contains(self, x: np.ndarray, tol: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside_box = np.all(
            (x >= self.domain_lo - tol) & (x <= self.domain_hi + tol), axis=-1
        )
        hval = np.asarray(self.barrier.h(x))
        return inside_box & np.isfinite(hval) & (hval <= tol)


def lie_derivatives(model: DynamicsModel, barrier: Barrier, x: np.ndarray):
    """(L_f h, L_g h) at x. ``L_f h`` has shape (...,), ``L_g h`` (..., m).

    hdot = L_f h + L_g h · u for any constant u. Non-finite output means the
    state sits on the nondifferentiable set and is rejected.
    """
    x = np.asarray(x, dtype=float)
    grad = np.asarray(barrier.grad_h(x))
    fx = np.asarray(model.f(x))
    gx = np.asarray(model.g(x))
    Lf = np.einsum("...n,...n->...", grad, fx)
    Lg = np.einsum("...n,...nm->...m", grad, gx)
    if x.ndim == 1:
        if not (np.isfinite(Lf) and np.all(np.isfinite(Lg))):
            raise NondifferentiablePointError(
                f"barrier derivatives are not finite at state {x!r}"
            )
        return float(Lf), Lg
    return Lf, Lg


def hdot(model: DynamicsModel, barrier: Barrier, x: np.ndarray, u: np.ndarray):
    """Time derivative of h under constant input u."""
    Lf, Lg = lie_derivatives(model, barrier, x)
    u = np.asarray(u, dtype=float)
    val = Lf + np.einsum("...m,...m->...", Lg, np.broadcast_to(u, np.shape(Lg)))
    if np.ndim(val) == 0:
        return float(val)
    return val
