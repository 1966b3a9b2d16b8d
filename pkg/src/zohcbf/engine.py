"""Supremum estimation over boxed parameter spaces.

Strategy: a scrambled Sobol sweep over the parameter box, NaN samples
discarded (they mark the excluded measure-zero set or points outside an
implicit region), then vectorized coordinate ascent from the best samples,
and finally a multiplicative inflation factor to make the conservatism of
the estimate explicit. Deterministic for a fixed seed, regardless of the
worker count: sample indices are assigned before evaluation and workers only
split the evaluation of a fixed batch.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

__all__ = ["SupConfig", "SupEstimate", "maximize", "LOCAL_SUP_CONFIG"]


@dataclass(frozen=True)
class SupConfig:
    budget: int = 4096
    refine_rounds: int = 8
    top_k: int = 16
    inflation: float = 1.05
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.budget < 1 or self.refine_rounds < 0 or self.top_k < 1:
            raise ValueError("invalid sup-engine configuration")
        if self.inflation < 1.0:
            raise ValueError("inflation factor must be >= 1")


# cheaper settings for the per-step local margins inside the simulator
LOCAL_SUP_CONFIG = SupConfig(budget=256, refine_rounds=3, top_k=8)


@dataclass(frozen=True)
class SupEstimate:
    value: float
    raw_value: float
    argmax: np.ndarray
    n_samples: int
    refinement_rounds: int
    inflation: float
    n_rejected: int = 0
    wall_time: float = 0.0

    def __float__(self):
        return self.value


def _sobol(dim: int, n: int, seed: int) -> np.ndarray:
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    m = int(np.ceil(np.log2(max(n, 2))))
    pts = sampler.random_base2(m=m)
    return pts[:n]


def _eval_chunked(fn: Callable, P: np.ndarray, workers: int) -> np.ndarray:
    if workers <= 1 or P.shape[0] < 2048:
        return np.asarray(fn(P), dtype=float)
    chunks = np.array_split(np.arange(P.shape[0]), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda idx: np.asarray(fn(P[idx]), dtype=float), chunks))
    return np.concatenate(parts)


def maximize(
    fn: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    config: SupConfig,
    extra_points: Optional[np.ndarray] = None,
) -> SupEstimate:
    """Estimate sup of ``fn`` over the box [lo, hi].

    ``fn`` maps a parameter batch (N, d) to values (N,); NaN entries are
    discarded. ``extra_points`` are deterministic candidates (e.g. corners)
    appended to the Sobol sweep. Raises if every sample is non-finite.
    """
    t0 = time.perf_counter()
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    d = lo.shape[0]
    span = hi - lo

    unit = _sobol(d, config.budget, config.seed)
    P = lo + unit * span
    if extra_points is not None and len(extra_points):
        P = np.concatenate([P, np.asarray(extra_points, dtype=float)], axis=0)

    v = _eval_chunked(fn, P, config.workers)
    finite = np.isfinite(v)
    n_rejected = int(np.sum(~finite))
    if not np.any(finite):
        raise ValueError(
            "sup estimation failed: all samples were non-finite "
            f"(first sample {P[0]!r})"
        )
    v_masked = np.where(finite, v, -np.inf)

    k = min(config.top_k, int(np.sum(finite)))
    top = np.argsort(v_masked)[-k:]
    X = P[top].copy()
    best = v_masked[top].copy()

    # coordinate ascent, vectorized over the candidate set; step halves when
    # a full sweep yields no improvement for a candidate
    step = 0.25 * np.where(span > 0, span, 1.0)
    steps = np.tile(step, (k, 1))
    for _ in range(config.refine_rounds):
        improved = np.zeros(k, dtype=bool)
        for i in range(d):
            for sgn in (1.0, -1.0):
                Xt = X.copy()
                Xt[:, i] = np.clip(Xt[:, i] + sgn * steps[:, i], lo[i], hi[i])
                vt = np.asarray(fn(Xt), dtype=float)
                vt = np.where(np.isfinite(vt), vt, -np.inf)
                gain = vt > best
                X[gain] = Xt[gain]
                best = np.where(gain, vt, best)
                improved |= gain
        steps[~improved] *= 0.5

    i_best = int(np.argmax(best))
    raw = float(best[i_best])
    return SupEstimate(
        value=raw * config.inflation if raw > 0 else raw / config.inflation
        if raw < 0
        else 0.0,
        raw_value=raw,
        argmax=X[i_best],
        n_samples=int(P.shape[0]),
        refinement_rounds=config.refine_rounds,
        inflation=config.inflation,
        n_rejected=n_rejected,
        wall_time=time.perf_counter() - t0,
    )


def with_seed(config: SupConfig, seed: int) -> SupConfig:
    return replace(config, seed=seed)
