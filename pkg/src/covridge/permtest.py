"""Permutation p-values for per-variable coefficient statistics.

The observed fit at a fixed penalty yields, per variable, the absolute row
sum of the coefficients mapped back to original coordinates. Each of the b
permutations shuffles the target rows with its own RNG stream derived from
(seed, permutation index), refits at the same penalty, and recomputes the
statistic. p_j = (1 + #{b : s_j_b >= s_j}) / (1 + b).

Per-permutation streams are derived by index, never drawn sequentially, so
results are identical no matter how the work is scheduled. CRP_THREADS may
cap the worker count for iterative (multinomial) refits; it never changes
the output.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .covmat import SampleMatrix
from .errors import NumericalError, UsageError
from .solver import RidgeProblem, fit_ridge, _values
from .whiten import WhiteningTransform, unwhiten_coefficients

DEFAULT_PERMUTATIONS = 1000
_BATCH = 256
_FAILURE_FRACTION = 0.01


@dataclass(frozen=True)
class PermutationConfig:
    b: int = DEFAULT_PERMUTATIONS
    seed: int = 0
    statistic: str = "row_abs_sum"
    lambda_policy: str = "fixed_from_observed"

    def __post_init__(self) -> None:
        if self.b < 0:
            raise UsageError(f"permutation count must be >= 0, got {self.b}")
        if self.seed < 0:
            raise UsageError("seed must be >= 0")
        if self.statistic != "row_abs_sum":
            raise UsageError(f"unknown statistic {self.statistic!r}")
        if self.lambda_policy != "fixed_from_observed":
            raise UsageError(f"unknown lambda policy {self.lambda_policy!r}")


@dataclass
class PermutationResult:
    observed: np.ndarray
    exceed_counts: np.ndarray
    p_values: np.ndarray
    failed: int = 0


def row_abs_sum(beta: np.ndarray) -> np.ndarray:
    """Per-variable statistic: sum of absolute coefficients across outputs."""
    beta = np.asarray(beta, dtype=float)
    if beta.ndim == 1:
        return np.abs(beta)
    return np.abs(beta).sum(axis=1)


def permutation_stream(seed: int, index: int) -> np.random.Generator:
    """RNG stream for permutation `index`, a pure function of (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def permutation_pvalues(
    z: SampleMatrix | np.ndarray,
    target: np.ndarray,
    loss: str,
    lam: float,
    whitener: WhiteningTransform,
    config: PermutationConfig,
) -> PermutationResult:
    """Permutation p-values for every variable at the fixed penalty `lam`."""
    zv = _values(z)
    problem = RidgeProblem.build(zv, target, loss, lam)
    observed_fit = fit_ridge(problem)
    beta_observed = unwhiten_coefficients(whitener, observed_fit.gamma)
    s_observed = row_abs_sum(beta_observed)

    n, p = zv.shape
    counts = np.zeros(p, dtype=np.int64)
    failed = 0
    if config.b > 0:
        if loss == "mse":
            counts = _mse_permutation_counts(zv, problem.target, lam, whitener, s_observed, config)
        else:
            counts, failed = _multinomial_permutation_counts(
                zv, problem.target, problem.k, lam, whitener, s_observed, config
            )
        if failed > _FAILURE_FRACTION * config.b:
            raise NumericalError(
                f"{failed} of {config.b} permutation refits failed (> 1% tolerated)"
            )
    p_values = (1.0 + counts) / (1.0 + config.b)
    return PermutationResult(
        observed=s_observed,
        exceed_counts=counts,
        p_values=p_values,
        failed=failed,
    )


def _mse_permutation_counts(
    zv: np.ndarray,
    y: np.ndarray,
    lam: float,
    whitener: WhiteningTransform,
    s_observed: np.ndarray,
    config: PermutationConfig,
) -> np.ndarray:
    """Closed-form refits for all permutations, processed in fixed-size batches.

    Permuting y leaves its mean unchanged, so the centered permuted target is
    just the centered target reindexed; the Gram side of the normal equations
    never changes and one system with many right-hand sides covers a batch.
    """
    n, p = zv.shape
    zc = zv - zv.mean(axis=0)
    yc = y - y.mean()
    system = zc.T @ zc / n + lam * np.eye(p)
    counts = np.zeros(p, dtype=np.int64)
    for start in range(0, config.b, _BATCH):
        width = min(_BATCH, config.b - start)
        permuted = np.empty((n, width))
        for j in range(width):
            rng = permutation_stream(config.seed, start + j)
            permuted[:, j] = yc[rng.permutation(n)]
        cross = zc.T @ permuted / n
        try:
            gammas = np.linalg.solve(system, cross)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"permutation refit failed: {exc}") from exc
        betas = whitener.w @ gammas
        counts += (np.abs(betas) >= s_observed[:, None]).sum(axis=1)
    return counts


def _worker_count(b: int) -> int:
    env = os.environ.get("CRP_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise UsageError(f"CRP_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise UsageError(f"CRP_THREADS must be >= 1, got {cap}")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, b))


def _multinomial_permutation_counts(
    zv: np.ndarray,
    labels: np.ndarray,
    k: int,
    lam: float,
    whitener: WhiteningTransform,
    s_observed: np.ndarray,
    config: PermutationConfig,
) -> tuple[np.ndarray, int]:
    n, p = zv.shape

    def one(index: int) -> tuple[np.ndarray, int]:
        rng = permutation_stream(config.seed, index)
        shuffled = labels[rng.permutation(n)]
        try:
            fit = fit_ridge(RidgeProblem.build(zv, shuffled, "multinomial", lam))
        except NumericalError:
            return np.zeros(p, dtype=np.int64), 1
        stats = row_abs_sum(unwhiten_coefficients(whitener, fit.gamma))
        return (stats >= s_observed).astype(np.int64), 0 if fit.converged else 1

    workers = _worker_count(config.b)
    counts = np.zeros(p, dtype=np.int64)
    failed = 0
    if workers == 1:
        results = map(one, range(config.b))
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(one, range(config.b))
    for exceed, bad in results:
        counts += exceed
        failed += bad
    if workers > 1:
        pool.shutdown()
    return counts, failed
