"""Generate-run-evaluate loops behind the `bench` command.

Each suite runs replicated synthetic experiments, scores every replicate
against the generator's ground truth, and aggregates per group (per
extras level for the polynomial toys, per sample size for the structural
models). Replicate seeds derive from the master seed by index, so any rep
can be reproduced in isolation.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .crp import CrpConfig, crp_run
from .errors import CovridgeError, NumericalError, UsageError
from .evalharness import AggregateSummary, EvalSummary, aggregate_replicates, evaluate_ranking
from .synthgen import (
    PolyToySpec,
    gen_poly_toy,
    gen_sem_model,
    markov_boundary_of,
    sample_sem,
)

TOY_EXTRAS_LEVELS = (1, 5, 15, 45, 95)
SEM_SAMPLE_SIZES = (50, 100, 200, 300, 400, 500)
_SUITE_FAMILY = {
    "toy-gaussian": "gaussian",
    "toy-beta22": "beta22",
    "toy-beta-random": "beta_random",
}
_FAILURE_FRACTION = 0.10


def derive_seed(*parts: int) -> int:
    """Collision-resistant 64-bit seed derived from an index path."""
    for part in parts:
        if part < 0:
            raise UsageError("seed path components must be >= 0")
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


def _aggregate_to_dict(agg: AggregateSummary) -> dict:
    return {
        "replicates": agg.replicates,
        "hit_rate": agg.hit_rate,
        "mean_tp": agg.mean_tp,
        "sd_tp": agg.sd_tp,
        "subset_rate": agg.subset_rate,
        "bucket_width": agg.bucket_width,
        "rank_histogram": list(agg.rank_histogram),
    }


def run_poly_suite(
    family: str,
    reps: int,
    seed: int,
    n: int = 1000,
    b: int = 500,
    extras_levels: Sequence[int] = TOY_EXTRAS_LEVELS,
    alpha_level: float = 0.05,
    cv_folds: int = 10,
) -> dict:
    """Polynomial toy suite: `reps` replicates at every extras level.

    Returns one group per level with its aggregate, plus the pooled
    per-replicate summaries under "summaries" keyed by level.
    """
    if reps < 1:
        raise UsageError("need at least 1 replicate")
    groups = []
    summaries_by_level: dict[int, list[EvalSummary]] = {}
    failures = 0
    total = 0
    for li, extras in enumerate(extras_levels):
        summaries: list[EvalSummary] = []
        for rep in range(reps):
            total += 1
            spec = PolyToySpec(
                family=family, extras=int(extras), n=n, seed=derive_seed(seed, li, rep, 0)
            )
            data, truth = gen_poly_toy(spec)
            config = CrpConfig(
                loss="mse",
                cv_folds=cv_folds,
                permutations=b,
                seed=derive_seed(seed, li, rep, 1),
                alpha_level=alpha_level,
            )
            try:
                report = crp_run(data, truth.target, config)
            except NumericalError:
                failures += 1
                continue
            summaries.append(
                evaluate_ranking(report, truth, h=len(truth.mb), replicate_id=rep)
            )
        if not summaries:
            raise NumericalError(f"every replicate failed at extras level {extras}")
        summaries_by_level[int(extras)] = summaries
        groups.append(
            {"extras": int(extras), "aggregate": _aggregate_to_dict(aggregate_replicates(summaries))}
        )
    if failures > _FAILURE_FRACTION * total:
        raise NumericalError(f"{failures} of {total} replicates failed (> 10% tolerated)")
    return {
        "suite": f"toy-{family}".replace("_", "-"),
        "groups": groups,
        "failed_replicates": failures,
        "summaries": summaries_by_level,
    }


def run_poly_suite_by_name(suite: str, **kwargs) -> dict:
    try:
        family = _SUITE_FAMILY[suite]
    except KeyError:
        raise UsageError(f"unknown toy suite {suite!r}") from None
    return run_poly_suite(family, **kwargs)


def run_sem_suite(
    reps: int,
    seed: int,
    p: int = 50,
    expected_degree: float = 2.0,
    b: int = 500,
    sizes: Sequence[int] = SEM_SAMPLE_SIZES,
    alpha_level: float = 0.05,
    cv_folds: int = 10,
) -> dict:
    """Structural-model suite: `reps` replicates at every sample size, scored
    by hit@h with h the true boundary size.

    Replicates whose response has an empty boundary cannot be scored (h >= 1)
    and are skipped; the count is reported per group.
    """
    if reps < 1:
        raise UsageError("need at least 1 replicate")
    groups = []
    summaries_by_size: dict[int, list[EvalSummary]] = {}
    failures = 0
    total = 0
    for si, size in enumerate(sizes):
        summaries: list[EvalSummary] = []
        empty_mb = 0
        for rep in range(reps):
            total += 1
            model = gen_sem_model(
                p, expected_degree, allow_cycles=True, seed=derive_seed(seed, si, rep, 0)
            )
            truth = markov_boundary_of(model.graph(), model.response, source="sem")
            if not truth.mb:
                empty_mb += 1
                continue
            data = sample_sem(model, int(size), derive_seed(seed, si, rep, 1))
            config = CrpConfig(
                loss="mse",
                cv_folds=cv_folds,
                permutations=b,
                seed=derive_seed(seed, si, rep, 2),
                alpha_level=alpha_level,
            )
            try:
                report = crp_run(data, truth.target, config)
            except NumericalError:
                failures += 1
                continue
            summaries.append(
                evaluate_ranking(report, truth, h=len(truth.mb), replicate_id=rep)
            )
        if not summaries:
            raise CovridgeError(f"no scorable replicates at sample size {size}")
        summaries_by_size[int(size)] = summaries
        groups.append(
            {
                "n": int(size),
                "aggregate": _aggregate_to_dict(aggregate_replicates(summaries)),
                "skipped_empty_boundary": empty_mb,
            }
        )
    if failures > _FAILURE_FRACTION * total:
        raise NumericalError(f"{failures} of {total} replicates failed (> 10% tolerated)")
    return {
        "suite": "sem",
        "groups": groups,
        "failed_replicates": failures,
        "summaries": summaries_by_size,
    }
