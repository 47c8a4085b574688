"""
Parameter-free PCR: run the test for every L in a grid and combine the
p-values with a Bonferroni correction.
"""
import logging
from typing import Optional, Sequence

from pcr.data import Dataset
from pcr.errors import DomainError
from pcr.pcr_core import (
    assign_labels,
    collect_ranks,
    label_counts,
    p_value_asym,
    p_value_finite,
    pcr_statistic,
    run_pcr,
)
from pcr.samplers import ConditionalSampler
from pcr.schemas import PcrConfig, PfEntry, PfResult, ThresholdKind
from pcr.scores import ScoreFunction

logger = logging.getLogger(__name__)

DEFAULT_GRID = (2, 4, 8, 16, 32)


def _check_grid(grid: Sequence[int]) -> list:
    grid = [int(L) for L in grid]
    if not grid:
        raise DomainError("the grid of L values must not be empty")
    if min(grid) < 2:
        raise DomainError(f"every L in the grid must be at least 2, got {grid}")
    if len(set(grid)) != len(grid):
        raise DomainError(f"grid entries must be distinct, got {grid}")
    # canonical order, so run i always means the i-th smallest L
    return sorted(grid)


def _p_value(U: float, L: int, p_kind: str) -> float:
    if p_kind == ThresholdKind.FINITE.value:
        return p_value_finite(U, L)
    if p_kind == ThresholdKind.ASYM.value:
        return p_value_asym(U, L)
    raise DomainError(f"unknown p_kind '{p_kind}' (expected finite or asym)")


def _shared_entries(data, sampler, score, K, grid, seed, p_kind, n_jobs):
    total = K * max(grid)
    uneven = [L for L in grid if total % L]
    if uneven:
        raise DomainError(f"shared counterfeits need every L to divide K*max(grid)={total}; {uneven} do not")
    ranks = collect_ranks(data, sampler, score, total - 1, seed, ("shared",), n_jobs=n_jobs)
    entries = []
    for L in grid:
        counts = label_counts(assign_labels(ranks, total // L, L), L)
        U = pcr_statistic(counts, L)
        entries.append(PfEntry(L=L, U=U, p=_p_value(U, L, p_kind)))
    return entries


def run_parameter_free(data: Dataset, sampler: ConditionalSampler, score: ScoreFunction, K: int,
                       grid: Sequence[int] = DEFAULT_GRID, alpha: float = 0.1,
                       p_kind: str = ThresholdKind.FINITE.value, seed: int = 0, shared: bool = False,
                       n_jobs: Optional[int] = None) -> PfResult:
    """
    P* = min(1, N * min_i p_i); reject when P* <= alpha.

    Each L_i gets fresh counterfeits from streams (seed, i, j). With
    ``shared=True`` one draw of K*max(grid) - 1 counterfeits per sample is
    relabelled for every L_i instead; that mode is for cost studies only.
    """
    grid = _check_grid(grid)
    if K < 1:
        raise DomainError(f"K must be at least 1, got {K}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")

    if shared:
        entries = _shared_entries(data, sampler, score, K, grid, seed, p_kind, n_jobs)
    else:
        entries = []
        for i, L in enumerate(grid):
            cfg = PcrConfig(num_labels=L, counterfeit_ratio=K, alpha=alpha, threshold_kind=p_kind)
            result = run_pcr(data, sampler, score, cfg, seed, stream_prefix=(i,), n_jobs=n_jobs)
            entries.append(PfEntry(L=L, U=result.U, p=_p_value(result.U, L, p_kind)))

    p_star = min(1.0, len(grid) * min(e.p for e in entries))
    logger.debug("parameter-free PCR grid=%s p=%s p_star=%.6g", grid, [e.p for e in entries], p_star)
    return PfResult(grid=grid, per_l=entries, p_star=p_star, reject=p_star <= alpha)
