"""
PCR over groups of samples. A seeded shuffle splits the first floor(n/g)*g
shuffled rows into groups of g; each group is scored by the mean of its
members' scores and ranked against the mean of its members' counterfeit
scores. With g = 1 this is exactly ``run_pcr``.
"""
import logging
from functools import partial
from typing import Optional, Tuple

import numpy as np

from pcr.config import resolve_threads
from pcr.data import Dataset
from pcr.errors import DataError, DomainError, PcrError
from pcr.parallel import chunked, parallel_map
from pcr.pcr_core import assign_labels, label_counts, rank_among_counterfeits, summarize_counts
from pcr.randkit import RngStream
from pcr.samplers import ConditionalSampler
from pcr.schemas import GroupedPcrConfig, GroupedPcrResult, PcrResult
from pcr.scores import ScoreFunction

logger = logging.getLogger(__name__)


def partition_groups(n: int, group_size: int, seed: int) -> Tuple[np.ndarray, int]:
    """
    (N, g) array of member indices, each row sorted and the rows ordered by
    their smallest member, plus the number of rows left over.
    """
    if group_size < 1:
        raise DomainError(f"group_size must be at least 1, got {group_size}")
    if n < group_size:
        raise DomainError(f"need at least group_size={group_size} samples, got {n}")
    order = RngStream.derive(seed, "groups").generator().permutation(n)
    n_groups = n // group_size
    groups = np.sort(order[:n_groups * group_size].reshape(n_groups, group_size), axis=1)
    groups = groups[np.argsort(groups[:, 0], kind="stable")]
    return groups, n - n_groups * group_size


def _group_ranks(rows: range, groups: np.ndarray, data: Dataset, sampler: ConditionalSampler, score: ScoreFunction,
                 M: int, seed: int, stream_prefix: Tuple, tie_break: str) -> np.ndarray:
    ranks = np.empty(len(rows), dtype=np.int64)
    for k, gi in enumerate(rows):
        members = groups[gi]
        original = 0.0
        counterfeit = np.zeros(M)
        tie_rng = None
        for j in members:
            rng = RngStream.derive(seed, *stream_prefix, int(j)).generator()
            if tie_rng is None:
                tie_rng = rng
            x, y, z = data.x[j], data.y[j], data.z[j]
            try:
                draws = sampler.draw_many(z, rng, M)
                original += float(score(x, y, z))
                counterfeit += np.broadcast_to(np.asarray(score(draws, y, z), dtype=float), (M,))
            except (PcrError, ValueError, TypeError, ArithmeticError) as e:
                raise DataError(f"sampler or score failed: {e}", sample_index=int(j)) from e
        if not (np.isfinite(original) and np.isfinite(counterfeit).all()):
            raise DataError("non-finite score", sample_index=int(members[0]))
        g = len(members)
        ranks[k] = rank_among_counterfeits(original / g, counterfeit / g, tie_break, tie_rng)
    return ranks


def grouped_pcr(data: Dataset, sampler: ConditionalSampler, score: ScoreFunction, cfg: GroupedPcrConfig, seed: int,
                stream_prefix: Tuple = (), n_jobs: Optional[int] = None,
                groups: Optional[np.ndarray] = None) -> PcrResult:
    """
    Member j of any group draws its M counterfeits from stream
    (seed, *stream_prefix, j), the same stream ``run_pcr`` gives sample j.
    ``result.n`` is the number of groups. ``groups`` takes a partition
    already computed by ``partition_groups`` for the same (n, g, seed).
    """
    if groups is None:
        groups, _ = partition_groups(data.n, cfg.group_size, seed)
    elif groups.ndim != 2 or groups.shape[1] != cfg.group_size or groups.size > data.n:
        raise DomainError(f"groups of shape {groups.shape} do not fit n={data.n}, group_size={cfg.group_size}")
    dropped = data.n - groups.size
    L, K = cfg.num_labels, cfg.counterfeit_ratio
    n_jobs = resolve_threads(n_jobs)
    chunks = chunked(len(groups), 1 if n_jobs == 1 else 4 * max(n_jobs, 1))
    work = partial(_group_ranks, groups=groups, data=data, sampler=sampler, score=score, M=cfg.num_counterfeits,
                   seed=seed, stream_prefix=tuple(stream_prefix), tie_break=cfg.tie_break)
    ranks = np.concatenate(parallel_map(work, chunks, n_jobs=n_jobs))
    labels = assign_labels(ranks, K, L)
    result = summarize_counts(label_counts(labels, L), cfg, seed, ranks, labels)
    logger.info("Grouped PCR: %d groups of %d (%d rows dropped), U=%.6g p_finite=%.4g p_asym=%.4g",
                len(groups), cfg.group_size, dropped, result.U, result.p_finite, result.p_asym)
    return result


def summarize_response(result: PcrResult, dropped: int = 0) -> GroupedPcrResult:
    return GroupedPcrResult(p_finite=result.p_finite, p_asym=result.p_asym, U=result.U, N_groups=result.n,
                            L=result.L, K=result.K, reject=result.reject, dropped=dropped)
