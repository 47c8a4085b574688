"""
The PCR test: rank each sample's score among its counterfeits, bin the ranks
into L equal labels and test the label counts for uniformity.
"""
import logging
import math
from functools import partial
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from pcr.config import resolve_threads
from pcr.data import Dataset
from pcr.errors import DataError, DomainError, PcrError
from pcr.parallel import chunked, parallel_map
from pcr.randkit import RngStream, chi2_quantile, chi2_sf
from pcr.samplers import ConditionalSampler
from pcr.schemas import LabelCounts, PcrConfig, PcrResult, ThresholdKind, TieBreak
from pcr.scores import ScoreFunction

logger = logging.getLogger(__name__)

CountsLike = Union[LabelCounts, Sequence[int], np.ndarray]


def rank_among_counterfeits(original_score: float, counterfeit_scores, tie_break: str = TieBreak.LITERAL.value,
                            rng: Optional[np.random.Generator] = None) -> int:
    """
    R = 1 + #{i : T >= T~_i}.

    With ``tie_break="random"`` the counterfeits tied with the original are
    split uniformly at random instead, which keeps the rank uniform when
    scores can tie.
    """
    counterfeit_scores = np.asarray(counterfeit_scores, dtype=float).reshape(-1)
    if counterfeit_scores.size == 0:
        raise DomainError("at least one counterfeit score is required")
    if not (math.isfinite(original_score) and np.isfinite(counterfeit_scores).all()):
        raise DomainError("scores must be finite")
    if tie_break == TieBreak.LITERAL.value:
        return 1 + int(np.count_nonzero(original_score >= counterfeit_scores))
    if tie_break == TieBreak.RANDOM.value:
        if rng is None:
            raise DomainError("random tie-break needs a generator")
        ties = int(np.count_nonzero(original_score == counterfeit_scores))
        return 1 + int(np.count_nonzero(original_score > counterfeit_scores)) + int(rng.integers(0, ties + 1))
    raise DomainError(f"unknown tie_break '{tie_break}'")


def assign_label(rank: int, K: int, L: int) -> int:
    """Label of a rank: S_l = {(l-1)K + 1, ..., lK}."""
    if not 1 <= rank <= K * L:
        raise DomainError(f"rank {rank} outside [1, {K * L}]")
    return -(-rank // K)


def assign_labels(ranks: np.ndarray, K: int, L: int) -> np.ndarray:
    ranks = np.asarray(ranks, dtype=np.int64)
    if ranks.size and (ranks.min() < 1 or ranks.max() > K * L):
        raise DomainError(f"ranks must lie in [1, {K * L}]")
    return -(-ranks // K)


def counts_array(counts: CountsLike) -> np.ndarray:
    if isinstance(counts, LabelCounts):
        return np.asarray(counts.w, dtype=float)
    return np.asarray(counts, dtype=float).reshape(-1)


def pcr_statistic(counts: CountsLike, L: int) -> float:
    """U = (L/n) * sum_l (W_l - n/L)^2."""
    w = counts_array(counts)
    if w.size != L:
        raise DomainError(f"expected {L} label counts, got {w.size}")
    n = w.sum()
    if not n > 0:
        raise DomainError("label counts must sum to a positive n")
    return float(L / n * np.sum((w - n / L) ** 2))


def threshold(kind: str, L: int, alpha: float) -> float:
    if L < 2:
        raise DomainError(f"L must be at least 2, got {L}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if kind == ThresholdKind.FINITE.value:
        return L + math.sqrt(2.0 * L / alpha)
    if kind == ThresholdKind.ASYM.value:
        return chi2_quantile(1.0 - alpha, L - 1)
    raise DomainError(f"unknown threshold kind '{kind}' (expected finite or asym)")


def p_value_finite(U: float, L: int) -> float:
    if U <= L:
        return 1.0
    return min(1.0, 2.0 * L / (U - L) ** 2)


def p_value_asym(U: float, L: int) -> float:
    if L < 2:
        raise DomainError(f"L must be at least 2, got {L}")
    return chi2_sf(U, L - 1)


def _ranks_for_rows(rows: range, data: Dataset, sampler: ConditionalSampler, score: ScoreFunction, M: int,
                    seed: int, stream_prefix: Tuple, tie_break: str) -> np.ndarray:
    ranks = np.empty(len(rows), dtype=np.int64)
    for k, j in enumerate(rows):
        rng = RngStream.derive(seed, *stream_prefix, j).generator()
        x, y, z = data.x[j], data.y[j], data.z[j]
        try:
            counterfeits = sampler.draw_many(z, rng, M)
            original = float(score(x, y, z))
            counterfeit_scores = np.broadcast_to(np.asarray(score(counterfeits, y, z), dtype=float), (M,))
        except (PcrError, ValueError, TypeError, ArithmeticError) as e:
            raise DataError(f"sampler or score failed: {e}", sample_index=j) from e
        if not (math.isfinite(original) and np.isfinite(counterfeit_scores).all()):
            raise DataError("non-finite score", sample_index=j)
        ranks[k] = rank_among_counterfeits(original, counterfeit_scores, tie_break, rng)
    return ranks


def collect_ranks(data: Dataset, sampler: ConditionalSampler, score: ScoreFunction, M: int, seed: int,
                  stream_prefix: Tuple = (), tie_break: str = TieBreak.LITERAL.value,
                  n_jobs: Optional[int] = None) -> np.ndarray:
    """
    Rank of every sample among its M counterfeits. Sample j draws from
    stream (seed, *stream_prefix, j), so the ranks do not depend on how the
    rows are split across workers.
    """
    if M < 1:
        raise DomainError(f"M must be at least 1, got {M}")
    n_jobs = resolve_threads(n_jobs)
    chunks = chunked(data.n, 1 if n_jobs == 1 else 4 * max(n_jobs, 1))
    work = partial(_ranks_for_rows, data=data, sampler=sampler, score=score, M=M, seed=seed,
                   stream_prefix=tuple(stream_prefix), tie_break=tie_break)
    return np.concatenate(parallel_map(work, chunks, n_jobs=n_jobs))


def label_counts(labels: np.ndarray, L: int) -> np.ndarray:
    return np.bincount(np.asarray(labels, dtype=np.int64) - 1, minlength=L)


def summarize_counts(counts: np.ndarray, cfg: PcrConfig, seed: int, ranks: Optional[np.ndarray] = None,
                     labels: Optional[np.ndarray] = None) -> PcrResult:
    """Statistic, both p-values and the decision from a vector of label counts."""
    L = cfg.num_labels
    U = pcr_statistic(counts, L)
    theta = threshold(cfg.threshold_kind, L, cfg.alpha)
    return PcrResult(
        n=int(np.sum(counts)),
        L=L,
        K=cfg.counterfeit_ratio,
        alpha=cfg.alpha,
        counts=[int(c) for c in counts],
        U=U,
        p_finite=p_value_finite(U, L),
        p_asym=p_value_asym(U, L),
        threshold_kind=cfg.threshold_kind,
        threshold=theta,
        reject=U >= theta,
        seed=seed,
        ranks=None if ranks is None else ranks.tolist(),
        labels=None if labels is None else labels.tolist(),
    )


def run_pcr(data: Dataset, sampler: ConditionalSampler, score: ScoreFunction, cfg: PcrConfig, seed: int,
            stream_prefix: Tuple = (), n_jobs: Optional[int] = None) -> PcrResult:
    L, K = cfg.num_labels, cfg.counterfeit_ratio
    ranks = collect_ranks(data, sampler, score, cfg.num_counterfeits, seed, stream_prefix, cfg.tie_break, n_jobs)
    labels = assign_labels(ranks, K, L)
    counts = label_counts(labels, L)
    result = summarize_counts(counts, cfg, seed, ranks, labels)
    logger.debug("PCR n=%d L=%d K=%d counts=%s U=%.6g reject=%s", data.n, L, K, result.counts, result.U, result.reject)
    return result
