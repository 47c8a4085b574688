"""
The conditional randomization test: rank the whole-dataset score among the
scores of M counterfeit datasets and read the normalized rank as a p-value.
"""
import logging
from fractions import Fraction
from functools import partial
from typing import Optional, Tuple

import numpy as np

from pcr.config import resolve_threads
from pcr.data import Dataset
from pcr.errors import DataError, DomainError, PcrError
from pcr.parallel import chunked, parallel_map
from pcr.randkit import RngStream
from pcr.samplers import ConditionalSampler
from pcr.schemas import CrtResult
from pcr.scores import DatasetScore, squared_distance_score

logger = logging.getLogger(__name__)

SIDES = ("one_lower", "one_upper", "two")


def crt_p(original_dataset_score: float, counterfeit_dataset_scores) -> Fraction:
    """p = (1 + #{j : T(D) >= T(D~_j)}) / (M + 1), kept exact."""
    scores = np.asarray(counterfeit_dataset_scores, dtype=float).reshape(-1)
    if scores.size == 0:
        raise DomainError("at least one counterfeit dataset score is required")
    return Fraction(1 + int(np.count_nonzero(original_dataset_score >= scores)), scores.size + 1)


def _as_fraction(alpha: float) -> Fraction:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    # the decimal the user typed, not its binary neighbour
    return Fraction(repr(float(alpha)))


def crt_decide(p: Fraction, alpha: float, sided: str) -> bool:
    a = _as_fraction(alpha)
    p = Fraction(p)
    if sided == "one_lower":
        return p <= a
    if sided == "one_upper":
        return p >= 1 - a
    if sided == "two":
        return p <= a / 2 or p >= 1 - a / 2
    raise DomainError(f"unknown side '{sided}' (expected one of {', '.join(SIDES)})")


def _counterfeit_scores(indices: range, data: Dataset, sampler: ConditionalSampler, dataset_score: DatasetScore,
                        seed: int, stream_prefix: Tuple) -> np.ndarray:
    out = np.empty(len(indices))
    for k, j in enumerate(indices):
        rng = RngStream.derive(seed, *stream_prefix, j).generator()
        try:
            x_tilde = sampler.draw_rows(data.z, rng)
            out[k] = dataset_score.score(x_tilde, data.y, data.z)
        except (PcrError, ValueError, TypeError, ArithmeticError) as e:
            raise DataError(f"counterfeit dataset {j} failed: {e}") from e
        if not np.isfinite(out[k]):
            raise DataError(f"non-finite score for counterfeit dataset {j}")
    return out


def run_crt(data: Dataset, sampler: ConditionalSampler, dataset_score: Optional[DatasetScore] = None, M: int = 1000,
            seed: int = 0, alpha: float = 0.1, stream_prefix: Tuple = (),
            n_jobs: Optional[int] = None) -> CrtResult:
    """
    Redraw the whole X column M times (counterfeit dataset j uses stream
    (seed, *stream_prefix, j)) and compare dataset scores. The default score
    is ||Y - X||^2.
    """
    if M < 1:
        raise DomainError(f"M must be at least 1, got {M}")
    dataset_score = dataset_score or squared_distance_score()
    original = dataset_score.score(data.x, data.y, data.z)
    if not np.isfinite(original):
        raise DataError("non-finite score for the observed dataset")

    n_jobs = resolve_threads(n_jobs)
    chunks = chunked(M, 1 if n_jobs == 1 else 4 * max(n_jobs, 1))
    work = partial(_counterfeit_scores, data=data, sampler=sampler, dataset_score=dataset_score, seed=seed,
                   stream_prefix=tuple(stream_prefix))
    counterfeits = np.concatenate(parallel_map(work, chunks, n_jobs=n_jobs))

    p = crt_p(original, counterfeits)
    logger.debug("CRT M=%d p=%s", M, p)
    return CrtResult(
        M=M,
        p_num=p.numerator * ((M + 1) // p.denominator),
        p_den=M + 1,
        reject_one_lower=crt_decide(p, alpha, "one_lower"),
        reject_one_upper=crt_decide(p, alpha, "one_upper"),
        reject_two=crt_decide(p, alpha, "two"),
    )

