"""
Robust PCR for an approximate sampler.

The label counts are compared with the closest label distribution inside a
total-variation box of radius delta around uniform, instead of with uniform
itself. The inner problem is a separable QP over the simplex with a common
box, solved exactly through its single multiplier.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from pcr.data import Dataset
from pcr.errors import DomainError, NumericalError
from pcr.pcr_core import (
    CountsLike,
    assign_labels,
    collect_ranks,
    counts_array,
    label_counts,
    p_value_asym,
    p_value_finite,
    pcr_statistic,
    threshold,
)
from pcr.samplers import ConditionalSampler
from pcr.schemas import QpSolution, RobustConfig, RobustPcrResult
from pcr.scores import ScoreFunction

logger = logging.getLogger(__name__)

SUM_TOLERANCE = 1e-12
MAX_BISECTIONS = 200
KKT_TOLERANCE = 1e-10


def _project(targets: np.ndarray, mu: float, lower: float, upper: float) -> np.ndarray:
    return np.clip(targets + mu, lower, upper)


def solve_box_simplex_qp(targets, lower: float, upper: float) -> QpSolution:
    """
    min sum_s (t_s - p_s)^2  s.t.  lower <= p_s <= upper,  sum_s p_s = 1.

    The minimizer is p_s = clip(t_s + mu, lower, upper) for the multiplier mu
    at which the sum hits one. sum_s p_s(mu) is nondecreasing in mu, so mu is
    bracketed and bisected, then solved exactly over the unclamped set.
    """
    t = np.asarray(targets, dtype=float).reshape(-1)
    L = t.size
    if L == 0:
        raise DomainError("targets must not be empty")
    if not (lower <= upper and L * lower <= 1.0 + SUM_TOLERANCE and L * upper >= 1.0 - SUM_TOLERANCE):
        raise DomainError(f"box [{lower}, {upper}] has no point on the simplex for L={L}")

    lo_mu = lower - t.max()
    hi_mu = upper - t.min()
    mu = 0.5 * (lo_mu + hi_mu)
    for _ in range(MAX_BISECTIONS):
        mu = 0.5 * (lo_mu + hi_mu)
        excess = _project(t, mu, lower, upper).sum() - 1.0
        if abs(excess) <= SUM_TOLERANCE:
            break
        if excess > 0:
            hi_mu = mu
        else:
            lo_mu = mu
        if hi_mu - lo_mu <= 4 * np.finfo(float).eps * max(1.0, abs(mu)):
            break

    # exact multiplier on the free set found by bisection
    p = _project(t, mu, lower, upper)
    free = (t + mu > lower) & (t + mu < upper)
    if free.any():
        exact = (1.0 - p[~free].sum() - t[free].sum()) / free.sum()
        candidate = _project(t, exact, lower, upper)
        if abs(candidate.sum() - 1.0) <= abs(p.sum() - 1.0):
            mu, p = exact, candidate

    if abs(p.sum() - 1.0) > 1e-9:
        raise NumericalError("box-simplex QP did not reach the simplex", residual=float(p.sum() - 1.0))
    return QpSolution(p=p.tolist(), objective=float(np.sum((t - p) ** 2)), multiplier=float(mu))


def kkt_residual(solution: QpSolution, targets, lower: float, upper: float) -> float:
    """Largest violation of p = clip(t + mu, box) and of sum(p) = 1."""
    t = np.asarray(targets, dtype=float).reshape(-1)
    p = np.asarray(solution.p)
    stationarity = np.abs(p - _project(t, solution.multiplier, lower, upper)).max()
    return float(max(stationarity, abs(p.sum() - 1.0)))


def verify_kkt(solution: QpSolution, targets, lower: float, upper: float) -> float:
    """Raise ``DomainError`` unless the solution satisfies the KKT conditions to KKT_TOLERANCE."""
    residual = kkt_residual(solution, targets, lower, upper)
    if not residual <= KKT_TOLERANCE:
        raise DomainError(f"box-simplex QP solution violates KKT by {residual:.3g} "
                          f"(multiplier {solution.multiplier:.6g}, box [{lower:.6g}, {upper:.6g}])")
    return residual


def _box(L: int, delta: float) -> Tuple[float, float]:
    if delta < 0:
        raise DomainError(f"delta must be non-negative, got {delta}")
    return max(0.0, 1.0 / L - delta), 1.0 / L + delta


def robust_solve(counts: CountsLike, L: int, delta: float) -> Tuple[float, QpSolution]:
    """U(delta) together with the QP solution it came from."""
    w = counts_array(counts)
    if w.size != L:
        raise DomainError(f"expected {L} label counts, got {w.size}")
    n = w.sum()
    if not n > 0:
        raise DomainError("label counts must sum to a positive n")
    lower, upper = _box(L, delta)
    targets = w / n
    solution = solve_box_simplex_qp(targets, lower, upper)
    verify_kkt(solution, targets, lower, upper)
    # sum (W_s - n p_s)^2 = n^2 * objective
    U = L * n / (1.0 + L * delta) * solution.objective
    return float(U), solution


def robust_statistic(counts: CountsLike, L: int, delta: float) -> float:
    """U(delta) = min_p L / (n (1 + L delta)) * sum_s (W_s - n p_s)^2."""
    return robust_solve(counts, L, delta)[0]


def pinsker_delta_gaussian(eta: float) -> float:
    """
    TV bound between N(m, 1) and N(m, (1+eta)^2) from Pinsker's inequality
    and the Gaussian KL divergence.
    """
    if not eta > -1:
        raise DomainError(f"eta must exceed -1, got {eta}")
    s = 1.0 + eta
    kl = math.log(s) + 1.0 / (2.0 * s * s) - 0.5
    return math.sqrt(max(kl, 0.0) / 2.0)


def run_robust_pcr(data: Dataset, sampler_hat: ConditionalSampler, score: ScoreFunction, cfg: RobustConfig,
                   seed: int, stream_prefix: Tuple = (), n_jobs: Optional[int] = None) -> RobustPcrResult:
    """
    Labels are formed exactly as in run_pcr, with counterfeits from the
    approximate sampler; the statistic is U(delta) and the thresholds are
    unchanged.
    """
    L, K = cfg.num_labels, cfg.counterfeit_ratio
    ranks = collect_ranks(data, sampler_hat, score, cfg.num_counterfeits, seed, stream_prefix, cfg.tie_break, n_jobs)
    labels = assign_labels(ranks, K, L)
    counts = label_counts(labels, L)
    U, solution = robust_solve(counts, L, cfg.delta)
    theta = threshold(cfg.threshold_kind, L, cfg.alpha)
    logger.debug("robust PCR delta=%.6g counts=%s U=%.6g", cfg.delta, counts.tolist(), U)
    return RobustPcrResult(
        n=data.n,
        L=L,
        K=K,
        alpha=cfg.alpha,
        counts=[int(c) for c in counts],
        U=U,
        p_finite=p_value_finite(U, L),
        p_asym=p_value_asym(U, L),
        threshold_kind=cfg.threshold_kind,
        threshold=theta,
        reject=U >= theta,
        seed=seed,
        ranks=ranks.tolist(),
        labels=labels.tolist(),
        delta=cfg.delta,
        qp_objective=solution.objective,
        p_hat=solution.p,
        U_plain=pcr_statistic(counts, L),
    )
