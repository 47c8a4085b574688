"""
Reproducible random streams and the special functions the test statistics need.

Streams are counter-based (Philox) and keyed by ``(seed, stream_id)``, where the
stream id is a hash of a path such as ``(sample_index,)`` or ``("data", replicate)``.
Two streams with the same key always produce the same sequence, no matter which
worker draws from them or in which order.
"""
import hashlib
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import special
from scipy.optimize import brentq

from pcr.errors import DomainError, NumericalError

MAX_ITERATIONS = 500
EPSILON = 1e-15
POISSON_TAIL = 1e-14

_MASK64 = (1 << 64) - 1


def _hash_path(path: tuple) -> int:
    digest = hashlib.blake2b(repr(path).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class RngStream:
    """A value-like handle on one independent random stream."""

    seed: int
    stream_id: int

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64 and 0 <= self.stream_id <= _MASK64):
            raise DomainError("seed and stream_id must be unsigned 64-bit integers")

    @classmethod
    def derive(cls, seed: int, *path: Union[int, str]) -> "RngStream":
        return cls(seed & _MASK64, _hash_path(tuple(path)))

    def child(self, *path: Union[int, str]) -> "RngStream":
        return RngStream(self.seed, _hash_path((self.stream_id,) + tuple(path)))

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.Philox(key=(self.seed << 64) | self.stream_id))


@dataclass(frozen=True)
class Chi2Params:
    dof: float
    noncentrality: float = 0.0

    def __post_init__(self):
        if not self.dof > 0:
            raise DomainError(f"chi-squared dof must be positive, got {self.dof}")
        if not self.noncentrality >= 0:
            raise DomainError(f"noncentrality must be non-negative, got {self.noncentrality}")


def normal_cdf(x):
    """Standard Gaussian cdf; saturates at 0 and 1 in the tails."""
    return special.ndtr(x)


def normal_quantile(p):
    return special.ndtri(p)


def _gamma_series(s: float, x: float) -> float:
    # P(s, x) by the power series, valid for x < s + 1
    term = 1.0 / s
    total = term
    a = s
    for _ in range(MAX_ITERATIONS):
        a += 1.0
        term *= x / a
        total += term
        if abs(term) < abs(total) * EPSILON:
            return total * math.exp(-x + s * math.log(x) - special.gammaln(s))
    raise NumericalError("incomplete gamma series did not converge", s=s, x=x)


def _gamma_continued_fraction(s: float, x: float) -> float:
    # Q(s, x) by modified Lentz, valid for x >= s + 1
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITERATIONS + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPSILON:
            return math.exp(-x + s * math.log(x) - special.gammaln(s)) * h
    raise NumericalError("incomplete gamma continued fraction did not converge", s=s, x=x)


def reg_lower_gamma(s: float, x: float) -> float:
    """Regularized lower incomplete gamma P(s, x)."""
    if not s > 0:
        raise DomainError(f"shape must be positive, got {s}")
    if x < 0 or math.isnan(x):
        raise DomainError(f"x must be non-negative, got {x}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < s + 1.0:
        return min(1.0, _gamma_series(s, x))
    return max(0.0, 1.0 - _gamma_continued_fraction(s, x))


def reg_upper_gamma(s: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x)."""
    if not s > 0:
        raise DomainError(f"shape must be positive, got {s}")
    if x < 0 or math.isnan(x):
        raise DomainError(f"x must be non-negative, got {x}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return max(0.0, 1.0 - _gamma_series(s, x))
    return min(1.0, _gamma_continued_fraction(s, x))


def _as_params(params: Union[Chi2Params, float, int]) -> Chi2Params:
    return params if isinstance(params, Chi2Params) else Chi2Params(float(params))


def _poisson_mixture(x: float, params: Chi2Params, term) -> float:
    # sum_j Poisson(lambda/2)(j) * term(dof + 2j), stopped once the unvisited mass is negligible
    mu = params.noncentrality / 2.0
    total = 0.0
    j = 0
    while True:
        weight = math.exp(j * math.log(mu) - mu - special.gammaln(j + 1)) if mu > 0 else float(j == 0)
        total += weight * term(params.dof / 2.0 + j, x / 2.0)
        # past the mode the remaining Poisson mass is at most weight * (j+2)/(j+2-mu)
        if j + 1 > mu and weight * (j + 2) / (j + 2 - mu) < POISSON_TAIL:
            return total
        j += 1
        if j > mu + 50 * math.sqrt(mu) + 1000:
            raise NumericalError("noncentral chi-squared series did not converge", x=x, noncentrality=params.noncentrality)


def chi2_cdf(x: float, params: Union[Chi2Params, float, int]) -> float:
    """(Noncentral) chi-squared cdf; the central case is P(dof/2, x/2)."""
    params = _as_params(params)
    if x <= 0:
        return 0.0
    if params.noncentrality == 0:
        return reg_lower_gamma(params.dof / 2.0, x / 2.0)
    return min(1.0, _poisson_mixture(x, params, reg_lower_gamma))


def chi2_sf(x: float, params: Union[Chi2Params, float, int]) -> float:
    """Upper tail 1 - chi2_cdf, computed without cancellation."""
    params = _as_params(params)
    if x <= 0:
        return 1.0
    if params.noncentrality == 0:
        return reg_upper_gamma(params.dof / 2.0, x / 2.0)
    return min(1.0, _poisson_mixture(x, params, reg_upper_gamma))


def chi2_pdf(x: float, dof: float) -> float:
    if x <= 0:
        return 0.0
    k = dof / 2.0
    return math.exp((k - 1.0) * math.log(x) - x / 2.0 - k * math.log(2.0) - special.gammaln(k))


def chi2_quantile(p: float, params: Union[Chi2Params, float, int]) -> float:
    """Central chi-squared quantile by bracketing, Brent's root and a Newton polish."""
    params = _as_params(params)
    if params.noncentrality != 0:
        raise DomainError("chi2_quantile is defined for the central distribution only")
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")

    def excess(t: float) -> float:
        return chi2_cdf(t, params) - p

    hi = max(params.dof, 1.0)
    for _ in range(200):
        if excess(hi) >= 0:
            break
        hi *= 2.0
    else:
        raise NumericalError("could not bracket chi-squared quantile", p=p, dof=params.dof)
    root = brentq(excess, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=MAX_ITERATIONS)

    for _ in range(3):
        density = chi2_pdf(root, params.dof)
        if density <= 0:
            break
        step = excess(root) / density
        candidate = root - step
        if candidate <= 0 or candidate > hi or abs(excess(candidate)) > abs(excess(root)):
            break
        root = candidate
        if abs(step) <= 1e-15 * root:
            break
    return root


def gaussian_sample(rng: Union[RngStream, np.random.Generator], mean: float, sd: float,
                    size: Optional[int] = None):
    """
    Draw from N(mean, sd^2). An ``RngStream`` is consumed from its start, so
    passing the same stream twice repeats the draws.
    """
    if not sd > 0:
        raise DomainError(f"standard deviation must be positive, got {sd}")
    generator = rng.generator() if isinstance(rng, RngStream) else rng
    return mean + sd * generator.standard_normal(size)
