"""
Numerical power theory for the PCR test and the CRT failure analytics.

An ``OdcModel`` supplies the two conditional score laws F_{T|ZY} and F_{T|Z}.
From them we build the conditional ordinal dominance curve R_T, its density
r_T, the dependency power, the label probabilities and the power lower
bounds. The CRT side computes the concentration parameter eta of a score
model and the resulting bound on P(|p - 1/2| >= delta).
"""
import logging
import math
from abc import ABC, abstractmethod
from functools import partial
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from pcr.config import DEFAULT_SEED
from pcr.data import Dataset
from pcr.errors import DomainError, NumericalError
from pcr.parallel import parallel_map
from pcr.randkit import Chi2Params, RngStream, chi2_quantile, chi2_sf, normal_cdf
from pcr.samplers import ConditionalSampler, GaussianLinearSampler
from pcr.schemas import OdcCurve, PowerPredicates, PowerReport, ThresholdKind
from pcr.scores import ScoreFunction, score_builtin

logger = logging.getLogger(__name__)

GRID_SPACING = 1.0 / 1024
INVERSION_TOLERANCE = 1e-12
MAX_EXPANSIONS = 200
MAX_BISECTIONS = 200
SAMPLE_CHUNK = 128


def inverse_hypot(theta: float) -> Callable[[np.ndarray], np.ndarray]:
    """g(x) = 1 / sqrt(theta^2 + x^2), the even link that defeats the CRT."""
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta}")
    return lambda x: 1.0 / np.sqrt(theta * theta + np.square(x))


# --------------------------------------------------------------------------
# Models
# --------------------------------------------------------------------------


class OdcModel(ABC):
    """
    A joint law of (X, Z, Y) together with a score T, exposing the
    conditional score laws needed by the ODC. CDF methods are vectorized:
    ``t`` has shape (S, G) and ``z``, ``y`` hold S rows.
    """

    descriptor: str = "odc-model"

    @abstractmethod
    def sample_xzy(self, rng: np.random.Generator, size: int) -> Dataset:
        """``size`` i.i.d. draws of (X, Y, Z)."""

    @abstractmethod
    def cdf_t_given_zy(self, t: np.ndarray, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        """F_{T|ZY}: law of T(X, Y, Z) with X ~ L(X | Z, Y)."""

    @abstractmethod
    def cdf_t_given_z(self, t: np.ndarray, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        """F_{T|Z}: law of T(X~, Y, Z) with X~ ~ L(X | Z) drawn independently of Y."""

    @abstractmethod
    def sampler(self) -> ConditionalSampler:
        """The true L(X | Z)."""

    @abstractmethod
    def score(self) -> ScoreFunction:
        """The score T the CDFs describe."""

    def sample_zy(self, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
        data = self.sample_xzy(rng, size)
        return data.z, data.y


def _window_probability(center, half_width, mean, sd):
    # P(|X - center| <= half_width) for X ~ N(mean, sd^2)
    return normal_cdf((center + half_width - mean) / sd) - normal_cdf((center - half_width - mean) / sd)


def _root(t: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(t, 0.0))


class QuadraticOdcModel(OdcModel):
    """
    Z ~ N(0, I_q), X | Z ~ N(v'Z, 1), Y | X, Z ~ N((u'Z)^2 + a X, 1) with
    score T = (y - x - z'1)^2. Both conditional laws of X are Gaussian, so
    the CDFs are closed form.
    """

    def __init__(self, u, v, a: float):
        self.u = np.asarray(u, dtype=float).reshape(-1)
        self.v = np.asarray(v, dtype=float).reshape(-1)
        if self.u.size != self.v.size:
            raise DomainError(f"u and v must have the same length, got {self.u.size} and {self.v.size}")
        self.a = float(a)
        self.descriptor = f"quadratic(q={self.u.size}, a={self.a:g})"

    def sample_xzy(self, rng, size):
        z = rng.standard_normal((size, self.u.size))
        x = z @ self.v + rng.standard_normal(size)
        y = (z @ self.u) ** 2 + self.a * x + rng.standard_normal(size)
        return Dataset(x, y, z)

    def _center(self, z, y):
        return (y - z.sum(axis=1))[:, None]

    def cdf_t_given_zy(self, t, z, y):
        a2 = 1.0 + self.a * self.a
        mean = ((z @ self.v + self.a * (y - (z @ self.u) ** 2)) / a2)[:, None]
        out = _window_probability(self._center(z, y), _root(t), mean, 1.0 / math.sqrt(a2))
        return np.where(t < 0, 0.0, out)

    def cdf_t_given_z(self, t, z, y):
        out = _window_probability(self._center(z, y), _root(t), (z @ self.v)[:, None], 1.0)
        return np.where(t < 0, 0.0, out)

    def sampler(self):
        return GaussianLinearSampler(self.v)

    def score(self):
        return score_builtin("residual_linear_z1")


class RegressionOdcModel(OdcModel):
    """
    Z is empty, X ~ N(0, 1) and Y = g(X) + eps with eps ~ N(0, 1); score
    T = (y - x)^2. L(X | Y) has no closed form, so F_{T|ZY} integrates the
    posterior density on a fixed grid in x that is dense near the origin.
    """

    def __init__(self, g: Callable[[np.ndarray], np.ndarray], descriptor: str = "regression", grid_points: int = 4000,
                 x_min: float = 1e-7, x_max: float = 12.0):
        self.g = g
        self.descriptor = descriptor
        half = np.geomspace(x_min, x_max, grid_points)
        self.x_grid = np.concatenate([-half[::-1], [0.0], half])
        self._g_grid = np.asarray(g(self.x_grid), dtype=float)
        self._log_prior = -0.5 * self.x_grid ** 2

    def sample_xzy(self, rng, size):
        x = rng.standard_normal(size)
        y = np.asarray(self.g(x), dtype=float) + rng.standard_normal(size)
        return Dataset(x, y, np.empty((size, 0)))

    def _posterior_cdf(self, y: float) -> np.ndarray:
        log_density = self._log_prior - 0.5 * (y - self._g_grid) ** 2
        density = np.exp(log_density - log_density.max())
        cumulative = integrate.cumulative_trapezoid(density, self.x_grid, initial=0.0)
        if not cumulative[-1] > 0:
            raise NumericalError("posterior of X given Y has no mass on the grid", y=y)
        return cumulative / cumulative[-1]

    def cdf_t_given_zy(self, t, z, y):
        root = _root(t)
        out = np.empty_like(root)
        for i, y_i in enumerate(y):
            cdf = self._posterior_cdf(y_i)
            out[i] = np.interp(y_i + root[i], self.x_grid, cdf) - np.interp(y_i - root[i], self.x_grid, cdf)
        return np.where(t < 0, 0.0, out)

    def cdf_t_given_z(self, t, z, y):
        out = _window_probability(np.asarray(y)[:, None], _root(t), 0.0, 1.0)
        return np.where(t < 0, 0.0, out)

    def sampler(self):
        return GaussianLinearSampler(np.empty(0))

    def score(self):
        return score_builtin("sq_loss_xy")


class NullOdcModel(OdcModel):
    """Any model with F_{T|ZY} replaced by F_{T|Z}; its ODC is the identity."""

    def __init__(self, base: OdcModel):
        self.base = base
        self.descriptor = f"null[{base.descriptor}]"

    def sample_xzy(self, rng, size):
        # X redrawn from L(X | Z), independent of Y
        data = self.base.sample_xzy(rng, size)
        x = self.base.sampler().draw_rows(data.z, rng)
        return Dataset(x, data.y, data.z)

    def cdf_t_given_zy(self, t, z, y):
        return self.base.cdf_t_given_z(t, z, y)

    def cdf_t_given_z(self, t, z, y):
        return self.base.cdf_t_given_z(t, z, y)

    def sampler(self):
        return self.base.sampler()

    def score(self):
        return self.base.score()


# --------------------------------------------------------------------------
# Conditional ODC
# --------------------------------------------------------------------------


def _invert_cdf(cdf, u: np.ndarray, z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """t with cdf(t; z_i, y_i) = u_g for every row i and grid point g."""
    target = np.broadcast_to(u, (y.shape[0], u.size))
    lo = np.full(target.shape, -1.0)
    hi = np.ones(target.shape)
    for _ in range(MAX_EXPANSIONS):
        low_bad = cdf(lo, z, y) > target
        high_bad = cdf(hi, z, y) < target
        if not (low_bad.any() or high_bad.any()):
            break
        lo = np.where(low_bad, 2.0 * lo, lo)
        hi = np.where(high_bad, 2.0 * hi, hi)
    else:
        i, g = np.argwhere(low_bad | high_bad)[0]
        raise NumericalError("could not bracket the score quantile", u=float(u[g]), z=z[i].tolist(), y=float(y[i]))

    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        below = cdf(mid, z, y) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= INVERSION_TOLERANCE * np.maximum(1.0, np.abs(hi))):
            break
    return 0.5 * (lo + hi)


def _odc_chunk(rows: range, model: OdcModel, u: np.ndarray, z: np.ndarray, y: np.ndarray) -> np.ndarray:
    z_c, y_c = z[rows.start:rows.stop], y[rows.start:rows.stop]
    t = _invert_cdf(model.cdf_t_given_z, u, z_c, y_c)
    return model.cdf_t_given_zy(t, z_c, y_c).sum(axis=0)


def default_grid(spacing: float = GRID_SPACING) -> np.ndarray:
    steps = int(round(1.0 / spacing))
    return np.arange(1, steps) / steps


def conditional_odc(model: OdcModel, grid: Optional[Sequence[float]] = None, zy_samples: int = 2000,
                    seed: int = DEFAULT_SEED, n_jobs: Optional[int] = None) -> OdcCurve:
    """
    R_T(u) = E[F_{T|ZY}(F_{T|Z}^{-1}(u; Z, Y); Z, Y)].

    The expectation runs over one seeded set of (Z, Y) draws shared by all u.
    The returned curve carries the endpoints u = 0 and u = 1 (R = 0 and 1),
    and r_T is taken by finite differences on the grid.
    """
    u = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if u.size == 0 or u.min() <= 0.0 or u.max() >= 1.0:
        raise DomainError("the ODC grid must be a nonempty subset of (0, 1)")
    if zy_samples < 1:
        raise DomainError(f"zy_samples must be at least 1, got {zy_samples}")
    u = np.unique(u)

    z, y = model.sample_zy(RngStream.derive(seed, "odc").generator(), zy_samples)
    chunks = [range(s, min(s + SAMPLE_CHUNK, zy_samples)) for s in range(0, zy_samples, SAMPLE_CHUNK)]
    partial_sums = parallel_map(partial(_odc_chunk, model=model, u=u, z=z, y=y), chunks, n_jobs=n_jobs)
    R = np.sum(partial_sums, axis=0) / zy_samples

    full_u = np.concatenate([[0.0], u, [1.0]])
    full_R = np.concatenate([[0.0], R, [1.0]])
    r = np.gradient(full_R, full_u)
    C = float(np.max(np.abs(np.diff(r) / np.diff(full_u))))
    logger.debug("ODC for %s: %d grid points, %d (z, y) draws", model.descriptor, u.size, zy_samples)
    return OdcCurve(grid=full_u.tolist(), R=full_R.tolist(), r=r.tolist(), lipschitz_C=C,
                    bound_B=float(np.max(np.abs(r))))


def dependency_power(curve: OdcCurve) -> float:
    """Delta_T = int_0^1 |r_T(u) - 1| du by the trapezoid rule."""
    return float(integrate.trapezoid(np.abs(np.asarray(curve.r) - 1.0), np.asarray(curve.grid)))


def label_probabilities(curve: OdcCurve, K: int, L: int) -> np.ndarray:
    """
    p_s = sum_{j=(s-1)K}^{sK-1} C(M, j) int_0^1 u^j (1-u)^(M-j) r_T(u) du.

    Gauss-Legendre nodes integrate the Bernstein weights of degree M exactly;
    the weights are formed in log space. The result is not renormalized.
    """
    if K < 1 or L < 2:
        raise DomainError(f"need K >= 1 and L >= 2, got K={K}, L={L}")
    M = K * L - 1
    nodes, weights = special.roots_legendre(max(128, M + 1))
    u = 0.5 * (nodes + 1.0)
    w = 0.5 * weights * np.interp(u, curve.grid, curve.r)
    log_u, log_1mu = np.log(u), np.log1p(-u)
    log_norm = special.gammaln(M + 1)

    p = np.empty(L)
    for s in range(L):
        j = np.arange(s * K, (s + 1) * K)[:, None]
        log_bern = log_norm - special.gammaln(j + 1) - special.gammaln(M - j + 1) + j * log_u + (M - j) * log_1mu
        bern = np.exp(log_bern)
        if not np.isfinite(bern).all():
            raise NumericalError("Bernstein weights overflowed", M=M, label=s + 1)
        p[s] = float(np.sum(bern @ w))
    if not np.isfinite(p).all():
        raise NumericalError("label probabilities are not finite", K=K, L=L)
    return p


def partial_sum_gaps(curve: OdcCurve, K: int, L: int, p: Optional[np.ndarray] = None) -> np.ndarray:
    """
    sum_{s<=l} p_s - R_T(l/L) for l = 1..L.

    The partial sum equals E[R_T(V)] with V ~ Beta(lK, K(L-l)), whose mean
    is l/L, so the gap is <= 0 wherever R_T is concave and >= 0 wherever it
    is convex. Its size is at most C/2 * Var(V) for a C-Lipschitz r_T.
    """
    p = label_probabilities(curve, K, L) if p is None else np.asarray(p, dtype=float)
    if p.size != L:
        raise DomainError(f"expected {L} label probabilities, got {p.size}")
    points = np.arange(1, L + 1) / L
    return np.cumsum(p) - np.interp(points, curve.grid, curve.R)


# --------------------------------------------------------------------------
# Power bounds
# --------------------------------------------------------------------------


def nu_k(K: int, B: float, C: float) -> float:
    """nu_K = 2 (4 D^2 log K / sqrt K)^(2/5) with D = C/2 + 2B."""
    D = C / 2.0 + 2.0 * B
    return 2.0 * (4.0 * D * D * math.log(K) / math.sqrt(K)) ** 0.4


def _rhs(n: int, L: int, alpha: float, beta: float, C: float, nu: float) -> Tuple[float, float]:
    slack = C / L + L * nu
    finite = 32.0 * L ** 0.25 / math.sqrt(n) * max(1.0 / math.sqrt(alpha), 1.0 / beta) ** 0.5 + slack
    log_b, log_a = math.log(1.0 / beta), math.log(1.0 / alpha)
    core = math.sqrt(3.0 * log_b) + math.sqrt(3.0 * log_b + 2.0 * math.sqrt(log_a) + 2.0 * log_a)
    asym = L ** 0.25 / math.sqrt(n) * max(core, 1.0) + slack
    return finite, asym


def _check_power_args(n, L, K, alpha, beta):
    if n < 1 or L < 2 or K < 1:
        raise DomainError(f"need n >= 1, L >= 2, K >= 1, got n={n}, L={L}, K={K}")
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise DomainError(f"alpha and beta must lie in (0, 1), got {alpha}, {beta}")


def power_lower_bound_predicates(delta_T: float, n: int, L: int, K: int, alpha: float, beta: float, B: float,
                                 C: float) -> PowerPredicates:
    """
    Compare Delta_T with the dependency power that guarantees power 1 - beta
    under the finite-sample and the asymptotic threshold.
    """
    _check_power_args(n, L, K, alpha, beta)
    nu = nu_k(K, B, C)
    if nu >= 1.0:
        raise DomainError(f"nu_K = {nu:.4g} >= 1; K={K} is too small for the bound")
    finite, asym = _rhs(n, L, alpha, beta, C, nu)
    return PowerPredicates(finite_ok=delta_T >= finite, asym_ok=delta_T >= asym, rhs_finite=finite, rhs_asym=asym)


def optimal_num_labels(n: int, K: int, alpha: float, beta: float, B: float, C: float,
                       kind: str = ThresholdKind.FINITE.value,
                       candidates: Optional[Iterable[int]] = None) -> Tuple[int, Dict[int, float]]:
    """L minimizing the power-condition right-hand side, and the RHS per candidate."""
    candidates = list(candidates) if candidates is not None else list(range(2, max(3, int(4 * n ** 0.4)) + 1))
    nu = nu_k(K, B, C)
    index = 0 if kind == ThresholdKind.FINITE.value else 1
    values = {L: _rhs(n, L, alpha, beta, C, nu)[index] for L in candidates}
    best = min(values, key=values.get)
    return best, values


def predicted_power_asym(p_s, n: int, L: int, alpha: float) -> float:
    """P(chi2_{L-1}(lambda) >= chi2_{L-1}(1 - alpha)) with lambda = n L sum (p - 1/L)^2."""
    p = np.asarray(p_s, dtype=float)
    lam = float(n * L * np.sum((p - 1.0 / L) ** 2))
    return chi2_sf(chi2_quantile(1.0 - alpha, L - 1), Chi2Params(L - 1, lam))


# --------------------------------------------------------------------------
# CRT analytics
# --------------------------------------------------------------------------


def _quad(f, a, b, budget):
    result = integrate.quad(f, a, b, limit=budget, epsabs=1e-13, epsrel=1e-12, full_output=1)
    if len(result) > 3:
        raise NumericalError("quadrature did not converge within its budget", a=a, b=b, message=result[3])
    return result[0], result[1]


def gaussian_expectation(f: Callable[[float], float], budget: int = 200, full_output: bool = False):
    """E[f(Z)] for Z ~ N(0, 1); ``full_output`` also returns the error estimate."""
    density = lambda z: f(z) * math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    left, err_left = _quad(density, -np.inf, 0.0, budget)
    right, err_right = _quad(density, 0.0, np.inf, budget)
    if full_output:
        return left + right, err_left + err_right
    return left + right


def _even_moment(h: Callable[[float], float], breakpoints: Sequence[float], budget: int) -> float:
    # E[h(X)] for even h: twice the integral over [0, inf), split where h varies quickly
    density = lambda x: h(x) * math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    edges = [0.0] + sorted(b for b in set(breakpoints) if b > 0)
    total = sum(_quad(density, a, b, budget)[0] for a, b in zip(edges[:-1], edges[1:]))
    total += _quad(density, edges[-1], np.inf, budget)[0]
    return 2.0 * total


def crt_eta(g: Callable[[float], float], scale: float = 1.0, budget: int = 500) -> Dict[str, float]:
    """
    eta = sqrt((3 + 2 E[X^2 g(X)^2]) / (3 + 2 E[g(X)^2])) for X ~ N(0, 1) and
    an even g. ``scale`` is the width of the region where g varies fastest;
    the integrals are split at scale and 100*scale. E[g] and E[X^2 g] are
    reported alongside.
    """
    breakpoints = [scale, 100.0 * scale, 1.0]
    scalar = lambda x: float(g(x))
    moments = {
        "E_g": _even_moment(scalar, breakpoints, budget),
        "E_x2_g": _even_moment(lambda x: x * x * scalar(x), breakpoints, budget),
        "E_g2": _even_moment(lambda x: scalar(x) ** 2, breakpoints, budget),
        "E_x2_g2": _even_moment(lambda x: x * x * scalar(x) ** 2, breakpoints, budget),
    }
    eta = math.sqrt((3.0 + 2.0 * moments["E_x2_g2"]) / (3.0 + 2.0 * moments["E_g2"]))
    return {"eta": eta, **moments}


def crt_concentration_bound(eta: float, delta: float, M: Optional[int] = None) -> float:
    """
    Large-n bound on P(|p - 1/2| >= delta) for a CRT whose score has
    concentration parameter ``eta``:

        (delta - 1/M)^-2 * (1/(4M) + (M-1)/M * (E[Phi^2(eta Z)] - 1/4))

    With ``M=None`` the M -> infinity limit (E[Phi^2(eta Z)] - 1/4) / delta^2
    is returned.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    excess = gaussian_expectation(lambda z: normal_cdf(eta * z) ** 2) - 0.25
    if M is None:
        return excess / delta ** 2
    if M * delta <= 1:
        raise DomainError(f"the bound needs M > 1/delta (M={M}, delta={delta})")
    return (1.0 / (4 * M) + (M - 1) / M * excess) / (delta - 1.0 / M) ** 2


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


def build_power_report(model: OdcModel, n: int, K: int, L: int, alpha: float = 0.1, beta: float = 0.1,
                       grid: Optional[Sequence[float]] = None, zy_samples: int = 2000, seed: int = DEFAULT_SEED,
                       eta_scale: Optional[float] = None, n_jobs: Optional[int] = None) -> PowerReport:
    """
    Everything the theory says about one (model, n, K, L): the ODC summary,
    label probabilities, the power conditions and the predicted asymptotic
    power. For regression models the CRT concentration parameter is added.
    """
    _check_power_args(n, L, K, alpha, beta)
    curve = conditional_odc(model, grid, zy_samples, seed, n_jobs)
    delta_T = dependency_power(curve)
    p = label_probabilities(curve, K, L)
    nu = nu_k(K, curve.bound_B, curve.lipschitz_C)
    finite, asym = _rhs(n, L, alpha, beta, curve.lipschitz_C, nu)
    # the bounds only apply once nu_K < 1
    applicable = nu < 1.0
    eta = None
    if isinstance(model, RegressionOdcModel):
        eta = crt_eta(model.g, scale=eta_scale or 1.0)["eta"]
    return PowerReport(
        n=n,
        L=L,
        K=K,
        alpha=alpha,
        beta=beta,
        delta_T=delta_T,
        p_s=p.tolist(),
        l1_gap=float(np.sum(np.abs(p - 1.0 / L))),
        nu_K=nu,
        B=curve.bound_B,
        C=curve.lipschitz_C,
        lower_bound_finite=finite,
        lower_bound_asym=asym,
        finite_ok=applicable and delta_T >= finite,
        asym_ok=applicable and delta_T >= asym,
        predicted_power_asym=predicted_power_asym(p, n, L, alpha),
        renormalization_drift=float(p.sum() - 1.0),
        eta=eta,
    )
