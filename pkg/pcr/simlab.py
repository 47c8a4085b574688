"""
Synthetic models and the replicated-experiment runner behind the size and
power tables.

Coefficient vectors u, v are drawn once per experiment from stream
(seed, "coeffs"); replicate r draws its dataset from (seed, "data", r) and
its counterfeits from (seed, "test", r, ...), so a report does not depend on
how replicates are scheduled.
"""
import itertools
import json
import logging
import math
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from pcr.crt import crt_decide, run_crt
from pcr.data import Dataset
from pcr.errors import DataError, DomainError
from pcr.parallel import parallel_map
from pcr.parameter_free import run_parameter_free
from pcr.pcr_core import run_pcr
from pcr.power_oracle import OdcModel, QuadraticOdcModel, RegressionOdcModel, inverse_hypot
from pcr.randkit import RngStream
from pcr.reporting import append_csv_rows
from pcr.robust import pinsker_delta_gaussian, run_robust_pcr
from pcr.samplers import ConditionalSampler, GaussianLinearSampler
from pcr.schemas import PcrConfig, RobustConfig
from pcr.schemas.experiment_schema import ExperimentReport, ExperimentSpec, ModelId, ModelSpec, Procedure, ReplicateDetail
from pcr.scores import ScoreFunction, SumDatasetScore, score_builtin

logger = logging.getLogger(__name__)

FULL_REPLICATES = 10_000
SWEEP_FIELDS = ("L", "K", "alpha", "threshold_kind")
QUADRATIC_SHIFT_A = 2.0

Coefficients = Tuple[np.ndarray, np.ndarray]


def draw_coefficients(spec: ModelSpec, seed: int) -> Coefficients:
    """u, v with i.i.d. standard normal entries, fixed for a whole experiment."""
    rng = RngStream.derive(seed, "coeffs").generator()
    return rng.standard_normal(spec.p_dim), rng.standard_normal(spec.p_dim)


def _quadratic_a(spec: ModelSpec) -> float:
    if spec.model_id == ModelId.QUADRATIC_NULL.value:
        return 0.0
    if spec.model_id == ModelId.QUADRATIC_SHIFT.value:
        return QUADRATIC_SHIFT_A
    return spec.a


def build_model(spec: ModelSpec, coefficients: Optional[Coefficients] = None) -> OdcModel:
    if spec.model_id in (ModelId.CRT_FAILURE_EXAMPLE.value, ModelId.THETA_FAMILY.value):
        return RegressionOdcModel(inverse_hypot(spec.theta), descriptor=f"{spec.model_id}(theta={spec.theta:g})")
    if spec.model_id in (ModelId.QUADRATIC_NULL.value, ModelId.QUADRATIC_SHIFT.value, ModelId.QUADRATIC_A.value,
                         ModelId.ROBUST_MISMATCH.value):
        if coefficients is None:
            raise DomainError(f"model {spec.model_id} needs coefficient vectors u, v")
        u, v = coefficients
        return QuadraticOdcModel(u, v, _quadratic_a(spec))
    raise DomainError(f"unknown model_id '{spec.model_id}'")


def natural_score(spec: ModelSpec) -> ScoreFunction:
    if spec.model_id in (ModelId.CRT_FAILURE_EXAMPLE.value, ModelId.THETA_FAMILY.value):
        return score_builtin("sq_loss_xy")
    return score_builtin("residual_linear_z1")


def gen_dataset(spec: ModelSpec, rng: Union[RngStream, np.random.Generator],
                coefficients: Optional[Coefficients] = None
                ) -> Tuple[Dataset, ConditionalSampler, Optional[ConditionalSampler]]:
    """
    One dataset of ``spec.n`` rows with its true sampler and, for the
    mismatch model, the approximate sampler N(v'z, (1+eta)^2). Without
    explicit coefficients, u and v are drawn from ``rng`` first.
    """
    generator = rng.generator() if isinstance(rng, RngStream) else rng
    if coefficients is None and spec.model_id not in (ModelId.CRT_FAILURE_EXAMPLE.value,
                                                      ModelId.THETA_FAMILY.value):
        coefficients = (generator.standard_normal(spec.p_dim), generator.standard_normal(spec.p_dim))
    model = build_model(spec, coefficients)
    data = model.sample_xzy(generator, spec.n)
    approx = None
    if spec.model_id == ModelId.ROBUST_MISMATCH.value:
        approx = GaussianLinearSampler(coefficients[1], sd=1.0 + spec.eta)
    return data, model.sampler(), approx


def _resolve_delta(spec: ExperimentSpec) -> float:
    return spec.delta if spec.delta is not None else pinsker_delta_gaussian(spec.model.eta)


def run_replicate(r: int, spec: ExperimentSpec, coefficients: Optional[Coefficients]) -> ReplicateDetail:
    data, true_sampler, approx = gen_dataset(spec.model, RngStream.derive(spec.seed, "data", r), coefficients)
    # the analyst only has the approximate sampler when one exists
    sampler = approx or true_sampler
    score = score_builtin(spec.score) if spec.score else natural_score(spec.model)
    prefix = ("test", r)

    if spec.test == Procedure.PCR.value:
        cfg = PcrConfig(num_labels=spec.L, counterfeit_ratio=spec.K, alpha=spec.alpha,
                        threshold_kind=spec.threshold_kind)
        res = run_pcr(data, sampler, score, cfg, spec.seed, prefix, n_jobs=1)
        p = res.p_finite if spec.threshold_kind == "finite" else res.p_asym
        return ReplicateDetail(replicate=r, statistic=res.U, p=p, reject=res.reject)
    if spec.test == Procedure.ROBUST_PCR.value:
        cfg = RobustConfig(num_labels=spec.L, counterfeit_ratio=spec.K, alpha=spec.alpha,
                           threshold_kind=spec.threshold_kind, delta=_resolve_delta(spec))
        res = run_robust_pcr(data, sampler, score, cfg, spec.seed, prefix, n_jobs=1)
        p = res.p_finite if spec.threshold_kind == "finite" else res.p_asym
        return ReplicateDetail(replicate=r, statistic=res.U, p=p, reject=res.reject)
    if spec.test == Procedure.CRT.value:
        res = run_crt(data, sampler, SumDatasetScore(score), spec.M, spec.seed, spec.alpha, prefix, n_jobs=1)
        return ReplicateDetail(replicate=r, statistic=float(res.p), p=float(res.p),
                               reject=crt_decide(res.p, spec.alpha, spec.sided))
    if spec.test == Procedure.PF_PCR.value:
        res = run_parameter_free(data, sampler, score, spec.K, spec.grid, spec.alpha, spec.threshold_kind,
                                 spec.seed, shared=spec.shared, n_jobs=1)
        return ReplicateDetail(replicate=r, statistic=res.p_star, p=res.p_star, reject=res.reject)
    raise DomainError(f"unknown test '{spec.test}'")


def run_experiment(spec: ExperimentSpec, n_jobs: Optional[int] = None, record_timing: bool = False) -> ExperimentReport:
    """
    ``spec.replicates`` independent datasets, one test each; the report holds
    the rejection rate and its binomial standard error.
    """
    started = time.perf_counter()
    coefficients = None
    if spec.model.model_id not in (ModelId.CRT_FAILURE_EXAMPLE.value, ModelId.THETA_FAMILY.value):
        coefficients = draw_coefficients(spec.model, spec.seed)

    details = parallel_map(partial(run_replicate, spec=spec, coefficients=coefficients), range(spec.replicates),
                           n_jobs=n_jobs)
    rate = sum(d.reject for d in details) / spec.replicates
    se = math.sqrt(rate * (1.0 - rate) / spec.replicates)
    is_crt = spec.test == Procedure.CRT.value
    report = ExperimentReport(
        experiment=spec.name,
        model=spec.model.model_id,
        test=spec.test,
        L=None if is_crt else spec.L,
        K=None if is_crt else spec.K,
        alpha=spec.alpha,
        threshold=spec.sided if is_crt else spec.threshold_kind,
        replicates=spec.replicates,
        rate=rate,
        se=se,
        seconds=round(time.perf_counter() - started, 3) if record_timing else None,
        u=None if coefficients is None else coefficients[0].tolist(),
        v=None if coefficients is None else coefficients[1].tolist(),
        per_replicate=details if spec.per_replicate else None,
    )
    logger.info("%s: %s/%s n=%d rate=%.4f (se %.4f)", spec.name, spec.model.model_id, spec.test, spec.model.n,
                rate, se)
    return report


def expand_experiment(raw: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Cartesian product over list-valued L, K, alpha, threshold_kind and model.n."""
    axes = [(key, raw[key]) for key in SWEEP_FIELDS if isinstance(raw.get(key), list)]
    model = dict(raw.get("model", {}))
    if isinstance(model.get("n"), list):
        axes.append(("model.n", model["n"]))
    if not axes:
        return [raw]
    expanded = []
    for values in itertools.product(*(v for _, v in axes)):
        item = dict(raw)
        item["model"] = dict(model)
        for (key, _), value in zip(axes, values):
            if key == "model.n":
                item["model"]["n"] = value
            else:
                item[key] = value
        expanded.append(item)
    return expanded


def load_experiments(path: Union[str, Path], full: bool = False) -> List[ExperimentSpec]:
    """
    Read a TOML or JSON experiment file: either one experiment table or an
    ``experiment`` array of them. ``full`` sets every replicate count to 10,000.
    """
    path = Path(path)
    try:
        if path.suffix == ".toml":
            with path.open("rb") as f:
                raw = tomllib.load(f)
        else:
            raw = json.loads(path.read_text())
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise DataError(f"cannot parse experiment file {path}: {e}") from e

    tables = raw.get("experiment", [raw]) if isinstance(raw, dict) else raw
    if isinstance(tables, dict):
        tables = [tables]
    specs = []
    for table in tables:
        for item in expand_experiment(table):
            if full:
                item = {**item, "replicates": FULL_REPLICATES}
            try:
                specs.append(ExperimentSpec(**item))
            except ValidationError as e:
                raise DomainError(f"invalid experiment in {path}: {e}") from e
    return specs


def run_experiments(specs: List[ExperimentSpec], csv_path: Optional[Union[str, Path]] = None,
                    n_jobs: Optional[int] = None, record_timing: bool = False) -> List[ExperimentReport]:
    reports = []
    for spec in specs:
        report = run_experiment(spec, n_jobs=n_jobs, record_timing=record_timing)
        if csv_path is not None:
            append_csv_rows(csv_path, [report.csv_row()], ExperimentReport.CSV_COLUMNS)
        reports.append(report)
    return reports
