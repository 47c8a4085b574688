"""
Graph nodes. Each stage records a ``trace_log`` entry; a failure is recorded
in ``errors`` with the stage name and routes the run straight to the reporter.
"""
import logging
import time
from functools import wraps
from typing import Callable

from pcr.errors import DataError, PcrError
from pcr.pipeline.grouped import grouped_pcr, partition_groups, summarize_response
from pcr.pipeline.kernel import KernelSampler, kernel_fit
from pcr.pipeline.loader import load_trips
from pcr.pipeline.routes import filter_routes
from pcr.pipeline.scorer import fit_response_scores
from pcr.pipeline.state import PipelineState
from pcr.schemas import GroupedPcrConfig
from pcr.scores import ols_residual_score

logger = logging.getLogger(__name__)


def stage(name: str) -> Callable:
    def decorate(fn: Callable[[PipelineState], dict]) -> Callable[[PipelineState], PipelineState]:
        @wraps(fn)
        def node(state: PipelineState) -> PipelineState:
            logger.info("--- Stage: %s ---", name)
            started = time.perf_counter()
            try:
                details = fn(state) or {}
                state["trace_log"].append({"stage": name, "status": "completed",
                                           "seconds": round(time.perf_counter() - started, 3), **details})
            except (PcrError, OSError, ValueError) as e:
                logger.error("Stage %s failed: %s", name, e)
                state["errors"].append(str(e))
                state["failed_stage"] = name
                state["trace_log"].append({"stage": name, "status": "failed", "error": str(e)})
            return state
        return node
    return decorate


@stage("loader")
def load_stage(state: PipelineState) -> dict:
    state["test_frame"] = load_trips(state["test_csv"])
    state["train_frame"] = load_trips(state["train_csv"])
    return {"test_rows": len(state["test_frame"]), "train_rows": len(state["train_frame"])}


@stage("route_filter")
def route_filter_stage(state: PipelineState) -> dict:
    kept = filter_routes(state["test_frame"], state["train_frame"], state["min_count"])
    if kept.empty:
        raise DataError(f"no test rides left after route filtering (min_count={state['min_count']})")
    state["filtered_frame"] = kept
    return {"kept": len(kept), "dropped": len(state["test_frame"]) - len(kept)}


@stage("kernel")
def kernel_stage(state: PipelineState) -> dict:
    model = kernel_fit(state["train_frame"], state["bandwidth_minutes"], min_count=state["min_count"])
    state["kernel_model"] = model
    return {"routes": len(model.routes), "bandwidth_minutes": model.bandwidth_minutes}


@stage("scorer")
def scorer_stage(state: PipelineState) -> dict:
    datasets, _, fits = fit_response_scores(state["train_frame"], state["filtered_frame"], state["kernel_model"],
                                            state["responses"])
    state["datasets"] = datasets
    state["fits"] = fits
    return {"fits": fits}


@stage("tester")
def tester_stage(state: PipelineState) -> dict:
    cfg = GroupedPcrConfig(**state["config"])
    sampler = KernelSampler(state["kernel_model"])
    results = {}
    # the partition depends on (n, g, seed) only
    partitions = {}
    for response in state["responses"]:
        data = state["datasets"][response]
        if data.n not in partitions:
            partitions[data.n] = partition_groups(data.n, cfg.group_size, state["seed"])
        groups, dropped = partitions[data.n]
        result = grouped_pcr(data, sampler, ols_residual_score(*state["fits"][response]), cfg, state["seed"],
                             stream_prefix=(response,), n_jobs=state.get("n_jobs"), groups=groups)
        results[response] = summarize_response(result, dropped)
    state["results"] = results
    return {"p_finite": {r: v.p_finite for r, v in results.items()}}
