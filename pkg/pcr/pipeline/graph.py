"""
The observational workflow as a langgraph ``StateGraph``:

    loader -> route_filter -> kernel -> scorer -> tester -> reporter

Any stage that records an error routes straight to the reporter.
"""
import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

from langgraph.graph import END, StateGraph

from pcr.config import DEFAULT_SEED
from pcr.errors import DomainError, PipelineStageError
from pcr.pipeline.kernel import DEFAULT_BANDWIDTH_MINUTES
from pcr.pipeline.reporter import generate_report
from pcr.pipeline.scorer import RESPONSES
from pcr.pipeline.stages import kernel_stage, load_stage, route_filter_stage, scorer_stage, tester_stage
from pcr.pipeline.state import PipelineState
from pcr.schemas import GroupedPcrConfig, GroupedPcrResult

logger = logging.getLogger(__name__)

STAGES = ["loader", "route_filter", "kernel", "scorer", "tester"]
DEFAULT_MIN_COUNT = 20


def default_config() -> GroupedPcrConfig:
    return GroupedPcrConfig(num_labels=10, counterfeit_ratio=200, alpha=0.05, threshold_kind="finite", group_size=4)


def router_to(next_stage: str):
    def router(state: PipelineState):
        if state.get("errors"):
            return "reporter"
        return next_stage
    return router


workflow = StateGraph(PipelineState)

workflow.add_node("loader", load_stage)
workflow.add_node("route_filter", route_filter_stage)
workflow.add_node("kernel", kernel_stage)
workflow.add_node("scorer", scorer_stage)
workflow.add_node("tester", tester_stage)
workflow.add_node("reporter", generate_report)

workflow.set_entry_point("loader")

for current, following in zip(STAGES, STAGES[1:] + ["reporter"]):
    workflow.add_conditional_edges(current, router_to(following), {
        following: following,
        "reporter": "reporter",
    })

workflow.add_edge("reporter", END)

app = workflow.compile()


def initial_state(test_csv, train_csv, responses, cfg, seed, min_count, bandwidth_minutes, output, n_jobs
                  ) -> PipelineState:
    return PipelineState(
        test_csv=str(test_csv),
        train_csv=str(train_csv),
        responses=list(responses),
        config=cfg.model_dump(),
        seed=seed,
        min_count=min_count,
        bandwidth_minutes=bandwidth_minutes,
        n_jobs=n_jobs,
        output_path=None if output is None else str(output),
        test_frame=None,
        train_frame=None,
        filtered_frame=None,
        kernel_model=None,
        datasets={},
        fits={},
        results={},
        report_path=None,
        failed_stage=None,
        errors=[],
        trace_log=[],
    )


def run_pipeline(test_csv: Union[str, Path], train_csv: Union[str, Path], responses: Sequence[str] = RESPONSES,
                 cfg: Optional[GroupedPcrConfig] = None, seed: int = DEFAULT_SEED,
                 min_count: int = DEFAULT_MIN_COUNT, bandwidth_minutes: float = DEFAULT_BANDWIDTH_MINUTES,
                 output: Optional[Union[str, Path]] = None, n_jobs: Optional[int] = None
                 ) -> Dict[str, GroupedPcrResult]:
    """
    Run the full chain and return the per-response summaries. A failing
    stage raises ``PipelineStageError`` after the reporter has written the
    trace.
    """
    unknown = [r for r in responses if r not in RESPONSES]
    if unknown or not responses:
        raise DomainError(f"responses must be a non-empty subset of {', '.join(RESPONSES)}, got {list(responses)}")
    if not bandwidth_minutes > 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth_minutes}")
    cfg = cfg or default_config()
    state = initial_state(test_csv, train_csv, responses, cfg, seed, min_count, bandwidth_minutes, output, n_jobs)
    final = app.invoke(state)
    if final["errors"]:
        raise PipelineStageError(final.get("failed_stage") or "unknown", final["errors"][0])
    return final["results"]
