import logging
from pathlib import Path

from pcr.config import get_settings
from pcr.pipeline.state import PipelineState
from pcr.reporting import write_json

logger = logging.getLogger(__name__)

REPORT_NAME = "pipeline_report.json"


def generate_report(state: PipelineState) -> PipelineState:
    """
    Writes ``{response: {p_finite, p_asym, U, N_groups, L, K}}`` and the
    stage trace next to it. A failed run writes the trace only.
    """
    logger.info("--- Stage: reporter ---")
    output = state.get("output_path")
    report_path = Path(output) if output else get_settings().reports_dir / REPORT_NAME
    trace_path = report_path.with_name(f"{report_path.stem}_trace.json")
    errors = state.get("errors", [])

    entry = {"stage": "reporter", "status": "completed"}
    try:
        if not errors:
            write_json(state.get("results", {}), report_path)
            state["report_path"] = str(report_path)
            entry["report"] = str(report_path)
        else:
            entry["status"] = "skipped"
            entry["reason"] = f"stage '{state.get('failed_stage')}' failed"
            logger.error("Pipeline failed at %s: %s", state.get("failed_stage"), errors[0])
        state["trace_log"].append(entry)
        write_json({"errors": errors, "trace_log": state["trace_log"]}, trace_path)
    except OSError as e:
        state["errors"].append(f"cannot write report: {e}")
        state["failed_stage"] = state.get("failed_stage") or "reporter"
        entry["status"] = "failed"
        if entry not in state["trace_log"]:
            state["trace_log"].append(entry)
    return state
