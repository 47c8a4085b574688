from typing import Any, Dict, List, Optional, TypedDict


class PipelineState(TypedDict):
    test_csv: str
    train_csv: str
    responses: List[str]
    config: Dict[str, Any]  # GroupedPcrConfig as a plain dict
    seed: int
    min_count: int
    bandwidth_minutes: float
    n_jobs: Optional[int]
    output_path: Optional[str]
    test_frame: Optional[Any]  # pandas.DataFrame
    train_frame: Optional[Any]
    filtered_frame: Optional[Any]
    kernel_model: Optional[Any]  # KernelModel
    datasets: Dict[str, Any]  # response -> Dataset
    fits: Dict[str, List[float]]  # response -> [b0, b1]
    results: Dict[str, Any]  # response -> GroupedPcrResult
    report_path: Optional[str]
    failed_stage: Optional[str]
    errors: List[str]
    trace_log: List[dict]
