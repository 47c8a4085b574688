"""Trip-data workflow: ingestion, route filtering, kernel sampler, OLS scores and grouped PCR."""
from pcr.pipeline.fixtures import DEFAULT_ROUTES, RouteSpec, TripFixture, generate_trip_fixture
from pcr.pipeline.grouped import grouped_pcr, partition_groups, summarize_response
from pcr.pipeline.kernel import KernelModel, KernelSampler, kernel_fit
from pcr.pipeline.loader import load_trips
from pcr.pipeline.routes import filter_routes, route_histogram
from pcr.pipeline.scorer import build_dataset, encode_response, ols_fit

__all__ = [
    "DEFAULT_ROUTES",
    "KernelModel",
    "KernelSampler",
    "RouteSpec",
    "TripFixture",
    "build_dataset",
    "encode_response",
    "filter_routes",
    "generate_trip_fixture",
    "grouped_pcr",
    "kernel_fit",
    "load_trips",
    "ols_fit",
    "partition_groups",
    "route_histogram",
    "summarize_response",
]
