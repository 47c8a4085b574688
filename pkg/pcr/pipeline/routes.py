import logging

import pandas as pd

logger = logging.getLogger(__name__)

ROUTE_COLUMNS = ["start_loc", "end_loc"]


def route_histogram(frame: pd.DataFrame) -> pd.Series:
    """Ride count per (start_loc, end_loc)."""
    if frame.empty:
        return pd.Series(dtype=int)
    return frame.groupby(ROUTE_COLUMNS).size()


def filter_routes(test: pd.DataFrame, train: pd.DataFrame, min_count: int = 20) -> pd.DataFrame:
    """Keep the test rides whose route has at least ``min_count`` training rides."""
    counts = route_histogram(train)
    if test.empty or counts.empty:
        logger.info("Route filter (min %d training rides): kept 0 of %d test rides", min_count, len(test))
        return test.iloc[0:0].reset_index(drop=True)
    keys = pd.MultiIndex.from_frame(test[ROUTE_COLUMNS])
    train_counts = counts.reindex(keys).fillna(0).to_numpy()
    kept = test.loc[train_counts >= min_count].reset_index(drop=True)
    logger.info("Route filter (min %d training rides): kept %d of %d test rides", min_count, len(kept), len(test))
    return kept
