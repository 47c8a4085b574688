"""
Pytest configuration and shared fixtures for the PCR test suite.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from pcr.data import Dataset
from pcr.randkit import RngStream
from pcr.samplers import GaussianLinearSampler, StandardNormalSampler
from pcr.schemas import ModelSpec, PcrConfig


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Keep every test off the developer's .env values and the repo's reports/ directory."""
    for name in ("PCR_THREADS", "PCR_SEED", "PCR_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("PCR_REPORTS_DIR", str(tmp_path / "reports"))


@pytest.fixture
def rng():
    return RngStream.derive(1234, "tests").generator()


@pytest.fixture
def gaussian_null_data():
    """Z ~ N(0, I_3), X | Z ~ N(v'Z, 1), Y depends on Z only; n = 200."""
    gen = RngStream.derive(99, "gaussian-null").generator()
    v = np.array([0.5, -1.0, 0.25])
    z = gen.standard_normal((200, 3))
    x = z @ v + gen.standard_normal(200)
    y = z.sum(axis=1) + gen.standard_normal(200)
    return Dataset(x, y, z), GaussianLinearSampler(v)


@pytest.fixture
def independent_pair():
    """Z empty, X and Y independent standard normals; n = 150."""
    gen = RngStream.derive(7, "independent").generator()
    x = gen.standard_normal(150)
    y = gen.standard_normal(150)
    return Dataset(x, y, np.empty((150, 0))), StandardNormalSampler()


@pytest.fixture
def pcr_config():
    return PcrConfig(num_labels=5, counterfeit_ratio=4, alpha=0.1, threshold_kind="asym")


@pytest.fixture
def quadratic_null_spec():
    return ModelSpec(model_id="quadratic_null", n=100)


TRIP_HEADER = "duration_min,start_loc,end_loc,hour,user_type,date,weekday\n"


@pytest.fixture
def write_trips(tmp_path):
    """Write trip rows (already CSV-formatted) under a header and return the path."""
    def _write(rows, name="trips.csv", header=TRIP_HEADER):
        path = tmp_path / name
        path.write_text(header + "".join(r + "\n" for r in rows))
        return path
    return _write
