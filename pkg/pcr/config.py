import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

DEFAULT_SEED = 20231019


@dataclass(frozen=True)
class Settings:
    """
    Runtime settings read from the environment (and a local .env file).
    CLI flags take precedence over these values.
    """

    threads: int = 1
    seed: int = DEFAULT_SEED
    reports_dir: Path = Path("reports")
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "Settings":
        threads = int(os.getenv("PCR_THREADS", "1"))
        if threads < 1 and threads != -1:
            raise ValueError(f"PCR_THREADS must be >= 1 or -1 (all cores), got {threads}")
        return cls(
            threads=threads,
            seed=int(os.getenv("PCR_SEED", str(DEFAULT_SEED))),
            reports_dir=Path(os.getenv("PCR_REPORTS_DIR", "reports")),
            log_level=os.getenv("PCR_LOG_LEVEL", "WARNING").upper(),
        )


def get_settings() -> Settings:
    return Settings.from_env()


def resolve_threads(threads: "int | None") -> int:
    """Explicit value wins; otherwise fall back to PCR_THREADS."""
    if threads is not None:
        return threads
    return get_settings().threads
