from __future__ import annotations

import os
from dataclasses import dataclass

from dotenv import load_dotenv


@dataclass(frozen=True)
class EnvConfig:
    # Concurrency of the compare command
    threads: int

    # Diagnostics (SOLITONLAB_QUIET is read by infra.logging on every event)
    progress: bool


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return max(value, minimum)


def load_config() -> EnvConfig:
    """
    Reason:
    - Worker count and progress bars depend on the machine, not on the scenario.

    Benefit:
    - Scenario files stay portable; a local .env tunes the run.
    """
    load_dotenv()

    threads = _int_env("SOLITONLAB_THREADS", 2)
    progress = os.getenv("SOLITONLAB_PROGRESS", "0").strip() == "1"

    return EnvConfig(
        threads=threads,
        progress=progress,
    )
