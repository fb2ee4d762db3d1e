"""
Central configuration — reads environment variables and provides defaults.

Algorithm tunables live in ``squirrel/config.yaml`` (see ``squirrel.utils.ConfigLoader``);
this module only covers deployment concerns.
"""

import os
from dotenv import load_dotenv

load_dotenv()

# ── Logging ───────────────────────────────────────────────────────────────────
LOG_LEVEL: str = os.getenv("SQUIRREL_LOG_LEVEL", "INFO")

# ── Warmstart registry ────────────────────────────────────────────────────────
# Empty means "no registry": unknown spaces start with DE.
REGISTRY_PATH: str = os.getenv("SQUIRREL_REGISTRY_PATH", "")
DEMO_REGISTRY_PATH: str = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), "warmstart", "demo_registry.json"
)

# ── Optimizer settings override (YAML) ────────────────────────────────────────
SETTINGS_PATH: str = os.getenv("SQUIRREL_SETTINGS_PATH", "")

# ── Benchmark harness ─────────────────────────────────────────────────────────
BENCH_RESULTS_PATH: str = os.getenv("BENCH_RESULTS_PATH", "results/bench.csv")
BENCH_WORKERS: int = int(os.getenv("BENCH_WORKERS", "1"))
