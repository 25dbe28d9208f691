"""View-synchronized Byzantine broadcast: library, simulator, checker.

The core pieces compose as a pipeline: a ScenarioConfig (hand-written or
built from the scenario catalog) drives run_scenario to a deterministic
trace, and run_all_checks turns a trace plus its config into a list of
CheckReport verdicts. The HTTP service and the CLI are thin wrappers over
exactly this pipeline.
"""
from .checker import CheckReport, reports_ok, run_all_checks
from .config import ScenarioConfig
from .harness import run_scenario
from .metrics import TraceMetrics, compute_metrics
from .scenarios import CATALOG, Scenario, build_config, deadline_for
from .trace import TraceEvent, parse_jsonl, read_jsonl, to_jsonl, write_jsonl

__version__ = "0.1.0"

__all__ = [
    "CATALOG",
    "CheckReport",
    "Scenario",
    "ScenarioConfig",
    "TraceEvent",
    "TraceMetrics",
    "build_config",
    "compute_metrics",
    "deadline_for",
    "parse_jsonl",
    "read_jsonl",
    "reports_ok",
    "run_all_checks",
    "run_scenario",
    "to_jsonl",
    "write_jsonl",
]
