"""Experiment orchestration: config, parallel runs, records and summaries."""
from __future__ import annotations

from ..statistics import Scenario, ScenarioId
from .config import SCHEMA_VERSION, ConfigError, ExperimentConfig, load_config, load_config_text, parse_config
from .records import ExperimentRecord, deserialize, read_records, serialize, write_records
from .runner import RunError, RunResult, run
from .summary import Summary, format_summary, summarize, write_summary


def null_holds(scn: Scenario) -> bool:
    """Whether the statistic's null hypothesis holds under the data law."""
    if scn.id is ScenarioId.MEAN_ROOT:
        return scn.hypothesized_mean == scn.data_law.mean
    return True


def run_experiment(cfg: ExperimentConfig, out_dir=None, workers: int | None = None):
    """Run, summarize and write every output file; returns (result, summary)."""
    result = run(cfg, out_dir, workers)
    summary = summarize(
        result.records,
        limit=result.limit,
        expect=result.config.expect,
        threshold=result.config.threshold,
        null_holds=null_holds(result.config.scenario),
        conditional=result.conditional,
        inference="inference" in result.config.run,
    )
    result.files.update(write_summary(summary, result.config.output))
    return result, summary


__all__ = [
    "SCHEMA_VERSION",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentRecord",
    "RunError",
    "RunResult",
    "Summary",
    "deserialize",
    "format_summary",
    "load_config",
    "load_config_text",
    "null_holds",
    "parse_config",
    "read_records",
    "run",
    "run_experiment",
    "serialize",
    "summarize",
    "write_records",
    "write_summary",
]
