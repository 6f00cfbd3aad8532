"""Configuration-driven orchestration: sweep, score, bdrate, plot."""

from vcmbench.harness.bdreport import cmd_bdrate, collect_series
from vcmbench.harness.config import ExperimentConfig, load_config
from vcmbench.harness.ledger import LedgerRow, RunLedger, read_completed_rows
from vcmbench.harness.plots import cmd_plot, render_figure
from vcmbench.harness.score import cmd_score
from vcmbench.harness.sweep import cmd_sweep

__all__ = [
    "ExperimentConfig",
    "LedgerRow",
    "RunLedger",
    "cmd_bdrate",
    "cmd_plot",
    "cmd_score",
    "cmd_sweep",
    "collect_series",
    "load_config",
    "read_completed_rows",
    "render_figure",
]
