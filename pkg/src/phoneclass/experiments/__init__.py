from phoneclass.experiments.config import ExperimentConfig, config_from_dict, load_config, override_seed
from phoneclass.experiments.report import (
    REPORT_SCHEMA_VERSION,
    TableRow,
    build_report,
    load_report,
    render_table,
    render_text,
    tabulate_reports,
    validate_report,
    write_table_csv,
)
from phoneclass.experiments.runner import STAGES, RunPaths, run_experiment

__all__ = [
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "override_seed",
    "REPORT_SCHEMA_VERSION",
    "TableRow",
    "build_report",
    "load_report",
    "render_table",
    "render_text",
    "tabulate_reports",
    "validate_report",
    "write_table_csv",
    "STAGES",
    "RunPaths",
    "run_experiment",
]
