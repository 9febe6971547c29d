"""Scenario catalog, config validation, and artifact writing.

A run consumes one JSON config and produces three files in the configured
output directory: a JSON report, a CSV table, and (unless disabled) a PNG
figure.  Float cells are written through repr() so that a config plus a
seed reproduces the CSV byte for byte.
"""

from __future__ import annotations

import csv
import json
import numbers
import os
from dataclasses import dataclass

from hybridlab.cli import plots
from hybridlab.cli.runners import SCENARIO_SPECS, Scenario, ScenarioResult
from hybridlab.errors import ValidationError

CATALOG = {spec.name: spec for spec in SCENARIO_SPECS}

REPORT_SUFFIX = "-report.json"
TABLE_SUFFIX = ".csv"
FIGURE_SUFFIX = ".png"


@dataclass(frozen=True)
class ScenarioConfig:
    """One run request: scenario name, parameter overrides, output target."""

    name: str
    module: str
    parameters: dict
    output_dir: str
    seed: int


def load_config(path: str) -> ScenarioConfig:
    """Parse a config file.  Raises ValidationError on shape problems."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValidationError("config root must be a JSON object")
    required = {"name", "module", "parameters", "output_dir", "seed"}
    missing = required - raw.keys()
    if missing:
        raise ValidationError(f"config missing keys: {sorted(missing)}")
    extra = raw.keys() - required
    if extra:
        raise ValidationError(f"config has unknown keys: {sorted(extra)}")
    if not isinstance(raw["name"], str) or not isinstance(raw["module"], str):
        raise ValidationError("name and module must be strings")
    if not isinstance(raw["parameters"], dict):
        raise ValidationError("parameters must be a JSON object")
    if not isinstance(raw["output_dir"], str) or not raw["output_dir"]:
        raise ValidationError("output_dir must be a nonempty string")
    if isinstance(raw["seed"], bool) or not isinstance(raw["seed"], int) or raw["seed"] < 0:
        raise ValidationError("seed must be a nonnegative integer")
    return ScenarioConfig(
        name=raw["name"],
        module=raw["module"],
        parameters=raw["parameters"],
        output_dir=raw["output_dir"],
        seed=raw["seed"],
    )


def _is_number(value) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _check_parameter(key: str, value, default) -> None:
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ValidationError(f"parameter {key!r} must be a string")
    elif isinstance(default, (list, tuple)):
        if (not isinstance(value, (list, tuple))
                or len(value) != len(default)
                or not all(_is_number(v) for v in value)):
            raise ValidationError(
                f"parameter {key!r} must be a list of {len(default)} numbers")
    elif not _is_number(value):
        raise ValidationError(f"parameter {key!r} must be a number")


def validate_config(config: ScenarioConfig) -> Scenario:
    """Check a config against the catalog; returns the matching scenario."""
    scenario = CATALOG.get(config.name)
    if scenario is None:
        known = ", ".join(sorted(CATALOG))
        raise ValidationError(f"unknown scenario {config.name!r} (known: {known})")
    if config.module != scenario.module:
        raise ValidationError(
            f"scenario {config.name!r} belongs to module {scenario.module!r},"
            f" not {config.module!r}")
    for key, value in config.parameters.items():
        if key not in scenario.defaults:
            allowed = ", ".join(sorted(scenario.defaults))
            raise ValidationError(
                f"unknown parameter {key!r} for {config.name!r} (allowed: {allowed})")
        _check_parameter(key, value, scenario.defaults[key])
    return scenario


def merged_parameters(scenario: Scenario, config: ScenarioConfig) -> dict:
    merged = dict(scenario.defaults)
    merged.update(config.parameters)
    return merged


def list_scenarios() -> tuple:
    """All registered scenarios in stable catalog order."""
    return SCENARIO_SPECS


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, numbers.Integral):
        return str(int(value))
    return repr(float(value))


def _write_table(path: str, result: ScenarioResult) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(result.csv_header)
        for row in result.csv_rows:
            writer.writerow([_format_cell(cell) for cell in row])


def _jsonable(value):
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        return float(value)
    if hasattr(value, "tolist"):
        return _jsonable(value.tolist())
    return value


def run_scenario(config: ScenarioConfig, render_plots: bool = True) -> dict:
    """Execute one scenario and write its artifacts.

    Returns {"report": path, "table": path, "figure": path or None}.
    """
    scenario = validate_config(config)
    params = merged_parameters(scenario, config)
    result = scenario.runner(params, config.seed)

    os.makedirs(config.output_dir, exist_ok=True)
    report_path = os.path.join(config.output_dir, config.name + REPORT_SUFFIX)
    table_path = os.path.join(config.output_dir, config.name + TABLE_SUFFIX)
    figure_path = os.path.join(config.output_dir, config.name + FIGURE_SUFFIX)

    envelope = {
        "scenario": config.name,
        "module": config.module,
        "seed": config.seed,
        "parameters": _jsonable(params),
        "results": _jsonable(result.report),
    }
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(envelope, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _write_table(table_path, result)

    if render_plots:
        plots.render(result.plot, figure_path)
    else:
        figure_path = None

    return {"report": report_path, "table": table_path, "figure": figure_path}
