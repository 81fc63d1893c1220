"""
Line-oriented scenario files.

    # comment
    command = compare
    schedule = 0, 8, 20
    dx = 0.1

    [soliton]
    x0 = -16
    p = 1

Keys before the first `[soliton]` header are global; each header opens the
block of the next soliton. `--override key=value` pairs address global keys
or `soliton.<i>.<key>` with a 0-based soliton index.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from solitonlab.core.errors import ConfigParseError, ConfigValidationError
from solitonlab.core.grid import stability_bound
from solitonlab.core.schemas import (
    GridDomain,
    GridSettings,
    RunConfig,
    Scenario,
    SolitonSpec,
)

DOMAIN_KEYS = ("x_min", "x_max", "dx")
GRID_KEYS = ("dt", "scheme", "norm_monitor_interval", "norm_drift_bound", "boundary_tolerance", "interaction")
SCENARIO_KEYS = ("tolerance", "schedule", "overlap_tolerance")
RUN_KEYS = ("command", "n_gaussians", "snapshot_stride", "q_min", "q_max", "q_points", "p")
GLOBAL_KEYS = frozenset(DOMAIN_KEYS + GRID_KEYS + SCENARIO_KEYS + RUN_KEYS)
SOLITON_KEYS = frozenset(SolitonSpec.model_fields)

SOLITON_SECTION = "soliton"


def _split_assignment(raw: str, line: int) -> Tuple[str, str]:
    if "=" not in raw:
        raise ConfigParseError(f"expected 'key = value', got {raw!r}", line=line)
    key, value = (part.strip() for part in raw.split("=", 1))
    if not key:
        raise ConfigParseError("empty key", line=line)
    if not value:
        raise ConfigParseError(f"empty value for {key!r}", line=line)
    return key, value


def parse_sections(text: str) -> Tuple[Dict[str, str], List[Dict[str, str]]]:
    """Raw string values of the global block and of every soliton block."""
    global_values: Dict[str, str] = {}
    solitons: List[Dict[str, str]] = []
    current = global_values
    allowed = GLOBAL_KEYS

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigParseError(f"malformed section header {line!r}", line=number)
            name = line[1:-1].strip()
            if name != SOLITON_SECTION:
                raise ConfigParseError(f"unknown section [{name}]", line=number)
            current = {}
            solitons.append(current)
            allowed = SOLITON_KEYS
            continue

        key, value = _split_assignment(line, number)
        if key not in allowed:
            raise ConfigParseError(f"unknown key {key!r}", line=number)
        if key in current:
            raise ConfigParseError(f"duplicate key {key!r}", line=number)
        current[key] = value

    return global_values, solitons


def _apply_override(item: str, global_values: Dict[str, str], solitons: List[Dict[str, str]]) -> None:
    if "=" not in item:
        raise ConfigValidationError(f"expected key=value, got {item!r}", key="override")
    key, value = (part.strip() for part in item.split("=", 1))

    if key.startswith(SOLITON_SECTION + "."):
        parts = key.split(".")
        if len(parts) != 3 or not parts[1].isdigit():
            raise ConfigValidationError(f"expected soliton.<i>.<key>, got {key!r}", key="override")
        index, name = int(parts[1]), parts[2]
        if index >= len(solitons):
            raise ConfigValidationError(f"no soliton with index {index}", key=key)
        if name not in SOLITON_KEYS:
            raise ConfigValidationError("unknown soliton key", key=key)
        solitons[index][name] = value
        return

    if key not in GLOBAL_KEYS:
        raise ConfigValidationError("unknown key", key=key)
    global_values[key] = value


def _schedule(raw: str) -> List[float]:
    try:
        return [float(part) for part in raw.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigValidationError(f"not a list of numbers: {raw!r}", key="schedule") from e


def _pick(values: Dict[str, str], keys: Sequence[str]) -> Dict[str, Any]:
    return {k: values[k] for k in keys if k in values}


def _validation_error(e: ValidationError, prefix: str = "") -> ConfigValidationError:
    first = e.errors()[0]
    loc = ".".join(str(part) for part in first.get("loc", ()))
    key = f"{prefix}{loc}" if loc else prefix.rstrip(".") or None
    return ConfigValidationError(first.get("msg", str(e)), key=key)


def parse_config(
    text: str,
    *,
    command: Optional[str] = None,
    config_path: Optional[Path] = None,
    out_dir: Optional[Path] = None,
    overrides: Sequence[str] = (),
) -> Tuple[RunConfig, Scenario]:
    """
    Parse and validate a scenario file plus CLI overrides.

    Reason:
    - A bad key or an unstable time step should fail before any evolution starts.

    Benefit:
    - Errors name the offending key, and parse errors name the line.
    """
    global_values, soliton_values = parse_sections(text)
    for item in overrides:
        _apply_override(item, global_values, soliton_values)

    file_command = global_values.get("command")
    if command is not None and file_command is not None and file_command != command:
        raise ConfigValidationError(
            f"file says {file_command!r} but the command line says {command!r}", key="command"
        )
    chosen = command or file_command
    if chosen is None:
        raise ConfigValidationError("no command given", key="command")

    run_fields: Dict[str, Any] = _pick(global_values, ("n_gaussians", "snapshot_stride", "q_min", "q_max", "q_points"))
    if "p" in global_values:
        run_fields["p_scan"] = global_values["p"]
    try:
        run_config = RunConfig(
            command=chosen,
            config_path=config_path,
            out_dir=out_dir if out_dir is not None else Path("out"),
            overrides={k.strip(): v.strip() for k, v in (item.split("=", 1) for item in overrides)},
            **run_fields,
        )
    except ValidationError as e:
        raise _validation_error(e) from e

    solitons: List[SolitonSpec] = []
    for index, values in enumerate(soliton_values):
        try:
            solitons.append(SolitonSpec(**values))
        except ValidationError as e:
            raise _validation_error(e, prefix=f"soliton.{index}.") from e
    if not solitons:
        solitons = [SolitonSpec(gaussians=run_config.n_gaussians)]

    scenario_fields: Dict[str, Any] = _pick(global_values, ("tolerance", "overlap_tolerance"))
    if "schedule" in global_values:
        scenario_fields["schedule"] = _schedule(global_values["schedule"])
    try:
        scenario = Scenario(
            solitons=solitons,
            domain=GridDomain(**_pick(global_values, DOMAIN_KEYS)),
            grid=GridSettings(**_pick(global_values, GRID_KEYS)),
            **scenario_fields,
        )
    except ValidationError as e:
        raise _validation_error(e) from e

    bound = stability_bound(scenario.domain.dx, scenario.grid.scheme)
    if scenario.grid.dt > bound:
        raise ConfigValidationError(
            f"{scenario.grid.dt:g} exceeds the {scenario.grid.scheme.value} stability bound {bound:g} for dx={scenario.domain.dx:g}",
            key="dt",
        )

    return run_config, scenario


def load_config_file(path: Path, **kwargs: Any) -> Tuple[RunConfig, Scenario]:
    path = Path(path)
    if not path.is_file():
        raise ConfigValidationError(f"no such file: {path}", key="config")
    return parse_config(path.read_text(encoding="utf-8"), config_path=path, **kwargs)
