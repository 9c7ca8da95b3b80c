"""Config parsing and report emitters: key=value configs, CSV, JSON.

Config files are flat `key=value` text with `#` comments.  The nine rate
keys (`b, d, eps1, eps2, lambda, alpha, gamma, beta1, beta2`) are all
required and must parse to a valid parameter set; anything else must be a
known command option or the parse fails with a file:line message.  The
`lambda` key maps to the `lam` field (the bare word is reserved in Python).

Numbers serialize with 17 significant digits, enough to round-trip a
64-bit float exactly.  All file writes go through a temp file in the
target directory followed by an atomic rename.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from typing import IO, Any, Iterable

import numpy as np

from .dynamics import Trajectory
from .errors import ConfigError
from .model import ModelParams

__all__ = [
    "RunConfig",
    "parse_config",
    "load_config",
    "parse_range",
    "format_float",
    "trajectory_csv_rows",
    "write_trajectory_csv",
    "parse_trajectory_csv",
    "to_jsonable",
    "emit_json",
    "parse_json",
    "atomic_write_text",
]

_PARAM_KEYS = ("b", "d", "eps1", "eps2", "lambda", "alpha", "gamma", "beta1", "beta2")
_KEY_TO_FIELD = {k: ("lam" if k == "lambda" else k) for k in _PARAM_KEYS}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """A parsed config: the parameter set plus raw command options."""

    params: ModelParams
    options: dict[str, str]
    source: str


def parse_config(
    text: str,
    source: str = "<config>",
    allowed_options: Iterable[str] = (),
) -> RunConfig:
    """Parse flat key=value config text.

    Args:
        text: config content.
        source: name used in error messages.
        allowed_options: option keys legal for the invoking command, beyond
            the nine parameter keys.

    Raises:
        ConfigError: malformed line, unknown key, duplicate key, value not
            a number (for parameter keys), missing parameter keys, or a
            parameter set rejected by validation.  Messages carry
            source:line where applicable.
    """
    allowed = set(allowed_options)
    params_raw: dict[str, float] = {}
    options: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in _KEY_TO_FIELD:
            if key in params_raw:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
            try:
                params_raw[key] = float(value)
            except ValueError:
                raise ConfigError(
                    f"{source}:{lineno}: value for {key!r} is not a number: {value!r}"
                ) from None
        elif key in allowed:
            if key in options:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
            options[key] = value
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
    missing = [k for k in _PARAM_KEYS if k not in params_raw]
    if missing:
        raise ConfigError(f"{source}: missing parameter keys: {', '.join(missing)}")
    try:
        params = ModelParams(**{_KEY_TO_FIELD[k]: v for k, v in params_raw.items()})
    except ValueError as err:
        raise ConfigError(f"{source}: {err}") from None
    return RunConfig(params=params, options=options, source=source)


def load_config(path: str, allowed_options: Iterable[str] = ()) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return parse_config(text, source=path, allowed_options=allowed_options)


def parse_range(text: str, key: str, source: str = "<config>") -> tuple[float, float, int]:
    """Parse a sweep range written as lo:hi:n."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{source}: {key} must be lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"{source}: {key} must be lo:hi:n with numeric parts, "
                          f"got {text!r}") from None
    return lo, hi, n


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def trajectory_csv_rows(traj: Trajectory) -> tuple[list[str], np.ndarray]:
    """Header and row data for a trajectory CSV.

    planar: t,s,i; proportions: t,s,i,r; population: t,s,i,r,S,I,R,N with
    proportions derived from the head counts.
    """
    if traj.system == "planar":
        header = ["t", "s", "i"]
        data = np.column_stack([traj.times, traj.states])
    elif traj.system == "proportions":
        header = ["t", "s", "i", "r"]
        data = np.column_stack([traj.times, traj.states])
    elif traj.system == "population":
        header = ["t", "s", "i", "r", "S", "I", "R", "N"]
        counts = traj.states
        n = np.sum(counts, axis=1)
        props = counts / n[:, None]
        data = np.column_stack([traj.times, props, counts, n])
    else:
        raise ValueError(f"unknown trajectory system {traj.system!r}")
    return header, data


def write_trajectory_csv(traj: Trajectory, target: str | IO[str]) -> None:
    header, data = trajectory_csv_rows(traj)
    lines = [",".join(header)]
    for row in data:
        lines.append(",".join(format_float(x) for x in row))
    text = "\n".join(lines) + "\n"
    if isinstance(target, str):
        atomic_write_text(target, text)
    else:
        target.write(text)


def parse_trajectory_csv(text: str) -> tuple[list[str], np.ndarray]:
    """Inverse of write_trajectory_csv: (header, data rows)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty CSV")
    header = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return header, data


def to_jsonable(obj: Any) -> Any:
    """Recursively convert reports to JSON-encodable structures.

    Dataclasses become dicts tagged with their class name; complex numbers
    become {"re": ..., "im": ...}; arrays become nested lists.  Lossless
    for the report types of this package.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out: dict[str, Any] = {"type": type(obj).__name__}
        for field in dataclasses.fields(obj):
            out[field.name] = to_jsonable(getattr(obj, field.name))
        return out
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False)


def parse_json(text: str) -> Any:
    return json.loads(text)


def atomic_write_text(path: str, text: str) -> None:
    """Write via temp file + rename so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
