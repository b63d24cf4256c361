"""INI-style experiment configs.

Sections and keys::

    [experiment]  methods, seeds, epochs, eval_size, output, jobs,
                  warm_start_epochs, split_fraction, scott_union_bound
    [task]        kind (gaussian|triangle|anchor|custom-score|mnist17) and
                  the matching TaskSpec / MnistSpec fields
    [train]       TrainConfig fields
    [bbe]         delta, gamma

Lists are comma separated.  Unknown sections or keys are schema errors.
"""

from __future__ import annotations

import configparser
import dataclasses
import typing
from pathlib import Path

from .bench import ExperimentConfig
from .core import PUKitError, SchemaError
from .learn import TrainConfig
from .mnist import MnistSpec
from .mpe import BBEConfig
from .synth import TaskSpec

SECTIONS = {
    "experiment": ExperimentConfig,
    "task": TaskSpec,
    "train": TrainConfig,
    "bbe": BBEConfig,
}
NESTED = {"task", "train", "bbe"}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_value(text: str, default, hint):
    text = text.strip()
    if isinstance(default, bool):
        return _parse_bool(text)
    if isinstance(default, tuple):
        items = [t.strip() for t in text.split(",") if t.strip()]
        sample = default[0] if default else None
        if isinstance(sample, str):
            return tuple(items)
        if isinstance(sample, int) and not isinstance(sample, bool):
            return tuple(int(t) for t in items)
        return tuple(float(t) for t in items)
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float) or "float" in str(hint).lower():
        if text.lower() in ("none", ""):
            return None
        return float(text)
    return text


def _build(cls, section: str, items: dict, extra: dict | None = None):
    hints = typing.get_type_hints(cls)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = dict(extra or {})
    for key, raw in items.items():
        if key not in fields or key in NESTED:
            raise SchemaError(f"[{section}] {key}: unknown key")
        f = fields[key]
        default = f.default if f.default is not dataclasses.MISSING else None
        try:
            kwargs[key] = _parse_value(raw, default, hints.get(key))
        except ValueError as exc:
            raise SchemaError(f"[{section}] {key}: {exc}") from None
    try:
        return cls(**kwargs)
    except PUKitError as exc:
        raise SchemaError(f"[{section}] {exc}") from None
    except TypeError as exc:
        raise SchemaError(f"[{section}] {exc}") from None


def _task(items: dict):
    items = dict(items)
    if items.get("kind", "").strip() == "mnist17":
        items.pop("kind")
        if "path" not in items:
            raise SchemaError("[task] path: required for kind = mnist17")
        return _build(MnistSpec, "task", items)
    return _build(TaskSpec, "task", items)


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SchemaError(f"config syntax: {exc}") from None
    for name in cp.sections():
        if name not in SECTIONS:
            raise SchemaError(f"[{name}]: unknown section")
    parts = {}
    if cp.has_section("task"):
        parts["task"] = _task(dict(cp["task"]))
    if cp.has_section("train"):
        parts["train"] = _build(TrainConfig, "train", dict(cp["train"]))
    if cp.has_section("bbe"):
        parts["bbe"] = _build(BBEConfig, "bbe", dict(cp["bbe"]))
    exp = dict(cp["experiment"]) if cp.has_section("experiment") else {}
    return _build(ExperimentConfig, "experiment", exp, parts)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return str(value)


def dump_config(config: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config`."""
    lines = ["[experiment]"]
    for f in dataclasses.fields(ExperimentConfig):
        if f.name not in NESTED:
            lines.append(f"{f.name} = {_fmt(getattr(config, f.name))}")
    task = config.task
    lines += ["", "[task]"]
    if isinstance(task, MnistSpec):
        lines.append("kind = mnist17")
    for f in dataclasses.fields(task):
        lines.append(f"{f.name} = {_fmt(getattr(task, f.name))}")
    for name in ("train", "bbe"):
        obj = getattr(config, name)
        lines += ["", f"[{name}]"]
        lines += [f"{f.name} = {_fmt(getattr(obj, f.name))}" for f in dataclasses.fields(obj)]
    return "\n".join(lines) + "\n"
