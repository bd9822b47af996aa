"""Experiment configuration: canonical JSON with dotted overrides.

A config is a JSON object with a mandatory ``seed`` and an ``operation``
naming the subcommand, plus the sections that subcommand needs (``model``,
``coefficients``, ``skeletons``, ``params``).  :func:`dumps` writes the
canonical form (sorted keys, two-space indent, trailing newline), so
``dumps(loads(text)) == text`` for any canonical ``text``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .rng import check_seed

OPERATIONS = (
    "analyze-levy",
    "skeleton",
    "simulate",
    "support-check",
    "inclusion-check",
    "tilt-check",
    "reach",
    "metric",
)

# sections each subcommand needs besides seed and params
REQUIRED = {
    "analyze-levy": ("model",),
    "skeleton": ("model", "coefficients", "skeletons"),
    "simulate": ("model", "coefficients"),
    "support-check": ("model", "coefficients", "skeletons"),
    "inclusion-check": ("model", "coefficients"),
    "tilt-check": ("model", "coefficients"),
    "reach": ("model", "coefficients"),
    "metric": ("paths",),
}

_KNOWN = {"seed", "operation", "model", "coefficients", "skeletons", "params", "paths", "out"}


def dumps(data):
    """Canonical JSON text of ``data``."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(data, assignment):
    """Apply ``key.sub=value`` in place; ``value`` is parsed as JSON when possible."""
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise ConfigError(f"override {assignment!r} is not of the form KEY=VALUE")
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        if isinstance(node, list):
            try:
                node = node[int(part)]
            except (ValueError, IndexError):
                raise ConfigError(f"override {assignment!r}: bad list index {part!r}") from None
            continue
        if not isinstance(node, dict):
            raise ConfigError(f"override {assignment!r}: {part!r} is not a section")
        node = node.setdefault(part, {})
    last = parts[-1]
    value = _parse_value(raw)
    if isinstance(node, list):
        try:
            node[int(last)] = value
        except (ValueError, IndexError):
            raise ConfigError(f"override {assignment!r}: bad list index {last!r}") from None
    elif isinstance(node, dict):
        node[last] = value
    else:
        raise ConfigError(f"override {assignment!r}: parent is not a section")
    return data


@dataclass
class ExperimentConfig:
    seed: int
    operation: str
    model: dict = None
    coefficients: dict = None
    skeletons: list = None
    paths: list = None
    params: dict = field(default_factory=dict)
    out: str = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.seed is None:
            raise ConfigError("schema: 'seed' is mandatory (integer in [0, 2^64))")
        try:
            self.seed = check_seed(self.seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"schema: {exc}") from None
        if self.operation not in OPERATIONS:
            raise ConfigError(f"schema: 'operation' must be one of {list(OPERATIONS)}, got {self.operation!r}")
        for section in REQUIRED[self.operation]:
            if getattr(self, section) is None:
                raise ConfigError(f"schema: operation {self.operation!r} requires section {section!r}")
        if not isinstance(self.params, dict):
            raise ConfigError("schema: 'params' must be an object")
        if self.skeletons is not None and not isinstance(self.skeletons, list):
            raise ConfigError("schema: 'skeletons' must be a list")

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("schema: config must be a JSON object")
        unknown = sorted(set(data) - _KNOWN)
        if unknown:
            raise ConfigError(f"schema: unknown top-level keys {unknown}")
        if "seed" not in data:
            raise ConfigError("schema: 'seed' is mandatory (integer in [0, 2^64))")
        return cls(**{k: data[k] for k in data})

    def to_dict(self):
        out = {"seed": self.seed, "operation": self.operation, "params": self.params}
        for key in ("model", "coefficients", "skeletons", "paths", "out"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out

    def dumps(self):
        return dumps(self.to_dict())

    def digest(self, exclude=("out",)):
        """SHA-256 of the canonical text, ignoring ``exclude`` keys."""
        data = {k: v for k, v in self.to_dict().items() if k not in exclude}
        return hashlib.sha256(dumps(data).encode("utf-8")).hexdigest()


def loads(text, overrides=(), seed=None, operation=None):
    """Parse config text, apply ``--set`` overrides and an optional seed/operation."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("schema: config must be a JSON object")
    for item in overrides:
        apply_override(data, item)
    if seed is not None:
        data["seed"] = seed
    if operation is not None:
        data.setdefault("operation", operation)
        if data["operation"] != operation:
            raise ConfigError(f"config operation {data['operation']!r} does not match subcommand {operation!r}")
    return ExperimentConfig.from_dict(data)


def load(path, overrides=(), seed=None, operation=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return loads(text, overrides, seed, operation)


__all__ = ["OPERATIONS", "ExperimentConfig", "apply_override", "dumps", "load", "loads"]
