"""Pipeline configuration: JSON file, schema validation, dotted overrides."""

from __future__ import annotations

import copy
import json
import os

import jsonschema

from .errors import ConfigError

DEFAULTS = {
    "corpora": {},
    "source_lang": None,
    "target_lang": None,
    "provider": {
        "kind": "mock",
        "endpoint": None,
        "path": None,
        "batch_size": 64,
        "normalize": True,
        "dim": 256,
    },
    "windowing": {"min_len": 128, "stride": 1, "source": "auto"},
    "mining": {"k": 5, "min_sim": 0.65, "symmetric": False},
    "clustering": {"cell_size": 10, "min_cluster_size": 3},
    "alignment": {
        "gap_penalty": 0.15,
        "ma_window": 3,
        "threshold": 0.5,
        "region_cap": 512,
        "ratio_bounds": None,  # null -> per-language-pair defaults
    },
    "eval": {
        "task": None,
        "pool_total": 1000,
        "weights": None,       # null -> uniform over corpora
        "seed": 42,
        "strategies": ["bm25", "dense"],
        "use_pivot": False,
    },
    "audit": {"dataset": None, "n": 100, "seed": 42},
    "seed": 42,
    "threads": 0,              # 0 -> all available cores
    "output_dir": "out",
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "corpora": {
            "type": "object",
            "patternProperties": {"^[a-z]{2,3}$": {"type": "string"}},
            "additionalProperties": False,
        },
        "source_lang": {"type": ["string", "null"]},
        "target_lang": {"type": ["string", "null"]},
        "provider": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["mock", "file", "remote"]},
                "endpoint": {"type": ["string", "null"]},
                "path": {"type": ["string", "null"]},
                "batch_size": {"type": "integer", "minimum": 1},
                "normalize": {"type": "boolean"},
                "dim": {"type": "integer", "minimum": 1},
            },
        },
        "windowing": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "min_len": {"type": "integer", "minimum": 1},
                "stride": {"type": "integer", "minimum": 1},
                "source": {"enum": ["auto", "original", "pivot"]},
            },
        },
        "mining": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "min_sim": {"type": "number", "minimum": -1, "maximum": 1},
                "symmetric": {"type": "boolean"},
            },
        },
        "clustering": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "cell_size": {"type": "integer", "minimum": 1},
                "min_cluster_size": {"type": "integer", "minimum": 1},
            },
        },
        "alignment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gap_penalty": {"type": "number", "minimum": 0},
                "ma_window": {"type": "integer", "minimum": 1},
                "threshold": {"type": "number", "minimum": -1, "maximum": 1},
                "region_cap": {"type": "integer", "minimum": 1},
                "ratio_bounds": {
                    "type": ["array", "null"],
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 2, "maxItems": 2,
                },
            },
        },
        "eval": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "task": {"type": ["string", "null"]},
                "pool_total": {"type": "integer", "minimum": 1},
                "weights": {"type": ["object", "null"]},
                "seed": {"type": "integer", "minimum": 0},
                "strategies": {"type": "array", "items": {
                    "enum": ["bm25", "dense", "bm25-pivot", "dense-pivot"]}},
                "use_pivot": {"type": "boolean"},
            },
        },
        "audit": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dataset": {"type": ["string", "null"]},
                "n": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
    },
}


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_overrides(args: list[str]) -> dict:
    """Turn --section.key=value flags into a nested override dict.

    Values are parsed as JSON when possible, else taken as strings.
    """
    out: dict = {}
    for arg in args:
        if not arg.startswith("--") or "=" not in arg:
            raise ConfigError(f"cannot parse override {arg!r}; "
                              "expected --section.key=value")
        dotted, _, raw = arg[2:].partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = dotted.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return out


def load_config(path: str, overrides: dict | None = None) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            user = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e.msg} (line {e.lineno})")
    cfg = _deep_merge(DEFAULTS, user)
    if overrides:
        cfg = _deep_merge(cfg, overrides)
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as e:
        where = ".".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {e.message}")
    return cfg
