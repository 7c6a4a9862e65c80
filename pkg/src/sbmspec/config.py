"""Flat ``key=value`` configuration files and experiment configs."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field


class ConfigError(ValueError):
    """Invalid configuration; message names the offending line or field."""


def parse_key_values(source):
    """Parse ``key=value`` lines from a path, file object or text.

    Blank lines and ``#`` comments are ignored.  Duplicate keys are an error.
    """
    if isinstance(source, dict):
        return dict(source)
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="utf-8") as f:
            text = f.read()
    elif hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
    out = {}
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _floats(key, text):
    """Comma list, or ``start:stop:num`` for an inclusive linspace."""
    import numpy as np

    text = text.strip()
    try:
        if ":" in text:
            a, b, m = text.split(":")
            vals = [float(v) for v in np.linspace(float(a), float(b), int(m))]
        else:
            vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"field {key!r}: cannot parse number list {text!r}") from None
    if not vals:
        raise ConfigError(f"field {key!r}: grid is empty")
    return vals


KINDS = ("ratio-surface", "sweep-gamma-alpha", "sweep-n", "zero-comm", "linkpred", "analytic-accuracy")

# grid fields each kind accepts, with defaults
_DEFAULTS = {
    "ratio-surface": {"alpha": "0.01:1:100", "x": "0.01:2:200", "n": "1000000", "pi": "0.5"},
    "sweep-gamma-alpha": {"alpha": "0.010,0.012,0.014,0.016,0.018", "x": "0.025,0.125,0.4,1.2",
                          "n": "1000", "pi": "0.5", "replicates": "20"},
    "sweep-n": {"n": "1000,1250,1500,1750,2000", "alpha": "0.01", "beta": "0.01", "gamma": "0.002",
                "pi": "0.4", "replicates": "20"},
    "zero-comm": {"n": "2000", "alpha": "0.02", "beta": "0.02", "pi": "0.5", "replicates": "20"},
    "linkpred": {"manifest": "", "sample_nodes": "100", "runs": "5", "k_grid": "10:100:10"},
    "analytic-accuracy": {"n": "1000", "alpha": "0.4,0.5,0.6", "beta": "0.5,0.7,0.9",
                          "x": "0.1,0.25,0.5,0.75,1.0,1.25,1.5,1.75", "pi": "0.5", "replicates": "1"},
}
_INT_FIELDS = {"replicates", "sample_nodes", "runs", "workers", "seed", "restarts"}
_STR_FIELDS = {"manifest", "output", "kind", "transfer"}
_COMMON = {"seed": "0", "output": "", "workers": "1", "restarts": "5", "transfer": "procrustes"}


@dataclass
class ExperimentConfig:
    kind: str
    grids: dict = field(default_factory=dict)
    replicates: int = 1
    seed: int = 0
    output: str = ""
    options: dict = field(default_factory=dict)

    def grid(self, key):
        return self.grids[key]

    def scalar(self, key):
        v = self.grids[key]
        if len(v) != 1:
            raise ConfigError(f"field {key!r}: expected a single value, got {len(v)}")
        return v[0]


def build_config(kind, values=None):
    """Validate raw string values for ``kind`` and fill defaults.

    Raises :class:`ConfigError` naming the field on any problem.
    """
    if kind not in KINDS:
        raise ConfigError(f"field 'kind': unknown experiment kind {kind!r} (expected one of {', '.join(KINDS)})")
    raw = dict(_COMMON)
    raw.update(_DEFAULTS[kind])
    values = dict(values or {})
    values.pop("kind", None)
    allowed = set(raw)
    for key in values:
        if key not in allowed:
            raise ConfigError(f"field {key!r}: not recognised for kind {kind!r}")
    raw.update({k: str(v) for k, v in values.items() if v is not None})

    grids, options = {}, {}
    ints = {}
    for key, text in raw.items():
        if key in _INT_FIELDS:
            try:
                ints[key] = int(text)
            except ValueError:
                raise ConfigError(f"field {key!r}: expected an integer, got {text!r}") from None
        elif key in _STR_FIELDS:
            options[key] = text
        else:
            grids[key] = _floats(key, text)
    replicates = ints.pop("replicates", 1)
    if replicates < 1:
        raise ConfigError("field 'replicates': must be >= 1")
    if ints.get("workers", 1) < 1:
        raise ConfigError("field 'workers': must be >= 1")
    options.update({k: v for k, v in ints.items() if k != "seed"})
    if "n" in grids:
        if any(v < 2 or v != int(v) for v in grids["n"]):
            raise ConfigError("field 'n': node counts must be integers >= 2")
    for key in ("alpha", "beta", "gamma"):
        if key in grids and any(not 0 <= v <= 1 for v in grids[key]):
            raise ConfigError(f"field {key!r}: probabilities must lie in [0, 1]")
    if "pi" in grids and any(not 0 < v < 1 for v in grids["pi"]):
        raise ConfigError("field 'pi': must lie in (0, 1)")
    if "x" in grids and any(v < 0 for v in grids["x"]):
        raise ConfigError("field 'x': ratios must be nonnegative")
    if kind == "linkpred" and not options.get("manifest"):
        raise ConfigError("field 'manifest': required for linkpred")
    if options.get("transfer") not in ("procrustes", "refit"):
        raise ConfigError("field 'transfer': expected 'procrustes' or 'refit'")
    return ExperimentConfig(kind, grids, replicates, ints.get("seed", 0), options.get("output", ""), options)


def load_config(source, kind=None, overrides=None):
    values = parse_key_values(source) if source is not None else {}
    kind = kind or values.get("kind")
    if kind is None:
        raise ConfigError("field 'kind': missing")
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(kind, values)
