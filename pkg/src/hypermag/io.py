"""Run configuration files and the JSON-lines record store.

Config files are UTF-8 ``key = value`` lines; ``#`` starts a comment.
List-valued keys take comma-separated values.  The store holds one JSON
envelope per line:

    {"v": 1, "kind": ..., "payload": ..., "config_hash": ..., "tool_version": ...}
"""
from __future__ import annotations

import fcntl
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, ParseError, SchemaVersionMismatch

SCHEMA_VERSION = 1
KINDS = ("orbit", "audit", "reduction", "sweep")
STORE_ENV = "HYPERMAG_STORE"
DEFAULT_STORE = "hypermag_store.jsonl"


@dataclass
class RunConfig:
    k0: float | None = None
    r: float | None = None
    eps: float = 0.0
    eps_list: tuple = ()
    k1: str = "linear-e3"
    chart_base: str = "e3"
    start: tuple = (0.0, 0.0)
    radii: tuple = ()
    c_values: tuple = ()
    method: str = "rk45"
    tol: float = 1e-10
    step: float = 1.0 / 2048
    steps: int = 2048
    T: float = 1.0
    speed: float = 1.0
    n_samples: int = 256
    grid_n: int = 21
    grid_extent: float = 0.2
    seed: int = 20100305
    out: str = ""
    store: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.k0 is not None and self.r is not None:
            raise ConfigError("r and k0 are mutually exclusive")
        if self.k0 is not None and not self.k0 > 0:
            raise ConfigError("k0 must be positive")
        if self.r is not None and not self.r > 0:
            raise ConfigError("r must be positive")
        if self.eps < 0 or any(e < 0 for e in self.eps_list):
            raise ConfigError("eps must be >= 0")
        if self.method not in ("rk4", "rk45"):
            raise ConfigError(f"unknown method {self.method!r}")
        if not 1e-14 <= self.tol <= 1e-3:
            raise ConfigError("tol outside [1e-14, 1e-3]")
        if self.n_samples < 1 or self.steps < 1 or self.grid_n < 1:
            raise ConfigError("counts must be positive")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if len(self.start) != 2:
            raise ConfigError("start takes two values x, y")

    def resolved_k0(self):
        """k0 from whichever of (k0, r) was given."""
        if self.k0 is not None:
            return self.k0
        if self.r is not None:
            return math.sqrt(1 + self.r**2) / self.r
        return None

    def resolved_r(self):
        if self.r is not None:
            return self.r
        if self.k0 is not None and self.k0 > 1:
            return 1.0 / math.sqrt(self.k0**2 - 1)
        return None


_FIELDS = {f.name: f for f in fields(RunConfig)}
_LISTS = {"eps_list", "start", "radii", "c_values"}
_INTS = {"steps", "n_samples", "grid_n", "seed"}
_STRS = {"k1", "chart_base", "method", "out", "store"}
_OPTIONAL = {"k0", "r"}


def _convert(key, text):
    if key in _LISTS:
        return tuple(float(x) for x in text.split(",") if x.strip())
    if key in _INTS:
        return int(text)
    if key in _STRS:
        return text
    if key in _OPTIONAL and text.lower() == "none":
        return None
    return float(text)


def parse_config(text) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if key not in _FIELDS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = _convert(key, val)
        except ValueError as exc:
            raise ParseError(f"bad value for {key}: {exc}", lineno) from None
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_config(cfg: RunConfig) -> str:
    lines = []
    for name, val in asdict(cfg).items():
        if isinstance(val, (tuple, list)):
            val = ", ".join(repr(float(x)) for x in val)
        elif val is None:
            val = "none"
        elif isinstance(val, float):
            val = repr(val)
        lines.append(f"{name} = {val}")
    return "\n".join(lines) + "\n"


def write_config(cfg: RunConfig, path):
    Path(path).write_text(format_config(cfg), encoding="utf-8")


def _plain(obj):
    """numpy scalars/arrays and tuples to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def canonical_json(obj) -> str:
    # float repr is the shortest string that round-trips exactly
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))


def config_hash(cfg: RunConfig) -> str:
    return hashlib.blake2b(canonical_json(asdict(cfg)).encode(), digest_size=8).hexdigest()


def store_path(explicit=None) -> Path:
    return Path(explicit or os.environ.get(STORE_ENV) or DEFAULT_STORE)


def make_envelope(kind, payload, chash):
    if kind not in KINDS:
        raise ConfigError(f"unknown record kind {kind!r}")
    return {"v": SCHEMA_VERSION, "kind": kind, "payload": _plain(payload), "config_hash": chash,
            "tool_version": __version__}


def append_record(store, kind, payload, chash):
    """Append one envelope under an exclusive lock; returns the envelope."""
    env = make_envelope(kind, payload, chash)
    line = canonical_json(env) + "\n"
    path = Path(store)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            fh.write(line)
            fh.flush()
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)
    return env


def read_records(store, kind=None, chash=None):
    path = Path(store)
    if not path.exists():
        return []
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.endswith("\n"):
                break  # a concurrent writer is mid-line
            line = line.strip()
            if not line:
                continue
            try:
                env = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"corrupt store record: {exc}", lineno) from None
            if env.get("v") != SCHEMA_VERSION:
                raise SchemaVersionMismatch(f"record on line {lineno} has schema v={env.get('v')!r}")
            if kind is not None and env["kind"] != kind:
                continue
            if chash is not None and env["config_hash"] != chash:
                continue
            out.append(env)
    return out
