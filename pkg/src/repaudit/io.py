"""File formats and run configuration.

Three formats, all deliberately boring:

* lrm (text): header ``lrm 1 <n> <d>`` then n lines ``<label> v1 ... vd``.
  Floats are written with shortest round-trip formatting, so read(write(x))
  is bit-exact.
* trig (text): header ``trig 1 <d>``, a line of d mask values, a line of
  d pattern values.
* stats (binary, little-endian): magic ``SCGS``, u32 version 1, u32 d,
  then center (d), S_mu (d*d), S_eps (d*d) as f64 row-major.

RunConfig collects every tunable; a flat ``key = value`` file with ``#``
comments can set any field, and CLI flags override the file.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .contamination import TriggerSpec
from .data import LabeledMatrix
from .decomposition import GlobalStats
from .errors import ConfigError, ParseError
from .linalg import SymMatrix

__all__ = [
    "RunConfig",
    "read_lrm",
    "write_lrm",
    "read_trigger",
    "write_trigger",
    "read_stats",
    "write_stats",
    "read_config_file",
    "make_config",
    "write_tags",
    "read_tags",
]

_STATS_MAGIC = b"SCGS"
_STATS_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    """Every knob of the fit/analyze pipeline, with contract defaults."""

    ridge_scale: float = 1e-6
    em_max_iters: int = 50
    em_tol: float = 1e-5
    untangle_max_iters: int = 100
    dof_mode: str = "dim"
    dof_value: float | None = None
    threshold: float = math.exp(2.0)
    seed: int = 0

    def __post_init__(self):
        if self.ridge_scale < 0:
            raise ConfigError("ridge_scale must be nonnegative")
        if self.em_max_iters < 1 or self.untangle_max_iters < 1:
            raise ConfigError("iteration caps must be positive")
        if self.em_tol < 0:
            raise ConfigError("em_tol must be nonnegative")
        if self.dof_mode not in ("dim", "custom"):
            raise ConfigError(f"dof_mode must be 'dim' or 'custom', got {self.dof_mode!r}")
        if self.dof_mode == "custom":
            if self.dof_value is None or self.dof_value <= 0:
                raise ConfigError("dof_mode 'custom' requires a positive dof_value")
        if self.threshold <= 0:
            raise ConfigError("threshold must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    def dof(self, d: int) -> float:
        return float(d) if self.dof_mode == "dim" else float(self.dof_value)

    def echo(self) -> dict:
        return {
            "ridge_scale": self.ridge_scale,
            "em_max_iters": self.em_max_iters,
            "em_tol": self.em_tol,
            "untangle_max_iters": self.untangle_max_iters,
            "dof_mode": self.dof_mode,
            "dof_value": self.dof_value,
            "threshold": self.threshold,
            "seed": self.seed,
        }


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips to the same f64."""
    return repr(float(x))


def _parse_floats(tokens: list[str], expected: int, line_no: int) -> np.ndarray:
    if len(tokens) != expected:
        raise ParseError(
            f"expected {expected} values, found {len(tokens)}", line=line_no
        )
    try:
        vals = np.array([float(tok) for tok in tokens], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"bad numeric value ({exc})", line=line_no) from None
    if not np.all(np.isfinite(vals)):
        raise ParseError("non-finite value", line=line_no)
    return vals


def read_lrm(path: str | Path) -> LabeledMatrix:
    """Parse a labeled representation matrix file."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    header = lines[0].split()
    if len(header) != 4 or header[0] != "lrm":
        raise ParseError("header must be 'lrm 1 <n> <d>'", line=1)
    if header[1] != "1":
        raise ParseError(f"unsupported lrm version {header[1]!r}", line=1)
    try:
        n, d = int(header[2]), int(header[3])
    except ValueError:
        raise ParseError("header counts must be integers", line=1) from None
    if n < 1 or d < 1:
        raise ParseError("n and d must be positive", line=1)

    rows = np.empty((n, d))
    labels = np.empty(n, dtype=np.int64)
    body = lines[1:]
    filled = 0
    for offset, line in enumerate(body, start=2):
        tokens = line.split()
        if not tokens:
            continue
        if filled >= n:
            raise ParseError(f"more than {n} data rows", line=offset)
        try:
            label = int(tokens[0])
        except ValueError:
            raise ParseError(f"bad label {tokens[0]!r}", line=offset) from None
        if label < 0:
            raise ParseError(f"negative label {label}", line=offset)
        labels[filled] = label
        rows[filled] = _parse_floats(tokens[1:], d, offset)
        filled += 1
    if filled != n:
        raise ParseError(f"expected {n} data rows, found {filled}", line=len(lines))
    return LabeledMatrix(rows, labels, int(labels.max()) + 1)


def write_lrm(path: str | Path, data: LabeledMatrix) -> None:
    lines = [f"lrm 1 {data.n} {data.d}"]
    for label, row in zip(data.labels, data.rows):
        lines.append(f"{int(label)} " + " ".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trigger(path: str | Path) -> TriggerSpec:
    """Parse a trigger file: 'trig 1 <d>', then mask and pattern lines."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    meaningful = [(i + 1, ln.split()) for i, ln in enumerate(lines) if ln.split()]
    if len(meaningful) != 3:
        raise ParseError(
            f"expected header, mask, and pattern lines, found {len(meaningful)}",
            line=len(lines),
        )
    (hline, header), (kline, ktok), (dline, dtok) = meaningful
    if len(header) != 3 or header[0] != "trig":
        raise ParseError("header must be 'trig 1 <d>'", line=hline)
    if header[1] != "1":
        raise ParseError(f"unsupported trig version {header[1]!r}", line=hline)
    try:
        d = int(header[2])
    except ValueError:
        raise ParseError("header dimension must be an integer", line=hline) from None
    kappa = _parse_floats(ktok, d, kline)
    delta = _parse_floats(dtok, d, dline)
    return TriggerSpec(kappa=kappa, delta=delta)


def write_trigger(path: str | Path, trig: TriggerSpec) -> None:
    lines = [
        f"trig 1 {trig.d}",
        " ".join(_fmt(v) for v in trig.kappa),
        " ".join(_fmt(v) for v in trig.delta),
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_stats(path: str | Path, stats: GlobalStats) -> None:
    d = stats.d
    buf = bytearray()
    buf += _STATS_MAGIC
    buf += struct.pack("<II", _STATS_VERSION, d)
    buf += np.ascontiguousarray(stats.center, dtype="<f8").tobytes()
    buf += np.ascontiguousarray(stats.s_mu.values, dtype="<f8").tobytes()
    buf += np.ascontiguousarray(stats.s_eps.values, dtype="<f8").tobytes()
    Path(path).write_bytes(bytes(buf))


def read_stats(path: str | Path) -> GlobalStats:
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != _STATS_MAGIC:
        raise ParseError("not a stats file (bad magic)")
    version, d = struct.unpack("<II", raw[4:12])
    if version != _STATS_VERSION:
        raise ParseError(f"unsupported stats version {version}")
    expected = 12 + 8 * (d + 2 * d * d)
    if len(raw) != expected:
        raise ParseError(
            f"stats file has {len(raw)} bytes, expected {expected} for d={d}"
        )
    body = np.frombuffer(raw, dtype="<f8", offset=12)
    center = body[:d].astype(np.float64)
    s_mu = body[d : d + d * d].reshape(d, d)
    s_eps = body[d + d * d :].reshape(d, d)
    return GlobalStats(
        d=int(d),
        s_mu=SymMatrix(s_mu),
        s_eps=SymMatrix(s_eps),
        center=center,
        em_iters_used=0,
        converged=True,
    )


def write_tags(path: str | Path, tags: list[str]) -> None:
    Path(path).write_text("\n".join(tags) + "\n", encoding="utf-8")


def read_tags(path: str | Path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").split()


_CONFIG_TYPES = {f.name: f for f in fields(RunConfig)}


def read_config_file(path: str | Path) -> dict:
    """Parse a flat 'key = value' config file into override kwargs."""
    overrides: dict = {}
    for line_no, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=line_no)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"unknown config key {key!r} (line {line_no})")
        try:
            if key in ("em_max_iters", "untangle_max_iters", "seed"):
                overrides[key] = int(value)
            elif key == "dof_mode":
                overrides[key] = value
            else:
                overrides[key] = float(value)
        except ValueError:
            raise ConfigError(
                f"bad value {value!r} for config key {key!r} (line {line_no})"
            ) from None
    return overrides


def make_config(file_path: str | Path | None = None, **flag_overrides) -> RunConfig:
    """Build a RunConfig from defaults, an optional file, then flags."""
    values: dict = {}
    if file_path is not None:
        values.update(read_config_file(file_path))
    values.update({k: v for k, v in flag_overrides.items() if v is not None})
    return RunConfig(**values)
