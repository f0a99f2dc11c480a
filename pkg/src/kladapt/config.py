"""Run configuration and its flat text representation.

Config files are plain ``key=value`` lines; ``#`` starts a comment and
blank lines are skipped.  Types are coerced from the dataclass fields, so
the file format needs no quoting or nesting.  Unknown keys are rejected
rather than ignored -- typos in experiment configs should fail loudly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidParameterError
from .klda import MEAN_MODES
from .rff import CONVENTIONS

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}
_NONE = {"none", "auto"}


@dataclass
class RunConfig:
    """Knobs for a full pretrain/adapt run.

    ``temperature`` scales classifier scores before the softmax;
    ``threshold`` is the minimum fused confidence for accepting a
    pseudo-label (0 accepts everything).  ``ridge=None`` lets the model
    pick a trace-scaled default at finalize time.
    """

    d_rff: int = 2000
    sigma: float = 1.0
    convention: str = "bandwidth"
    rff_seed: int = 0
    ridge: Optional[float] = None
    mean_mode: str = "literal"
    temperature: float = 1.0
    threshold: float = 0.0
    augment: bool = False
    noise_scale: float = 1.0
    augment_seed: int = 0
    batch_size: int = 256
    fused_inference: bool = False

    def __post_init__(self):
        if self.d_rff < 1:
            raise InvalidParameterError(f"d_rff must be >= 1, got {self.d_rff}")
        if self.sigma <= 0:
            raise InvalidParameterError(f"sigma must be > 0, got {self.sigma}")
        if self.convention not in CONVENTIONS:
            raise InvalidParameterError(
                f"convention must be one of {CONVENTIONS}, got {self.convention!r}"
            )
        if self.mean_mode not in MEAN_MODES:
            raise InvalidParameterError(
                f"mean_mode must be one of {MEAN_MODES}, got {self.mean_mode!r}"
            )
        if self.temperature <= 0:
            raise InvalidParameterError(f"temperature must be > 0, got {self.temperature}")
        if not 0.0 <= self.threshold <= 1.0:
            raise InvalidParameterError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.ridge is not None and self.ridge < 0:
            raise InvalidParameterError(f"ridge must be >= 0, got {self.ridge}")
        if self.noise_scale < 0:
            raise InvalidParameterError(f"noise_scale must be >= 0, got {self.noise_scale}")
        if self.batch_size < 1:
            raise InvalidParameterError(f"batch_size must be >= 1, got {self.batch_size}")


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value: str):
    field = _FIELDS[name]
    value = value.strip()
    if field.type in ("Optional[float]",):
        if value.lower() in _NONE:
            return None
        return float(value)
    if field.type == "bool":
        low = value.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise InvalidParameterError(f"cannot parse boolean {name}={value!r}")
    if field.type == "int":
        return int(value)
    if field.type == "float":
        return float(value)
    return value


def parse_config(text: str) -> RunConfig:
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise InvalidParameterError(
                f"config line {lineno}: expected key=value, got {line.strip()!r}"
            )
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise InvalidParameterError(f"config line {lineno}: unknown key {key!r}")
        try:
            overrides[key] = _coerce(key, value)
        except ValueError as exc:
            raise InvalidParameterError(f"config line {lineno}: {exc}") from exc
    return RunConfig(**overrides)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(config: RunConfig) -> str:
    lines = []
    for field in dataclasses.fields(RunConfig):
        value = getattr(config, field.name)
        if value is None:
            value = "none"
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{field.name}={value}")
    return "\n".join(lines) + "\n"


def save_config(config: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_config(config))
