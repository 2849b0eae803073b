"""Flat ``key = value`` experiment configs and the shipped presets.

Lines starting with ``#`` are comments. Lists are comma separated. ``M_n``
may be an integer or ``J`` (quasi-static).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ParseError, ValidationError
from .gateset import FAMILIES

PRESETS = ("fig1c", "fig2", "fig2u", "fig3c", "fig4")


@dataclass
class ExperimentConfig:
    J: int = 100
    k: int = 50
    n: int = 200
    r: int = 220
    sigma_L2: float = 0.0
    sigma_S2: float = 0.0
    M_n: object = "J"
    family: str = "primitive"
    bandwidth: int = 2
    seed: int = 0
    out: str = "out"
    families: tuple = ()
    M_n_sweep: tuple = ()
    reorderings: int = 100
    max_lag: int = 100
    delta: float = 0.01
    omega_min: float = 1e-3
    omega_max: float = 1e2
    n_omega: int = 200
    scan_min: float = 1e-9
    scan_max: float = 1e-2
    scan_points: int = 141

    @property
    def block_length(self):
        """``M_n`` as an int, or ``None`` for the quasi-static case."""
        return None if self.M_n == "J" else int(self.M_n)

    @property
    def family_list(self):
        return tuple(self.families) or (self.family,)

    @property
    def sweep(self):
        """Block lengths to run; ``None`` entries mean ``M_n = J``."""
        if self.M_n_sweep:
            return tuple(None if m == "J" or int(m) == self.J else int(m) for m in self.M_n_sweep)
        return (self.block_length,)

    def validate(self):
        for key in ("J", "k", "n", "r", "reorderings", "max_lag", "n_omega", "scan_points"):
            if getattr(self, key) < 1:
                raise ValidationError(key, "must be >= 1")
        for key in ("sigma_L2", "sigma_S2"):
            if getattr(self, key) < 0:
                raise ValidationError(key, "must be >= 0")
        for m in (self.M_n,) + tuple(self.M_n_sweep):
            if m != "J" and not 1 <= int(m) <= self.J:
                raise ValidationError("M_n", f"{m} outside [1, J={self.J}]")
        for fam in self.family_list:
            if fam not in FAMILIES:
                raise ValidationError("family", f"unknown family {fam!r}")
        if self.bandwidth not in (1, 2, 8):
            raise ValidationError("bandwidth", "must be 1, 2 or 8")
        if self.seed < 0:
            raise ValidationError("seed", "must be >= 0")
        if not 0 < self.omega_min < self.omega_max:
            raise ValidationError("omega_min", "need 0 < omega_min < omega_max")
        if not 0 <= self.scan_min < self.scan_max:
            raise ValidationError("scan_min", "need 0 <= scan_min < scan_max")
        return self

    def echo(self) -> str:
        """Round-trippable ``key = value`` text."""
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_INTS = {"J", "k", "n", "r", "bandwidth", "seed", "reorderings", "max_lag", "n_omega",
         "scan_points"}
_FLOATS = {"sigma_L2", "sigma_S2", "delta", "omega_min", "omega_max", "scan_min", "scan_max"}


def _block(v: str):
    return "J" if v == "J" else int(v)


def _convert(key, raw):
    try:
        if key in _INTS:
            return int(raw)
        if key in _FLOATS:
            return float(raw)
        if key == "M_n":
            return _block(raw)
        if key == "M_n_sweep":
            return tuple(_block(x.strip()) for x in raw.split(",") if x.strip())
        if key == "families":
            return tuple(x.strip() for x in raw.split(",") if x.strip())
        return raw
    except ValueError:
        raise ValidationError(key, f"bad value {raw!r}") from None


def parse_text(text: str, source: str = "<config>") -> ExperimentConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{source}:{lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ValidationError(key, "unknown key")
        if key in values:
            raise ParseError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw)
    return ExperimentConfig(**values).validate()


def preset_text(name: str) -> str:
    return resources.files("qcorr").joinpath(f"data/presets/{name}.cfg").read_text()


def parse_config(path) -> ExperimentConfig:
    """Load a config file, or a preset when ``path`` is a preset name."""
    if str(path) in PRESETS:
        return parse_text(preset_text(str(path)), str(path))
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc}") from None
    return parse_text(text, str(p))


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    return dataclasses.replace(cfg, **kw).validate()
