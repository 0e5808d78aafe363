"""JSON run configuration.

A document looks like::

    {
      "material": {"J": 47.1, "K_e": 0.00172, "K_h": 0.0395, "S": 1.21, "a": 0.417},
      "alpha": [0.005, 0.04, 0.05],
      "sweep": {"n_z_min": 1, "n_z_max": 300, "b": null},
      "quadrature": {"inplane_points": 24, "kz_points": 64},
      "dispersion": {"q_max": 0.2, "points": 201},
      "output": {"format": "csv", "path": null},
      "workers": 1
    }

Only ``material`` and ``alpha`` are required.  Unknown keys anywhere are an
error, as are duplicated keys.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple

from .casimir import QuadratureSpec
from .core import MaterialParams
from .errors import ParseError, ValidationError

__all__ = [
    "SweepRange",
    "DispersionGrid",
    "OutputSpec",
    "RunConfig",
    "parse_config",
    "load_config",
    "preset_names",
    "preset_text",
]

_PRESET_PACKAGE = "magnon_casimir.presets"


@dataclass(frozen=True)
class SweepRange:
    n_z_min: int = 1
    n_z_max: int = 300
    b: Optional[float] = None

    def __post_init__(self):
        for name in ("n_z_min", "n_z_max"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValidationError(name, f"{name} must be an integer")
        if self.n_z_min < 1:
            raise ValidationError("n_z_min", "n_z_min must be >= 1")
        if self.n_z_max < self.n_z_min:
            raise ValidationError("n_z_max", "n_z_max must be >= n_z_min")
        if self.b is not None and not _is_real(self.b):
            raise ValidationError("b", "b must be a real number or null")

    @property
    def bounds(self) -> Tuple[int, int]:
        return self.n_z_min, self.n_z_max


@dataclass(frozen=True)
class DispersionGrid:
    """Reduced wavenumbers ``q_min .. q_max`` along ``q_x`` (q_y = q_z = 0)."""

    q_min: float = 0.0
    q_max: float = 0.2
    points: int = 201
    lattice: bool = True

    def __post_init__(self):
        for name in ("q_min", "q_max"):
            if not _is_real(getattr(self, name)):
                raise ValidationError(name, f"{name} must be a finite real number")
        if self.q_max < self.q_min:
            raise ValidationError("q_max", "q_max must be >= q_min")
        if isinstance(self.points, bool) or not isinstance(self.points, int) or self.points < 1:
            raise ValidationError("points", "points must be a positive integer")
        if not isinstance(self.lattice, bool):
            raise ValidationError("lattice", "lattice must be true or false")


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: Optional[str] = None

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ValidationError("format", "format must be 'csv' or 'json'")
        if self.path is not None and not isinstance(self.path, str):
            raise ValidationError("path", "path must be a string or null")


@dataclass(frozen=True)
class RunConfig:
    material: MaterialParams
    alpha: Tuple[float, ...]
    sweep: SweepRange = field(default_factory=SweepRange)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    dispersion: DispersionGrid = field(default_factory=DispersionGrid)
    output: OutputSpec = field(default_factory=OutputSpec)
    workers: int = 1

    def __post_init__(self):
        if not self.alpha:
            raise ValidationError("alpha", "at least one alpha is required")
        for a in self.alpha:
            if not _is_real(a) or a < 0:
                raise ValidationError("alpha", "alpha values must be finite and >= 0")
        if isinstance(self.workers, bool) or not isinstance(self.workers, int) or self.workers < 1:
            raise ValidationError("workers", "workers must be a positive integer")

    def to_dict(self) -> dict:
        def section(obj):
            return {f.name: getattr(obj, f.name) for f in fields(obj)}

        return {
            "material": section(self.material),
            "alpha": list(self.alpha),
            "sweep": section(self.sweep),
            "quadrature": section(self.quadrature),
            "dispersion": section(self.dispersion),
            "output": section(self.output),
            "workers": self.workers,
        }


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _line_of_key(text: str, key: str) -> Optional[int]:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


class _Duplicate(Exception):
    def __init__(self, key):
        self.key = key


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise _Duplicate(k)
        out[k] = v
    return out


def _section(text, doc, name, cls, required=(), path=None):
    """Instantiate ``cls`` from the JSON object ``doc[name]``."""
    raw = doc.get(name, {})
    where = path or name
    if not isinstance(raw, dict):
        raise ParseError(f"{where} must be an object", _line_of_key(text, name), where)
    allowed = {f.name for f in fields(cls)}
    for key in raw:
        if key not in allowed:
            raise ParseError(f"unknown key {where}.{key}", _line_of_key(text, key), f"{where}.{key}")
    for key in required:
        if key not in raw:
            raise ValidationError(key, f"{where}.{key} is required")
    try:
        return cls(**raw)
    except TypeError as exc:  # wrong value types that slipped past the dataclass
        raise ValidationError(where, str(exc)) from None


_TOP = {"material", "alpha", "sweep", "quadrature", "dispersion", "output", "workers"}


def parse_config(document) -> RunConfig:
    """Validate a JSON document (``str`` or UTF-8 ``bytes``) into a :class:`RunConfig`."""
    if isinstance(document, (bytes, bytearray)):
        try:
            document = bytes(document).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"config is not UTF-8: {exc.reason}") from None
    text = document
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    except _Duplicate as dup:
        raise ParseError(f"duplicate key {dup.key!r}", _line_of_key(text, dup.key), dup.key) from None
    if not isinstance(doc, dict):
        raise ParseError("config must be a JSON object", 1)
    for key in doc:
        if key not in _TOP:
            raise ParseError(f"unknown key {key}", _line_of_key(text, key), key)
    if "material" not in doc:
        raise ValidationError("material", "material is required")
    material = _section(text, doc, "material", MaterialParams,
                        required=("J", "K_e", "K_h", "S", "a"))
    if "alpha" not in doc:
        raise ValidationError("alpha", "alpha is required")
    alpha = doc["alpha"]
    alpha = tuple(alpha) if isinstance(alpha, list) else (alpha,)
    return RunConfig(
        material=material,
        alpha=alpha,
        sweep=_section(text, doc, "sweep", SweepRange),
        quadrature=_section(text, doc, "quadrature", QuadratureSpec),
        dispersion=_section(text, doc, "dispersion", DispersionGrid),
        output=_section(text, doc, "output", OutputSpec),
        workers=doc.get("workers", 1),
    )


def preset_names():
    return sorted(p.name for p in resources.files(_PRESET_PACKAGE).iterdir()
                  if p.name.endswith(".json"))


def preset_text(name: str) -> str:
    if not name.endswith(".json"):
        name += ".json"
    if name not in preset_names():
        raise ValidationError("config", f"no bundled preset named {name!r}")
    return resources.files(_PRESET_PACKAGE).joinpath(name).read_text(encoding="utf-8")


def load_config(path_or_preset: Optional[str] = None) -> RunConfig:
    """Read a config file; a bare name such as ``nio.json`` that is not an
    existing file falls back to the bundled preset of that name.  ``None``
    loads the NiO preset."""
    if path_or_preset is None:
        return parse_config(preset_text("nio.json"))
    p = Path(path_or_preset)
    if p.is_file():
        return parse_config(p.read_bytes())
    if p.name == str(path_or_preset) and p.name.removesuffix(".json") + ".json" in preset_names():
        return parse_config(preset_text(p.name))
    raise ValidationError("config", f"config file not found: {path_or_preset}")
