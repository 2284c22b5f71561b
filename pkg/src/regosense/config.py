"""Declarative field/gait configuration files.

Fields (and the gait/noise parameters that ride along with them) are
described in YAML so presets ship as editable config files rather than code
constants. Two presets are packaged: ``white_sands_transect`` (dune-field
gradient) and ``mt_hood_patchy`` (icy 2D grid). Their numeric parameters
are calibration fixtures, not measured values.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Optional, Union

import yaml

from .errors import SpecificationError
from .terrain import (
    EnvironmentConfig,
    GradientSegment,
    GradientSpec,
    Grid2D,
    MaterialColumn,
    Patch,
    PatchSpec,
    TerrainField,
    make_patchy,
    make_transect,
)

PRESET_NAMES = ("white_sands_transect", "mt_hood_patchy")


def preset_path(name: str) -> Path:
    if name not in PRESET_NAMES:
        raise SpecificationError(
            f"unknown preset '{name}'; available: {', '.join(PRESET_NAMES)}")
    return Path(str(resources.files("regosense").joinpath(f"presets/{name}.yaml")))


def _column_from_cfg(node: dict) -> MaterialColumn:
    if "material" not in node:
        raise SpecificationError("column config needs a 'material' key")
    d = dict(node.get("params", {}))
    d["material"] = node["material"]
    if "substrate" in node:
        d["substrate"] = None  # placeholder, replaced below
        sub = _column_from_cfg(node["substrate"])
        col = MaterialColumn.from_dict({**d, "substrate": sub.to_dict()})
        return col
    return MaterialColumn.from_dict(d)


def _env_from_cfg(node: Optional[dict]) -> EnvironmentConfig:
    node = node or {}
    return EnvironmentConfig(gravity=float(node.get("gravity", 9.81)),
                             rng_seed=int(node.get("rng_seed", 0)))


def parse_field_config(cfg: dict) -> TerrainField:
    kind = cfg.get("kind")
    env = _env_from_cfg(cfg.get("environment"))
    if kind == "transect":
        segments = []
        for seg in cfg.get("segments", []):
            material = seg["material"]
            if "params_start" in seg:
                start = _column_from_cfg(
                    {"material": material, "params": seg["params_start"],
                     **({"substrate": seg["substrate"]} if "substrate" in seg else {})})
                end = _column_from_cfg(
                    {"material": material, "params": seg["params_end"],
                     **({"substrate": seg["substrate"]} if "substrate" in seg else {})})
            else:
                start = _column_from_cfg(
                    {"material": material, "params": seg["params"],
                     **({"substrate": seg["substrate"]} if "substrate" in seg else {})})
                end = None
            segments.append(GradientSegment(span=float(seg["span"]),
                                            start=start, end=end))
        spec = GradientSpec(length=float(cfg["length_m"]),
                            segments=tuple(segments))
        return make_transect(spec, env)
    if kind == "grid":
        geom = Grid2D(width=float(cfg["width_m"]), height=float(cfg["height_m"]),
                      cell=float(cfg.get("cell_m", 0.25)))
        background = _column_from_cfg(cfg["background"])
        patches = tuple(
            Patch(center=(float(p["center"][0]), float(p["center"][1])),
                  radius=float(p["radius"]),
                  column=_column_from_cfg(p))
            for p in cfg.get("patches", []))
        return make_patchy(PatchSpec(geom, background, patches), env)
    raise SpecificationError(f"unknown field kind '{kind}'")


def load_field(source: Union[str, Path, dict]) -> TerrainField:
    """Load a terrain field from a preset name, YAML path, or parsed dict."""
    if isinstance(source, dict):
        return parse_field_config(source)
    p = Path(source)
    if not p.exists() and str(source) in PRESET_NAMES:
        p = preset_path(str(source))
    if not p.exists():
        raise SpecificationError(f"field config not found: {source}")
    cfg = yaml.safe_load(p.read_text())
    if not isinstance(cfg, dict):
        raise SpecificationError(f"{p}: config must be a mapping")
    return parse_field_config(cfg)


def load_raw(source: Union[str, Path]) -> dict:
    """Parsed YAML dict for a preset name or path (for logging/replay)."""
    p = Path(source)
    if not p.exists() and str(source) in PRESET_NAMES:
        p = preset_path(str(source))
    if not p.exists():
        raise SpecificationError(f"field config not found: {source}")
    cfg = yaml.safe_load(p.read_text())
    if not isinstance(cfg, dict):
        raise SpecificationError(f"{p}: config must be a mapping")
    return cfg


def gait_overrides(cfg: dict) -> dict:
    """Optional gait/noise parameter section from the same config family."""
    return dict(cfg.get("gait", {}))
