"""Synthetic ground-truth regolith fields.

Two geometries: 1D gradient transects (dune-analogue) and 2D patchy grids
(icy-volcanic analogue). Fields are immutable after construction and fully
deterministic given their spec, so any number of readers can sample them
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dc_fields, replace
from enum import Enum
from typing import Optional, Union

import numpy as np

from .errors import DomainError, SpecificationError

PHI_MIN_GLOBAL = 0.50
PHI_MAX_GLOBAL = 0.70
FRICTION_ANGLE_MAX = math.pi / 3
ICE_FRACTION_MAX = 0.20


@dataclass(frozen=True)
class EnvironmentConfig:
    """Ambient constants shared by generation and synthesis."""

    gravity: float = 9.81  # m/s^2
    rng_seed: int = 0

    def __post_init__(self):
        if self.gravity <= 0:
            raise SpecificationError(f"gravity must be > 0, got {self.gravity}")


class MaterialClass(Enum):
    COHESIONLESS = "cohesionless"
    COHESIVE_POWDER = "cohesive_powder"
    ICE_CEMENTED = "ice_cemented"
    SALT_CRUSTED = "salt_crusted"
    SNOW = "snow"


# Numeric fields that interpolate linearly along a gradient segment.
_INTERP_FIELDS = (
    "phi",
    "rho_p",
    "grain_d",
    "friction_angle",
    "K",
    "yield_force",
    "ice_fraction",
    "crust_thickness",
    "crust_strength",
)


@dataclass(frozen=True)
class MaterialColumn:
    """Ground-truth regolith description at a single location.

    Class-conditional fields must be present exactly when the class needs
    them: yield_force for cohesive powders, ice_fraction for ice-cemented
    and snow, crust_thickness/crust_strength plus a substrate column for
    salt crusts. Substrate nesting is limited to one level.
    """

    material: MaterialClass
    phi: float
    rho_p: float
    grain_d: float
    friction_angle: float
    K: float
    yield_force: Optional[float] = None
    ice_fraction: Optional[float] = None
    crust_thickness: Optional[float] = None
    crust_strength: Optional[float] = None
    substrate: Optional["MaterialColumn"] = None

    def __post_init__(self):
        if not (PHI_MIN_GLOBAL <= self.phi <= PHI_MAX_GLOBAL):
            raise SpecificationError(
                f"phi {self.phi} outside [{PHI_MIN_GLOBAL}, {PHI_MAX_GLOBAL}]")
        if self.rho_p <= 0:
            raise SpecificationError("rho_p must be > 0")
        if self.grain_d <= 0:
            raise SpecificationError("grain_d must be > 0")
        if not (0 < self.friction_angle < FRICTION_ANGLE_MAX):
            raise SpecificationError(
                f"friction_angle {self.friction_angle} outside (0, pi/3)")
        if self.K <= 0:
            raise SpecificationError("K must be > 0")

        cls = self.material
        self._require("yield_force", cls is MaterialClass.COHESIVE_POWDER)
        self._require("ice_fraction",
                      cls in (MaterialClass.ICE_CEMENTED, MaterialClass.SNOW))
        self._require("crust_thickness", cls is MaterialClass.SALT_CRUSTED)
        self._require("crust_strength", cls is MaterialClass.SALT_CRUSTED)
        self._require("substrate", cls is MaterialClass.SALT_CRUSTED)

        if self.yield_force is not None and self.yield_force < 0:
            raise SpecificationError("yield_force must be >= 0")
        if self.ice_fraction is not None and not (0 <= self.ice_fraction <= ICE_FRACTION_MAX):
            raise SpecificationError(
                f"ice_fraction {self.ice_fraction} outside [0, {ICE_FRACTION_MAX}]")
        if self.crust_thickness is not None and self.crust_thickness < 0:
            raise SpecificationError("crust_thickness must be >= 0")
        if self.crust_strength is not None and self.crust_strength < 0:
            raise SpecificationError("crust_strength must be >= 0")
        if self.substrate is not None and self.substrate.substrate is not None:
            raise SpecificationError("substrate nesting depth exceeds 1")

    def _require(self, name: str, required: bool):
        value = getattr(self, name)
        if required and value is None:
            raise SpecificationError(
                f"{self.material.value} column requires field '{name}'")
        if not required and value is not None:
            raise SpecificationError(
                f"field '{name}' not allowed for {self.material.value} column")

    def to_dict(self) -> dict:
        d = {"material": self.material.value}
        for f in dc_fields(self):
            if f.name in ("material", "substrate"):
                continue
            v = getattr(self, f.name)
            if v is not None:
                d[f.name] = v
        if self.substrate is not None:
            d["substrate"] = self.substrate.to_dict()
        return d

    @staticmethod
    def from_dict(d: dict) -> "MaterialColumn":
        kw = dict(d)
        material = MaterialClass(kw.pop("material"))
        sub = kw.pop("substrate", None)
        if sub is not None:
            sub = MaterialColumn.from_dict(sub)
        return MaterialColumn(material=material, substrate=sub, **kw)


@dataclass(frozen=True)
class MaterialPreset:
    """Packing range and K anchors for one laboratory material.

    The numeric constants are implementation fixtures, not measured values:
    they pin the loose/dense endpoints that the exponential K(phi) relation
    interpolates between.
    """

    name: str
    phi_min: float
    phi_max: float
    K_loose: float
    K_dense: float

    def __post_init__(self):
        if not (PHI_MIN_GLOBAL <= self.phi_min < self.phi_max <= PHI_MAX_GLOBAL):
            raise SpecificationError("preset phi range invalid")
        if not (0 < self.K_loose < self.K_dense):
            raise SpecificationError("preset K anchors invalid")


QUARTZ_SAND = MaterialPreset("quartz_sand", phi_min=0.55, phi_max=0.64,
                             K_loose=5.0, K_dense=20.0)
GYPSUM_SAND = MaterialPreset("gypsum_sand", phi_min=0.52, phi_max=0.62,
                             K_loose=4.0, K_dense=16.0)

MATERIAL_PRESETS = {p.name: p for p in (QUARTZ_SAND, GYPSUM_SAND)}


def K_of_phi(phi: float, preset: MaterialPreset) -> float:
    """Archimedes constant at packing fraction phi.

    Exponential between the preset anchors, so K is strictly increasing and
    convex with K(phi_min) = K_loose and K(phi_max) = K_dense exactly.
    """
    if not (preset.phi_min <= phi <= preset.phi_max):
        raise DomainError(
            f"phi {phi} outside [{preset.phi_min}, {preset.phi_max}] "
            f"for preset '{preset.name}'")
    beta = math.log(preset.K_dense / preset.K_loose) / (preset.phi_max - preset.phi_min)
    return preset.K_loose * math.exp(beta * (phi - preset.phi_min))


# ---------------------------------------------------------------------------
# geometries


@dataclass(frozen=True)
class Transect1D:
    length: float  # m

    def __post_init__(self):
        if self.length <= 0:
            raise SpecificationError("transect length must be > 0")


@dataclass(frozen=True)
class Grid2D:
    width: float   # m
    height: float  # m
    cell: float = 0.25  # m

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.cell <= 0:
            raise SpecificationError("grid dimensions must be > 0")
        if self.nx == 0 or self.ny == 0:
            raise SpecificationError("grid resolves to zero cells")

    @property
    def nx(self) -> int:
        return int(round(self.width / self.cell))

    @property
    def ny(self) -> int:
        return int(round(self.height / self.cell))

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        return ((i + 0.5) * self.cell, (j + 0.5) * self.cell)

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        if not (0 <= x <= self.width and 0 <= y <= self.height):
            raise DomainError(f"point ({x}, {y}) outside grid")
        i = min(int(x / self.cell), self.nx - 1)
        j = min(int(y / self.cell), self.ny - 1)
        return i, j


# ---------------------------------------------------------------------------
# transect fields


@dataclass(frozen=True)
class GradientSegment:
    """One span of a transect, as a fraction of total length.

    With only `start` given the segment is uniform; with `end` the numeric
    column parameters interpolate linearly across the span. A nested
    substrate column is taken from `start` and not interpolated.
    """

    span: float
    start: MaterialColumn
    end: Optional[MaterialColumn] = None

    def __post_init__(self):
        if self.span <= 0:
            raise SpecificationError("segment span must be > 0")
        if self.end is not None and self.end.material is not self.start.material:
            raise SpecificationError("segment endpoints must share a material class")


@dataclass(frozen=True)
class GradientSpec:
    length: float
    segments: tuple[GradientSegment, ...]


def _lerp_column(a: MaterialColumn, b: MaterialColumn, t: float) -> MaterialColumn:
    kw = {}
    for name in _INTERP_FIELDS:
        va, vb = getattr(a, name), getattr(b, name)
        if va is None:
            kw[name] = None
        else:
            kw[name] = va + t * (vb - va)
    return replace(a, **kw)


class TransectField:
    """1D field: column lookup by distance along the transect."""

    geometry: Transect1D

    def __init__(self, spec: GradientSpec, env: EnvironmentConfig):
        total = sum(s.span for s in spec.segments)
        if abs(total - 1.0) > 1e-9:
            raise SpecificationError(
                f"segment fractions sum to {total}, expected 1.0")
        self.geometry = Transect1D(spec.length)
        self.env = env
        self.spec = spec
        bounds = np.cumsum([0.0] + [s.span for s in spec.segments])
        bounds[-1] = 1.0
        self._bounds = bounds

    def column_at(self, x: float) -> MaterialColumn:
        L = self.geometry.length
        if not (0 <= x <= L):
            raise DomainError(f"x = {x} outside transect [0, {L}]")
        f = x / L
        idx = int(np.searchsorted(self._bounds, f, side="right")) - 1
        idx = min(max(idx, 0), len(self.spec.segments) - 1)
        seg = self.spec.segments[idx]
        if seg.end is None:
            return seg.start
        lo, hi = self._bounds[idx], self._bounds[idx + 1]
        t = (f - lo) / (hi - lo)
        return _lerp_column(seg.start, seg.end, t)


def make_transect(spec: GradientSpec, env: EnvironmentConfig) -> TransectField:
    """Build a 1D gradient field; fractions must partition [0, 1]."""
    return TransectField(spec, env)


# ---------------------------------------------------------------------------
# patchy grid fields


@dataclass(frozen=True)
class Patch:
    center: tuple[float, float]
    radius: float
    column: MaterialColumn


@dataclass(frozen=True)
class PatchSpec:
    geometry: Grid2D
    background: MaterialColumn
    patches: tuple[Patch, ...] = ()


class GridField:
    """2D cell-discretized field; later patches override earlier ones."""

    geometry: Grid2D

    def __init__(self, spec: PatchSpec, env: EnvironmentConfig):
        geom = spec.geometry
        for p in spec.patches:
            if p.radius <= 0:
                raise SpecificationError("patch radius must be > 0")
            cx, cy = p.center
            if not (0 <= cx <= geom.width and 0 <= cy <= geom.height):
                raise SpecificationError(f"patch center {p.center} outside grid")
        self.geometry = geom
        self.env = env
        self.spec = spec

        xs = (np.arange(geom.nx) + 0.5) * geom.cell
        ys = (np.arange(geom.ny) + 0.5) * geom.cell
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        assign = np.zeros((geom.nx, geom.ny), dtype=int)  # 0 = background
        for k, p in enumerate(spec.patches, start=1):
            d = np.hypot(gx - p.center[0], gy - p.center[1])
            assign[d <= p.radius] = k
        self._assign = assign
        self._columns = (spec.background,) + tuple(p.column for p in spec.patches)

    def column_at(self, xy: tuple[float, float]) -> MaterialColumn:
        i, j = self.geometry.cell_of(*xy)
        return self._columns[self._assign[i, j]]

    def column_at_cell(self, i: int, j: int) -> MaterialColumn:
        if not (0 <= i < self.geometry.nx and 0 <= j < self.geometry.ny):
            raise DomainError(f"cell ({i}, {j}) outside grid")
        return self._columns[self._assign[i, j]]

    def boundary_cells(self) -> set[tuple[int, int]]:
        """Cells whose center lies within one cell width inside a patch rim.

        A cell (i, j) is a boundary cell of patch p iff its center distance
        to p's center falls in (radius - cell, radius].
        """
        geom = self.geometry
        out: set[tuple[int, int]] = set()
        for p in self.spec.patches:
            for i in range(geom.nx):
                for j in range(geom.ny):
                    cx, cy = geom.cell_center(i, j)
                    d = math.hypot(cx - p.center[0], cy - p.center[1])
                    if p.radius - geom.cell < d <= p.radius:
                        out.add((i, j))
        return out

    def boundary_distance(self, xy: tuple[float, float]) -> float:
        """Distance from a point to the nearest patch rim (ROI boundary)."""
        if not self.spec.patches:
            return math.inf
        x, y = xy
        return min(abs(math.hypot(x - p.center[0], y - p.center[1]) - p.radius)
                   for p in self.spec.patches)


def make_patchy(spec: PatchSpec, env: EnvironmentConfig) -> GridField:
    """Build a 2D patchy field; cell assignment is last-patch-wins."""
    return GridField(spec, env)


TerrainField = Union[TransectField, GridField]
