"""Vertical intrusion force-depth synthesis and curve analysis.

The cohesionless generator follows the displaced-volume force law
F_z = K * phi * rho_p * g * (V0 + h*A), with a linear transient while the
stagnant grain cone grows under the intruder. The other material regimes
are built on top of it: plateau capping for cohesive powders, sawtooth
stress drops for ice-cemented mixtures, an elastic crust that punctures
into a substrate response for salt crusts, and a softened half-period
variant for snow.

All operations are pure functions over immutable inputs; randomness enters
only through an explicit generator argument.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import AnalysisError, DomainError, SpecificationError
from .terrain import EnvironmentConfig, MaterialClass, MaterialColumn


class TipShape(Enum):
    FLAT_CYLINDER = "flat_cylinder"
    CONE = "cone"


@dataclass(frozen=True)
class IntruderSpec:
    radius: float  # m
    tip: TipShape = TipShape.FLAT_CYLINDER

    def __post_init__(self):
        if self.radius <= 0:
            raise SpecificationError("intruder radius must be > 0")

    @property
    def cross_section(self) -> float:
        return math.pi * self.radius**2


# Lab fixtures: 2.54 cm diameter cylinder for granular beds, 0.71 cm for
# frozen mixtures.
LAB_CYLINDER = IntruderSpec(radius=0.0127)
FROZEN_MIX_TIP = IntruderSpec(radius=0.00355)


@dataclass(frozen=True)
class IntrusionProtocol:
    speed: float = 0.02        # m/s
    max_depth: float = 0.10    # m
    sample_rate: float = 300.0  # Hz

    def __post_init__(self):
        if self.speed <= 0 or self.max_depth <= 0 or self.sample_rate <= 0:
            raise SpecificationError("protocol parameters must be > 0")

    @property
    def depth_step(self) -> float:
        return self.speed / self.sample_rate

    def depth_grid(self) -> np.ndarray:
        n = int(math.floor(self.max_depth / self.depth_step + 1e-9))
        return self.depth_step * np.arange(n + 1)


class Provenance(Enum):
    TRUTH = "truth"
    LEG_ESTIMATE = "leg_estimate"


class ForceDepthCurve:
    """Sampled (depth, force) record from one intrusion."""

    def __init__(self, depths: np.ndarray, forces: np.ndarray,
                 protocol: IntrusionProtocol,
                 provenance: Provenance = Provenance.TRUTH,
                 column_ref: Optional[MaterialColumn] = None,
                 valid: bool = True):
        depths = np.asarray(depths, dtype=float)
        forces = np.asarray(forces, dtype=float)
        if depths.ndim != 1 or depths.shape != forces.shape:
            raise SpecificationError("depths and forces must be matching 1D arrays")
        if len(depths) < 2:
            raise SpecificationError("curve needs at least 2 samples")
        if depths[0] != 0.0:
            raise SpecificationError("depth grid must start at 0")
        if np.any(np.diff(depths) <= 0):
            raise SpecificationError("depths must be strictly increasing")
        if depths[-1] > protocol.max_depth + 1e-12:
            raise SpecificationError("depths exceed protocol max_depth")
        step = protocol.depth_step
        # rtol admits text round-trips that store 9 significant digits
        if not np.allclose(np.diff(depths), step, rtol=1e-6, atol=1e-12):
            raise SpecificationError("sample spacing must equal speed / sample_rate")
        if forces[0] < 0:
            raise SpecificationError("force at h = 0 must be >= 0")
        self.depths = depths
        self.forces = forces
        self.protocol = protocol
        self.provenance = provenance
        self.column_ref = column_ref
        self.valid = valid
        depths.setflags(write=False)
        forces.setflags(write=False)

    def __len__(self) -> int:
        return len(self.depths)


@dataclass(frozen=True)
class RuptureEvent:
    depth: float
    drop_magnitude: float


@dataclass(frozen=True)
class StrengthSummary:
    """Threshold-crossing depths plus terminal force and spring fit.

    Crossing depths are None when the curve never reaches the threshold.
    """

    depth_at_10N: Optional[float]
    depth_at_20N: Optional[float]
    depth_at_30N: Optional[float]
    terminal_force: float
    fitted_k: Optional[float]

    def to_dict(self) -> dict:
        return {
            "depth_at_10N": self.depth_at_10N,
            "depth_at_20N": self.depth_at_20N,
            "depth_at_30N": self.depth_at_30N,
            "terminal_force": self.terminal_force,
            "fitted_k": self.fitted_k,
        }


@dataclass(frozen=True)
class SynthesisConfig:
    """Fixture constants for the regime generators.

    The ice sawtooth (strength gain, drop amplitude, drop spacing) is
    calibrated so that both the number of stress drops per cm and their mean
    magnitude grow strictly with ice fraction, and terminal forces stay
    ordered across an ice sweep.
    """

    noise_sigma: float = 0.02       # multiplicative noise half-width
    ice_strength_gain: float = 4.0  # baseline scale = 1 + gain * phi_i
    ice_drop_amplitude: float = 1.2  # relative sawtooth amplitude per unit phi_i
    ice_drop_spacing: float = 0.02  # m between drops as phi_i -> 0
    ice_spacing_gain: float = 37.0  # spacing = ice_drop_spacing / (1 + gain*phi_i)
    snow_force_scale: float = 0.1
    snow_spacing_divisor: float = 2.0


DEFAULT_SYNTHESIS = SynthesisConfig()


def cone_geometry(column: MaterialColumn, intruder: IntruderSpec) -> tuple[float, float]:
    """(h_cone, V0) of the stagnant cone at the internal friction angle."""
    t = math.tan(column.friction_angle)
    h_cone = intruder.radius * t
    v0 = (math.pi / 3.0) * intruder.radius**3 * t
    return h_cone, v0


def _cohesionless_forces(h: np.ndarray, column: MaterialColumn,
                         intruder: IntruderSpec, env: EnvironmentConfig) -> np.ndarray:
    h_cone, v0 = cone_geometry(column, intruder)
    a = intruder.cross_section
    vol = np.where(h < h_cone, (h / max(h_cone, 1e-300)) * v0 + h * a, v0 + h * a)
    return column.K * column.phi * column.rho_p * env.gravity * vol


def _sawtooth_forces(h: np.ndarray, column: MaterialColumn, intruder: IntruderSpec,
                     env: EnvironmentConfig, cfg: SynthesisConfig,
                     force_scale: float = 1.0,
                     spacing_divisor: float = 1.0) -> np.ndarray:
    phi_i = column.ice_fraction or 0.0
    base = _cohesionless_forces(h, column, intruder, env)
    base = base * (1.0 + cfg.ice_strength_gain * phi_i) * force_scale
    if phi_i <= 0:
        return base
    spacing = cfg.ice_drop_spacing / (1.0 + cfg.ice_spacing_gain * phi_i)
    spacing /= spacing_divisor
    u = np.mod(h, spacing) / spacing  # elastic overshoot phase, drops at wrap
    return base * (1.0 + cfg.ice_drop_amplitude * phi_i * u)


def synthesize(column: MaterialColumn, intruder: IntruderSpec,
               protocol: IntrusionProtocol, env: EnvironmentConfig,
               rng: Optional[np.random.Generator] = None,
               noise_sigma: Optional[float] = None,
               cfg: SynthesisConfig = DEFAULT_SYNTHESIS) -> ForceDepthCurve:
    """Ground-truth force-depth curve for one vertical intrusion.

    noise_sigma overrides cfg.noise_sigma; pass 0 for a noiseless curve.
    When noise is on, rng must be provided.
    """
    v_c = math.sqrt(2.0 * env.gravity * column.grain_d)
    if protocol.speed >= v_c:
        warnings.warn(
            f"intrusion speed {protocol.speed} m/s not below settling "
            f"velocity {v_c:.3f} m/s; quasistatic assumption weak",
            stacklevel=2)

    h = protocol.depth_grid()
    cls = column.material
    if cls is MaterialClass.COHESIONLESS:
        f = _cohesionless_forces(h, column, intruder, env)
    elif cls is MaterialClass.COHESIVE_POWDER:
        f = np.minimum(_cohesionless_forces(h, column, intruder, env),
                       column.yield_force)
    elif cls is MaterialClass.ICE_CEMENTED:
        f = _sawtooth_forces(h, column, intruder, env, cfg)
    elif cls is MaterialClass.SNOW:
        f = _sawtooth_forces(h, column, intruder, env, cfg,
                             force_scale=cfg.snow_force_scale,
                             spacing_divisor=cfg.snow_spacing_divisor)
    elif cls is MaterialClass.SALT_CRUSTED:
        t_c, f_c = column.crust_thickness, column.crust_strength
        f_sub = _regime_forces_for_substrate(
            np.maximum(h - t_c, 0.0), column.substrate, intruder, env, cfg)
        if t_c > 0:
            f = np.where(h <= t_c, f_c * h / t_c, f_sub)
            # puncture must shed at least half the crust strength immediately
            post = np.searchsorted(h, t_c, side="right")
            if post < len(h):
                f[post] = min(f[post], 0.5 * f_c)
        else:
            f = f_sub
    else:  # pragma: no cover - enum is exhaustive
        raise SpecificationError(f"unknown material class {cls}")

    sigma = cfg.noise_sigma if noise_sigma is None else noise_sigma
    if sigma > 0:
        if rng is None:
            raise SpecificationError("rng required when noise_sigma > 0")
        f = f * (1.0 + rng.uniform(-sigma, sigma, size=f.shape))

    return ForceDepthCurve(h, f, protocol, Provenance.TRUTH, column_ref=column)


def _regime_forces_for_substrate(h, column, intruder, env, cfg):
    cls = column.material
    if cls is MaterialClass.COHESIONLESS:
        return _cohesionless_forces(h, column, intruder, env)
    if cls is MaterialClass.COHESIVE_POWDER:
        return np.minimum(_cohesionless_forces(h, column, intruder, env),
                          column.yield_force)
    if cls is MaterialClass.ICE_CEMENTED:
        return _sawtooth_forces(h, column, intruder, env, cfg)
    if cls is MaterialClass.SNOW:
        return _sawtooth_forces(h, column, intruder, env, cfg,
                                force_scale=cfg.snow_force_scale,
                                spacing_divisor=cfg.snow_spacing_divisor)
    raise SpecificationError("substrate may not itself be salt-crusted")


# ---------------------------------------------------------------------------
# curve analysis


def _affine_fit(h: np.ndarray, f: np.ndarray) -> tuple[float, float]:
    a = np.vstack([h, np.ones_like(h)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, f, rcond=None)
    return float(slope), float(intercept)


def fit_stiffness(curve: ForceDepthCurve) -> float:
    """One-way-spring stiffness: least-squares slope of F vs h through 0."""
    if len(curve) < 10:
        raise AnalysisError(f"need >= 10 samples, have {len(curve)}")
    h, f = curve.depths, curve.forces
    denom = float(np.dot(h, h))
    if denom == 0:
        raise AnalysisError("degenerate depth grid")
    return float(np.dot(h, f) / denom)


def fit_K(curve: ForceDepthCurve, intruder: IntruderSpec, column: MaterialColumn,
          env: EnvironmentConfig, residual_threshold: float = 0.05) -> float:
    """Recover the Archimedes constant from the post-transient linear region.

    Samples at h <= h_cone are excluded so the growing-cone transient does
    not bias the slope. Raises AnalysisError when fewer than 10 samples
    remain or when the post-transient region is not actually linear
    (relative RMS residual above residual_threshold), e.g. for plateau
    curves from cohesive powders.
    """
    h_cone, _ = cone_geometry(column, intruder)
    mask = curve.depths > h_cone
    if int(mask.sum()) < 10:
        raise AnalysisError(
            f"only {int(mask.sum())} post-transient samples, need >= 10")
    h, f = curve.depths[mask], curve.forces[mask]
    slope, intercept = _affine_fit(h, f)
    pred = slope * h + intercept
    scale = math.sqrt(float(np.mean(f**2)))
    resid = math.sqrt(float(np.mean((f - pred) ** 2)))
    if scale > 0 and resid / scale > residual_threshold:
        raise AnalysisError(
            f"post-transient region not linear (relative residual "
            f"{resid / scale:.3f} > {residual_threshold})")
    denom = column.phi * column.rho_p * env.gravity * intruder.cross_section
    return slope / denom


def detect_ruptures(curve: ForceDepthCurve, min_drop: float,
                    window: int = 5) -> list[RuptureEvent]:
    """Sudden force drops: local maxima followed by a monotone decrease of
    at least min_drop within `window` samples. Events are depth-sorted and
    no two events lie within `window` samples of each other.
    """
    if min_drop <= 0:
        raise SpecificationError("min_drop must be > 0")
    f = curve.forces
    d = curve.depths
    n = len(f)
    events: list[RuptureEvent] = []
    last = -window - 1
    for i in range(1, n - 1):
        if f[i] < f[i - 1] or f[i] <= f[i + 1]:
            continue  # not a local maximum
        lowest = f[i]
        j = i + 1
        while j < n and j - i <= window and f[j] < lowest:
            lowest = f[j]
            j += 1
        drop = float(f[i] - lowest)
        if drop >= min_drop and i - last > window:
            events.append(RuptureEvent(depth=float(d[i]), drop_magnitude=drop))
            last = i
    return events


class RegimeLabel(Enum):
    LINEAR = "linear"
    PLATEAU = "plateau"
    BRITTLE = "brittle"
    CRUST_THEN_LINEAR = "crust_then_linear"


@dataclass(frozen=True)
class ClassifierConfig:
    """Decision-rule constants, all overridable.

    min_drop for rupture counting is max(min_drop_floor, min_drop_rel * Fmax):
    the relative term makes +/-2% multiplicative noise provably unable to
    fake a rupture on a non-decreasing curve (max apparent drop is
    2*sigma*F < 0.045*Fmax).
    """

    min_drop_floor: float = 0.3   # N
    min_drop_rel: float = 0.045   # fraction of curve max force
    window: int = 5
    tau_lin: float = 0.05         # relative RMS residual for "linear"
    plateau_ratio: float = 0.1    # terminal/first third slope ratio


DEFAULT_CLASSIFIER = ClassifierConfig()


def _relative_residual(h: np.ndarray, f: np.ndarray) -> float:
    slope, intercept = _affine_fit(h, f)
    pred = slope * h + intercept
    scale = math.sqrt(float(np.mean(f**2)))
    if scale == 0:
        return 0.0
    return math.sqrt(float(np.mean((f - pred) ** 2))) / scale


def classify_regime(curve: ForceDepthCurve,
                    cfg: ClassifierConfig = DEFAULT_CLASSIFIER
                    ) -> tuple[RegimeLabel, float]:
    """Label the mechanical regime of a curve with a confidence score.

    Rules, in precedence order:
      * Brittle: >= 2 ruptures. Confidence 0.6 + 0.1 per rupture beyond the
        second, capped at 1.
      * CrustThenLinear: exactly one rupture in the first third and the
        remainder (past the rupture window) fits a line with relative
        residual < tau_lin. Confidence 1 - residual/tau_lin.
      * Plateau: no ruptures and terminal-third slope < plateau_ratio *
        first-third slope. Confidence 1 - ratio/plateau_ratio.
      * Linear: everything else. Confidence 1 - residual/tau_lin, with the
        residual taken over the last two thirds of the curve so the
        cone-formation transient does not depress it.
    """
    if len(curve) < 30:
        raise AnalysisError(f"need >= 30 samples, have {len(curve)}")
    h, f = curve.depths, curve.forces
    fmax = float(f.max())
    min_drop = max(cfg.min_drop_floor, cfg.min_drop_rel * fmax)
    ruptures = detect_ruptures(curve, min_drop, cfg.window)

    if len(ruptures) >= 2:
        conf = min(1.0, 0.6 + 0.1 * (len(ruptures) - 2))
        return RegimeLabel.BRITTLE, conf

    h_end = h[-1]
    if len(ruptures) == 1 and ruptures[0].depth <= h_end / 3.0:
        idx = int(np.searchsorted(h, ruptures[0].depth)) + cfg.window + 1
        if len(h) - idx >= 10:
            resid = _relative_residual(h[idx:], f[idx:])
            if resid < cfg.tau_lin:
                return (RegimeLabel.CRUST_THEN_LINEAR,
                        max(0.0, 1.0 - resid / cfg.tau_lin))

    third = len(h) // 3
    slope_first, _ = _affine_fit(h[:third], f[:third])
    slope_last, _ = _affine_fit(h[-third:], f[-third:])
    if not ruptures and slope_first > 0:
        ratio = slope_last / slope_first
        if ratio < cfg.plateau_ratio:
            conf = min(1.0, max(0.0, 1.0 - ratio / cfg.plateau_ratio))
            return RegimeLabel.PLATEAU, conf

    resid = _relative_residual(h[third:], f[third:])
    conf = min(1.0, max(0.0, 1.0 - resid / cfg.tau_lin))
    return RegimeLabel.LINEAR, conf


STRENGTH_THRESHOLDS = (10.0, 20.0, 30.0)  # N


def strength_summary(curve: ForceDepthCurve) -> StrengthSummary:
    """First-crossing depths of 10/20/30 N plus terminal force and k fit.

    Crossing depths interpolate linearly between the bracketing samples.
    """
    h, f = curve.depths, curve.forces
    depths: list[Optional[float]] = []
    for thr in STRENGTH_THRESHOLDS:
        above = np.nonzero(f >= thr)[0]
        if len(above) == 0:
            depths.append(None)
            continue
        i = int(above[0])
        if i == 0 or f[i] == thr:
            depths.append(float(h[i]))
        else:
            t = (thr - f[i - 1]) / (f[i] - f[i - 1])
            depths.append(float(h[i - 1] + t * (h[i] - h[i - 1])))
    terminal = float(np.mean(f[-5:])) if len(f) >= 5 else float(np.mean(f))
    try:
        k = fit_stiffness(curve)
    except AnalysisError:
        k = None
    return StrengthSummary(depths[0], depths[1], depths[2], terminal, k)


# ---------------------------------------------------------------------------
# curve files: tabular text + structured sidecar

CURVE_HEADER = "depth_m\tforce_N"
_SIDECAR_SUFFIX = ".meta.json"


def write_curve(curve: ForceDepthCurve, path: Path | str) -> Path:
    """Write a curve as tab-separated text plus a JSON metadata sidecar."""
    path = Path(path)
    lines = [CURVE_HEADER]
    for h, f in zip(curve.depths, curve.forces):
        lines.append(f"{h:.9g}\t{f:.9g}")
    path.write_text("\n".join(lines) + "\n")
    meta = {
        "provenance": curve.provenance.value,
        "valid": curve.valid,
        "protocol": {
            "speed": curve.protocol.speed,
            "max_depth": curve.protocol.max_depth,
            "sample_rate": curve.protocol.sample_rate,
        },
        "column": curve.column_ref.to_dict() if curve.column_ref else None,
    }
    sidecar = path.with_name(path.name + _SIDECAR_SUFFIX)
    sidecar.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return path


def read_curve(path: Path | str) -> ForceDepthCurve:
    path = Path(path)
    lines = path.read_text().strip().splitlines()
    if not lines or lines[0].strip() != CURVE_HEADER:
        raise SpecificationError(f"{path}: missing '{CURVE_HEADER}' header")
    rows = [ln.split("\t") for ln in lines[1:]]
    depths = np.array([float(r[0]) for r in rows])
    forces = np.array([float(r[1]) for r in rows])
    sidecar = path.with_name(path.name + _SIDECAR_SUFFIX)
    if not sidecar.exists():
        raise SpecificationError(f"{path}: metadata sidecar missing")
    meta = json.loads(sidecar.read_text())
    protocol = IntrusionProtocol(**meta["protocol"])
    column = MaterialColumn.from_dict(meta["column"]) if meta.get("column") else None
    return ForceDepthCurve(depths, forces, protocol,
                           Provenance(meta["provenance"]),
                           column_ref=column, valid=meta.get("valid", True))


def iter_curve_files(directory: Path | str):
    """Curve files in a directory, skipping sidecars; sorted for determinism."""
    directory = Path(directory)
    for p in sorted(directory.iterdir()):
        if p.is_file() and not p.name.endswith(_SIDECAR_SUFFIX):
            yield p
