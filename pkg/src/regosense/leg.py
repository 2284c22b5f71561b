"""Proprioceptive measurement chain for a 2-DoF planar leg.

Ground-truth intrusion forces are mapped to joint torques along a scripted
vertical penetration trajectory, perturbed by gait-dependent noise, and
inverted back to tip forces through the Jacobian transpose. The quasistatic
gait knows the ground plane exactly (three supporting contacts); the
dynamic trot gait pays for speed with a noisy plane estimate and additive
inertial force noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DomainError, SingularityError, SpecificationError
from .intrusion import (
    ForceDepthCurve,
    IntruderSpec,
    IntrusionProtocol,
    Provenance,
    fit_stiffness,
    synthesize,
)
from .sampler import Measurement
from .terrain import EnvironmentConfig, GridField, TerrainField, TransectField

DET_FLOOR = 1e-4  # m^2, singularity guard on |det J|


@dataclass(frozen=True)
class LegGeometry:
    l1: float = 0.2  # m
    l2: float = 0.2  # m

    def __post_init__(self):
        if self.l1 <= 0 or self.l2 <= 0:
            raise SpecificationError("link lengths must be > 0")


DEFAULT_LEG = LegGeometry()


@dataclass(frozen=True)
class LegState:
    q1: float
    q2: float
    tau1: float
    tau2: float


class GaitKind(Enum):
    STANDALONE_PENETRATE = "standalone_penetrate"
    CRAWL_N_SENSE = "crawl_n_sense"
    TROT_WALK = "trot_walk"


@dataclass(frozen=True)
class GaitProtocol:
    """Sensing protocol with its noise model and per-location time cost."""

    kind: GaitKind
    sample_rate: float          # Hz: 300 lab, 100 field
    sigma_tau: float = 0.0      # N*m, joint torque noise
    sigma_tilt: float = 0.0     # rad, ground-plane estimate error (trot only)
    sigma_inertial: float = 0.0  # N, additive force noise (trot only)
    overhead_s: float = 0.0     # repositioning cost per location

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise SpecificationError("sample_rate must be > 0")
        if min(self.sigma_tau, self.sigma_tilt, self.sigma_inertial) < 0:
            raise SpecificationError("noise sigmas must be >= 0")
        if self.kind is not GaitKind.TROT_WALK and self.sigma_tilt != 0:
            raise SpecificationError(
                "only the trot gait has ground-plane estimation error")

    @staticmethod
    def standalone(sample_rate: float = 300.0) -> "GaitProtocol":
        return GaitProtocol(GaitKind.STANDALONE_PENETRATE, sample_rate,
                            sigma_tau=0.005, overhead_s=60.0)

    @staticmethod
    def crawl(sample_rate: float = 100.0) -> "GaitProtocol":
        # quasistatic three-leg support keeps torque noise at the
        # standalone-instrument level
        return GaitProtocol(GaitKind.CRAWL_N_SENSE, sample_rate,
                            sigma_tau=0.005, overhead_s=30.0)

    @staticmethod
    def trot(sample_rate: float = 100.0) -> "GaitProtocol":
        return GaitProtocol(GaitKind.TROT_WALK, sample_rate,
                            sigma_tau=0.05, sigma_tilt=0.05,
                            sigma_inertial=0.8, overhead_s=5.0)


def gait_from_name(name: str, **overrides) -> GaitProtocol:
    factory = {"standalone": GaitProtocol.standalone,
               "crawl": GaitProtocol.crawl,
               "trot": GaitProtocol.trot}.get(name)
    if factory is None:
        raise SpecificationError(f"unknown gait '{name}'")
    g = factory()
    if overrides:
        g = GaitProtocol(**{**g.__dict__, **overrides})
    return g


# ---------------------------------------------------------------------------
# kinematics


def forward_kinematics(geom: LegGeometry, q1: float, q2: float) -> tuple[float, float]:
    x = geom.l1 * math.cos(q1) + geom.l2 * math.cos(q1 + q2)
    z = geom.l1 * math.sin(q1) + geom.l2 * math.sin(q1 + q2)
    return x, z


def jacobian(geom: LegGeometry, q1, q2) -> np.ndarray:
    """Tip Jacobian d(x, z)/d(q1, q2); accepts scalars or arrays."""
    s1, c1 = np.sin(q1), np.cos(q1)
    s12, c12 = np.sin(np.asarray(q1) + q2), np.cos(np.asarray(q1) + q2)
    j11 = -geom.l1 * s1 - geom.l2 * s12
    j12 = -geom.l2 * s12
    j21 = geom.l1 * c1 + geom.l2 * c12
    j22 = geom.l2 * c12
    return np.array([[j11, j12], [j21, j22]])


def inverse_kinematics(geom: LegGeometry, x: float, z: float) -> tuple[float, float]:
    """Elbow-up joint angles reaching tip (x, z)."""
    r2 = x * x + z * z
    c2 = (r2 - geom.l1**2 - geom.l2**2) / (2.0 * geom.l1 * geom.l2)
    if not (-1.0 <= c2 <= 1.0):
        raise DomainError(f"tip ({x}, {z}) unreachable for leg {geom}")
    q2 = math.acos(c2)
    q1 = math.atan2(z, x) - math.atan2(geom.l2 * math.sin(q2),
                                       geom.l1 + geom.l2 * math.cos(q2))
    return q1, q2


def estimate_tip_force(geom: LegGeometry, state: LegState,
                       det_floor: float = DET_FLOOR) -> tuple[float, float]:
    """Tip force from joint torques via the inverse-transpose Jacobian."""
    j = jacobian(geom, state.q1, state.q2)
    det = float(j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0])
    if abs(det) <= det_floor:
        raise SingularityError(det, det_floor)
    tau = np.array([state.tau1, state.tau2])
    # J^{-T} tau with the 2x2 adjugate, avoiding a full solve
    fx = (j[1, 1] * tau[0] - j[1, 0] * tau[1]) / det
    fz = (-j[0, 1] * tau[0] + j[0, 0] * tau[1]) / det
    return float(fx), float(fz)


# ---------------------------------------------------------------------------
# measurement pipeline


@dataclass(frozen=True)
class PenetrationStance:
    """Scripted trajectory parameters: where the tip starts relative to the
    leg base and how far from the base the penetration line runs."""

    stance_x: float = 0.15
    surface_z: float = -0.2


def _normal_vector(tilt: float) -> np.ndarray:
    # ground-plane normal for a plane tilted by `tilt` from horizontal
    return np.array([-math.sin(tilt), math.cos(tilt)])


def _location_key(field: TerrainField, location) -> float | tuple[int, int]:
    if isinstance(field, TransectField):
        return float(location) / field.geometry.length
    return field.geometry.cell_of(*location)


def simulate_measurement(field: TerrainField, location, gait: GaitProtocol,
                         ground_tilt: float, intruder: IntruderSpec,
                         protocol: IntrusionProtocol, env: EnvironmentConfig,
                         rng: np.random.Generator,
                         geom: LegGeometry = DEFAULT_LEG,
                         stance: PenetrationStance = PenetrationStance(),
                         material_noise: float = 0.02,
                         measurement_id: str = "m0",
                         timestamp: float = 0.0,
                         ) -> tuple[Measurement, ForceDepthCurve]:
    """Run one leg-sensed intrusion at a field location.

    Pipeline: ground-truth synthesis -> joint torques along the scripted
    penetration -> torque noise -> tip-force estimation -> rotation into the
    estimated ground frame (exact for quasistatic gaits, noisy for trot,
    plus per-sample inertial noise for trot). A singular configuration
    anywhere along the trajectory aborts the measurement; the partial curve
    is returned flagged invalid and must not enter any belief.
    """
    column = field.column_at(location)
    truth = synthesize(column, intruder, protocol, env, rng,
                       noise_sigma=material_noise)
    h = truth.depths
    n = len(h)

    normal = _normal_vector(ground_tilt)
    f_world = truth.forces[:, None] * normal[None, :]  # (n, 2)

    # commanded tip path: straight line into the ground along the normal
    p0 = np.array([stance.stance_x, stance.surface_z])
    tips = p0[None, :] - h[:, None] * normal[None, :]

    # vectorized elbow-up inverse kinematics; unreachable targets abort
    r2 = tips[:, 0] ** 2 + tips[:, 1] ** 2
    c2 = (r2 - geom.l1**2 - geom.l2**2) / (2.0 * geom.l1 * geom.l2)
    unreachable = np.nonzero(np.abs(c2) > 1.0)[0]
    aborted_at = int(unreachable[0]) if len(unreachable) else n
    c2v = np.clip(c2[:aborted_at], -1.0, 1.0)
    q2 = np.arccos(c2v)
    q1 = np.arctan2(tips[:aborted_at, 1], tips[:aborted_at, 0]) - \
        np.arctan2(geom.l2 * np.sin(q2), geom.l1 + geom.l2 * c2v)

    j = jacobian(geom, q1, q2)  # (2, 2, m)
    det = j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
    bad = np.nonzero(np.abs(det) <= DET_FLOOR)[0]
    if len(bad):
        aborted_at = min(aborted_at, int(bad[0]))

    m = aborted_at
    aborted = m < n
    jm = j[:, :, :m]
    detm = det[:m]
    fw = f_world[:m]
    tau1 = jm[0, 0] * fw[:, 0] + jm[1, 0] * fw[:, 1]
    tau2 = jm[0, 1] * fw[:, 0] + jm[1, 1] * fw[:, 1]
    if gait.sigma_tau > 0:
        tau1 = tau1 + rng.normal(0.0, gait.sigma_tau, size=m)
        tau2 = tau2 + rng.normal(0.0, gait.sigma_tau, size=m)

    fx = (jm[1, 1] * tau1 - jm[1, 0] * tau2) / detm
    fz = (-jm[0, 1] * tau1 + jm[0, 0] * tau2) / detm

    tilt_est = ground_tilt
    if gait.sigma_tilt > 0:
        tilt_est = ground_tilt + float(rng.normal(0.0, gait.sigma_tilt))
    n_est = _normal_vector(tilt_est)
    f_normal = fx * n_est[0] + fz * n_est[1]
    if gait.sigma_inertial > 0:
        f_normal = f_normal + rng.normal(0.0, gait.sigma_inertial, size=m)
    f_normal = np.maximum(f_normal, 0.0)  # regolith cannot pull

    if aborted:
        # pad with zeros so the curve keeps its grid, but flag it invalid
        forces = np.zeros(n)
        forces[:m] = f_normal
        curve = ForceDepthCurve(h, forces, protocol, Provenance.LEG_ESTIMATE,
                                column_ref=column, valid=False)
        meas = Measurement(location=_norm_loc(field, location), strength=0.0,
                           curve_id=measurement_id, gait=gait.kind.value,
                           timestamp=timestamp, valid=False,
                           cost_s=_cost(gait, protocol))
        return meas, curve

    curve = ForceDepthCurve(h, f_normal, protocol, Provenance.LEG_ESTIMATE,
                            column_ref=column, valid=True)
    k = fit_stiffness(curve)
    meas = Measurement(location=_norm_loc(field, location),
                       strength=max(k, 0.0),
                       curve_id=measurement_id, gait=gait.kind.value,
                       timestamp=timestamp, valid=True,
                       cost_s=_cost(gait, protocol))
    return meas, curve


def _norm_loc(field: TerrainField, location) -> float:
    if isinstance(field, TransectField):
        return float(location) / field.geometry.length
    # grid cells are keyed by flat index scaled to [0, 1] for belief math
    geom = field.geometry
    i, j = geom.cell_of(*location)
    flat = i * geom.ny + j
    return flat / max(geom.nx * geom.ny - 1, 1)


def _cost(gait: GaitProtocol, protocol: IntrusionProtocol) -> float:
    return protocol.max_depth / protocol.speed + gait.overhead_s
