"""Adaptive-sampling engine for the shared-autonomy measurement loop.

Belief over a transect, exploration/verification rewards, gap-driven
objective weighting, ranked explainable suggestions, and the
accept/reject/feedback state machine. All reward computation is pure;
session state mutates only through record_decision and measurement
ingestion (single writer per session).

Transect coordinates are normalized to [0, 1] throughout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import ConflictError, ExhaustedError, SpecificationError, StateError


@dataclass(frozen=True)
class Measurement:
    """Strength summary pinned to a normalized transect coordinate."""

    location: float
    strength: float          # fitted one-way-spring stiffness, N/m
    curve_id: str
    gait: str
    timestamp: float = 0.0
    valid: bool = True
    cost_s: float = 0.0

    def __post_init__(self):
        if self.valid:
            if not math.isfinite(self.strength) or self.strength < 0:
                raise SpecificationError(
                    f"strength must be finite and >= 0, got {self.strength}")

    def to_dict(self) -> dict:
        return {
            "location": self.location,
            "strength": self.strength,
            "curve_id": self.curve_id,
            "gait": self.gait,
            "timestamp": self.timestamp,
            "valid": self.valid,
            "cost_s": self.cost_s,
        }


def valid_measurements(measurements: Sequence[Measurement]) -> list[Measurement]:
    """Drop aborted measurements before they reach any downstream math."""
    return [m for m in measurements if m.valid]


class HypothesisShape(Enum):
    MONOTONE_INCREASING = "monotone_increasing"
    MONOTONE_DECREASING = "monotone_decreasing"
    UNIMODAL = "unimodal"
    PIECEWISE_LINEAR = "piecewise_linear"


@dataclass(frozen=True)
class Hypothesis:
    """Qualitative strength-trend template t(x) in [0, 1] over x in [0, 1]."""

    shape: HypothesisShape
    peak: Optional[float] = None                  # UNIMODAL only
    knots: Optional[tuple[tuple[float, float], ...]] = None  # PIECEWISE_LINEAR
    description: str = ""

    def __post_init__(self):
        if self.shape is HypothesisShape.UNIMODAL:
            if self.peak is None or not (0 <= self.peak <= 1):
                raise SpecificationError("unimodal hypothesis needs peak in [0, 1]")
        if self.shape is HypothesisShape.PIECEWISE_LINEAR:
            if not self.knots or len(self.knots) < 2:
                raise SpecificationError("piecewise hypothesis needs >= 2 knots")
            xs = [k[0] for k in self.knots]
            ys = [k[1] for k in self.knots]
            if sorted(xs) != xs or xs[0] != 0.0 or xs[-1] != 1.0:
                raise SpecificationError("knot x values must be sorted over [0, 1]")
            if any(not (0 <= y <= 1) for y in ys):
                raise SpecificationError("knot values must lie in [0, 1]")

    def template(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s = self.shape
        if s is HypothesisShape.MONOTONE_INCREASING:
            return x.copy()
        if s is HypothesisShape.MONOTONE_DECREASING:
            return 1.0 - x
        if s is HypothesisShape.UNIMODAL:
            p = self.peak
            up = x / p if p > 0 else np.ones_like(x)
            down = (1.0 - x) / (1.0 - p) if p < 1 else np.ones_like(x)
            return np.where(x <= p, up, down)
        xs = np.array([k[0] for k in self.knots])
        ys = np.array([k[1] for k in self.knots])
        return np.interp(x, xs, ys)

    def to_dict(self) -> dict:
        d = {"shape": self.shape.value, "description": self.description}
        if self.peak is not None:
            d["peak"] = self.peak
        if self.knots is not None:
            d["knots"] = [list(k) for k in self.knots]
        return d

    @staticmethod
    def from_dict(d: dict) -> "Hypothesis":
        return Hypothesis(
            shape=HypothesisShape(d["shape"]),
            peak=d.get("peak"),
            knots=tuple(tuple(k) for k in d["knots"]) if d.get("knots") else None,
            description=d.get("description", ""))


@dataclass(frozen=True)
class Belief:
    """Interpolated strength estimate with distance-grown uncertainty."""

    candidates: np.ndarray
    mean: np.ndarray
    uncertainty: np.ndarray

    def mean_at(self, x: float) -> float:
        return float(np.interp(x, self.candidates, self.mean))


SIGMA_FLOOR = 0.5   # N/m, uncertainty at a measured location
SIGMA_SCALE = 10.0  # N/m per unit normalized distance


def update_belief(measurements: Sequence[Measurement],
                  candidates: np.ndarray,
                  sigma_floor: float = SIGMA_FLOOR,
                  sigma_scale: float = SIGMA_SCALE) -> Belief:
    """Linear interpolation between measurements, constant at the ends.

    Uncertainty is sigma_floor at a measured location and grows linearly
    with normalized distance to the nearest measurement. Invalid
    measurements are excluded; duplicates at one location keep the latest.
    """
    ms = valid_measurements(measurements)
    if not ms:
        raise StateError("belief needs at least one valid measurement")
    latest: dict[float, Measurement] = {}
    for m in sorted(ms, key=lambda m: m.timestamp):
        latest[m.location] = m
    xs = np.array(sorted(latest.keys()))
    ys = np.array([latest[x].strength for x in xs])
    candidates = np.asarray(candidates, dtype=float)
    mean = np.interp(candidates, xs, ys)
    dist = np.min(np.abs(candidates[:, None] - xs[None, :]), axis=1)
    sigma = sigma_floor + sigma_scale * dist
    return Belief(candidates, mean, sigma)


def _measured_locations(measurements: Sequence[Measurement]) -> np.ndarray:
    return np.array(sorted({m.location for m in valid_measurements(measurements)}))


def explore_rewards(candidates: np.ndarray,
                    measurements: Sequence[Measurement],
                    boundary_distance: Optional[np.ndarray] = None,
                    boundary_scale: float = 0.1) -> np.ndarray:
    """Coverage reward: normalized distance to the nearest measurement.

    r_e(x) = min distance to a measured location / (span / 2), clamped to
    [0, 1]; with no measurements every candidate scores 1. When
    boundary_distance is given (patchy mode), r_e is multiplied by
    exp(-d_boundary / boundary_scale) so information value concentrates
    near region-of-interest boundaries.
    """
    candidates = np.asarray(candidates, dtype=float)
    xs = _measured_locations(measurements)
    if len(xs) == 0:
        r = np.ones(len(candidates))
    else:
        dist = np.min(np.abs(candidates[:, None] - xs[None, :]), axis=1)
        r = np.clip(dist / 0.5, 0.0, 1.0)
    if boundary_distance is not None:
        r = r * np.exp(-np.asarray(boundary_distance, dtype=float) / boundary_scale)
    return r


def explore_reward(x: float, measurements: Sequence[Measurement]) -> float:
    return float(explore_rewards(np.array([x]), measurements)[0])


def _fit_template(hypothesis: Hypothesis,
                  measurements: Sequence[Measurement]) -> tuple[float, float]:
    """Least-squares affine map a*t(x) + b to measured strengths, a >= 0.

    The non-negativity constraint keeps an anti-correlated hypothesis from
    being silently inverted into a good fit.
    """
    ms = valid_measurements(measurements)
    x = np.array([m.location for m in ms])
    y = np.array([m.strength for m in ms])
    t = hypothesis.template(x)
    tc = t - t.mean()
    denom = float(np.dot(tc, tc))
    if denom == 0:
        return 0.0, float(y.mean())
    a = float(np.dot(tc, y - y.mean()) / denom)
    if a < 0:
        return 0.0, float(y.mean())
    b = float(y.mean() - a * t.mean())
    return a, b


def verify_rewards(belief: Belief, hypothesis: Hypothesis,
                   measurements: Sequence[Measurement]) -> np.ndarray:
    """Hypothesis-discrepancy reward over belief.candidates.

    Residual between the belief mean and the affine-fitted template,
    normalized by the largest residual (zero everywhere when the fit is
    exact). Falls back to all-zero with a warning when fewer than two valid
    measurements exist.
    """
    ms = valid_measurements(measurements)
    if len(ms) < 2:
        warnings.warn("verification reward needs >= 2 measurements; using 0",
                      stacklevel=2)
        return np.zeros(len(belief.candidates))
    a, b = _fit_template(hypothesis, ms)
    pred = a * hypothesis.template(belief.candidates) + b
    rho = np.abs(belief.mean - pred)
    top = float(rho.max())
    scale = max(float(np.abs(belief.mean).max()), 1.0)
    if top <= 1e-9 * scale:  # exact agreement up to float rounding
        return np.zeros(len(belief.candidates))
    return rho / top


def verify_reward(x: float, belief: Belief, hypothesis: Hypothesis,
                  measurements: Sequence[Measurement]) -> float:
    rewards = verify_rewards(belief, hypothesis, measurements)
    idx = int(np.argmin(np.abs(belief.candidates - x)))
    return float(rewards[idx])


GAP_FULL_EXPLORE = 0.25  # any gap above this fraction => pure exploration
GAP_FULL_VERIFY = 0.05   # all gaps below this fraction => pure verification


def objective_weight(measurements: Sequence[Measurement]) -> float:
    """Exploration weight from the largest coverage gap.

    G is the largest gap between adjacent measured locations including the
    boundary gaps, as a fraction of the transect. The weight ramps linearly
    from pure verification (all gaps < 5%) to pure exploration (any gap >
    25%).
    """
    xs = _measured_locations(measurements)
    if len(xs) == 0:
        g = 1.0
    else:
        pts = np.concatenate([[0.0], xs, [1.0]])
        g = float(np.max(np.diff(pts)))
    w = (g - GAP_FULL_VERIFY) / (GAP_FULL_EXPLORE - GAP_FULL_VERIFY)
    return float(np.clip(w, 0.0, 1.0))


@dataclass(frozen=True)
class Suggestion:
    location: float
    explore_reward: float
    verify_reward: float
    weight: float
    combined: float
    explanation: str

    def to_dict(self) -> dict:
        return {
            "location": self.location,
            "explore_reward": self.explore_reward,
            "verify_reward": self.verify_reward,
            "weight": self.weight,
            "combined": self.combined,
            "explanation": self.explanation,
        }

    @staticmethod
    def from_dict(d: dict) -> "Suggestion":
        return Suggestion(d["location"], d["explore_reward"], d["verify_reward"],
                          d["weight"], d["combined"], d["explanation"])


def _explain(x: float, r_e: float, r_v: float, w: float) -> str:
    explore_part = w * r_e
    verify_part = (1.0 - w) * r_v
    if explore_part >= verify_part:
        return (f"exploration-led: x={x:.3f} fills the largest coverage gap "
                f"(explore {r_e:.2f}, verify {r_v:.2f}, weight {w:.2f})")
    return (f"verification-led: the belief at x={x:.3f} disagrees most with "
            f"the hypothesis trend (verify {r_v:.2f}, explore {r_e:.2f}, "
            f"weight {w:.2f})")


def suggest(measurements: Sequence[Measurement], hypothesis: Optional[Hypothesis],
            candidates: np.ndarray, k: int = 3,
            weight: Optional[float] = None,
            boundary_distance: Optional[np.ndarray] = None,
            temperature: float = 0.0,
            rng: Optional[np.random.Generator] = None) -> list[Suggestion]:
    """Ranked measurement-location suggestions with reward breakdowns.

    Candidates that coincide with a measured location are excluded; ties
    break toward the lower coordinate. `weight` overrides the gap schedule
    when given. temperature > 0 turns deterministic argmax ranking into
    softmax sampling (an experimental hook; default off).
    """
    candidates = np.asarray(candidates, dtype=float)
    if len(candidates) == 0 or k < 1:
        raise SpecificationError("need a nonempty candidate set and k >= 1")
    w = objective_weight(measurements) if weight is None else float(weight)
    r_e = explore_rewards(candidates, measurements,
                          boundary_distance=boundary_distance)
    ms = valid_measurements(measurements)
    if hypothesis is not None and len(ms) >= 2:
        belief = update_belief(ms, candidates)
        r_v = verify_rewards(belief, hypothesis, ms)
    else:
        r_v = np.zeros(len(candidates))
    combined = w * r_e + (1.0 - w) * r_v

    measured = {m.location for m in ms}
    open_idx = [i for i, c in enumerate(candidates)
                if not any(abs(c - mx) < 1e-9 for mx in measured)]
    if not open_idx:
        raise ExhaustedError("every candidate location is already measured")

    if temperature > 0:
        if rng is None:
            raise SpecificationError("temperature sampling needs an rng")
        scores = np.array([combined[i] for i in open_idx])
        p = np.exp((scores - scores.max()) / temperature)
        p /= p.sum()
        order = list(rng.choice(len(open_idx), size=min(k, len(open_idx)),
                                replace=False, p=p))
        chosen = [open_idx[i] for i in order]
    else:
        chosen = sorted(open_idx,
                        key=lambda i: (-combined[i], candidates[i]))[:k]

    return [Suggestion(location=float(candidates[i]),
                       explore_reward=float(r_e[i]),
                       verify_reward=float(r_v[i]),
                       weight=w,
                       combined=float(combined[i]),
                       explanation=_explain(float(candidates[i]),
                                            float(r_e[i]), float(r_v[i]), w))
            for i in chosen]


def hypothesis_confidence(belief: Belief, hypothesis: Hypothesis,
                          measurements: Sequence[Measurement]) -> float:
    """1 - (fit residual RMS / centered strength RMS), clamped to [0, 1].

    Degenerate case (all strengths equal): 1 when the fit is exact, else 0,
    with a warning.
    """
    ms = valid_measurements(measurements)
    if len(ms) < 2:
        raise StateError("confidence needs >= 2 valid measurements")
    x = np.array([m.location for m in ms])
    y = np.array([m.strength for m in ms])
    a, b = _fit_template(hypothesis, ms)
    resid = y - (a * hypothesis.template(x) + b)
    rms_resid = math.sqrt(float(np.mean(resid**2)))
    rms_y = math.sqrt(float(np.mean((y - y.mean()) ** 2)))
    if rms_y == 0:
        warnings.warn("all measured strengths equal; confidence degenerate",
                      stacklevel=2)
        return 1.0 if rms_resid < 1e-12 else 0.0
    return float(np.clip(1.0 - rms_resid / rms_y, 0.0, 1.0))


# ---------------------------------------------------------------------------
# decision state machine


class Outcome(Enum):
    ACCEPTED = "accepted"
    REJECTED_WITH_ALTERNATIVE = "rejected_with_alternative"
    REJECTED_NO_ALTERNATIVE = "rejected_no_alternative"


class Feedback(Enum):
    NONE = "none"
    OBJECTIVE_MISMATCH = "objective_mismatch"
    LOCATION_MISMATCH = "location_mismatch"


@dataclass(frozen=True)
class DecisionRecord:
    round_number: int
    suggestion: Suggestion
    outcome: Outcome
    alternative: Optional[float] = None
    feedback: Feedback = Feedback.NONE
    stated_objective: Optional[str] = None  # "explore" | "verify"

    def __post_init__(self):
        if self.outcome is Outcome.REJECTED_WITH_ALTERNATIVE and self.alternative is None:
            raise SpecificationError("rejection with alternative needs a location")
        if self.feedback is Feedback.OBJECTIVE_MISMATCH and \
                self.stated_objective not in ("explore", "verify"):
            raise SpecificationError(
                "objective feedback must state 'explore' or 'verify'")

    def to_dict(self) -> dict:
        return {
            "round_number": self.round_number,
            "suggestion": self.suggestion.to_dict(),
            "outcome": self.outcome.value,
            "alternative": self.alternative,
            "feedback": self.feedback.value,
            "stated_objective": self.stated_objective,
        }

    @staticmethod
    def from_dict(d: dict) -> "DecisionRecord":
        return DecisionRecord(
            round_number=d["round_number"],
            suggestion=Suggestion.from_dict(d["suggestion"]),
            outcome=Outcome(d["outcome"]),
            alternative=d.get("alternative"),
            feedback=Feedback(d.get("feedback", "none")),
            stated_objective=d.get("stated_objective"))


FEEDBACK_BLEND = 0.5  # pull strength of a stated-objective correction


@dataclass
class SuggestionRound:
    number: int
    weight: float
    suggestions: list[Suggestion]


@dataclass
class SamplerSession:
    """Mutable sampling-loop state; single writer, pure readers."""

    candidates: np.ndarray
    hypothesis: Optional[Hypothesis] = None
    measurements: list[Measurement] = field(default_factory=list)
    rounds: list[SuggestionRound] = field(default_factory=list)
    decisions: list[DecisionRecord] = field(default_factory=list)
    objective_feedback: list[str] = field(default_factory=list)
    queue: list[float] = field(default_factory=list)

    def effective_weight(self) -> float:
        """Gap-schedule weight with accumulated objective corrections."""
        w = objective_weight(self.measurements)
        for stated in self.objective_feedback:
            if stated == "explore":
                w = w + FEEDBACK_BLEND * (1.0 - w)
            else:
                w = (1.0 - FEEDBACK_BLEND) * w
        return w

    def add_measurement(self, m: Measurement):
        self.measurements.append(m)

    def issue_round(self, k: int) -> SuggestionRound:
        number = len(self.rounds) + 1
        suggestions = suggest(self.measurements, self.hypothesis,
                              self.candidates, k=k,
                              weight=self.effective_weight())
        rnd = SuggestionRound(number=number, weight=suggestions[0].weight,
                              suggestions=suggestions)
        self.rounds.append(rnd)
        return rnd


def record_decision(session: SamplerSession,
                    decision: DecisionRecord) -> SamplerSession:
    """Apply a human decision to the latest round, updating the queue and
    the objective-weight correction state.
    """
    if not session.rounds:
        raise ConflictError("no suggestion round issued yet")
    latest = session.rounds[-1]
    if decision.round_number != latest.number:
        raise ConflictError(
            f"decision references round {decision.round_number}, "
            f"latest is {latest.number}")
    if all(s.location != decision.suggestion.location
           for s in latest.suggestions):
        raise ConflictError("decision suggestion is not part of the round")

    if decision.outcome is Outcome.ACCEPTED:
        session.queue.append(decision.suggestion.location)
    elif decision.outcome is Outcome.REJECTED_WITH_ALTERNATIVE:
        alt = decision.alternative
        if not any(abs(alt - c) < 1e-9 for c in session.candidates):
            raise SpecificationError(
                f"alternative {alt} is not a candidate location")
        session.queue.append(float(alt))

    if decision.feedback is Feedback.OBJECTIVE_MISMATCH:
        session.objective_feedback.append(decision.stated_objective)
    session.decisions.append(decision)
    return session
