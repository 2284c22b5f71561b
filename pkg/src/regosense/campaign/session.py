"""Event-sourced measurement campaign sessions.

A session is fully determined by its append-only event log: live state is
the fold of the events, and replaying the log reconstructs the identical
state byte-for-byte (stochastic steps re-derive from seeds logged in the
events, never from fresh randomness). The decision history is the
scientific record; nothing lives outside the fold.
"""

from __future__ import annotations

import hashlib
import json
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import config as cfg_mod
from ..errors import (
    ConflictError,
    CorruptionError,
    DomainError,
    SpecificationError,
    StateError,
)
from ..intrusion import (
    ForceDepthCurve,
    IntruderSpec,
    IntrusionProtocol,
    StrengthSummary,
    strength_summary,
)
from ..leg import GaitProtocol, gait_from_name, simulate_measurement
from ..sampler import (
    DecisionRecord,
    Hypothesis,
    Measurement,
    SamplerSession,
    SuggestionRound,
    Suggestion,
    record_decision,
    suggest,
    update_belief,
)
from ..terrain import TransectField

EVENT_KINDS = ("SessionCreated", "MeasurementAdded", "SuggestionsIssued",
               "DecisionRecorded", "SessionConcluded")


@dataclass(frozen=True)
class Event:
    seq: int
    timestamp: float
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps({"seq": self.seq, "timestamp": self.timestamp,
                           "kind": self.kind, "payload": self.payload},
                          sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(line: str) -> "Event":
        d = json.loads(line)
        return Event(seq=d["seq"], timestamp=d["timestamp"],
                     kind=d["kind"], payload=d["payload"])


def _measurement_seed(session_seed: int, seq: int) -> int:
    ss = np.random.SeedSequence([session_seed & 0xFFFFFFFF, seq])
    return int(ss.generate_state(1, np.uint64)[0])


class Session:
    """Live campaign state, reconstructed by folding events."""

    def __init__(self, created: Event):
        if created.kind != "SessionCreated":
            raise CorruptionError("first event must be SessionCreated")
        p = created.payload
        self.sid: str = p["id"]
        self.seed: int = p["seed"]
        self.terrain_raw: dict = p["terrain"]
        self.field = cfg_mod.parse_field_config(self.terrain_raw)
        if not isinstance(self.field, TransectField):
            raise SpecificationError(
                "campaign sessions run on transect fields")
        self.hypothesis = (Hypothesis.from_dict(p["hypothesis"])
                           if p.get("hypothesis") else None)
        self.candidate_count: int = p.get("candidate_count", 101)
        self.intruder = IntruderSpec(radius=p.get("intruder_radius", 0.0127))
        self.speed: float = p.get("speed", 0.02)
        self.max_depth: float = p.get("max_depth", 0.10)
        self.material_noise: float = p.get("material_noise", 0.02)
        self.default_gait: str = p.get("default_gait", "crawl")
        # per-gait noise/cost overrides ride along in the terrain config
        self.gait_overrides: dict = cfg_mod.gait_overrides(self.terrain_raw)
        candidates = np.linspace(0.0, 1.0, self.candidate_count)
        self.sampler = SamplerSession(candidates=candidates,
                                      hypothesis=self.hypothesis)
        self.curves: dict[str, ForceDepthCurve] = {}
        self.summaries: dict[str, StrengthSummary] = {}
        self.status: str = "open"
        self.events: list[Event] = [created]

    # -- helpers -----------------------------------------------------------

    @property
    def length(self) -> float:
        return self.field.geometry.length

    def _protocol(self, gait: GaitProtocol) -> IntrusionProtocol:
        return IntrusionProtocol(speed=self.speed, max_depth=self.max_depth,
                                 sample_rate=gait.sample_rate)

    def _next_seq(self) -> int:
        return len(self.events)

    def _require_open(self):
        if self.status != "open":
            raise StateError(f"session {self.sid} is concluded")

    def _append(self, kind: str, payload: dict,
                timestamp: Optional[float] = None) -> Event:
        ev = Event(seq=self._next_seq(),
                   timestamp=time.time() if timestamp is None else timestamp,
                   kind=kind, payload=payload)
        self._apply(ev)
        self.events.append(ev)
        return ev

    # -- fold --------------------------------------------------------------

    def _apply(self, ev: Event):
        if ev.kind == "MeasurementAdded":
            self._apply_measurement(ev)
        elif ev.kind == "SuggestionsIssued":
            p = ev.payload
            rnd = SuggestionRound(
                number=p["round"], weight=p["weight"],
                suggestions=[Suggestion.from_dict(s) for s in p["suggestions"]])
            self.sampler.rounds.append(rnd)
        elif ev.kind == "DecisionRecorded":
            record_decision(self.sampler,
                            DecisionRecord.from_dict(ev.payload["decision"]))
        elif ev.kind == "SessionConcluded":
            self.status = "concluded"
        else:
            raise CorruptionError(f"unknown event kind {ev.kind} at seq {ev.seq}")

    def _apply_measurement(self, ev: Event):
        p = ev.payload
        gait = gait_from_name(p["gait"], **self.gait_overrides.get(p["gait"], {}))
        protocol = self._protocol(gait)
        rng = np.random.default_rng(p["seed"])
        meas, curve = simulate_measurement(
            self.field, p["location_m"], gait, ground_tilt=0.0,
            intruder=self.intruder, protocol=protocol, env=self.field.env,
            rng=rng, material_noise=self.material_noise,
            measurement_id=p["measurement_id"], timestamp=ev.timestamp)
        if p.get("from_queue"):
            want = p["location_m"] / self.length
            if self.sampler.queue and abs(self.sampler.queue[0] - want) < 1e-9:
                self.sampler.queue.pop(0)
        self.sampler.add_measurement(meas)
        self.curves[p["measurement_id"]] = curve
        self.summaries[p["measurement_id"]] = strength_summary(curve)

    # -- commands ----------------------------------------------------------

    def run_initial_plan(self, locations_m: Sequence[float],
                         gait: str = "crawl") -> list[str]:
        """Measure each planned location in order; rejects any plan with an
        out-of-bounds location before running a single measurement."""
        self._require_open()
        gait_from_name(gait, **self.gait_overrides.get(gait, {}))  # validate early
        for x in locations_m:
            if not (0 <= x <= self.length):
                raise DomainError(
                    f"plan location {x} outside transect [0, {self.length}]")
        ids = []
        for x in locations_m:
            mid = f"m{len(self.curves):04d}"
            self._append("MeasurementAdded", {
                "measurement_id": mid,
                "location_m": float(x),
                "gait": gait,
                "seed": _measurement_seed(self.seed, self._next_seq()),
                "from_queue": False,
            })
            ids.append(mid)
        return ids

    def issue_suggestions(self, k: int = 3) -> SuggestionRound:
        self._require_open()
        number = len(self.sampler.rounds) + 1
        suggestions = suggest(self.sampler.measurements, self.hypothesis,
                              self.sampler.candidates, k=k,
                              weight=self.sampler.effective_weight())
        self._append("SuggestionsIssued", {
            "round": number,
            "k": k,
            "weight": suggestions[0].weight,
            "suggestions": [s.to_dict() for s in suggestions],
        })
        return self.sampler.rounds[-1]

    def current_round(self) -> Optional[SuggestionRound]:
        if not self.sampler.rounds:
            return None
        rnd = self.sampler.rounds[-1]
        decided = any(d.round_number == rnd.number for d in self.sampler.decisions)
        return None if decided else rnd

    def decide(self, decision: DecisionRecord, gait: Optional[str] = None) -> list[str]:
        """Record a decision and immediately run any enqueued measurement."""
        self._require_open()
        self._append("DecisionRecorded", {"decision": decision.to_dict()})
        ids = []
        while self.sampler.queue:
            loc_norm = self.sampler.queue[0]
            mid = f"m{len(self.curves):04d}"
            self._append("MeasurementAdded", {
                "measurement_id": mid,
                "location_m": loc_norm * self.length,
                "gait": gait or self.default_gait,
                "seed": _measurement_seed(self.seed, self._next_seq()),
                "from_queue": True,
            })
            ids.append(mid)
        return ids

    def conclude(self):
        self._require_open()
        self._append("SessionConcluded", {})

    # -- views -------------------------------------------------------------

    def belief(self):
        return update_belief(self.sampler.measurements, self.sampler.candidates)

    def canonical_state(self) -> dict:
        ms = []
        for ev in self.events:
            if ev.kind != "MeasurementAdded":
                continue
            mid = ev.payload["measurement_id"]
            m = next(m for m in self.sampler.measurements if m.curve_id == mid)
            summ = self.summaries[mid]
            ms.append({
                **m.to_dict(),
                "location_m": ev.payload["location_m"],
                "curve_digest": curve_digest(self.curves[mid]),
                "summary": summ.to_dict(),
            })
        return {
            "id": self.sid,
            "seed": self.seed,
            "status": self.status,
            "terrain": self.terrain_raw,
            "hypothesis": self.hypothesis.to_dict() if self.hypothesis else None,
            "candidate_count": self.candidate_count,
            "length_m": self.length,
            "default_gait": self.default_gait,
            "weight": self.sampler.effective_weight(),
            "measurements": ms,
            "rounds": [{"number": r.number, "weight": r.weight,
                        "suggestions": [s.to_dict() for s in r.suggestions]}
                       for r in self.sampler.rounds],
            "decisions": [d.to_dict() for d in self.sampler.decisions],
            "objective_feedback": list(self.sampler.objective_feedback),
            "queue": list(self.sampler.queue),
            "event_count": len(self.events),
        }

    def canonical_json(self) -> str:
        return json.dumps(self.canonical_state(), sort_keys=True,
                          separators=(",", ":"))


def curve_digest(curve: ForceDepthCurve) -> str:
    h = hashlib.sha256()
    for d, f in zip(curve.depths, curve.forces):
        h.update(f"{d:.9g},{f:.9g};".encode())
    return h.hexdigest()[:16]


def create_session(terrain: dict | str, hypothesis: Optional[Hypothesis],
                   seed: int, candidate_count: int = 101,
                   default_gait: str = "crawl",
                   material_noise: float = 0.02,
                   sid: Optional[str] = None,
                   intruder_radius: float = 0.0127,
                   speed: float = 0.02, max_depth: float = 0.10) -> Session:
    terrain_raw = terrain if isinstance(terrain, dict) else cfg_mod.load_raw(terrain)
    payload = {
        "id": sid or uuid.uuid4().hex[:12],
        "seed": int(seed),
        "terrain": terrain_raw,
        "hypothesis": hypothesis.to_dict() if hypothesis else None,
        "candidate_count": candidate_count,
        "default_gait": default_gait,
        "material_noise": material_noise,
        "intruder_radius": intruder_radius,
        "speed": speed,
        "max_depth": max_depth,
    }
    ev = Event(seq=0, timestamp=time.time(), kind="SessionCreated",
               payload=payload)
    return Session(ev)


def replay(events: Sequence[Event]) -> Session:
    """Rebuild a session from its event log.

    Any prefix of a valid log is itself valid (prefix closure). Sequence
    numbers must be contiguous from 0; violations raise CorruptionError
    naming the offending index.
    """
    events = list(events)
    if not events:
        raise CorruptionError("empty log: missing SessionCreated")
    for i, ev in enumerate(events):
        if ev.seq != i:
            raise CorruptionError(
                f"sequence gap or duplicate at index {i}: got seq {ev.seq}")
    if events[0].kind != "SessionCreated":
        raise CorruptionError("first event must be SessionCreated")
    session = Session(events[0])
    for ev in events[1:]:
        session._apply(ev)
        session.events.append(ev)
    return session


def parse_log(text: str) -> list[Event]:
    return [Event.from_json(line) for line in text.splitlines() if line.strip()]
