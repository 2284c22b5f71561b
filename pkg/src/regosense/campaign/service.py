"""HTTP service exposing campaign sessions to the browser client.

One logical writer per session (per-session lock); readers always observe
a committed event boundary because every handler runs under the same lock
and state only changes at event application points.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..errors import (
    AnalysisError,
    ConflictError,
    CorruptionError,
    DomainError,
    ExhaustedError,
    NotFoundError,
    RegosenseError,
    SpecificationError,
    StateError,
)
from ..intrusion import classify_regime, detect_ruptures
from ..sampler import DecisionRecord, Feedback, Hypothesis, Outcome
from .session import create_session
from .store import SessionStore


class HypothesisBody(BaseModel):
    shape: str
    peak: Optional[float] = None
    knots: Optional[list[list[float]]] = None
    description: str = ""


class CreateSessionBody(BaseModel):
    terrain: Union[str, dict]
    hypothesis: Optional[HypothesisBody] = None
    seed: int = 0
    candidate_count: int = Field(default=101, ge=2)
    default_gait: str = "crawl"
    material_noise: float = 0.02


class PlanBody(BaseModel):
    locations_m: list[float]
    gait: str = "crawl"


class DecisionBody(BaseModel):
    round: int
    location: float
    outcome: str  # accept | reject_alt | reject
    alternative: Optional[float] = None
    feedback: Optional[str] = None  # objective | location
    stated_objective: Optional[str] = None  # explore | verify
    gait: Optional[str] = None


_OUTCOMES = {
    "accept": Outcome.ACCEPTED,
    "reject_alt": Outcome.REJECTED_WITH_ALTERNATIVE,
    "reject": Outcome.REJECTED_NO_ALTERNATIVE,
}
_FEEDBACK = {
    None: Feedback.NONE,
    "none": Feedback.NONE,
    "objective": Feedback.OBJECTIVE_MISMATCH,
    "location": Feedback.LOCATION_MISMATCH,
}


def create_app(store_root: Path | str = "sessions",
               ui_dir: Optional[Path | str] = None) -> FastAPI:
    store = SessionStore(store_root)
    app = FastAPI(title="regosense campaign service")
    app.state.store = store

    @app.exception_handler(RegosenseError)
    async def _domain_errors(request: Request, exc: RegosenseError):
        if isinstance(exc, NotFoundError):
            code = 404
        elif isinstance(exc, ConflictError):
            code = 409
        elif isinstance(exc, (SpecificationError, DomainError, StateError,
                              ExhaustedError, CorruptionError)):
            code = 422
        else:
            code = 500
        return JSONResponse(status_code=code,
                            content={"error": type(exc).__name__,
                                     "detail": str(exc)})

    @app.post("/sessions", status_code=201)
    def post_session(body: CreateSessionBody):
        hyp = None
        if body.hypothesis is not None:
            hyp = Hypothesis.from_dict(body.hypothesis.model_dump(exclude_none=True))
        session = create_session(
            terrain=body.terrain, hypothesis=hyp, seed=body.seed,
            candidate_count=body.candidate_count,
            default_gait=body.default_gait,
            material_noise=body.material_noise)
        with store.lock(session.sid):
            store.add(session)
        return {"id": session.sid, "state": session.canonical_state()}

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": store.list_sessions()}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        with store.lock(sid):
            return store.get(sid).canonical_state()

    @app.post("/sessions/{sid}/plan")
    def post_plan(sid: str, body: PlanBody):
        with store.lock(sid):
            session = store.get(sid)
            ids = session.run_initial_plan(body.locations_m, gait=body.gait)
            store.flush(sid)
            return {"measurement_ids": ids, "state": session.canonical_state()}

    @app.get("/sessions/{sid}/suggestions")
    def get_suggestions(sid: str, k: int = Query(default=3, ge=1)):
        with store.lock(sid):
            session = store.get(sid)
            rnd = session.current_round()
            if rnd is None or len(rnd.suggestions) != k:
                if session.status != "open":
                    raise StateError("session concluded; no further rounds")
                rnd = session.issue_suggestions(k=k)
                store.flush(sid)
            return {"round": rnd.number, "weight": rnd.weight,
                    "suggestions": [s.to_dict() for s in rnd.suggestions]}

    @app.post("/sessions/{sid}/decision")
    def post_decision(sid: str, body: DecisionBody):
        if body.outcome not in _OUTCOMES:
            raise SpecificationError(f"unknown outcome '{body.outcome}'")
        if body.feedback not in _FEEDBACK:
            raise SpecificationError(f"unknown feedback '{body.feedback}'")
        with store.lock(sid):
            session = store.get(sid)
            rnd = session.current_round()
            if rnd is None or body.round != rnd.number:
                raise ConflictError(
                    f"decision references round {body.round}, which is not "
                    f"the open round")
            match = [s for s in rnd.suggestions if abs(s.location - body.location) < 1e-9]
            if not match:
                raise SpecificationError(
                    f"location {body.location} is not part of round {rnd.number}")
            decision = DecisionRecord(
                round_number=body.round,
                suggestion=match[0],
                outcome=_OUTCOMES[body.outcome],
                alternative=body.alternative,
                feedback=_FEEDBACK[body.feedback],
                stated_objective=body.stated_objective)
            ids = session.decide(decision, gait=body.gait)
            store.flush(sid)
            return {"measurement_ids": ids, "state": session.canonical_state()}

    @app.get("/sessions/{sid}/curves/{mid}")
    def get_curve(sid: str, mid: str):
        with store.lock(sid):
            session = store.get(sid)
            if mid not in session.curves:
                raise NotFoundError(f"unknown measurement '{mid}'")
            curve = session.curves[mid]
            summary = session.summaries[mid]
            regime, confidence, ruptures = None, None, []
            if curve.valid:
                try:
                    label, confidence = classify_regime(curve)
                    regime = label.value
                    fmax = float(curve.forces.max())
                    ruptures = detect_ruptures(
                        curve, min_drop=max(0.3, 0.045 * fmax))
                except AnalysisError:
                    pass  # too short to classify; plot still renders
            return {
                "measurement_id": mid,
                "provenance": curve.provenance.value,
                "valid": curve.valid,
                "depth_m": [float(v) for v in curve.depths],
                "force_N": [float(v) for v in curve.forces],
                "summary": summary.to_dict(),
                "regime": regime,
                "confidence": confidence,
                "ruptures": [{"depth_m": e.depth, "drop_N": e.drop_magnitude}
                             for e in ruptures],
            }

    @app.get("/sessions/{sid}/belief")
    def get_belief(sid: str):
        with store.lock(sid):
            session = store.get(sid)
            b = session.belief()
            hyp = session.hypothesis
            overlay = None
            if hyp is not None:
                overlay = [float(v) for v in hyp.template(b.candidates)]
            return {
                "candidates": [float(v) for v in b.candidates],
                "mean": [float(v) for v in b.mean],
                "uncertainty": [float(v) for v in b.uncertainty],
                "hypothesis_template": overlay,
            }

    @app.post("/sessions/{sid}/conclude")
    def post_conclude(sid: str):
        with store.lock(sid):
            session = store.get(sid)
            session.conclude()
            store.flush(sid)
            return {"status": session.status}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")

    return app
