#!/usr/bin/env python3
"""End-to-end shared-autonomy demo without the browser UI.

Creates a session on a transect preset, runs a scientist-style initial
plan, then cycles suggestion rounds. The scripted "scientist" accepts the
top suggestion unless its explanation is verification-led too early, in
which case it rejects with objective feedback.
"""

import argparse

from regosense.campaign import create_session, replay
from regosense.sampler import (
    DecisionRecord,
    Feedback,
    Hypothesis,
    HypothesisShape,
    Outcome,
    hypothesis_confidence,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--terrain", default="white_sands_transect")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--rounds", type=int, default=6)
    ap.add_argument("--plan", type=int, default=6, help="initial locations")
    args = ap.parse_args()

    hyp = Hypothesis(HypothesisShape.MONOTONE_INCREASING,
                     description="strength increases across the transect")
    session = create_session(args.terrain, hyp, seed=args.seed)
    length = session.length
    plan = [i * length / (args.plan - 1) for i in range(args.plan)]
    session.run_initial_plan(plan, gait="crawl")
    print(f"session {session.sid}: planned {len(plan)} locations on "
          f"{length:.0f} m transect")

    for _ in range(args.rounds):
        rnd = session.issue_suggestions(k=3)
        top = rnd.suggestions[0]
        print(f"\nround {rnd.number} (weight {rnd.weight:.2f})")
        for s in rnd.suggestions:
            print(f"  x={s.location:.2f} combined={s.combined:.2f}  "
                  f"{s.explanation}")
        if rnd.weight < 0.3 and rnd.number <= 2:
            decision = DecisionRecord(rnd.number, top,
                                      Outcome.REJECTED_NO_ALTERNATIVE,
                                      feedback=Feedback.OBJECTIVE_MISMATCH,
                                      stated_objective="explore")
            print("  scientist: too early for verification; explore instead")
        else:
            decision = DecisionRecord(rnd.number, top, Outcome.ACCEPTED)
            print(f"  scientist: accepted x={top.location:.2f}")
        for mid in session.decide(decision):
            m = next(m for m in session.sampler.measurements
                     if m.curve_id == mid)
            print(f"  measured {mid}: k = {m.strength:.1f} N/m "
                  f"({m.cost_s:.0f} s)")

    belief = session.belief()
    conf = hypothesis_confidence(belief, hyp, session.sampler.measurements)
    print(f"\nhypothesis confidence: {conf:.2f}")
    rebuilt = replay(session.events)
    assert rebuilt.canonical_json() == session.canonical_json()
    print(f"event log: {len(session.events)} events, replay verified")


if __name__ == "__main__":
    main()
