"""Command-line interface for campaign sessions and batch curve analysis."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import RegosenseError
from ..intrusion import (
    classify_regime,
    detect_ruptures,
    iter_curve_files,
    read_curve,
    strength_summary,
)
from ..sampler import DecisionRecord, Feedback, Hypothesis, Outcome
from .export import EXPORT_KINDS, export
from .session import create_session, parse_log, replay
from .store import SessionStore


def _store(args) -> SessionStore:
    return SessionStore(args.store)


def cmd_new(args) -> int:
    hyp = None
    if args.hypothesis:
        hyp = Hypothesis.from_dict({"shape": args.hypothesis,
                                    **({"peak": args.peak} if args.peak is not None else {})})
    session = create_session(terrain=args.terrain, hypothesis=hyp,
                             seed=args.seed,
                             candidate_count=args.candidates,
                             default_gait=args.gait,
                             material_noise=args.material_noise)
    _store(args).add(session)
    print(session.sid)
    return 0


def cmd_plan(args) -> int:
    store = _store(args)
    session = store.get(args.session)
    locations = [float(x) for x in args.locations.split(",") if x.strip()]
    ids = session.run_initial_plan(locations, gait=args.gait)
    store.flush(args.session)
    for mid in ids:
        m = next(m for m in session.sampler.measurements if m.curve_id == mid)
        status = "ok" if m.valid else "aborted"
        print(f"{mid}\t{m.location * session.length:.3f} m\t"
              f"k={m.strength:.2f} N/m\t{status}")
    return 0


def cmd_suggest(args) -> int:
    store = _store(args)
    session = store.get(args.session)
    rnd = session.current_round()
    if rnd is None or len(rnd.suggestions) != args.k:
        rnd = session.issue_suggestions(k=args.k)
        store.flush(args.session)
    print(f"round {rnd.number} (weight {rnd.weight:.3f})")
    for i, s in enumerate(rnd.suggestions, 1):
        print(f"  {i}. x={s.location:.3f}  combined={s.combined:.3f}  "
              f"explore={s.explore_reward:.3f}  verify={s.verify_reward:.3f}")
        print(f"     {s.explanation}")
    return 0


def cmd_decide(args) -> int:
    store = _store(args)
    session = store.get(args.session)
    rnd = session.current_round()
    if rnd is None:
        print("no open suggestion round; run `suggest` first", file=sys.stderr)
        return 1
    suggestion = rnd.suggestions[0]
    if args.location is not None:
        match = [s for s in rnd.suggestions
                 if abs(s.location - args.location) < 1e-9]
        if not match:
            print(f"location {args.location} not in round {rnd.number}",
                  file=sys.stderr)
            return 1
        suggestion = match[0]
    outcome = {"accept": Outcome.ACCEPTED,
               "reject-alt": Outcome.REJECTED_WITH_ALTERNATIVE,
               "reject": Outcome.REJECTED_NO_ALTERNATIVE}[args.choice]
    feedback = Feedback.NONE
    stated = None
    if args.feedback:
        key, _, value = args.feedback.partition("=")
        if key == "objective":
            feedback = Feedback.OBJECTIVE_MISMATCH
            stated = {"explore": "explore", "verify": "verify"}.get(value)
            if stated is None:
                print("feedback objective must be explore or verify",
                      file=sys.stderr)
                return 1
        elif key == "location":
            feedback = Feedback.LOCATION_MISMATCH
        else:
            print(f"unknown feedback '{args.feedback}'", file=sys.stderr)
            return 1
    decision = DecisionRecord(round_number=rnd.number, suggestion=suggestion,
                              outcome=outcome, alternative=args.alternative,
                              feedback=feedback, stated_objective=stated)
    ids = session.decide(decision, gait=args.gait)
    store.flush(args.session)
    print(f"decision recorded for round {rnd.number}")
    for mid in ids:
        m = next(m for m in session.sampler.measurements if m.curve_id == mid)
        print(f"measured {mid} at x={m.location:.3f} "
              f"(k={m.strength:.2f} N/m)")
    return 0


def cmd_status(args) -> int:
    session = _store(args).get(args.session)
    state = session.canonical_state()
    n_valid = sum(1 for m in session.sampler.measurements if m.valid)
    print(f"session {state['id']}  status={state['status']}")
    print(f"transect {state['length_m']} m, {state['candidate_count']} candidates")
    print(f"measurements: {n_valid} valid / {len(session.sampler.measurements)}")
    print(f"rounds: {len(state['rounds'])}  decisions: {len(state['decisions'])}")
    print(f"current exploration weight: {state['weight']:.3f}")
    return 0


def cmd_export(args) -> int:
    store = _store(args)
    session = store.get(args.session)
    out = Path(args.out) if args.out else store.exports_dir(args.session)
    for p in export(session, args.what, out):
        print(p)
    return 0


def cmd_replay(args) -> int:
    store = _store(args)
    live = store.get(args.session)
    rebuilt = replay(store.events(args.session))
    if live.canonical_json() == rebuilt.canonical_json():
        print(f"replay ok: {len(rebuilt.events)} events, state identical")
        return 0
    print("replay mismatch: live and replayed state differ", file=sys.stderr)
    return 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ui = Path(args.ui) if args.ui else None
    app = create_app(store_root=args.store, ui_dir=ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_analyze(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        print(f"not a directory: {directory}", file=sys.stderr)
        return 1
    header = ["file", "regime", "confidence", "k_N_per_m", "depth_10N_m",
              "depth_20N_m", "depth_30N_m", "terminal_N", "ruptures"]
    print("\t".join(header))
    for path in iter_curve_files(directory):
        try:
            curve = read_curve(path)
            label, conf = classify_regime(curve)
            s = strength_summary(curve)
            drops = detect_ruptures(curve, min_drop=args.min_drop)
            row = [path.name, label.value, f"{conf:.2f}",
                   f"{s.fitted_k:.2f}" if s.fitted_k is not None else "-",
                   _d(s.depth_at_10N), _d(s.depth_at_20N), _d(s.depth_at_30N),
                   f"{s.terminal_force:.2f}", str(len(drops))]
        except RegosenseError as exc:
            row = [path.name, "error", "-", "-", "-", "-", "-", "-", str(exc)]
        print("\t".join(row))
    return 0


def _d(v) -> str:
    return f"{v:.4f}" if v is not None else "not_reached"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regosense",
        description="Regolith-sensing campaign simulator")
    parser.add_argument("--store", default="sessions",
                        help="session storage directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("new", help="create a session")
    p.add_argument("--terrain", required=True,
                   help="preset name or field config path")
    p.add_argument("--hypothesis", default=None,
                   choices=["monotone_increasing", "monotone_decreasing",
                            "unimodal"],
                   help="strength-trend hypothesis")
    p.add_argument("--peak", type=float, default=None,
                   help="peak location for a unimodal hypothesis")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--candidates", type=int, default=101)
    p.add_argument("--gait", default="crawl")
    p.add_argument("--material-noise", type=float, default=0.02)
    p.set_defaults(func=cmd_new)

    p = sub.add_parser("plan", help="run the initial measurement plan")
    p.add_argument("--session", required=True)
    p.add_argument("--locations", required=True,
                   help="comma-separated locations in meters")
    p.add_argument("--gait", default="crawl")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("suggest", help="get the current suggestion round")
    p.add_argument("--session", required=True)
    p.add_argument("-k", type=int, default=3)
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("decide", help="accept or reject the open round")
    p.add_argument("--session", required=True)
    p.add_argument("choice", choices=["accept", "reject-alt", "reject"])
    p.add_argument("alternative", nargs="?", type=float, default=None,
                   help="alternative location (normalized) for reject-alt")
    p.add_argument("--location", type=float, default=None,
                   help="which suggestion the decision refers to "
                        "(default: top-ranked)")
    p.add_argument("--feedback", default=None,
                   help="objective=<explore|verify> or location")
    p.add_argument("--gait", default=None)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("status", help="print session summary")
    p.add_argument("--session", required=True)
    p.set_defaults(func=cmd_status)

    p = sub.add_parser("export", help="export session data")
    p.add_argument("--session", required=True)
    p.add_argument("--what", required=True, choices=list(EXPORT_KINDS))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("replay", help="verify log replay matches live state")
    p.add_argument("--session", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None, help="static UI directory to mount")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("analyze", help="batch-analyze a directory of curves")
    p.add_argument("directory")
    p.add_argument("--min-drop", type=float, default=0.5,
                   help="rupture detection threshold in newtons")
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RegosenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
