"""One-directory-per-session persistence.

Layout: <root>/<session_id>/events.jsonl (one event per line) plus an
exports/ subdirectory. Writers append committed events; readers replay the
log. A per-session lock serializes writers while leaving cross-session
operations fully parallel.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from ..errors import NotFoundError
from .session import Event, Session, parse_log, replay

EVENTS_FILE = "events.jsonl"


class SessionStore:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._live: dict[str, Session] = {}
        self._written: dict[str, int] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def lock(self, sid: str) -> threading.Lock:
        with self._registry_lock:
            if sid not in self._locks:
                self._locks[sid] = threading.Lock()
            return self._locks[sid]

    def session_dir(self, sid: str) -> Path:
        return self.root / sid

    def exports_dir(self, sid: str) -> Path:
        return self.session_dir(sid) / "exports"

    def list_sessions(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if (p / EVENTS_FILE).exists())

    def add(self, session: Session) -> Session:
        d = self.session_dir(session.sid)
        d.mkdir(parents=True, exist_ok=True)
        self._live[session.sid] = session
        self._written[session.sid] = 0
        self.flush(session.sid)
        return session

    def flush(self, sid: str):
        """Append any not-yet-persisted events to the log file."""
        session = self._live[sid]
        path = self.session_dir(sid) / EVENTS_FILE
        start = self._written.get(sid, 0)
        if start >= len(session.events):
            return
        with path.open("a") as fh:
            for ev in session.events[start:]:
                fh.write(ev.to_json() + "\n")
        self._written[sid] = len(session.events)

    def get(self, sid: str) -> Session:
        if sid in self._live:
            return self._live[sid]
        path = self.session_dir(sid) / EVENTS_FILE
        if not path.exists():
            raise NotFoundError(f"unknown session '{sid}'")
        session = replay(parse_log(path.read_text()))
        self._live[sid] = session
        self._written[sid] = len(session.events)
        return session

    def events(self, sid: str) -> list[Event]:
        path = self.session_dir(sid) / EVENTS_FILE
        if not path.exists():
            raise NotFoundError(f"unknown session '{sid}'")
        return parse_log(path.read_text())
