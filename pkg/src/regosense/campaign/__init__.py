from .export import export
from .session import Event, Session, create_session, parse_log, replay
from .store import SessionStore

__all__ = ["Event", "Session", "SessionStore", "create_session", "export",
           "parse_log", "replay"]
