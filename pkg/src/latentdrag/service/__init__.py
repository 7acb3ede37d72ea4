"""HTTP session API exposing the drag engine to interactive clients."""

from .app import create_app
from .store import SessionCapacity, SessionRecord, SessionStore

__all__ = ["SessionCapacity", "SessionRecord", "SessionStore", "create_app"]
