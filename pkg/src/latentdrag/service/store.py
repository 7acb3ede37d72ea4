"""In-memory session store with a cap and LRU eviction of finished runs."""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np

from ..engine import DragConfig, DragState
from ..generator import Generator, LayeredLatent

TERMINAL_STATES = ("converged", "capped", "failed")


@dataclass
class SessionRecord:
    session_id: str
    generator: Generator
    latent: LayeredLatent
    seed: int
    state: str = "configuring"
    config: DragConfig | None = None
    drag: DragState | None = None
    suggested_pair: tuple | None = None
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)
    events: list[dict] = field(default_factory=list)
    stop_requested: bool = False
    runner: threading.Thread | None = None
    lock: threading.RLock = field(default_factory=threading.RLock)
    cond: threading.Condition = None  # type: ignore[assignment]

    def __post_init__(self):
        self.cond = threading.Condition(self.lock)

    @property
    def terminal(self) -> bool:
        return self.state in TERMINAL_STATES

    def touch(self) -> None:
        self.updated_at = time.time()

    def emit(self, event_type: str, data: dict) -> None:
        """Append a stream event; caller must hold the session lock."""
        self.events.append(
            {"id": len(self.events) + 1, "event": event_type, "data": data}
        )
        self.touch()
        self.cond.notify_all()


class SessionCapacity(Exception):
    """No slot free and no terminal session to evict."""


class SessionStore:
    def __init__(self, cap: int = 32):
        self._cap = cap
        self._sessions: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()

    def create(self, generator: Generator, latent: LayeredLatent, seed: int) -> SessionRecord:
        with self._lock:
            if len(self._sessions) >= self._cap:
                self._evict_locked()
            record = SessionRecord(
                session_id=uuid.uuid4().hex,
                generator=generator,
                latent=latent,
                seed=seed,
            )
            self._sessions[record.session_id] = record
            return record

    def _evict_locked(self) -> None:
        terminal = [s for s in self._sessions.values() if s.terminal]
        if not terminal:
            raise SessionCapacity(f"session cap {self._cap} reached")
        victim = min(terminal, key=lambda s: s.updated_at)
        del self._sessions[victim.session_id]

    def get(self, session_id: str) -> SessionRecord | None:
        with self._lock:
            return self._sessions.get(session_id)

    def delete(self, session_id: str) -> bool:
        with self._lock:
            return self._sessions.pop(session_id, None) is not None

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)


def pairs_as_arrays(pairs) -> list[tuple[np.ndarray, np.ndarray]]:
    return [
        (np.asarray(h, dtype=np.float64), np.asarray(t, dtype=np.float64))
        for h, t in pairs
    ]
