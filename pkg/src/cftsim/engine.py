"""Event-queue core: simulated clock, ordered dispatch and named random streams."""

from __future__ import annotations

import hashlib
import heapq
import math
import random
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

__all__ = [
    "Engine",
    "Event",
    "RngStreams",
    "SchedulingError",
    "STREAM_NAMES",
    "draw_uniform",
    "draw_exponential",
]

STREAM_NAMES = ("arrivals", "participants", "functions", "execution", "delays", "links")


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock."""


@dataclass
class Event:
    fire_at: float
    seq: int
    target: str
    payload: tuple = ()
    drain: bool = True


class Engine:
    """Single-threaded discrete-event scheduler.

    Events are ordered by ``(fire_at, seq)`` where ``seq`` is a monotone
    insertion counter, so equal-time events fire in the order they were
    scheduled.  Handlers are registered per target role and called with the
    event; they may schedule further events at or after the current clock.
    """

    def __init__(self, trace: Optional[Callable[[Event], None]] = None):
        self.now = 0.0
        self._queue: list[tuple[float, int, Event]] = []
        self._seq = 0
        self._handlers: dict[str, Callable[[Event], None]] = {}
        self._last: tuple[float, int] = (-math.inf, -1)
        self._trace = trace
        self.dispatched = 0

    def register(self, target: str, handler: Callable[[Event], None]) -> None:
        self._handlers[target] = handler

    def schedule(self, fire_at: float, target: str, *payload: Any, drain: bool = True) -> Event:
        if fire_at < self.now:
            raise SchedulingError(f"event for {target!r} at t={fire_at!r} is before clock {self.now!r}")
        ev = Event(fire_at, self._seq, target, payload, drain)
        heapq.heappush(self._queue, (fire_at, self._seq, ev))
        self._seq += 1
        return ev

    def __len__(self) -> int:
        return len(self._queue)

    def run(self, until: float = math.inf) -> None:
        """Dispatch events up to ``until``.

        Events past ``until`` are still dispatched when they were scheduled
        with ``drain=True`` (the default); ``drain=False`` events past the
        horizon are dropped.  Returns when the queue is empty.
        """
        queue = self._queue
        handlers = self._handlers
        while queue:
            fire_at, seq, ev = heapq.heappop(queue)
            if fire_at > until and not ev.drain:
                continue
            key = (fire_at, seq)
            if key < self._last:
                raise SchedulingError(f"dispatch order violated: {key} after {self._last}")
            self._last = key
            self.now = fire_at
            if self._trace is not None:
                self._trace(ev)
            handlers[ev.target](ev)
            self.dispatched += 1


def _derive_seed(master: int, *labels: Any) -> int:
    text = ":".join([str(master), *map(str, labels)])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


class RngStreams:
    """Named, mutually independent random streams derived from one master seed.

    ``stream(name)`` returns the same generator object on every call.
    ``substream(name, *key)`` builds a fresh generator keyed on extra labels,
    used for per-link and per-transaction draws so that the order in which
    entities consume randomness cannot leak between them.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: dict[str, random.Random] = {}

    def stream(self, name: str) -> random.Random:
        rng = self._streams.get(name)
        if rng is None:
            rng = random.Random(_derive_seed(self.seed, name))
            self._streams[name] = rng
        return rng

    def substream(self, name: str, *key: Any) -> random.Random:
        return random.Random(_derive_seed(self.seed, name, *key))

    def np_substream(self, name: str, *key: Any) -> np.random.Generator:
        """Keyed numpy generator, for bulk draws."""
        return np.random.Generator(np.random.PCG64(_derive_seed(self.seed, name, *key)))


def draw_uniform(rng: random.Random, lo: float, hi: float) -> float:
    if lo > hi:
        raise ValueError(f"uniform range lo={lo} > hi={hi}")
    if lo == hi:
        return lo
    # clamp guards the rare lo + (hi-lo)*u rounding past hi
    return min(hi, lo + (hi - lo) * rng.random())


def draw_exponential(rng: random.Random, mean: float) -> float:
    if not mean > 0:
        raise ValueError(f"exponential mean must be positive, got {mean}")
    return rng.expovariate(1.0 / mean)
