"""Availability of each mobile host's standard (MSS) and ad-hoc relay channels."""

from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .engine import RngStreams

__all__ = [
    "Channel",
    "LinkProcess",
    "ScriptedLink",
    "GroupConfig",
    "MobileHostLinks",
    "Connectivity",
    "build_link_process",
    "build_connectivity",
]


class Channel(enum.Enum):
    STANDARD = "standard"
    ADHOC = "adhoc"
    NONE = "none"


class _ToggleLink:
    """Up/down state given an initial state and a sorted list of flip instants.

    Intervals are half-open: the state changes exactly at each toggle time.
    """

    initial_up: bool
    _toggles: list[float]

    def _extend_past(self, t: float) -> None:
        pass

    def is_up(self, t: float) -> bool:
        self._extend_past(t)
        flips = bisect_right(self._toggles, t)
        return self.initial_up ^ bool(flips & 1)

    def next_up(self, t: float) -> Optional[float]:
        """Earliest instant >= t at which the link is up, or None if never."""
        self._extend_past(t)
        idx = bisect_right(self._toggles, t)
        if self.initial_up ^ bool(idx & 1):
            return t
        if idx < len(self._toggles):
            return self._toggles[idx]
        return None


class LinkProcess(_ToggleLink):
    """Alternating exponential on/off renewal process, generated lazily.

    Off periods are Exp(mean_off) and on periods Exp(mean_on) with
    ``mean_on = mean_off * a / (1 - a)`` so the long-run on-fraction is the
    availability ``a``.  The start state is drawn from the stationary law, which
    is exact for memoryless phases.  Durations are unit exponentials scaled by
    the phase mean, so two processes built from the same generator with
    different availabilities share their underlying randomness.
    """

    CHUNK = 64

    def __init__(self, availability: float, mean_off: float, rng: np.random.Generator):
        if not 0.0 <= availability <= 1.0:
            raise ValueError(f"availability must be in [0, 1], got {availability}")
        if not mean_off > 0:
            raise ValueError(f"mean_off must be positive, got {mean_off}")
        self.availability = availability
        self.mean_off = mean_off
        self._rng = rng
        self._toggles = []
        u = rng.random()
        if availability >= 1.0:
            self.initial_up = True
            self._fixed = True
        elif availability <= 0.0:
            self.initial_up = False
            self._fixed = True
        else:
            self._fixed = False
            self.mean_on = mean_off * availability / (1.0 - availability)
            self.initial_up = bool(u < availability)
            self._horizon = 0.0
            first, second = (self.mean_on, mean_off) if self.initial_up else (mean_off, self.mean_on)
            self._scale = np.tile([first, second], self.CHUNK // 2)

    def _extend_past(self, t: float) -> None:
        if self._fixed:
            return
        while self._horizon <= t:
            # even chunk length keeps the on/off alternation aligned with _scale
            d = np.maximum(self._rng.standard_exponential(self.CHUNK), 1e-12) * self._scale
            times = self._horizon + np.cumsum(d)
            self._toggles.extend(times.tolist())
            self._horizon = self._toggles[-1]

    def on_fraction(self, horizon: float) -> float:
        """Exact fraction of [0, horizon) spent up, read off the schedule."""
        if self._fixed:
            return 1.0 if self.initial_up else 0.0
        self._extend_past(horizon)
        up_time = 0.0
        state = self.initial_up
        prev = 0.0
        for toggle in self._toggles:
            end = min(toggle, horizon)
            if state:
                up_time += end - prev
            if toggle >= horizon:
                break
            prev = toggle
            state = not state
        return up_time / horizon


class ScriptedLink(_ToggleLink):
    """Deterministic link: fixed start state and explicit toggle instants."""

    def __init__(self, initial_up: bool, toggles: Sequence[float] = ()):
        toggles = list(toggles)
        if any(b <= a for a, b in zip(toggles, toggles[1:])) or any(x < 0 for x in toggles):
            raise ValueError("toggle times must be non-negative and strictly increasing")
        self.initial_up = bool(initial_up)
        self._toggles = toggles

    @classmethod
    def always(cls, up: bool) -> "ScriptedLink":
        return cls(up, ())


def build_link_process(availability: float, mean_off: float, rng: np.random.Generator) -> LinkProcess:
    return LinkProcess(availability, mean_off, rng)


@dataclass(frozen=True)
class GroupConfig:
    """Ad-hoc support levels per group; hosts are dealt round-robin."""

    levels: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= len(self.levels) <= 3:
            raise ValueError(f"between 1 and 3 groups required, got {len(self.levels)}")
        for lv in self.levels:
            if not 0.0 <= lv <= 1.0:
                raise ValueError(f"ad-hoc support level {lv} outside [0, 1]")

    def group_of(self, mh: int) -> int:
        return mh % len(self.levels)

    def level_of(self, mh: int) -> float:
        return self.levels[self.group_of(mh)]


@dataclass
class MobileHostLinks:
    mh: int
    standard: _ToggleLink
    adhoc: _ToggleLink


class Connectivity:
    """Channel lookup for every registered mobile host."""

    def __init__(self, hosts: dict[int, MobileHostLinks]):
        self.hosts = hosts

    def _links(self, mh: int) -> MobileHostLinks:
        try:
            return self.hosts[mh]
        except KeyError:
            raise KeyError(f"unknown mobile host {mh!r}") from None

    def is_standard_up(self, mh: int, t: float) -> bool:
        return self._links(mh).standard.is_up(t)

    def is_adhoc_up(self, mh: int, t: float) -> bool:
        return self._links(mh).adhoc.is_up(t)

    def effective_channel(self, mh: int, t: float, adhoc_enabled: bool) -> Channel:
        links = self._links(mh)
        if links.standard.is_up(t):
            return Channel.STANDARD
        if adhoc_enabled and links.adhoc.is_up(t):
            return Channel.ADHOC
        return Channel.NONE

    def next_channel_available(self, mh: int, t: float, adhoc_enabled: bool) -> Optional[float]:
        links = self._links(mh)
        best = links.standard.next_up(t)
        if best == t:
            return t
        if adhoc_enabled:
            alt = links.adhoc.next_up(t)
            if alt is not None and (best is None or alt < best):
                best = alt
        return best


def build_connectivity(
    n_mh: int,
    disconnection_rate: float,
    groups: GroupConfig,
    streams: RngStreams,
    mean_off: float = 6.0,
    adhoc_mean_off: float = 4.0,
) -> Connectivity:
    """Independent standard and ad-hoc processes for hosts ``0 .. n_mh-1``.

    Every link draws from its own substream of ``links`` so a host's standard
    trace is identical whatever ad-hoc levels or protocol variant are in use.
    """
    hosts = {}
    for mh in range(n_mh):
        std = LinkProcess(1.0 - disconnection_rate, mean_off, streams.np_substream("links", mh, "standard"))
        adh = LinkProcess(groups.level_of(mh), adhoc_mean_off, streams.np_substream("links", mh, "adhoc"))
        hosts[mh] = MobileHostLinks(mh, std, adh)
    return Connectivity(hosts)

