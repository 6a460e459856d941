"""Brute-force cross-check of the simulator on tiny scripted instances.

Each case has one mobile participant (also the home MH), one fixed
participant, fixed latencies and a scripted connectivity trace.  The
enumerator below re-states the commit rules as a small transition system and
explores every ordering of events that share a timestamp, collecting the set
of reachable outcomes.  It shares no code with :mod:`cftsim.protocol`; the
simulator passes a case when that set is a single outcome equal to its own.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Optional

__all__ = ["OracleCase", "CASES", "REQUIRED_CASES", "enumerate_outcomes", "simulate_case", "check_case"]

INF = math.inf


@dataclass(frozen=True)
class OracleCase:
    name: str
    kind: str  # "READ" | "WRITE"
    daalg: bool
    std_up: bool
    std_toggles: tuple[float, ...]
    adhoc_up: bool = False
    adhoc_toggles: tuple[float, ...] = ()
    adhoc_enabled: bool = False
    et: float = 10.0
    ct: float = 2.4
    wired: float = 0.02
    wireless: float = 0.5
    adhoc: float = 1.0
    exec_mh: float = 0.5
    exec_fh: float = 0.2
    init_window: float = 5.0
    fh_no: bool = False
    expected: Optional[tuple[str, bool]] = None

    @property
    def segments(self) -> int:
        return max(len(self.std_toggles), len(self.adhoc_toggles)) + 1


def _required() -> dict[str, OracleCase]:
    # Timeline with the defaults: Prepare reaches the agent at 0.56, so the
    # first Ct deadline is 2.96.  "before" reconnects at 2.0, "after" at 4.0.
    out = {}
    for kind in ("READ", "WRITE"):
        for daalg in (True, False):
            for when, r in (("before", 2.0), ("after", 4.0)):
                if when == "before" or not daalg:
                    exp = ("Commit", False)
                elif kind == "WRITE":
                    exp = ("Commit", True)
                else:
                    exp = ("Abort", True)
                name = f"{kind.lower()}-{'daalg' if daalg else 'nodaalg'}-{when}"
                out[name] = OracleCase(name, kind, daalg, True, (0.1, r), expected=exp)
    return out


REQUIRED_CASES = _required()

EXTRA_CASES = {
    c.name: c
    for c in [
        # vote ready at 3.02 with no channel, so the return window ends at 5.42
        OracleCase("write-daalg-flap-back", "WRITE", True, True, (0.1, 2.0, 2.8, 4.5), expected=("Commit", False)),
        OracleCase("read-daalg-flap-late", "READ", True, True, (0.1, 2.0, 2.8, 6.0), expected=("Abort", True)),
        OracleCase("write-daalg-flap-late", "WRITE", True, True, (0.1, 2.0, 2.8, 6.0), expected=("Commit", True)),
        # link back at 5.0, inside the window; the vote itself lands after 5.42
        OracleCase("read-daalg-vote-in-flight", "READ", True, True, (0.1, 2.0, 2.8, 5.0), expected=("Commit", False)),
        OracleCase("read-nodaalg-et-expiry", "READ", False, True, (0.1, 12.0), expected=("Abort", False)),
        OracleCase(
            "read-adhoc-relay",
            "READ", True, True, (0.1,), adhoc_up=False, adhoc_toggles=(1.5,), adhoc_enabled=True,
            expected=("Commit", False),
        ),
        OracleCase(
            "write-adhoc-relay-late",
            "WRITE", True, True, (0.1,), adhoc_up=False, adhoc_toggles=(3.5,), adhoc_enabled=True,
            expected=("Commit", True),
        ),
        OracleCase(
            "read-adhoc-relay-long-ct",
            "READ", True, True, (0.1,), adhoc_up=False, adhoc_toggles=(3.5,), adhoc_enabled=True, ct=5.0,
            expected=("Commit", False),
        ),
        OracleCase("write-fh-votes-no", "WRITE", True, True, (), fh_no=True, expected=("Abort", False)),
        OracleCase("read-home-unreachable", "READ", True, False, (), expected=("Abort", False)),
        OracleCase("read-home-late-start", "READ", False, False, (3.0,), expected=("Commit", False)),
        OracleCase("write-ct-zero", "WRITE", True, True, (), ct=0.0, expected=("Commit", True)),
        OracleCase("read-ct-zero", "READ", True, True, (), ct=0.0, expected=("Abort", True)),
    ]
}

CASES = {**REQUIRED_CASES, **EXTRA_CASES}


# enumerator


def _up(initial: bool, toggles: tuple, t: float) -> bool:
    flips = sum(1 for x in toggles if x <= t)
    return initial if flips % 2 == 0 else not initial


def _next_up(initial: bool, toggles: tuple, t: float) -> float:
    if _up(initial, toggles, t):
        return t
    for x in toggles:
        if x > t and _up(initial, toggles, x):
            return x
    return INF


class _Net:
    def __init__(self, c: OracleCase):
        self.c = c

    def path(self, t: float) -> Optional[float]:
        """Latency MH <-> agent if some channel is up at t."""
        c = self.c
        if _up(c.std_up, c.std_toggles, t):
            return c.wireless + c.wired
        if c.adhoc_enabled and _up(c.adhoc_up, c.adhoc_toggles, t):
            return c.adhoc + c.wireless + c.wired
        return None

    def next_up(self, t: float) -> float:
        c = self.c
        best = _next_up(c.std_up, c.std_toggles, t)
        if c.adhoc_enabled:
            best = min(best, _next_up(c.adhoc_up, c.adhoc_toggles, t))
        return best


@dataclass
class _World:
    pending: list = field(default_factory=list)  # (time, tag, args)
    co: str = "idle"  # idle | wait | decided
    votes: dict = field(default_factory=lambda: {"mh": None, "fh": None})
    decision: Optional[str] = None
    et_deadline: float = INF
    ag: str = "idle"  # idle | to_mh | at_mh | voted | daalg
    ag_deadline: float = INF
    lost_at: Optional[float] = None
    ag_knows: Optional[str] = None
    fifo: bool = False
    daalg: bool = False
    mh_vote_sent: bool = False
    mh_lost: bool = False
    mh_flushed: bool = False
    fh_decision: Optional[str] = None
    violations: list = field(default_factory=list)


def _step(w: _World, c: OracleCase, net: _Net, t: float, tag: str, args: tuple) -> None:
    push = w.pending.append
    if tag == "arrive":
        lat = net.path(t)
        if lat is not None:
            push((t + lat, "agent_init", ()))
            return
        nxt = net.next_up(t)
        if nxt <= c.init_window:
            push((nxt, "arrive", ()))
        else:
            w.decision = "Abort"
            w.co = "decided"
    elif tag == "agent_init":
        push((t + c.wired, "co_init", ()))
    elif tag == "co_init":
        w.co = "wait"
        if c.et < INF:
            w.et_deadline = t + c.et
            push((w.et_deadline, "et", ()))
        push((t + c.wired, "fh_prepare", ()))
        push((t + c.wired, "ag_prepare", ()))
    elif tag == "fh_prepare":
        push((t + c.exec_fh + c.wired, "co_vote", ("fh", "No" if c.fh_no else "Yes")))
    elif tag == "ag_prepare":
        w.ag = "to_mh"
        if c.daalg:
            w.ag_deadline = t + c.ct
            push((w.ag_deadline, "ct", (w.ag_deadline,)))
        _try_deliver(w, c, net, t)
    elif tag == "ag_retry":
        _try_deliver(w, c, net, t)
    elif tag == "ct":
        if args[0] != w.ag_deadline or w.ag_knows is not None or w.ag not in ("to_mh", "at_mh"):
            return
        if w.ag == "at_mh" and net.next_up(w.lost_at) < args[0]:
            return
        w.ag = "daalg"
        w.daalg = True
        if c.kind == "WRITE":
            w.fifo = True
            push((t + c.wired, "co_vote", ("mh", "Yes")))
        else:
            push((t + c.wired, "co_vote", ("mh", "No")))
    elif tag == "mh_frag":
        push((t + c.exec_mh, "mh_ready", ()))
    elif tag == "mh_ready":
        if w.mh_vote_sent:
            return
        lat = net.path(t)
        if lat is not None:
            w.mh_vote_sent = True
            push((t + lat, "ag_vote", ()))
        else:
            if not w.mh_lost:
                w.mh_lost = True
                push((t, "ag_lost", ()))
            if w.co == "wait" and net.next_up(t) < INF:
                push((net.next_up(t), "mh_ready", ()))
    elif tag == "ag_lost":
        if c.daalg and w.ag == "at_mh" and w.ag_knows is None and w.lost_at is None:
            w.lost_at = t
            w.ag_deadline = t + c.ct
            push((w.ag_deadline, "ct", (w.ag_deadline,)))
    elif tag == "ag_vote":
        if w.ag == "at_mh" and w.ag_knows is None:
            w.ag = "voted"
            push((t + c.wired, "co_vote", ("mh", "Yes")))
    elif tag == "co_vote":
        who, v = args
        if w.co != "wait" or w.votes[who] is not None:
            return
        w.votes[who] = v
        if v == "No":
            _decide(w, c, t, "Abort")
        elif all(x is not None for x in w.votes.values()):
            if t >= w.et_deadline:
                w.violations.append("commit after Et")
            _decide(w, c, t, "Commit")
    elif tag == "et":
        if w.co == "wait":
            _decide(w, c, t, "Abort")
    elif tag == "fh_dec":
        w.fh_decision = args[0]
    elif tag == "ag_dec":
        w.ag_knows = args[0]
        if args[0] == "Abort":
            w.fifo = False
        elif w.fifo:
            _flush(w, net, t)
    elif tag == "ag_flush":
        _flush(w, net, t)
    elif tag == "mh_flush":
        if w.decision != "Commit":
            w.violations.append("deferred write applied for a non-committed transaction")
        w.mh_flushed = True
    else:  # pragma: no cover
        raise AssertionError(tag)


def _try_deliver(w: _World, c: OracleCase, net: _Net, t: float) -> None:
    if w.ag != "to_mh" or w.ag_knows is not None:
        return
    if c.daalg and t >= w.ag_deadline:
        return
    lat = net.path(t)
    if lat is not None:
        w.ag = "at_mh"
        w.ag_deadline = INF
        w.pending.append((t + lat, "mh_frag", ()))
        return
    nxt = net.next_up(t)
    if nxt < INF and (not c.daalg or nxt < w.ag_deadline):
        w.pending.append((nxt, "ag_retry", ()))


def _decide(w: _World, c: OracleCase, t: float, d: str) -> None:
    if w.decision is not None:
        w.violations.append("second decision")
    w.decision = d
    w.co = "decided"
    w.pending.append((t + c.wired, "fh_dec", (d,)))
    w.pending.append((t + c.wired, "ag_dec", (d,)))


def _flush(w: _World, net: _Net, t: float) -> None:
    if not w.fifo:
        return
    lat = net.path(t)
    if lat is not None:
        w.fifo = False
        w.pending.append((t + lat, "mh_flush", ()))
    elif net.next_up(t) < INF:
        w.pending.append((net.next_up(t), "ag_flush", ()))


def enumerate_outcomes(c: OracleCase, max_states: int = 100_000) -> set[tuple[str, bool]]:
    """All (decision, decision-algorithm-involved) outcomes over every tie ordering."""
    net = _Net(c)
    start = _World(pending=[(0.0, "arrive", ())])
    outcomes: set = set()
    stack = [start]
    seen = 0
    while stack:
        w = stack.pop()
        seen += 1
        if seen > max_states:
            raise RuntimeError(f"state budget exhausted for case {c.name}")
        if not w.pending:
            if w.violations:
                raise AssertionError(f"{c.name}: {w.violations}")
            if w.fh_decision is not None and w.fh_decision != w.decision:
                raise AssertionError(f"{c.name}: split decision")
            outcomes.add((w.decision, w.daalg and w.decision is not None))
            continue
        tmin = min(e[0] for e in w.pending)
        ready = [i for i, e in enumerate(w.pending) if e[0] == tmin]
        for i in ready:
            nxt = copy.deepcopy(w)
            t, tag, args = nxt.pending.pop(i)
            _step(nxt, c, net, t, tag, args)
            stack.append(nxt)
    return outcomes


# simulator side


def simulate_case(c: OracleCase) -> tuple[str, bool]:
    from .connectivity import Connectivity, MobileHostLinks, ScriptedLink
    from .engine import Engine, RngStreams
    from .metrics import Decision
    from .protocol import CftProtocol, DelayModel, ProtocolConfig
    from .workload import Kind, Tpf, Transaction

    links = MobileHostLinks(0, ScriptedLink(c.std_up, c.std_toggles), ScriptedLink(c.adhoc_up, c.adhoc_toggles))
    cfg = ProtocolConfig(
        et=c.et,
        ct=c.ct,
        adhoc_enabled=c.adhoc_enabled,
        daalg_enabled=c.daalg,
        init_window=c.init_window,
        fh_abort_prob=1.0 if c.fh_no else 0.0,
        delays=DelayModel((c.wired,) * 2, (c.wireless,) * 2, (c.adhoc,) * 2),
    )
    engine = Engine()
    proto = CftProtocol(engine, Connectivity({0: links}), cfg, RngStreams(0))
    kind = Kind[c.kind]
    txn = Transaction(0, 0.0, 0, (0,), (0,), kind)
    txn.tpfs[("mh", 0)] = Tpf(0, ("mh", 0), kind, c.exec_mh)
    txn.tpfs[("fh", 0)] = Tpf(0, ("fh", 0), kind, c.exec_fh)
    proto.submit(txn)
    engine.run()
    proto.check_complete()
    rec = proto.ledger.records[0]
    return ("Commit" if rec.decision is Decision.COMMIT else "Abort", rec.daalg_involved)


@dataclass
class OracleResult:
    case: OracleCase
    simulated: tuple[str, bool]
    enumerated: set

    @property
    def ok(self) -> bool:
        return self.enumerated == {self.simulated}

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.case.name}: simulator={self.simulated} enumerator={sorted(self.enumerated)}"


def check_case(name: str) -> OracleResult:
    c = CASES[name]
    if c.segments > 6:
        raise ValueError(f"case {name} has more than 6 connectivity segments")
    return OracleResult(c, simulate_case(c), enumerate_outcomes(c))
