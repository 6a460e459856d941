"""Connection fault-tolerant commit protocol.

Role state machines for the home MH, coordinator, MH agents (with the
decision algorithm and deferred-write FIFO), mobile participants and fixed
participants.  All roles run inside one :class:`~cftsim.engine.Engine`;
messages are events whose delivery time is the send time plus the sampled
latency of the path actually taken.

Timer rules:

* The coordinator's execution timeout (Et) bounds vote collection; after a
  decision a fresh Et window bounds acknowledgement collection.
* An agent's connection timeout (Ct) bounds how long it waits for a
  connection to its MH, not message transit or execution.  The first window
  opens at Prepare receipt and closes on hand-off.  A second one opens if the
  MH has its vote ready but no channel.  If either window runs out with no
  connection, the decision algorithm answers for the MH.
* With the decision algorithm disabled there is no Ct guard: the agent keeps
  retrying whenever a channel reappears and only Et can end the wait.
"""

from __future__ import annotations

import enum
import logging
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from .connectivity import Channel, Connectivity
from .engine import Engine, RngStreams, draw_uniform
from .metrics import Decision, Ledger, OutcomeRecord
from .workload import Kind, Tpf, Transaction, TxnState

__all__ = [
    "UNLIMITED",
    "ProtocolViolation",
    "Vote",
    "Path",
    "DelayModel",
    "ProtocolConfig",
    "CoordinatorState",
    "AgentState",
    "ParticipantState",
    "CftProtocol",
    "daalg_decide",
    "message_delay",
    "channel_delay",
]

log = logging.getLogger(__name__)

UNLIMITED = math.inf


class ProtocolViolation(RuntimeError):
    """An atomicity or state-machine invariant was broken."""

    def __reduce__(self):
        # keep config/seed attached when raised inside a worker process
        return (self.__class__, self.args, self.__dict__)


class Vote(enum.Enum):
    YES = "Yes"
    NO = "No"


class Path(enum.Enum):
    WIRED = "wired"
    WIRELESS = "wireless"
    ADHOC_RELAY = "adhoc_relay"


@dataclass(frozen=True)
class DelayModel:
    wired: tuple[float, float] = (0.01, 0.03)
    wireless: tuple[float, float] = (0.2, 1.0)
    adhoc: tuple[float, float] = (0.4, 2.0)


DEFAULT_DELAYS = DelayModel()


def message_delay(path: Path, rng: random.Random, delays: DelayModel = DEFAULT_DELAYS) -> float:
    """Latency of one path.

    An ad-hoc relay crosses the ad-hoc hop to a neighbour, the neighbour's
    wireless hop to its MSS and a wired hop.
    """
    if path is Path.WIRED:
        return draw_uniform(rng, *delays.wired)
    if path is Path.WIRELESS:
        return draw_uniform(rng, *delays.wireless)
    return (
        draw_uniform(rng, *delays.adhoc)
        + draw_uniform(rng, *delays.wireless)
        + draw_uniform(rng, *delays.wired)
    )


def channel_delay(channel: Channel, rng: random.Random, delays: DelayModel = DEFAULT_DELAYS) -> float:
    """MH <-> agent latency over the given channel."""
    if channel is Channel.STANDARD:
        return message_delay(Path.WIRELESS, rng, delays) + message_delay(Path.WIRED, rng, delays)
    if channel is Channel.ADHOC:
        return message_delay(Path.ADHOC_RELAY, rng, delays)
    raise ValueError("no channel to send over")


def daalg_decide(tpf: Tpf) -> tuple[Vote, bool]:
    """Vote on behalf of an unreachable MH: (vote, defer the fragment)."""
    if tpf.kind is Kind.WRITE:
        return Vote.YES, True
    return Vote.NO, False


@dataclass(frozen=True)
class ProtocolConfig:
    et: float = 5.0
    ct: float = 2.4
    adhoc_enabled: bool = True
    daalg_enabled: bool = True
    init_window: float = 5.0
    fh_abort_prob: float = 0.0
    delays: DelayModel = DEFAULT_DELAYS

    def __post_init__(self):
        if not self.et > 0:
            raise ValueError(f"Et must be positive or UNLIMITED, got {self.et}")
        if not self.ct >= 0:
            raise ValueError(f"Ct must be non-negative, got {self.ct}")
        if not 0.0 <= self.fh_abort_prob <= 1.0:
            raise ValueError(f"fh_abort_prob must be in [0, 1], got {self.fh_abort_prob}")


class Phase(enum.Enum):
    WAIT_VOTES = "WaitVotes"
    WAIT_ACKS = "WaitAcks"
    DONE = "Done"


@dataclass
class CoordinatorState:
    txn: int
    et_deadline: Optional[float]
    votes: dict
    phase: Phase = Phase.WAIT_VOTES
    decision: Optional[Decision] = None
    decided_at: Optional[float] = None
    ack_deadline: float = UNLIMITED
    acks: set = field(default_factory=set)
    presumed: set = field(default_factory=set)
    fh_blocking: list = field(default_factory=list)
    reason: str = ""


class Relay(enum.Enum):
    TO_MH = "to_mh"  # fragment not yet handed to the MH
    AT_MH = "at_mh"  # handed off, waiting for the MH's vote
    VOTED = "voted"  # genuine vote forwarded
    DAALG = "daalg"  # decision algorithm answered


@dataclass
class Delivery:
    """Agent-side record of one transaction for its MH."""

    tpf: Optional[Tpf] = None
    phase: Relay = Relay.TO_MH
    ct_deadline: float = UNLIMITED
    lost_at: float = 0.0
    decision: Optional[Decision] = None


@dataclass
class FifoEntry:
    tpf: Tpf
    committed: bool = False


@dataclass
class AgentState:
    mh: int
    fifo: list = field(default_factory=list)
    deliveries: dict = field(default_factory=dict)
    daalg_fired: set = field(default_factory=set)
    flush_pending: bool = False


@dataclass
class ParticipantState:
    participant: tuple
    txn: int
    status: str = "pending"
    prepare_at: Optional[float] = None
    vote_sent: bool = False
    lost: bool = False
    decision: Optional[Decision] = None
    log: list = field(default_factory=list)


class CftProtocol:
    """All protocol roles for a set of transactions on one engine."""

    ROLES = ("hmh", "co", "agent", "fh", "mh")

    def __init__(
        self,
        engine: Engine,
        connectivity: Connectivity,
        cfg: ProtocolConfig,
        streams: RngStreams,
        ledger: Optional[Ledger] = None,
    ):
        self.engine = engine
        self.net = connectivity
        self.cfg = cfg
        self.streams = streams
        self.ledger = ledger if ledger is not None else Ledger()
        self.txns: dict[int, Transaction] = {}
        self.co: dict[int, CoordinatorState] = {}
        self.agents: dict[int, AgentState] = {}
        self.parts: dict[tuple, ParticipantState] = {}
        self.daalg_fired: dict[int, set] = defaultdict(set)
        self.applied_writes: list[tuple[float, int, int]] = []
        self.split_decisions = 0
        self._rngs: dict = {}
        self._routes = {
            ("hmh", "arrive"): self.hmh_initiate,
            ("hmh", "initiate"): self.hmh_initiate,
            ("hmh", "init_fail"): self._init_fail,
            ("agent", "init"): self._agent_on_init,
            ("co", "init"): self.co_on_init,
            ("co", "vote"): self.co_on_vote,
            ("co", "et_expiry"): self._co_et_expiry,
            ("co", "ack"): self._co_on_ack,
            ("co", "ack_expiry"): self._co_ack_expiry,
            ("fh", "prepare"): self.fh_on_prepare,
            ("fh", "decision"): self.participant_on_decision,
            ("agent", "prepare"): self.ag_on_prepare,
            ("agent", "deliver"): self._agent_try_deliver,
            ("agent", "ct_expiry"): self._agent_ct_expiry,
            ("agent", "mh_vote"): self._agent_on_mh_vote,
            ("agent", "mh_lost"): self._agent_on_mh_lost,
            ("agent", "decision"): self._agent_on_decision,
            ("agent", "send_decision"): self._agent_send_decision,
            ("agent", "flush"): self._agent_flush_event,
            ("agent", "ack"): self._agent_on_ack,
            ("mh", "fragment"): self.mh_on_fragment,
            ("mh", "vote_ready"): self._mh_send_vote,
            ("mh", "decision"): self.participant_on_decision,
            ("mh", "ack_ready"): self._mh_send_ack,
            ("mh", "flush_tpf"): self._mh_on_flush,
        }
        for role in self.ROLES:
            engine.register(role, self._dispatch)

    # plumbing

    def _dispatch(self, ev) -> None:
        self._routes[ev.target, ev.payload[0]](*ev.payload[1:])

    def _send(self, at: float, role: str, kind: str, *args, drain: bool = True) -> None:
        self.engine.schedule(at, role, kind, *args, drain=drain)

    def _rng(self, key) -> random.Random:
        rng = self._rngs.get(key)
        if rng is None:
            rng = self._rngs[key] = self.streams.substream("delays", *key)
        return rng

    def _wired(self, txn: int) -> float:
        return message_delay(Path.WIRED, self._rng(("txn", txn)), self.cfg.delays)

    def _over(self, channel: Channel, key) -> float:
        return channel_delay(channel, self._rng(key), self.cfg.delays)

    def _channel(self, mh: int, t: float) -> Channel:
        return self.net.effective_channel(mh, t, self.cfg.adhoc_enabled)

    def _next_up(self, mh: int, t: float) -> Optional[float]:
        return self.net.next_channel_available(mh, t, self.cfg.adhoc_enabled)

    def _agent(self, mh: int) -> AgentState:
        ag = self.agents.get(mh)
        if ag is None:
            ag = self.agents[mh] = AgentState(mh)
        return ag

    def _part(self, p: tuple, txn: int) -> ParticipantState:
        key = (p, txn)
        st = self.parts.get(key)
        if st is None:
            st = self.parts[key] = ParticipantState(p, txn)
        return st

    @property
    def now(self) -> float:
        return self.engine.now

    # home MH

    def submit(self, txn: Transaction) -> None:
        if txn.id in self.txns:
            raise ValueError(f"transaction {txn.id} submitted twice")
        self.txns[txn.id] = txn
        self._send(txn.arrival, "hmh", "arrive", txn.id, drain=False)

    def hmh_initiate(self, txn_id: int) -> None:
        """Send the new transaction toward the coordinator via the home agent.

        If the home MH has no channel, initiation waits for the next channel
        instant within ``init_window`` of arrival and fails otherwise.
        """
        t = self.now
        txn = self.txns[txn_id]
        if txn.state is not TxnState.CREATED:
            raise ProtocolViolation(f"txn {txn_id} initiated twice")
        ch = self._channel(txn.home_mh, t)
        if ch is not Channel.NONE:
            txn.advance(TxnState.INITIATED)
            self._send(t + self._over(ch, ("txn", txn_id)), "agent", "init", txn_id)
            return
        deadline = txn.arrival + self.cfg.init_window
        nxt = self._next_up(txn.home_mh, t)
        if nxt is not None and nxt <= deadline:
            self._send(nxt, "hmh", "initiate", txn_id)
        elif math.isfinite(deadline) and deadline >= t:
            self._send(deadline, "hmh", "init_fail", txn_id)
        else:
            self._init_fail(txn_id)

    def _init_fail(self, txn_id: int) -> None:
        txn = self.txns[txn_id]
        txn.advance(TxnState.FINALIZED)
        self.ledger.record(
            OutcomeRecord(txn_id, Decision.ABORT, False, self.now - txn.arrival, reason="initiation_failed")
        )

    def _agent_on_init(self, txn_id: int) -> None:
        self._send(self.now + self._wired(txn_id), "co", "init", txn_id)

    # coordinator

    def co_on_init(self, txn_id: int) -> None:
        t = self.now
        txn = self.txns[txn_id]
        txn.advance(TxnState.PREPARING)
        et = self.cfg.et
        deadline = t + et if math.isfinite(et) else None
        votes = {p: None for p in txn.participants}
        self.co[txn_id] = CoordinatorState(txn_id, deadline, votes)
        if deadline is not None:
            self._send(deadline, "co", "et_expiry", txn_id)
        for j in txn.part_fhs:
            self._send(t + self._wired(txn_id), "fh", "prepare", txn_id, j)
        for m in txn.part_mhs:
            self._send(t + self._wired(txn_id), "agent", "prepare", txn_id, m)

    def co_on_vote(self, txn_id: int, participant: tuple, vote: Vote, presumed: bool = False) -> None:
        t = self.now
        c = self.co[txn_id]
        if c.phase is not Phase.WAIT_VOTES:
            return
        if c.votes[participant] is not None:
            log.warning("t=%.6f txn %d: duplicate vote from %s ignored", t, txn_id, participant)
            return
        c.votes[participant] = vote
        if presumed:
            c.presumed.add(participant)
        if vote is Vote.NO:
            self.co_decide(c, Decision.ABORT, reason="vote_no")
        elif all(v is not None for v in c.votes.values()):
            self.co_decide(c, Decision.COMMIT)

    def _co_et_expiry(self, txn_id: int) -> None:
        c = self.co[txn_id]
        if c.phase is Phase.WAIT_VOTES:
            self.co_decide(c, Decision.ABORT, reason="et_expired")

    def co_decide(self, c: CoordinatorState, d: Decision, reason: str = "") -> None:
        t = self.now
        if c.decision is not None or c.phase is not Phase.WAIT_VOTES:
            raise ProtocolViolation(f"txn {c.txn}: second decision {d.value} after {c.decision}")
        if d is Decision.COMMIT:
            if any(v is not Vote.YES for v in c.votes.values()):
                raise ProtocolViolation(f"txn {c.txn}: commit without unanimous Yes")
            if c.et_deadline is not None and t >= c.et_deadline:
                raise ProtocolViolation(f"txn {c.txn}: commit at {t} after Et deadline {c.et_deadline}")
        c.decision = d
        c.decided_at = t
        c.reason = reason
        c.phase = Phase.WAIT_ACKS
        txn = self.txns[c.txn]
        txn.advance(TxnState.DECIDED)
        if math.isfinite(self.cfg.et):
            c.ack_deadline = t + self.cfg.et
            self._send(c.ack_deadline, "co", "ack_expiry", c.txn)
        for j in txn.part_fhs:
            self._send(t + self._wired(c.txn), "fh", "decision", c.txn, ("fh", j), d)
        for m in txn.part_mhs:
            self._send(t + self._wired(c.txn), "agent", "decision", c.txn, m, d)

    def _co_on_ack(self, txn_id: int, participant: tuple) -> None:
        c = self.co[txn_id]
        if c.phase is not Phase.WAIT_ACKS:
            return
        c.acks.add(participant)
        if len(c.acks) == len(c.votes):
            self.finalize(txn_id)

    def _co_ack_expiry(self, txn_id: int) -> None:
        if self.co[txn_id].phase is Phase.WAIT_ACKS:
            self.finalize(txn_id)

    def finalize(self, txn_id: int) -> OutcomeRecord:
        t = self.now
        c = self.co[txn_id]
        txn = self.txns[txn_id]
        c.phase = Phase.DONE
        txn.advance(TxnState.FINALIZED)
        rec = OutcomeRecord(
            txn_id,
            c.decision,
            bool(self.daalg_fired.get(txn_id)),
            t - txn.arrival,
            list(c.fh_blocking),
            reason=c.reason,
            missing_acks=len(c.votes) - len(c.acks),
        )
        self.ledger.record(rec)
        self._rngs.pop(("txn", txn_id), None)
        return rec

    # fixed participant

    def fh_on_prepare(self, txn_id: int, fh: int) -> None:
        t = self.now
        p = ("fh", fh)
        st = self._part(p, txn_id)
        if st.decision is not None:
            return
        st.prepare_at = t
        st.status = "executed"
        vote = Vote.YES
        if self.cfg.fh_abort_prob > 0 and self._rng(("txn", txn_id)).random() < self.cfg.fh_abort_prob:
            vote = Vote.NO
            st.log.append("abort")
        st.vote_sent = True
        tpf = self.txns[txn_id].tpfs[p]
        self._send(t + tpf.exec_time + self._wired(txn_id), "co", "vote", txn_id, p, vote)

    def participant_on_decision(self, txn_id: int, p: tuple, d: Decision) -> None:
        t = self.now
        st = self._part(p, txn_id)
        if st.decision is not None:
            return
        if d is not self.co[txn_id].decision:
            self.split_decisions += 1
            raise ProtocolViolation(f"txn {txn_id}: {p} recorded {d.value}, coordinator {self.co[txn_id].decision}")
        st.decision = d
        st.log.append(d.value.lower())
        if p[0] == "fh":
            start = st.prepare_at if st.prepare_at is not None else t
            self.co[txn_id].fh_blocking.append(t - start)
            self._send(t + self._wired(txn_id), "co", "ack", txn_id, p)
        else:
            self._mh_send_ack(txn_id, p[1])

    # agent

    def ag_on_prepare(self, txn_id: int, mh: int) -> None:
        t = self.now
        ag = self._agent(mh)
        dl = ag.deliveries.get(txn_id)
        if dl is None:
            dl = ag.deliveries[txn_id] = Delivery()
        elif dl.decision is not None:
            return
        dl.tpf = self.txns[txn_id].tpfs["mh", mh]
        if self.cfg.daalg_enabled:
            dl.ct_deadline = t + self.cfg.ct
            self._send(dl.ct_deadline, "agent", "ct_expiry", txn_id, mh, dl.ct_deadline)
        self._agent_try_deliver(txn_id, mh)

    def _agent_try_deliver(self, txn_id: int, mh: int) -> None:
        t = self.now
        dl = self.agents[mh].deliveries[txn_id]
        if dl.phase is not Relay.TO_MH or dl.decision is not None:
            return
        guarded = self.cfg.daalg_enabled
        if guarded and not t < dl.ct_deadline:
            return
        ch = self._channel(mh, t)
        if ch is not Channel.NONE:
            # connected: Ct is reset and only restarts if the MH drops out
            # before its vote is on the way
            dl.phase = Relay.AT_MH
            dl.ct_deadline = UNLIMITED
            self._send(t + self._over(ch, ("txn", txn_id)), "mh", "fragment", txn_id, mh)
            return
        nxt = self._next_up(mh, t)
        if nxt is None or (guarded and nxt >= dl.ct_deadline):
            return
        self._send(nxt, "agent", "deliver", txn_id, mh)

    def _agent_ct_expiry(self, txn_id: int, mh: int, deadline: float) -> None:
        ag = self.agents[mh]
        dl = ag.deliveries[txn_id]
        if dl.ct_deadline != deadline or dl.decision is not None:
            return
        if dl.phase is Relay.AT_MH:
            nxt = self._next_up(mh, dl.lost_at)
            if nxt is not None and nxt < deadline:
                return  # link came back in time; the vote is in flight
        elif dl.phase is not Relay.TO_MH:
            return
        self.daalg_run(ag, txn_id)

    def _agent_on_mh_lost(self, txn_id: int, mh: int) -> None:
        """The MH has a vote ready but no channel: start the return-leg Ct."""
        dl = self.agents[mh].deliveries[txn_id]
        if not self.cfg.daalg_enabled or dl.phase is not Relay.AT_MH or dl.decision is not None:
            return
        if math.isfinite(dl.ct_deadline):
            return
        dl.lost_at = self.now
        dl.ct_deadline = self.now + self.cfg.ct
        self._send(dl.ct_deadline, "agent", "ct_expiry", txn_id, mh, dl.ct_deadline)

    def daalg_run(self, ag: AgentState, txn_id: int) -> None:
        dl = ag.deliveries[txn_id]
        vote, defer = daalg_decide(dl.tpf)
        if defer:
            ag.fifo.append(FifoEntry(dl.tpf))
        dl.phase = Relay.DAALG
        ag.daalg_fired.add(txn_id)
        self.daalg_fired[txn_id].add(ag.mh)
        self._send(self.now + self._wired(txn_id), "co", "vote", txn_id, ("mh", ag.mh), vote, True)

    def _agent_on_mh_vote(self, txn_id: int, mh: int, vote: Vote) -> None:
        dl = self.agents[mh].deliveries[txn_id]
        if dl.phase is not Relay.AT_MH or dl.decision is not None:
            return
        dl.phase = Relay.VOTED
        self._send(self.now + self._wired(txn_id), "co", "vote", txn_id, ("mh", mh), vote)

    def _agent_on_decision(self, txn_id: int, mh: int, d: Decision) -> None:
        ag = self._agent(mh)
        dl = ag.deliveries.get(txn_id)
        if dl is None:
            dl = ag.deliveries[txn_id] = Delivery()
        dl.decision = d
        if d is Decision.ABORT:
            ag.fifo = [e for e in ag.fifo if e.tpf.txn != txn_id]
        else:
            queued = False
            for e in ag.fifo:
                if e.tpf.txn == txn_id:
                    e.committed = queued = True
            if queued:
                self.ag_on_reconnect(mh, scheduled=False)
        self._agent_send_decision(txn_id, mh)

    def _agent_send_decision(self, txn_id: int, mh: int) -> None:
        t = self.now
        c = self.co[txn_id]
        if t > c.ack_deadline:
            return
        ch = self._channel(mh, t)
        if ch is not Channel.NONE:
            self._send(t + self._over(ch, ("txn", txn_id)), "mh", "decision", txn_id, ("mh", mh), c.decision)
            return
        nxt = self._next_up(mh, t)
        if nxt is not None and nxt <= c.ack_deadline:
            self._send(nxt, "agent", "send_decision", txn_id, mh)

    def ag_on_reconnect(self, mh: int, scheduled: bool = True) -> None:
        """Deliver committed deferred fragments to the MH in FIFO order.

        Runs when a queued fragment's transaction commits and again at the
        first channel instant after that if the MH is unreachable.  Entries
        of undecided transactions stay queued; aborted ones were already
        dropped.
        """
        t = self.now
        ag = self.agents[mh]
        if scheduled:
            ag.flush_pending = False
        ready = [e for e in ag.fifo if e.committed]
        if not ready:
            return
        ch = self._channel(mh, t)
        if ch is Channel.NONE:
            nxt = self._next_up(mh, t)
            if nxt is not None and not ag.flush_pending:
                ag.flush_pending = True
                self._send(nxt, "agent", "flush", None, mh)
            return
        ag.fifo = [e for e in ag.fifo if not e.committed]
        tpfs = tuple(e.tpf for e in ready)
        self._send(t + self._over(ch, ("agent", mh)), "mh", "flush_tpf", None, mh, tpfs)

    def _agent_flush_event(self, _none, mh: int) -> None:
        self.ag_on_reconnect(mh)

    def _agent_on_ack(self, txn_id: int, mh: int) -> None:
        self._send(self.now + self._wired(txn_id), "co", "ack", txn_id, ("mh", mh))

    # mobile participant

    def mh_on_fragment(self, txn_id: int, mh: int) -> None:
        st = self._part(("mh", mh), txn_id)
        if st.decision is not None:
            return
        st.status = "executing"
        tpf = self.txns[txn_id].tpfs["mh", mh]
        self._send(self.now + tpf.exec_time, "mh", "vote_ready", txn_id, mh)

    def _mh_send_vote(self, txn_id: int, mh: int) -> None:
        t = self.now
        st = self._part(("mh", mh), txn_id)
        st.status = "executed"
        if st.decision is not None or st.vote_sent:
            return
        ch = self._channel(mh, t)
        if ch is not Channel.NONE:
            st.vote_sent = True
            self._send(t + self._over(ch, ("txn", txn_id)), "agent", "mh_vote", txn_id, mh, Vote.YES)
            return
        if not st.lost:
            st.lost = True
            self._send(t, "agent", "mh_lost", txn_id, mh)
        nxt = self._next_up(mh, t)
        if nxt is not None and self.co[txn_id].phase is Phase.WAIT_VOTES:
            self._send(nxt, "mh", "vote_ready", txn_id, mh)

    def _mh_send_ack(self, txn_id: int, mh: int) -> None:
        t = self.now
        c = self.co[txn_id]
        if t > c.ack_deadline:
            return
        ch = self._channel(mh, t)
        if ch is not Channel.NONE:
            self._send(t + self._over(ch, ("txn", txn_id)), "agent", "ack", txn_id, mh)
            return
        nxt = self._next_up(mh, t)
        if nxt is not None and nxt <= c.ack_deadline:
            self._send(nxt, "mh", "ack_ready", txn_id, mh)

    def _mh_on_flush(self, _none, mh: int, tpfs: tuple) -> None:
        for tpf in tpfs:
            c = self.co.get(tpf.txn)
            if c is None or c.decision is not Decision.COMMIT:
                raise ProtocolViolation(f"deferred write of txn {tpf.txn} delivered to MH {mh} without commit")
            self._part(("mh", mh), tpf.txn).log.append("write_applied")
            self.applied_writes.append((self.now, mh, tpf.txn))

    # end-of-run checks

    def check_complete(self) -> None:
        pending = [i for i, x in self.txns.items() if x.state is not TxnState.FINALIZED]
        if pending:
            raise ProtocolViolation(f"{len(pending)} transactions never finalized, e.g. {pending[:5]}")
        if len(self.ledger) != len(self.txns):
            raise ProtocolViolation("ledger size differs from generated transactions")
        for ag in self.agents.values():
            stuck = [e.tpf.txn for e in ag.fifo if e.committed]
            if stuck:
                raise ProtocolViolation(f"agent {ag.mh} still holds committed deferred writes {stuck}")
