"""Transaction stream: Poisson arrivals, random participant sets, READ/WRITE mix."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Optional

from .engine import RngStreams, draw_exponential, draw_uniform

__all__ = [
    "Kind",
    "TxnState",
    "Tpf",
    "Transaction",
    "WorkloadConfig",
    "generate",
    "sample_participants",
    "assign_function",
]


class Kind(enum.Enum):
    READ = "READ"
    WRITE = "WRITE"


class TxnState(enum.IntEnum):
    CREATED = 0
    INITIATED = 1
    PREPARING = 2
    DECIDED = 3
    FINALIZED = 4


# participant keys: ("mh", i) for mobile hosts, ("fh", j) for fixed hosts
Participant = tuple


@dataclass(frozen=True)
class Tpf:
    txn: int
    participant: Participant
    kind: Kind
    exec_time: float


@dataclass
class Transaction:
    id: int
    arrival: float
    home_mh: int
    part_mhs: tuple[int, ...]
    part_fhs: tuple[int, ...]
    kind: Kind
    tpfs: dict = field(default_factory=dict)
    state: TxnState = TxnState.CREATED

    def advance(self, new: TxnState) -> None:
        if new <= self.state:
            raise RuntimeError(f"txn {self.id}: lifecycle cannot move {self.state.name} -> {new.name}")
        self.state = new

    @property
    def participants(self) -> list[Participant]:
        return [("fh", j) for j in self.part_fhs] + [("mh", m) for m in self.part_mhs]


@dataclass(frozen=True)
class WorkloadConfig:
    horizon: float = 36000.0
    mean_interarrival: float = 30.0
    part_mh_range: tuple[int, int] = (3, 5)
    part_fh_range: tuple[int, int] = (1, 5)
    write_fraction: float = 0.5
    n_mh: int = 20
    n_fh: int = 10
    mh_exec: tuple[float, float] = (0.3, 0.7)
    fh_exec: tuple[float, float] = (0.1, 0.3)

    def __post_init__(self):
        if not 0.0 <= self.write_fraction <= 1.0:
            raise ValueError(f"write_fraction must be in [0, 1], got {self.write_fraction}")
        lo, hi = self.part_mh_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad part_mh_range {self.part_mh_range}")
        if self.n_mh < hi:
            raise ValueError(f"population of {self.n_mh} MHs is smaller than part_mh upper bound {hi}")
        lo, hi = self.part_fh_range
        if not 0 <= lo <= hi:
            raise ValueError(f"bad part_fh_range {self.part_fh_range}")
        if self.n_fh < hi:
            raise ValueError(f"population of {self.n_fh} FHs is smaller than part_fh upper bound {hi}")


def sample_participants(cfg: WorkloadConfig, rng: random.Random) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Draw (part_mhs, part_fhs); the home MH is ``part_mhs[0]``."""
    n_mh = rng.randint(*cfg.part_mh_range)
    home = rng.randrange(cfg.n_mh)
    others = rng.sample([m for m in range(cfg.n_mh) if m != home], n_mh - 1)
    n_fh = rng.randint(*cfg.part_fh_range)
    fhs = rng.sample(range(cfg.n_fh), n_fh)
    return (home, *others), tuple(fhs)


def assign_function(rng: random.Random, write_fraction: float) -> Kind:
    if not 0.0 <= write_fraction <= 1.0:
        raise ValueError(f"write_fraction must be in [0, 1], got {write_fraction}")
    return Kind.WRITE if rng.random() < write_fraction else Kind.READ


def generate(cfg: WorkloadConfig, streams: RngStreams, limit: Optional[int] = None) -> list[Transaction]:
    """All transactions arriving in ``[0, horizon)``, in arrival order.

    Each concern reads its own stream, so the list for a given seed does not
    depend on which protocol variant later consumes it.
    """
    arrivals = streams.stream("arrivals")
    parts = streams.stream("participants")
    funcs = streams.stream("functions")
    execs = streams.stream("execution")
    out: list[Transaction] = []
    t = 0.0
    while limit is None or len(out) < limit:
        t += draw_exponential(arrivals, cfg.mean_interarrival)
        if t >= cfg.horizon:
            break
        mhs, fhs = sample_participants(cfg, parts)
        kind = assign_function(funcs, cfg.write_fraction)
        txn = Transaction(len(out), t, mhs[0], mhs, fhs, kind)
        for m in mhs:
            p = ("mh", m)
            txn.tpfs[p] = Tpf(txn.id, p, kind, draw_uniform(execs, *cfg.mh_exec))
        for j in fhs:
            p = ("fh", j)
            txn.tpfs[p] = Tpf(txn.id, p, kind, draw_uniform(execs, *cfg.fh_exec))
        out.append(txn)
    return out
