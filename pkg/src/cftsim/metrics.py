"""Outcome ledger and commit-rate measures."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

__all__ = ["Decision", "OutcomeRecord", "Ledger", "ScenarioStats", "DuplicateRecordError"]


class Decision(enum.Enum):
    COMMIT = "Commit"
    ABORT = "Abort"


class DuplicateRecordError(RuntimeError):
    pass


@dataclass
class OutcomeRecord:
    txn: int
    decision: Decision
    daalg_involved: bool
    latency: float
    fh_blocking: list[float] = field(default_factory=list)
    reason: str = ""
    missing_acks: int = 0

    def __post_init__(self):
        if self.latency < 0:
            raise ValueError(f"negative latency for txn {self.txn}")


@dataclass(frozen=True)
class ScenarioStats:
    generated: int
    committed: int
    aborted: int
    presumed_committed: int
    mean_fh_blocking: Optional[float]
    seed: int = 0

    @property
    def commit_rate(self) -> Optional[float]:
        """Committed over generated; None for an empty run."""
        if self.generated == 0:
            return None
        return self.committed / self.generated

    @property
    def presumed_commit_rate(self) -> Optional[float]:
        # denominator is every generated transaction, so this never exceeds commit_rate
        if self.generated == 0:
            return None
        return self.presumed_committed / self.generated

    @property
    def presumed_share_of_commits(self) -> Optional[float]:
        if self.committed == 0:
            return None
        return self.presumed_committed / self.committed


class Ledger:
    """One record per finalized transaction."""

    def __init__(self):
        self.records: dict[int, OutcomeRecord] = {}

    def record(self, o: OutcomeRecord) -> None:
        if o.txn in self.records:
            raise DuplicateRecordError(f"transaction {o.txn} finalized twice")
        self.records[o.txn] = o

    def __len__(self) -> int:
        return len(self.records)

    def mean_fh_blocking(self) -> Optional[float]:
        samples = [b for r in self.records.values() for b in r.fh_blocking]
        if not samples:
            return None
        return sum(samples) / len(samples)

    def stats(self, seed: int = 0) -> ScenarioStats:
        committed = presumed = 0
        for r in self.records.values():
            if r.decision is Decision.COMMIT:
                committed += 1
                presumed += r.daalg_involved
        n = len(self.records)
        return ScenarioStats(n, committed, n - committed, presumed, self.mean_fh_blocking(), seed)
