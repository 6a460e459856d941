"""Wire one scenario together and run it."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .config import ScenarioConfig
from .connectivity import build_connectivity
from .engine import Engine, Event, RngStreams
from .metrics import Ledger, ScenarioStats
from .protocol import CftProtocol, ProtocolViolation
from .workload import generate

__all__ = ["RunResult", "simulate", "run_scenario", "run_replications", "format_event", "dump_violation_trace"]


def format_event(ev: Event) -> str:
    kind = ev.payload[0] if ev.payload else "-"
    txn = ev.payload[1] if len(ev.payload) > 1 and ev.payload[1] is not None else "-"
    return f"{ev.fire_at:.6f} {ev.target} {kind} {txn}"


@dataclass
class RunResult:
    config: ScenarioConfig
    seed: int
    stats: ScenarioStats
    protocol: CftProtocol
    trace: Optional[list[str]] = None

    @property
    def ledger(self) -> Ledger:
        return self.protocol.ledger


def simulate(cfg: ScenarioConfig, seed: Optional[int] = None, trace: bool = False) -> RunResult:
    """Run one simulation instance to completion, including the horizon drain."""
    seed = cfg.seed if seed is None else seed
    streams = RngStreams(seed)
    lines: Optional[list[str]] = [] if trace else None
    engine = Engine(trace=(lambda ev: lines.append(format_event(ev))) if trace else None)
    net = build_connectivity(cfg.n_mh, cfg.disconnection_rate, cfg.groups(), streams, cfg.mean_off, cfg.adhoc_mean_off)
    proto = CftProtocol(engine, net, cfg.protocol(), streams, Ledger())
    for txn in generate(cfg.workload(), streams):
        proto.submit(txn)
    try:
        engine.run(until=cfg.horizon)
        proto.check_complete()
    except ProtocolViolation as exc:
        exc.config, exc.seed, exc.trace = cfg, seed, lines
        raise
    return RunResult(cfg, seed, proto.ledger.stats(seed), proto, lines)


def dump_violation_trace(cfg: ScenarioConfig, seed: int, path) -> Optional[str]:
    """Re-run a failing (config, seed) with tracing and write the event trace.

    Runs are deterministic, so the re-run reaches the same violation.  Returns
    the violation message, or None if the re-run unexpectedly succeeds.
    """
    try:
        simulate(cfg, seed, trace=True)
    except ProtocolViolation as exc:
        Path(path).write_text("\n".join(exc.trace or []) + f"\nVIOLATION {exc}\n")
        return str(exc)
    return None


def run_scenario(cfg: ScenarioConfig, seed: Optional[int] = None) -> ScenarioStats:
    return simulate(cfg, seed).stats


def run_replications(cfg: ScenarioConfig) -> list[ScenarioStats]:
    """Seeds ``cfg.seed .. cfg.seed + replications - 1``, one stats row each."""
    return [run_scenario(cfg, cfg.seed + k) for k in range(cfg.replications)]
