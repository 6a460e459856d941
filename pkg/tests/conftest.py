"""Shared builders for small hand-wired protocol worlds."""

from __future__ import annotations

import pytest

from cftsim.connectivity import Connectivity, MobileHostLinks, ScriptedLink
from cftsim.engine import Engine, RngStreams
from cftsim.protocol import CftProtocol, DelayModel, ProtocolConfig
from cftsim.workload import Kind, Tpf, Transaction

FIXED = DelayModel((0.02, 0.02), (0.5, 0.5), (1.0, 1.0))


def links(*specs):
    """``specs[i]`` is ``(std_up, std_toggles)`` or adds ``adhoc_up, adhoc_toggles``."""
    hosts = {}
    for mh, spec in enumerate(specs):
        std = ScriptedLink(spec[0], spec[1])
        adh = ScriptedLink(spec[2], spec[3]) if len(spec) > 2 else ScriptedLink.always(False)
        hosts[mh] = MobileHostLinks(mh, std, adh)
    return Connectivity(hosts)


def txn(tid, arrival, mhs, fhs, kind=Kind.READ, exec_mh=0.5, exec_fh=0.2):
    t = Transaction(tid, arrival, mhs[0], tuple(mhs), tuple(fhs), kind)
    for m in mhs:
        t.tpfs["mh", m] = Tpf(tid, ("mh", m), kind, exec_mh)
    for j in fhs:
        t.tpfs["fh", j] = Tpf(tid, ("fh", j), kind, exec_fh)
    return t


class World:
    def __init__(self, net, trace=False, **cfg):
        cfg.setdefault("delays", FIXED)
        self.events = []
        self.engine = Engine(trace=self.events.append if trace else None)
        self.proto = CftProtocol(self.engine, net, ProtocolConfig(**cfg), RngStreams(0))

    def run(self, *txns):
        for t in txns:
            self.proto.submit(t)
        self.engine.run()
        self.proto.check_complete()
        return self.proto.ledger.records

    def times(self, target, kind):
        return [ev.fire_at for ev in self.events if ev.target == target and ev.payload[0] == kind]


@pytest.fixture
def always_up():
    return lambda n=1: links(*[(True, ())] * n)


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[1][1:])):
            terminalreporter.write_line(line)
