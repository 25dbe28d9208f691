"""Deterministic discrete-event simulator.

Time is an integer tick counter. Events are processed from a heap ordered
by (due tick, push sequence), so identical configurations replay
identically, byte for byte. Randomness (message delays, pre-GST loss,
adversary choices) comes from one seeded generator consumed in event
order.

Each process owns a hardware clock that may run at a constant rational
rate before GST and at rate one afterwards. Timers and the periodic
retransmission tick follow the local clock; message delays follow real
time.
"""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor

from . import trace as tr
from .bft_common import SigAuthority, Wish, body_summary
from .config import ScenarioConfig
from .consensus_sync import ConsensusSynchronizer
from .hotstuff_light import HotStuffLightReplica
from .pbft_light import PbftLightReplica
from .pbft_rotation import PbftRotationReplica
from .synchronizer import ToyClient, WishSynchronizer


@dataclass(frozen=True)
class ReplicaParams:
    """The protocol-visible slice of the configuration.

    Replicas never see gst or the actual delay bound; they only know the
    conservative cap and their own timeout knobs.
    """
    n: int
    f: int
    delta_cap: int
    rho: int
    tau: int
    t_broadcast: int
    batch: int
    init_dur_delivery: int
    init_dur_recovery: int
    latency_mode: bool


def local_clock(rate: Fraction, gst: int, t: int) -> int:
    """Hardware clock reading at real time t."""
    if t <= gst:
        return floor(rate * t)
    return floor(rate * gst) + (t - gst)


def real_when_local_at_least(rate: Fraction, gst: int, target: int) -> int:
    """Smallest real tick at which the local clock reaches target."""
    if target <= 0:
        return 0
    at_gst = floor(rate * gst)
    if at_gst >= target:
        return ceil(target / rate)
    return gst + (target - at_gst)


class Network:
    """Delivery-time policy. Returns None for a dropped message."""

    def __init__(self, config: ScenarioConfig, rng: random.Random):
        self.config = config
        self.rng = rng

    def deliver_time(self, sender: int, dest: int, sent_at: int) -> int | None:
        # Messages between distinct processes take at least one tick, so a
        # causal chain never collapses into a single instant; self-sends are
        # immediate.
        if sender == dest:
            return sent_at
        if sent_at >= self.config.gst:
            return sent_at + self.rng.randint(1, self.config.delta)
        if self.rng.randrange(100) < self.config.pre_gst_drop_pct:
            return None
        return sent_at + self.rng.randint(1, max(1, self.config.pre_gst_delay_max))


class ProcessShell:
    """Per-process runtime: synchronizer, timers, transport and tracing.

    The protocol node only ever talks to this object, which keeps the
    protocol code independent of the simulator and restricts what it can
    observe to the ReplicaParams slice.
    """

    def __init__(self, sim: "Simulation", pid: int, directive: dict | None):
        self.sim = sim
        self.pid = pid
        self.params = sim.replica_params
        self.auth = sim.auth
        self.directive = directive or {}
        self.sync = WishSynchronizer(pid, sim.config.n, sim.config.f)
        self.timers: dict[str, int] = {}
        self._timer_gen = 0
        self.started = False
        self.node = None

    # ---- API for nodes ----

    def send_to(self, dest: int, body) -> None:
        self._send(dest, body)

    def send_all(self, body) -> None:
        for dest in range(1, self.sim.config.n + 1):
            self._send(dest, body)

    def _send(self, dest: int, body) -> None:
        sm = self.auth.sign(body, self.pid)
        summary = body_summary(body)
        if body.MTYPE == "WISH":
            # Annotation used by the trace checker to validate wish shapes.
            summary["sender_view_plus"] = self.sync.view_plus
        self.sim.trace(self.pid, tr.SEND, {"to": dest, "msg": summary})
        self.sim.send(self.pid, dest, sm)

    def advance(self) -> None:
        self.sim.trace(self.pid, tr.ADVANCE_CALL, {"v": self.sync.last_entered})
        self.send_all(Wish(self.sync.advance()))

    def start_timer(self, key: str, duration: int) -> None:
        assert duration >= 1, f"timer {key} needs a positive duration"
        self._timer_gen += 1
        self.timers[key] = self._timer_gen
        due = self.sim.when_local_elapsed(self.pid, duration)
        self.sim.push(due, "timer", (self.pid, key, self._timer_gen, duration))
        self.sim.trace(self.pid, tr.TIMER_START, {"id": key, "duration": duration})

    def stop_timer(self, key: str) -> None:
        if key in self.timers:
            del self.timers[key]
            self.sim.trace(self.pid, tr.TIMER_STOP, {"id": key})

    def stop_all_timers(self) -> None:
        for key in sorted(self.timers):
            self.stop_timer(key)

    def timer_active(self, key: str) -> bool:
        return key in self.timers

    def deliver(self, x, position: int) -> None:
        self.sim.trace(self.pid, tr.DELIVER,
                       {"value": x.uid, "position": position, "valid": x.valid})

    def record_broadcast_call(self, x) -> None:
        self.sim.trace(self.pid, tr.BROADCAST_CALL, {"value": x.uid, "valid": x.valid})

    def record_consensus_view(self, v: int) -> None:
        self.sim.trace(self.pid, tr.ENTER_CONSENSUS_VIEW, {"v": v})

    def local_now(self) -> int:
        return self.sim.local_clock(self.pid, self.sim.now)

    @property
    def rng(self) -> random.Random:
        return self.sim.rng

    # ---- dispatch from the simulation loop ----

    def handle_start(self) -> None:
        if self.started:
            return
        self.started = True
        self.node.on_start()

    def handle_timer(self, key: str, gen: int, duration: int) -> None:
        if self.timers.get(key) != gen:
            return  # stopped or superseded
        del self.timers[key]
        self.sim.trace(self.pid, tr.TIMER_EXPIRE, {"id": key, "duration": duration})
        self.node.on_timer(key)

    def handle_periodic(self) -> None:
        wish = self.sync.periodic()
        if wish is not None:
            self.send_all(Wish(wish))
        self.node.on_periodic()
        if self.sim.config.mem_sampling:
            sizes = self.node.state_sizes()
            self.sim.trace(self.pid, tr.MEM_SAMPLE, {
                "sync_entries": self.sync.entries(),
                "future_buffer": sizes.get("future", 0),
            })

    def handle_message(self, sm, sender: int) -> None:
        if not self.auth.verify(sm):
            return  # forged envelope
        self.sim.trace(self.pid, tr.RECEIVE, {"from": sender, "msg": body_summary(sm.body)})
        if sm.body.MTYPE == "WISH":
            relay, entered = self.sync.handle_wish(sm.signer, sm.body.v)
            # The relayed wish goes out before any client reaction so the
            # per-sender wish sequence stays nondecreasing.
            if relay is not None:
                self.send_all(Wish(relay))
            if entered is not None:
                self.sim.trace(self.pid, tr.ENTER_VIEW, {"v": entered})
                self.node.on_new_view(entered)
        else:
            self.node.on_message(sm)

    def handle_broadcast(self, value) -> None:
        self.node.broadcast(value)


NODE_CLASSES = {
    "pbft-light": PbftLightReplica,
    "pbft-rotation": PbftRotationReplica,
    "hotstuff-light": HotStuffLightReplica,
    "toy-client": ToyClient,
    "consensus-sync": ConsensusSynchronizer,
}


class Simulation:
    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.config = config
        self.replica_params = ReplicaParams(
            n=config.n, f=config.f, delta_cap=config.delta_cap, rho=config.rho,
            tau=config.tau, t_broadcast=config.t_broadcast, batch=config.batch,
            init_dur_delivery=config.init_dur_delivery,
            init_dur_recovery=config.init_dur_recovery,
            latency_mode=config.latency_mode,
        )
        self.rng = random.Random(config.seed)
        self.auth = SigAuthority(frozenset(config.faulty_set))
        self.network = Network(config, self.rng)
        self.rates = {p: config.rate(p) for p in range(1, config.n + 1)}
        self.now = 0
        self._seq = 0
        self._heap: list = []
        self.events: list[tr.TraceEvent] = []
        self.crashed_at: dict[int, int] = {}
        directives: dict[int, dict] = {}
        for d in config.fault_plan:
            if d["kind"] == "crash":
                self.crashed_at[d["pid"]] = d.get("at", 0)
            else:
                directives[d["pid"]] = d
        self.shells: dict[int, ProcessShell] = {}
        from .adversary import make_node  # late import: adversary builds on protocols
        for pid in range(1, config.n + 1):
            shell = ProcessShell(self, pid, directives.get(pid))
            shell.node = make_node(config, shell, directives.get(pid))
            self.shells[pid] = shell

    # ---- clocks ----

    def local_clock(self, pid: int, t: int) -> int:
        return local_clock(self.rates[pid], self.config.gst, t)

    def when_local_at_least(self, pid: int, target: int) -> int:
        return real_when_local_at_least(self.rates[pid], self.config.gst, target)

    def when_local_elapsed(self, pid: int, duration: int) -> int:
        return self.when_local_at_least(pid, self.local_clock(pid, self.now) + duration)

    # ---- event plumbing ----

    def push(self, due: int, tag: str, payload) -> None:
        assert due >= self.now
        self._seq += 1
        heapq.heappush(self._heap, (due, self._seq, tag, payload))

    def trace(self, pid: int, kind: str, data: dict) -> None:
        self.events.append(tr.TraceEvent(self.now, pid, kind, data))

    def send(self, sender: int, dest: int, sm) -> None:
        due = self.network.deliver_time(sender, dest, self.now)
        if due is not None:
            self.push(due, "msg", (dest, sm, sender))

    def _alive(self, pid: int) -> bool:
        return not (pid in self.crashed_at and self.now >= self.crashed_at[pid])

    # ---- main loop ----

    def run(self) -> list[tr.TraceEvent]:
        cfg = self.config
        for pid in range(1, cfg.n + 1):
            self.push(cfg.start_times[pid - 1], "start", pid)
            self.push(self.when_local_at_least(pid, cfg.rho), "periodic", (pid, 1))
        for w in cfg.workload:
            from .bft_common import Value
            self.push(w["at"], "bcast", (w["pid"], Value(w["uid"], w.get("valid", True))))
        while self._heap:
            due, _, tag, payload = heapq.heappop(self._heap)
            if due > cfg.horizon:
                break
            self.now = due
            if tag == "start":
                if self._alive(payload):
                    self.shells[payload].handle_start()
            elif tag == "timer":
                pid, key, gen, duration = payload
                if self._alive(pid):
                    self.shells[pid].handle_timer(key, gen, duration)
            elif tag == "periodic":
                pid, k = payload
                if self._alive(pid):
                    self.shells[pid].handle_periodic()
                self.push(self.when_local_at_least(pid, (k + 1) * cfg.rho), "periodic", (pid, k + 1))
            elif tag == "msg":
                dest, sm, sender = payload
                if self._alive(dest):
                    self.shells[dest].handle_message(sm, sender)
            elif tag == "bcast":
                pid, value = payload
                if self._alive(pid):
                    self.shells[pid].handle_broadcast(value)
            else:
                raise AssertionError(f"unknown event tag {tag}")
        return self.events


def run_scenario(config: ScenarioConfig) -> list[tr.TraceEvent]:
    return Simulation(config).run()
