"""Derived timing statistics over a trace.

All quantities are folds over the event list, restricted to correct
processes, and partial: a value is None until the trace witnesses it.
Naming follows the convention used throughout the checker:

- enter/tm/tl: first entry per process and the earliest/latest first
  entries of a view among correct processes.
- adv/tam/talast: advance calls tagged with the view they were made
  from (0 before any view was entered).
- tae/taelast: per process, the time it either advances from v or
  enters a view above v; the latest such time when all correct
  processes have one.
- gst_bar: the earliest time by which every correct process has
  re-announced its highest wish after gst.
- catchup_view: the first view from which bounded entry is guaranteed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import trace as tr
from .config import ScenarioConfig


def is_progress_timer(timer_id: str) -> bool:
    """Timers whose expiry makes a replica give up on the current view."""
    return timer_id == "recovery" or timer_id.startswith("delivery")


def duration_caps(config: ScenarioConfig) -> tuple[int | None, int | None]:
    """(recovery cap, delivery cap) under capped-timeout mode, else None."""
    if not config.latency_mode:
        return (None, None)
    dc, t = config.delta_cap, config.t_broadcast
    if config.protocol == "pbft-light":
        return (6 * dc, 4 * dc)
    if config.protocol == "pbft-rotation":
        return (4 * dc, max(4 * dc, t + 3 * dc))
    if config.protocol == "hotstuff-light":
        return (4 * dc, max(5 * dc, t + 4 * dc))
    return (None, None)


@dataclass
class TraceMetrics:
    config: ScenarioConfig
    correct: tuple[int, ...]
    # view -> pid -> first entry time
    enter: dict[int, dict[int, int]] = field(default_factory=dict)
    # view -> pid -> first advance-from-view time
    adv: dict[int, dict[int, int]] = field(default_factory=dict)
    # view -> list of (t, pid) for every advance call, in trace order
    adv_events: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    # consensus view -> pid -> first notification time
    cs_enter: dict[int, dict[int, int]] = field(default_factory=dict)
    # pid -> ordered list of (t, position, uid, valid)
    delivered: dict[int, list[tuple[int, int, str, bool]]] = field(default_factory=dict)
    # (t, pid, uid, valid) per broadcast call
    broadcasts: list[tuple[int, int, str, bool]] = field(default_factory=list)
    # pid -> times of progress-timer expiries, ascending
    bumps: dict[int, list[int]] = field(default_factory=dict)
    # pid -> time of the start event's first observable action is not
    # traced directly; first advance or send serves as a started marker
    horizon: int = 0

    # ---- basic statistics ----

    def tm(self, v: int) -> int | None:
        entrants = self.enter.get(v)
        return min(entrants.values()) if entrants else None

    def tl(self, v: int) -> int | None:
        """Latest first entry among the correct processes that entered v."""
        entrants = self.enter.get(v)
        return max(entrants.values()) if entrants else None

    def all_entered(self, v: int) -> bool:
        entrants = self.enter.get(v, {})
        return all(p in entrants for p in self.correct)

    def tam(self, v: int) -> int | None:
        calls = self.adv.get(v)
        return min(calls.values()) if calls else None

    def talast(self, v: int) -> int | None:
        events = self.adv_events.get(v)
        return max(t for t, _ in events) if events else None

    def tae(self, v: int, pid: int) -> int | None:
        candidates = []
        if pid in self.adv.get(v, {}):
            candidates.append(self.adv[v][pid])
        higher = [ts[pid] for view, ts in self.enter.items() if view > v and pid in ts]
        if higher:
            candidates.append(min(higher))
        return min(candidates) if candidates else None

    def taelast(self, v: int) -> int | None:
        times = [self.tae(v, p) for p in self.correct]
        if any(t is None for t in times):
            return None
        return max(times)

    def max_entered_view(self) -> int:
        views = [v for v, ts in self.enter.items() if ts]
        return max(views) if views else 0

    # ---- derived quantities ----

    @property
    def gst_bar(self) -> int | None:
        t0 = self.tam(0)
        if t0 is None:
            return None
        return self.config.gst + self.config.rho if t0 < self.config.gst else t0

    @property
    def catchup_view(self) -> int | None:
        """First view with guaranteed bounded entry."""
        t0 = self.tam(0)
        if t0 is None:
            return None
        if t0 >= self.config.gst:
            return 1
        cutoff = self.config.gst + self.config.rho
        before = [v for v in self.enter if self.tm(v) is not None and self.tm(v) < cutoff]
        return max(before, default=0) + 1

    # ---- timeout reconstruction ----

    def durations_at(self, pid: int, t: int) -> tuple[int, int]:
        """(dur_recovery, dur_delivery) at process pid just before time t.

        Both grow by tau on every progress-timer expiry, subject to the
        capped-timeout mode limits.
        """
        n_bumps = sum(1 for b in self.bumps.get(pid, []) if b < t)
        rec_cap, del_cap = duration_caps(self.config)
        rec = self.config.init_dur_recovery + self.config.tau * n_bumps
        del_ = self.config.init_dur_delivery + self.config.tau * n_bumps
        # Caps apply on growth only; an initial value is kept as configured.
        if n_bumps > 0:
            if rec_cap is not None:
                rec = min(rec, rec_cap)
            if del_cap is not None:
                del_ = min(del_, del_cap)
        return rec, del_

    # ---- delivery lookups ----

    def deliver_time(self, pid: int, uid: str) -> int | None:
        for t, _, u, _ in self.delivered.get(pid, []):
            if u == uid:
                return t
        return None

    def deliver_at_position(self, pid: int, position: int) -> tuple[int, str] | None:
        for t, pos, uid, _ in self.delivered.get(pid, []):
            if pos == position:
                return t, uid
        return None


def compute_metrics(events: list[tr.TraceEvent], config: ScenarioConfig) -> TraceMetrics:
    m = TraceMetrics(config=config, correct=config.correct(), horizon=config.horizon)
    correct = set(m.correct)
    for e in events:
        if e.pid not in correct:
            continue
        if e.kind == tr.ENTER_VIEW:
            m.enter.setdefault(e.data["v"], {}).setdefault(e.pid, e.t)
        elif e.kind == tr.ADVANCE_CALL:
            v = e.data["v"]
            m.adv.setdefault(v, {}).setdefault(e.pid, e.t)
            m.adv_events.setdefault(v, []).append((e.t, e.pid))
        elif e.kind == tr.ENTER_CONSENSUS_VIEW:
            m.cs_enter.setdefault(e.data["v"], {}).setdefault(e.pid, e.t)
        elif e.kind == tr.DELIVER:
            m.delivered.setdefault(e.pid, []).append(
                (e.t, e.data["position"], e.data["value"], e.data["valid"]))
        elif e.kind == tr.BROADCAST_CALL:
            m.broadcasts.append((e.t, e.pid, e.data["value"], e.data["valid"]))
        elif e.kind == tr.TIMER_EXPIRE and is_progress_timer(e.data["id"]):
            m.bumps.setdefault(e.pid, []).append(e.t)
    return m
