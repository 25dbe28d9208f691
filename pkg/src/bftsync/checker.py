"""Offline trace verification.

Every checkable guarantee of the stack is expressed as a named property
over a finished trace. A property report carries a verdict:

- ``pass``: all instances of the property found in the trace hold.
- ``fail``: a concrete counterexample was found; it ships as witness
  events.
- ``na``: the property's premises never held in this trace, or the
  horizon is too short to resolve a single instance; the detail says
  why, so an unmet premise is never mistaken for a success.

Eventuality properties (startup, progress, liveness) are checked as
bounded-horizon implications: the conclusion must appear before a
deadline the trace can actually resolve. Deadlines follow the known
timing model (post-stabilization delay bound and retransmission
period), so a miss is a real violation, not an artifact of truncation.

The checker is pure: it never simulates, and the same trace with the
same configuration always yields the same reports.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import trace as tr
from .bft_common import BUFFERED_TYPES, NOP_UID, leader
from .config import ScenarioConfig
from .consensus_sync import default_duration
from .metrics import TraceMetrics, compute_metrics, is_progress_timer

PASS = "pass"
FAIL = "fail"
NA = "na"

VOTE_KINDS = {"prepared": "PREPARE", "precommitted": "PRECOMMIT", "committed": "COMMIT"}
BFT_PROTOCOLS = ("pbft-light", "pbft-rotation", "hotstuff-light")


@dataclass
class CheckReport:
    prop: str
    verdict: str
    detail: str = ""
    witness: list[dict] = field(default_factory=list)
    bounds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"property": self.prop, "verdict": self.verdict, "detail": self.detail,
                "witness": self.witness, "bounds": self.bounds}

    def line(self) -> str:
        tail = f" [{self.detail}]" if self.detail else ""
        return f"{self.verdict.upper():4s} {self.prop}{tail}"


def _ev(e: tr.TraceEvent) -> dict:
    return {"t": e.t, "pid": e.pid, "kind": e.kind, "data": e.data}


def _passed(prop, detail="", bounds=None):
    return CheckReport(prop, PASS, detail, [], bounds or {})


def _failed(prop, detail, witness, bounds=None):
    events = [_ev(e) for e in witness if e is not None]
    return CheckReport(prop, FAIL, detail, events, bounds or {})


def _na(prop, reason, bounds=None):
    return CheckReport(prop, NA, reason, [], bounds or {})


class TraceFacts:
    """Single-pass indexes over raw events, shared by the property checks.

    Message-level facts (votes, proposals, certificates) are collected
    from all processes so that quorums can be cross-checked against what
    was actually sent; timeline facts are restricted to correct
    processes, whose guarantees are under test.
    """

    def __init__(self, events: list[tr.TraceEvent], config: ScenarioConfig):
        correct = set(config.correct())
        self.enter_seq: dict[int, list[tr.TraceEvent]] = {}
        self.cs_seq: dict[int, list[tr.TraceEvent]] = {}
        self.enter_ev: dict[tuple[int, int], tr.TraceEvent] = {}
        self.cs_ev: dict[tuple[int, int], tr.TraceEvent] = {}
        self.adv_ev: dict[tuple[int, int], tr.TraceEvent] = {}
        self.wish_sends: dict[int, list[tr.TraceEvent]] = {}
        # (vote type, view, position, hash) -> sender pid -> first send
        self.vote_sends: dict[tuple, dict[int, tr.TraceEvent]] = {}
        # (view, position) -> proposer pid -> (uid, first send)
        self.proposals: dict[tuple[int, int], dict[int, tuple[str, tr.TraceEvent]]] = {}
        self.uid_valid: dict[str, bool] = {}
        # (kind, view, position, hash, signers) -> first event carrying it
        self.certs: dict[tuple, tr.TraceEvent] = {}
        # (event, view at receipt, entry time of that view) per BROADCAST receipt
        self.recv_broadcasts: dict[int, list[tuple[tr.TraceEvent, int, int]]] = {}
        self.mem_samples: list[tr.TraceEvent] = []
        # progress-timer (recovery/delivery) expiry ticks per correct process
        self.progress_expiry: dict[int, list[int]] = {}
        self.bcast_ev: dict[str, tr.TraceEvent] = {}
        self.deliver_seq: dict[int, list[tr.TraceEvent]] = {}
        self.deliver_uid: dict[tuple[int, str], tr.TraceEvent] = {}
        self.deliver_pos: dict[tuple[int, int], tr.TraceEvent] = {}

        cur_view: dict[int, tuple[int, int]] = {}
        for e in events:
            if e.kind == tr.SEND:
                self._index_msg(e, e.data["msg"], correct)
            elif e.kind == tr.RECEIVE:
                msg = e.data["msg"]
                self._index_certs(e, msg)
                self._index_value(msg)
                if msg["type"] == "BROADCAST" and e.pid in correct:
                    view, te = cur_view.get(e.pid, (0, 0))
                    self.recv_broadcasts.setdefault(e.pid, []).append((e, view, te))
            elif e.kind == tr.ENTER_VIEW and e.pid in correct:
                self.enter_seq.setdefault(e.pid, []).append(e)
                self.enter_ev.setdefault((e.data["v"], e.pid), e)
                cur_view[e.pid] = (e.data["v"], e.t)
            elif e.kind == tr.ENTER_CONSENSUS_VIEW and e.pid in correct:
                self.cs_seq.setdefault(e.pid, []).append(e)
                self.cs_ev.setdefault((e.data["v"], e.pid), e)
            elif e.kind == tr.ADVANCE_CALL and e.pid in correct:
                self.adv_ev.setdefault((e.data["v"], e.pid), e)
            elif e.kind == tr.BROADCAST_CALL:
                self.uid_valid.setdefault(e.data["value"], e.data["valid"])
                self.bcast_ev.setdefault(e.data["value"], e)
            elif e.kind == tr.DELIVER and e.pid in correct:
                self.deliver_seq.setdefault(e.pid, []).append(e)
                self.deliver_uid.setdefault((e.pid, e.data["value"]), e)
                self.deliver_pos.setdefault((e.pid, e.data["position"]), e)
            elif e.kind == tr.MEM_SAMPLE and e.pid in correct:
                self.mem_samples.append(e)
            elif (e.kind == tr.TIMER_EXPIRE and e.pid in correct
                  and is_progress_timer(e.data["id"])):
                self.progress_expiry.setdefault(e.pid, []).append(e.t)

    def _index_msg(self, e, msg, correct):
        t = msg["type"]
        if t == "WISH":
            if e.pid in correct:
                self.wish_sends.setdefault(e.pid, []).append(e)
            return
        if t in ("PREPARE", "PRECOMMIT", "COMMIT"):
            key = (t, msg["v"], msg["k"], msg["h"])
            self.vote_sends.setdefault(key, {}).setdefault(e.pid, e)
        elif t == "PREPREPARE":
            slot = self.proposals.setdefault((msg["v"], msg["k"]), {})
            slot.setdefault(e.pid, (msg["value"], e))
        self._index_certs(e, msg)
        self._index_value(msg)

    def _index_certs(self, e, msg):
        found = []
        if msg["type"] == "DECISION":
            found.append(msg["cert"])
        elif "certs" in msg:
            found.extend(msg["certs"])
        for c in found:
            key = (c["kind"], c["v"], c["k"], c["h"], tuple(c["signers"]))
            self.certs.setdefault(key, e)

    def _index_value(self, msg):
        if msg["type"] in ("BROADCAST", "FORWARD", "PREPREPARE"):
            self.uid_valid.setdefault(msg["value"], msg["valid"])

    def first_advances(self, v: int) -> list[tr.TraceEvent]:
        """Advance calls from view v on the earliest tick any happened."""
        events = [e for (vv, _), e in self.adv_ev.items() if vv == v]
        if not events:
            return []
        t0 = min(e.t for e in events)
        return sorted((e for e in events if e.t == t0), key=lambda e: e.pid)

    def some_enter_event(self, v: int) -> tr.TraceEvent | None:
        cands = [e for (vv, _), e in self.enter_ev.items() if vv == v]
        return min(cands, key=lambda e: (e.t, e.pid)) if cands else None


# ---------------------------------------------------------------------------
# synchronizer suite


def check_synchronizer(events, config, m: TraceMetrics,
                       facts: TraceFacts | None = None,
                       d: int | None = None) -> list[CheckReport]:
    facts = facts or TraceFacts(events, config)
    d = 2 * config.delta if d is None else d
    return [
        _check_entry_monotonic(facts),
        _check_validity(m, facts),
        _check_no_skip(m, facts),
        _check_wish_monotonic(facts),
        _check_wish_form(facts),
        _check_bounded_entry(config, m, facts, d),
        _check_startup(config, m, facts),
        _check_progress(config, m, facts),
        _check_bounded_space(config, facts),
    ]


def _check_entry_monotonic(facts) -> CheckReport:
    total = 0
    for pid, seq in sorted(facts.enter_seq.items()):
        total += len(seq)
        for prev, cur in zip(seq, seq[1:]):
            if cur.data["v"] <= prev.data["v"] or cur.t < prev.t:
                return _failed("view-entry-monotonic",
                               f"p{pid} entered view {cur.data['v']} after "
                               f"{prev.data['v']}", [prev, cur])
    return _passed("view-entry-monotonic", f"{total} entries in order")


def _check_validity(m, facts) -> CheckReport:
    checked = 0
    for w in sorted(m.enter):
        tam_prev = m.tam(w - 1)
        for pid in sorted(m.enter[w]):
            checked += 1
            te = m.enter[w][pid]
            if tam_prev is None or tam_prev >= te:
                got = "none" if tam_prev is None else str(tam_prev)
                return _failed(
                    "advance-before-entry",
                    f"p{pid} entered view {w} at {te} but the first advance "
                    f"from view {w - 1} is {got}",
                    [facts.enter_ev[(w, pid)]],
                    {"first_advance": tam_prev, "entry": te})
    return _passed("advance-before-entry", f"{checked} entries justified")


def _check_no_skip(m, facts) -> CheckReport:
    entered = sorted(m.enter)
    if not entered:
        return _na("no-view-skipped", "no view was entered")
    vmax = entered[-1]
    prev_tm = 0
    for v in range(1, vmax + 1):
        tm = m.tm(v)
        if tm is None:
            return _failed("no-view-skipped",
                           f"view {vmax} was entered but view {v} never was",
                           [facts.some_enter_event(vmax)],
                           {"missing_view": v, "max_view": vmax})
        if v > 1 and tm <= prev_tm:
            return _failed("no-view-skipped",
                           f"first entry of view {v} at {tm} is not after "
                           f"view {v - 1} at {prev_tm}",
                           [facts.some_enter_event(v - 1), facts.some_enter_event(v)],
                           {"view": v, "tm": tm, "tm_prev": prev_tm})
        prev_tm = tm
    return _passed("no-view-skipped", f"views 1..{vmax} entered in order")


def _check_wish_monotonic(facts) -> CheckReport:
    total = 0
    for pid, seq in sorted(facts.wish_sends.items()):
        total += len(seq)
        for prev, cur in zip(seq, seq[1:]):
            if cur.data["msg"]["v"] < prev.data["msg"]["v"]:
                return _failed("wish-monotonic",
                               f"p{pid} sent wish {cur.data['msg']['v']} after "
                               f"{prev.data['msg']['v']}", [prev, cur])
    if total == 0:
        return _na("wish-monotonic", "no wishes from correct processes")
    return _passed("wish-monotonic", f"{total} wish sends nondecreasing")


def _check_wish_form(facts) -> CheckReport:
    total = 0
    for pid, seq in sorted(facts.wish_sends.items()):
        for e in seq:
            total += 1
            v, vp = e.data["msg"]["v"], e.data["msg"].get("sender_view_plus")
            if vp is None or v not in (vp, vp + 1):
                return _failed("wish-form",
                               f"p{pid} sent wish {v} with announced view {vp}",
                               [e], {"wish": v, "view_plus": vp})
    if total == 0:
        return _na("wish-form", "no wishes from correct processes")
    return _passed("wish-form", f"{total} wishes within one of the announced view")


def _check_bounded_entry(config, m, facts, d) -> CheckReport:
    v0 = m.catchup_view
    if v0 is None:
        return _na("bounded-entry", "no advance from view 0 observed")
    checked, released, unresolved = 0, 0, 0
    for v in sorted(m.enter):
        if v < v0:
            continue
        tm = m.tm(v)
        deadline = tm + d
        tam = m.tam(v)
        if tam is not None and tam < deadline:
            released += 1  # an early advance releases the guarantee for v
            continue
        if deadline > m.horizon:
            unresolved += 1
            continue
        checked += 1
        for pid in m.correct:
            te = m.enter[v].get(pid)
            if te is None or te > deadline:
                got = "never" if te is None else str(te)
                return _failed(
                    "bounded-entry",
                    f"view {v} was first entered at {tm} but p{pid} entered at "
                    f"{got} (deadline {deadline})",
                    [facts.some_enter_event(v), facts.enter_ev.get((v, pid))],
                    {"view": v, "tm": tm, "d": d, "deadline": deadline,
                     "entry": te})
    bounds = {"d": d, "catchup_view": v0, "views_checked": checked,
              "advance_released": released, "past_horizon": unresolved}
    if checked == 0:
        return _na("bounded-entry", "no view at or above the catch-up view was "
                   "resolvable within the horizon", bounds)
    return _passed("bounded-entry", f"{checked} views settled within {d}", bounds)


def _advance_witness(facts, v, pids):
    return [facts.adv_ev[(v, pid)] for pid in pids if (v, pid) in facts.adv_ev]


def _check_startup(config, m, facts) -> CheckReport:
    starters = m.adv.get(0, {})
    need = config.f + 1
    if len(starters) < need:
        return _na("startup", f"only {len(starters)} processes advanced from "
                   f"view 0, premise needs {need}")
    t_quorum = sorted(starters.values())[need - 1]
    deadline = max(m.gst_bar, t_quorum) + 2 * config.delta
    tm1 = m.tm(1)
    if tm1 is not None:
        return _passed("startup", f"view 1 first entered at {tm1}",
                       {"tm1": tm1, "deadline": deadline})
    if deadline > m.horizon:
        return _na("startup", f"view 1 not yet due: deadline {deadline} is past "
                   f"the horizon {m.horizon}")
    return _failed("startup",
                   f"{need} processes advanced from view 0 by {t_quorum} but "
                   f"view 1 was never entered (deadline {deadline})",
                   _advance_witness(facts, 0, sorted(starters)),
                   {"deadline": deadline, "advances": len(starters)})


def _check_progress(config, m, facts) -> CheckReport:
    need = config.f + 1
    checked, pending = 0, 0
    for v in sorted(m.adv):
        advancers = m.adv[v]
        if len(advancers) < need or v == 0:
            continue  # view 0 is the startup property's job
        t_quorum = sorted(advancers.values())[need - 1]
        deadline = max(m.gst_bar, t_quorum) + 2 * config.delta
        if m.tm(v + 1) is not None:
            checked += 1
            continue
        if deadline > m.horizon:
            pending += 1
            continue
        return _failed("entry-progress",
                       f"{need} processes advanced from view {v} by {t_quorum} "
                       f"but view {v + 1} was never entered (deadline {deadline})",
                       _advance_witness(facts, v, sorted(advancers)),
                       {"view": v, "deadline": deadline})
    if checked == 0:
        return _na("entry-progress", "no view gathered enough advance calls "
                   "within the horizon", {"pending": pending})
    return _passed("entry-progress", f"{checked} advance quorums led to the next "
                   "view", {"views_checked": checked, "pending": pending})


def _check_bounded_space(config, facts) -> CheckReport:
    if not facts.mem_samples:
        return _na("bounded-space", "memory sampling disabled")
    sync_limit = config.n
    future_limit = len(BUFFERED_TYPES) * config.n
    max_sync = max_future = 0
    for e in facts.mem_samples:
        max_sync = max(max_sync, e.data["sync_entries"])
        max_future = max(max_future, e.data["future_buffer"])
        if e.data["sync_entries"] > sync_limit or e.data["future_buffer"] > future_limit:
            return _failed("bounded-space",
                           f"p{e.pid} exceeded a state bound "
                           f"(sync {e.data['sync_entries']}/{sync_limit}, "
                           f"future {e.data['future_buffer']}/{future_limit})", [e],
                           {"sync_limit": sync_limit, "future_limit": future_limit})
    return _passed("bounded-space",
                   f"{len(facts.mem_samples)} samples within bounds",
                   {"max_sync": max_sync, "sync_limit": sync_limit,
                    "max_future": max_future, "future_limit": future_limit})


# ---------------------------------------------------------------------------
# latency suite


def check_latency(events, config, m: TraceMetrics,
                  facts: TraceFacts | None = None) -> list[CheckReport]:
    facts = facts or TraceFacts(events, config)
    out = [_check_entry_latency_first(config, m, facts),
           _check_entry_latency_last(config, m, facts)]
    if config.protocol == "pbft-light":
        out.append(_check_recovery_latency_fwd(config, m, facts))
        out.append(_check_good_case(config, m, facts))
        out.append(_check_view_stability(config, m, facts))
        out.append(_check_completeness(config, m, facts))
    elif config.protocol == "pbft-rotation":
        out.append(_check_recovery_latency_rot(config, m, facts))
        out.append(_check_leader_change(config, m, facts))
        out.append(_check_view_stability(config, m, facts))
    elif config.protocol == "hotstuff-light":
        out.append(_check_view_stability(config, m, facts))
    return out


def _check_entry_latency_first(config, m, facts) -> CheckReport:
    tam0 = m.tam(0)
    if tam0 is None:
        return _na("entry-latency-first", "no advance from view 0 observed")
    if tam0 >= config.gst:
        return _na("entry-latency-first", "first advance happened after "
                   "stabilization; the post-stabilization bound applies instead")
    checked = 0
    for v in sorted(m.enter):
        bound = max(m.tm(v), config.gst + config.rho) + 2 * config.delta
        for pid, te in sorted(m.enter[v].items()):
            checked += 1
            if te > bound:
                return _failed(
                    "entry-latency-first",
                    f"p{pid} entered view {v} at {te}, past the bound {bound}",
                    [facts.enter_ev[(v, pid)]],
                    {"view": v, "tm": m.tm(v), "bound": bound, "entry": te})
    return _passed("entry-latency-first", f"{checked} entries within bound")


def _check_entry_latency_last(config, m, facts) -> CheckReport:
    if any(m.tae(0, pid) is None for pid in m.correct):
        return _na("entry-latency-last", "not every correct process advanced "
                   "from or moved past view 0")
    tam0 = m.tam(0)
    checked, unresolved = 0, 0
    for w in sorted(m.enter):
        v = w - 1
        tlast = m.taelast(v)
        if tlast is None:
            unresolved += 1
            continue
        if tam0 < config.gst:
            bound = max(tlast, config.gst + config.rho) + config.delta
        else:
            bound = tlast + config.delta
        for pid, te in sorted(m.enter[w].items()):
            checked += 1
            if te > bound:
                return _failed(
                    "entry-latency-last",
                    f"p{pid} entered view {w} at {te}, past the bound {bound} "
                    f"set by the last advance from view {v} at {tlast}",
                    [facts.enter_ev[(w, pid)]],
                    {"view": w, "taelast": tlast, "bound": bound, "entry": te})
    if checked == 0:
        return _na("entry-latency-last", "no entered view had every correct "
                   "process advance from its predecessor",
                   {"unresolved": unresolved})
    return _passed("entry-latency-last", f"{checked} entries within bound",
                   {"unresolved": unresolved})


def _starts(config, before_gst: bool) -> bool:
    starts = [config.start_times[pid - 1] for pid in config.correct()]
    return all(s < config.gst for s in starts) if before_gst \
        else all(s >= config.gst for s in starts)


def _durations_at_gst_above(config, m, rec_min, del_min) -> int | None:
    """First correct pid whose reconstructed timeouts at GST miss the floor."""
    for pid in m.correct:
        rec, del_ = m.durations_at(pid, config.gst)
        if rec <= rec_min or del_ <= del_min:
            return pid
    return None


def _check_recovery_latency_fwd(config, m, facts) -> CheckReport:
    prop = "recovery-latency"
    dlt, cap, rho = config.delta, config.delta_cap, config.rho
    if not config.latency_mode:
        return _na(prop, "timeout caps disabled; the recovery bound needs them")
    if not _starts(config, before_gst=True):
        return _na(prop, "premise unmet: not every correct process starts "
                   "before stabilization")
    bad = _durations_at_gst_above(config, m, 6 * dlt, 4 * dlt)
    if bad is not None:
        return _na(prop, f"premise unmet: p{bad} timeouts at stabilization "
                   "are not above 6x/4x the actual delay")
    v0 = m.catchup_view
    if v0 is None:
        return _na(prop, "no advance from view 0 observed")
    if leader(v0, config.n) in config.faulty_set:
        return _na(prop, f"premise unmet: leader of view {v0} is faulty")
    payloads = [(t, pid, uid) for t, pid, uid, valid in m.broadcasts
                if t < config.gst and valid]
    if not payloads:
        return _na(prop, "premise unmet: nothing was broadcast before "
                   "stabilization")
    bound = (config.gst + rho + max(rho + dlt, 6 * cap) + 4 * cap
             + max(rho, dlt) + 7 * dlt)
    if bound > m.horizon:
        return _na(prop, f"bound {bound} is past the horizon {m.horizon}")
    for t, src, uid in payloads:
        for pid in m.correct:
            got = m.deliver_time(pid, uid)
            if got is None or got > bound:
                return _failed(
                    prop,
                    f"'{uid}' broadcast by p{src} at {t} was delivered by p{pid} "
                    f"at {'never' if got is None else got}, past the bound "
                    f"{bound}",
                    [facts.bcast_ev.get(uid), facts.deliver_uid.get((pid, uid))],
                    {"bound": bound, "value": uid, "delivered": got})
    return _passed(prop, f"{len(payloads)} pre-stabilization broadcasts "
                   f"delivered by {bound}", {"bound": bound, "recovery_view": v0})


def _check_recovery_latency_rot(config, m, facts) -> CheckReport:
    prop = "recovery-latency"
    dlt, cap, rho = config.delta, config.delta_cap, config.rho
    t_b, batch = config.t_broadcast, config.batch
    if not config.latency_mode:
        return _na(prop, "timeout caps disabled; the recovery bound needs them")
    if not _starts(config, before_gst=True):
        return _na(prop, "premise unmet: not every correct process starts "
                   "before stabilization")
    bad = _durations_at_gst_above(config, m, 4 * dlt, max(4 * dlt, t_b + 3 * dlt))
    if bad is not None:
        return _na(prop, f"premise unmet: p{bad} timeouts at stabilization are "
                   "too low")
    v0 = m.catchup_view
    if v0 is None:
        return _na(prop, "no advance from view 0 observed")
    slot_time = max(4 * cap, t_b + 3 * cap)
    bound = config.gst + rho + 4 * cap + batch * slot_time + 3 * dlt
    if bound > m.horizon:
        return _na(prop, f"bound {bound} is past the horizon {m.horizon}")
    for pid in m.correct:
        te = m.enter.get(v0, {}).get(pid)
        if te is None or te > bound:
            return _failed(
                prop,
                f"p{pid} entered the recovery view {v0} at "
                f"{'never' if te is None else te}, past the bound {bound}",
                [facts.some_enter_event(v0), facts.enter_ev.get((v0, pid))],
                {"view": v0, "bound": bound, "entry": te})
    lead = leader(v0, config.n)
    if lead in config.faulty_set:
        return _passed(prop, f"all correct entered view {v0} by {bound}; "
                       "proposal clause skipped, leader faulty",
                       {"view": v0, "bound": bound})
    margin = bound + batch * slot_time + 4 * dlt
    slots = range((v0 - 1) * batch + 1, v0 * batch + 1)
    missing = [k for k in slots if lead not in facts.proposals.get((v0, k), {})]
    if missing:
        return _failed(prop,
                       f"correct leader p{lead} never proposed slot {missing[0]} "
                       f"of view {v0}", [facts.some_enter_event(v0)],
                       {"view": v0, "slot": missing[0]})
    if margin > m.horizon:
        return _na(prop, f"entry clause held by {bound}, but resolving the "
                   f"batch delivery clause needs horizon {margin}",
                   {"view": v0, "bound": bound, "needed_horizon": margin})
    for k in slots:
        uid, prop_ev = facts.proposals[(v0, k)][lead]
        if uid == NOP_UID:
            continue
        for pid in m.correct:
            if m.deliver_time(pid, uid) is None:
                return _failed(
                    prop,
                    f"slot {k} value '{uid}' proposed by the correct leader of "
                    f"view {v0} was never delivered by p{pid}", [prop_ev],
                    {"view": v0, "slot": k, "value": uid})
    return _passed(prop, f"view {v0} settled by {bound} and its batch was "
                   "delivered", {"view": v0, "bound": bound})


def _check_good_case(config, m, facts) -> CheckReport:
    prop = "good-case-latency"
    dlt = config.delta
    if not config.latency_mode:
        return _na(prop, "first-view fast path disabled; the 4-step bound "
                   "needs it")
    if not _starts(config, before_gst=False):
        return _na(prop, "premise unmet: some correct process starts before "
                   "stabilization")
    if config.init_dur_recovery <= 5 * dlt or config.init_dur_delivery <= 4 * dlt:
        return _na(prop, "premise unmet: initial timeouts are not above "
                   "5x/4x the actual delay")
    v0 = m.catchup_view
    if v0 is None:
        return _na(prop, "no advance from view 0 observed")
    if v0 != 1:
        return _failed(prop, f"catch-up view is {v0}, expected 1 for a "
                       "post-stabilization start", [facts.some_enter_event(v0)],
                       {"catchup_view": v0})
    tlast0 = m.taelast(0)
    if tlast0 is None:
        return _na(prop, "not every correct process advanced from view 0")
    entry_bound = tlast0 + dlt
    if entry_bound > m.horizon:
        return _na(prop, f"entry bound {entry_bound} is past the horizon")
    for pid in m.correct:
        te = m.enter.get(1, {}).get(pid)
        if te is None or te > entry_bound:
            return _failed(
                prop,
                f"p{pid} entered view 1 at {'never' if te is None else te}, "
                f"past the bound {entry_bound}",
                [facts.some_enter_event(1), facts.enter_ev.get((1, pid))],
                {"taelast0": tlast0, "entry_bound": entry_bound, "entry": te})
    if leader(1, config.n) in config.faulty_set:
        return _passed(prop, f"view 1 settled by {entry_bound}; delivery clause "
                       "skipped, leader faulty", {"entry_bound": entry_bound})
    checked, unresolved = 0, 0
    for t, src, uid, valid in m.broadcasts:
        if t < config.gst or not valid:
            continue
        deadline = max(t, entry_bound) + 4 * dlt
        if deadline > m.horizon:
            unresolved += 1
            continue
        checked += 1
        for pid in m.correct:
            got = m.deliver_time(pid, uid)
            if got is None or got > deadline:
                return _failed(
                    prop,
                    f"'{uid}' broadcast at {t} was delivered by p{pid} at "
                    f"{'never' if got is None else got}, past the bound "
                    f"{deadline}",
                    [facts.bcast_ev.get(uid), facts.deliver_uid.get((pid, uid))],
                    {"value": uid, "deadline": deadline, "delivered": got})
    if checked == 0 and unresolved > 0:
        return _na(prop, f"entry clause held by {entry_bound}, but no broadcast "
                   "was resolvable within the horizon",
                   {"entry_bound": entry_bound, "unresolved": unresolved})
    return _passed(prop, f"view 1 settled by {entry_bound}; {checked} broadcasts "
                   "delivered within four steps",
                   {"entry_bound": entry_bound, "broadcasts_checked": checked})


def _check_leader_change(config, m, facts) -> CheckReport:
    prop = "leader-change-latency"
    dlt, t_b, batch = config.delta, config.t_broadcast, config.batch
    if not _starts(config, before_gst=False):
        return _na(prop, "premise unmet: some correct process starts before "
                   "stabilization")
    if config.init_dur_recovery <= 4 * dlt or \
            config.init_dur_delivery <= max(4 * dlt, t_b + 3 * dlt):
        return _na(prop, "premise unmet: initial timeouts are too low")
    crashed = sorted(
        d["pid"] for d in config.fault_plan
        if d["kind"] == "crash" and d.get("at", 0) <= config.start_times[d["pid"] - 1])
    if not crashed:
        return _na(prop, "premise unmet: no initially crashed process")
    led = [v for v in sorted(m.enter) if leader(v, config.n) in crashed]
    if not led:
        return _na(prop, "premise unmet: no entered view is led by the crashed "
                   "process")
    v = led[0]
    if not m.all_entered(v):
        return _na(prop, f"view {v} led by the crashed process was not entered "
                   "by every correct process within the horizon")
    # "Advanced on a full batch" in every earlier view amounts to: the process
    # left each of them, and no progress timer fired on the way (timer expiry
    # is the only other reason to advance here).
    for pid in m.correct:
        te_v = m.enter[v][pid]
        if any(t <= te_v for t in facts.progress_expiry.get(pid, [])):
            return _na(prop, f"premise unmet: a timer expired at p{pid} before "
                       f"it reached view {v}")
        for vp in range(1, v):
            if (vp, pid) not in facts.adv_ev:
                return _na(prop, f"premise unmet: p{pid} never advanced from "
                           f"view {vp}")
    r_init = config.init_dur_recovery
    bound = m.tl(v) + r_init + dlt
    if bound > m.horizon:
        return _na(prop, f"bound {bound} is past the horizon {m.horizon}")
    for pid in m.correct:
        te = m.enter.get(v + 1, {}).get(pid)
        if te is None or te > bound:
            return _failed(
                prop,
                f"p{pid} entered view {v + 1} at {'never' if te is None else te},"
                f" past the bound {bound} after the crashed leader of view {v}",
                [facts.enter_ev[(v, pid)], facts.enter_ev.get((v + 1, pid))],
                {"view": v, "tl": m.tl(v), "bound": bound, "entry": te})
    lead = leader(v + 1, config.n)
    bounds = {"view": v, "tl": m.tl(v), "recovery_timeout": r_init, "bound": bound}
    if lead in config.faulty_set:
        return _passed(prop, f"view {v + 1} settled by {bound}; proposal clause "
                       "skipped, next leader faulty", bounds)
    margin = bound + batch * max(4 * dlt, t_b + 3 * dlt) + 4 * dlt
    slots = range(v * batch + 1, (v + 1) * batch + 1)
    missing = [k for k in slots if lead not in facts.proposals.get((v + 1, k), {})]
    if missing:
        return _failed(prop,
                       f"correct leader p{lead} never proposed slot {missing[0]} "
                       f"of view {v + 1}", [facts.some_enter_event(v + 1)],
                       {"view": v + 1, "slot": missing[0]})
    if margin > m.horizon:
        return _na(prop, f"entry clause held by {bound}, but resolving the "
                   f"batch delivery clause needs horizon {margin}",
                   dict(bounds, needed_horizon=margin))
    for k in slots:
        uid, prop_ev = facts.proposals[(v + 1, k)][lead]
        if uid == NOP_UID:
            continue
        for pid in m.correct:
            if m.deliver_time(pid, uid) is None:
                return _failed(
                    prop,
                    f"slot {k} value '{uid}' proposed after the leader change "
                    f"was never delivered by p{pid}", [prop_ev],
                    {"slot": k, "value": uid})
    return _passed(prop, f"view {v + 1} settled by {bound} and the new leader's "
                   "batch was delivered", bounds)


def _stability_floors(config) -> tuple[int, int]:
    dlt, t_b = config.delta, config.t_broadcast
    if config.protocol == "pbft-light":
        return 6 * dlt, 4 * dlt
    if config.protocol == "pbft-rotation":
        return 4 * dlt, max(4 * dlt, t_b + 3 * dlt)
    return 4 * dlt, max(5 * dlt, t_b + 4 * dlt)


def _check_view_stability(config, m, facts) -> CheckReport:
    prop = "view-stability"
    v0 = m.catchup_view
    if v0 is None:
        return _na(prop, "no advance from view 0 observed")
    rec_min, del_min = _stability_floors(config)
    rotation = config.protocol in ("pbft-rotation", "hotstuff-light")
    checked = 0
    for v in sorted(m.enter):
        if v < v0 or m.tm(v) < config.gst:
            continue
        if leader(v, config.n) in config.faulty_set:
            continue
        entrant_durs = [m.durations_at(pid, te + 1)
                        for pid, te in m.enter[v].items()]
        if any(rec <= rec_min or del_ <= del_min for rec, del_ in entrant_durs):
            continue
        checked += 1
        first = facts.first_advances(v)
        if not first:
            continue
        if not rotation:
            e = first[0]
            return _failed(
                prop,
                f"p{e.pid} advanced from the stable view {v} at {e.t} although "
                f"its leader is correct and timeouts were above "
                f"{rec_min}/{del_min}", [e], {"view": v, "advance": e.t})
        # Leader rotation advances on purpose once the batch is done; what the
        # accuracy bound forbids is a timer expiry driving the first advance.
        timered = [e for e in first
                   if e.t in facts.progress_expiry.get(e.pid, [])]
        if len(timered) == len(first):
            e = timered[0]
            return _failed(
                prop,
                f"the first advance from stable view {v} (p{e.pid} at {e.t}) "
                f"was driven by a timer expiry", [e],
                {"view": v, "advance": e.t})
    if checked == 0:
        return _na(prop, "no stable view with a correct leader and high enough "
                   "timeouts was entered")
    return _passed(prop, f"{checked} stable views held",
                   {"views_checked": checked, "floors": [rec_min, del_min]})


def _check_completeness(config, m, facts) -> CheckReport:
    prop = "advance-completeness"
    checked, unresolved = 0, 0
    for pid in m.correct:
        for e, v, te in facts.recv_broadcasts.get(pid, []):
            uid = e.data["msg"]["value"]
            if v == 0 or not e.data["msg"]["valid"]:
                continue
            rec, del_ = m.durations_at(pid, te + 1)
            deadline = max(e.t, te + rec) + del_
            if deadline > m.horizon:
                unresolved += 1
                continue
            got = m.deliver_time(pid, uid)
            if got is not None and got <= deadline:
                checked += 1
                continue
            tae = m.tae(v, pid)
            if tae is None or tae > deadline:
                return _failed(
                    prop,
                    f"p{pid} received '{uid}' at {e.t} in view {v}, neither "
                    f"delivered it nor gave up on the view by {deadline}", [e],
                    {"view": v, "deadline": deadline, "delivered": got,
                     "gave_up": tae})
            checked += 1
    if checked == 0:
        return _na(prop, "no broadcast receipt was resolvable within the horizon",
                   {"unresolved": unresolved})
    return _passed(prop, f"{checked} receipts delivered or escalated in time",
                   {"receipts_checked": checked, "unresolved": unresolved})


# ---------------------------------------------------------------------------
# atomic broadcast suite


def check_atomic_broadcast(events, config, m: TraceMetrics,
                           facts: TraceFacts | None = None,
                           liveness_deadline: int | None = None) -> list[CheckReport]:
    facts = facts or TraceFacts(events, config)
    return [
        _check_integrity(facts),
        _check_external_validity(facts),
        _check_ordering(m, facts),
        _check_deliver_liveness(config, m, facts, liveness_deadline),
        _check_cert_backing(config, m, facts),
        _check_cert_values(facts),
        _check_prepared_agreement(config, facts),
        _check_decision_agreement(config, facts),
    ]


def _check_integrity(facts) -> CheckReport:
    total = 0
    for pid, seq in sorted(facts.deliver_seq.items()):
        seen: set[str] = set()
        last_pos = 0
        for e in seq:
            total += 1
            uid, pos = e.data["value"], e.data["position"]
            if uid == NOP_UID:
                return _failed("deliver-integrity",
                               f"p{pid} delivered a placeholder at position "
                               f"{pos}", [e])
            if uid in seen:
                return _failed("deliver-integrity",
                               f"p{pid} delivered '{uid}' twice",
                               [facts.deliver_uid[(pid, uid)], e])
            if pos <= last_pos:
                return _failed("deliver-integrity",
                               f"p{pid} delivered position {pos} after "
                               f"{last_pos}", [e])
            seen.add(uid)
            last_pos = pos
    return _passed("deliver-integrity", f"{total} deliveries, each value once, "
                   "positions increasing")


def _check_external_validity(facts) -> CheckReport:
    total = 0
    for pid, seq in sorted(facts.deliver_seq.items()):
        for e in seq:
            total += 1
            if not e.data["valid"]:
                return _failed("deliver-validity",
                               f"p{pid} delivered invalid value "
                               f"'{e.data['value']}'", [e])
    return _passed("deliver-validity", f"{total} deliveries all valid")


def _check_ordering(m, facts) -> CheckReport:
    by_pos: dict[int, tuple[int, str]] = {}
    for pid in m.correct:
        for t, pos, uid, _ in m.delivered.get(pid, []):
            if pos in by_pos and by_pos[pos][1] != uid:
                other_pid, other_uid = by_pos[pos]
                return _failed(
                    "deliver-ordering",
                    f"position {pos} holds '{other_uid}' at p{other_pid} but "
                    f"'{uid}' at p{pid}",
                    [facts.deliver_pos[(other_pid, pos)],
                     facts.deliver_pos[(pid, pos)]], {"position": pos})
            by_pos.setdefault(pos, (pid, uid))
    return _passed("deliver-ordering", f"{len(by_pos)} positions agree across "
                   "correct processes")


def _check_deliver_liveness(config, m, facts, liveness_deadline) -> CheckReport:
    prop = "deliver-liveness"
    relay_checked, unresolved = 0, 0
    first_seen: dict[str, tuple[int, int]] = {}
    for pid in m.correct:
        for t, _, uid, _ in m.delivered.get(pid, []):
            if uid not in first_seen or t < first_seen[uid][0]:
                first_seen[uid] = (t, pid)
    for uid, (t0, pid0) in sorted(first_seen.items()):
        deadline = max(t0 + config.delta, config.gst + config.rho + config.delta)
        if deadline > m.horizon:
            unresolved += 1
            continue
        relay_checked += 1
        for pid in m.correct:
            got = m.deliver_time(pid, uid)
            if got is None or got > deadline:
                return _failed(
                    prop,
                    f"'{uid}' was first delivered at {t0} but p{pid} had not "
                    f"delivered it by {deadline}",
                    [facts.deliver_uid[(pid0, uid)],
                     facts.deliver_uid.get((pid, uid))],
                    {"value": uid, "first": t0, "deadline": deadline,
                     "delivered": got})
    bcast_checked = 0
    if liveness_deadline is not None and m.gst_bar is not None:
        for t, src, uid, valid in m.broadcasts:
            if not valid:
                continue
            deadline = max(t, m.gst_bar) + liveness_deadline
            if deadline > m.horizon:
                unresolved += 1
                continue
            bcast_checked += 1
            for pid in m.correct:
                got = m.deliver_time(pid, uid)
                if got is None or got > deadline:
                    return _failed(
                        prop,
                        f"'{uid}' broadcast by p{src} at {t} was not delivered "
                        f"by p{pid} within {liveness_deadline} of stabilization",
                        [facts.bcast_ev.get(uid),
                         facts.deliver_uid.get((pid, uid))],
                        {"value": uid, "deadline": deadline, "delivered": got})
    if relay_checked == 0 and bcast_checked == 0:
        return _na(prop, "nothing was delivered and no delivery deadline was "
                   "configured", {"unresolved": unresolved})
    return _passed(prop, f"{relay_checked} delivered values spread to all; "
                   f"{bcast_checked} broadcasts met the configured deadline",
                   {"relay_checked": relay_checked,
                    "broadcasts_checked": bcast_checked,
                    "unresolved": unresolved})


def _check_cert_backing(config, m, facts) -> CheckReport:
    prop = "cert-backing"
    correct = set(m.correct)
    quorum = config.quorum
    need = config.f + 1
    hs = config.protocol == "hotstuff-light"
    for (kind, v, k, h, signers), e in sorted(facts.certs.items(),
                                              key=lambda kv: kv[1].t):
        distinct = set(signers)
        if len(distinct) < quorum or not all(1 <= s <= config.n for s in signers):
            return _failed(prop, f"{kind} certificate for view {v} slot {k} has "
                           f"signer set {list(signers)}", [e])
        vote_type = VOTE_KINDS[kind]
        for s in sorted(distinct & correct):
            if s not in facts.vote_sends.get((vote_type, v, k, h), {}):
                return _failed(prop, f"{kind} certificate claims a {vote_type} "
                               f"from p{s} for view {v} slot {k} that was never "
                               "sent", [e])
        if kind == "committed":
            stages = ["PREPARE", "PRECOMMIT"] if hs else ["PREPARE"]
            for stage in stages:
                backers = set(facts.vote_sends.get((stage, v, k, h), {})) & correct
                if len(backers) < need:
                    return _failed(
                        prop,
                        f"committed certificate for view {v} slot {k} has only "
                        f"{len(backers)} correct {stage} senders, needs {need}",
                        [e])
    if not facts.certs:
        return _na(prop, "no certificates observed")
    return _passed(prop, f"{len(facts.certs)} certificates backed by real votes")


def _check_cert_values(facts) -> CheckReport:
    prop = "cert-value-validity"
    for (kind, v, k, h, _), e in sorted(facts.certs.items(), key=lambda kv: kv[1].t):
        uid = h[2:] if h.startswith("h:") else h
        if uid == NOP_UID:
            continue
        known = facts.uid_valid.get(uid)
        if known is None:
            return _failed(prop, f"{kind} certificate for view {v} slot {k} "
                           f"names a value '{uid}' that was never proposed", [e])
        if not known:
            return _failed(prop, f"{kind} certificate for view {v} slot {k} "
                           f"covers the invalid value '{uid}'", [e])
    if not facts.certs:
        return _na(prop, "no certificates observed")
    return _passed(prop, f"{len(facts.certs)} certificates name valid values")


def _derived_quorums(facts, vote_type, quorum):
    """(v, k) -> {h: sender events} for hash groups with a full quorum."""
    out: dict[tuple[int, int], dict[str, dict[int, tr.TraceEvent]]] = {}
    for (t, v, k, h), senders in facts.vote_sends.items():
        if t == vote_type and len(senders) >= quorum:
            out.setdefault((v, k), {})[h] = senders
    return out


def _check_prepared_agreement(config, facts) -> CheckReport:
    prop = "cert-prepared-agreement"
    observed: dict[tuple[int, int], tuple[str, tr.TraceEvent]] = {}
    n_cert = 0
    for (kind, v, k, h, _), e in sorted(facts.certs.items(), key=lambda kv: kv[1].t):
        if kind != "prepared":
            continue
        n_cert += 1
        if (v, k) in observed and observed[(v, k)][0] != h:
            return _failed(prop, f"two prepared certificates for view {v} slot "
                           f"{k} cover different values",
                           [observed[(v, k)][1], e], {"view": v, "slot": k})
        observed.setdefault((v, k), (h, e))
    derived = _derived_quorums(facts, "PREPARE", config.quorum)
    for (v, k), groups in sorted(derived.items()):
        if len(groups) > 1:
            votes = [min(g.values(), key=lambda e: e.t) for g in groups.values()]
            return _failed(prop,
                           f"vote quorums for two different values exist at "
                           f"view {v} slot {k}: {sorted(groups)}", votes,
                           {"view": v, "slot": k})
    if n_cert == 0 and not derived:
        return _na(prop, "no prepared certificates or full vote quorums observed")
    return _passed(prop, f"{n_cert} prepared certificates and {len(derived)} "
                   "vote quorums agree per view and slot")


def _check_decision_agreement(config, facts) -> CheckReport:
    prop = "cert-decision-agreement"
    by_slot: dict[int, tuple[str, tr.TraceEvent]] = {}
    n_obs = 0
    for (kind, v, k, h, _), e in sorted(facts.certs.items(), key=lambda kv: kv[1].t):
        if kind != "committed":
            continue
        n_obs += 1
        if k in by_slot and by_slot[k][0] != h:
            return _failed(prop, f"slot {k} was committed with two different "
                           "values", [by_slot[k][1], e], {"slot": k})
        by_slot.setdefault(k, (h, e))
    for (v, k), groups in sorted(_derived_quorums(facts, "COMMIT",
                                                  config.quorum).items()):
        for h, senders in sorted(groups.items()):
            n_obs += 1
            vote_ev = min(senders.values(), key=lambda e: e.t)
            if k in by_slot and by_slot[k][0] != h:
                return _failed(prop, f"slot {k} was committed with two different "
                               "values", [by_slot[k][1], vote_ev], {"slot": k})
            by_slot.setdefault(k, (h, vote_ev))
    if n_obs == 0:
        return _na(prop, "no committed certificates or commit quorums observed")
    return _passed(prop, f"{len(by_slot)} committed slots agree on their value")


# ---------------------------------------------------------------------------
# consensus-view suite


def check_consensus_sync(events, config, m: TraceMetrics,
                         facts: TraceFacts | None = None,
                         duration_fn=None) -> list[CheckReport]:
    facts = facts or TraceFacts(events, config)
    fn = duration_fn or default_duration(config.delta_cap)
    witness = _cs_witness(config, m, fn)
    return [
        _check_cs_order(facts),
        _check_cs_after_gst(config, m, witness),
        _check_cs_coverage(config, m, facts, witness),
        _check_cs_spread(config, m, witness),
        _check_cs_duration(config, m, witness, fn),
    ]


def _cs_ssm(m, v):
    times = m.cs_enter.get(v)
    return min(times.values()) if times else None


def _cs_witness(config, m, fn) -> int | None:
    """Minimal view at or above the catch-up view that is first entered
    after stabilization and runs long enough for two message steps."""
    v0 = m.catchup_view
    if v0 is None:
        return None
    for v in sorted(m.enter):
        tm = m.tm(v)
        if v >= v0 and tm is not None and tm >= config.gst \
                and fn(v) >= 2 * config.delta:
            return v
    return None


def _check_cs_order(facts) -> CheckReport:
    total = 0
    for pid, seq in sorted(facts.cs_seq.items()):
        total += len(seq)
        for prev, cur in zip(seq, seq[1:]):
            if cur.data["v"] <= prev.data["v"] or cur.t < prev.t:
                return _failed("cs-view-order",
                               f"p{pid} was told to enter consensus view "
                               f"{cur.data['v']} after {prev.data['v']}",
                               [prev, cur])
    if total == 0:
        return _na("cs-view-order", "no consensus views announced")
    return _passed("cs-view-order", f"{total} announcements in order")


def _check_cs_after_gst(config, m, witness) -> CheckReport:
    if witness is None:
        return _na("cs-entry-after-gst", "no view qualifies as the stable "
                   "witness within the horizon")
    ssm = _cs_ssm(m, witness)
    if ssm is None or ssm < config.gst:
        got = "never" if ssm is None else str(ssm)
        return CheckReport("cs-entry-after-gst", FAIL,
                           f"witness view {witness} was first announced at "
                           f"{got}, not after stabilization at {config.gst}", [],
                           {"witness": witness, "ssm": ssm})
    return _passed("cs-entry-after-gst", f"witness view {witness} announced at "
                   f"{ssm}", {"witness": witness, "ssm": ssm})


def _cs_checkable_views(config, m, witness):
    if witness is None:
        return []
    vmax = max(m.cs_enter, default=0)
    views = []
    for v in range(witness, vmax + 1):
        ssm = _cs_ssm(m, v)
        if ssm is not None and ssm + 2 * config.delta <= m.horizon:
            views.append(v)
        elif ssm is None and v < vmax:
            views.append(v)  # a hole below the top view is checkable (and fatal)
    return views


def _check_cs_coverage(config, m, facts, witness) -> CheckReport:
    views = _cs_checkable_views(config, m, witness)
    if not views:
        return _na("cs-all-enter", "no view at or above the witness is "
                   "resolvable within the horizon")
    for v in views:
        for pid in m.correct:
            if pid not in m.cs_enter.get(v, {}):
                above = [facts.cs_ev[(w, pid)] for w in sorted(m.cs_enter)
                         if w > v and (w, pid) in facts.cs_ev]
                return _failed("cs-all-enter",
                               f"p{pid} was never told to enter consensus view "
                               f"{v} at or above the witness {witness}",
                               above[:1], {"view": v, "witness": witness})
    return _passed("cs-all-enter", f"views {views[0]}..{views[-1]} announced at "
                   "every correct process", {"witness": witness})


def _check_cs_spread(config, m, witness) -> CheckReport:
    views = [v for v in _cs_checkable_views(config, m, witness)
             if m.cs_enter.get(v)]
    if not views:
        return _na("cs-entry-spread", "no view at or above the witness is "
                   "resolvable within the horizon")
    d = 2 * config.delta
    for v in views:
        times = m.cs_enter[v]
        ssm, ssl = min(times.values()), max(times.values())
        if ssl - ssm > d:
            late = max(times, key=lambda p: times[p])
            return CheckReport("cs-entry-spread", FAIL,
                               f"consensus view {v} spread {ssl - ssm} exceeds "
                               f"{d} (p{late} at {ssl})", [],
                               {"view": v, "ssm": ssm, "ssl": ssl, "d": d})
    return _passed("cs-entry-spread", f"{len(views)} views within spread {d}",
                   {"witness": witness, "d": d})


def _check_cs_duration(config, m, witness, fn) -> CheckReport:
    if witness is None:
        return _na("cs-min-duration", "no view qualifies as the stable witness "
                   "within the horizon")
    checked = 0
    for v in sorted(m.cs_enter):
        if v < witness:
            continue
        ssm, nxt = _cs_ssm(m, v), _cs_ssm(m, v + 1)
        if ssm is None or nxt is None:
            continue
        checked += 1
        if nxt <= ssm + fn(v):
            return CheckReport("cs-min-duration", FAIL,
                               f"consensus view {v + 1} began at {nxt}, not "
                               f"after view {v} at {ssm} ran for its full "
                               f"{fn(v)}", [],
                               {"view": v, "ssm": ssm, "next": nxt,
                                "duration": fn(v)})
    if checked == 0:
        return _na("cs-min-duration", "fewer than two announced views at or "
                   "above the witness")
    return _passed("cs-min-duration", f"{checked} view transitions ran full "
                   "length", {"witness": witness})


# ---------------------------------------------------------------------------
# toy client


def _check_toy_target(config, m, facts) -> CheckReport:
    if config.target_view is None:
        return _na("toy-target-view", "no target view configured")
    reached = m.max_entered_view()
    if reached >= config.target_view:
        return _passed("toy-target-view", f"reached view {reached} of "
                       f"{config.target_view}",
                       {"target": config.target_view, "reached": reached})
    return _failed("toy-target-view",
                   f"reached only view {reached} of {config.target_view} "
                   "within the horizon",
                   [facts.some_enter_event(reached)] if reached else [],
                   {"target": config.target_view, "reached": reached})


# ---------------------------------------------------------------------------
# entry point


def run_all_checks(events: list[tr.TraceEvent], config: ScenarioConfig,
                   liveness_deadline: int | None = None) -> list[CheckReport]:
    m = compute_metrics(events, config)
    facts = TraceFacts(events, config)
    reports = check_synchronizer(events, config, m, facts)
    if config.protocol in BFT_PROTOCOLS:
        reports += check_latency(events, config, m, facts)
        reports += check_atomic_broadcast(events, config, m, facts,
                                          liveness_deadline)
    elif config.protocol == "consensus-sync":
        reports += [_check_entry_latency_first(config, m, facts),
                    _check_entry_latency_last(config, m, facts)]
        reports += check_consensus_sync(events, config, m, facts)
    elif config.protocol == "toy-client":
        reports += [_check_entry_latency_first(config, m, facts),
                    _check_entry_latency_last(config, m, facts),
                    _check_toy_target(config, m, facts)]
    return reports


def reports_ok(reports: list[CheckReport], strict_premises: bool = False) -> bool:
    if any(r.verdict == FAIL for r in reports):
        return False
    if strict_premises and any(r.verdict == NA for r in reports):
        return False
    return True
