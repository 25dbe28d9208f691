"""Shared machinery for the replicated protocols.

Covers values and their hashes, signed message envelopes, quorum
certificates, the per-(type, sender) buffer for future-view messages, and
the replica base class implementing the message plumbing common to all
three protocols: view-tagged routing, vote pools, quorum detection, the
view-change scaffolding and decision relay.
"""
from __future__ import annotations

from dataclasses import dataclass, field

NOP_UID = "nop"

START = "start"
PREPREPARED = "preprepared"
PREPARED = "prepared"
PRECOMMITTED = "precommitted"
COMMITTED = "committed"

NORMAL = "normal"
INITIALIZING = "initializing"
ADVANCED = "advanced"

TIMER_RECOVERY = "recovery"
TIMER_DELIVERY = "delivery"
TIMER_BROADCAST = "broadcast"


def leader(v: int, n: int) -> int:
    """Leader of view v among processes 1..n. Views start at 1."""
    if v < 1:
        raise ValueError(f"views are numbered from 1, got {v}")
    return (v - 1) % n + 1


@dataclass(frozen=True)
class Value:
    uid: str
    valid: bool = True

    @property
    def is_nop(self) -> bool:
        return self.uid == NOP_UID


NOP = Value(NOP_UID)


def hash_value(x: Value) -> str:
    # Collision-free by construction: the uid is the identity.
    return "h:" + x.uid


@dataclass(frozen=True)
class Wish:
    MTYPE = "WISH"
    v: int


@dataclass(frozen=True)
class Broadcast:
    MTYPE = "BROADCAST"
    value: Value


@dataclass(frozen=True)
class Forward:
    MTYPE = "FORWARD"
    value: Value


@dataclass(frozen=True)
class PrePrepare:
    MTYPE = "PREPREPARE"
    view: int
    k: int
    value: Value


@dataclass(frozen=True)
class Prepare:
    MTYPE = "PREPARE"
    view: int
    k: int
    h: str


@dataclass(frozen=True)
class Precommit:
    MTYPE = "PRECOMMIT"
    view: int
    k: int
    h: str


@dataclass(frozen=True)
class Commit:
    MTYPE = "COMMIT"
    view: int
    k: int
    h: str


@dataclass(frozen=True)
class SignedMsg:
    body: object
    signer: int
    sig: str


@dataclass(frozen=True)
class Certificate:
    """A quorum of matching signed vote messages."""
    kind: str  # prepared, precommitted or committed
    view: int
    k: int
    h: str
    msgs: tuple[SignedMsg, ...]

    def signers(self) -> tuple[int, ...]:
        return tuple(m.signer for m in self.msgs)


@dataclass(frozen=True)
class Decision:
    MTYPE = "DECISION"
    value: Value
    k: int
    cert: Certificate


@dataclass(frozen=True)
class Ack:
    """Delivered-up-to watermark; prunes the periodic decision relay."""
    MTYPE = "ACK"
    up_to: int


@dataclass(frozen=True)
class NewLeader:
    """Per-slot prepared state reported to the incoming leader.

    The three maps share a key set and are encoded as sorted (k, item)
    pairs so the body stays hashable.
    """
    MTYPE = "NEW_LEADER"
    view: int
    prep_view: tuple[tuple[int, int], ...]
    prep_log: tuple[tuple[int, Value], ...]
    cert: tuple[tuple[int, Certificate], ...]


@dataclass(frozen=True)
class NewState:
    MTYPE = "NEW_STATE"
    view: int
    log: tuple[tuple[int, Value], ...]
    justification: tuple[SignedMsg, ...]  # NEW_LEADER quorum


@dataclass(frozen=True)
class HsNewState:
    """Certificate-carrying variant: no NEW_LEADER quorum is forwarded."""
    MTYPE = "NEW_STATE"
    view: int
    log: tuple[tuple[int, Value], ...]
    prep_view: tuple[tuple[int, int], ...]
    cert: tuple[tuple[int, Certificate], ...]


VOTE_TYPES = {"PREPARE": Prepare, "PRECOMMIT": Precommit, "COMMIT": Commit}
# Message kinds subject to the highest-view-per-sender buffering rule.
BUFFERED_TYPES = ("PREPREPARE", "PREPARE", "PRECOMMIT", "COMMIT", "NEW_LEADER", "NEW_STATE")


class SigAuthority:
    """Signature oracle for the simulation.

    Signing mints a token recorded in a registry; verification checks the
    registry, so a message never signed by its claimed signer does not
    verify. Adversaries may only sign on behalf of the designated faulty
    processes, which models unforgeability for the correct ones.
    """

    def __init__(self, faulty: frozenset[int]):
        self.faulty = faulty
        self._minted: dict[tuple[object, int], str] = {}
        self._count = 0

    def sign(self, body, signer: int, on_behalf_of: int | None = None) -> SignedMsg:
        if on_behalf_of is not None and on_behalf_of != signer:
            if on_behalf_of not in self.faulty or signer not in self.faulty:
                raise PermissionError(f"p{signer} cannot sign as p{on_behalf_of}")
            signer = on_behalf_of
        key = (body, signer)
        sig = self._minted.get(key)
        if sig is None:
            self._count += 1
            sig = f"s{self._count}"
            self._minted[key] = sig
        return SignedMsg(body, signer, sig)

    def verify(self, sm: SignedMsg) -> bool:
        return self._minted.get((sm.body, sm.signer)) == sm.sig


def check_cert(cert: Certificate, body, f: int, auth: SigAuthority) -> bool:
    """True iff cert is a quorum of correctly signed copies of body."""
    if len(cert.msgs) < 2 * f + 1:
        return False
    signers = set()
    for sm in cert.msgs:
        if sm.body != body or not auth.verify(sm) or sm.signer in signers:
            return False
        signers.add(sm.signer)
    return True


def check_prepared(cert: Certificate, v: int, k: int, h: str, f: int, auth: SigAuthority) -> bool:
    return check_cert(cert, Prepare(v, k, h), f, auth)


def check_precommitted(cert: Certificate, v: int, k: int, h: str, f: int, auth: SigAuthority) -> bool:
    return check_cert(cert, Precommit(v, k, h), f, auth)


def check_committed(cert: Certificate, v: int, k: int, h: str, f: int, auth: SigAuthority) -> bool:
    return check_cert(cert, Commit(v, k, h), f, auth)


def check_committed_any_view(cert: Certificate, k: int, h: str, f: int, auth: SigAuthority) -> bool:
    """Committed certificate check with the view taken from the votes."""
    if not cert.msgs:
        return False
    body = cert.msgs[0].body
    if not isinstance(body, Commit):
        return False
    return check_committed(cert, body.view, k, h, f, auth)


class FutureBuffer:
    """Bounded store for messages from views ahead of ours.

    Keeps at most one message per (type, sender), the one with the highest
    view, so the footprint never exceeds #types * n regardless of how many
    views a fast or Byzantine sender races ahead.
    """

    def __init__(self):
        self._slots: dict[tuple[str, int], SignedMsg] = {}
        # Entries live only until the next view entry, so instantaneous
        # samples would almost always read zero; report the peak instead.
        self.peak = 0

    def put(self, sm: SignedMsg) -> None:
        key = (sm.body.MTYPE, sm.signer)
        cur = self._slots.get(key)
        if cur is None or sm.body.view > cur.body.view:
            self._slots[key] = sm
            self.peak = max(self.peak, len(self._slots))

    def take_for(self, view: int) -> list[SignedMsg]:
        """Pop messages for `view`; anything older is dropped as stale."""
        out = []
        for key in sorted(self._slots):
            sm = self._slots[key]
            if sm.body.view < view:
                del self._slots[key]
            elif sm.body.view == view:
                out.append(sm)
                del self._slots[key]
        return out

    def __len__(self) -> int:
        return len(self._slots)


def cert_summary(cert: Certificate) -> dict:
    return {
        "kind": cert.kind,
        "v": cert.view,
        "k": cert.k,
        "h": cert.h,
        "signers": sorted(cert.signers()),
    }


def body_summary(body) -> dict:
    """Trace representation of a message body."""
    t = body.MTYPE
    if t == "WISH":
        return {"type": t, "v": body.v}
    if t in ("BROADCAST", "FORWARD"):
        return {"type": t, "value": body.value.uid, "valid": body.value.valid}
    if t == "PREPREPARE":
        return {"type": t, "v": body.view, "k": body.k,
                "value": body.value.uid, "valid": body.value.valid}
    if t in ("PREPARE", "PRECOMMIT", "COMMIT"):
        return {"type": t, "v": body.view, "k": body.k, "h": body.h}
    if t == "DECISION":
        return {"type": t, "k": body.k, "value": body.value.uid,
                "valid": body.value.valid, "cert": cert_summary(body.cert)}
    if t == "ACK":
        return {"type": t, "up_to": body.up_to}
    if t == "NEW_LEADER":
        return {
            "type": t, "v": body.view,
            "prep_view": [[k, pv] for k, pv in body.prep_view],
            "prep_log": [[k, x.uid] for k, x in body.prep_log],
            "certs": [cert_summary(c) for _, c in body.cert],
        }
    if t == "NEW_STATE":
        out = {"type": t, "v": body.view,
               "log": [[k, x.uid, x.valid] for k, x in body.log]}
        if isinstance(body, HsNewState):
            out["prep_view"] = [[k, pv] for k, pv in body.prep_view]
            out["certs"] = [cert_summary(c) for _, c in body.cert]
        else:
            out["m_signers"] = sorted(sm.signer for sm in body.justification)
        return out
    raise ValueError(f"unknown message type {t!r}")


class ReplicaBase:
    """State and rules shared by the three replicated protocols.

    Handlers follow a rule-pump style: incoming events update pools of
    received messages and a pump then fires every enabled guarded rule
    until none applies. This matches the when-clause reading of the
    protocol rules, where a condition may become true long after the
    message that eventually satisfies it arrived.
    """

    # Subclasses list their pump rules in evaluation order.
    def __init__(self, ctx):
        self.ctx = ctx
        p = ctx.params
        self.n = p.n
        self.f = p.f
        self.quorum_size = 2 * p.f + 1
        self.batch = p.batch
        self.curr_view = 0
        self.status = ADVANCED  # view 0 is not operational
        self.log: dict[int, Value] = {}
        self.phase: dict[int, str] = {}
        self.prep_log: dict[int, Value] = {}
        self.prep_view: dict[int, int] = {}
        self.cert: dict[int, Certificate] = {}
        self.commit_log: dict[int, Value] = {}
        self.commit_cert: dict[int, Certificate] = {}
        self.next = 1
        self.last_delivered = 0
        self.dur_delivery = p.init_dur_delivery
        self.dur_recovery = p.init_dur_recovery
        self.own_broadcasts: dict[str, Value] = {}
        self.delivered_uids: set[str] = set()
        # highest delivered position each peer has acknowledged
        self.peer_delivered: dict[int, int] = {q: 0 for q in range(1, self.n + 1)}
        self.future = FutureBuffer()
        # (view, k, h) -> {signer: SignedMsg}, one pool per vote type
        self.vote_pools: dict[str, dict[tuple[int, int, str], dict[int, SignedMsg]]] = {
            t: {} for t in VOTE_TYPES
        }
        self.new_leader_pool: dict[int, dict[int, SignedMsg]] = {}
        self.new_state_pool: dict[int, list[SignedMsg]] = {}
        self.pending_preprepares: dict[tuple[int, int], list[SignedMsg]] = {}
        self.proposed_uids: set[str] = set()
        self.sent_new_state_for = 0

    # ---- entry points called by the harness shell ----

    def on_start(self) -> None:
        if self.curr_view == 0:
            self.ctx.advance()
        self._pump()

    def broadcast(self, x: Value) -> None:
        if not x.valid or x.is_nop:
            return
        self.ctx.record_broadcast_call(x)
        if x.uid not in self.delivered_uids:
            self.own_broadcasts[x.uid] = x
        self.ctx.send_all(Broadcast(x))
        self._pump()

    def on_periodic(self) -> None:
        # Retransmit application payloads until delivered and relay known
        # decisions; both stand in for the "periodically until" clauses.
        # Decisions go only to peers whose acknowledged log still misses
        # them, so the relay quiesces once everyone has caught up.
        for uid in sorted(self.own_broadcasts):
            self.ctx.send_all(Broadcast(self.own_broadcasts[uid]))
        self.ctx.send_all(Ack(self.last_delivered))
        for q, acked in sorted(self.peer_delivered.items()):
            if q == self.ctx.pid:
                continue
            for k in sorted(self.commit_cert):
                if k > acked:
                    self.ctx.send_to(
                        q, Decision(self.commit_log[k], k, self.commit_cert[k]))
        self._pump()

    def on_message(self, sm: SignedMsg) -> None:
        body = sm.body
        t = body.MTYPE
        if t == "BROADCAST":
            self._on_broadcast(body.value)
        elif t == "FORWARD":
            self._on_forward(body.value)
        elif t == "DECISION":
            self._on_decision(body)
        elif t == "ACK":
            prev = self.peer_delivered.get(sm.signer, 0)
            self.peer_delivered[sm.signer] = max(prev, body.up_to)
        else:
            self._route_view_tagged(sm)
        self._pump()

    def on_new_view(self, v: int) -> None:
        assert v > self.curr_view
        ctx = self.ctx
        ctx.stop_all_timers()
        self.curr_view = v
        self.status = INITIALIZING
        self._purge_stale(v)
        self._send_view_change(v)
        ctx.start_timer(TIMER_RECOVERY, self.dur_recovery)
        for sm in self.future.take_for(v):
            self._route_view_tagged(sm)
        self._pump()

    def on_timer(self, key: str) -> None:
        if self._is_progress_timer(key):
            self.ctx.stop_all_timers()
            self.ctx.advance()
            self.status = ADVANCED
            self.dur_delivery = self._cap_delivery(self.dur_delivery + self.ctx.params.tau)
            self.dur_recovery = self._cap_recovery(self.dur_recovery + self.ctx.params.tau)
        else:
            self._on_other_timer(key)
        self._pump()

    def state_sizes(self) -> dict:
        return {"future": self.future.peak}

    # ---- hooks ----

    def _is_progress_timer(self, key: str) -> bool:
        raise NotImplementedError

    def _on_other_timer(self, key: str) -> None:
        raise NotImplementedError

    def _on_broadcast(self, x: Value) -> None:
        raise NotImplementedError

    def _on_forward(self, x: Value) -> None:
        pass  # only meaningful where a forwarding path exists

    def _send_view_change(self, v: int) -> None:
        self.ctx.send_to(leader(v, self.n), self._new_leader_report(v))

    def _new_leader_report(self, v: int) -> NewLeader:
        ks = sorted(k for k, pv in self.prep_view.items() if pv > 0)
        return NewLeader(
            view=v,
            prep_view=tuple((k, self.prep_view[k]) for k in ks),
            prep_log=tuple((k, self.prep_log[k]) for k in ks),
            cert=tuple((k, self.cert[k]) for k in ks),
        )

    def _cap_delivery(self, d: int) -> int:
        return d

    def _cap_recovery(self, d: int) -> int:
        return d

    def _rules(self):
        raise NotImplementedError

    # ---- message intake ----

    def _route_view_tagged(self, sm: SignedMsg) -> None:
        v = sm.body.view
        if v < self.curr_view:
            return  # stale
        if v > self.curr_view:
            self.future.put(sm)
            return
        self._pool_current(sm)

    def _pool_current(self, sm: SignedMsg) -> None:
        body = sm.body
        t = body.MTYPE
        if t == "PREPREPARE":
            slot = self.pending_preprepares.setdefault((body.view, body.k), [])
            if all(prev.body != body for prev in slot):
                slot.append(sm)
        elif t in VOTE_TYPES:
            pool = self.vote_pools[t].setdefault((body.view, body.k, body.h), {})
            pool.setdefault(sm.signer, sm)
        elif t == "NEW_LEADER":
            if self._valid_new_leader(sm):
                self.new_leader_pool.setdefault(body.view, {}).setdefault(sm.signer, sm)
        elif t == "NEW_STATE":
            self.new_state_pool.setdefault(body.view, []).append(sm)

    def _purge_stale(self, v: int) -> None:
        for pools in self.vote_pools.values():
            for key in [k for k in pools if k[0] < v]:
                del pools[key]
        for view in [w for w in self.new_leader_pool if w < v]:
            del self.new_leader_pool[view]
        for view in [w for w in self.new_state_pool if w < v]:
            del self.new_state_pool[view]
        for key in [k for k in self.pending_preprepares if k[0] < v]:
            del self.pending_preprepares[key]

    def _on_decision(self, body: Decision) -> None:
        k, x = body.k, body.value
        if self.commit_log.get(k) is not None:
            return
        if not check_committed_any_view(body.cert, k, hash_value(x), self.f, self.ctx.auth):
            return
        self.commit_log[k] = x
        self.commit_cert[k] = body.cert

    # ---- pump ----

    def _pump(self) -> None:
        progressed = True
        while progressed:
            progressed = False
            for rule in self._rules():
                if rule():
                    progressed = True
                    break

    # ---- shared rules ----

    def _uid_in_log(self, uid: str) -> bool:
        return any(y.uid == uid for y in self.log.values())

    def _preprepare_extra_ok(self, v: int, k: int, x: Value) -> bool:
        return True

    def _r_preprepares(self) -> bool:
        if self.status != NORMAL:
            return False
        v = self.curr_view
        for (pv, k) in sorted(self.pending_preprepares):
            if pv != v:
                continue
            for sm in self.pending_preprepares[(pv, k)]:
                x = sm.body.value
                ok = (
                    sm.signer == leader(v, self.n)
                    and self.phase.get(k, START) == START
                    and x.valid
                    # nop is a placeholder, not a value, so it is exempt
                    # from the duplicate check
                    and (x.is_nop or not self._uid_in_log(x.uid))
                    and self._preprepare_extra_ok(v, k, x)
                )
                if ok:
                    del self.pending_preprepares[(pv, k)]
                    self.log[k] = x
                    self.phase[k] = PREPREPARED
                    self.ctx.send_all(Prepare(v, k, hash_value(x)))
                    return True
        return False

    def _quorum_for(self, mtype: str, key: tuple[int, int, str]) -> Certificate | None:
        pool = self.vote_pools[mtype].get(key)
        if pool is None or len(pool) < self.quorum_size:
            return None
        signers = sorted(pool)[: self.quorum_size]
        kind = {"PREPARE": PREPARED, "PRECOMMIT": PRECOMMITTED, "COMMIT": COMMITTED}[mtype]
        v, k, h = key
        return Certificate(kind, v, k, h, tuple(pool[s] for s in signers))

    def _r_prepare_quorums(self) -> bool:
        if self.status != NORMAL:
            return False
        v = self.curr_view
        for key in sorted(self.vote_pools["PREPARE"]):
            kv, k, h = key
            if kv != v or self.phase.get(k) != PREPREPARED:
                continue
            if k not in self.log or hash_value(self.log[k]) != h:
                continue
            cert = self._quorum_for("PREPARE", key)
            if cert is None:
                continue
            self.prep_log[k] = self.log[k]
            self.prep_view[k] = v
            self.cert[k] = cert
            self.phase[k] = PREPARED
            self._after_prepared(v, k, h)
            return True
        return False

    def _after_prepared(self, v: int, k: int, h: str) -> None:
        self.ctx.send_all(Commit(v, k, h))

    def _commit_ready_phase(self) -> str:
        return PREPARED

    def _r_commit_quorums(self) -> bool:
        if self.status != NORMAL:
            return False
        v = self.curr_view
        for key in sorted(self.vote_pools["COMMIT"]):
            kv, k, h = key
            if kv != v or self.phase.get(k) != self._commit_ready_phase():
                continue
            if k not in self.prep_log or hash_value(self.prep_log[k]) != h:
                continue
            cert = self._quorum_for("COMMIT", key)
            if cert is None:
                continue
            self.commit_log[k] = self.log[k]
            self.phase[k] = COMMITTED
            self.commit_cert[k] = cert
            self.ctx.send_all(Decision(self.commit_log[k], k, cert))
            return True
        return False

    def _valid_new_leader(self, sm: SignedMsg) -> bool:
        body = sm.body
        if body.MTYPE != "NEW_LEADER":
            return False
        pv = dict(body.prep_view)
        plog = dict(body.prep_log)
        certs = dict(body.cert)
        if set(pv) != set(plog) or set(pv) != set(certs):
            return False
        for k, view in pv.items():
            if not (0 < view < body.view):
                return False
            if not check_prepared(certs[k], view, k, hash_value(plog[k]), self.f, self.ctx.auth):
                return False
        return True

    def _select_winners(self, M: tuple[SignedMsg, ...]):
        """Highest prepared view wins per slot; ties must agree on the value.

        Returns (log', best_view, best_cert) keyed by slot.
        """
        log_p: dict[int, Value] = {}
        best_view: dict[int, int] = {}
        best_cert: dict[int, Certificate] = {}
        for sm in sorted(M, key=lambda m: m.signer):
            pv = dict(sm.body.prep_view)
            plog = dict(sm.body.prep_log)
            certs = dict(sm.body.cert)
            for k, view in pv.items():
                if view > best_view.get(k, 0):
                    best_view[k] = view
                    log_p[k] = plog[k]
                    best_cert[k] = certs[k]
                elif view == best_view.get(k, 0):
                    # Two well-formed prepared certificates for the same
                    # view and slot carry the same value.
                    assert plog[k].uid == log_p[k].uid, "conflicting prepared certificates"
        return log_p, best_view, best_cert

    @staticmethod
    def _clean_log(log_p: dict[int, Value], best_view: dict[int, int], next_p: int) -> dict[int, Value]:
        """Fill holes with nop and nop out stale duplicates below next_p."""
        out = {}
        for k in range(1, next_p):
            x = log_p.get(k)
            if x is None:
                out[k] = NOP
                continue
            if not x.is_nop:
                for k2, y in log_p.items():
                    if k2 != k and y.uid == x.uid:
                        if best_view[k2] > best_view[k]:
                            x = NOP
                            break
                        # Equal views would mean two prepared certificates
                        # for one value at two slots in one view.
                        assert best_view[k2] < best_view[k], "duplicate value prepared at equal views"
            out[k] = x
        return out

    def _r_deliver(self) -> bool:
        if not self._deliver_enabled():
            return False
        nxt = self.commit_log.get(self.last_delivered + 1)
        if nxt is None:
            return False
        self.last_delivered += 1
        x = self.commit_log[self.last_delivered]
        if not x.is_nop:
            self.ctx.deliver(x, self.last_delivered)
            self.delivered_uids.add(x.uid)
            self.own_broadcasts.pop(x.uid, None)
        self._after_delivered(x)
        return True

    def _deliver_enabled(self) -> bool:
        return True

    def _after_delivered(self, x: Value) -> None:
        raise NotImplementedError
