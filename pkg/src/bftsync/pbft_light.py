"""Single-leader-per-view atomic broadcast with forwarding to the leader.

Clients broadcast values to everyone; replicas forward them to the view's
leader and monitor delivery with one timer per pending value plus a
recovery timer for view initialization. Any timeout asks the synchronizer
for a view change and raises both timeout durations.
"""
from __future__ import annotations

from .bft_common import (
    INITIALIZING, NORMAL, PREPREPARED,
    Forward, NewState, PrePrepare, Prepare, ReplicaBase, SignedMsg, Value,
    TIMER_RECOVERY, hash_value, leader,
)


def delivery_timer_key(uid: str) -> str:
    return f"delivery:{uid}"


class PbftLightReplica(ReplicaBase):
    def __init__(self, ctx):
        super().__init__(ctx)
        self.init_log_length = 0
        # Values seen in BROADCAST / FORWARD messages; when-clauses over
        # received messages are re-evaluated from these pools.
        self.pending_broadcasts: dict[str, Value] = {}
        self.pending_forwards: list[Value] = []

    # ---- timers ----

    def _is_progress_timer(self, key: str) -> bool:
        return key == TIMER_RECOVERY or key.startswith("delivery:")

    def _on_other_timer(self, key: str) -> None:
        raise AssertionError(f"unexpected timer {key}")

    def _cap_delivery(self, d: int) -> int:
        p = self.ctx.params
        return min(d, 4 * p.delta_cap) if p.latency_mode else d

    def _cap_recovery(self, d: int) -> int:
        p = self.ctx.params
        return min(d, 6 * p.delta_cap) if p.latency_mode else d

    # ---- client payload intake ----

    def _on_broadcast(self, x: Value) -> None:
        if x.valid and not x.is_nop:
            self.pending_broadcasts.setdefault(x.uid, x)

    def _on_forward(self, x: Value) -> None:
        if not x.valid or x.is_nop or not self._accept_forward(x):
            return
        if all(y.uid != x.uid for y in self.pending_forwards):
            self.pending_forwards.append(x)

    def _accept_forward(self, x: Value) -> bool:
        return True

    # ---- view change ----

    def _view1_shortcut(self, v: int) -> bool:
        return self.ctx.params.latency_mode and v == 1

    def _send_view_change(self, v: int) -> None:
        if self._view1_shortcut(v):
            # First view: no prepared state can exist, so the leader
            # proposes an empty log directly and followers wait for it.
            if self.ctx.pid == leader(v, self.n):
                self.sent_new_state_for = v
                self.next = 1
                self.ctx.send_all(NewState(v, (), ()))
            return
        super()._send_view_change(v)

    def _r_leader_new_state(self) -> bool:
        v = self.curr_view
        if (
            self.status != INITIALIZING
            or v == 0
            or self.ctx.pid != leader(v, self.n)
            or self.sent_new_state_for >= v
            or self._view1_shortcut(v)
        ):
            return False
        pool = self.new_leader_pool.get(v, {})
        if len(pool) < self.quorum_size:
            return False
        M = tuple(pool[s] for s in sorted(pool)[: self.quorum_size])
        log_p, best_view, _ = self._select_winners(M)
        next_p = max(log_p) + 1 if log_p else 1
        log_clean = self._clean_log(log_p, best_view, next_p)
        self.sent_new_state_for = v
        self.next = next_p
        self.ctx.send_all(NewState(v, tuple(sorted(log_clean.items())), M))
        return True

    def _valid_new_state(self, sm: SignedMsg) -> bool:
        body = sm.body
        if not isinstance(body, NewState) or sm.signer != leader(body.view, self.n):
            return False
        if self._view1_shortcut(body.view):
            return body.log == () and body.justification == ()
        M = body.justification
        signers = {m.signer for m in M}
        if len(M) < self.quorum_size or len(signers) != len(M):
            return False
        if any(m.body.MTYPE != "NEW_LEADER" or m.body.view != body.view for m in M):
            return False
        if not all(self.ctx.auth.verify(m) and self._valid_new_leader(m) for m in M):
            return False
        log_p, best_view, _ = self._select_winners(M)
        next_p = max(log_p) + 1 if log_p else 1
        return dict(body.log) == self._clean_log(log_p, best_view, next_p)

    def _r_adopt_new_state(self) -> bool:
        if self.status != INITIALIZING:
            return False
        v = self.curr_view
        for sm in self.new_state_pool.get(v, []):
            if not self._valid_new_state(sm):
                continue
            self._adopt(v, sm.body)
            return True
        return False

    def _adopt(self, v: int, body: NewState) -> None:
        self.log = {k: x for k, x in body.log}
        self.phase = {k: PREPREPARED for k in self.log}
        self.proposed_uids = {x.uid for x in self.log.values() if not x.is_nop}
        if self.ctx.pid != leader(v, self.n):
            self.next = max(self.log) + 1 if self.log else 1
        for k in sorted(self.log):
            self.ctx.send_all(Prepare(v, k, hash_value(self.log[k])))
        self.status = NORMAL
        self.init_log_length = max(self.log) if self.log else 0
        if self.init_log_length <= self.last_delivered:
            self.ctx.stop_timer(TIMER_RECOVERY)

    # ---- normal operation ----

    def _r_client_payloads(self) -> bool:
        if self.status != NORMAL:
            return False
        for uid in sorted(self.pending_broadcasts):
            x = self.pending_broadcasts[uid]
            if uid in self.delivered_uids:
                del self.pending_broadcasts[uid]
                continue
            if self.ctx.timer_active(delivery_timer_key(uid)):
                continue
            self.ctx.start_timer(delivery_timer_key(uid), self.dur_delivery)
            self.ctx.send_to(leader(self.curr_view, self.n), Forward(x))
            return True
        return False

    def _r_leader_proposals(self) -> bool:
        if self.status != NORMAL or self.ctx.pid != leader(self.curr_view, self.n):
            return False
        for x in list(self.pending_forwards):
            if x.uid in self.delivered_uids:
                self.pending_forwards.remove(x)
                continue
            if self._uid_in_log(x.uid) or x.uid in self.proposed_uids:
                continue
            self._emit_preprepare(self.curr_view, self.next, x)
            self.proposed_uids.add(x.uid)
            self.next += 1
            return True
        return False

    def _emit_preprepare(self, v: int, k: int, x: Value) -> None:
        self.ctx.send_all(PrePrepare(v, k, x))

    def _after_delivered(self, x: Value) -> None:
        if not x.is_nop:
            self.ctx.stop_timer(delivery_timer_key(x.uid))
        if self.last_delivered == self.init_log_length and self.status == NORMAL:
            self.ctx.stop_timer(TIMER_RECOVERY)

    def _rules(self):
        return (
            self._r_leader_new_state,
            self._r_adopt_new_state,
            self._r_preprepares,
            self._r_prepare_quorums,
            self._r_commit_quorums,
            self._r_deliver,
            self._r_client_payloads,
            self._r_leader_proposals,
        )
