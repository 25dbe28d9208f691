"""Leader-rotation atomic broadcast.

The leader of view v owns log slots (v-1)*B+1 through v*B. Replicas queue
incoming values; the leader proposes them in order and pads with nop when
a filler timer fires, so the batch always completes and the view rotates.
Delivering the last slot of the batch triggers the rotation advance.
"""
from __future__ import annotations

from .bft_common import (
    ADVANCED, INITIALIZING, NORMAL, PREPREPARED,
    NOP, NewState, PrePrepare, Prepare, ReplicaBase, SignedMsg, Value,
    TIMER_BROADCAST, TIMER_DELIVERY, TIMER_RECOVERY, hash_value, leader,
)


class PbftRotationReplica(ReplicaBase):
    def __init__(self, ctx):
        super().__init__(ctx)
        self.queue: list[Value] = []

    # ---- timers ----

    def _is_progress_timer(self, key: str) -> bool:
        return key in (TIMER_RECOVERY, TIMER_DELIVERY)

    def _on_other_timer(self, key: str) -> None:
        assert key == TIMER_BROADCAST
        self._propagate(NOP)

    def _cap_delivery(self, d: int) -> int:
        p = self.ctx.params
        return min(d, max(4 * p.delta_cap, p.t_broadcast + 3 * p.delta_cap)) if p.latency_mode else d

    def _cap_recovery(self, d: int) -> int:
        p = self.ctx.params
        return min(d, 4 * p.delta_cap) if p.latency_mode else d

    # ---- client payload intake ----

    def _on_broadcast(self, x: Value) -> None:
        if not x.valid or x.is_nop or x.uid in self.delivered_uids:
            return
        if any(y.uid == x.uid for y in self.queue):
            return
        self._admit_to_queue(x)

    def _admit_to_queue(self, x: Value) -> None:
        self.queue.append(x)

    # ---- proposing ----

    def _r_propose(self) -> bool:
        if self.status != NORMAL or self.ctx.pid != leader(self.curr_view, self.n):
            return False
        if self.next > self.curr_view * self.batch:
            return False
        for x in self.queue:
            if self._uid_in_log(x.uid) or x.uid in self.proposed_uids:
                continue
            self.ctx.stop_timer(TIMER_BROADCAST)
            self._propagate(x)
            return True
        return False

    def _propagate(self, x: Value) -> None:
        self._emit_preprepare(self.curr_view, self.next, x)
        if not x.is_nop:
            self.proposed_uids.add(x.uid)
        self.next += 1
        if self.next <= self.curr_view * self.batch:
            self.ctx.start_timer(TIMER_BROADCAST, self.ctx.params.t_broadcast)

    def _emit_preprepare(self, v: int, k: int, x: Value) -> None:
        self.ctx.send_all(PrePrepare(v, k, x))

    def _preprepare_extra_ok(self, v: int, k: int, x: Value) -> bool:
        return k <= v * self.batch

    # ---- view change ----

    def _next_after_change(self, v: int) -> int:
        return (v - 1) * self.batch + 1

    def _r_leader_new_state(self) -> bool:
        v = self.curr_view
        if (
            self.status != INITIALIZING
            or v == 0
            or self.ctx.pid != leader(v, self.n)
            or self.sent_new_state_for >= v
        ):
            return False
        pool = self.new_leader_pool.get(v, {})
        if len(pool) < self.quorum_size:
            return False
        M = tuple(pool[s] for s in sorted(pool)[: self.quorum_size])
        log_p, best_view, _ = self._select_winners(M)
        next_p = self._next_after_change(v)
        assert all(k < next_p for k in log_p), "prepared slot beyond the previous leader's range"
        log_clean = self._clean_log(log_p, best_view, next_p)
        self.sent_new_state_for = v
        self.next = next_p
        self.ctx.send_all(NewState(v, tuple(sorted(log_clean.items())), M))
        self.ctx.start_timer(TIMER_BROADCAST, self.ctx.params.t_broadcast)
        return True

    def _valid_new_state(self, sm: SignedMsg) -> bool:
        body = sm.body
        if not isinstance(body, NewState) or sm.signer != leader(body.view, self.n):
            return False
        M = body.justification
        signers = {m.signer for m in M}
        if len(M) < self.quorum_size or len(signers) != len(M):
            return False
        if any(m.body.MTYPE != "NEW_LEADER" or m.body.view != body.view for m in M):
            return False
        if not all(self.ctx.auth.verify(m) and self._valid_new_leader(m) for m in M):
            return False
        log_p, best_view, _ = self._select_winners(M)
        return dict(body.log) == self._clean_log(log_p, best_view, self._next_after_change(body.view))

    def _r_adopt_new_state(self) -> bool:
        if self.status != INITIALIZING:
            return False
        v = self.curr_view
        for sm in self.new_state_pool.get(v, []):
            if not self._valid_new_state(sm):
                continue
            self.ctx.stop_timer(TIMER_RECOVERY)
            self._adopt(v, sm.body)
            return True
        return False

    def _adopt(self, v: int, body) -> None:
        self.log = self._adopted_log(v, body)
        self.proposed_uids = {x.uid for x in self.log.values() if not x.is_nop}
        if self.ctx.pid != leader(v, self.n):
            self.next = self._next_after_change(v)
        if self.last_delivered >= v * self.batch:
            # Delivered past this view's batch already; rotate right away.
            self.ctx.stop_all_timers()
            self.ctx.advance()
            self.status = ADVANCED
            return
        self.phase = {k: PREPREPARED for k in self.log}
        for k in sorted(self.log):
            self.ctx.send_all(Prepare(v, k, hash_value(self.log[k])))
        self.ctx.start_timer(TIMER_DELIVERY, self.dur_delivery)
        self.status = NORMAL

    def _adopted_log(self, v: int, body) -> dict[int, Value]:
        return {k: x for k, x in body.log}

    # ---- delivery ----

    def _after_delivered(self, x: Value) -> None:
        if not x.is_nop:
            self.queue = [y for y in self.queue if y.uid != x.uid]
        if self.status != NORMAL:
            return
        if self.last_delivered == self.curr_view * self.batch:
            self.ctx.stop_all_timers()
            self.ctx.advance()
            self.status = ADVANCED
        elif self.last_delivered > (self.curr_view - 1) * self.batch:
            self.ctx.stop_timer(TIMER_DELIVERY)
            self.ctx.start_timer(TIMER_DELIVERY, self.dur_delivery)

    def _rules(self):
        return (
            self._r_leader_new_state,
            self._r_adopt_new_state,
            self._r_preprepares,
            self._r_prepare_quorums,
            self._r_commit_quorums,
            self._r_deliver,
            self._r_propose,
        )
