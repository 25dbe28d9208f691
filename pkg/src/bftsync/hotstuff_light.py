"""Rotation protocol with an extra vote phase and value locking.

Adds a precommit exchange between the prepare and commit rounds. A quorum
of precommits locks the value at its slot; from then on the process only
accepts a conflicting proposal for that slot if it is justified by a
prepared certificate from a higher view than the lock. View changes ship
per-slot certificates instead of the full report quorum, so followers
validate the new log against their own locks rather than recomputing it.
"""
from __future__ import annotations

from .bft_common import (
    INITIALIZING, NORMAL, PRECOMMITTED, PREPARED,
    Commit, HsNewState, NOP, Precommit, ReplicaBase, SignedMsg, Value,
    TIMER_BROADCAST, check_prepared, hash_value, leader,
)
from .pbft_rotation import PbftRotationReplica


class HotStuffLightReplica(PbftRotationReplica):
    def __init__(self, ctx):
        super().__init__(ctx)
        self.lock_view: dict[int, int] = {}

    def on_start(self) -> None:
        self.ctx.advance()
        self._pump()

    def _cap_delivery(self, d: int) -> int:
        p = self.ctx.params
        return min(d, max(5 * p.delta_cap, p.t_broadcast + 4 * p.delta_cap)) if p.latency_mode else d

    # ---- vote pipeline: prepare -> precommit -> commit ----

    def _after_prepared(self, v: int, k: int, h: str) -> None:
        self.ctx.send_all(Precommit(v, k, h))

    def _r_precommit_quorums(self) -> bool:
        if self.status != NORMAL:
            return False
        v = self.curr_view
        for key in sorted(self.vote_pools["PRECOMMIT"]):
            kv, k, h = key
            if kv != v or self.phase.get(k) != PREPARED:
                continue
            if k not in self.prep_log or hash_value(self.prep_log[k]) != h:
                continue
            if self._quorum_for("PRECOMMIT", key) is None:
                continue
            self.lock_view[k] = v
            self.phase[k] = PRECOMMITTED
            self.ctx.send_all(Commit(v, k, h))
            return True
        return False

    def _commit_ready_phase(self) -> str:
        return PRECOMMITTED

    def _deliver_enabled(self) -> bool:
        return self.status == NORMAL

    # ---- view change ----

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
        log_p, best_view, best_cert = self._select_winners(M)
        ks = sorted(log_p)
        self.sent_new_state_for = v
        self.next = self._next_after_change(v)
        self.ctx.send_all(HsNewState(
            v,
            tuple((k, log_p[k]) for k in ks),
            tuple((k, best_view[k]) for k in ks),
            tuple((k, best_cert[k]) for k in ks),
        ))
        self.ctx.start_timer(TIMER_BROADCAST, self.ctx.params.t_broadcast)
        return True

    def _valid_new_state(self, sm: SignedMsg) -> bool:
        body = sm.body
        if not isinstance(body, HsNewState) or sm.signer != leader(body.view, self.n):
            return False
        v = body.view
        log_p = dict(body.log)
        pv = dict(body.prep_view)
        certs = dict(body.cert)
        if set(log_p) != set(pv) or set(log_p) != set(certs):
            return False
        # Every slot this process is locked on must be covered.
        if any(lv > 0 and k not in log_p for k, lv in self.lock_view.items()):
            return False
        for k, x in log_p.items():
            if not (0 < pv[k] < v):
                return False
            if not check_prepared(certs[k], pv[k], k, hash_value(x), self.f, self.ctx.auth):
                return False
            lock = self.lock_view.get(k, 0)
            if lock > 0 and pv[k] <= lock:
                # A certificate no newer than the lock is acceptable only
                # for the locked value itself.
                if pv[k] < lock or x.uid != self.prep_log[k].uid:
                    return False
        return True

    def _adopted_log(self, v: int, body) -> dict[int, Value]:
        # Followers do the duplicate filtering the leader skipped: holes
        # and stale duplicates below the new proposing range become nop.
        log_p = dict(body.log)
        pv = dict(body.prep_view)
        filled: dict[int, Value] = {}
        for k in range(1, (v - 1) * self.batch + 1):
            x = log_p.get(k)
            if x is None:
                filled[k] = NOP
                continue
            if not x.is_nop:
                for k2, y in log_p.items():
                    if k2 != k and y.uid == x.uid:
                        if pv[k2] > pv[k]:
                            x = NOP
                            break
                        assert pv[k2] < pv[k], "duplicate value prepared at equal views"
            filled[k] = x
        return filled

    def _rules(self):
        return (
            self._r_leader_new_state,
            self._r_adopt_new_state,
            self._r_preprepares,
            self._r_prepare_quorums,
            self._r_precommit_quorums,
            self._r_commit_quorums,
            self._r_deliver,
            self._r_propose,
        )
