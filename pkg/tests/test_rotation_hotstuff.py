"""Rotating-leader protocols: batch ownership, nop filler, locking."""
from bftsync.bft_common import (
    Certificate, Commit, HsNewState, NewLeader, Precommit, Prepare,
    PrePrepare, Value, hash_value,
)
from bftsync.hotstuff_light import HotStuffLightReplica
from bftsync.pbft_rotation import PbftRotationReplica
from support import FakeCtx, client_broadcast, empty_new_state, enter_normal


def fresh_rotation(pid=2, view=1, **params):
    r = PbftRotationReplica(FakeCtx(pid=pid, **params))
    return enter_normal(r, view)


def hs_enter(r, view):
    """Hotstuff view entry; an empty certificate log needs no quorum."""
    r.on_new_view(view)
    body = HsNewState(view, (), (), ())
    r.on_message(r.ctx.auth.sign(body, (view - 1) % r.n + 1))
    assert r.status == "normal"
    r.ctx.clear()
    return r


def fresh_hotstuff(pid=2, view=1, **params):
    return hs_enter(HotStuffLightReplica(FakeCtx(pid=pid, **params)), view)


def feed_votes(r, cls, v, k, h, signers=(1, 3, 4)):
    for s in signers:
        r.on_message(r.ctx.auth.sign(cls(v, k, h), s))


# ---- rotation ----

def test_leader_proposes_from_queue_within_batch():
    r = fresh_rotation(pid=1)
    ctx = r.ctx
    client_broadcast(r, Value("a"))
    props = ctx.sent_bodies("PREPREPARE")
    assert [(b.view, b.k, b.value.uid) for b in props] == [(1, 1, "a")]
    assert r.next == 2
    assert not ctx.timer_active("broadcast")  # batch exhausted
    client_broadcast(r, Value("b"))  # beyond this view's slots
    assert len(ctx.sent_bodies("PREPREPARE")) == 1
    assert [x.uid for x in r.queue] == ["b"]


def test_filler_timer_pads_the_batch_with_nop():
    ctx = FakeCtx(pid=1, batch=2, t_broadcast=7)
    r = PbftRotationReplica(ctx)
    r.on_new_view(1)
    for s in (2, 3, 4):
        r.on_message(ctx.auth.sign(NewLeader(1, (), (), ()), s))
    assert len(ctx.sent_bodies("NEW_STATE")) == 1
    assert ctx.timers.get("broadcast") == 7
    r.on_message(empty_new_state(ctx, 1))  # adopt own announcement
    assert r.status == "normal"

    r.on_timer("broadcast")
    first = ctx.sent_bodies("PREPREPARE")
    assert [(b.k, b.value.is_nop) for b in first] == [(1, True)]
    assert ctx.timer_active("broadcast")  # one slot left in the batch

    client_broadcast(r, Value("c"))
    both = ctx.sent_bodies("PREPREPARE")
    assert [(b.k, b.value.uid) for b in both[1:]] == [(2, "c")]
    assert not ctx.timer_active("broadcast")


def test_next_slot_after_view_change():
    r = fresh_rotation(pid=2, batch=2)
    assert r._next_after_change(3) == 5
    assert r._next_after_change(1) == 1


def test_follower_ignores_proposal_outside_leader_range():
    r = fresh_rotation(pid=2, batch=1)
    r.on_message(r.ctx.auth.sign(PrePrepare(1, 2, Value("a")), 1))
    assert r.log == {}  # slot 2 belongs to view 2


def rotation_new_state(ctx, view, batch=1):
    """Rotation NEW_STATE: prior slots are nop-covered, reports are empty."""
    from bftsync.bft_common import NOP, NewLeader, NewState, leader
    nl = NewLeader(view=view, prep_view=(), prep_log=(), cert=())
    just = tuple(ctx.auth.sign(nl, s) for s in (1, 2, 3))
    log = tuple((k, NOP) for k in range(1, (view - 1) * batch + 1))
    return ctx.auth.sign(NewState(view, log, just), leader(view, ctx.params.n))


def test_adopt_after_the_batch_was_delivered_rotates_immediately():
    ctx = FakeCtx(pid=3)
    r = PbftRotationReplica(ctx)
    r.last_delivered = 2
    r.on_new_view(2)
    r.on_message(rotation_new_state(ctx, 2))
    assert r.status == "advanced"
    assert ctx.advances == 1
    assert ctx.timers == {}


def test_delivering_the_batch_end_rotates():
    r = fresh_rotation(pid=2)
    ctx = r.ctx
    x = Value("a")
    r.on_message(ctx.auth.sign(PrePrepare(1, 1, x), 1))
    feed_votes(r, Prepare, 1, 1, hash_value(x))
    feed_votes(r, Commit, 1, 1, hash_value(x))
    assert ctx.delivered == [(x, 1)]
    assert r.status == "advanced" and ctx.advances == 1
    assert ctx.timers == {}


def test_mid_batch_delivery_restarts_the_delivery_timer():
    r = fresh_rotation(pid=2, batch=2, init_dur_delivery=9)
    ctx = r.ctx
    x = Value("a")
    r.on_message(ctx.auth.sign(PrePrepare(1, 1, x), 1))
    feed_votes(r, Prepare, 1, 1, hash_value(x))
    feed_votes(r, Commit, 1, 1, hash_value(x))
    assert ctx.delivered == [(x, 1)]
    assert r.status == "normal" and ctx.advances == 0
    assert ctx.timers.get("delivery") == 9


def test_rotation_timeouts_are_capped_in_latency_mode():
    r = fresh_rotation(pid=2, latency_mode=True, delta_cap=2, t_broadcast=10,
                       tau=50)
    r.on_timer("recovery")
    assert r.dur_recovery == 8            # 4 * cap
    assert r.dur_delivery == 16           # max(4*cap, t_broadcast + 3*cap)


# ---- hotstuff ----

def test_hotstuff_starts_by_requesting_a_view():
    ctx = FakeCtx(pid=2)
    r = HotStuffLightReplica(ctx)
    r.on_start()
    assert ctx.advances == 1


def test_vote_pipeline_inserts_a_lock_phase():
    r = fresh_hotstuff(pid=2)
    ctx = r.ctx
    x = Value("a")
    h = hash_value(x)
    r.on_message(ctx.auth.sign(PrePrepare(1, 1, x), 1))
    assert ctx.sent_bodies("PREPARE") and not ctx.sent_bodies("PRECOMMIT")

    feed_votes(r, Prepare, 1, 1, h)
    assert r.phase[1] == "prepared"
    assert ctx.sent_bodies("PRECOMMIT") and not ctx.sent_bodies("COMMIT")

    feed_votes(r, Precommit, 1, 1, h)
    assert r.lock_view[1] == 1 and r.phase[1] == "precommitted"
    assert ctx.sent_bodies("COMMIT")

    feed_votes(r, Commit, 1, 1, h)
    assert ctx.delivered == [(x, 1)]
    assert r.status == "advanced"  # batch of one completed


def test_commit_quorum_without_lock_does_nothing():
    r = fresh_hotstuff(pid=2)
    ctx = r.ctx
    x = Value("a")
    h = hash_value(x)
    r.on_message(ctx.auth.sign(PrePrepare(1, 1, x), 1))
    feed_votes(r, Prepare, 1, 1, h)
    feed_votes(r, Commit, 1, 1, h)  # skipped the precommit round
    assert r.phase[1] == "prepared"
    assert ctx.delivered == []


def prepared_cert(auth, v, k, x, signers=(1, 2, 3)):
    h = hash_value(x)
    msgs = tuple(auth.sign(Prepare(v, k, h), s) for s in signers)
    return Certificate("prepared", v, k, h, msgs)


def hs_state(auth, view, slot, x, pv):
    cert = prepared_cert(auth, pv, slot, x)
    body = HsNewState(view, ((slot, x),), ((slot, pv),), ((slot, cert),))
    return auth.sign(body, (view - 1) % 4 + 1)


def test_lock_blocks_older_or_conflicting_state():
    r = fresh_hotstuff(pid=2)
    auth = r.ctx.auth
    locked = Value("locked")
    r.lock_view[1] = 2
    r.prep_log[1] = locked

    assert r._valid_new_state(hs_state(auth, 4, 1, locked, pv=2))
    assert not r._valid_new_state(hs_state(auth, 4, 1, Value("other"), pv=2))
    assert not r._valid_new_state(hs_state(auth, 4, 1, locked, pv=1))
    assert r._valid_new_state(hs_state(auth, 4, 1, Value("other"), pv=3))


def test_locked_slot_must_be_covered_by_new_state():
    r = fresh_hotstuff(pid=2)
    r.lock_view[1] = 1
    r.prep_log[1] = Value("locked")
    bare = r.ctx.auth.sign(HsNewState(2, (), (), ()), 2)
    assert not r._valid_new_state(bare)


def test_new_state_requires_real_certificates():
    r = fresh_hotstuff(pid=2)
    auth = r.ctx.auth
    x = Value("x")
    weak = Certificate("prepared", 1, 1, hash_value(x),
                       tuple(auth.sign(Prepare(1, 1, hash_value(x)), s)
                             for s in (1, 2)))
    body = HsNewState(2, ((1, x),), ((1, 1),), ((1, weak),))
    assert not r._valid_new_state(auth.sign(body, 2))
    good = hs_state(auth, 2, 1, x, pv=1)
    assert r._valid_new_state(good)


def test_follower_fills_holes_and_drops_stale_duplicates():
    r = fresh_hotstuff(pid=2, batch=1)
    x = Value("x")
    body = HsNewState(3, ((2, x),), ((2, 1),), ())
    filled = r._adopted_log(3, body)
    assert filled == {1: Value("nop"), 2: x}
    dup = HsNewState(3, ((1, x), (2, x)), ((1, 2), (2, 1)), ())
    filled = r._adopted_log(3, dup)
    assert filled[1] == x and filled[2].is_nop


def test_hotstuff_delivery_cap_exceeds_rotation_cap():
    r = fresh_hotstuff(pid=2, latency_mode=True, delta_cap=2, t_broadcast=10,
                       tau=50)
    r.on_timer("recovery")
    assert r.dur_delivery == 18  # max(5*cap, t_broadcast + 4*cap)
    assert r.dur_recovery == 8
