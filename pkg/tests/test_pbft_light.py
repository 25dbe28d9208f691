"""Forwarding-based protocol: proposals, votes, delivery, view changes."""
import oracles
from bftsync.bft_common import (
    NOP, Certificate, Commit, Decision, Forward, NewLeader, NewState,
    Prepare, PrePrepare, Value, hash_value,
)
from bftsync.pbft_light import PbftLightReplica
from support import FakeCtx, client_broadcast, empty_new_state, enter_normal


def fresh(pid=2, view=1, **params):
    r = PbftLightReplica(FakeCtx(pid=pid, **params))
    return enter_normal(r, view)


def feed_votes(r, cls, v, k, h, signers=(1, 2, 3)):
    for s in signers:
        r.on_message(r.ctx.auth.sign(cls(v, k, h), s))


def committed_cert(auth, v, k, x, signers=(1, 2, 3)):
    h = hash_value(x)
    msgs = tuple(auth.sign(Commit(v, k, h), s) for s in signers)
    return Certificate("committed", v, k, h, msgs)


def test_follower_votes_through_a_slot():
    r = fresh(pid=2)
    ctx = r.ctx
    x = Value("a")
    r.on_message(ctx.auth.sign(PrePrepare(1, 1, x), 1))
    assert r.log[1] == x and r.phase[1] == "preprepared"
    assert [b.k for b in ctx.sent_bodies("PREPARE")] == [1]

    feed_votes(r, Prepare, 1, 1, hash_value(x))
    assert r.phase[1] == "prepared" and r.prep_view[1] == 1
    assert [b.k for b in ctx.sent_bodies("COMMIT")] == [1]

    feed_votes(r, Commit, 1, 1, hash_value(x))
    assert r.phase[1] == "committed"
    assert ctx.sent_bodies("DECISION")  # spreads the outcome
    assert ctx.delivered == [(x, 1)]


def test_preprepare_from_non_leader_is_ignored():
    r = fresh(pid=2)
    r.on_message(r.ctx.auth.sign(PrePrepare(1, 1, Value("a")), 3))
    assert r.log == {} and r.ctx.sent_bodies("PREPARE") == []


def test_invalid_value_is_not_voted_for():
    r = fresh(pid=2)
    r.on_message(r.ctx.auth.sign(PrePrepare(1, 1, Value("bad", valid=False)), 1))
    assert r.log == {} and r.ctx.sent_bodies("PREPARE") == []


def test_gap_blocks_delivery():
    r = fresh(pid=2)
    auth = r.ctx.auth
    x, y = Value("x"), Value("y")
    r.on_message(auth.sign(Decision(y, 3, committed_cert(auth, 1, 3, y)), 1))
    r.on_message(auth.sign(Decision(x, 1, committed_cert(auth, 1, 1, x)), 1))
    assert r.ctx.delivered == [(x, 1)]  # position 2 is still missing
    assert r.commit_log[3] == y


def test_decision_needs_a_real_certificate():
    r = fresh(pid=2)
    auth = r.ctx.auth
    x = Value("x")
    weak = committed_cert(auth, 1, 1, x, signers=(1, 2))
    r.on_message(auth.sign(Decision(x, 1, weak), 1))
    assert r.commit_log == {} and r.ctx.delivered == []


def test_leader_forwards_once_per_value():
    r = fresh(pid=1)  # leader of view 1
    ctx = r.ctx
    x = Value("a")
    r.on_message(ctx.auth.sign(Forward(x), 3))
    r.on_message(ctx.auth.sign(Forward(x), 4))  # second copy, same payload
    props = ctx.sent_bodies("PREPREPARE")
    assert [(b.k, b.value.uid) for b in props] == [(1, "a")]
    assert r.next == 2


def test_replica_forwards_pending_payloads_to_the_leader():
    r = fresh(pid=2)
    ctx = r.ctx
    client_broadcast(r, Value("mine"))
    sends = [(d, b) for d, b in ctx.sent if b.MTYPE == "FORWARD"]
    assert sends == [(1, Forward(Value("mine")))]
    assert ctx.timer_active("delivery:mine")


def test_clean_log_matches_dedup_oracle():
    x = Value("x")
    log_p = {2: x, 5: x}
    best = {2: 3, 5: 1}
    cleaned = PbftLightReplica._clean_log(log_p, best, 6)
    uid_or_none = {k: (None if v.is_nop else v.uid) for k, v in cleaned.items()}
    assert uid_or_none == oracles.dedup_log({2: ("x", 3), 5: ("x", 1)}, 6)
    assert uid_or_none == oracles.FROZEN["dedup_example"]


def test_clean_log_fills_holes():
    x, y = Value("x"), Value("y")
    cleaned = PbftLightReplica._clean_log({1: x, 3: y}, {1: 2, 3: 2}, 4)
    assert cleaned == {1: x, 2: NOP, 3: y}


def report(auth, view, slot, x, prepared_in, signers=(1, 2, 3)):
    h = hash_value(x)
    msgs = tuple(auth.sign(Prepare(prepared_in, slot, h), s) for s in signers)
    cert = Certificate("prepared", prepared_in, slot, h, msgs)
    return NewLeader(view, ((slot, prepared_in),), ((slot, x),), ((slot, cert),))


def test_new_leader_quorum_produces_new_state():
    ctx = FakeCtx(pid=2)  # leader of view 2
    r = PbftLightReplica(ctx)
    r.on_new_view(2)
    x = Value("x")
    r.on_message(ctx.auth.sign(report(ctx.auth, 2, 1, x, prepared_in=1), 1))
    r.on_message(ctx.auth.sign(NewLeader(2, (), (), ()), 3))
    assert ctx.sent_bodies("NEW_STATE") == []  # two reports: below quorum
    r.on_message(ctx.auth.sign(NewLeader(2, (), (), ()), 4))
    states = ctx.sent_bodies("NEW_STATE")
    assert len(states) == 1
    assert dict(states[0].log) == {1: x}  # the prepared slot is carried over
    assert r.next == 2


def test_higher_prepared_view_wins_over_stale_report():
    ctx = FakeCtx(pid=2)
    r = PbftLightReplica(ctx)
    r.on_new_view(2)
    # one replica tries to resurrect an older certificate for slot 1
    old, new = Value("old"), Value("new")
    stale_nl = report(ctx.auth, 3, 1, old, prepared_in=1)
    fresh_nl = report(ctx.auth, 3, 1, new, prepared_in=2)
    log_p, best_view, _ = r._select_winners(
        tuple(ctx.auth.sign(nl, s) for nl, s in
              ((stale_nl, 1), (fresh_nl, 3), (NewLeader(3, (), (), ()), 4))))
    assert log_p == {1: new} and best_view == {1: 2}


def test_follower_rejects_tampered_new_state():
    ctx = FakeCtx(pid=3)
    r = PbftLightReplica(ctx)
    r.on_new_view(1)
    good = empty_new_state(ctx, 1).body
    tampered = NewState(1, ((1, Value("planted")),), good.justification)
    r.on_message(ctx.auth.sign(tampered, 1))
    assert r.status == "initializing"  # recomputation does not match
    wrong_signer = ctx.auth.sign(NewState(1, (), good.justification), 2)
    r.on_message(wrong_signer)
    assert r.status == "initializing"
    r.on_message(ctx.auth.sign(good, 1))
    assert r.status == "normal"


def test_view1_shortcut_skips_the_report_round():
    ctx = FakeCtx(pid=1, latency_mode=True)
    r = PbftLightReplica(ctx)
    r.on_new_view(1)
    states = ctx.sent_bodies("NEW_STATE")
    assert len(states) == 1 and states[0].log == ()
    assert ctx.sent_bodies("NEW_LEADER") == []
    follower = PbftLightReplica(FakeCtx(pid=3, latency_mode=True))
    follower.on_new_view(1)
    assert follower.ctx.sent_bodies("NEW_LEADER") == []
    follower.on_message(follower.ctx.auth.sign(NewState(1, (), ()), 1))
    assert follower.status == "normal"


def test_progress_timer_expiry_asks_for_a_view_change():
    r = fresh(pid=2, tau=5)
    before = (r.dur_delivery, r.dur_recovery)
    r.on_timer("recovery")
    assert r.ctx.advances == 1
    assert r.status == "advanced"
    assert (r.dur_delivery, r.dur_recovery) == (before[0] + 5, before[1] + 5)


def test_capped_timeouts_stop_growing():
    r = fresh(pid=2, tau=50, latency_mode=True, delta_cap=2)
    r.on_timer("recovery")
    assert r.dur_recovery == 12  # six times the delay cap
    assert r.dur_delivery == 8   # four times the delay cap


def test_delivered_value_is_not_proposed_again():
    r = fresh(pid=1)
    ctx = r.ctx
    x = Value("a")
    r.on_message(ctx.auth.sign(Forward(x), 3))
    # the shell echoes self-addressed sends; do the same by hand here
    r.on_message(ctx.auth.sign(ctx.sent_bodies("PREPREPARE")[0], 1))
    feed_votes(r, Prepare, 1, 1, hash_value(x))
    feed_votes(r, Commit, 1, 1, hash_value(x))
    assert ctx.delivered == [(x, 1)]
    r.on_message(ctx.auth.sign(Forward(x), 4))  # already delivered: dropped
    assert [b for b in ctx.sent_bodies("PREPREPARE") if b.k == 2] == []
