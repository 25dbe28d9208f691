"""Shared helpers for driving protocol nodes outside the simulator."""
import random

from bftsync.bft_common import NewLeader, NewState, SigAuthority
from bftsync.harness import ReplicaParams


class FakeCtx:
    """Stands in for the per-process runtime shell.

    Records everything the node does instead of scheduling it, so unit
    tests can assert on sent messages, timers and deliveries directly.
    """

    def __init__(self, pid=1, n=4, f=1, faulty=(), directive=None, **params):
        defaults = dict(n=n, f=f, delta_cap=2, rho=10, tau=5, t_broadcast=10,
                        batch=1, init_dur_delivery=10, init_dur_recovery=10,
                        latency_mode=False)
        defaults.update(params)
        self.pid = pid
        self.params = ReplicaParams(**defaults)
        self.auth = SigAuthority(frozenset(faulty))
        self.directive = directive or {}
        self.rng = random.Random(0)
        self.sent = []        # (dest | "all", body)
        self.timers = {}      # key -> duration
        self.delivered = []   # (value, position)
        self.advances = 0
        self.broadcast_calls = []
        self.consensus_views = []

    # node-facing API, mirroring the shell

    def send_to(self, dest, body):
        self.sent.append((dest, body))

    def send_all(self, body):
        self.sent.append(("all", body))

    def advance(self):
        self.advances += 1

    def start_timer(self, key, duration):
        assert duration >= 1
        self.timers[key] = duration

    def stop_timer(self, key):
        self.timers.pop(key, None)

    def stop_all_timers(self):
        self.timers.clear()

    def timer_active(self, key):
        return key in self.timers

    def deliver(self, x, position):
        self.delivered.append((x, position))

    def record_broadcast_call(self, x):
        self.broadcast_calls.append(x)

    def record_consensus_view(self, v):
        self.consensus_views.append(v)

    def local_now(self):
        return 0

    # assertion helpers

    def sent_bodies(self, mtype=None):
        out = [b for _, b in self.sent]
        if mtype is not None:
            out = [b for b in out if b.MTYPE == mtype]
        return out

    def clear(self):
        self.sent.clear()


def empty_new_state(ctx, view, signers=(1, 2, 3)):
    """A well-formed NEW_STATE for `view` justified by empty reports."""
    nl = NewLeader(view=view, prep_view=(), prep_log=(), cert=())
    just = tuple(ctx.auth.sign(nl, s) for s in signers)
    from bftsync.bft_common import leader
    return ctx.auth.sign(NewState(view, (), just), leader(view, ctx.params.n))


def client_broadcast(replica, x):
    """Call broadcast() and echo the self-addressed copy like the shell does."""
    from bftsync.bft_common import Broadcast
    replica.broadcast(x)
    replica.on_message(replica.ctx.auth.sign(Broadcast(x), replica.ctx.pid))


def enter_normal(replica, view=1):
    """Bring a fresh replica into `view` with an empty adopted log."""
    ctx = replica.ctx
    replica.on_new_view(view)
    shortcut = getattr(replica, "_view1_shortcut", None)
    if shortcut is not None and shortcut(view):
        from bftsync.bft_common import leader
        sm = ctx.auth.sign(NewState(view, (), ()), leader(view, ctx.params.n))
    else:
        sm = empty_new_state(ctx, view)
    replica.on_message(sm)
    assert replica.status == "normal"
    ctx.clear()
    return replica
