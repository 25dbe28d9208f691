"""View-duration clients: the growing-timeout one and the fixed-tau toy."""
from hypothesis import given, strategies as st

from bftsync.consensus_sync import ConsensusSynchronizer, default_duration
from bftsync.synchronizer import ToyClient
from support import FakeCtx


def test_default_duration_scales_with_the_view():
    fn = default_duration(100)
    assert fn(1) == 100
    assert fn(5) == 500
    assert default_duration(2)(7) == 14


@given(st.integers(min_value=1, max_value=50), st.integers(min_value=1, max_value=10**6))
def test_default_duration_is_strictly_monotone(cap, v):
    fn = default_duration(cap)
    assert fn(v) < fn(v + 1)


def test_start_requests_the_first_view_once():
    ctx = FakeCtx(pid=1)
    c = ConsensusSynchronizer(ctx)
    c.on_start()
    c.on_start()
    assert ctx.advances == 1


def test_view_entry_before_start_counts_as_the_first_attempt():
    ctx = FakeCtx(pid=1)
    c = ConsensusSynchronizer(ctx)
    c.on_new_view(1)  # raced ahead of the start event
    c.on_start()
    assert ctx.advances == 0
    assert ctx.consensus_views == [1]


def test_each_view_entry_restarts_the_timer_with_its_duration():
    ctx = FakeCtx(pid=1, delta_cap=100)
    c = ConsensusSynchronizer(ctx)
    c.on_new_view(1)
    assert ctx.timers == {"view": 100}
    c.on_new_view(3)
    assert ctx.timers == {"view": 300}
    assert ctx.consensus_views == [1, 3]


def test_timer_expiry_asks_for_the_next_view():
    ctx = FakeCtx(pid=1)
    c = ConsensusSynchronizer(ctx)
    c.on_start()
    c.on_new_view(1)
    c.on_timer("view")
    assert ctx.advances == 2


def test_custom_duration_function_is_honoured():
    ctx = FakeCtx(pid=1)
    c = ConsensusSynchronizer(ctx, duration_fn=lambda v: 7)
    c.on_new_view(4)
    assert ctx.timers == {"view": 7}


def test_toy_client_advances_on_start_and_timeout():
    ctx = FakeCtx(pid=1, tau=5)
    c = ToyClient(ctx)
    c.on_start()
    assert ctx.advances == 1
    c.on_new_view(1)
    assert ctx.timers == {"toy": 5}
    c.on_timer("toy")
    assert ctx.advances == 2
    c.on_new_view(2)
    assert ctx.timers == {"toy": 5}
