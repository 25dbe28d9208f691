"""View synchronizer: threshold computation and the WISH exchange rules."""
from hypothesis import given, strategies as st

import oracles
from bftsync.synchronizer import WishSynchronizer, compute_views


def test_thresholds_frozen_values():
    for (arr, f), expected in oracles.FROZEN["rank_views"].items():
        assert compute_views(list(arr), f) == expected
        assert oracles.rank_views(list(arr), f) == expected


@given(st.integers(min_value=1, max_value=2).flatmap(
    lambda f: st.tuples(st.just(f), st.lists(
        st.integers(min_value=0, max_value=25),
        min_size=3 * f + 1, max_size=3 * f + 1))))
def test_thresholds_match_enumeration(params):
    f, arr = params
    assert compute_views(arr, f) == oracles.rank_views(arr, f)


def test_advance_wish_values():
    s = WishSynchronizer(1, 4, 1)
    assert s.advance() == 1  # max(0+1, 0)
    s.view, s.view_plus = 2, 2
    assert s.advance() == 3
    s.view, s.view_plus = 1, 4
    assert s.advance() == 4


def test_wish_quorum_drives_entry():
    s = WishSynchronizer(1, 4, 1)
    s.advance()
    assert s.handle_wish(1, 1) == (None, None)  # own wish: below threshold
    # second supporter lifts the low threshold and triggers a relay
    assert s.handle_wish(2, 1) == (1, None)
    assert (s.view, s.view_plus) == (0, 1)
    # third supporter completes the quorum
    relay, entered = s.handle_wish(3, 1)
    assert entered == 1 and relay is None
    assert (s.view, s.view_plus) == (1, 1)
    assert s.advanced is False


def test_duplicate_wish_is_inert():
    s = WishSynchronizer(1, 4, 1)
    s.handle_wish(2, 3)
    before = (list(s.max_views), s.view, s.view_plus)
    assert s.handle_wish(2, 3) == (None, None)
    assert s.handle_wish(2, 2) == (None, None)  # lower is also ignored
    assert (list(s.max_views), s.view, s.view_plus) == before


def test_periodic_retransmission():
    s = WishSynchronizer(1, 4, 1)
    assert s.periodic() is None  # nothing to announce yet
    s.view_plus = 3
    assert s.periodic() == 3
    s.advanced = True
    s.view = 3
    assert s.periodic() == 4  # advance pending: wish one past the view


@given(st.lists(st.tuples(st.integers(min_value=1, max_value=4),
                          st.integers(min_value=1, max_value=30)),
                max_size=60))
def test_wish_stream_invariants(stream):
    s = WishSynchronizer(1, 4, 1)
    entered = []
    prev = (0, 0)
    for sender, v in stream:
        relay, new_view = s.handle_wish(sender, v)
        if new_view is not None:
            entered.append(new_view)
        # thresholds never move backwards and stay ordered
        assert (s.view, s.view_plus) >= prev
        assert s.view <= s.view_plus
        if relay is not None:
            assert relay == s.view_plus
        prev = (s.view, s.view_plus)
    assert entered == sorted(set(entered))  # strictly increasing entries
    assert s.entries() == 4  # one stored view per peer, nothing more
