"""The oracles must reproduce the frozen hand-derived values exactly."""
import oracles


def test_rank_views_frozen():
    for (arr, f), expected in oracles.FROZEN["rank_views"].items():
        assert oracles.rank_views(list(arr), f) == expected


def test_clock_frozen():
    assert oracles.clock_reading(1, 2, 100, 100) == oracles.FROZEN["clock_half_rate_at_gst"]


def test_timer_frozen():
    got = oracles.timer_real_ticks(2, 1, 10**6, 0, 10)
    assert got == oracles.FROZEN["fast_clock_timer_real_ticks"]


def test_dedup_frozen():
    entries = {2: ("x", 3), 5: ("x", 1)}
    assert oracles.dedup_log(entries, 6) == oracles.FROZEN["dedup_example"]
