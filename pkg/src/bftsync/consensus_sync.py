"""Single-shot consensus view synchronizer built on the view synchronizer.

Wraps view entry with a per-view timer whose duration grows with the view
number, turning the raw new_view notifications into consensus views that
eventually stay open long enough for a consensus protocol to decide.
"""
from __future__ import annotations

from typing import Callable

DurationFn = Callable[[int], int]


def default_duration(delta_cap: int) -> DurationFn:
    """F(v) = v * delta_cap: monotone, zero at zero, unbounded."""
    def fn(v: int) -> int:
        return v * delta_cap
    return fn


class ConsensusSynchronizer:
    """Client node: one initial advance, then advance on each view timeout."""

    TIMER = "view"

    def __init__(self, ctx, duration_fn: DurationFn | None = None):
        self.ctx = ctx
        self.duration_fn = duration_fn or default_duration(ctx.params.delta_cap)
        self.started = False
        self.current = 0

    def on_start(self) -> None:
        if self.started:
            return
        self.started = True
        # A view entry that raced ahead of start() already counts as the
        # initial attempt, so only advance from view zero.
        if self.current == 0:
            self.ctx.advance()

    def on_new_view(self, v: int) -> None:
        self.ctx.stop_timer(self.TIMER)
        self.ctx.start_timer(self.TIMER, self.duration_fn(v))
        self.current = v
        self.ctx.record_consensus_view(v)

    def on_timer(self, key: str) -> None:
        self.ctx.advance()

    def on_message(self, sm) -> None:
        pass

    def on_periodic(self) -> None:
        pass

    def broadcast(self, x) -> None:
        pass

    def state_sizes(self) -> dict:
        return {"future": 0}
