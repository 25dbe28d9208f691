"""Bounded-space view synchronizer driven by WISH messages.

Each process tracks the maximum view wished for by every peer and derives
two thresholds from that array: `view`, the largest view wished for by a
quorum, and `view_plus`, the largest wished for by f+1 processes. A
process enters `view` once the two coincide above its current view.
State is one integer per peer plus a few scalars.
"""
from __future__ import annotations


def compute_views(max_views: list[int], f: int) -> tuple[int, int]:
    """Thresholds of the wish array.

    view is the largest v supported by at least 2f+1 entries, view_plus the
    largest supported by at least f+1; zero if no such positive v exists.
    Computed by sorting descending and reading off positions 2f and f,
    which are the (2f+1)-th and (f+1)-th highest entries.
    """
    ranked = sorted(max_views, reverse=True)
    view, view_plus = ranked[2 * f], ranked[f]
    # The picked values are entries of the array, so the supports are real.
    assert view in max_views and view_plus in max_views
    assert view_plus >= view
    return view, view_plus


class WishSynchronizer:
    """Per-process synchronizer state plus the WISH exchange rules.

    The methods return the WISH views to send rather than sending, so the
    class stays independent of the transport.
    """

    def __init__(self, pid: int, n: int, f: int):
        self.pid = pid
        self.n = n
        self.f = f
        self.max_views = [0] * n
        self.view = 0
        self.view_plus = 0
        self.advanced = False
        self.last_entered = 0

    def _wish(self) -> int:
        return max(self.view + 1, self.view_plus)

    def advance(self) -> int:
        """Returns the view to wish for; the caller sends WISH to all."""
        self.advanced = True
        return self._wish()

    def periodic(self) -> int | None:
        """Retransmission tick: returns a WISH view to re-send, if any."""
        if self.advanced:
            return self._wish()
        if self.view_plus > 0:
            return self.view_plus
        return None

    def handle_wish(self, sender: int, v: int) -> tuple[int | None, int | None]:
        """Processes WISH(v) from sender.

        Returns (relay, entered): a view to re-announce to all when
        view_plus grew, and a view to enter when the quorum threshold
        caught up with it.
        """
        slot = sender - 1
        if v <= self.max_views[slot]:
            return None, None
        self.max_views[slot] = v
        prev_view, prev_plus = self.view, self.view_plus
        self.view, self.view_plus = compute_views(self.max_views, self.f)
        entered = None
        if self.view_plus == self.view and self.view > prev_view:
            entered = self.view
            self.last_entered = self.view
            self.advanced = False
        relay = self.view_plus if self.view_plus > prev_plus else None
        return relay, entered

    def entries(self) -> int:
        """Stored view entries, for the space accounting."""
        return len(self.max_views)


class ToyClient:
    """Minimal synchronizer client: advance on start and on each timeout."""

    TIMER = "toy"

    def __init__(self, ctx):
        self.ctx = ctx

    def on_start(self) -> None:
        self.ctx.advance()

    def on_new_view(self, v: int) -> None:
        self.ctx.stop_timer(self.TIMER)
        self.ctx.start_timer(self.TIMER, self.ctx.params.tau)

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
