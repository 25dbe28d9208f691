"""Faulty-process behaviours.

Crashes are enforced by the simulator (events for a crashed pid are
discarded). Everything else is a node-level behaviour: either a
standalone node that ignores the protocol entirely (wish spam), or a
mixin layered over a replica class that corrupts one specific hook
while leaving the rest of the protocol intact. Mixins compose via the
normal MRO, so the same attack code applies to every replica variant.
"""
from __future__ import annotations

from .bft_common import (
    Commit, NewLeader, Precommit, Prepare, PrePrepare, Value, Wish, hash_value,
)
from .harness import NODE_CLASSES


class WishSpammer:
    """Broadcasts arbitrary view announcements and nothing else.

    Sends a fresh random view to each destination on every periodic
    tick, which is the strongest attack available to a process that
    only controls its own signing key.
    """

    def __init__(self, ctx):
        self.ctx = ctx
        self.max_view = ctx.directive.get("max_view", 50)

    def _spam(self) -> None:
        for dest in range(1, self.ctx.params.n + 1):
            self.ctx.send_to(dest, Wish(self.ctx.rng.randint(1, self.max_view)))

    def on_start(self) -> None:
        self._spam()

    def on_periodic(self) -> None:
        self._spam()

    def on_new_view(self, v: int) -> None:
        pass

    def on_timer(self, key: str) -> None:
        pass

    def on_message(self, sm) -> None:
        pass

    def broadcast(self, x) -> None:
        pass

    def state_sizes(self) -> dict:
        return {"future": 0}


class EquivocateMixin:
    """Leader proposes two different values for the same slot.

    Odd destinations see the original value, even ones see a twin, and
    the node votes for both hashes in every phase so that whichever
    side can reach a quorum does.
    """

    def _emit_preprepare(self, v: int, k: int, x: Value) -> None:
        if x.is_nop:
            super()._emit_preprepare(v, k, x)
            return
        twin = Value(x.uid + "~twin", x.valid)
        for dest in range(1, self.n + 1):
            self.ctx.send_to(dest, PrePrepare(v, k, x if dest % 2 else twin))
        for y in (x, twin):
            h = hash_value(y)
            self.ctx.send_all(Prepare(v, k, h))
            self.ctx.send_all(Precommit(v, k, h))
            self.ctx.send_all(Commit(v, k, h))


class StaleCertMixin:
    """Reports the first certificate it ever collected per slot.

    The replica runs the protocol correctly but its view-change report
    advertises outdated prepared entries, trying to resurrect old
    values during leader handover.
    """

    def _after_prepared(self, v: int, k: int, h: str) -> None:
        frozen = getattr(self, "_frozen", None)
        if frozen is None:
            frozen = self._frozen = {}
        frozen.setdefault(k, (self.prep_view[k], self.prep_log[k], self.cert[k]))
        super()._after_prepared(v, k, h)

    def _new_leader_report(self, v: int) -> NewLeader:
        frozen = getattr(self, "_frozen", {})
        ks = sorted(k for k, (pv, _, _) in frozen.items() if 0 < pv < v)
        return NewLeader(
            view=v,
            prep_view=tuple((k, frozen[k][0]) for k in ks),
            prep_log=tuple((k, frozen[k][1]) for k in ks),
            cert=tuple((k, frozen[k][2]) for k in ks),
        )


class CensorMixin:
    """Silently drops payloads originating from one victim process.

    Victim ownership is recognised by the uid prefix the workload
    generator uses ("v<pid>-").
    """

    def _censored(self, x: Value) -> bool:
        return x.uid.startswith(f"v{self.ctx.directive['victim']}-")

    def _accept_forward(self, x: Value) -> bool:
        return not self._censored(x) and super()._accept_forward(x)

    def _admit_to_queue(self, x: Value) -> None:
        if not self._censored(x):
            super()._admit_to_queue(x)


class InvalidProposalMixin:
    """Leader swaps every proposal for one that fails validation."""

    def _emit_preprepare(self, v: int, k: int, x: Value) -> None:
        if x.is_nop:
            super()._emit_preprepare(v, k, x)
            return
        super()._emit_preprepare(v, k, Value(x.uid + "~bad", valid=False))


MIXINS = {
    "equivocate": EquivocateMixin,
    "stale-cert": StaleCertMixin,
    "censor": CensorMixin,
    "invalid-proposal": InvalidProposalMixin,
}


def make_node(config, ctx, directive: dict | None):
    base = NODE_CLASSES[config.protocol]
    if directive is None:
        return base(ctx)
    kind = directive["kind"]
    if kind == "wish-spam":
        return WishSpammer(ctx)
    mixin = MIXINS[kind]
    if config.protocol in ("toy-client", "consensus-sync"):
        raise ValueError(f"fault {kind!r} needs a replica protocol")
    composed = type(f"{mixin.__name__}{base.__name__}", (mixin, base), {})
    return composed(ctx)
