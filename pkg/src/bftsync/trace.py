"""Trace events and their JSONL serialization.

A trace is an ordered list of TraceEvent records. On disk it is JSON lines:
a header line carrying the format version, then one event per line with
fields {t, pid, kind, data}. Serialization is canonical (fixed key order,
no whitespace) so identical runs produce byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

TRACE_FORMAT = 1

ENTER_VIEW = "EnterView"
ADVANCE_CALL = "AdvanceCall"
SEND = "Send"
RECEIVE = "Receive"
DELIVER = "Deliver"
BROADCAST_CALL = "BroadcastCall"
TIMER_START = "TimerStart"
TIMER_STOP = "TimerStop"
TIMER_EXPIRE = "TimerExpire"
MEM_SAMPLE = "MemSample"
ENTER_CONSENSUS_VIEW = "EnterConsensusView"

KINDS = frozenset({
    ENTER_VIEW, ADVANCE_CALL, SEND, RECEIVE, DELIVER, BROADCAST_CALL,
    TIMER_START, TIMER_STOP, TIMER_EXPIRE, MEM_SAMPLE, ENTER_CONSENSUS_VIEW,
})


@dataclass
class TraceEvent:
    t: int
    pid: int
    kind: str
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return json.dumps(
            {"t": self.t, "pid": self.pid, "kind": self.kind, "data": self.data},
            separators=(",", ":"),
        )


class TraceParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"trace line {lineno}: {msg}")
        self.lineno = lineno


def to_jsonl(events: list[TraceEvent]) -> str:
    header = json.dumps({"format": TRACE_FORMAT}, separators=(",", ":"))
    return "\n".join([header] + [e.line() for e in events]) + "\n"


def parse_jsonl(text: str) -> list[TraceEvent]:
    events: list[TraceEvent] = []
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise TraceParseError(lineno, f"invalid JSON: {exc}") from exc
        if not saw_header:
            if obj.get("format") != TRACE_FORMAT:
                raise TraceParseError(lineno, f"unsupported trace format {obj.get('format')!r}")
            saw_header = True
            continue
        try:
            kind = obj["kind"]
            if kind not in KINDS:
                raise TraceParseError(lineno, f"unknown event kind {kind!r}")
            events.append(TraceEvent(int(obj["t"]), int(obj["pid"]), kind, obj.get("data", {})))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, TraceParseError):
                raise
            raise TraceParseError(lineno, f"malformed event: {exc}") from exc
    if not saw_header:
        raise TraceParseError(1, "missing format header")
    return events


def write_jsonl(path, events: list[TraceEvent]) -> None:
    with open(path, "w") as fh:
        fh.write(to_jsonl(events))


def read_jsonl(path) -> list[TraceEvent]:
    with open(path) as fh:
        return parse_jsonl(fh.read())
