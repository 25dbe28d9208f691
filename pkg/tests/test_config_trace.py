"""Configuration validation and trace serialization round trips."""
import json

import pytest
from hypothesis import given, strategies as st

from bftsync.config import ConfigError, ScenarioConfig
from bftsync.trace import (
    TraceEvent, TraceParseError, parse_jsonl, read_jsonl, to_jsonl,
    write_jsonl,
)


def test_defaults_validate_and_expand_per_process_lists():
    cfg = ScenarioConfig()
    assert cfg.drift == ((1, 1),) * 4
    assert cfg.start_times == (0, 0, 0, 0)
    assert cfg.quorum == 3
    assert cfg.correct() == (1, 2, 3, 4)


@pytest.mark.parametrize("kwargs,fragment", [
    (dict(n=5), "must equal"),
    (dict(faulty_set=(1, 2)), "exceeds f"),
    (dict(faulty_set=(9,)), "process ids"),
    (dict(delta=3, delta_cap=2), "delta"),
    (dict(delta=0), "delta"),
    (dict(gst=1000, horizon=1000), "horizon"),
    (dict(rho=0), "rho"),
    (dict(protocol="paxos"), "unknown protocol"),
    (dict(drift=((1, 1),) * 3), "drift"),
    (dict(drift=((0, 1),) * 4), "positive rational"),
    (dict(start_times=(0, 0, 0)), "start_times"),
    (dict(pre_gst_drop_pct=101), "drop_pct"),
    (dict(fault_plan=({"kind": "nap", "pid": 1},), faulty_set=(1,)), "unknown fault"),
    (dict(fault_plan=({"kind": "crash", "pid": 2},), faulty_set=(1,)), "not in faulty_set"),
    (dict(workload=({"pid": 7, "uid": "x", "at": 0},)), "out of range"),
    (dict(workload=({"pid": 1, "uid": "", "at": 0},)), "nonempty uid"),
    (dict(workload=({"pid": 1, "uid": "x"}, {"pid": 2, "uid": "x"})), "unique"),
])
def test_invalid_configs_are_rejected(kwargs, fragment):
    with pytest.raises(ConfigError, match=fragment):
        ScenarioConfig(**kwargs)


def test_config_json_round_trip_is_exact():
    cfg = ScenarioConfig(
        faulty_set=(3,), gst=60, delta=2, delta_cap=4, seed=9,
        protocol="hotstuff-light", drift=((2, 1), (1, 1), (1, 2), (1, 1)),
        fault_plan=({"kind": "crash", "pid": 3, "at": 10},),
        workload=({"pid": 1, "at": 70, "uid": "w1"},),
    )
    again = ScenarioConfig.from_json(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()


def test_unknown_fields_and_foreign_format_are_rejected():
    base = ScenarioConfig().to_dict()
    base["typo_field"] = 1
    with pytest.raises(ConfigError, match="unknown config fields"):
        ScenarioConfig.from_dict(base)
    base2 = ScenarioConfig().to_dict()
    base2["format"] = 2
    with pytest.raises(ConfigError, match="format"):
        ScenarioConfig.from_dict(base2)
    with pytest.raises(ConfigError, match="JSON"):
        ScenarioConfig.from_json("not json")
    with pytest.raises(ConfigError, match="object"):
        ScenarioConfig.from_json("[1,2]")


def test_clock_rate_accessor_uses_one_based_pids():
    cfg = ScenarioConfig(drift=((1, 2), (1, 1), (2, 1), (1, 1)))
    assert cfg.rate(1) == 0.5
    assert cfg.rate(3) == 2


def test_trace_round_trip_and_canonical_lines():
    events = [
        TraceEvent(0, 1, "AdvanceCall", {"v": 1}),
        TraceEvent(3, 2, "EnterView", {"v": 1}),
        TraceEvent(5, 2, "Deliver", {"value": "x", "position": 1, "valid": True}),
    ]
    text = to_jsonl(events)
    lines = text.splitlines()
    assert lines[0] == '{"format":1}'
    assert lines[1] == '{"t":0,"pid":1,"kind":"AdvanceCall","data":{"v":1}}'
    assert parse_jsonl(text) == events


def test_trace_parse_errors_carry_line_numbers():
    with pytest.raises(TraceParseError) as err:
        parse_jsonl('{"format":1}\nnot json\n')
    assert err.value.lineno == 2

    with pytest.raises(TraceParseError, match="unknown event kind"):
        parse_jsonl('{"format":1}\n{"t":0,"pid":1,"kind":"Nope","data":{}}\n')

    with pytest.raises(TraceParseError, match="format"):
        parse_jsonl('{"t":0,"pid":1,"kind":"EnterView","data":{}}\n')

    with pytest.raises(TraceParseError, match="missing format header"):
        parse_jsonl("")

    with pytest.raises(TraceParseError, match="malformed"):
        parse_jsonl('{"format":1}\n{"pid":1,"kind":"EnterView"}\n')


def test_trace_file_round_trip(tmp_path):
    events = [TraceEvent(1, 1, "TimerStart", {"key": "toy", "duration": 5})]
    path = tmp_path / "t.jsonl"
    write_jsonl(path, events)
    assert read_jsonl(path) == events


@given(st.lists(st.tuples(
    st.integers(min_value=0, max_value=10**6),
    st.integers(min_value=1, max_value=4),
    st.sampled_from(["EnterView", "AdvanceCall", "TimerExpire"]),
    st.integers(min_value=0, max_value=99),
), max_size=20))
def test_trace_round_trip_property(rows):
    events = [TraceEvent(t, pid, kind, {"v": v}) for t, pid, kind, v in rows]
    assert parse_jsonl(to_jsonl(events)) == events


def test_blank_lines_are_ignored_by_the_parser():
    text = '{"format":1}\n\n{"t":0,"pid":1,"kind":"EnterView","data":{"v":1}}\n\n'
    assert len(parse_jsonl(text)) == 1


def test_config_to_json_ends_with_newline_and_sorts_keys():
    text = ScenarioConfig().to_json()
    assert text.endswith("\n")
    keys = list(json.loads(text))
    assert keys == sorted(keys)
