"""Scenario configuration: parameters for one simulated execution.

All times are integer ticks. The tick_ns field documents the intended
real-time meaning of a tick and has no effect on simulation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from fractions import Fraction

CONFIG_FORMAT = 1

PROTOCOLS = (
    "pbft-light",
    "pbft-rotation",
    "hotstuff-light",
    "toy-client",
    "consensus-sync",
)

# Fault-plan directive kinds understood by the harness.
FAULT_KINDS = (
    "crash",          # stop at tick `at` (at=0 means initially crashed)
    "wish-spam",      # broadcast arbitrary-view WISH messages every rho
    "equivocate",     # leader sends conflicting proposals and votes both ways
    "stale-cert",     # report the oldest prepared certificate on view change
    "censor",         # drop payloads originating from `victim`
    "invalid-proposal",  # propose values failing external validity
)


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    n: int = 4
    f: int = 1
    faulty_set: tuple[int, ...] = ()
    gst: int = 0
    delta: int = 1
    delta_cap: int = 2
    rho: int = 10
    tau: int = 5
    t_broadcast: int = 10
    batch: int = 1
    init_dur_delivery: int = 10
    init_dur_recovery: int = 10
    # Per-process pre-GST clock rate as (num, den); rate 1 after GST.
    drift: tuple[tuple[int, int], ...] = ()
    seed: int = 0
    horizon: int = 1000
    protocol: str = "pbft-light"
    latency_mode: bool = False
    fault_plan: tuple[dict, ...] = ()
    # Tick at which each process calls start(); processes react to incoming
    # messages from tick 0 either way.
    start_times: tuple[int, ...] = ()
    # Application broadcasts: {"pid", "at", "uid", "valid"?}.
    workload: tuple[dict, ...] = ()
    # Network behaviour before GST: drop probability (percent) and the
    # maximum extra delay for messages that do get through.
    pre_gst_drop_pct: int = 0
    pre_gst_delay_max: int = 0
    mem_sampling: bool = False
    # Minimum view the run is expected to reach (checked when set).
    target_view: int | None = None
    tick_ns: int = 1_000_000  # documentation only

    def __post_init__(self):
        if not self.drift:
            self.drift = tuple((1, 1) for _ in range(self.n))
        if not self.start_times:
            self.start_times = tuple(0 for _ in range(self.n))
        self.faulty_set = tuple(sorted(self.faulty_set))
        self.validate()

    def validate(self) -> None:
        if self.n != 3 * self.f + 1:
            raise ConfigError(f"n={self.n} must equal 3f+1 with f={self.f}")
        if len(self.faulty_set) > self.f:
            raise ConfigError(f"|faulty_set|={len(self.faulty_set)} exceeds f={self.f}")
        if any(p < 1 or p > self.n for p in self.faulty_set):
            raise ConfigError("faulty_set members must be process ids in 1..n")
        if len(set(self.faulty_set)) != len(self.faulty_set):
            raise ConfigError("faulty_set has duplicates")
        if self.delta < 1 or self.delta > self.delta_cap:
            raise ConfigError(f"need 1 <= delta <= delta_cap, got {self.delta}, {self.delta_cap}")
        if self.horizon <= self.gst:
            raise ConfigError(f"horizon={self.horizon} must exceed gst={self.gst}")
        if self.gst < 0:
            raise ConfigError("gst must be nonnegative")
        for name in ("rho", "tau", "t_broadcast", "batch", "init_dur_delivery", "init_dur_recovery"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if len(self.drift) != self.n:
            raise ConfigError(f"drift must list {self.n} rates")
        for num, den in self.drift:
            if num < 1 or den < 1:
                raise ConfigError(f"drift rate {num}/{den} must be a positive rational")
        if len(self.start_times) != self.n:
            raise ConfigError(f"start_times must list {self.n} ticks")
        if any(s < 0 for s in self.start_times):
            raise ConfigError("start_times must be nonnegative")
        if not (0 <= self.pre_gst_drop_pct <= 100):
            raise ConfigError("pre_gst_drop_pct must be in 0..100")
        if self.pre_gst_delay_max < 0:
            raise ConfigError("pre_gst_delay_max must be nonnegative")
        for d in self.fault_plan:
            if d.get("kind") not in FAULT_KINDS:
                raise ConfigError(f"unknown fault directive {d.get('kind')!r}")
            pid = d.get("pid")
            if pid not in self.faulty_set:
                raise ConfigError(f"fault directive targets {pid}, not in faulty_set")
        for w in self.workload:
            if w.get("pid") not in range(1, self.n + 1):
                raise ConfigError(f"workload pid {w.get('pid')!r} out of range")
            if not isinstance(w.get("uid"), str) or not w["uid"]:
                raise ConfigError("workload entries need a nonempty uid")
            if w.get("at", 0) < 0:
                raise ConfigError("workload times must be nonnegative")
        uids = [w["uid"] for w in self.workload]
        if len(set(uids)) != len(uids):
            raise ConfigError("workload uids must be unique")

    def rate(self, pid: int) -> Fraction:
        num, den = self.drift[pid - 1]
        return Fraction(num, den)

    @property
    def quorum(self) -> int:
        return 2 * self.f + 1

    def correct(self) -> tuple[int, ...]:
        return tuple(p for p in range(1, self.n + 1) if p not in self.faulty_set)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["format"] = CONFIG_FORMAT
        d["faulty_set"] = list(self.faulty_set)
        d["drift"] = [list(r) for r in self.drift]
        d["start_times"] = list(self.start_times)
        d["fault_plan"] = [dict(x) for x in self.fault_plan]
        d["workload"] = [dict(x) for x in self.workload]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        fmt = d.pop("format", CONFIG_FORMAT)
        if fmt != CONFIG_FORMAT:
            raise ConfigError(f"unsupported config format {fmt!r}")
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for key in ("faulty_set", "start_times"):
            if key in d:
                d[key] = tuple(d[key])
        if "drift" in d:
            d["drift"] = tuple((int(a), int(b)) for a, b in d["drift"])
        for key in ("fault_plan", "workload"):
            if key in d:
                d[key] = tuple(dict(x) for x in d[key])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())
