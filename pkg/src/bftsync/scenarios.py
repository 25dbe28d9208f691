"""Named scenario catalog.

Each entry builds a ScenarioConfig from a seed. The seed drives every knob
that is allowed to vary (actual delay, start times, workload timing), so a
catalog name plus a seed pins the run completely. Parameters that feed the
latency checks are chosen to satisfy the corresponding premises: initial
timeouts sit on or under the capped values, and the actual delay stays
strictly below the cap wherever a capped bound is being exercised.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from .config import ScenarioConfig


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    build: Callable[[int], ScenarioConfig]
    # optional extra delivery deadline (slack after stabilization), per config
    deadline: Callable[[ScenarioConfig], int] | None = None


def _rng(name: str, seed: int) -> random.Random:
    return random.Random(f"{name}:{seed}")


def _workload(rng, pids, count, lo, hi, prefix="req"):
    return tuple({"pid": rng.choice(pids), "at": rng.randint(lo, hi),
                  "uid": f"{prefix}{i}"} for i in range(count))


def _good_case(seed: int) -> ScenarioConfig:
    rng = _rng("good-case", seed)
    cap = 4
    starts = tuple(rng.randint(0, 4) for _ in range(4))
    lo = max(starts) + 1
    return ScenarioConfig(
        seed=seed, protocol="pbft-light", gst=0,
        delta=rng.randint(1, 3), delta_cap=cap, latency_mode=True,
        init_dur_recovery=6 * cap, init_dur_delivery=4 * cap,
        start_times=starts,
        workload=_workload(rng, (1, 2, 3, 4), rng.randint(2, 4), lo, lo + 25),
        horizon=300)


def _crashed_leader(seed: int) -> ScenarioConfig:
    rng = _rng("crashed-leader", seed)
    cap, t_b = 3, 10
    batch = rng.choice((1, 2))
    return ScenarioConfig(
        seed=seed, protocol="pbft-rotation", gst=0,
        delta=rng.randint(1, cap), delta_cap=cap, t_broadcast=t_b, batch=batch,
        faulty_set=(2,), fault_plan=({"kind": "crash", "pid": 2, "at": 0},),
        init_dur_recovery=4 * cap + 1,
        init_dur_delivery=max(4 * cap, t_b + 3 * cap) + cap + 1,
        workload=_workload(rng, (1, 3, 4), rng.randint(1, 2), 1, 8),
        mem_sampling=True, horizon=300)


def _equivocating_leader(seed: int) -> ScenarioConfig:
    rng = _rng("equivocating-leader", seed)
    gst = rng.randint(0, 25)
    return ScenarioConfig(
        seed=seed, protocol="pbft-light", gst=gst,
        delta=rng.randint(1, 3), delta_cap=4,
        faulty_set=(1,), fault_plan=({"kind": "equivocate", "pid": 1},),
        init_dur_recovery=15, init_dur_delivery=12,
        start_times=tuple(rng.randint(0, 3) for _ in range(4)),
        pre_gst_drop_pct=20 if gst else 0, pre_gst_delay_max=6,
        workload=_workload(rng, (2, 3, 4), rng.randint(2, 3), 5, 80),
        horizon=400)


def _pre_gst_chaos(seed: int) -> ScenarioConfig:
    rng = _rng("pre-GST-chaos", seed)
    cap = 4
    gst = rng.randint(30, 60)
    return ScenarioConfig(
        seed=seed, protocol="pbft-light", gst=gst,
        # the capped recovery bound needs headroom between delay and cap
        delta=rng.randint(1, cap - 1), delta_cap=cap, latency_mode=True,
        faulty_set=(4,), fault_plan=({"kind": "crash", "pid": 4, "at": 0},),
        init_dur_recovery=6 * cap, init_dur_delivery=4 * cap,
        start_times=tuple(rng.randint(0, 5) for _ in range(4)),
        pre_gst_drop_pct=rng.randint(20, 40),
        pre_gst_delay_max=rng.randint(4, 10),
        workload=_workload(rng, (1, 2, 3), 1, 3, gst - 5),
        horizon=400)


def _toy_client(seed: int) -> ScenarioConfig:
    rng = _rng("toy-client", seed)
    tau = rng.randint(2, 6)
    dlt = rng.randint(1, 3)
    gst = rng.randint(0, 40)
    return ScenarioConfig(
        seed=seed, protocol="toy-client", gst=gst,
        delta=dlt, delta_cap=rng.randint(dlt, 4), tau=tau,
        start_times=tuple(rng.randint(0, max(1, gst)) for _ in range(4)),
        pre_gst_drop_pct=rng.randint(0, 30) if gst else 0,
        pre_gst_delay_max=rng.randint(2, 8),
        target_view=100, horizon=gst + 200 * (tau + 2 * dlt))


def _censorship(seed: int) -> ScenarioConfig:
    rng = _rng("censorship", seed)
    cap, t_b = 3, 5
    load = [{"pid": 1, "at": rng.randint(1, 30), "uid": f"v1-req{i}"}
            for i in range(rng.randint(1, 2))]
    load.append({"pid": rng.choice((3, 4)), "at": rng.randint(1, 30),
                 "uid": "open0"})
    return ScenarioConfig(
        seed=seed, protocol="pbft-rotation", gst=0,
        delta=rng.randint(1, cap), delta_cap=cap, t_broadcast=t_b,
        faulty_set=(2,),
        fault_plan=({"kind": "censor", "pid": 2, "victim": 1},),
        init_dur_recovery=4 * cap + 1,
        init_dur_delivery=max(4 * cap, t_b + 3 * cap) + cap + 1,
        start_times=tuple(rng.randint(0, 2) for _ in range(4)),
        workload=tuple(load),
        mem_sampling=True, horizon=300)


def _stale_cert(seed: int) -> ScenarioConfig:
    rng = _rng("stale-cert", seed)
    gst = rng.randint(0, 20)
    return ScenarioConfig(
        seed=seed, protocol="pbft-light", gst=gst,
        delta=rng.randint(1, 3), delta_cap=4,
        faulty_set=(2,), fault_plan=({"kind": "stale-cert", "pid": 2},),
        init_dur_recovery=15, init_dur_delivery=12,
        start_times=tuple(rng.randint(0, 3) for _ in range(4)),
        pre_gst_drop_pct=20 if gst else 0, pre_gst_delay_max=6,
        workload=_workload(rng, (1, 3, 4), rng.randint(2, 3), 5, 80),
        horizon=400)


def _wish_spam(seed: int) -> ScenarioConfig:
    rng = _rng("wish-spam", seed)
    tau = rng.randint(2, 3)
    return ScenarioConfig(
        seed=seed, protocol="toy-client", gst=0,
        delta=1, delta_cap=2, tau=tau,
        faulty_set=(4,), fault_plan=({"kind": "wish-spam", "pid": 4},),
        start_times=tuple(rng.randint(0, 2) for _ in range(4)),
        target_view=1000, mem_sampling=True,
        horizon=1100 * (tau + 3))


def _consensus_sync(seed: int) -> ScenarioConfig:
    rng = _rng("consensus-sync", seed)
    dlt = rng.randint(1, 3)
    return ScenarioConfig(
        seed=seed, protocol="consensus-sync", gst=rng.randint(10, 40),
        delta=dlt, delta_cap=rng.randint(max(2, dlt), 4),
        start_times=tuple(rng.randint(0, 8) for _ in range(4)),
        pre_gst_drop_pct=rng.randint(20, 35),
        pre_gst_delay_max=rng.randint(3, 8),
        horizon=700)


def _rotation_chaos(seed: int) -> ScenarioConfig:
    rng = _rng("rotation-chaos", seed)
    cap, t_b = 3, 10
    return ScenarioConfig(
        seed=seed, protocol="pbft-rotation", gst=rng.randint(25, 45),
        delta=rng.randint(1, cap - 1), delta_cap=cap, t_broadcast=t_b,
        latency_mode=True,
        init_dur_recovery=4 * cap,
        init_dur_delivery=max(4 * cap, t_b + 3 * cap),
        start_times=tuple(rng.randint(0, 4) for _ in range(4)),
        pre_gst_drop_pct=rng.randint(15, 35),
        pre_gst_delay_max=rng.randint(3, 8),
        workload=_workload(rng, (1, 2, 3, 4), 2, 3, 60),
        horizon=400)


def _hotstuff_good(seed: int) -> ScenarioConfig:
    rng = _rng("hotstuff-good", seed)
    cap, t_b = 3, 10
    return ScenarioConfig(
        seed=seed, protocol="hotstuff-light", gst=0,
        delta=rng.randint(1, cap), delta_cap=cap, t_broadcast=t_b,
        init_dur_recovery=4 * cap + 1,
        init_dur_delivery=max(5 * cap, t_b + 4 * cap) + cap + 1,
        start_times=tuple(rng.randint(0, 2) for _ in range(4)),
        workload=_workload(rng, (1, 2, 3, 4), rng.randint(2, 4), 1, 40),
        horizon=400)


def _hotstuff_equivocate(seed: int) -> ScenarioConfig:
    rng = _rng("hotstuff-equivocate", seed)
    gst = rng.randint(0, 20)
    return ScenarioConfig(
        seed=seed, protocol="hotstuff-light", gst=gst,
        delta=rng.randint(1, 3), delta_cap=4,
        faulty_set=(1,), fault_plan=({"kind": "equivocate", "pid": 1},),
        init_dur_recovery=15, init_dur_delivery=25,
        start_times=tuple(rng.randint(0, 3) for _ in range(4)),
        pre_gst_drop_pct=20 if gst else 0, pre_gst_delay_max=6,
        workload=_workload(rng, (2, 3, 4), rng.randint(2, 3), 5, 80),
        mem_sampling=True, horizon=500)


def _invalid_proposal(seed: int) -> ScenarioConfig:
    rng = _rng("invalid-proposal", seed)
    load = list(_workload(rng, (2, 3, 4), 2, 5, 40))
    load.append({"pid": 1, "at": rng.randint(5, 40), "uid": "bad0",
                 "valid": False})
    return ScenarioConfig(
        seed=seed, protocol="pbft-light", gst=0,
        delta=rng.randint(1, 3), delta_cap=4,
        faulty_set=(1,), fault_plan=({"kind": "invalid-proposal", "pid": 1},),
        init_dur_recovery=15, init_dur_delivery=12,
        workload=tuple(load), horizon=300)


CATALOG: dict[str, Scenario] = {s.name: s for s in (
    Scenario(
        "good-case",
        "fault-free run started after stabilization; first view settles in "
        "one message step and payloads land within four more",
        _good_case,
        deadline=lambda cfg: 120),
    Scenario(
        "crashed-leader",
        "leader rotation with the second leader crashed from the outset; the "
        "view above it settles one recovery timeout later",
        _crashed_leader,
        deadline=lambda cfg: 200),
    Scenario(
        "equivocating-leader",
        "first leader sends conflicting proposals to different replicas; "
        "safety must hold while views rotate past it",
        _equivocating_leader),
    Scenario(
        "pre-GST-chaos",
        "lossy, slow network before stabilization with one crashed replica; "
        "a payload sent during the chaos is delivered on schedule after it",
        _pre_gst_chaos),
    Scenario(
        "toy-client",
        "timeout-driven client that advances on a fixed cadence; checks the "
        "view counter clears the target within the horizon",
        _toy_client),
    Scenario(
        "censorship",
        "leader rotation with one leader that drops one client's payloads "
        "from its batches; rotation still delivers them via honest leaders",
        _censorship,
        deadline=lambda cfg: 150),
    Scenario(
        "stale-cert",
        "faulty replica backs view changes with certificates from stale "
        "views; the new leader must not adopt them over fresher ones",
        _stale_cert),
    Scenario(
        "wish-spam",
        "faulty process floods the synchronizer with far-future view wishes "
        "over a thousand-view run; per-process state must stay bounded",
        _wish_spam),
    Scenario(
        "consensus-sync",
        "view synchronization driven by growing per-view timers under a "
        "lossy pre-stabilization network",
        _consensus_sync),
    Scenario(
        "rotation-chaos",
        "leader rotation started before stabilization on a lossy network; "
        "the catch-up view settles within the capped-timeout bound",
        _rotation_chaos),
    Scenario(
        "hotstuff-good",
        "two-phase voting variant on a stable network; stable views rotate "
        "only on finished batches and payloads spread to all replicas",
        _hotstuff_good,
        deadline=lambda cfg: 200),
    Scenario(
        "hotstuff-equivocate",
        "two-phase voting variant with an equivocating first leader; "
        "safety must hold across the extra voting round",
        _hotstuff_equivocate),
    Scenario(
        "invalid-proposal",
        "leader proposes values that fail the application predicate; "
        "correct replicas must never deliver them",
        _invalid_proposal),
)}


def get_scenario(name: str) -> Scenario:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: "
                       f"{', '.join(CATALOG)}") from None


def build_config(name: str, seed: int) -> ScenarioConfig:
    return get_scenario(name).build(seed)


def deadline_for(name: str, config: ScenarioConfig) -> int | None:
    sc = get_scenario(name)
    return sc.deadline(config) if sc.deadline else None
