"""HTTP facade over the simulator and the trace checker.

The service does no protocol work of its own: every endpoint builds or
parses a ScenarioConfig, hands it to the library, and shapes the result.
Sweeps fan out over a process pool; rows come back ordered by seed so a
repeated sweep is byte-identical.
"""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import trace as tr
from .checker import FAIL, NA, PASS, reports_ok, run_all_checks
from .config import ScenarioConfig
from .harness import run_scenario
from .metrics import TraceMetrics, compute_metrics
from .scenarios import CATALOG, build_config, deadline_for


class Report(BaseModel):
    prop: str
    verdict: str
    detail: str
    witness: list[dict]
    bounds: dict


class RunSummary(BaseModel):
    max_view: int
    catchup_view: int | None
    recovery_latency: int | None
    deliveries: int
    events: int


class RunRequest(BaseModel):
    scenario: str | None = None
    seed: int = 0
    config: dict | None = None
    protocol: str | None = None
    horizon: int | None = None
    deadline: int | None = None
    include_trace: bool = False
    strict_premises: bool = False


class RunResponse(BaseModel):
    ok: bool
    config: dict
    reports: list[Report]
    lines: list[str]
    summary: RunSummary
    trace: str | None = None


class CheckRequest(BaseModel):
    trace: str
    config: dict
    deadline: int | None = None
    strict_premises: bool = False


class CheckResponse(BaseModel):
    ok: bool
    reports: list[Report]
    lines: list[str]


class SweepRequest(BaseModel):
    scenario: str
    seeds: list[int]
    strict_premises: bool = False
    workers: int | None = None


class SweepRow(BaseModel):
    seed: int
    ok: bool
    passes: int
    fails: int
    nas: int
    max_view: int
    recovery_latency: int | None
    delivery_latency_mean: float | None
    delivery_latency_max: int | None
    deliveries: int


class SweepResponse(BaseModel):
    scenario: str
    ok: bool
    rows: list[SweepRow]
    csv: str


class CatalogEntry(BaseModel):
    name: str
    description: str


app = FastAPI(title="bftsync service")


def _build_from_request(req: RunRequest) -> tuple[ScenarioConfig, int | None]:
    if (req.scenario is None) == (req.config is None):
        raise HTTPException(422, "provide exactly one of 'scenario' or 'config'")
    try:
        if req.scenario is not None:
            if req.scenario not in CATALOG:
                raise HTTPException(
                    404, f"unknown scenario {req.scenario!r}; "
                    f"known: {', '.join(CATALOG)}")
            cfg = build_config(req.scenario, req.seed)
            deadline = deadline_for(req.scenario, cfg)
        else:
            cfg = ScenarioConfig.from_dict(req.config)
            deadline = None
        overrides = {k: v for k, v in
                     (("protocol", req.protocol), ("horizon", req.horizon))
                     if v is not None}
        if overrides:
            cfg = replace(cfg, **overrides)
    except (ValueError, TypeError) as exc:
        raise HTTPException(422, str(exc)) from exc
    if req.deadline is not None:
        deadline = req.deadline
    return cfg, deadline


def _delivery_latencies(m: TraceMetrics) -> list[int]:
    out = []
    for t, _, uid, valid in m.broadcasts:
        if not valid:
            continue
        times = [m.deliver_time(pid, uid) for pid in m.correct]
        if all(x is not None for x in times):
            out.append(max(times) - t)
    return out


def _summarize(events, m: TraceMetrics) -> RunSummary:
    v0 = m.catchup_view
    rec = None
    if v0 is not None and m.tl(v0) is not None:
        rec = m.tl(v0) - m.config.gst
    deliveries = sum(len(v) for v in m.delivered.values())
    return RunSummary(max_view=m.max_entered_view(), catchup_view=v0,
                      recovery_latency=rec, deliveries=deliveries,
                      events=len(events))


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/catalog", response_model=list[CatalogEntry])
def catalog() -> list[CatalogEntry]:
    return [CatalogEntry(name=s.name, description=s.description)
            for s in CATALOG.values()]


@app.post("/run", response_model=RunResponse)
def run(req: RunRequest) -> RunResponse:
    cfg, deadline = _build_from_request(req)
    events = run_scenario(cfg)
    reports = run_all_checks(events, cfg, liveness_deadline=deadline)
    m = compute_metrics(events, cfg)
    return RunResponse(
        ok=reports_ok(reports, req.strict_premises),
        config=cfg.to_dict(),
        reports=[Report(**r.to_dict()) for r in reports],
        lines=[r.line() for r in reports],
        summary=_summarize(events, m),
        trace=tr.to_jsonl(events) if req.include_trace else None)


@app.post("/check", response_model=CheckResponse)
def check(req: CheckRequest) -> CheckResponse:
    try:
        cfg = ScenarioConfig.from_dict(req.config)
        events = tr.parse_jsonl(req.trace)
    except (ValueError, TypeError) as exc:
        raise HTTPException(422, str(exc)) from exc
    reports = run_all_checks(events, cfg, liveness_deadline=req.deadline)
    return CheckResponse(ok=reports_ok(reports, req.strict_premises),
                         reports=[Report(**r.to_dict()) for r in reports],
                         lines=[r.line() for r in reports])


def _sweep_cell(scenario: str, seed: int, strict: bool) -> dict:
    cfg = build_config(scenario, seed)
    deadline = deadline_for(scenario, cfg)
    events = run_scenario(cfg)
    reports = run_all_checks(events, cfg, liveness_deadline=deadline)
    m = compute_metrics(events, cfg)
    lats = _delivery_latencies(m)
    summary = _summarize(events, m)
    verdicts = [r.verdict for r in reports]
    return {
        "seed": seed,
        "ok": reports_ok(reports, strict),
        "passes": verdicts.count(PASS),
        "fails": verdicts.count(FAIL),
        "nas": verdicts.count(NA),
        "max_view": summary.max_view,
        "recovery_latency": summary.recovery_latency,
        "delivery_latency_mean": (round(sum(lats) / len(lats), 2)
                                  if lats else None),
        "delivery_latency_max": max(lats) if lats else None,
        "deliveries": summary.deliveries,
    }


CSV_FIELDS = ("scenario", "seed", "ok", "passes", "fails", "nas", "max_view",
              "recovery_latency", "delivery_latency_mean",
              "delivery_latency_max", "deliveries")


def sweep_rows(scenario: str, seeds: list[int], strict: bool = False,
               workers: int | None = None) -> list[dict]:
    seeds = sorted(set(seeds))
    if workers is None:
        workers = min(os.cpu_count() or 1, 8)
    if workers <= 1 or len(seeds) <= 1:
        return [_sweep_cell(scenario, s, strict) for s in seeds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(seeds) // (workers * 4))
        args = [(scenario, s, strict) for s in seeds]
        return list(pool.map(_sweep_cell, *zip(*args), chunksize=chunk))


def rows_to_csv(scenario: str, rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        out = {"scenario": scenario}
        out.update({k: ("" if row[k] is None else row[k])
                    for k in CSV_FIELDS if k != "scenario"})
        w.writerow(out)
    return buf.getvalue()


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest) -> SweepResponse:
    if req.scenario not in CATALOG:
        raise HTTPException(404, f"unknown scenario {req.scenario!r}; "
                            f"known: {', '.join(CATALOG)}")
    if not req.seeds:
        raise HTTPException(422, "at least one seed is required")
    rows = sweep_rows(req.scenario, req.seeds, req.strict_premises,
                      req.workers)
    return SweepResponse(scenario=req.scenario,
                         ok=all(r["ok"] for r in rows),
                         rows=[SweepRow(**r) for r in rows],
                         csv=rows_to_csv(req.scenario, rows))
