"""Command line client.

Every subcommand is a thin HTTP call: by default the requests are served
in-process through the ASGI app, so no server needs to run; --server
points the same calls at a live instance instead. Exit code 0 means every
requested check passed or was skipped with its premise explicitly unmet
(pass --strict-premises to refuse the skips), 1 means a violation, 2 means
the request itself failed.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx

from .service import app


def parse_seeds(spec: str) -> list[int]:
    """Seed list: '7', '1,2,5', or 'start:stop' (half-open)."""
    if ":" in spec:
        lo, hi = spec.split(":", 1)
        out = list(range(int(lo), int(hi)))
        if not out:
            raise ValueError(f"empty seed range {spec!r}")
        return out
    return [int(part) for part in spec.split(",")]


def _client(server: str | None) -> httpx.AsyncClient:
    if server:
        return httpx.AsyncClient(base_url=server, timeout=600.0)
    return httpx.AsyncClient(transport=httpx.ASGITransport(app=app),
                             base_url="http://bftsync", timeout=None)


async def _post(client: httpx.AsyncClient, path: str, payload: dict) -> dict:
    resp = await client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        print(f"error: {detail}", file=sys.stderr)
        raise SystemExit(2)
    return resp.json()


def _write(path: str | None, text: str) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)


async def _cmd_catalog(client, args) -> int:
    resp = await client.get("/catalog")
    width = max(len(e["name"]) for e in resp.json())
    for e in resp.json():
        print(f"{e['name']:<{width}}  {e['description']}")
    return 0


async def _cmd_run(client, args) -> int:
    payload = {
        "seed": args.seed,
        "protocol": args.protocol,
        "horizon": args.horizon,
        "deadline": args.deadline,
        "include_trace": args.trace is not None,
        "strict_premises": args.strict_premises,
    }
    if args.config:
        with open(args.config) as fh:
            payload["config"] = json.load(fh)
    else:
        payload["scenario"] = args.scenario
    body = await _post(client, "/run", payload)
    for line in body["lines"]:
        print(line)
    s = body["summary"]
    print(f"max view {s['max_view']}, {s['deliveries']} deliveries, "
          f"{s['events']} events")
    if args.trace:
        _write(args.trace, body["trace"])
    _write(args.out, json.dumps({k: body[k] for k in
                                 ("ok", "config", "reports", "summary")},
                                indent=2) + "\n")
    return 0 if body["ok"] else 1


async def _cmd_check(client, args) -> int:
    with open(args.trace) as fh:
        trace_text = fh.read()
    with open(args.config) as fh:
        config = json.load(fh)
    body = await _post(client, "/check", {
        "trace": trace_text, "config": config, "deadline": args.deadline,
        "strict_premises": args.strict_premises})
    for line in body["lines"]:
        print(line)
    _write(args.out, json.dumps({k: body[k] for k in ("ok", "reports")},
                                indent=2) + "\n")
    return 0 if body["ok"] else 1


async def _cmd_sweep(client, args) -> int:
    body = await _post(client, "/sweep", {
        "scenario": args.scenario, "seeds": parse_seeds(args.seeds),
        "strict_premises": args.strict_premises, "workers": args.workers})
    rows = body["rows"]
    bad = [r for r in rows if not r["ok"]]
    for r in bad:
        print(f"seed {r['seed']}: {r['fails']} failed, {r['nas']} skipped")
    print(f"{len(rows) - len(bad)}/{len(rows)} seeds ok")
    _write(args.csv, body["csv"])
    _write(args.out, json.dumps(rows, indent=2) + "\n")
    return 0 if body["ok"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bftsync", description="simulate and check view-synchronized "
        "Byzantine broadcast scenarios")
    parser.add_argument("--server", metavar="URL",
                        help="send requests to a running service instead of "
                        "serving them in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list named scenarios")
    p.set_defaults(fn=_cmd_catalog)

    p = sub.add_parser("run", help="simulate one scenario and check it")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="catalog entry to build")
    src.add_argument("--config", help="JSON scenario config file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--protocol", help="override the configured protocol")
    p.add_argument("--horizon", type=int, help="override the configured horizon")
    p.add_argument("--deadline", type=int,
                   help="require broadcasts delivered within this slack "
                   "after stabilization")
    p.add_argument("--trace", metavar="FILE", help="write the trace as JSONL")
    p.add_argument("--out", metavar="FILE", help="write the full report as JSON")
    p.add_argument("--strict-premises", action="store_true",
                   help="treat premise-unmet skips as failures")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("check", help="check an existing trace file")
    p.add_argument("--trace", metavar="FILE", required=True)
    p.add_argument("--config", metavar="FILE", required=True,
                   help="JSON scenario config the trace was produced under")
    p.add_argument("--deadline", type=int)
    p.add_argument("--out", metavar="FILE", help="write the report as JSON")
    p.add_argument("--strict-premises", action="store_true")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("sweep", help="run one scenario across many seeds")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seeds", required=True,
                   help="'7', '1,2,5', or 'start:stop' (half-open)")
    p.add_argument("--csv", metavar="FILE", help="write one row per seed")
    p.add_argument("--out", metavar="FILE", help="write rows as JSON")
    p.add_argument("--workers", type=int, help="process pool size")
    p.add_argument("--strict-premises", action="store_true")
    p.set_defaults(fn=_cmd_sweep)
    return parser


async def _amain(args) -> int:
    async with _client(args.server) as client:
        return await args.fn(client, args)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return asyncio.run(_amain(args))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
