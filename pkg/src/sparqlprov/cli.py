"""Command-line client for the query service.

Subcommands mirror the HTTP endpoints: ``run``, ``parse``, ``translate``,
and ``check`` post to a service instance, and ``serve`` starts one.  By
default the client talks to an in-process instance, so no server needs to
be running; ``--server URL`` points it at a live one instead.

Exit codes: 0 on success, 1 for user errors (bad syntax, bad flags, a
failed ``check``), 2 for I/O failures (unreadable files, unreachable
server).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import httpx

_TSV_EXTRAS = {
    "free": ("provenance",),
    "bool": ("provenance", "trusted"),
    "nat": ("count",),
}


class CliError(Exception):
    """A failure that should terminate the command with a message."""

    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


class _ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", code=2) from exc


def _parse_trust(spec: str) -> dict[str, bool]:
    trust: dict[str, bool] = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, value = item.partition("=")
        if not sep or not name or value not in {"0", "1"}:
            raise CliError(f"bad trust entry {item!r}; expected name=0 or name=1")
        trust[name] = value == "1"
    return trust


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=30.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
    from .service import app

    return TestClient(app)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    try:
        resp = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise CliError(f"cannot reach server: {exc}", code=2) from exc
    if resp.status_code == 400:
        detail = resp.json().get("detail")
        if isinstance(detail, dict) and "message" in detail:
            raise CliError(f"{detail.get('error', 'error')}: {detail['message']}")
        raise CliError(str(detail))
    if resp.status_code != 200:
        raise CliError(f"server returned status {resp.status_code}")
    return resp.json()


def _print_tsv(header: list[str], rows: list[list[str]]) -> None:
    print("\t".join(header))
    for row in rows:
        print("\t".join(row))


def _cell(value: str | None) -> str:
    return "" if value is None else value


def _cmd_run(args: argparse.Namespace) -> int:
    payload = {
        "data": _read_file(args.data),
        "query": _read_file(args.query),
        "semiring": args.semiring,
        "trust": _parse_trust(args.trust),
        "trust_default": args.trust_default == "1",
    }
    with _client(args.server) as client:
        resp = _post(client, "/run", payload)
    if args.format == "json":
        print(json.dumps(resp, indent=2))
        return 0
    variables = resp["vars"]
    header = [f"?{v}" for v in variables] + list(_TSV_EXTRAS[args.semiring])
    rows = []
    for row in resp["rows"]:
        cells = [_cell(row["bindings"][v]) for v in variables]
        if args.semiring in {"free", "bool"}:
            cells.append(row["provenance"])
        if args.semiring == "bool":
            cells.append("t" if row["trusted"] else "f")
        if args.semiring == "nat":
            cells.append(str(row["count"]))
        rows.append(cells)
    _print_tsv(header, rows)
    return 0


def _cmd_parse(args: argparse.Namespace) -> int:
    payload = {"query": _read_file(args.query)}
    with _client(args.server) as client:
        resp = _post(client, "/parse", payload)
    print(resp["ast"])
    return 0


def _cmd_translate(args: argparse.Namespace) -> int:
    payload = {"query": _read_file(args.query)}
    with _client(args.server) as client:
        resp = _post(client, "/translate", payload)
    print(resp["algebra"])
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    payload = {
        "data": _read_file(args.data),
        "query": _read_file(args.query),
    }
    with _client(args.server) as client:
        resp = _post(client, "/check", payload)
    if args.format == "json":
        print(json.dumps(resp, indent=2))
    else:
        variables = resp["vars"]
        header = [f"?{v}" for v in variables] + ["engine", "reference"]
        rows = [
            [_cell(row["bindings"][v]) for v in variables]
            + [str(row["engine_count"]), str(row["reference_count"])]
            for row in resp["rows"]
        ]
        _print_tsv(header, rows)
    if not resp["ok"]:
        print("check failed: multiplicities differ", file=sys.stderr)
        return 1
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="sparqlprov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, data: bool) -> None:
        p.add_argument("--query", required=True, help="file holding the query text")
        if data:
            p.add_argument("--data", required=True, help="file holding the N-Quads dataset")
        p.add_argument("--server", help="base URL of a running service (default: in-process)")

    p_run = sub.add_parser("run", help="evaluate a query and print annotated rows")
    add_common(p_run, data=True)
    p_run.add_argument(
        "--semiring",
        choices=("free", "bool", "nat"),
        default="free",
        help="annotation domain: provenance expressions, trust verdicts, or counts",
    )
    p_run.add_argument(
        "--trust",
        default="",
        help="comma-separated trust assignment, e.g. 't3=0,g0=1' (bool runs only)",
    )
    p_run.add_argument(
        "--trust-default",
        choices=("0", "1"),
        default="1",
        help="trust verdict for identifiers not named in --trust",
    )
    p_run.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p_run.set_defaults(func=_cmd_run)

    p_parse = sub.add_parser("parse", help="print the query's syntax tree")
    add_common(p_parse, data=False)
    p_parse.set_defaults(func=_cmd_parse)

    p_translate = sub.add_parser("translate", help="print the compiled algebra expression")
    add_common(p_translate, data=False)
    p_translate.set_defaults(func=_cmd_translate)

    p_check = sub.add_parser(
        "check", help="compare engine multiplicities against the reference evaluator"
    )
    add_common(p_check, data=True)
    p_check.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p_check.set_defaults(func=_cmd_check)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
