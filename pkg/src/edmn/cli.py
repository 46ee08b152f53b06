"""Command-line client for the decision service.

The CLI never touches the engine directly: it talks to the HTTP API, by
default through an in-process test transport, or to a remote server via
--server. Exit codes: 0 decision/clean report, 1 usage or model errors,
2 no decision derivable (undefined/tie/incomplete), 3 inconsistent
knowledge or hit-policy violation.
"""

from __future__ import annotations

import json
import re
import sys
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_DECISION = 2
EXIT_CONFLICT = 3

_STATUS_EXIT = {
    "value": EXIT_OK,
    "undefined": EXIT_NO_DECISION,
    "tie": EXIT_NO_DECISION,
    "inconsistent": EXIT_CONFLICT,
    "hit_policy_violation": EXIT_CONFLICT,
}


class ServiceClient:
    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=60.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        body = resp.json()
        if resp.status_code != 200:
            err = body.get("error", {})
            msg = err.get("message", resp.text)
            if err.get("line"):
                msg = f"line {err['line']}, col {err.get('col', 1)}: {msg}"
            raise click.ClickException(msg)
        return body


def _read_model(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise click.ClickException(f"cannot read model file: {e}")


def _facts_text(facts: str | None, facts_file: str | None) -> str:
    parts = []
    if facts_file:
        try:
            parts.append(Path(facts_file).read_text(encoding="utf-8"))
        except OSError as e:
            raise click.ClickException(f"cannot read facts file: {e}")
    if facts:
        parts.append(facts)
    return "\n".join(parts)


def _emit(payload: dict, as_json: bool, human: str) -> None:
    click.echo(json.dumps(payload, indent=2) if as_json else human)


@click.group()
@click.option("--server", default=None, metavar="URL", help="remote service URL (default: in-process)")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Evaluate epistemic decision models."""
    ctx.obj = ServiceClient(server)


model_arg = click.argument("model_path", metavar="MODEL")
facts_opts = [
    click.option("--facts", default=None, help="inline facts, ';'-separated"),
    click.option("--facts-file", default=None, type=click.Path(), help="facts file"),
]
json_opt = click.option("--json", "as_json", is_flag=True, help="machine-readable output")
table_opt = click.option("--table", default=None, help="table name (multi-table models)")


def _with(*decorators):
    def wrap(f):
        for d in reversed(decorators):
            f = d(f)
        return f

    return wrap


@main.command()
@model_arg
@_with(*facts_opts)
@table_opt
@json_opt
@click.pass_obj
def decide(client: ServiceClient, model_path, facts, facts_file, table, as_json):
    """Derive the decision(s) for the given knowledge."""
    body = client.post(
        "/v1/decide",
        {"model": _read_model(model_path), "facts": _facts_text(facts, facts_file), "table": table},
    )
    lines = []
    for r in body["results"]:
        if r["status"] == "value":
            lines.append(f"{r['variable']} = {r['decision']}")
        else:
            detail = f" ({r['note']})" if r.get("note") else ""
            if r["candidates"]:
                detail = f" (rows {r['firedRows']} propose {', '.join(r['candidates'])})"
            lines.append(f"{r['variable']}: {r['status']}{detail}")
    _emit(body, as_json, "\n".join(lines))
    sys.exit(_STATUS_EXIT[body["status"]])


@main.command()
@model_arg
@table_opt
@json_opt
@click.pass_obj
def check(client: ServiceClient, model_path, table, as_json):
    """Exhaustively check a table for completeness and hit-policy conflicts."""
    body = client.post("/v1/check", {"model": _read_model(model_path), "table": table})
    if body["complete"]:
        _emit(body, as_json, f"table {body['table']}: complete and conflict-free")
        sys.exit(EXIT_OK)
    lines = [f"table {body['table']}: {len(body['issues'])} problematic state(s)"]
    for issue in body["issues"]:
        state = "; ".join(f"{v} in {{{', '.join(vals)}}}" for v, vals in issue["state"].items())
        extra = f" ({', '.join(issue['candidates'])})" if issue["candidates"] else ""
        lines.append(f"  {state} -> {issue['status']}{extra}")
    _emit(body, as_json, "\n".join(lines))
    sys.exit(EXIT_NO_DECISION)


@main.command()
@model_arg
@json_opt
@click.pass_obj
def compile(client: ServiceClient, model_path, as_json):
    """Print the stratified epistemic theory the model translates to."""
    body = client.post("/v1/compile", {"model": _read_model(model_path)})
    _emit(body, as_json, body["theory"].rstrip())
    sys.exit(EXIT_OK)


@main.command()
@model_arg
@click.option("--utility", required=True, type=click.Path(), help="utility grid CSV")
@click.option("--criterion", required=True, help="maximin|maximax|leximin|hurwicz:ALPHA|minimax-regret")
@_with(*facts_opts)
@table_opt
@json_opt
@click.pass_obj
def optimal(client: ServiceClient, model_path, utility, criterion, facts, facts_file, table, as_json):
    """Pick the criterion-optimal decision for the given knowledge."""
    try:
        utility_text = Path(utility).read_text(encoding="utf-8")
    except OSError as e:
        raise click.ClickException(f"cannot read utility file: {e}")
    body = client.post(
        "/v1/optimal",
        {
            "model": _read_model(model_path),
            "utility": utility_text,
            "criterion": criterion,
            "facts": _facts_text(facts, facts_file),
            "table": table,
        },
    )
    if body["status"] == "value":
        _emit(body, as_json, body["decision"])
        sys.exit(EXIT_OK)
    if body["status"] == "tie":
        _emit(body, as_json, "tie: " + ", ".join(body["candidates"]))
        sys.exit(EXIT_NO_DECISION)
    _emit(body, as_json, "inconsistent knowledge")
    sys.exit(EXIT_CONFLICT)


@main.command()
@model_arg
@click.option("--target", required=True, help="decision value to reach")
@table_opt
@json_opt
@click.pass_obj
def minimal(client: ServiceClient, model_path, target, table, as_json):
    """Minimal knowledge requirements for a target decision."""
    body = client.post(
        "/v1/minimal", {"model": _read_model(model_path), "target": target, "table": table}
    )
    if not body["profiles"]:
        _emit(body, as_json, f"no knowledge state derives {target}")
        sys.exit(EXIT_NO_DECISION)
    lines = [f"{len(body['profiles'])} maximal-ignorance profile(s) derive {target}:"]
    for p in body["profiles"]:
        lines.append("  " + "; ".join(f"{v} in {{{', '.join(vals)}}}" for v, vals in p["values"].items()))
    _emit(body, as_json, "\n".join(lines))
    sys.exit(EXIT_OK)


@main.command()
@model_arg
@_with(*facts_opts)
@table_opt
@json_opt
@click.pass_obj
def explain(client: ServiceClient, model_path, facts, facts_file, table, as_json):
    """Show which rows fired and where each blocked row failed."""
    body = client.post(
        "/v1/explain",
        {"model": _read_model(model_path), "facts": _facts_text(facts, facts_file), "table": table},
    )
    r = body["result"]
    head = f"{r['variable']} = {r['decision']}" if r["status"] == "value" else f"{r['variable']}: {r['status']}"
    lines = [head]
    if body["firedRows"]:
        lines.append("fired rows: " + ", ".join(str(s["row"]) for s in body["firedRows"]))
    for s in body["blockedRows"]:
        lines.append(f"row {s['row']}: blocked at cell {s['firstFailingCell']}")
    _emit(body, as_json, "\n".join(lines))
    sys.exit(_STATUS_EXIT[r["status"]])


@main.command(name="map")
@model_arg
@table_opt
@json_opt
@click.pass_obj
def map_cmd(client: ServiceClient, model_path, table, as_json):
    """Dump the full decision map over all rectangular knowledge states."""
    body = client.post("/v1/map", {"model": _read_model(model_path), "table": table})
    lines = []
    for e in body["entries"]:
        state = "; ".join(f"{v} in {{{', '.join(vals)}}}" for v, vals in e["state"].items())
        outcome = e["decision"] if e["status"] == "value" else e["status"]
        lines.append(f"{state} -> {outcome}")
    _emit(body, as_json, "\n".join(lines))
    sys.exit(EXIT_OK)


@main.command()
@model_arg
@table_opt
@click.pass_obj
def repl(client: ServiceClient, model_path, table):
    """Interactive session: know/forget facts, decide, explain, minimal."""
    model_text = _read_model(model_path)
    client.post("/v1/state", {"model": model_text, "facts": ""})  # validate model upfront
    known: dict[str, list[str]] = {}

    def facts_text() -> str:
        return "\n".join(f"{v} in {{{', '.join(vals)}}}" if vals else f"{v} in {{}}"
                         for v, vals in known.items())

    def state_size() -> int | None:
        if any(not vals for vals in known.values()):
            return 0
        body = client.post("/v1/state", {"model": model_text, "facts": facts_text()})
        return body["stateSize"]

    def echo_state():
        size = state_size()
        click.echo(f"[{size} possible world(s)]")

    for raw in sys.stdin:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cmd, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if cmd == "quit":
                break
            elif cmd == "reset":
                known.clear()
                echo_state()
            elif cmd == "forget":
                known.pop(rest, None)
                echo_state()
            elif cmd == "know":
                m = re.match(r"(\w+)\s+in\s+\{(.*)\}$", rest)
                if m:
                    var = m.group(1)
                    values = [v.strip() for v in m.group(2).split(",") if v.strip()]
                else:
                    var, eq, value = rest.partition("=")
                    var, values = var.strip(), [value.strip()]
                    if not eq or not values[0]:
                        click.echo("usage: know var = value | know var in {v1, v2}")
                        continue
                # validate the new fact on its own before committing
                client.post("/v1/state", {"model": model_text,
                                          "facts": f"{var} in {{{', '.join(values)}}}"})
                probe = dict(known)
                if var in probe:
                    probe[var] = sorted(set(probe[var]) & set(values))
                else:
                    probe[var] = sorted(set(values))
                known.update(probe)
                if not known[var]:
                    click.echo("warning: inconsistent knowledge")
                    click.echo("[0 possible world(s)]")
                    continue
                body = client.post("/v1/state", {"model": model_text, "facts": facts_text()})
                click.echo(f"[{body['stateSize']} possible world(s)]")
            elif cmd == "decide":
                empty = any(not vals for vals in known.values())
                payload = {"model": model_text, "facts": "" if empty else facts_text(), "table": table}
                if empty:
                    click.echo("inconsistent")
                    continue
                body = client.post("/v1/decide", payload)
                for r in body["results"]:
                    if r["status"] == "value":
                        click.echo(f"{r['variable']} = {r['decision']}")
                    else:
                        click.echo(f"{r['variable']}: {r['status']}")
            elif cmd == "explain":
                if any(not vals for vals in known.values()):
                    click.echo("inconsistent")
                    continue
                body = client.post(
                    "/v1/explain", {"model": model_text, "facts": facts_text(), "table": table}
                )
                r = body["result"]
                if r["status"] == "value":
                    click.echo(f"{r['variable']} = {r['decision']}")
                else:
                    click.echo(f"{r['variable']}: {r['status']}")
                for s in body["blockedRows"]:
                    click.echo(f"row {s['row']}: blocked at cell {s['firstFailingCell']}")
            elif cmd == "minimal":
                body = client.post(
                    "/v1/minimal", {"model": model_text, "target": rest, "table": table}
                )
                if not body["profiles"]:
                    click.echo(f"no knowledge state derives {rest}")
                for p in body["profiles"]:
                    click.echo(
                        "; ".join(f"{v} in {{{', '.join(vals)}}}" for v, vals in p["values"].items())
                    )
            else:
                click.echo(f"unknown command {cmd!r}")
        except click.ClickException as e:
            click.echo(f"error: {e.message}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host: str, port: int):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
