"""Command-line client for the service.

Every command builds a JSON payload, posts it to the service (an
in-process app by default, or a remote one via --server), and renders
the response.  Exit codes: 0 success, 2 configuration or domain error,
3 reducible chain, 4 numerical failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from corrtrack import __version__

EXIT_CODES = {"domain-error": 2, "reducible-chain": 3, "numerical-failure": 4}


def _client(server):
    if server:
        import httpx
        return httpx.Client(base_url=server, timeout=None)
    import warnings
    with warnings.catch_warnings():
        # the installed starlette pairing warns on import; not actionable here
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from corrtrack.service.app import create_app
    return TestClient(create_app(), raise_server_exceptions=False)


def _call(server, method, path, payload=None):
    with _client(server) as client:
        if method == "get":
            resp = client.get(path)
        else:
            resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            body = resp.json()
        except ValueError:
            body = {"code": "numerical-failure", "message": resp.text}
        code = body.get("code", "numerical-failure")
        click.echo(f"error ({code}): {body.get('message', '')}", err=True)
        sys.exit(EXIT_CODES.get(code, 4))
    return resp.json()


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        click.echo(f"cannot read config: {exc}", err=True)
        sys.exit(2)
    except json.JSONDecodeError as exc:
        click.echo(f"config parse error: {exc}", err=True)
        sys.exit(2)


def _apply_overrides(cfg, backend, seed, slots, replications):
    if backend is not None:
        cfg["backend"] = backend
    if any(v is not None for v in (seed, slots, replications)):
        sim = dict(cfg.get("sim") or {})
        if slots is not None:
            sim["horizon"] = slots
        if seed is not None:
            sim["seed"] = seed
        if replications is not None:
            sim["replications"] = replications
        cfg["sim"] = sim
    return cfg


def _emit(text, out):
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {out}", err=True)
    else:
        click.echo(text, nl=False)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


_server_opt = click.option("--server", default=None, metavar="URL",
                           help="remote service base URL (default: in-process)")
_out_opt = click.option("--out", default=None, type=click.Path(),
                        help="write output here instead of stdout")
_seed_opt = click.option("--seed", default=None, type=int)
_slots_opt = click.option("--slots", default=None, type=int,
                          help="simulation horizon")
_reps_opt = click.option("--replications", default=None, type=int)


@click.group()
@click.version_option(__version__)
def main():
    """Remote-monitoring policy laboratory."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--backend", default=None,
              type=click.Choice(["closed-form", "chain", "sim"]))
@_seed_opt
@_slots_opt
@_reps_opt
@_out_opt
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json")
@_server_opt
def evaluate(config_path, backend, seed, slots, replications, out, fmt, server):
    """Closed-form and exact-chain values for one scenario."""
    cfg = _apply_overrides(_load_config(config_path), backend, seed, slots,
                           replications)
    body = _call(server, "post", "/evaluate", cfg)
    if fmt == "csv":
        lines = ["policy,backend,pe,cost"]
        for r in body["rows"]:
            lines.append(",".join([r["policy"], r["backend"],
                                   _fmt(r.get("pe")), _fmt(r.get("cost"))]))
        _emit("\n".join(lines), out)
    else:
        _emit(json.dumps(body, indent=2), out)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@_seed_opt
@_slots_opt
@_reps_opt
@_out_opt
@_server_opt
def simulate(config_path, seed, slots, replications, out, server):
    """Monte-Carlo metrics for one scenario (needs a sim block or --slots)."""
    cfg = _apply_overrides(_load_config(config_path), None, seed, slots,
                           replications)
    body = _call(server, "post", "/simulate", cfg)
    _emit(json.dumps(body, indent=2), out)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@_out_opt
@_server_opt
def solve(config_path, out, server):
    """Exact stationary distribution, error rate, and cost."""
    cfg = _load_config(config_path)
    body = _call(server, "post", "/solve", cfg)
    _emit(json.dumps(body, indent=2), out)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--backend", default=None, type=click.Choice(["closed-form", "chain"]))
@_out_opt
@_server_opt
def optimize(config_path, backend, out, server):
    """Constrained optimum (RS, RS-equal, EA) or feasibility (CA, SA)."""
    cfg = _load_config(config_path)
    if backend is not None:
        cfg["backend"] = backend
    body = _call(server, "post", "/optimize", cfg)
    _emit(json.dumps(body, indent=2), out)


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path(),
              help="sweep spec JSON (alternative to --preset)")
@click.option("--preset", default=None,
              help="named figure grid: fig-p-sweep-q01, fig-p-sweep-q04, "
                   "fig-eta-sweep")
@click.option("--backend", default=None, type=click.Choice(["closed-form", "chain"]))
@_out_opt
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@_server_opt
def sweep(config_path, preset, backend, out, fmt, server):
    """Optimize every policy over a parameter grid; emit rows."""
    if (config_path is None) == (preset is None):
        click.echo("pass exactly one of --config or --preset", err=True)
        sys.exit(2)
    payload = {}
    if preset is not None:
        payload["preset"] = preset
    else:
        payload["spec"] = _load_config(config_path)
    if backend is not None:
        payload["backend"] = backend
    body = _call(server, "post", "/sweep", payload)
    click.echo(json.dumps(body["summary"]), err=True)
    if fmt == "csv":
        _emit(body["csv"], out)
    else:
        _emit(json.dumps({"rows": body["rows"], "summary": body["summary"]},
                         indent=2), out)


@main.command()
@click.option("--n-points", default=200, type=int, show_default=True,
              help="random interior tuples to audit")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--slots", default=None, type=int,
              help="also simulate each tuple for this many slots")
@_reps_opt
@_out_opt
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@_server_opt
def validate(n_points, seed, slots, replications, out, fmt, server):
    """Formula-vs-oracle concordance report over random interior tuples."""
    payload = {"n_points": n_points, "seed": seed}
    if slots is not None:
        payload["sim"] = {"horizon": slots,
                          "replications": replications or 4,
                          "seed": seed}
    body = _call(server, "post", "/validate", payload)
    click.echo(json.dumps(body["summary"]), err=True)
    if fmt == "csv":
        _emit(body["csv"], out)
    else:
        _emit(json.dumps({"rows": body["rows"], "summary": body["summary"]},
                         indent=2), out)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn
    uvicorn.run("corrtrack.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
