"""Command-line client for the vorocil service.

Every subcommand speaks HTTP to a service instance. With ``--server``
(or ``VOROCIL_SERVER``) requests go to a running deployment; otherwise
they are served by an ephemeral in-process application, so the CLI works
standalone. ``vorocil serve`` starts a real server.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
failure. Set ``VOROCIL_LOG`` to adjust log verbosity.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import sys

import click
import httpx

EXIT_CODES = {"config": 2, "data": 3, "runtime": 4}


class _AsgiTransport(httpx.BaseTransport):
    """Serve client requests from an in-process application instance."""

    def __init__(self) -> None:
        from .service.app import create_app

        self._asgi = httpx.ASGITransport(app=create_app())

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def dispatch() -> httpx.Response:
            response = await self._asgi.handle_async_request(request)
            body = await response.aread()
            await response.aclose()
            return httpx.Response(
                status_code=response.status_code, headers=response.headers, content=body
            )

        return asyncio.run(dispatch())


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    return httpx.Client(base_url="http://vorocil.internal", transport=_AsgiTransport(), timeout=None)


def _fail(category: str, message: str) -> None:
    click.echo(f"error ({category}): {message}", err=True)
    sys.exit(EXIT_CODES.get(category, EXIT_CODES["runtime"]))


def _call(server: str | None, method: str, path: str, payload: dict | None = None) -> dict:
    try:
        with _client(server) as client:
            response = client.request(method, path, json=payload)
    except httpx.HTTPError as exc:
        _fail("runtime", f"cannot reach service: {exc}")
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail")
        except json.JSONDecodeError:
            detail = None
        if isinstance(detail, dict) and "category" in detail:
            _fail(detail["category"], detail.get("message", "request failed"))
        if response.status_code == 422:
            _fail("config", f"invalid request: {response.text}")
        if response.status_code == 404:
            _fail("data", f"not found: {response.text}")
        _fail("runtime", f"HTTP {response.status_code}: {response.text}")
    return response.json()


def _parse_int_list(value: str | None, option: str) -> list[int] | None:
    if value is None:
        return None
    try:
        return [int(tok) for tok in value.replace(",", " ").split()]
    except ValueError:
        _fail("config", f"{option} must be a comma-separated list of integers, got {value!r}")


@click.group()
@click.option("--server", envvar="VOROCIL_SERVER", default=None, help="Base URL of a running service; omit to run in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Incremental Voronoi classification: synthesize data, run protocols, inspect artifacts."""
    logging.basicConfig(level=os.environ.get("VOROCIL_LOG", "WARNING").upper())
    ctx.obj = server


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--classes", "n_classes", required=True, type=int)
@click.option("--dims", "n_dims", required=True, type=int)
@click.option("--samples", "samples_per_class", required=True, type=int, help="Training samples per class (test split is 1/5 of this).")
@click.option("--spread", default=10.0, type=float, help="Radius of the ball class means are drawn from.")
@click.option("--cov-scale", default=1.0, type=float)
@click.option("--anisotropy", default=1.0, type=float, help="Axis ratio of per-class covariance; 1 = isotropic.")
@click.option("--rotation-offset", default=0.0, type=float)
@click.option("--augmentations", default=1, type=click.Choice(["1", "4"]), help="Rows per sample (4 adds rotation variants).")
@click.option("--seed", default=0, type=int)
@click.option("--phases", default=None, help="Comma-separated class counts per phase, e.g. 10,5,5. Default: one phase.")
@click.option("--layers", "n_layers", default=1, type=int)
@click.option("--layer-dims", default=None, help="Comma-separated feature dims per layer.")
@click.pass_obj
def synth(server, out_dir, n_classes, n_dims, samples_per_class, spread, cov_scale, anisotropy,
          rotation_offset, augmentations, seed, phases, n_layers, layer_dims):
    """Generate a seeded synthetic benchmark (feature files plus manifest)."""
    phase_sizes = _parse_int_list(phases, "--phases") or [n_classes]
    payload = {
        "out_dir": out_dir,
        "n_classes": n_classes,
        "n_dims": n_dims,
        "samples_per_class": samples_per_class,
        "spread": spread,
        "cov_scale": cov_scale,
        "anisotropy": anisotropy,
        "rotation_offset": rotation_offset,
        "augmentations": int(augmentations),
        "seed": seed,
        "phase_sizes": phase_sizes,
        "n_layers": n_layers,
        "layer_dims": _parse_int_list(layer_dims, "--layer-dims"),
    }
    result = _call(server, "POST", "/synth", payload)
    click.echo(f"manifest: {result['manifest_path']}")
    for path in result["feature_files"]:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--mode", default="", help="Flag string over N, D, R, AC, AI, L (e.g. NDAIL).")
@click.option("--epochs", default=40, type=int)
@click.option("--batch-size", default=64, type=int)
@click.option("--learning-rate", default=1e-3, type=float)
@click.option("--weight-decay", default=1e-4, type=float)
@click.option("--probe-seed", default=0, type=int)
@click.option("--no-shuffle", is_flag=True, default=False)
@click.option("--scale", default=1.0, type=float, help="Transform scale (mode N).")
@click.option("--shift", default=0.0, type=float, help="Transform shift (mode N).")
@click.option("--tukey-lambda", default=0.5, type=float)
@click.option("--eps", default=1e-8, type=float)
@click.option("--clamp-negative", is_flag=True, default=False)
@click.option("--gamma", default=1.0, type=float, help="Layered influence exponent.")
@click.option("--diagonal", "diagonal_augmentation", is_flag=True, default=False, help="Use only the 4 matched rotation pairs instead of all 16.")
@click.option("--seed", default=0, type=int)
@click.pass_obj
def run(server, manifest_path, out_dir, mode, epochs, batch_size, learning_rate, weight_decay,
        probe_seed, no_shuffle, scale, shift, tukey_lambda, eps, clamp_negative, gamma,
        diagonal_augmentation, seed):
    """Run a class-incremental protocol and write its report."""
    payload = {
        "manifest_path": manifest_path,
        "out_dir": out_dir,
        "mode": mode,
        "probe": {
            "epochs": epochs,
            "batch_size": batch_size,
            "learning_rate": learning_rate,
            "weight_decay": weight_decay,
            "seed": probe_seed,
            "shuffle": not no_shuffle,
        },
        "transform": {
            "enabled": True,
            "scale": scale,
            "shift": shift,
            "tukey_lambda": tukey_lambda,
            "eps": eps,
            "clamp_negative": clamp_negative,
        },
        "gamma": gamma,
        "diagonal_augmentation": diagonal_augmentation,
        "seed": seed,
    }
    result = _call(server, "POST", "/runs", payload)
    report = result["report"]
    mode_name = report["mode"] or "(base)"
    click.echo(f"mode {mode_name}: {len(report['phase_accuracy'])} phases")
    for t, (acc, avg, forget) in enumerate(
        zip(report["phase_accuracy"], report["avg_accuracy"], report["avg_forgetting"])
    ):
        click.echo(f"  phase {t}: accuracy {acc:.2f}%  avg {avg:.2f}%  forgetting {forget:.2f}")
    click.echo(f"last accuracy: {report['last_accuracy']:.2f}%")
    if report.get("hv_delta_pearson") is not None:
        click.echo(f"HV/delta-accuracy pearson: {report['hv_delta_pearson']:.4f}")
    for path in result["files"]:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--from-json", "report_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_obj
def report(server, report_path, out_dir):
    """Re-emit report files (CSV, SVG) from a stored report.json."""
    with open(report_path) as fh:
        payload = {"report": json.load(fh), "out_dir": out_dir}
    result = _call(server, "POST", "/reports/emit", payload)
    for path in result["files"]:
        click.echo(f"wrote {path}")


@main.command()
@click.argument("path", type=click.Path())
@click.pass_obj
def inspect(server, path):
    """Print the header summary of a feature or model file."""
    result = _call(server, "POST", "/inspect", {"path": os.path.abspath(path)})
    click.echo(json.dumps(result["summary"], indent=2, sort_keys=True))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8321, type=int)
def serve(host, port):
    """Start the REST service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
