"""Command-line interface: a thin client for the service API.

By default commands run against an in-process instance of the service; pass
``--server URL`` to target a running `corpusforge serve` instead. Every
command prints the service's JSON response.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running corpusforge service (default: in-process).")
@click.pass_context
def main(ctx: click.Context, server: str | None):
    """Corpus selection and synthetic-data engineering for ASR adaptation."""
    ctx.obj = server


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

    from .service.app import create_app
    return TestClient(create_app())


def _post(server: str | None, path: str, payload: dict) -> None:
    with _client(server) as client:
        response = client.post(path, json=payload)
    try:
        body = response.json()
    except ValueError:
        body = {"detail": response.text}
    if response.status_code >= 400:
        click.echo(json.dumps({"error": body.get("detail", body)}, indent=2,
                              ensure_ascii=False), err=True)
        sys.exit(1)
    click.echo(json.dumps(body, indent=2, ensure_ascii=False))


def _payload(config: str, seed: int | None, mock_backends: bool, **extra) -> dict:
    payload = {
        "config_path": str(Path(config).resolve()),
        "seed": seed,
        "mock_backends": mock_backends,
    }
    payload.update({k: v for k, v in extra.items() if v is not None})
    return payload


def _command_options(fn):
    fn = click.option("--config", required=True, type=click.Path(), metavar="PATH",
                      help="Pipeline configuration file (YAML).")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the configured random seed.")(fn)
    fn = click.option("--mock-backends", is_flag=True, default=False,
                      help="Use the deterministic offline mock model backends.")(fn)
    return fn


@main.command("extract-terms")
@_command_options
@click.pass_obj
def extract_terms(server, config, seed, mock_backends):
    """Extract domain terms from evaluation transcripts."""
    _post(server, "/v1/commands/extract-terms", _payload(config, seed, mock_backends))


@main.command()
@_command_options
@click.pass_obj
def generate(server, config, seed, mock_backends):
    """Over-generate the candidate text pool."""
    _post(server, "/v1/commands/generate", _payload(config, seed, mock_backends))


@main.command("filter")
@_command_options
@click.pass_obj
def filter_cmd(server, config, seed, mock_backends):
    """Select a diverse, domain-dense subset of the pool."""
    _post(server, "/v1/commands/filter", _payload(config, seed, mock_backends))


@main.command()
@_command_options
@click.pass_obj
def respell(server, config, seed, mock_backends):
    """Apply phonetic respelling augmentation and build the training manifest."""
    _post(server, "/v1/commands/respell", _payload(config, seed, mock_backends))


@main.command()
@_command_options
@click.pass_obj
def synthesize(server, config, seed, mock_backends):
    """Synthesize audio for the training manifest."""
    _post(server, "/v1/commands/synthesize", _payload(config, seed, mock_backends))


@main.command()
@_command_options
@click.option("--corpus", default=None, type=click.Path(), metavar="PATH",
              help="Corpus to report on (default: the latest selected corpus).")
@click.pass_obj
def metrics(server, config, seed, mock_backends, corpus):
    """Compute corpus-quality metrics."""
    _post(server, "/v1/commands/metrics",
          _payload(config, seed, mock_backends, corpus=corpus))


@main.command()
@_command_options
@click.option("--reference", default=None, type=click.Path(), metavar="PATH")
@click.option("--hypothesis", default=None, type=click.Path(), metavar="PATH")
@click.pass_obj
def evaluate(server, config, seed, mock_backends, reference, hypothesis):
    """Score hypothesis transcripts: WER, B-WER, U-WER."""
    _post(server, "/v1/commands/evaluate",
          _payload(config, seed, mock_backends, reference=reference, hypothesis=hypothesis))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8420, type=int)
def serve(host: str, port: int):
    """Run the corpusforge service."""
    import uvicorn

    from .service.app import create_app
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
