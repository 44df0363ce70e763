"""Entry point: expert-server --config server_config.json [--port 8600]."""

from __future__ import annotations

import sys
from pathlib import Path

import click
import uvicorn

from .app import create_app
from .config import build_registry, load_server_config
from .tinybert import build_demo


@click.command()
@click.option("--config", "config_path", type=click.Path(), help="server config JSON")
@click.option("--demo-dir", type=click.Path(), help="build tiny demo models here and serve them")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8600, show_default=True)
def main(config_path, demo_dir, host, port):
    if bool(config_path) == bool(demo_dir):
        click.echo("give exactly one of --config or --demo-dir", err=True)
        sys.exit(2)
    if demo_dir:
        config_path = build_demo(demo_dir)
        click.echo(f"demo models written; serving {config_path}")
    try:
        specs = load_server_config(config_path)
        registry = build_registry(specs, base_dir=Path(config_path).parent)
    except (ValueError, RuntimeError) as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)
    click.echo(f"serving experts: {', '.join(sorted(registry))}")
    uvicorn.run(create_app(registry), host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
