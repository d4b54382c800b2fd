import logging
import sys

import click

from .errors import EmbedderError
from .export import export_corpus
from .pooling import PoolingSpec


@click.command()
@click.option("--corpus", required=True, type=click.Path(exists=True))
@click.option("--model", required=True, help="Model id, e.g. hash-64.")
@click.option("--pooling", type=click.Choice(["mean", "sst"]),
              default="mean", show_default=True)
@click.option("--family", type=click.Choice(["encoder", "decoder"]),
              default="encoder", show_default=True)
@click.option("--tokens/--no-tokens", default=False, show_default=True,
              help="Also store per-token matrices (late interaction).")
@click.option("--out", required=True, type=click.Path())
def embed(corpus, model, pooling, family, tokens, out):
    """Export pooled embeddings for every code-list question to OUT."""
    spec = PoolingSpec(kind=pooling, model_family=family)
    n = export_corpus(corpus, model, spec, include_tokens=tokens, out_path=out)
    click.echo(f"exported {n} records ({pooling}/{family}, model {model}) -> {out}")


def main():
    logging.basicConfig(level=logging.WARNING, format="%(message)s")
    try:
        embed(standalone_mode=True)
    except EmbedderError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
