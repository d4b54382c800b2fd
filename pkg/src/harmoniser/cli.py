"""Command line interface.

Workspace layout (--data, default ./harmoniser_data):

    corpus.jsonl        ingested corpus
    index.hidx          cached BM25 index over code-list questions
    embeddings.hemb     default embedding store location
    runs/<run_id>.jsonl persisted ranking runs
    annotations.jsonl   specialist annotation log
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .annotations import AnnotationStore
from .corpus import filter_code_list, parse_corpus, serialize_corpus
from .embeddings import load_store
from .errors import HarmoniserError, UnknownRun
from .evaluation import (
    format_label_table,
    format_metrics_table,
    label_distribution,
    metrics_to_record,
    sample_for_review,
    topic_match_metrics,
)
from .fusion import FusionWeights
from .lexical import (
    BM25Params,
    ENGLISH_STOPWORDS,
    build_index,
    load_index,
    save_index,
)
from .pipeline import (
    BM25Ranker,
    DenseRanker,
    HybridRanker,
    end_to_end_rank,
    external_pair_scorer,
    load_pair_scores,
    load_run,
    rerank as rerank_run,
    save_run,
    write_pair_manifest,
)

DEFAULT_DATA = "harmoniser_data"


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _fusion_weights(weights_flag: str | None, config: dict) -> FusionWeights:
    if weights_flag:
        parts = [float(x) for x in weights_flag.split(",")]
        if len(parts) != 3:
            raise click.BadParameter("--weights expects w_dense,w_lex,w_multi")
        return FusionWeights(*parts)
    fusion = config.get("fusion", {})
    return FusionWeights(
        w_dense=float(fusion.get("w_dense", 0.4)),
        w_lex=float(fusion.get("w_lex", 0.2)),
        w_multi=float(fusion.get("w_multi", 0.4)),
    )


def _bm25_params(config: dict) -> BM25Params:
    bm25 = config.get("bm25", {})
    return BM25Params(k1=float(bm25.get("k1", 1.5)), b=float(bm25.get("b", 0.75)))


def _stopwords(config: dict) -> frozenset[str]:
    return ENGLISH_STOPWORDS if config.get("bm25", {}).get("stopwords") else frozenset()


def _read_corpus(data: Path):
    path = data / "corpus.jsonl"
    if not path.exists():
        raise click.ClickException(f"no corpus at {path}; run `harmoniser ingest` first")
    with open(path, encoding="utf-8") as f:
        return parse_corpus(f)


def _code_list_index(data: Path, config: dict):
    cache = data / "index.hidx"
    if cache.exists():
        with open(cache, "rb") as f:
            return load_index(f)
    corpus = filter_code_list(_read_corpus(data))
    return build_index(corpus, _stopwords(config))


def _load_embeddings(data: Path, embeddings: str | None):
    path = Path(embeddings) if embeddings else data / "embeddings.hemb"
    if not path.exists():
        raise click.ClickException(f"no embedding store at {path}")
    with open(path, "rb") as f:
        return load_store(f)


@click.group()
def main():
    """Retrieval and review workflow for survey question harmonisation."""


@main.command()
@click.argument("corpus_file", type=click.Path(exists=True))
@click.option("--data", default=DEFAULT_DATA, show_default=True)
def ingest(corpus_file, data):
    """Validate CORPUS_FILE and install it into the workspace."""
    data = Path(data)
    data.mkdir(parents=True, exist_ok=True)
    (data / "runs").mkdir(exist_ok=True)
    with open(corpus_file, encoding="utf-8") as f:
        corpus = parse_corpus(f)
    with open(data / "corpus.jsonl", "w", encoding="utf-8") as f:
        serialize_corpus(corpus, f)
    code_list = filter_code_list(corpus)
    click.echo(
        f"ingested {len(corpus)} questions "
        f"({len(code_list)} code list) from "
        f"{corpus.questionnaire_count} questionnaires"
    )


@main.command()
@click.option("--data", default=DEFAULT_DATA, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
def index(data, config_path):
    """Build and cache the BM25 index over code-list questions."""
    data = Path(data)
    config = _load_config(config_path)
    corpus = filter_code_list(_read_corpus(data))
    idx = build_index(corpus, _stopwords(config))
    with open(data / "index.hidx", "wb") as f:
        save_index(idx, f)
    click.echo(f"indexed {idx.doc_count} documents "
               f"({len(idx.postings)} terms) -> {data / 'index.hidx'}")


@main.command()
@click.option("--data", default=DEFAULT_DATA, show_default=True)
@click.option("--model", type=click.Choice(["bm25", "dense", "hybrid"]),
              default="bm25", show_default=True)
@click.option("--mode", type=click.Choice(["e2e"]), default="e2e",
              show_default=True, help="Use `harmoniser rerank` for re-ranking.")
@click.option("--k", default=50, show_default=True)
@click.option("--weights", default=None,
              help="w_dense,w_lex,w_multi (hybrid only)")
@click.option("--embeddings", type=click.Path(), default=None)
@click.option("--workers", default=1, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
def rank(data, model, mode, k, weights, embeddings, workers, config_path):
    """End-to-end ranking of every code-list question."""
    data = Path(data)
    config = _load_config(config_path)
    corpus = filter_code_list(_read_corpus(data))
    params = _bm25_params(config)
    snapshot = {"bm25": {"k1": params.k1, "b": params.b}}

    if model == "bm25":
        ranker = BM25Ranker(_code_list_index(data, config), params)
    elif model == "dense":
        store = _load_embeddings(data, embeddings)
        ranker = DenseRanker(store)
        snapshot["embeddings"] = store.model_tag
    else:
        store = _load_embeddings(data, embeddings)
        fw = _fusion_weights(weights, config)
        ranker = HybridRanker(_code_list_index(data, config), store, params, fw)
        snapshot["embeddings"] = store.model_tag
        snapshot["fusion"] = {"w_dense": fw.w_dense, "w_lex": fw.w_lex,
                              "w_multi": fw.w_multi}

    run = end_to_end_rank(ranker, corpus, k=k, model=model, config=snapshot,
                          workers=workers)
    (data / "runs").mkdir(exist_ok=True)
    out = data / "runs" / f"{run.run_id}.jsonl"
    save_run(run, out)
    click.echo(f"run {run.run_id} -> {out}")


def _load_base_run(data: Path, run_id: str):
    path = data / "runs" / f"{run_id}.jsonl"
    if not path.exists():
        raise UnknownRun(run_id)
    return load_run(path)


@main.command()
@click.option("--data", default=DEFAULT_DATA, show_default=True)
@click.option("--base", "base_id", required=True, help="Base end-to-end run id.")
@click.option("--scorer", type=click.Choice(["dense", "hybrid", "external"]),
              default="dense", show_default=True)
@click.option("--k", default=50, show_default=True)
@click.option("--depth", default=50, show_default=True)
@click.option("--weights", default=None)
@click.option("--embeddings", type=click.Path(), default=None)
@click.option("--scores", type=click.Path(exists=True), default=None,
              help="Pair score file from an external cross-encoder.")
@click.option("--emit-manifest", type=click.Path(), default=None,
              help="Write the pair manifest for external scoring and exit.")
@click.option("--config", "config_path", type=click.Path(exists=True))
def rerank(data, base_id, scorer, k, depth, weights, embeddings, scores,
           emit_manifest, config_path):
    """Re-rank the top candidates of a persisted end-to-end run."""
    data = Path(data)
    config = _load_config(config_path)
    base = _load_base_run(data, base_id)

    if emit_manifest:
        with open(emit_manifest, "w", encoding="utf-8") as f:
            n = write_pair_manifest(base, depth, f)
        click.echo(f"wrote {n} pairs to {emit_manifest}")
        return

    snapshot: dict = {}
    if scorer == "external":
        if not scores:
            raise click.ClickException("--scorer external requires --scores")
        with open(scores, encoding="utf-8") as f:
            table = load_pair_scores(f)
        pair_scorer = external_pair_scorer(table)
        model = "external"
    elif scorer == "dense":
        store = _load_embeddings(data, embeddings)
        sims_cache: dict[str, dict[str, float]] = {}

        def pair_scorer(qid, cid):
            if qid not in sims_cache:
                ids, sims = store.dense_similarities(qid)
                sims_cache[qid] = dict(zip(ids, sims))
            return sims_cache[qid][cid]

        model = "dense"
        snapshot["embeddings"] = store.model_tag
    else:
        from .fusion import hybrid_scores

        store = _load_embeddings(data, embeddings)
        idx = _code_list_index(data, config)
        params = _bm25_params(config)
        fw = _fusion_weights(weights, config)
        snapshot["fusion"] = {"w_dense": fw.w_dense, "w_lex": fw.w_lex,
                              "w_multi": fw.w_multi}
        snapshot["embeddings"] = store.model_tag
        fused_cache: dict[str, dict[str, float]] = {}

        def pair_scorer(qid, cid):
            if qid not in fused_cache:
                pool = sorted(c for c, _ in base.per_query[qid][:depth])
                fused = hybrid_scores(qid, pool, idx, params, store, fw)
                fused_cache[qid] = dict(zip(pool, fused))
            return fused_cache[qid][cid]

        model = "hybrid"

    run = rerank_run(base, pair_scorer, k=k, depth=depth, model=model,
                     config=snapshot)
    out = data / "runs" / f"{run.run_id}.jsonl"
    save_run(run, out)
    click.echo(f"run {run.run_id} -> {out}")


@main.command("eval")
@click.argument("run_id")
@click.option("--data", default=DEFAULT_DATA, show_default=True)
@click.option("--averaging", type=click.Choice(["macro", "weighted"]),
              default="macro", show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Also write the machine-readable metrics record here.")
def eval_cmd(run_id, data, averaging, out_path):
    """Topic-code evaluation of a persisted run (top-1 agreement)."""
    data = Path(data)
    corpus = _read_corpus(data)
    run = _load_base_run(data, run_id)
    metrics = topic_match_metrics(run, corpus, averaging=averaging)
    click.echo(format_metrics_table(metrics, title=f"run {run_id}"), nl=False)
    store = AnnotationStore(data / "annotations.jsonl")
    labels = store.labels(run_id)
    if labels:
        click.echo(format_label_table(label_distribution(labels),
                                      title="label distribution"), nl=False)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as f:
            json.dump(metrics_to_record(metrics), f, indent=2, sort_keys=True)
            f.write("\n")


@main.command()
@click.argument("run_id")
@click.option("--data", default=DEFAULT_DATA, show_default=True)
@click.option("--n", default=203, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
def sample(run_id, data, n, seed, out_path):
    """Draw a seeded review sample of (query, top-1) pairs."""
    data = Path(data)
    run = _load_base_run(data, run_id)
    pairs = sample_for_review(run, n, seed)
    lines = [json.dumps({"query_id": q, "candidate_id": c}) for q, c in pairs]
    if out_path:
        Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
        click.echo(f"wrote {len(pairs)} pairs to {out_path}")
    else:
        for line in lines:
            click.echo(line)


@main.command()
@click.option("--data", default=DEFAULT_DATA, show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(data, port, host):
    """Start the review service over the workspace."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(Path(data)), host=host, port=port)


def run_main():
    try:
        main(standalone_mode=True)
    except HarmoniserError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    run_main()
