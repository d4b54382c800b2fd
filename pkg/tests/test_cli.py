import json
import shutil

import pytest
from click.testing import CliRunner

from harmoniser.cli import main

from conftest import FIXTURES


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def data_dir(tmp_path, runner):
    result = runner.invoke(main, [
        "ingest", str(FIXTURES / "corpus_120.jsonl"), "--data", str(tmp_path)])
    assert result.exit_code == 0, result.output
    return tmp_path


def run_ids(data_dir):
    return sorted(p.stem for p in (data_dir / "runs").glob("*.jsonl"))


class TestIngest:
    def test_reports_counts(self, tmp_path, runner):
        result = runner.invoke(main, [
            "ingest", str(FIXTURES / "corpus_120.jsonl"), "--data", str(tmp_path)])
        assert result.exit_code == 0
        assert "120 questions" in result.output
        assert (tmp_path / "corpus.jsonl").exists()

    def test_rejects_malformed(self, tmp_path, runner):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{broken\n")
        result = runner.invoke(main, ["ingest", str(bad), "--data", str(tmp_path)])
        assert result.exit_code != 0


class TestIndexAndRank:
    def test_index_then_bm25_rank(self, data_dir, runner):
        assert runner.invoke(main, ["index", "--data", str(data_dir)]).exit_code == 0
        assert (data_dir / "index.hidx").exists()
        result = runner.invoke(main, [
            "rank", "--data", str(data_dir), "--model", "bm25", "--k", "10"])
        assert result.exit_code == 0, result.output
        assert len(run_ids(data_dir)) == 1

    def test_hybrid_rank_with_weights(self, data_dir, runner):
        shutil.copy(FIXTURES / "emb_120.hemb", data_dir / "embeddings.hemb")
        result = runner.invoke(main, [
            "rank", "--data", str(data_dir), "--model", "hybrid",
            "--k", "10", "--weights", "0.4,0.2,0.4"])
        assert result.exit_code == 0, result.output

    def test_dense_rank_requires_store(self, data_dir, runner):
        result = runner.invoke(main, [
            "rank", "--data", str(data_dir), "--model", "dense", "--k", "5"])
        assert result.exit_code != 0

    def test_config_file_weights(self, data_dir, runner, tmp_path):
        shutil.copy(FIXTURES / "emb_120.hemb", data_dir / "embeddings.hemb")
        config = tmp_path / "config.json"
        config.write_text(json.dumps(
            {"fusion": {"w_dense": 1.0, "w_lex": 0.0, "w_multi": 0.0}}))
        result = runner.invoke(main, [
            "rank", "--data", str(data_dir), "--model", "hybrid",
            "--k", "5", "--config", str(config)])
        assert result.exit_code == 0, result.output


class TestRerankEvalSample:
    @pytest.fixture()
    def ranked(self, data_dir, runner):
        shutil.copy(FIXTURES / "emb_120.hemb", data_dir / "embeddings.hemb")
        result = runner.invoke(main, [
            "rank", "--data", str(data_dir), "--model", "bm25", "--k", "20"])
        assert result.exit_code == 0, result.output
        return data_dir, run_ids(data_dir)[0]

    def test_rerank_dense(self, ranked, runner):
        data_dir, base = ranked
        result = runner.invoke(main, [
            "rerank", "--data", str(data_dir), "--base", base,
            "--scorer", "dense", "--k", "10", "--depth", "20"])
        assert result.exit_code == 0, result.output
        assert len(run_ids(data_dir)) == 2

    def test_rerank_external_roundtrip(self, ranked, runner, tmp_path):
        data_dir, base = ranked
        manifest = tmp_path / "pairs.jsonl"
        result = runner.invoke(main, [
            "rerank", "--data", str(data_dir), "--base", base,
            "--depth", "10", "--emit-manifest", str(manifest)])
        assert result.exit_code == 0, result.output
        scores = tmp_path / "scores.jsonl"
        with open(manifest) as f, open(scores, "w") as out:
            for line in f:
                rec = json.loads(line)
                rec["score"] = 1.0
                out.write(json.dumps(rec) + "\n")
        result = runner.invoke(main, [
            "rerank", "--data", str(data_dir), "--base", base,
            "--scorer", "external", "--scores", str(scores),
            "--k", "10", "--depth", "10"])
        assert result.exit_code == 0, result.output

    def test_eval_prints_table(self, ranked, runner, tmp_path):
        data_dir, base = ranked
        out = tmp_path / "metrics.json"
        result = runner.invoke(main, [
            "eval", base, "--data", str(data_dir), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "Precision" in result.output
        record = json.loads(out.read_text())
        assert 0.0 <= record["accuracy"] <= 1.0

    def test_sample_deterministic(self, ranked, runner, tmp_path):
        data_dir, base = ranked
        outputs = []
        for name in ("a.jsonl", "b.jsonl"):
            out = tmp_path / name
            result = runner.invoke(main, [
                "sample", base, "--data", str(data_dir), "--n", "10",
                "--seed", "42", "--out", str(out)])
            assert result.exit_code == 0, result.output
            outputs.append(out.read_text())
        assert outputs[0] == outputs[1]
        assert len(outputs[0].splitlines()) == 10
