import hashlib
import json
from pathlib import Path

import pytest
import yaml

from bitextkit.cli import main
from bitextkit.config import config_from_dict, config_hash, load_config
from bitextkit.errors import ParseError, ValidationError
from bitextkit.miner import read_pairs

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"


class TestConfig:
    def test_defaults_match_documented_constants(self):
        cfg = config_from_dict({})
        assert cfg.miner.article_threshold == 0.65
        assert cfg.miner.sentence_threshold == 0.7
        assert cfg.miner.window_hours == 24.0
        assert cfg.miner.max_length_diff == 0.5
        assert cfg.corpus.min_doc_chars == 100
        assert cfg.corpus.min_sentence_chars == 10
        assert cfg.corpus.min_sentence_words == 3
        assert cfg.train.margin == 0.5
        assert cfg.train.batch_size == 16
        assert cfg.train.epochs == 3
        assert cfg.train.learning_rate == 1e-6
        assert cfg.train.eval_every_steps == 500
        assert cfg.train.dev_fraction == 0.01
        assert cfg.classifier.epochs == 500
        assert cfg.classifier.learning_rate == 1e-2
        assert len(cfg.classifier.seeds) == 4

    def test_out_of_range_names_key(self):
        with pytest.raises(ValidationError) as err:
            config_from_dict({"miner": {"article_threshold": 1.5}})
        assert "miner.article_threshold" in str(err.value)
        assert "(0.0, 1.0)" in str(err.value)

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError) as err:
            config_from_dict({"miner": {"artcle_threshold": 0.5}})
        assert "artcle_threshold" in str(err.value)

    def test_provider_kind_validated(self):
        with pytest.raises(ValidationError):
            config_from_dict({"provider": {"kind": "carrier-pigeon"}})
        with pytest.raises(ValidationError):
            config_from_dict({"provider": {"kind": "http"}})  # needs endpoint_url

    def test_groups_must_be_disjoint(self):
        with pytest.raises(ValidationError):
            config_from_dict({"groups": {"hr": ["aa"], "lr": ["aa", "bb"]}})

    def test_yaml_parse_error(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("miner: [unclosed", encoding="utf-8")
        with pytest.raises(ParseError):
            load_config(path)

    def test_hash_stable_and_sensitive(self):
        a = config_from_dict({})
        b = config_from_dict({})
        c = config_from_dict({"miner": {"article_threshold": 0.6}})
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash(c)
        assert len(config_hash(a)) == 16


def _hash_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Run the full fixture pipeline once; tests inspect its artifacts."""
    out = tmp_path_factory.mktemp("pipeline")
    cfg_doc = yaml.safe_load((FIXTURES / "config.yaml").read_text(encoding="utf-8"))
    cfg_doc["provider"]["concept_map"] = str(FIXTURES / "concept_map.json")
    cfg_doc["paths"]["cache_dir"] = str(out / "cache")
    config_path = out / "config.yaml"
    config_path.write_text(yaml.safe_dump(cfg_doc), encoding="utf-8")
    common = ["--config", str(config_path)]

    def run(*argv):
        return main([*argv, *common])

    steps = [
        ("ingest", ["ingest", "--input", str(FIXTURES / "articles_lb.jsonl"),
                    "--output", str(out / "corpus_lb.jsonl")]),
        ("ingest", ["ingest", "--input", str(FIXTURES / "articles_en.jsonl"),
                    "--output", str(out / "corpus_en.jsonl")]),
        ("ingest", ["ingest", "--input", str(FIXTURES / "articles_lb_mono.jsonl"),
                    "--output", str(out / "corpus_mono.jsonl")]),
        ("match", ["match-articles", "--src", str(out / "corpus_lb.jsonl"),
                   "--tgt", str(out / "corpus_en.jsonl"),
                   "--output", str(out / "article_pairs.tsv")]),
        ("mine", ["mine-sentences", "--src", str(out / "corpus_lb.jsonl"),
                  "--tgt", str(out / "corpus_en.jsonl"),
                  "--article-pairs", str(out / "article_pairs.tsv"),
                  "--output", str(out / "pairs.tsv")]),
        ("para", ["mine-paraphrases", "--corpus", str(out / "corpus_mono.jsonl"),
                  "--output", str(out / "paraphrases.tsv")]),
        ("bench", ["build-benchmark", "--pairs", str(out / "paraphrases.tsv"),
                   "--review", str(out / "review.tsv")]),
    ]
    for name, argv in steps:
        assert run(*argv) == 0, f"stage {name} failed"

    review = (out / "review.tsv").read_text(encoding="utf-8")
    (out / "review.tsv").write_text(review.replace("\tpending\t", "\taccepted\t"),
                                    encoding="utf-8")
    assert run("review-import", "--review", str(out / "review.tsv"),
               "--output", str(out / "benchmark.jsonl")) == 0
    assert run("eval", "paraphrase", "--benchmark", str(out / "benchmark.jsonl"),
               "--output", str(out / "paraphrase_report.json")) == 0
    assert run("eval", "bitext", "--pairs", str(out / "pairs.tsv"),
               "--output", str(out / "bitext_report.json")) == 0
    assert run("eval", "zsc", "--docs", str(FIXTURES / "zsc_test.tsv"),
               "--output", str(out / "zsc_report.json")) == 0
    return out, run


class TestPipeline:
    def test_planted_pair_count(self, pipeline):
        out, _ = pipeline
        pairs = read_pairs(out / "pairs.tsv")
        assert len(pairs) == 250

    def test_stage_stats_written_with_config_hash(self, pipeline):
        out, _ = pipeline
        stats = json.loads((out / "pairs.tsv.stats.json").read_text(encoding="utf-8"))
        assert stats["stage"] == "mine-sentences"
        assert stats["after_text_dedup"] == 250
        assert len(stats["config_hash"]) == 16
        first_line = (out / "pairs.tsv").read_text(encoding="utf-8").splitlines()[0]
        assert first_line == f"# config_hash={stats['config_hash']}"

    def test_paraphrase_mining_and_benchmark(self, pipeline):
        out, _ = pipeline
        paras = read_pairs(out / "paraphrases.tsv")
        assert len(paras) == 100  # 10 stories x 5 sentences x 2 directions
        assert all(p.src_text != p.tgt_text for p in paras)
        benchmark = [json.loads(l) for l in
                     (out / "benchmark.jsonl").read_text(encoding="utf-8").splitlines()
                     if not l.startswith("#")]
        assert len(benchmark) == 100

    def test_eval_reports(self, pipeline):
        out, _ = pipeline
        para = json.loads((out / "paraphrase_report.json").read_text(encoding="utf-8"))
        assert para["mean"] == 1.0
        bitext = json.loads((out / "bitext_report.json").read_text(encoding="utf-8"))
        assert bitext["mean"] == 1.0
        zsc = json.loads((out / "zsc_report.json").read_text(encoding="utf-8"))
        assert zsc["mean"] == 1.0
        assert len(zsc["breakdown"]) == 5  # packaged template fixture

    def test_rerun_is_byte_identical(self, pipeline):
        out, run = pipeline
        watched = ["corpus_lb.jsonl", "article_pairs.tsv", "pairs.tsv",
                   "paraphrases.tsv", "pairs.tsv.stats.json"]
        before = {name: _hash_file(out / name) for name in watched}
        assert run("ingest", "--input", str(FIXTURES / "articles_lb.jsonl"),
                   "--output", str(out / "corpus_lb.jsonl")) == 0
        assert run("match-articles", "--src", str(out / "corpus_lb.jsonl"),
                   "--tgt", str(out / "corpus_en.jsonl"),
                   "--output", str(out / "article_pairs.tsv")) == 0
        assert run("mine-sentences", "--src", str(out / "corpus_lb.jsonl"),
                   "--tgt", str(out / "corpus_en.jsonl"),
                   "--article-pairs", str(out / "article_pairs.tsv"),
                   "--output", str(out / "pairs.tsv")) == 0
        assert run("mine-paraphrases", "--corpus", str(out / "corpus_mono.jsonl"),
                   "--output", str(out / "paraphrases.tsv")) == 0
        after = {name: _hash_file(out / name) for name in watched}
        assert before == after


class TestCliBasics:
    def test_config_show(self, capsys):
        assert main(["config", "show"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["miner"]["article_threshold"] == 0.65
        assert "config_hash" in doc

    def test_validation_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("miner:\n  article_threshold: 1.5\n", encoding="utf-8")
        assert main(["config", "show", "--config", str(bad)]) == 1

    def test_missing_input_exit_code(self, tmp_path):
        assert main(["ingest", "--input", str(tmp_path / "nope.jsonl"),
                     "--output", str(tmp_path / "out.jsonl")]) == 1

    def test_eval_requires_task_inputs(self, tmp_path):
        assert main(["eval", "bitext", "--output", str(tmp_path / "r.json")]) == 1

    def test_cka_on_identical_files(self, tmp_path):
        import numpy as np
        from bitextkit.providers import write_embedding_tsv
        rng = np.random.default_rng(0)
        rows = [(f"id{i}", f"sentence {i}", rng.standard_normal(6)) for i in range(12)]
        for lang in ("xx", "yy"):
            write_embedding_tsv(tmp_path / f"{lang}.tsv", rows)
        out = tmp_path / "matrix.csv"
        assert main(["cka", "--inputs", f"xx={tmp_path}/xx.tsv", f"yy={tmp_path}/yy.tsv",
                     "--variant", "paper", "--output", str(out)]) == 0
        from bitextkit.alignkit import read_matrix_csv
        report = read_matrix_csv(out)
        assert report.value("xx", "yy") == pytest.approx(0.0, abs=1e-9)

    def test_cka_flores_mode_enforces_rows(self, tmp_path):
        import numpy as np
        from bitextkit.providers import write_embedding_tsv
        rows = [(f"id{i}", f"s {i}", np.ones(3)) for i in range(5)]
        write_embedding_tsv(tmp_path / "xx.tsv", rows)
        write_embedding_tsv(tmp_path / "yy.tsv", rows)
        assert main(["cka", "--inputs", f"xx={tmp_path}/xx.tsv", f"yy={tmp_path}/yy.tsv",
                     "--flores", "--output", str(tmp_path / "m.csv")]) == 1

    def test_cka_compare(self, tmp_path):
        import numpy as np
        from bitextkit.alignkit import AlignmentReport, write_matrix_csv
        m = np.array([[0.0, 0.4], [0.4, 0.0]])
        write_matrix_csv(tmp_path / "before.csv", AlignmentReport(("a", "b"), m, "paper"))
        write_matrix_csv(tmp_path / "after.csv",
                         AlignmentReport(("a", "b"), m * 0.5, "paper"))
        out = tmp_path / "delta.json"
        assert main(["cka-compare", "--before", str(tmp_path / "before.csv"),
                     "--after", str(tmp_path / "after.csv"), "--output", str(out)]) == 0
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert doc["improved_pairs"] == 1
        assert doc["pair_deltas"]["a/b"] == pytest.approx(-0.2)

    def test_transfer_cli(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        labels = ["Technologie", "Reesen", "Politik", "Gesondheet", "Ennerhalung",
                  "Geographie", "Sport"]
        concept_map = {label: f"c{i}" for i, label in enumerate(labels)}
        for lang in ("de", "en", "lb"):
            rows = []
            for li, label in enumerate(labels):
                for j in range(3):
                    text = f"{lang} doc {li}-{j}"
                    concept_map[text] = f"c{li}"
                    rows.append(f"{text}\t{label}")
            for split in ("train", "dev", "test"):
                (data / f"{split}_{lang}.tsv").write_text(
                    "\n".join(rows) + "\n", encoding="utf-8")
        (tmp_path / "cmap.json").write_text(json.dumps(concept_map), encoding="utf-8")
        config = {"provider": {"kind": "mock", "dimension": 24,
                               "concept_map": str(tmp_path / "cmap.json")},
                  "classifier": {"epochs": 40, "seeds": [0, 1]}}
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(yaml.safe_dump(config), encoding="utf-8")
        out = tmp_path / "transfer.json"
        assert main(["eval", "transfer", "--config", str(cfg_path),
                     "--data-dir", str(data), "--source-langs", "de,en",
                     "--test-lang", "lb", "--output", str(out)]) == 0
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert set(doc["breakdown"]) == {"de", "en"}
        assert doc["mean"] == 1.0

    def test_train_adapter_cli(self, tmp_path):
        import numpy as np
        from bitextkit.miner import SentencePair, write_pairs
        from bitextkit.providers import write_embedding_tsv
        rng = np.random.default_rng(1)
        pairs, rows = [], []
        for i in range(220):
            u = rng.standard_normal(6)
            pairs.append(SentencePair(f"src {i}", f"tgt {i}", 1.0, "a", "b", "d", "e", i, i))
            rows.append((f"s{i}", f"src {i}", u))
            rows.append((f"t{i}", f"tgt {i}", u))
        write_pairs(tmp_path / "pairs.tsv", pairs)
        write_embedding_tsv(tmp_path / "vectors.tsv", rows)
        config = {"provider": {"kind": "file", "vectors_path": str(tmp_path / "vectors.tsv")},
                  "train": {"epochs": 1, "eval_every_steps": 10}}
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(yaml.safe_dump(config), encoding="utf-8")
        assert main(["train-adapter", "--config", str(cfg_path),
                     "--pairs", str(tmp_path / "pairs.tsv"),
                     "--output", str(tmp_path / "adapter.json"),
                     "--log", str(tmp_path / "log.csv")]) == 0
        from bitextkit.adapt import load_adapter
        adapter = load_adapter(tmp_path / "adapter.json")
        assert adapter.dim == 6
        log_lines = (tmp_path / "log.csv").read_text(encoding="utf-8").splitlines()
        assert log_lines[1] == "step,train_loss,dev_loss,is_best"
