"""Operator surface: ingest -> match-articles -> mine-sentences ->
mine-paraphrases -> build-benchmark -> review-import -> train-adapter ->
eval -> cka, driven by a YAML config and subcommands.

Logs go to stderr, data to files. Every output file starts with (or
carries) the config hash that produced it. Exit codes: 0 success,
1 validation error, 2 runtime/provider failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, adapt, alignkit, corpus as corpus_mod, evalsuite, kernels, miner
from .config import (ProviderSection, RunConfig, config_from_dict, config_hash,
                     load_config, resolved_dict)
from .errors import (BitextkitError, ConsistencyError, MalformedTemplate,
                     ParseError, ProviderError, SchemaError, TransportError,
                     UnknownLanguage, ValidationError)
from .providers import (FileEmbeddingProvider, HttpEmbeddingProvider,
                        LanguageIdentifier, MockEmbeddingProvider, MockSpec,
                        ProviderConfig, RuleBasedNegativeGenerator,
                        load_embedding_matrix)
from .vecmath import EmbeddingMatrix

log = logging.getLogger("bitextkit")

_VALIDATION_ERRORS = (ValidationError, ParseError, SchemaError, ConsistencyError,
                      MalformedTemplate, UnknownLanguage)


def _packaged(name: str) -> str:
    return str(resources.files("bitextkit.data").joinpath(name))


def build_provider(section: ProviderSection, cache_dir: str):
    if section.kind == "mock":
        concept_map = None
        if section.concept_map:
            concept_map = json.loads(Path(section.concept_map).read_text(encoding="utf-8"))
        return MockEmbeddingProvider(MockSpec(
            dimension=section.dimension, noise_scale=section.noise_scale,
            concept_map=concept_map))
    if section.kind == "file":
        return FileEmbeddingProvider(section.vectors_path)
    return HttpEmbeddingProvider(ProviderConfig(
        endpoint_url=section.endpoint_url, model_id=section.model_id,
        request_batch_size=section.request_batch_size,
        max_concurrent_requests=section.max_concurrent_requests,
        requests_per_minute=section.requests_per_minute,
        cache_dir=cache_dir, timeout=section.timeout))


def _miner_config(cfg: RunConfig) -> miner.MinerConfig:
    m = cfg.miner
    return miner.MinerConfig(
        article_threshold=m.article_threshold, sentence_threshold=m.sentence_threshold,
        window_seconds=m.window_hours * 3600.0, max_length_diff=m.max_length_diff,
        mutual_best=m.mutual_best, dedup_article_targets=m.dedup_article_targets)


def _language_identifier(cfg: RunConfig) -> LanguageIdentifier | None:
    seeds = cfg.corpus.seed_texts
    if not cfg.corpus.lang_gate:
        return None
    if len(seeds) < 2:
        log.warning("language gate enabled but corpus.seed_texts has %d entries; "
                    "gating is skipped (need >= 2 language seed files)", len(seeds))
        return None
    texts = {lang: Path(path).read_text(encoding="utf-8") for lang, path in sorted(seeds.items())}
    return LanguageIdentifier.from_seed_texts(texts)


def _ensure_parent(path) -> str:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return str(path)


def _write_stats(output_path: str, stage: str, cfg_hash: str, payload: dict) -> None:
    doc = {"stage": stage, "config_hash": cfg_hash,
           "kernel_backend": kernels.backend_name(), **payload}
    stats_path = Path(str(output_path) + ".stats.json")
    stats_path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def _read_corpus_file(path) -> list[tuple[corpus_mod.Document, list[corpus_mod.Sentence]]]:
    return corpus_mod.read_corpus(path)


# --- subcommand implementations -----------------------------------------------

def cmd_config_show(args, cfg: RunConfig) -> int:
    doc = resolved_dict(cfg)
    doc["config_hash"] = config_hash(cfg)
    print(json.dumps(doc, sort_keys=True, indent=2))
    return 0


def cmd_ingest(args, cfg: RunConfig) -> int:
    policy = corpus_mod.FilterPolicy(
        min_doc_chars=cfg.corpus.min_doc_chars,
        min_sentence_chars=cfg.corpus.min_sentence_chars,
        min_sentence_words=cfg.corpus.min_sentence_words,
        lang_gate=cfg.corpus.lang_gate)
    lang_id = _language_identifier(cfg)
    raw = corpus_mod.read_documents(args.input)
    kept, audit, stats = corpus_mod.ingest(raw, policy, lang_id)
    h = config_hash(cfg)
    _ensure_parent(args.output)
    corpus_mod.write_corpus(args.output, kept, header_comment=f"config_hash={h}")
    corpus_mod.write_audit_log(str(args.output) + ".audit.tsv", audit,
                               header_comment=f"config_hash={h}")
    _write_stats(args.output, "ingest", h, stats.as_dict())
    log.info("ingest: %d in, %d kept", stats.documents_in, stats.documents_kept)
    return 0


def cmd_match_articles(args, cfg: RunConfig) -> int:
    src = _read_corpus_file(args.src)
    tgt = _read_corpus_file(args.tgt)
    provider = build_provider(cfg.provider_for("article"), cfg.paths.cache_dir)
    pairs = miner.match_articles([d for d, _ in src], [d for d, _ in tgt],
                                 provider, _miner_config(cfg))
    h = config_hash(cfg)
    _ensure_parent(args.output)
    miner.write_article_pairs(args.output, pairs, header_comment=f"config_hash={h}")
    _write_stats(args.output, "match-articles", h,
                 {"src_documents": len(src), "tgt_documents": len(tgt),
                  "article_pairs": len(pairs), "provider": provider.name})
    return 0


def cmd_mine_sentences(args, cfg: RunConfig) -> int:
    src = _read_corpus_file(args.src)
    tgt = _read_corpus_file(args.tgt)
    article_pairs = miner.read_article_pairs(args.article_pairs)
    provider = build_provider(cfg.provider_for("sentence"), cfg.paths.cache_dir)
    pairs, stats = miner.mine_from_article_pairs(
        article_pairs, src, tgt, provider, _miner_config(cfg), jobs=args.jobs)
    h = config_hash(cfg)
    _ensure_parent(args.output)
    miner.write_pairs(args.output, pairs, header_comment=f"config_hash={h}")
    _write_stats(args.output, "mine-sentences", h,
                 {**stats.as_dict(), "provider": provider.name})
    return 0


def cmd_mine_paraphrases(args, cfg: RunConfig) -> int:
    mono = _read_corpus_file(args.corpus)
    provider = build_provider(cfg.provider_for("sentence"), cfg.paths.cache_dir)
    pairs, stats = miner.mine_paraphrases(mono, provider, _miner_config(cfg), jobs=args.jobs)
    h = config_hash(cfg)
    _ensure_parent(args.output)
    miner.write_pairs(args.output, pairs, header_comment=f"config_hash={h}")
    _write_stats(args.output, "mine-paraphrases", h,
                 {**stats.as_dict(), "provider": provider.name})
    return 0


def cmd_build_benchmark(args, cfg: RunConfig) -> int:
    pairs = miner.read_pairs(args.pairs)
    triples, dropped = miner.build_benchmark_candidates(pairs, RuleBasedNegativeGenerator())
    h = config_hash(cfg)
    _ensure_parent(args.review)
    miner.write_review_file(args.review, triples, header_comment=f"config_hash={h}")
    _write_stats(args.review, "build-benchmark", h,
                 {"pairs_in": len(pairs), "candidates": len(triples),
                  "dropped": [{"triple_id": t, "reason": r} for t, r in dropped]})
    return 0


def cmd_review_import(args, cfg: RunConfig) -> int:
    finalized = miner.import_review(args.review)
    h = config_hash(cfg)
    _ensure_parent(args.output)
    miner.write_benchmark(args.output, finalized, header_comment=f"config_hash={h}")
    _write_stats(args.output, "review-import", h, {"finalized": len(finalized)})
    return 0


def cmd_train_adapter(args, cfg: RunConfig) -> int:
    pairs = miner.read_pairs(args.pairs)
    provider = build_provider(cfg.provider_for("sentence"), cfg.paths.cache_dir)
    train_cfg = adapt.TrainConfig(
        batch_size=cfg.train.batch_size, epochs=cfg.train.epochs,
        learning_rate=cfg.train.learning_rate,
        eval_every_steps=cfg.train.eval_every_steps,
        dev_fraction=cfg.train.dev_fraction, seed=cfg.seed,
        lr_override=cfg.train.lr_override)
    adapter, rows = adapt.train_adapter(pairs, provider, train_cfg,
                                        adapt.LossParams(margin=cfg.train.margin))
    h = config_hash(cfg)
    _ensure_parent(args.output)
    _ensure_parent(args.log)
    adapt.save_adapter(adapter, args.output, seed=cfg.seed,
                       config={"config_hash": h, **dataclasses.asdict(train_cfg)})
    adapt.write_training_log(args.log, rows, header_comment=f"config_hash={h}")
    best = min(r.dev_loss for r in rows)
    _write_stats(args.output, "train-adapter", h,
                 {"pairs": len(pairs), "steps": rows[-1].step, "best_dev_loss": best,
                  "provider": provider.name})
    return 0


def _maybe_adapted(matrix: EmbeddingMatrix, adapter_path: str | None) -> EmbeddingMatrix:
    if not adapter_path:
        return matrix
    adapter = adapt.load_adapter(adapter_path)
    return EmbeddingMatrix(matrix.ids, adapter.apply_rows(matrix.vectors))


def cmd_eval(args, cfg: RunConfig) -> int:
    provider = build_provider(cfg.provider_for("sentence"), cfg.paths.cache_dir)
    h = config_hash(cfg)
    if args.task == "bitext":
        pairs = miner.read_pairs(args.pairs)
        src = provider.embed([p.src_text for p in pairs])
        tgt = provider.embed([p.tgt_text for p in pairs])
        report = evalsuite.bitext_accuracy(_maybe_adapted(src, args.adapter), tgt)
    elif args.task == "zsc":
        label_names = evalsuite.load_label_names(args.labels or _packaged("labels_lb.txt"))
        templates = evalsuite.load_templates(args.templates or _packaged("templates_lb.txt"))
        ds = evalsuite.load_labeled_tsv(args.docs, label_names, split="test")
        report = evalsuite.zsc_eval(ds.texts, ds.labels, label_names, templates, provider)
    elif args.task == "paraphrase":
        benchmark = miner.load_benchmark(args.benchmark)
        report = evalsuite.paraphrase_eval(benchmark, provider)
    else:  # transfer
        label_names = evalsuite.load_label_names(args.labels or _packaged("labels_lb.txt"))
        data_dir = Path(args.data_dir)
        source_langs = args.source_langs.split(",")
        datasets = {}
        for lang in source_langs:
            datasets[lang] = (
                evalsuite.load_labeled_tsv(data_dir / f"train_{lang}.tsv", label_names, "train"),
                evalsuite.load_labeled_tsv(data_dir / f"dev_{lang}.tsv", label_names, "dev"),
            )
        test_set = evalsuite.load_labeled_tsv(
            data_dir / f"test_{args.test_lang}.tsv", label_names, "test")
        clf_cfg = evalsuite.ClassifierConfig(
            epochs=cfg.classifier.epochs, learning_rate=cfg.classifier.learning_rate,
            seeds=cfg.classifier.seeds)
        report = evalsuite.transfer_eval(source_langs, datasets, test_set, provider,
                                         clf_cfg, exclude_from_mean=args.test_lang)
    _ensure_parent(args.output)
    evalsuite.write_report(args.output, report, provider=provider.name,
                           config={"config_hash": h})
    _write_stats(args.output, f"eval-{args.task}", h,
                 {"mean": report.mean, "provider": provider.name})
    log.info("eval %s: mean=%.4f", args.task, report.mean)
    return 0


def cmd_cka(args, cfg: RunConfig) -> int:
    matrices: dict[str, EmbeddingMatrix] = {}
    expected = None
    for spec in args.inputs:
        if "=" not in spec:
            raise ValidationError(f"--inputs entries must be lang=path, got {spec!r}")
        lang, path = spec.split("=", 1)
        matrix = load_embedding_matrix(path)
        if args.flores and len(matrix) != 1012:
            raise ValidationError(f"{path}: Flores mode expects 1012 rows, got {len(matrix)}")
        if expected is None:
            expected = len(matrix)
        elif len(matrix) != expected:
            raise ValidationError(f"{path}: expected {expected} aligned rows, got {len(matrix)}")
        matrices[lang] = matrix
    report = alignkit.alignment_matrix(matrices, variant=args.variant)
    h = config_hash(cfg)
    _ensure_parent(args.output)
    alignkit.write_matrix_csv(args.output, report, header_comment=f"config_hash={h}")
    groups = alignkit.LanguageGroupSpec(hr=cfg.groups.hr, lr=cfg.groups.lr)
    group_path = str(args.output) + ".groups.json"
    known = set(report.languages)
    if set(groups.hr) <= known and set(groups.lr) <= known:
        alignkit.write_group_json(group_path, report, groups, config_hash=h)
    _write_stats(args.output, "cka", h,
                 {"languages": list(report.languages), "variant": args.variant})
    return 0


def cmd_cka_compare(args, cfg: RunConfig) -> int:
    before = alignkit.read_matrix_csv(args.before)
    after = alignkit.read_matrix_csv(args.after)
    groups = alignkit.LanguageGroupSpec(hr=cfg.groups.hr, lr=cfg.groups.lr)
    known = set(before.languages)
    spec = groups if (set(groups.hr) <= known and set(groups.lr) <= known) else None
    delta = alignkit.compare_alignment(before, after, spec)
    h = config_hash(cfg)
    _ensure_parent(args.output)
    alignkit.write_delta_json(args.output, delta, config_hash=h)
    _write_stats(args.output, "cka-compare", h,
                 {"improved_pairs": delta.improved_pairs,
                  "worsened_pairs": delta.worsened_pairs})
    return 0


# --- argument parsing -----------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="YAML config path")
    parser.add_argument("--jobs", type=int, default=1, help="worker count for parallel stages")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--provider", choices=("mock", "http", "file"), default=None,
                        help="override the provider kind for every stage")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bitextkit",
                                     description="parallel-pair mining and embedding evaluation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("config", help="config utilities")
    config_sub = p.add_subparsers(dest="config_command", required=True)
    show = config_sub.add_parser("show", help="print the resolved config")
    _add_common(show)
    show.set_defaults(func=cmd_config_show)

    p = sub.add_parser("ingest", help="clean, gate and sentence-split raw articles")
    _add_common(p)
    p.add_argument("--input", required=True, help="raw article JSONL")
    p.add_argument("--output", required=True, help="cleaned corpus JSONL")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("match-articles", help="align articles across two corpora")
    _add_common(p)
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--output", required=True, help="article-pair TSV")
    p.set_defaults(func=cmd_match_articles)

    p = sub.add_parser("mine-sentences", help="extract parallel sentences from matched articles")
    _add_common(p)
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--article-pairs", required=True)
    p.add_argument("--output", required=True, help="sentence-pair TSV")
    p.set_defaults(func=cmd_mine_sentences)

    p = sub.add_parser("mine-paraphrases", help="mine monolingual near-paraphrases")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_mine_paraphrases)

    p = sub.add_parser("build-benchmark", help="generate adversarial candidates for review")
    _add_common(p)
    p.add_argument("--pairs", required=True, help="mined paraphrase pair TSV")
    p.add_argument("--review", required=True, help="review TSV to write")
    p.set_defaults(func=cmd_build_benchmark)

    p = sub.add_parser("review-import", help="finalize a reviewed benchmark")
    _add_common(p)
    p.add_argument("--review", required=True)
    p.add_argument("--output", required=True, help="benchmark JSONL")
    p.set_defaults(func=cmd_review_import)

    p = sub.add_parser("train-adapter", help="train the linear adapter on mined pairs")
    _add_common(p)
    p.add_argument("--pairs", required=True)
    p.add_argument("--output", required=True, help="adapter checkpoint JSON")
    p.add_argument("--log", required=True, help="training log CSV")
    p.set_defaults(func=cmd_train_adapter)

    p = sub.add_parser("eval", help="run an evaluation task")
    _add_common(p)
    p.add_argument("task", choices=("bitext", "zsc", "paraphrase", "transfer"))
    p.add_argument("--output", required=True, help="report JSON")
    p.add_argument("--pairs", help="bitext: aligned sentence-pair TSV")
    p.add_argument("--adapter", help="bitext: adapter checkpoint applied to the source side")
    p.add_argument("--docs", help="zsc: labeled document TSV")
    p.add_argument("--labels", help="label vocabulary file (default: packaged fixture)")
    p.add_argument("--templates", help="zsc: template file (default: packaged fixture)")
    p.add_argument("--benchmark", help="paraphrase: benchmark JSONL")
    p.add_argument("--data-dir", help="transfer: directory with train_/dev_/test_ TSVs")
    p.add_argument("--source-langs", help="transfer: comma-separated source languages")
    p.add_argument("--test-lang", default="lb", help="transfer: test-split language")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cka", help="pairwise alignment matrix over embedding files")
    _add_common(p)
    p.add_argument("--inputs", nargs="+", required=True, metavar="LANG=PATH")
    p.add_argument("--variant", choices=alignkit.VARIANTS, default="paper")
    p.add_argument("--flores", action="store_true", help="enforce 1012 aligned rows")
    p.add_argument("--output", required=True, help="matrix CSV")
    p.set_defaults(func=cmd_cka)

    p = sub.add_parser("cka-compare", help="delta between two alignment matrices")
    _add_common(p)
    p.add_argument("--before", required=True)
    p.add_argument("--after", required=True)
    p.add_argument("--output", required=True, help="delta JSON")
    p.set_defaults(func=cmd_cka_compare)

    return parser


_REQUIRED_BY_TASK = {
    "bitext": ("pairs",),
    "zsc": ("docs",),
    "paraphrase": ("benchmark",),
    "transfer": ("data_dir", "source_langs"),
}


def _check_eval_args(args) -> None:
    for name in _REQUIRED_BY_TASK[args.task]:
        if getattr(args, name) in (None, ""):
            flag = "--" + name.replace("_", "-")
            raise ValidationError(f"eval {args.task} requires {flag}")


def _load_run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else config_from_dict({})
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.provider is not None:
        for section_name in ("provider", "article_provider", "sentence_provider"):
            section = getattr(cfg, section_name)
            if section is not None:
                cfg = dataclasses.replace(
                    cfg, **{section_name: dataclasses.replace(section, kind=args.provider)})
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(all="raise", under="ignore")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_run_config(args)
        if getattr(args, "task", None) is not None and args.command == "eval":
            _check_eval_args(args)
        return args.func(args, cfg)
    except _VALIDATION_ERRORS as exc:
        log.error("%s", exc)
        return 1
    except FileNotFoundError as exc:
        log.error("missing input: %s", exc)
        return 1
    except (ProviderError, TransportError) as exc:
        log.error("provider failure: %s", exc)
        return 2
    except BitextkitError as exc:
        log.error("runtime failure: %s", exc)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 2, not a traceback
        log.error("unexpected failure: %s: %s", type(exc).__name__, exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
