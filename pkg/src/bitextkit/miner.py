"""Mining: align articles across languages inside a time window, extract
parallel sentences from aligned pairs, mine monolingual near-paraphrases,
and assemble the adversarial paraphrase benchmark with a file-based human
review round-trip."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .corpus import Document, Sentence
from .errors import ConsistencyError, NoRuleApplicable, SchemaError
from .providers.negatives import GenerationProvider, RuleBasedNegativeGenerator
from .textutil import char_count

log = logging.getLogger(__name__)

REVIEW_STATUSES = ("pending", "accepted", "corrected", "rejected")
REVIEW_COLUMNS = ("triple_id", "anchor", "paraphrase", "adversarial",
                  "status", "corrected_adversarial")


@dataclass(frozen=True)
class MinerConfig:
    article_threshold: float = 0.65
    sentence_threshold: float = 0.7
    window_seconds: float = 86400.0
    max_length_diff: float = 0.5
    # Article matching is one-directional src->tgt by default; mutual_best
    # additionally requires src to be the best match of its target.
    mutual_best: bool = False
    # Many sources may select the same target article unless enabled.
    dedup_article_targets: bool = False

    def __post_init__(self):
        if not 0.0 < self.article_threshold < 1.0:
            raise ValueError(f"article_threshold must be in (0, 1), got {self.article_threshold}")
        if not 0.0 < self.sentence_threshold < 1.0:
            raise ValueError(f"sentence_threshold must be in (0, 1), got {self.sentence_threshold}")
        if self.window_seconds <= 0:
            raise ValueError(f"window_seconds must be positive, got {self.window_seconds}")
        if not 0.0 < self.max_length_diff <= 1.0:
            raise ValueError(f"max_length_diff must be in (0, 1], got {self.max_length_diff}")


@dataclass(frozen=True)
class ArticlePair:
    src_doc_id: str
    tgt_doc_id: str
    score: float
    src_lang: str
    tgt_lang: str


@dataclass(frozen=True)
class SentencePair:
    src_text: str
    tgt_text: str
    score: float
    src_lang: str
    tgt_lang: str
    src_doc_id: str
    tgt_doc_id: str
    src_index: int
    tgt_index: int


@dataclass
class MiningStats:
    src_documents: int = 0
    tgt_documents: int = 0
    article_pairs: int = 0
    src_sentences_considered: int = 0
    sentence_pairs_scored: int = 0
    after_length_filter: int = 0
    after_target_dedup: int = 0
    after_text_dedup: int = 0

    def as_dict(self) -> dict:
        return dict(vars(self))


def article_text(doc: Document) -> str:
    """The text an article is embedded from (title prepended when present)."""
    return f"{doc.title} {doc.body}" if doc.title else doc.body


def embed_map(provider, texts: Iterable[str]) -> dict[str, np.ndarray]:
    """Embed the unique texts once; returns text -> vector."""
    unique = list(dict.fromkeys(texts))
    if not unique:
        return {}
    matrix = provider.embed(unique)
    return {t: matrix.vectors[i] for i, t in enumerate(unique)}


def length_ratio_ok(a: str, b: str, max_diff: float) -> bool:
    """True iff (len_long - len_short) / len_long <= max_diff, lengths in
    Unicode scalars. A difference of exactly max_diff passes."""
    la, lb = char_count(a), char_count(b)
    longer, shorter = max(la, lb), min(la, lb)
    return (longer - shorter) / longer <= max_diff


def match_articles(src_docs: Sequence[Document], tgt_docs: Sequence[Document],
                   provider, cfg: MinerConfig, *,
                   exclude_same_id: bool = False) -> list[ArticlePair]:
    """Best target article per source article within the time window.

    A pair is emitted when the best cosine similarity strictly exceeds
    cfg.article_threshold; ties break to the lexicographically lowest
    target id. At most one pair per source document.
    """
    if not src_docs or not tgt_docs:
        return []
    tgt_sorted = sorted(tgt_docs, key=lambda d: d.id)
    vectors = embed_map(provider, [article_text(d) for d in list(src_docs) + tgt_sorted])
    src_mat = np.stack([vectors[article_text(d)] for d in src_docs])
    tgt_mat = np.stack([vectors[article_text(d)] for d in tgt_sorted])
    tgt_ts = np.array([d.published_at for d in tgt_sorted])

    offsets = [0]
    cand_idx: list[np.ndarray] = []
    for doc in src_docs:
        mask = np.abs(tgt_ts - doc.published_at) <= cfg.window_seconds
        if exclude_same_id:
            mask &= np.array([t.id != doc.id for t in tgt_sorted])
        idx = np.nonzero(mask)[0]
        cand_idx.append(idx)
        offsets.append(offsets[-1] + idx.size)
    flat_idx = np.concatenate(cand_idx) if cand_idx else np.empty(0, dtype=np.int64)
    best, scores = kernels.argmax_cosine_subsets(
        src_mat, tgt_mat, np.array(offsets, dtype=np.int64), flat_idx,
        cfg.article_threshold)

    reverse_best = None
    if cfg.mutual_best:
        src_ts = np.array([d.published_at for d in src_docs])
        r_offsets = [0]
        r_idx: list[np.ndarray] = []
        for tgt in tgt_sorted:
            mask = np.abs(src_ts - tgt.published_at) <= cfg.window_seconds
            if exclude_same_id:
                mask &= np.array([s.id != tgt.id for s in src_docs])
            idx = np.nonzero(mask)[0]
            r_idx.append(idx)
            r_offsets.append(r_offsets[-1] + idx.size)
        r_flat = np.concatenate(r_idx) if r_idx else np.empty(0, dtype=np.int64)
        reverse_best, _ = kernels.argmax_cosine_subsets(
            tgt_mat, src_mat, np.array(r_offsets, dtype=np.int64), r_flat,
            cfg.article_threshold)

    pairs: list[ArticlePair] = []
    for i, doc in enumerate(src_docs):
        j = int(best[i])
        if j < 0:
            continue
        if reverse_best is not None and int(reverse_best[j]) != i:
            continue
        pairs.append(ArticlePair(
            src_doc_id=doc.id, tgt_doc_id=tgt_sorted[j].id, score=float(scores[i]),
            src_lang=doc.lang, tgt_lang=tgt_sorted[j].lang))
    pairs.sort(key=lambda p: p.src_doc_id)

    if cfg.dedup_article_targets:
        by_target: dict[str, ArticlePair] = {}
        for p in pairs:
            held = by_target.get(p.tgt_doc_id)
            if held is None or p.score > held.score:
                by_target[p.tgt_doc_id] = p
        kept = set(map(id, by_target.values()))
        pairs = [p for p in pairs if id(p) in kept]
    return pairs


def match_sentences(pair: ArticlePair, src_sentences: Sequence[Sentence],
                    tgt_sentences: Sequence[Sentence], provider,
                    cfg: MinerConfig,
                    vectors: Mapping[str, np.ndarray] | None = None,
                    stats: MiningStats | None = None) -> list[SentencePair]:
    """Best target sentence per source sentence inside one matched article
    pair, thresholded, length-filtered, with target collisions resolved in
    favor of the higher score (ties to the lower source index)."""
    if not src_sentences or not tgt_sentences:
        return []
    if vectors is None:
        vectors = embed_map(provider, [s.text for s in src_sentences] +
                            [s.text for s in tgt_sentences])
    src_mat = np.stack([vectors[s.text] for s in src_sentences])
    tgt_mat = np.stack([vectors[s.text] for s in tgt_sentences])
    best, scores = kernels.argmax_cosine(src_mat, tgt_mat, cfg.sentence_threshold)

    if stats is not None:
        stats.src_sentences_considered += len(src_sentences)

    chosen: dict[int, SentencePair] = {}
    for i, src in enumerate(src_sentences):
        j = int(best[i])
        if j < 0:
            continue
        if stats is not None:
            stats.sentence_pairs_scored += 1
        tgt = tgt_sentences[j]
        if not length_ratio_ok(src.text, tgt.text, cfg.max_length_diff):
            continue
        if stats is not None:
            stats.after_length_filter += 1
        candidate = SentencePair(
            src_text=src.text, tgt_text=tgt.text, score=float(scores[i]),
            src_lang=pair.src_lang, tgt_lang=pair.tgt_lang,
            src_doc_id=pair.src_doc_id, tgt_doc_id=pair.tgt_doc_id,
            src_index=src.index, tgt_index=tgt.index)
        held = chosen.get(j)
        if held is None or candidate.score > held.score:
            chosen[j] = candidate
    out = sorted(chosen.values(), key=lambda p: p.src_index)
    if stats is not None:
        stats.after_target_dedup += len(out)
    return out


Corpus = Sequence[tuple[Document, Sequence[Sentence]]]


def _dedupe_texts(pairs: list[SentencePair]) -> list[SentencePair]:
    # Exact duplicate (src_text, tgt_text) pairs keep the highest score;
    # insertion order (src_doc_id, src_index) breaks score ties.
    best: dict[tuple[str, str], SentencePair] = {}
    for p in pairs:
        key = (p.src_text, p.tgt_text)
        held = best.get(key)
        if held is None or p.score > held.score:
            best[key] = p
    survivors = set(map(id, best.values()))
    return [p for p in pairs if id(p) in survivors]


def mine_from_article_pairs(article_pairs: Sequence[ArticlePair],
                            src_corpus: Corpus, tgt_corpus: Corpus, provider,
                            cfg: MinerConfig, *, monolingual: bool = False,
                            jobs: int = 1,
                            stats: MiningStats | None = None,
                            ) -> tuple[list[SentencePair], MiningStats]:
    """Sentence stage: match, length-filter and dedupe within each matched
    article pair. Pairs may be processed by several workers; the output is
    assembled in (src_doc_id, src_index) order regardless of scheduling."""
    if stats is None:
        stats = MiningStats(src_documents=len(src_corpus), tgt_documents=len(tgt_corpus))
    stats.article_pairs = len(article_pairs)
    src_sents = {doc.id: sents for doc, sents in src_corpus}
    tgt_sents = {doc.id: sents for doc, sents in tgt_corpus}
    texts: list[str] = []
    for pair in article_pairs:
        texts.extend(s.text for s in src_sents[pair.src_doc_id])
        texts.extend(s.text for s in tgt_sents[pair.tgt_doc_id])
    vectors = embed_map(provider, texts)

    def run_one(pair: ArticlePair) -> tuple[list[SentencePair], MiningStats]:
        # Per-worker stats avoid racy shared counters; merged below.
        local = MiningStats()
        chunk = match_sentences(pair, src_sents[pair.src_doc_id],
                                tgt_sents[pair.tgt_doc_id], provider, cfg,
                                vectors=vectors, stats=local)
        return chunk, local

    pairs: list[SentencePair] = []
    results: list[tuple[list[SentencePair], MiningStats]]
    if jobs > 1 and len(article_pairs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, article_pairs))
    else:
        results = [run_one(pair) for pair in article_pairs]
    for chunk, local in results:
        pairs.extend(chunk)
        stats.src_sentences_considered += local.src_sentences_considered
        stats.sentence_pairs_scored += local.sentence_pairs_scored
        stats.after_length_filter += local.after_length_filter
        stats.after_target_dedup += local.after_target_dedup

    if monolingual:
        pairs = [p for p in pairs if p.src_text != p.tgt_text]
    pairs = _dedupe_texts(pairs)
    pairs.sort(key=lambda p: (p.src_doc_id, p.src_index))
    stats.after_text_dedup = len(pairs)
    return pairs, stats


def mine_pairs(src_corpus: Corpus, tgt_corpus: Corpus, provider,
               cfg: MinerConfig, *, monolingual: bool = False,
               jobs: int = 1) -> tuple[list[SentencePair], MiningStats]:
    """Full pipeline: article matching, per-pair sentence matching, dedup.

    Output is ordered by (src_doc_id, src_index) regardless of scheduling,
    so identical inputs produce identical files.
    """
    stats = MiningStats(src_documents=len(src_corpus), tgt_documents=len(tgt_corpus))
    src_docs = [doc for doc, _ in src_corpus]
    tgt_docs = [doc for doc, _ in tgt_corpus]
    article_pairs = match_articles(src_docs, tgt_docs, provider, cfg,
                                   exclude_same_id=monolingual)
    return mine_from_article_pairs(article_pairs, src_corpus, tgt_corpus, provider,
                                   cfg, monolingual=monolingual, jobs=jobs, stats=stats)


def mine_paraphrases(corpus: Corpus, provider, cfg: MinerConfig,
                     jobs: int = 1) -> tuple[list[SentencePair], MiningStats]:
    """Monolingual near-paraphrase mining: the corpus plays both roles,
    self-matches are excluded at the article level, and pairs with
    identical texts are dropped."""
    return mine_pairs(corpus, corpus, provider, cfg, monolingual=True, jobs=jobs)


# --- pair dataset persistence ------------------------------------------------

def write_article_pairs(path, pairs: Sequence[ArticlePair],
                        header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("src_doc\ttgt_doc\tscore\tsrc_lang\ttgt_lang\n")
        for p in pairs:
            fh.write(f"{p.src_doc_id}\t{p.tgt_doc_id}\t{p.score:.10f}\t{p.src_lang}\t{p.tgt_lang}\n")


def read_article_pairs(path) -> list[ArticlePair]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
             if ln and not ln.startswith("#")]
    if not lines or lines[0].split("\t")[:2] != ["src_doc", "tgt_doc"]:
        raise SchemaError(f"{path}: missing article-pair header row")
    pairs = []
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split("\t")
        if len(parts) != 5:
            raise SchemaError(f"{path}:{lineno}: expected 5 columns, got {len(parts)}")
        pairs.append(ArticlePair(src_doc_id=parts[0], tgt_doc_id=parts[1],
                                 score=float(parts[2]), src_lang=parts[3], tgt_lang=parts[4]))
    return pairs


def write_pairs(path, pairs: Sequence[SentencePair], header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("src_text\ttgt_text\tscore\tsrc_doc\ttgt_doc\n")
        for p in pairs:
            fh.write(f"{p.src_text}\t{p.tgt_text}\t{p.score:.10f}\t{p.src_doc_id}\t{p.tgt_doc_id}\n")


def read_pairs(path) -> list[SentencePair]:
    rows: list[SentencePair] = []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body or body[0].split("\t")[:2] != ["src_text", "tgt_text"]:
        raise SchemaError(f"{path}: missing pair-file header row")
    for lineno, line in enumerate(body[1:], 2):
        parts = line.split("\t")
        if len(parts) != 5:
            raise SchemaError(f"{path}:{lineno}: expected 5 columns, got {len(parts)}")
        rows.append(SentencePair(
            src_text=parts[0], tgt_text=parts[1], score=float(parts[2]),
            src_lang="", tgt_lang="", src_doc_id=parts[3], tgt_doc_id=parts[4],
            src_index=-1, tgt_index=-1))
    return rows


# --- paraphrase benchmark construction ---------------------------------------

@dataclass(frozen=True)
class ParaphraseTriple:
    triple_id: str
    anchor: str
    paraphrase: str
    adversarial: str
    review_status: str = "pending"
    corrected_adversarial: str | None = None

    def __post_init__(self):
        if self.review_status not in REVIEW_STATUSES:
            raise SchemaError(f"unknown review status {self.review_status!r}")
        if self.anchor == self.paraphrase:
            raise ConsistencyError("anchor equals paraphrase")

    def final_adversarial(self) -> str:
        if self.review_status == "corrected":
            if not self.corrected_adversarial:
                raise ConsistencyError(
                    f"{self.triple_id}: status 'corrected' without corrected text")
            return self.corrected_adversarial
        return self.adversarial


def build_benchmark_candidates(pairs: Sequence[SentencePair],
                               generator: GenerationProvider | None = None,
                               ) -> tuple[list[ParaphraseTriple], list[tuple[str, str]]]:
    """One pending triple per mined paraphrase pair; pairs the generator
    cannot transform are dropped and logged."""
    gen = generator if generator is not None else RuleBasedNegativeGenerator()
    triples: list[ParaphraseTriple] = []
    dropped: list[tuple[str, str]] = []
    for pos, pair in enumerate(pairs):
        triple_id = f"t{pos:05d}"
        try:
            adversarial = gen.generate(pair.src_text, pair.tgt_text)
        except NoRuleApplicable:
            dropped.append((triple_id, "no_rule_applicable"))
            log.info("benchmark candidate %s dropped: no rule applicable", triple_id)
            continue
        if adversarial == pair.tgt_text:
            dropped.append((triple_id, "unchanged_output"))
            continue
        triples.append(ParaphraseTriple(
            triple_id=triple_id, anchor=pair.src_text, paraphrase=pair.tgt_text,
            adversarial=adversarial))
    return triples, dropped


def write_review_file(path, triples: Sequence[ParaphraseTriple],
                      header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("\t".join(REVIEW_COLUMNS) + "\n")
        for t in triples:
            fh.write("\t".join([t.triple_id, t.anchor, t.paraphrase, t.adversarial,
                                t.review_status, t.corrected_adversarial or ""]) + "\n")


def import_review(path) -> list[ParaphraseTriple]:
    """Read a filled review file; keep accepted triples as-is, corrected
    triples with their replacement text; drop rejected and pending ones."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
             if ln and not ln.startswith("#")]
    if not lines or tuple(lines[0].split("\t")) != REVIEW_COLUMNS:
        raise SchemaError(f"{path}: expected header {' | '.join(REVIEW_COLUMNS)}")
    finalized: list[ParaphraseTriple] = []
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split("\t")
        if len(parts) != len(REVIEW_COLUMNS):
            raise SchemaError(f"{path}:{lineno}: expected {len(REVIEW_COLUMNS)} columns, "
                              f"got {len(parts)}")
        triple_id, anchor, paraphrase, adversarial, status, corrected = parts
        if status not in REVIEW_STATUSES:
            raise SchemaError(f"{path}:{lineno}: unknown status {status!r}")
        if status == "corrected" and not corrected.strip():
            raise ConsistencyError(f"{path}:{lineno}: status 'corrected' without corrected text")
        if status not in ("accepted", "corrected"):
            continue
        finalized.append(ParaphraseTriple(
            triple_id=triple_id, anchor=anchor, paraphrase=paraphrase,
            adversarial=adversarial, review_status=status,
            corrected_adversarial=corrected or None))
    return finalized


def write_benchmark(path, triples: Sequence[ParaphraseTriple],
                    header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        for t in triples:
            fh.write(json.dumps(
                {"anchor": t.anchor, "paraphrase": t.paraphrase,
                 "not_paraphrase": t.final_adversarial()},
                ensure_ascii=False, sort_keys=True) + "\n")


def load_benchmark(path) -> list[dict]:
    items = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        record = json.loads(line)
        for key in ("anchor", "paraphrase", "not_paraphrase"):
            if key not in record:
                raise SchemaError(f"{path}:{lineno}: missing field {key!r}")
        items.append(record)
    return items
