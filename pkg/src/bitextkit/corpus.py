"""Corpus ingestion: clean raw articles, gate them by length and language,
and split them into span-tracked sentences.

The cleaning rule set (markup tags, URLs, bracketed metadata blocks,
whitespace collapsing) is a documented approximation of typical news-feed
noise, applied to a fixpoint so cleaning is idempotent.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyAfterCleaning, SchemaError
from .providers.langid import LanguageIdentifier
from .textutil import char_count, nfc, word_count

REASON_TOO_SHORT = "too_short"
REASON_TOO_FEW_WORDS = "too_few_words"
REASON_WRONG_LANGUAGE = "wrong_language"

_TAG = re.compile(r"<[^>]*>")
_URL = re.compile(r"(?:https?://|www\.)\S+")
_BRACKET = re.compile(r"\[[^\][]*\]")
_WS = re.compile(r"\s+")

_TERMINAL = ".!?…"
_OPENING_QUOTES = "\"'«„‚“‘‹"
_CLOSING_QUOTES = "\"'»“”’›"
_ORDINAL = re.compile(r"\d+\.$")


@dataclass(frozen=True)
class Document:
    id: str
    lang: str
    published_at: float  # UTC epoch seconds
    title: str | None
    body: str


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class FilterPolicy:
    min_doc_chars: int = 100
    min_sentence_chars: int = 10
    min_sentence_words: int = 3
    lang_gate: bool = True

    def __post_init__(self):
        for name in ("min_doc_chars", "min_sentence_chars", "min_sentence_words"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class Admission:
    accepted: bool
    reason: str | None = None

    @classmethod
    def accept(cls) -> "Admission":
        return cls(True, None)

    @classmethod
    def reject(cls, reason: str) -> "Admission":
        return cls(False, reason)


def clean_text(text: str) -> str:
    """Strip markup tags, URLs and [bracketed] blocks; collapse whitespace.

    Removal loops to a fixpoint so clean_text(clean_text(x)) == clean_text(x).
    """
    current = text
    while True:
        stripped = _TAG.sub(" ", current)
        stripped = _URL.sub(" ", stripped)
        stripped = _BRACKET.sub(" ", stripped)
        stripped = _WS.sub(" ", stripped).strip()
        if stripped == current:
            return stripped
        current = stripped


def clean_document(raw: Document) -> Document:
    body = clean_text(nfc(raw.body))
    if not body:
        raise EmptyAfterCleaning(f"document {raw.id!r} is empty after cleaning")
    title = clean_text(nfc(raw.title)) if raw.title else None
    return replace(raw, body=body, title=title or None)


def admit_document(doc: Document, policy: FilterPolicy,
                   lang_id: LanguageIdentifier | None = None) -> Admission:
    if char_count(doc.body) < policy.min_doc_chars:
        return Admission.reject(REASON_TOO_SHORT)
    if policy.lang_gate and lang_id is not None:
        if lang_id.identify(doc.body).lang != doc.lang:
            return Admission.reject(REASON_WRONG_LANGUAGE)
    return Admission.accept()


def admit_sentence(sentence: Sentence, policy: FilterPolicy, lang: str,
                   lang_id: LanguageIdentifier | None = None) -> Admission:
    if char_count(sentence.text) < policy.min_sentence_chars:
        return Admission.reject(REASON_TOO_SHORT)
    if word_count(sentence.text) < policy.min_sentence_words:
        return Admission.reject(REASON_TOO_FEW_WORDS)
    if policy.lang_gate and lang_id is not None:
        if lang_id.identify(sentence.text).lang != lang:
            return Admission.reject(REASON_WRONG_LANGUAGE)
    return Admission.accept()


def default_abbreviations() -> frozenset[str]:
    text = resources.files("bitextkit.data").joinpath("abbreviations_de_lb.txt").read_text("utf-8")
    entries = (line.strip() for line in text.splitlines())
    return frozenset(e.casefold() for e in entries if e and not e.startswith("#"))


_DEFAULT_ABBREVIATIONS = None


def _abbreviations(custom: Iterable[str] | None) -> frozenset[str]:
    global _DEFAULT_ABBREVIATIONS
    if custom is not None:
        return frozenset(a.casefold() for a in custom)
    if _DEFAULT_ABBREVIATIONS is None:
        _DEFAULT_ABBREVIATIONS = default_abbreviations()
    return _DEFAULT_ABBREVIATIONS


def _token_ending_at(text: str, end: int) -> str:
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:end]


def _is_boundary(text: str, punct_start: int, punct_end: int) -> bool:
    # Must be followed by whitespace and then an uppercase letter or an
    # opening quote; otherwise the punctuation is sentence-internal.
    i = punct_end
    if i >= len(text) or not text[i].isspace():
        return False
    while i < len(text) and text[i].isspace():
        i += 1
    if i >= len(text):
        return False
    nxt = text[i]
    return nxt.isupper() or nxt in _OPENING_QUOTES


def _is_protected(text: str, punct_start: int, punct_end: int,
                  abbreviations: frozenset[str]) -> bool:
    if text[punct_start:punct_end] != ".":
        return False
    token = _token_ending_at(text, punct_end)
    if token.casefold() in abbreviations:
        return True
    if len(token) == 2 and token[0].isalpha() and token[0].isupper():
        return True  # personal initial, "J. Muller"
    if _ORDINAL.fullmatch(token):
        return True  # German-style ordinal, "de 3. Mee"
    return False


def split_sentences(doc: Document, abbreviations: Iterable[str] | None = None) -> list[Sentence]:
    """Rule-based splitting on terminal punctuation followed by whitespace and
    an uppercase letter or opening quote, with abbreviation protection.

    Spans are non-overlapping, strictly increasing, and reconstruct the body:
    joining span texts with the inter-span whitespace yields the body exactly.
    """
    text = doc.body
    abbrevs = _abbreviations(abbreviations)
    boundaries: list[int] = []
    i = 0
    while i < len(text):
        if text[i] in _TERMINAL:
            j = i
            while j < len(text) and text[j] in _TERMINAL:
                j += 1
            end = j
            while end < len(text) and text[end] in _CLOSING_QUOTES:
                end += 1  # keep a trailing quote with its sentence
            if _is_boundary(text, i, end) and not _is_protected(text, i, j, abbrevs):
                boundaries.append(end)
            i = end
        else:
            i += 1

    sentences: list[Sentence] = []
    start = 0
    for boundary in boundaries + [len(text)]:
        while start < boundary and text[start].isspace():
            start += 1
        end = boundary
        while end > start and text[end - 1].isspace():
            end -= 1
        if end > start:
            sentences.append(Sentence(
                doc_id=doc.id, index=len(sentences), start=start, end=end,
                text=text[start:end]))
        start = boundary
    return sentences


def reconstruct_body(doc: Document, sentences: Sequence[Sentence]) -> str:
    """Join sentence texts with the original inter-span gaps."""
    parts = []
    cursor = 0
    for s in sentences:
        parts.append(doc.body[cursor:s.start])
        parts.append(s.text)
        cursor = s.end
    parts.append(doc.body[cursor:])
    return "".join(parts)


# --- JSONL persistence -------------------------------------------------------

def _parse_timestamp(value) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return datetime.fromisoformat(str(value).replace("Z", "+00:00")).timestamp()
    except ValueError as exc:
        raise SchemaError(f"bad published_at timestamp {value!r}: {exc}") from exc


def _format_timestamp(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


def document_from_record(record: dict) -> Document:
    try:
        return Document(
            id=str(record["id"]),
            lang=str(record["lang"]),
            published_at=_parse_timestamp(record["published_at"]),
            title=record.get("title") or None,
            body=str(record["body"]),
        )
    except KeyError as exc:
        raise SchemaError(f"document record missing field {exc}") from exc


def read_documents(path) -> list[Document]:
    docs = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        docs.append(document_from_record(record))
    return docs


def corpus_record(doc: Document, sentences: Sequence[Sentence]) -> dict:
    return {
        "id": doc.id,
        "lang": doc.lang,
        "published_at": _format_timestamp(doc.published_at),
        "title": doc.title,
        "body": doc.body,
        "sentences": [{"index": s.index, "start": s.start, "end": s.end} for s in sentences],
    }


def write_corpus(path, items: Sequence[tuple[Document, Sequence[Sentence]]],
                 header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        for doc, sentences in items:
            fh.write(json.dumps(corpus_record(doc, sentences), ensure_ascii=False,
                                sort_keys=True) + "\n")


def read_corpus(path) -> list[tuple[Document, list[Sentence]]]:
    items = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        doc = document_from_record(record)
        sentences = [
            Sentence(doc_id=doc.id, index=s["index"], start=s["start"], end=s["end"],
                     text=doc.body[s["start"]:s["end"]])
            for s in record.get("sentences", [])
        ]
        items.append((doc, sentences))
    return items


@dataclass
class IngestStats:
    documents_in: int = 0
    documents_kept: int = 0
    documents_rejected: int = 0
    documents_empty: int = 0
    sentences_in: int = 0
    sentences_kept: int = 0
    sentences_rejected: int = 0

    def as_dict(self) -> dict:
        return dict(vars(self))


def ingest(raw_docs: Iterable[Document], policy: FilterPolicy,
           lang_id: LanguageIdentifier | None = None,
           abbreviations: Iterable[str] | None = None,
           ) -> tuple[list[tuple[Document, list[Sentence]]], list[tuple[str, str, str]], IngestStats]:
    """Clean, gate and split a raw document stream.

    Returns (kept corpus ordered by (published_at, id), audit rows
    (id, stage, reason), stats). Per-document processing is pure, so the
    result does not depend on input order.
    """
    stats = IngestStats()
    audit: list[tuple[str, str, str]] = []
    kept: list[tuple[Document, list[Sentence]]] = []
    for raw in raw_docs:
        stats.documents_in += 1
        try:
            doc = clean_document(raw)
        except EmptyAfterCleaning:
            stats.documents_empty += 1
            audit.append((raw.id, "document", "empty_after_cleaning"))
            continue
        verdict = admit_document(doc, policy, lang_id)
        if not verdict.accepted:
            stats.documents_rejected += 1
            audit.append((doc.id, "document", verdict.reason))
            continue
        sentences = []
        for s in split_sentences(doc, abbreviations):
            stats.sentences_in += 1
            s_verdict = admit_sentence(s, policy, doc.lang, lang_id)
            if s_verdict.accepted:
                sentences.append(replace(s, index=len(sentences)))
                stats.sentences_kept += 1
            else:
                stats.sentences_rejected += 1
                audit.append((f"{doc.id}#{s.index}", "sentence", s_verdict.reason))
        stats.documents_kept += 1
        kept.append((doc, sentences))
    kept.sort(key=lambda item: (item[0].published_at, item[0].id))
    return kept, audit, stats


def write_audit_log(path, rows: Sequence[tuple[str, str, str]],
                    header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("id\tstage\treason\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")
