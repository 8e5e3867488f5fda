from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitextkit.corpus import (Document, FilterPolicy, Sentence, admit_document,
                              admit_sentence, clean_document, clean_text, ingest,
                              read_corpus, read_documents, reconstruct_body,
                              split_sentences, write_audit_log, write_corpus)
from bitextkit.errors import EmptyAfterCleaning, SchemaError
from bitextkit.providers import LanguageIdentifier

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def lang_id():
    seeds = {lang: (DATA / f"seed_{lang}.txt").read_text(encoding="utf-8")
             for lang in ("lb", "en", "fr")}
    return LanguageIdentifier.from_seed_texts(seeds)


def doc(body, doc_id="d1", lang="lb", ts=0.0, title=None):
    return Document(id=doc_id, lang=lang, published_at=ts, title=title, body=body)


class TestClean:
    def test_tag_stripping(self):
        assert clean_text('Text <a href="u">link</a> more') == "Text link more"

    def test_url_removed(self):
        assert clean_text("See https://example.com/x?a=1 now") == "See now"

    def test_bracketed_metadata_removed(self):
        assert clean_text("Before [Photo: AFP] after [[nested]] end") == "Before after end"

    def test_whitespace_collapsed(self):
        assert clean_text("a\n\n b\t\tc  ") == "a b c"

    def test_url_only_body_is_empty(self):
        with pytest.raises(EmptyAfterCleaning):
            clean_document(doc("https://example.com/only"))

    def test_idempotence_sweep(self):
        rng = np.random.default_rng(99)
        fragments = ["word", "<b>bold</b>", "https://x.test/path", "[meta block]",
                     "text<br/>", "  ", "\n", "[[double]]", "<a href='u'>inner</a>",
                     "www.site.test/page,", "plain tail"]
        for _ in range(1000):
            n = rng.integers(1, 12)
            body = " ".join(fragments[i] for i in rng.integers(0, len(fragments), n))
            once = clean_text(body)
            assert clean_text(once) == once

    @given(st.text(max_size=200))
    @settings(max_examples=300, deadline=None)
    def test_idempotence_on_arbitrary_text(self, body):
        once = clean_text(body)
        assert clean_text(once) == once


class TestAdmitDocument:
    def test_99_chars_too_short(self):
        verdict = admit_document(doc("x" * 99), FilterPolicy(lang_gate=False))
        assert not verdict.accepted and verdict.reason == "too_short"

    def test_100_chars_accepted(self):
        verdict = admit_document(doc("x" * 100), FilterPolicy(lang_gate=False))
        assert verdict.accepted

    def test_wrong_language_rejected(self, lang_id):
        english = ("The council met on Tuesday evening to discuss the budget for the "
                   "coming year and the renovation of the old school building nearby.")
        verdict = admit_document(doc(english, lang="lb"), FilterPolicy(), lang_id)
        assert not verdict.accepted and verdict.reason == "wrong_language"

    def test_correct_language_accepted(self, lang_id):
        lb = ("De Gemengerot ass zesummekomm fir iwwer den neie Budget vum nächste "
              "Joer an d'Renovatioun vun der aler Schoul nieft der Kierch ze schwätzen.")
        assert admit_document(doc(lb, lang="lb"), FilterPolicy(), lang_id).accepted


class TestSplit:
    def test_hand_segmented_fixture_exact(self):
        blocks, current = [], []
        for line in (DATA / "segmentation_fixture.txt").read_text("utf-8").splitlines():
            if line.startswith("#"):
                continue
            if not line.strip():
                if current:
                    blocks.append(current)
                    current = []
            else:
                current.append(line)
        if current:
            blocks.append(current)
        total = 0
        for i, expected in enumerate(blocks):
            d = doc(" ".join(expected), doc_id=f"b{i}")
            got = [s.text for s in split_sentences(d)]
            assert got == expected, f"block {i}"
            total += len(expected)
        assert total >= 50

    def test_single_sentence(self):
        d = doc("One sentence only")
        sents = split_sentences(d)
        assert [s.text for s in sents] == ["One sentence only"]
        assert (sents[0].start, sents[0].end) == (0, len(d.body))

    def test_terminal_punctuation(self):
        assert [s.text for s in split_sentences(doc("A! B? C."))] == ["A!", "B?", "C."]

    def test_abbreviation_protected(self):
        got = [s.text for s in split_sentences(doc("Dr. Muller koum. Hien ass frou."))]
        assert got == ["Dr. Muller koum.", "Hien ass frou."]

    def test_spans_reconstruct_body(self):
        bodies = [
            "Eng Fro? Jo! Alles kloer.",
            "Den 3. Mee ass e Feierdeg. D'Leit si frou.",
            "One sentence",
            'Si sot: „Mir feieren haut." Duerno koum Musek.',
        ]
        for body in bodies:
            self._assert_span_invariants(doc(body))

    @staticmethod
    def _assert_span_invariants(d):
        sents = split_sentences(d)
        assert reconstruct_body(d, sents) == d.body
        spans = [(s.start, s.end) for s in sents]
        assert spans == sorted(spans)
        assert all(e1 <= s2 for (_, e1), (s2, _) in zip(spans, spans[1:]))
        assert all(d.body[s.start:s.end] == s.text for s in sents)

    @given(st.text(alphabet="aBcD .!?…\"'„“", min_size=0, max_size=120))
    @settings(max_examples=300, deadline=None)
    def test_span_invariants_on_arbitrary_punctuation_soup(self, body):
        cleaned = clean_text(body)
        if not cleaned:
            return
        self._assert_span_invariants(doc(cleaned))


class TestAdmitSentence:
    def sentence(self, text):
        return Sentence(doc_id="d", index=0, start=0, end=len(text), text=text)

    def test_too_short(self):
        verdict = admit_sentence(self.sentence("Jo."), FilterPolicy(lang_gate=False), "lb")
        assert not verdict.accepted and verdict.reason == "too_short"

    def test_boundary_accepted(self):
        verdict = admit_sentence(self.sentence("Ech si frou"), FilterPolicy(lang_gate=False), "lb")
        assert verdict.accepted  # 11 chars, 3 words: both minima inclusive

    def test_too_few_words(self):
        verdict = admit_sentence(self.sentence("Handelskammer."), FilterPolicy(lang_gate=False), "lb")
        assert not verdict.accepted and verdict.reason == "too_few_words"

    def test_wrong_language(self, lang_id):
        verdict = admit_sentence(
            self.sentence("Bonjour tout le monde ici présent aujourd'hui"),
            FilterPolicy(), "lb", lang_id)
        assert not verdict.accepted and verdict.reason == "wrong_language"


class TestIngest:
    def _docs(self):
        long_lb = ("D'Gemeng huet haut matgedeelt, datt d'Aarbechten un der Strooss "
                   "nächst Woch ufänken. D'Leit solle wann ech gelift den Emwee huelen. "
                   "Den Dossier gëtt elo am Detail gepréift.")
        return [
            doc(long_lb, doc_id="keep", ts=100.0),
            doc("Ze kuerz.", doc_id="short", ts=50.0),
            doc("https://only.example.com", doc_id="empty", ts=10.0),
        ]

    def test_counts_and_audit(self):
        kept, audit, stats = ingest(self._docs(), FilterPolicy(lang_gate=False))
        assert stats.documents_in == 3
        assert stats.documents_kept == 1
        assert stats.documents_rejected == 1
        assert stats.documents_empty == 1
        assert ("short", "document", "too_short") in audit
        assert ("empty", "document", "empty_after_cleaning") in audit
        assert kept[0][0].id == "keep" and len(kept[0][1]) == 3

    def test_order_independence(self):
        docs = self._docs()
        kept_a, _, _ = ingest(docs, FilterPolicy(lang_gate=False))
        kept_b, _, _ = ingest(list(reversed(docs)), FilterPolicy(lang_gate=False))
        assert [d.id for d, _ in kept_a] == [d.id for d, _ in kept_b]
        assert [[s.text for s in sents] for _, sents in kept_a] == \
               [[s.text for s in sents] for _, sents in kept_b]

    def test_output_sorted_by_time_then_id(self):
        a = doc("Munnerefer Musek spillt muer Owend um Maart. Jidderee ka mat sangen. "
                "De Concert dauert zwou Stonnen an en Optrëtt kascht näischt extra.",
                doc_id="b", ts=200.0)
        b = doc(a.body, doc_id="a", ts=200.0)
        c = doc(a.body, doc_id="c", ts=100.0)
        kept, _, _ = ingest([a, b, c], FilterPolicy(lang_gate=False))
        assert [d.id for d, _ in kept] == ["c", "a", "b"]


class TestPersistence:
    def test_jsonl_roundtrip(self, tmp_path):
        d = doc("Eng kuerz Noriicht fir haut. Muer kënnt méi Detail.", ts=1_700_000_000.0)
        sents = split_sentences(d)
        path = tmp_path / "corpus.jsonl"
        write_corpus(path, [(d, sents)], header_comment="config_hash=x")
        loaded = read_corpus(path)
        assert len(loaded) == 1
        got_doc, got_sents = loaded[0]
        assert got_doc == d
        assert got_sents == sents

    def test_read_documents_schema(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text('{"id": "a", "lang": "lb", "published_at": '
                        '"2024-01-01T00:00:00Z", "title": null, "body": "Text hei."}\n',
                        encoding="utf-8")
        docs = read_documents(path)
        assert docs[0].published_at == 1704067200.0

    def test_bad_timestamp_raises(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text('{"id": "a", "lang": "lb", "published_at": "not a date", '
                        '"body": "Text."}\n', encoding="utf-8")
        with pytest.raises(SchemaError):
            read_documents(path)

    def test_missing_field_raises(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text('{"id": "a"}\n', encoding="utf-8")
        with pytest.raises(SchemaError):
            read_documents(path)

    def test_audit_log_format(self, tmp_path):
        path = tmp_path / "audit.tsv"
        write_audit_log(path, [("d1", "document", "too_short")], header_comment="h")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# h"
        assert lines[1] == "id\tstage\treason"
        assert lines[2] == "d1\tdocument\ttoo_short"
