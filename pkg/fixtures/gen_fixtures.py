#!/usr/bin/env python3
"""Regenerate the synthetic pipeline fixtures (deterministic).

Builds a trilingual comparable corpus with 50 planted parallel stories of
5 sentences each, the concept map that makes the mock provider embed
translations identically, and labeled datasets for the eval tasks. Output
files are committed; rerun only when the fixture design changes.
"""

import json
from datetime import datetime, timezone
from pathlib import Path

HERE = Path(__file__).parent

N_STORIES = 50
N_SENTS = 5
BASE_TS = datetime(2024, 3, 1, 6, 0, tzinfo=timezone.utc).timestamp()
STORY_SPACING = 30 * 3600.0  # keeps different stories outside the 24 h window
LANG_OFFSET = {"lb": 0.0, "en": 2 * 3600.0, "fr": 5 * 3600.0}

WORDS = {
    "lb": ("Gemeng", "Regierung", "Wieder", "Strooss", "Schoul", "Police", "Festival",
           "Bauer", "Musek", "Buergermeeschter"),
    "en": ("council", "government", "weather", "road", "school", "police", "festival",
           "farmer", "music", "mayor"),
    "fr": ("commune", "gouvernement", "temps", "route", "école", "police", "festival",
           "agriculteur", "musique", "bourgmestre"),
}


def sentence(lang: str, story: int, k: int) -> str:
    noun = WORDS[lang][(story + k) % len(WORDS[lang])]
    return {
        "lb": f"D'{noun} huet haut Detail {story}-{k} matgedeelt an domat Story {story} weidergefouert.",
        "en": f"The {noun} shared detail {story}-{k} today and moved story {story} forward again.",
        "fr": f"La {noun} a partagé le détail {story}-{k} et fait avancer le récit {story} encore.",
    }[lang]


def iso(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


def main() -> None:
    concept_map = {}
    for lang in ("lb", "en", "fr"):
        records = []
        for story in range(N_STORIES):
            sents = [sentence(lang, story, k) for k in range(N_SENTS)]
            body = " ".join(sents)
            concept_map[body] = f"story-{story}"
            for k, text in enumerate(sents):
                concept_map[text] = f"story-{story}-sent-{k}"
            records.append({
                "id": f"{lang}-{story:03d}",
                "lang": lang,
                "published_at": iso(BASE_TS + story * STORY_SPACING + LANG_OFFSET[lang]),
                "title": None,
                "body": body,
            })
        path = HERE / f"articles_{lang}.jsonl"
        path.write_text("".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n"
                                for r in records), encoding="utf-8")
        print(f"wrote {path} ({len(records)} docs)")

    # monolingual corpus for paraphrase mining: first 10 stories in two
    # differently worded versions sharing concept keys
    mono_records = []
    for story in range(10):
        for version in range(2):
            if version == 0:
                sents = [sentence("lb", story, k) for k in range(N_SENTS)]
                doc_id = f"lb-{story:03d}"
                offset = LANG_OFFSET["lb"]
            else:
                sents = [f"Nei Versioun: Detail {story}-{k} gouf haut nach "
                         f"eng Kéier aus Story {story} gemellt."
                         for k in range(N_SENTS)]
                doc_id = f"lb-9{story:02d}"
                offset = LANG_OFFSET["lb"] + 3600.0
            body = " ".join(sents)
            concept_map[body] = f"story-{story}"
            for k, text in enumerate(sents):
                concept_map[text] = f"story-{story}-sent-{k}"
            mono_records.append({
                "id": doc_id, "lang": "lb",
                "published_at": iso(BASE_TS + story * STORY_SPACING + offset),
                "title": None, "body": body,
            })
    path = HERE / "articles_lb_mono.jsonl"
    path.write_text("".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n"
                            for r in mono_records), encoding="utf-8")
    print(f"wrote {path} ({len(mono_records)} docs)")

    (HERE / "concept_map.json").write_text(
        json.dumps(concept_map, ensure_ascii=False, sort_keys=True, indent=0) + "\n",
        encoding="utf-8")
    print(f"wrote concept_map.json ({len(concept_map)} entries)")

    labels = ["Technologie", "Reesen", "Politik", "Gesondheet", "Ennerhalung",
              "Geographie", "Sport"]
    for split, per_label in (("train", 12), ("dev", 4), ("test", 6)):
        rows = []
        for li, label in enumerate(labels):
            for j in range(per_label):
                rows.append((f"Fixture doc {split}-{li}-{j} about topic {li}.", label))
        path = HERE / f"zsc_{split}.tsv"
        path.write_text("".join(f"{t}\t{l}\n" for t, l in rows), encoding="utf-8")
        print(f"wrote {path} ({len(rows)} rows)")
    # fold zero-shot material into the same concept map so one mock config
    # drives the whole fixture pipeline
    for split, per_label in (("train", 12), ("dev", 4), ("test", 6)):
        for li, label in enumerate(labels):
            for j in range(per_label):
                concept_map[f"Fixture doc {split}-{li}-{j} about topic {li}."] = f"label-{label}"
    for label in labels:
        concept_map[label] = f"label-{label}"
    for template in ("An dësem Beispill geet et em [LABEL].",
                     "D'Thema vun dësem Text ass [LABEL].",
                     "Hei gëtt iwwer [LABEL] geschwat.",
                     "Dëst Dokument beschäftegt sech mat [LABEL]."):
        for label in labels:
            concept_map[template.replace("[LABEL]", label)] = f"label-{label}"
    (HERE / "concept_map.json").write_text(
        json.dumps(concept_map, ensure_ascii=False, sort_keys=True, indent=0) + "\n",
        encoding="utf-8")
    print(f"rewrote concept_map.json ({len(concept_map)} entries)")


if __name__ == "__main__":
    main()
