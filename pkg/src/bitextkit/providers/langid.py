"""Character-trigram language identification.

Profiles rank the most frequent character trigrams of a seed text; a query
is classified by the smallest out-of-place rank distance (trigrams missing
from a profile pay the maximum penalty). Confidence is the normalized
margin between the best and second-best profile distances.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..errors import EmptyText, NoProfiles

PROFILE_SIZE = 300

_LETTER_RUNS = re.compile(r"[^\W\d_]+", re.UNICODE)


@dataclass(frozen=True)
class LangPrediction:
    lang: str
    confidence: float


def _words(text: str) -> list[str]:
    return _LETTER_RUNS.findall(unicodedata.normalize("NFC", text).casefold())


def _trigram_counts(text: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for word in _words(text):
        padded = f" {word} "
        for i in range(len(padded) - 2):
            tri = padded[i:i + 3]
            counts[tri] = counts.get(tri, 0) + 1
    return counts


def rank_trigrams(text: str, profile_size: int = PROFILE_SIZE) -> dict[str, int]:
    """Trigram -> rank (0 = most frequent); ties resolved lexicographically."""
    counts = _trigram_counts(text)
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:profile_size]
    return {tri: rank for rank, (tri, _) in enumerate(ordered)}


@dataclass(frozen=True)
class TrigramProfile:
    lang: str
    ranks: Mapping[str, int]
    profile_size: int = PROFILE_SIZE


def build_profile(lang: str, seed_text: str, profile_size: int = PROFILE_SIZE) -> TrigramProfile:
    if not seed_text.strip():
        raise EmptyText(f"empty seed text for language {lang!r}")
    return TrigramProfile(lang, rank_trigrams(seed_text, profile_size), profile_size)


def _out_of_place(query_ranks: Mapping[str, int], profile: TrigramProfile) -> int:
    penalty = profile.profile_size
    dist = 0
    for tri, rank in query_ranks.items():
        model_rank = profile.ranks.get(tri)
        dist += penalty if model_rank is None else abs(rank - model_rank)
    return dist


class LanguageIdentifier:
    """Holds one profile per language and classifies query texts."""

    def __init__(self, profiles: Iterable[TrigramProfile]):
        self.profiles = tuple(profiles)
        if len(self.profiles) < 2:
            raise NoProfiles("need at least two language profiles")
        if len({p.lang for p in self.profiles}) != len(self.profiles):
            raise ValueError("duplicate language in profile set")

    @classmethod
    def from_seed_texts(cls, seeds: Mapping[str, str],
                        profile_size: int = PROFILE_SIZE) -> "LanguageIdentifier":
        return cls(build_profile(lang, text, profile_size) for lang, text in seeds.items())

    def identify(self, text: str) -> LangPrediction:
        if not text.strip():
            raise EmptyText("cannot identify the language of an empty text")
        query = rank_trigrams(text, max(p.profile_size for p in self.profiles))
        scored = sorted(
            ((_out_of_place(query, p), p.lang) for p in self.profiles),
            key=lambda pair: (pair[0], pair[1]),
        )
        best_dist, best_lang = scored[0]
        second_dist = scored[1][0]
        confidence = 0.0 if second_dist <= 0 else (second_dist - best_dist) / second_dist
        return LangPrediction(lang=best_lang, confidence=confidence)


def identify_language(text: str, profiles: Sequence[TrigramProfile] | LanguageIdentifier) -> LangPrediction:
    ident = profiles if isinstance(profiles, LanguageIdentifier) else LanguageIdentifier(profiles)
    return ident.identify(text)
