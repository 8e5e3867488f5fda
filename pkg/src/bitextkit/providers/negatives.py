"""Adversarial-negative text generation.

The default offline implementation applies a deterministic meaning-flip
transform to the paraphrase and reports which rule fired. Rules, in
precedence order:

  subject_object_swap  "X <verb> ... géint/against/contre Y." -> swap X and Y
  negation_removed     drop the first negation word
  numeral_perturbed    change one numeral token, all else byte-identical
  negation_inserted    add a negation adverb after a known copula/auxiliary

A remote generator can be plugged in instead; it receives a prompt built
from the anchor/paraphrase pair and must return the negative text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Protocol

from ..errors import EmptyText, NoRuleApplicable

# Verbs that take a "géint"-style opponent phrase; keyed for lb/en/fr news text.
_SWAP_PATTERN = re.compile(
    r"^(?P<subj>\S+)\s+(?P<verb>gewënnt|verléiert|wins|loses|beats|gagne|perd)\s+"
    r"(?P<mid>.*?)(?P<prep>géint|against|contre)\s+(?P<obj>\S+?)(?P<tail>[.!?]?)$"
)

_NEGATION_WORDS = (
    "net", "kee", "keng", "keen", "not", "never", "no", "pas", "jamais", "aucun",
)

# Insertion sites: common copulas/auxiliaries -> negation adverb of that language.
_COPULA_NEGATION = (
    ("ass", "net"), ("sinn", "net"), ("war", "net"), ("gëtt", "net"), ("huet", "net"),
    ("is", "not"), ("are", "not"), ("was", "not"), ("were", "not"), ("has", "not"),
    ("est", "pas"), ("sont", "pas"), ("était", "pas"), ("a", "pas"),
)

_NUMERAL = re.compile(r"\d[\d.,:-]*")


def _swap_subject_object(text: str) -> str | None:
    m = _SWAP_PATTERN.match(text.strip())
    if not m:
        return None
    return (f"{m.group('obj')} {m.group('verb')} {m.group('mid')}{m.group('prep')} "
            f"{m.group('subj')}{m.group('tail')}")


def _remove_negation(text: str) -> str | None:
    tokens = text.split(" ")
    for i, tok in enumerate(tokens):
        if tok.lower().strip(".,!?;:") in _NEGATION_WORDS:
            return " ".join(tokens[:i] + tokens[i + 1:])
    return None


def _perturb_numeral(text: str) -> str | None:
    m = _NUMERAL.search(text)
    if not m:
        return None
    numeral = m.group(0)
    digits = [i for i, ch in enumerate(numeral) if ch.isdigit()]
    i = digits[0]
    bumped = str((int(numeral[i]) + 1) % 10)
    if bumped == "0" and len(digits) > 1 and i == 0:
        bumped = "1"  # keep a leading digit nonzero for multi-digit numerals
    replaced = numeral[:i] + bumped + numeral[i + 1:]
    return text[:m.start()] + replaced + text[m.end():]


def _insert_negation(text: str) -> str | None:
    tokens = text.split(" ")
    for i, tok in enumerate(tokens):
        bare = tok.lower().strip(".,!?;:")
        for copula, adverb in _COPULA_NEGATION:
            if bare == copula:
                return " ".join(tokens[:i + 1] + [adverb] + tokens[i + 1:])
    return None


_RULES: tuple[tuple[str, Callable[[str], str | None]], ...] = (
    ("subject_object_swap", _swap_subject_object),
    ("negation_removed", _remove_negation),
    ("numeral_perturbed", _perturb_numeral),
    ("negation_inserted", _insert_negation),
)


@dataclass(frozen=True)
class FlipResult:
    text: str
    rule: str


def meaning_flip(text: str) -> FlipResult:
    """Apply the first applicable flip rule; NoRuleApplicable if none fires."""
    for rule, fn in _RULES:
        flipped = fn(text)
        if flipped is not None and flipped != text:
            return FlipResult(text=flipped, rule=rule)
    raise NoRuleApplicable(f"no meaning-flip rule applies to: {text[:80]!r}")


class GenerationProvider(Protocol):
    def generate(self, anchor: str, paraphrase: str) -> str: ...


class RuleBasedNegativeGenerator:
    """Offline generator: flips the paraphrase's meaning deterministically.

    `last_rule` records which rule fired on the most recent call.
    """

    name = "rules"

    def __init__(self):
        self.last_rule: str | None = None

    def generate(self, anchor: str, paraphrase: str) -> str:
        if not anchor.strip() or not paraphrase.strip():
            raise EmptyText("anchor and paraphrase must be nonempty")
        result = meaning_flip(paraphrase)
        self.last_rule = result.rule
        return result.text


PROMPT_TEMPLATE = (
    "Rewrite the following sentence so it is NOT a paraphrase of the anchor, "
    "changing as few words as possible.\nAnchor: {anchor}\nSentence: {paraphrase}\n"
)


class RemoteNegativeGenerator:
    """Sends the prompt template through a caller-supplied completion function."""

    name = "remote"

    def __init__(self, complete: Callable[[str], str]):
        self._complete = complete
        self.last_rule: str | None = None

    def generate(self, anchor: str, paraphrase: str) -> str:
        if not anchor.strip() or not paraphrase.strip():
            raise EmptyText("anchor and paraphrase must be nonempty")
        out = self._complete(PROMPT_TEMPLATE.format(anchor=anchor, paraphrase=paraphrase))
        self.last_rule = "remote"
        return out.strip()


def generate_adversarial(anchor: str, paraphrase: str,
                         provider: GenerationProvider | None = None) -> str:
    """Candidate non-paraphrase for (anchor, paraphrase); offline rules by default."""
    gen = provider if provider is not None else RuleBasedNegativeGenerator()
    return gen.generate(anchor, paraphrase)
