from pathlib import Path

import pytest

from bitextkit.errors import EmptyText, NoProfiles
from bitextkit.providers import LanguageIdentifier, build_profile, identify_language

DATA = Path(__file__).parent / "data"
LANGS = ("lb", "en", "fr")


@pytest.fixture(scope="module")
def identifier():
    seeds = {lang: (DATA / f"seed_{lang}.txt").read_text(encoding="utf-8") for lang in LANGS}
    return LanguageIdentifier.from_seed_texts(seeds)


def test_pangram_is_english(identifier):
    assert identifier.identify("the quick brown fox jumps over the lazy dog").lang == "en"


def test_self_classification(identifier):
    for lang in LANGS:
        seed = (DATA / f"seed_{lang}.txt").read_text(encoding="utf-8")
        assert identifier.identify(seed).lang == lang


def test_holdout_accuracy_at_least_95_percent(identifier):
    total = correct = 0
    for lang in LANGS:
        for line in (DATA / f"holdout_{lang}.txt").read_text(encoding="utf-8").splitlines():
            if len(line) < 40:
                continue
            total += 1
            correct += identifier.identify(line).lang == lang
    assert total >= 30
    assert correct / total >= 0.95


def test_short_input_has_low_confidence(identifier):
    assert identifier.identify("abc").confidence < 0.2


def test_confidence_in_unit_interval(identifier):
    for text in ("hello there my friend", "weider", "zz", "le chat noir dort"):
        pred = identifier.identify(text)
        assert 0.0 <= pred.confidence <= 1.0


def test_deterministic(identifier):
    a = identifier.identify("the committee will publish the findings")
    b = identifier.identify("the committee will publish the findings")
    assert a == b


def test_empty_text_rejected(identifier):
    with pytest.raises(EmptyText):
        identifier.identify("   ")


def test_too_few_profiles():
    with pytest.raises(NoProfiles):
        LanguageIdentifier([build_profile("en", "some english text here")])


def test_identify_language_wrapper(identifier):
    profiles = identifier.profiles
    pred = identify_language("the weather is nice today everywhere", profiles)
    assert pred.lang == "en"


def test_empty_seed_rejected():
    with pytest.raises(EmptyText):
        build_profile("xx", "   ")
