import pytest

from bitextkit.errors import EmptyText, NoRuleApplicable
from bitextkit.providers import (RemoteNegativeGenerator, RuleBasedNegativeGenerator,
                                 generate_adversarial, meaning_flip)


def test_score_sentence_swaps_teams():
    result = meaning_flip("Mexiko gewënnt 3-1 géint Kroatien.")
    assert result.text == "Kroatien gewënnt 3-1 géint Mexiko."
    assert result.rule == "subject_object_swap"


def test_english_swap():
    result = meaning_flip("Arsenal beats 2-0 against Chelsea.")
    assert result.text == "Chelsea beats 2-0 against Arsenal."


def test_numeral_perturbed_single_token():
    text = "Déi Petitioun ass vun 336.000 Persounen aus 112 Länner ënnerschriwwe ginn."
    result = meaning_flip(text)
    assert result.rule == "numeral_perturbed"
    changed = [(a, b) for a, b in zip(text.split(" "), result.text.split(" ")) if a != b]
    assert changed == [("336.000", "436.000")]


def test_negation_removed_before_numeral():
    result = meaning_flip("Hien ass net midd ginn, och no 3 Stonnen.")
    assert result.rule == "negation_removed"
    assert "net" not in result.text.split(" ")


def test_negation_inserted_as_last_resort():
    result = meaning_flip("D'Wieder ass ganz schéin haut bei eis.")
    assert result.rule == "negation_inserted"
    assert " net " in result.text


def test_no_rule_applicable():
    with pytest.raises(NoRuleApplicable):
        meaning_flip("Moien alleguer zesummen")


def test_generator_records_rule():
    gen = RuleBasedNegativeGenerator()
    out = gen.generate("Anchor text here", "Kroatien verléiert 1-3 géint Mexiko.")
    assert out == "Mexiko verléiert 1-3 géint Kroatien."
    assert gen.last_rule == "subject_object_swap"


def test_generator_rejects_empty_inputs():
    gen = RuleBasedNegativeGenerator()
    with pytest.raises(EmptyText):
        gen.generate("", "something")


def test_remote_generator_uses_prompt():
    prompts = []

    def complete(prompt):
        prompts.append(prompt)
        return "  negated output  "

    gen = RemoteNegativeGenerator(complete)
    out = gen.generate("anchor sentence", "paraphrase sentence")
    assert out == "negated output"
    assert "anchor sentence" in prompts[0] and "paraphrase sentence" in prompts[0]


def test_module_level_op_defaults_to_rules():
    out = generate_adversarial("anchor", "Mexiko gewënnt 3-1 géint Kroatien.")
    assert out == "Kroatien gewënnt 3-1 géint Mexiko."


def test_deterministic():
    a = meaning_flip("De Budget klëmmt op 250 Milliounen Euro dëst Joer.")
    b = meaning_flip("De Budget klëmmt op 250 Milliounen Euro dëst Joer.")
    assert a == b
