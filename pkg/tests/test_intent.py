import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from robodialog.intent import (
    RuleConfigError,
    RuleSet,
    classify,
    corpus_accuracy,
    default_ruleset,
    load_corpus,
    load_ruleset,
    normalize,
    ruleset_from_dict,
)
from robodialog.levels import Intent

RULES = default_ruleset()


@pytest.mark.parametrize("text, tokens", [
    ("Why are you NOT able...?", ["why", "are", "you", "not", "able"]),
    ("  continue ", ["continue"]),
    ("What is the error?", ["what", "is", "the", "error"]),
    ("", []),
    ("?!...", []),
    ("why,what happened", ["why", "what", "happened"]),
])
def test_normalize(text, tokens):
    assert normalize(text) == tokens


@given(st.text(max_size=80))
def test_normalize_idempotent_on_its_own_join(text):
    tokens = normalize(text)
    assert normalize(" ".join(tokens)) == tokens


@pytest.mark.parametrize("text, intent", [
    ("What is the mistake with this", Intent.WHAT),
    ("Why are you not able to reach the cube", Intent.WHY),
    ("what is the error", Intent.WHAT),
    ("why has the error occurred", Intent.WHY),
    ("continue", Intent.CONTINUE),
    ("hello robot nice weather", Intent.OUT_OF_SCOPE),
    ("", Intent.OUT_OF_SCOPE),
    ("why, what happened", Intent.WHY),  # Why outranks What
    ("What is the reason for this error", Intent.WHY),
    ("tell me the error", Intent.WHAT),
    ("please proceed", Intent.CONTINUE),
])
def test_classify_defaults(text, intent):
    assert classify(text, RULES) is intent


@given(st.sampled_from([
    "What is the mistake with this",
    "Why are you not able to reach the cube",
    "continue",
    "hello robot nice weather",
]), st.sampled_from(["", "?", "!!", "?!", "..."]))
def test_classify_invariant_under_case_and_punctuation(text, suffix):
    base = classify(text, RULES)
    assert classify(text.upper() + suffix, RULES) is base
    assert classify("  " + text.lower() + suffix + " ", RULES) is base


@given(st.text(max_size=120))
def test_classify_total(text):
    assert classify(text, RULES) in Intent


def test_multi_token_stem_requires_contiguity():
    assert classify("which error is this", RULES) is Intent.WHAT
    # "which ... error" split apart matches no stem
    assert classify("which of these is an error", RULES) is Intent.OUT_OF_SCOPE


def test_corpus_has_24_labeled_lines_with_the_four_quoted_utterances():
    corpus = load_corpus()
    assert len(corpus) == 24
    texts = [text for _, text in corpus]
    for required in [
        "What is the mistake with this",
        "Why are you not able to place the cube",
        "What is the error",
        "Why are you not able to reach the cube",
    ]:
        assert required in texts


def test_corpus_accuracy_at_least_95_percent():
    corpus = load_corpus()
    assert corpus_accuracy(RULES, corpus) >= 0.95


def test_the_four_quoted_utterances_classify_correctly():
    expected = {
        "What is the mistake with this": Intent.WHAT,
        "Why are you not able to place the cube": Intent.WHY,
        "What is the error": Intent.WHAT,
        "Why are you not able to reach the cube": Intent.WHY,
    }
    for text, intent in expected.items():
        assert classify(text, RULES) is intent


def test_ruleset_requires_what_and_why_patterns():
    with pytest.raises(RuleConfigError):
        RuleSet(what_patterns=(), why_patterns=("why",), continue_patterns=())
    with pytest.raises(RuleConfigError):
        ruleset_from_dict({"why": ["why"]})


def test_ruleset_loads_from_json(tmp_path):
    path = tmp_path / "rules.json"
    path.write_text(json.dumps({
        "what": ["what", "which problem"],
        "why": ["why"],
        "continue": ["carry on"],
    }), encoding="utf-8")
    rules = load_ruleset(path)
    assert classify("which problem is that", rules) is Intent.WHAT
    assert classify("carry on please", rules) is Intent.CONTINUE
    # round trip
    assert ruleset_from_dict(rules.to_dict()) == rules
