"""Rule-based classification of user utterances into What / Why / Continue / OutOfScope.

Stands in for a trained NLU pipeline: deterministic normalization plus
keyword/stem matching, so the same text always maps to the same intent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .levels import Intent

_CORPUS_PATH = Path(__file__).parent / "data" / "intent_corpus.tsv"


def normalize(text: str) -> list[str]:
    """Lowercase, replace punctuation with spaces, collapse whitespace, split.

    Punctuation becomes a space (not nothing) so "why,what" still splits into
    two tokens and "what's" still yields a "what" token.
    """
    cleaned = "".join(ch if ch.isalnum() else " " for ch in text.lower())
    return cleaned.split()


@dataclass(frozen=True)
class RuleSet:
    """Ordered token-stem patterns per intent; Why outranks What outranks Continue."""

    what_patterns: tuple[str, ...]
    why_patterns: tuple[str, ...]
    continue_patterns: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.what_patterns or not self.why_patterns:
            raise RuleConfigError("what and why pattern lists must be non-empty")

    def to_dict(self) -> dict:
        return {
            "what": list(self.what_patterns),
            "why": list(self.why_patterns),
            "continue": list(self.continue_patterns),
        }


class RuleConfigError(ValueError):
    """Raised for malformed rule-set configuration data."""


def _pattern_matches(pattern: str, tokens: Sequence[str]) -> bool:
    """True if the pattern's tokens occur contiguously anywhere in `tokens`."""
    needle = normalize(pattern)
    if not needle:
        return False
    span = len(needle)
    return any(tokens[i : i + span] == needle for i in range(len(tokens) - span + 1))


def classify(text: str, rules: RuleSet) -> Intent:
    """Map free text to an intent; empty or unmatched input is OutOfScope."""
    tokens = normalize(text)
    if not tokens:
        return Intent.OUT_OF_SCOPE
    if any(_pattern_matches(p, tokens) for p in rules.why_patterns):
        return Intent.WHY
    if any(_pattern_matches(p, tokens) for p in rules.what_patterns):
        return Intent.WHAT
    if any(_pattern_matches(p, tokens) for p in rules.continue_patterns):
        return Intent.CONTINUE
    return Intent.OUT_OF_SCOPE


def default_ruleset() -> RuleSet:
    """Built-in patterns covering the bundled paraphrase corpus."""
    return RuleSet(
        what_patterns=(
            "what",
            "which error",
            "tell me the error",
            "what happened",
            "what is wrong",
            "what is the mistake",
        ),
        why_patterns=(
            "why",
            "reason",
            "how come",
            "because of what",
            "explain why",
        ),
        continue_patterns=(
            "continue",
            "proceed",
            "go on",
            "resume",
            "carry on",
            "keep going",
        ),
    )


def ruleset_from_dict(data: Mapping) -> RuleSet:
    """Build a rule set from a {what: [...], why: [...], continue: [...]} document."""
    try:
        return RuleSet(
            what_patterns=tuple(str(p) for p in data["what"]),
            why_patterns=tuple(str(p) for p in data["why"]),
            continue_patterns=tuple(str(p) for p in data.get("continue", ())),
        )
    except KeyError as exc:
        raise RuleConfigError(f"missing rule list: {exc}") from exc


def load_ruleset(path: str | Path) -> RuleSet:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise RuleConfigError("rule config must be an object")
    return ruleset_from_dict(data)


def load_corpus(path: str | Path = _CORPUS_PATH) -> list[tuple[Intent, str]]:
    """Read the labeled `<label>\\t<utterance>` corpus bundled with the package."""
    pairs = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        label, _, utterance = line.partition("\t")
        if not utterance:
            raise RuleConfigError(f"corpus line {line_no}: expected <label><TAB><utterance>")
        pairs.append((Intent(label), utterance))
    return pairs


def corpus_accuracy(rules: RuleSet, corpus: Sequence[tuple[Intent, str]]) -> float:
    """Fraction of corpus utterances the rule set classifies to their label."""
    if not corpus:
        return 0.0
    hits = sum(1 for label, text in corpus if classify(text, rules) is label)
    return hits / len(corpus)
