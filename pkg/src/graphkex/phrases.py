"""Keyphrase assembly from predicted keywords, ranking, and stemming.

Phrases are maximal runs of positively-predicted words in the raw token
stream: punctuation, stopwords (never predicted, since they are never
candidates), and negatively-predicted words all break a run. Runs are
deduplicated and any phrase contained verbatim inside a longer kept phrase
is dropped. Ranking uses the mean member score by default.

The classic suffix-stripping stemmer (steps 1a through 5b) is included for
evaluation-time matching of system phrases against gold phrases.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Document, phrase_segments
from .models import Prediction

PHRASE_SCORING = ("mean", "sum", "max")


@dataclass(frozen=True)
class Keyphrase:
    words: tuple[str, ...]
    score: float
    first_position: int


# ---------------------------------------------------------------------------
# suffix-stripping stemmer

_VOWELS = frozenset("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-to-consonant transitions: m in [C](VC)^m[V]."""
    m = 0
    for i in range(1, len(stem)):
        if _is_consonant(stem, i) and not _is_consonant(stem, i - 1):
            m += 1
    return m


def _contains_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    return (
        len(word) >= 3
        and _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            return word[:-1]
        return word
    stripped = None
    if word.endswith("ed") and _contains_vowel(word[:-2]):
        stripped = word[:-2]
    elif word.endswith("ing") and _contains_vowel(word[:-3]):
        stripped = word[:-3]
    if stripped is None:
        return word
    if stripped.endswith(("at", "bl", "iz")):
        return stripped + "e"
    if _ends_double_consonant(stripped) and stripped[-1] not in "lsz":
        return stripped[:-1]
    if _measure(stripped) == 1 and _ends_cvc(stripped):
        return stripped + "e"
    return stripped


def _step1c(word: str) -> str:
    if word.endswith("y") and _contains_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


# (suffix, replacement) pairs; within a step the longest matching suffix is
# the only one considered, and its m-condition decides whether it applies.
_STEP2_RULES = (
    ("ational", "ate"), ("ization", "ize"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("biliti", "ble"), ("tional", "tion"), ("entli", "ent"),
    ("ousli", "ous"), ("ation", "ate"), ("alism", "al"), ("aliti", "al"),
    ("iviti", "ive"), ("enci", "ence"), ("anci", "ance"), ("izer", "ize"),
    ("abli", "able"), ("alli", "al"), ("ator", "ate"), ("eli", "e"),
)

_STEP3_RULES = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ness", ""), ("ful", ""),
)

_STEP4_SUFFIXES = (
    "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ion",
    "ism", "ate", "iti", "ous", "ive", "ize", "ou", "al", "er", "ic",
)


def _apply_rules(word: str, rules, min_measure: int) -> str:
    for suffix, replacement in rules:
        if word.endswith(suffix):
            stem = word[: -len(suffix)]
            if _measure(stem) > min_measure - 1:
                return stem + replacement
            return word
    return word


def _step4(word: str) -> str:
    for suffix in _STEP4_SUFFIXES:
        if word.endswith(suffix):
            stem = word[: -len(suffix)]
            if _measure(stem) <= 1:
                return word
            if suffix == "ion" and not stem.endswith(("s", "t")):
                return word
            return stem
    return word


def _step5a(word: str) -> str:
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            return stem
    return word


def _step5b(word: str) -> str:
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        return word[:-1]
    return word


def porter_stem(word: str) -> str:
    """Suffix-strip one lowercase ASCII word; anything else passes through.

    Words of one or two letters are returned unchanged, per the customary
    guard of the published algorithm.
    """
    if not word.isascii() or not word.isalpha():
        return word
    if len(word) <= 2:
        return word
    word = _step1a(word)
    word = _step1b(word)
    word = _step1c(word)
    word = _apply_rules(word, _STEP2_RULES, 1)
    word = _apply_rules(word, _STEP3_RULES, 1)
    word = _step4(word)
    word = _step5a(word)
    word = _step5b(word)
    return word


def stem_sequence(words) -> tuple[str, ...]:
    return tuple(porter_stem(w) for w in words)


# ---------------------------------------------------------------------------
# keyphrase assembly


def _aggregate(scores: list[float], scoring: str) -> float:
    if scoring == "mean":
        return sum(scores) / len(scores)
    if scoring == "sum":
        return sum(scores)
    if scoring == "max":
        return max(scores)
    raise ValueError(f"unknown phrase scoring: {scoring!r}")


def _is_contiguous_subsequence(needle: tuple[str, ...], haystack: tuple[str, ...]) -> bool:
    if len(needle) >= len(haystack):
        return False
    return any(
        haystack[i : i + len(needle)] == needle
        for i in range(len(haystack) - len(needle) + 1)
    )


def generate_keyphrases(
    doc: Document,
    predictions: list[Prediction],
    scoring: str = "mean",
) -> list[Keyphrase]:
    """Carve keyphrases out of the raw token stream of the document.

    Walks the punctuation-bounded token runs of the raw text in parallel
    with the stopword-removed stream (the two align exactly because both
    come from the same tokenizer); a token survives only when it is a
    positively-predicted word. Maximal surviving runs become phrases, which
    are then deduplicated, pruned of phrases contained in longer kept
    phrases, and sorted by score (ties: earlier first occurrence).
    """
    positive = {p.word: p.score for p in predictions if p.is_positive}
    if not positive:
        return []

    stream = doc.tokens
    pointer = 0
    runs: list[list[tuple[str, int]]] = []
    current: list[tuple[str, int]] = []
    for segment in phrase_segments(doc.raw_text):
        for token in segment:
            position = None
            if pointer < len(stream) and stream[pointer].surface == token:
                position = stream[pointer].position
                pointer += 1
            if position is not None and token in positive:
                current.append((token, position))
            elif current:
                runs.append(current)
                current = []
        if current:
            runs.append(current)
            current = []

    unique: dict[tuple[str, ...], Keyphrase] = {}
    for run in runs:
        words = tuple(w for w, _ in run)
        if words in unique:
            continue
        unique[words] = Keyphrase(
            words=words,
            score=_aggregate([positive[w] for w in words], scoring),
            first_position=run[0][1],
        )

    kept = [
        kp for kp in unique.values()
        if not any(
            _is_contiguous_subsequence(kp.words, other)
            for other in unique if other != kp.words
        )
    ]
    kept.sort(key=lambda kp: (-kp.score, kp.first_position))
    return kept


def top_k(phrases: list[Keyphrase], k: int) -> list[Keyphrase]:
    """First k phrases by (score desc, first occurrence asc); all if fewer."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(phrases, key=lambda kp: (-kp.score, kp.first_position))
    return ranked[:k]


def write_keyphrases(path, per_document: dict[str, list[Keyphrase]], header_lines=None) -> None:
    """Prediction artifact: ``doc_id TAB rank TAB phrase TAB score`` rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines or []:
            fh.write(f"# {line}\n")
        for doc_id in sorted(per_document):
            for rank, kp in enumerate(per_document[doc_id], start=1):
                fh.write(f"{doc_id}\t{rank}\t{' '.join(kp.words)}\t{kp.score!r}\n")
