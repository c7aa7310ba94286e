"""Candidate keyword selection by occurrence-spacing statistics.

A word that matters tends to occur in bursts, so the normalized standard
deviation of its inter-occurrence gaps (the sigma index of the keyword
statistics literature) separates content words from background vocabulary
without any part-of-speech tagging. Long documents keep the top third of
eligible words ranked by sigma; short documents (fewer than 100 unique
words after stopword removal) keep every word, because occurrence counts
are too small there for spacing statistics to mean anything.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .corpus import Document, tokenize

SHORT_DOC_UNIQUE_WORDS = 100
# top-33% rule, evaluated in exact integer arithmetic
TOP_PERCENT = 33


class InsufficientOccurrences(ValueError):
    """Spacing statistics need at least two occurrences of the word."""


class SelectionMode(enum.Enum):
    SIGMA_TOP_THIRD = "sigma_top_third"
    ALL_WORDS_SHORT_DOC = "all_words_short_doc"


@dataclass(frozen=True)
class OccurrenceIndex:
    """Where one word occurs inside a token stream of known length."""

    word: str
    positions: tuple[int, ...]
    stream_length: int

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass
class CandidateSet:
    doc_id: str
    candidates: list[tuple[str, float]]
    selection_mode: SelectionMode

    @property
    def words(self) -> frozenset[str]:
        return frozenset(w for w, _ in self.candidates)

    def __len__(self) -> int:
        return len(self.candidates)


def sigma_index(occ: OccurrenceIndex) -> float:
    """Normalized standard deviation of the word's occurrence gaps.

    The gap sequence is padded with virtual occurrences at position 0 and
    stream_length + 1, giving n + 1 gaps whose mean is always
    (stream_length + 1) / (n + 1). The standard deviation uses divisor
    n - 1, hence the two-occurrence minimum. Equal spacing yields 0.
    """
    n = occ.n
    if n < 2:
        raise InsufficientOccurrences(f"{occ.word!r} occurs {n} time(s); need at least 2")
    padded = (0,) + occ.positions + (occ.stream_length + 1,)
    mu = (occ.stream_length + 1) / (n + 1)
    sq = 0.0
    for prev, nxt in zip(padded, padded[1:]):
        sq += ((nxt - prev) - mu) ** 2
    return math.sqrt(sq / (n - 1)) / mu


def occurrence_indexes(doc: Document, position_stream: str = "filtered") -> dict[str, OccurrenceIndex]:
    """Occurrence index per unique word of the document.

    ``position_stream`` selects which token stream positions and stream
    length are measured on: "filtered" (stopword-removed, the default) or
    "raw" (every token of the original text). Words that only exist in the
    raw stream (stopwords) are never indexed.
    """
    if position_stream == "filtered":
        per_word = doc.word_positions()
        stream_length = len(doc.tokens)
        return {
            w: OccurrenceIndex(word=w, positions=ps, stream_length=stream_length)
            for w, ps in per_word.items()
        }
    if position_stream == "raw":
        raw_tokens = tokenize(doc.raw_text)
        keep = doc.unique_words()
        per_word: dict[str, list[int]] = {}
        for i, w in enumerate(raw_tokens, start=1):
            if w in keep:
                per_word.setdefault(w, []).append(i)
        return {
            w: OccurrenceIndex(word=w, positions=tuple(ps), stream_length=len(raw_tokens))
            for w, ps in per_word.items()
        }
    raise ValueError(f"unknown position_stream: {position_stream!r}")


def _rank_key(occ: OccurrenceIndex, sigma: float):
    # sigma desc, then more occurrences, then earlier first position, then word
    return (-sigma, -occ.n, occ.positions[0], occ.word)


def select_candidates(doc: Document, position_stream: str = "filtered") -> CandidateSet:
    """Pick the candidate keyword set for one document.

    Documents with fewer than SHORT_DOC_UNIQUE_WORDS unique words keep every
    word (sigma reported where computable, 0 for single occurrences). Longer
    documents rank words with at least two occurrences by sigma and keep the
    top 33%, rounded up so a single eligible word still qualifies.
    """
    occ = occurrence_indexes(doc, position_stream=position_stream)
    if len(occ) < SHORT_DOC_UNIQUE_WORDS:
        scored = [
            (o, sigma_index(o) if o.n >= 2 else 0.0)
            for o in occ.values()
        ]
        scored.sort(key=lambda pair: _rank_key(*pair))
        return CandidateSet(
            doc_id=doc.id,
            candidates=[(o.word, s) for o, s in scored],
            selection_mode=SelectionMode.ALL_WORDS_SHORT_DOC,
        )

    eligible = [(o, sigma_index(o)) for o in occ.values() if o.n >= 2]
    eligible.sort(key=lambda pair: _rank_key(*pair))
    keep = (TOP_PERCENT * len(eligible) + 99) // 100  # ceil(0.33 * count), exactly
    return CandidateSet(
        doc_id=doc.id,
        candidates=[(o.word, s) for o, s in eligible[:keep]],
        selection_mode=SelectionMode.SIGMA_TOP_THIRD,
    )
