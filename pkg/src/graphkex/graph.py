"""Weighted undirected co-occurrence graph over candidate words.

Edges link two candidate words whenever both appear inside a window of two
consecutive sentences; the weight counts how many windows join them. Using
sentence pairs instead of a fixed-size token window removes the window-size
parameter entirely. Candidates that never co-occur with another candidate
are dropped, so the graph carries no isolated nodes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .candidates import CandidateSet
from .corpus import Document


@dataclass
class TextGraph:
    """Symmetric integer-weighted adjacency over an indexed word list.

    ``positions[i]`` holds the sorted token positions of ``words[i]`` in the
    stopword-removed stream; the position-biased rank needs them.
    """

    words: list[str]
    weights: np.ndarray
    positions: list[tuple[int, ...]]

    @property
    def order(self) -> int:
        return len(self.words)

    @property
    def index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.words)}

    def degree(self, i: int) -> int:
        return int(np.count_nonzero(self.weights[i]))

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.weights[i])

    def edges(self):
        """Yield (word_a, word_b, weight) with a < b, sorted."""
        for i in range(self.order):
            for j in range(i + 1, self.order):
                w = int(self.weights[i, j])
                if w:
                    yield self.words[i], self.words[j], w


def empty_graph() -> TextGraph:
    return TextGraph(words=[], weights=np.zeros((0, 0), dtype=np.int64), positions=[])


def sentence_windows(doc: Document) -> list[list[str]]:
    """Token windows over consecutive sentence pairs.

    k sentences yield max(1, k - 1) windows; a single sentence is its own
    window.
    """
    sents = [[t.surface for t in s.tokens] for s in doc.sentences]
    if not sents:
        return []
    if len(sents) == 1:
        return [sents[0]]
    return [sents[i] + sents[i + 1] for i in range(len(sents) - 1)]


def build_graph(doc: Document, cand: CandidateSet, counting: str = "type") -> TextGraph:
    """Accumulate co-occurrence weights over the sentence-pair windows.

    ``counting`` picks the increment per window: "type" adds 1 whenever both
    words appear at all (default), "instance" adds the product of their
    occurrence counts inside the window. Middle sentences belong to two
    windows, so their internal pairs are counted twice by construction.
    """
    if counting not in ("type", "instance"):
        raise ValueError(f"unknown counting mode: {counting!r}")
    cand_words = cand.words
    pair_weights: Counter[tuple[str, str]] = Counter()
    for window in sentence_windows(doc):
        counts = Counter(w for w in window if w in cand_words)
        for a, b in combinations(sorted(counts), 2):
            pair_weights[(a, b)] += 1 if counting == "type" else counts[a] * counts[b]

    connected = sorted({w for pair in pair_weights for w in pair})
    if not connected:
        return empty_graph()
    index = {w: i for i, w in enumerate(connected)}
    weights = np.zeros((len(connected), len(connected)), dtype=np.int64)
    for (a, b), w in pair_weights.items():
        i, j = index[a], index[b]
        weights[i, j] = w
        weights[j, i] = w

    doc_positions = doc.word_positions()
    return TextGraph(
        words=connected,
        weights=weights,
        positions=[doc_positions[w] for w in connected],
    )


def write_edge_list(g: TextGraph, path: str | Path) -> None:
    """Debug dump: one ``word1 TAB word2 TAB weight`` line per edge."""
    with open(path, "w", encoding="utf-8") as fh:
        for a, b, w in g.edges():
            fh.write(f"{a}\t{b}\t{w}\n")
