"""Training set assembly: labeling, cross-corpus concatenation, balancing.

A candidate word is positive when it appears verbatim as a unigram inside
any gold phrase of its document; no stemming happens at labeling time.
Keywords are rare, so the assembled set is heavily imbalanced and gets
balanced by synthetic minority oversampling: each positive spawns
percentage/100 interpolated copies along segments to its nearest positive
neighbors in feature space.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .features import FEATURE_NAMES, FeatureVector, RankConfig

logger = logging.getLogger(__name__)

POSITIVE = 1
NEGATIVE = 0


class NoMinoritySamples(ValueError):
    """Oversampling is impossible without at least one positive record."""


@dataclass(frozen=True)
class CandidateRecord:
    doc_id: str
    word: str
    features: FeatureVector
    label: int
    synthetic: bool = False


@dataclass
class TrainingSet:
    records: list[CandidateRecord]
    feature_names: tuple[str, ...] = FEATURE_NAMES

    @property
    def class_counts(self) -> tuple[int, int]:
        """(positives, negatives) over all records."""
        pos = sum(1 for r in self.records if r.label == POSITIVE)
        return pos, len(self.records) - pos

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Feature matrix and 0/1 label vector in record order."""
        X = np.array([r.features.as_array() for r in self.records], dtype=np.float64)
        y = np.array([r.label for r in self.records], dtype=np.int64)
        return X, y

    def __len__(self) -> int:
        return len(self.records)


def gold_unigrams(gold_phrases: list[str]) -> set[str]:
    """All whitespace-separated tokens of the lowercased gold phrases."""
    return {tok for phrase in gold_phrases for tok in phrase.lower().split()}


def label_candidates(
    records: list[tuple[str, FeatureVector]],
    gold_phrases: list[str],
    doc_id: str = "",
) -> list[CandidateRecord]:
    """Label each (word, features) pair against the gold unigram set."""
    unigrams = gold_unigrams(gold_phrases)
    return [
        CandidateRecord(
            doc_id=doc_id,
            word=word,
            features=fv,
            label=POSITIVE if word in unigrams else NEGATIVE,
        )
        for word, fv in records
    ]


def assemble_training_set(
    corpora: list[Corpus],
    rank_config: RankConfig | None = None,
    counting: str = "type",
) -> TrainingSet:
    """Run the per-document pipeline over every labeled document.

    Documents without gold phrases or whose graph comes out empty contribute
    nothing (counted and logged). Record order is (corpus, doc id, word), and
    doc ids are namespaced by corpus name so shared ids stay distinct.
    """
    from . import pipeline  # late import: pipeline composes this module's siblings

    cfg = rank_config or RankConfig()
    records: list[CandidateRecord] = []
    no_gold = 0
    no_graph = 0
    for corpus in corpora:
        for doc in corpus.documents:
            if not doc.gold_phrases:
                no_gold += 1
                continue
            feats = pipeline.document_features(doc, rank_config=cfg, counting=counting)
            if not feats:
                no_graph += 1
                continue
            feats.sort(key=lambda pair: pair[0])
            records.extend(
                label_candidates(feats, doc.gold_phrases, doc_id=f"{corpus.name}/{doc.id}")
            )
    if no_gold or no_graph:
        logger.warning(
            "assembly skipped %d documents without gold phrases and %d with empty graphs",
            no_gold, no_graph,
        )
    return TrainingSet(records=records)


def _nearest_positive_neighbors(X: np.ndarray, k: int) -> np.ndarray:
    """Indices of each row's k nearest other rows (Euclidean, stable ties)."""
    n = len(X)
    sq = (X * X).sum(axis=1)
    out = np.empty((n, k), dtype=np.int64)
    chunk = max(1, min(n, 8_388_608 // max(n, 1)))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (X[start:stop] @ X.T)
        d2[np.arange(start, stop) - start, np.arange(start, stop)] = np.inf
        order = np.argsort(d2, axis=1, kind="stable")
        out[start:stop] = order[:, :k]
    return out


def smote(ts: TrainingSet, percentage: int, k: int = 5, seed: int = 0) -> TrainingSet:
    """Oversample positives by interpolation toward nearest positive neighbors.

    Every positive record spawns percentage/100 synthetic rows, each placed
    uniformly at random on the segment to one of its k nearest positives.
    Originals are passed through untouched; synthetic rows are labeled
    positive, flagged, and carry no provenance. Output is reproducible for a
    fixed seed.
    """
    if percentage <= 0 or percentage % 100 != 0:
        raise ValueError("percentage must be a positive multiple of 100")
    positives = [r for r in ts.records if r.label == POSITIVE]
    if not positives:
        raise NoMinoritySamples("training set has no positive records")

    if len(positives) <= k:
        k = len(positives) - 1
        logger.warning("fewer positives than requested neighbors; using k=%d", k)

    X = np.array([r.features.as_array() for r in positives], dtype=np.float64)
    neighbors = _nearest_positive_neighbors(X, k) if k > 0 else None
    rng = np.random.default_rng(seed)
    copies = percentage // 100

    synthetic: list[CandidateRecord] = []
    for i in range(len(positives)):
        for _ in range(copies):
            if neighbors is None:
                other = X[i]  # lone positive: interpolation degenerates to a copy
            else:
                other = X[neighbors[i, rng.integers(0, k)]]
            gap = rng.random()
            values = X[i] + gap * (other - X[i])
            synthetic.append(
                CandidateRecord(
                    doc_id="",
                    word="",
                    features=FeatureVector.from_array(values),
                    label=POSITIVE,
                    synthetic=True,
                )
            )
    return TrainingSet(records=list(ts.records) + synthetic, feature_names=ts.feature_names)


_COLUMNS = ("doc_id", "word") + FEATURE_NAMES + ("label", "synthetic")


def write_training_set(ts: TrainingSet, path: str | Path, header_lines: list[str] | None = None) -> None:
    """Serialize as TSV: header row plus one record per line.

    Floats are written with repr so a read-back round-trips exactly;
    ``header_lines`` are emitted first as ``#`` comments.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines or []:
            fh.write(f"# {line}\n")
        fh.write("\t".join(_COLUMNS) + "\n")
        for r in ts.records:
            values = [repr(float(v)) for v in r.features.as_array()]
            fh.write(
                "\t".join([r.doc_id, r.word, *values, str(r.label), str(int(r.synthetic))]) + "\n"
            )


def read_training_set(path: str | Path) -> TrainingSet:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split("\t")
                if tuple(header) != _COLUMNS:
                    raise ValueError(f"unexpected training set columns: {header}")
                continue
            parts = line.split("\t")
            doc_id, word = parts[0], parts[1]
            values = [float(v) for v in parts[2:8]]
            records.append(
                CandidateRecord(
                    doc_id=doc_id,
                    word=word,
                    features=FeatureVector.from_array(values),
                    label=int(parts[8]),
                    synthetic=bool(int(parts[9])),
                )
            )
    return TrainingSet(records=records)
