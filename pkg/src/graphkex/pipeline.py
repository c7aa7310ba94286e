"""Per-document composition of the extraction stages.

Ties candidate selection, graph construction, feature extraction, model
scoring, and phrase assembly together so the CLI, the training assembler,
and evaluation all share one code path. Every function here is pure per
document; ``map_documents`` fans work out across a thread pool while
keeping the output order identical to the input order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .candidates import select_candidates
from .corpus import Document
from .features import FeatureVector, RankConfig, build_feature_records
from .graph import TextGraph, build_graph
from .models import Prediction, TrainedModel, score_matrix
from .phrases import Keyphrase, generate_keyphrases


def document_graph(doc: Document, counting: str = "type",
                   position_stream: str = "filtered") -> TextGraph:
    return build_graph(doc, select_candidates(doc, position_stream=position_stream), counting)


def document_features(
    doc: Document,
    rank_config: RankConfig | None = None,
    counting: str = "type",
    position_stream: str = "filtered",
) -> list[tuple[str, FeatureVector]]:
    """(word, normalized feature vector) for every connected candidate."""
    g = document_graph(doc, counting=counting, position_stream=position_stream)
    return build_feature_records(g, rank_config)


def predict_words(
    doc: Document,
    model: TrainedModel,
    rank_config: RankConfig | None = None,
    counting: str = "type",
) -> list[Prediction]:
    """Score every candidate of the document; empty graph yields nothing."""
    feats = document_features(doc, rank_config=rank_config, counting=counting)
    if not feats:
        return []
    X = np.array([fv.as_array() for _, fv in feats], dtype=np.float64)
    scores = score_matrix(model, X)
    return [Prediction(word=w, score=float(s)) for (w, _), s in zip(feats, scores)]


def document_keyphrases(
    doc: Document,
    model: TrainedModel,
    rank_config: RankConfig | None = None,
    counting: str = "type",
    scoring: str = "mean",
) -> list[Keyphrase]:
    predictions = predict_words(doc, model, rank_config=rank_config, counting=counting)
    return generate_keyphrases(doc, predictions, scoring=scoring)


def map_documents(fn, documents: list[Document], jobs: int = 1) -> list:
    """Apply ``fn`` per document, optionally threaded; order is preserved."""
    if jobs <= 1 or len(documents) <= 1:
        return [fn(doc) for doc in documents]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, documents))
