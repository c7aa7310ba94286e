"""Precision/recall/F1 at word and phrase level, cross-validation, and the
bootstrap significance test.

Phrase matching stems both sides word-by-word after dropping stopwords, so
morphological variants of a gold phrase count as hits. Macro averages run
over documents with a nonempty gold list; cross-validation balances only
the training split of each fold, and reports pooled (micro) positive-class
metrics, matching the single-triple presentation used for cross-validated
classifier comparisons.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, tokenize
from .features import RankConfig
from .models import TrainedModel, score_matrix, train_model
from .phrases import Keyphrase, stem_sequence, top_k
from .training import POSITIVE, TrainingSet, gold_unigrams, smote

logger = logging.getLogger(__name__)

# Fixed bootstrap sub-stream granularity; results do not depend on how the
# chunks are distributed over workers.
_BOOTSTRAP_CHUNK = 2048


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "Metrics":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(precision=precision, recall=recall, f1=f1)


@dataclass
class EvalReport:
    per_document: dict[str, Metrics]
    macro: Metrics
    k: int | str  # top-k cutoff, or "words" for word-level evaluation
    model_kind: str
    corpus_name: str
    skipped_documents: int = 0


@dataclass
class SignificanceReport:
    delta: float
    p_value: float
    samples: int
    bootstrap_mean: float
    bootstrap_sd: float


def prf(predicted: set, gold: set) -> Metrics:
    """Set-overlap precision/recall/F1; empty predictions score 0 precision."""
    tp = len(predicted & gold)
    return Metrics.from_counts(tp=tp, fp=len(predicted) - tp, fn=len(gold) - tp)


def _macro(per_document: dict[str, Metrics]) -> Metrics:
    if not per_document:
        return Metrics(0.0, 0.0, 0.0)
    n = len(per_document)
    return Metrics(
        precision=sum(m.precision for m in per_document.values()) / n,
        recall=sum(m.recall for m in per_document.values()) / n,
        f1=sum(m.f1 for m in per_document.values()) / n,
    )


def normalized_gold_phrases(gold_phrases: list[str], stoplist: set[str]) -> set[tuple[str, ...]]:
    """Gold phrases as stemmed, stopword-free token tuples."""
    out = set()
    for phrase in gold_phrases:
        words = [w for w in tokenize(phrase) if w not in stoplist]
        if words:
            out.add(stem_sequence(words))
    return out


def stemmed_system_phrases(phrases: list[Keyphrase]) -> set[tuple[str, ...]]:
    return {stem_sequence(kp.words) for kp in phrases}


def evaluate_keyphrases(
    corpus: Corpus,
    model: TrainedModel,
    k: int,
    stoplist: set[str],
    rank_config: RankConfig | None = None,
    counting: str = "type",
    scoring: str = "mean",
    jobs: int = 1,
) -> EvalReport:
    """Top-k keyphrase quality against the gold lists, macro-averaged."""
    from . import pipeline

    cfg = rank_config or RankConfig()

    def evaluate_one(doc):
        phrases = pipeline.document_keyphrases(
            doc, model, rank_config=cfg, counting=counting, scoring=scoring,
        )
        return prf(
            stemmed_system_phrases(top_k(phrases, k)) if phrases else set(),
            normalized_gold_phrases(doc.gold_phrases, stoplist),
        )

    # documents whose gold list is empty (or normalizes to nothing) cannot
    # be scored and are excluded from the macro average
    labeled = [
        d for d in corpus.documents
        if d.gold_phrases and normalized_gold_phrases(d.gold_phrases, stoplist)
    ]
    skipped = len(corpus.documents) - len(labeled)
    results = pipeline.map_documents(evaluate_one, labeled, jobs=jobs)
    per_document = {doc.id: metrics for doc, metrics in zip(labeled, results)}
    if skipped:
        logger.warning("excluded %d documents without gold phrases from evaluation", skipped)
    return EvalReport(
        per_document=per_document,
        macro=_macro(per_document),
        k=k,
        model_kind=model.kind,
        corpus_name=corpus.name,
        skipped_documents=skipped,
    )


def evaluate_keywords(
    corpus: Corpus,
    model: TrainedModel,
    rank_config: RankConfig | None = None,
    counting: str = "type",
    jobs: int = 1,
) -> EvalReport:
    """Word-level quality: positive predictions against gold unigrams."""
    from . import pipeline

    cfg = rank_config or RankConfig()
    labeled = [d for d in corpus.documents if d.gold_phrases]
    skipped = len(corpus.documents) - len(labeled)

    def evaluate_one(doc):
        predictions = pipeline.predict_words(doc, model, rank_config=cfg, counting=counting)
        predicted = {p.word for p in predictions if p.is_positive}
        return prf(predicted, gold_unigrams(doc.gold_phrases))

    results = pipeline.map_documents(evaluate_one, labeled, jobs=jobs)
    per_document = {doc.id: metrics for doc, metrics in zip(labeled, results)}
    if skipped:
        logger.warning("excluded %d documents without gold phrases from evaluation", skipped)
    return EvalReport(
        per_document=per_document,
        macro=_macro(per_document),
        k="words",
        model_kind=model.kind,
        corpus_name=corpus.name,
        skipped_documents=skipped,
    )


def _stratified_folds(y: np.ndarray, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold id per record: labels shuffled separately, dealt round-robin."""
    assignment = np.empty(len(y), dtype=np.int64)
    for label in (0, 1):
        idx = np.flatnonzero(y == label)
        rng.shuffle(idx)
        assignment[idx] = np.arange(len(idx)) % folds
    return assignment


def _derive_seed(seed: int, salt: int) -> int:
    return int(np.random.SeedSequence([seed, salt]).generate_state(1)[0])


def cross_validate(
    ts: TrainingSet,
    folds: int,
    kind: str,
    seed: int = 0,
    smote_percentage: int = 200,
    smote_k: int = 5,
    **hyper,
) -> Metrics:
    """Stratified k-fold CV with per-split balancing; pooled micro metrics.

    Synthetic rows never reach a held-out fold because oversampling runs
    after the split, on the training part only. ``smote_percentage=0``
    disables balancing (useful for oracle tests). The input set must be
    synthetic-free.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if any(r.synthetic for r in ts.records):
        raise ValueError("cross-validation input must not contain synthetic records")
    X, y = ts.matrix()
    rng = np.random.default_rng(_derive_seed(seed, 0))
    assignment = _stratified_folds(y, folds, rng)
    fold_positives = np.array([(y[assignment == f] == 1).sum() for f in range(folds)])
    if (fold_positives == 0).any():
        logger.warning("a fold has no positives; re-stratifying once")
        assignment = _stratified_folds(y, folds, np.random.default_rng(_derive_seed(seed, 1)))

    tp = fp = fn = 0
    for f in range(folds):
        held_out = assignment == f
        train_records = [r for r, h in zip(ts.records, held_out) if not h]
        train_ts = TrainingSet(records=train_records, feature_names=ts.feature_names)
        if smote_percentage:
            train_ts = smote(
                train_ts, percentage=smote_percentage, k=smote_k,
                seed=_derive_seed(seed, 100 + f),
            )
        model = train_model(kind, train_ts, seed=_derive_seed(seed, 200 + f), **hyper)
        scores = score_matrix(model, X[held_out])
        predicted = scores >= 0.5
        actual = y[held_out] == POSITIVE
        tp += int((predicted & actual).sum())
        fp += int((predicted & ~actual).sum())
        fn += int((~predicted & actual).sum())
    return Metrics.from_counts(tp=tp, fp=fp, fn=fn)


def bootstrap_pvalue(
    doc_f1: list[float] | np.ndarray,
    delta: float,
    samples: int,
    seed: int = 0,
) -> SignificanceReport:
    """Resampling test of whether a macro-F1 margin over a baseline is luck.

    Draws ``samples`` bootstrap resamples of the per-document F1 vector and
    counts those whose mean beats the baseline macro by at least twice the
    observed margin. The comparison is non-strict, so a degenerate spread
    (every resample mean equal to the observed macro, delta 0) reports
    p = 1 rather than a spurious rejection. Resampling runs in fixed-size
    seeded chunks: the outcome is reproducible and chunk-parallelizable.
    """
    arr = np.asarray(doc_f1, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("doc_f1 must be nonempty")
    if samples <= 0:
        raise ValueError("samples must be positive")
    macro = float(arr.mean())
    baseline = macro - delta

    qualifying = 0
    total = 0.0
    total_sq = 0.0
    n = arr.size
    chunk_count = (samples + _BOOTSTRAP_CHUNK - 1) // _BOOTSTRAP_CHUNK
    for chunk_idx in range(chunk_count):
        size = min(_BOOTSTRAP_CHUNK, samples - chunk_idx * _BOOTSTRAP_CHUNK)
        rng = np.random.default_rng(np.random.SeedSequence([seed, chunk_idx]))
        indices = rng.integers(0, n, size=(size, n))
        means = arr[indices].mean(axis=1)
        qualifying += int((means - baseline >= 2.0 * delta).sum())
        total += float(means.sum())
        total_sq += float((means * means).sum())

    mean = total / samples
    variance = max(total_sq / samples - mean * mean, 0.0)
    return SignificanceReport(
        delta=delta,
        p_value=qualifying / samples,
        samples=samples,
        bootstrap_mean=mean,
        bootstrap_sd=math.sqrt(variance),
    )


# ---------------------------------------------------------------------------
# report output


def format_report_table(report: EvalReport) -> str:
    """Human-readable summary table."""
    lines = [
        f"corpus: {report.corpus_name}   model: {report.model_kind}   level: {report.k}",
        f"documents evaluated: {len(report.per_document)}"
        + (f" (skipped {report.skipped_documents})" if report.skipped_documents else ""),
        "",
        f"{'':12}{'precision':>12}{'recall':>12}{'F1':>12}",
        f"{'macro':12}{report.macro.precision:>12.4f}{report.macro.recall:>12.4f}"
        f"{report.macro.f1:>12.4f}",
    ]
    return "\n".join(lines)


def write_report(report: EvalReport, path, header_lines=None) -> None:
    """Machine-readable TSV: per-document rows plus a final macro row."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines or []:
            fh.write(f"# {line}\n")
        fh.write("row\tdoc_id\tprecision\trecall\tf1\n")
        for doc_id in sorted(report.per_document):
            m = report.per_document[doc_id]
            fh.write(f"doc\t{doc_id}\t{m.precision!r}\t{m.recall!r}\t{m.f1!r}\n")
        m = report.macro
        fh.write(f"macro\t{report.corpus_name}\t{m.precision!r}\t{m.recall!r}\t{m.f1!r}\n")


def read_doc_f1(path) -> list[float]:
    """Per-document F1 values from a report TSV or a plain list of floats."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("row\t"):
                continue
            parts = line.split("\t")
            if len(parts) == 5 and parts[0] == "doc":
                values.append(float(parts[4]))
            elif len(parts) == 5 and parts[0] == "macro":
                continue
            elif len(parts) == 1:
                values.append(float(parts[0]))
            else:
                raise ValueError(f"unrecognized score line: {line!r}")
    return values
