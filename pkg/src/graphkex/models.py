"""The four classifier kinds, their training loops, and model files.

Everything here is self-contained numpy: a Gaussian naive Bayes base
learner, bootstrap bagging and multiplicative-weight boosting on top of it,
and a gradient-boosted tree ensemble with logistic loss (variance-reduction
splits, Newton leaf values with an L2 term). Scores are probabilities of
the positive class; the decision threshold is fixed at 0.5.

Model files are a versioned text envelope followed by a length-prefixed
canonical-JSON payload, so identical models serialize to identical bytes.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .features import FEATURE_NAMES, FeatureVector
from .training import NEGATIVE, POSITIVE, TrainingSet

logger = logging.getLogger(__name__)

MODEL_KINDS = ("nb", "nb_bagging", "nb_adaboost", "gbdt")

VARIANCE_FLOOR = 1e-9
_MIN_ERROR = 1e-10

_MAGIC = "graphkex-model"
_FORMAT_VERSION = 1


class DegenerateTrainingSet(ValueError):
    """Training needs at least one record of each class."""


class ModelFormatError(ValueError):
    """The byte stream is not a readable model file."""


# ---------------------------------------------------------------------------
# parameter containers


@dataclass
class NBParams:
    priors: np.ndarray      # (2,)
    means: np.ndarray       # (2, d)
    variances: np.ndarray   # (2, d), floored


@dataclass
class BaggingParams:
    members: list[NBParams]


@dataclass
class AdaBoostParams:
    members: list[tuple[NBParams, float]]  # (weak learner, stage weight)


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass
class GBDTParams:
    init_score: float
    learning_rate: float
    reg_lambda: float
    max_depth: int
    trees: list[TreeNode]


@dataclass
class TrainedModel:
    kind: str
    params: object
    feature_names: tuple[str, ...] = FEATURE_NAMES
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Prediction:
    word: str
    score: float

    @property
    def label(self) -> int:
        return POSITIVE if self.score >= 0.5 else NEGATIVE

    @property
    def is_positive(self) -> bool:
        return self.score >= 0.5


# ---------------------------------------------------------------------------
# Gaussian naive Bayes


def _fit_nb(X: np.ndarray, y: np.ndarray) -> NBParams:
    if len(np.unique(y)) < 2:
        raise DegenerateTrainingSet("both classes must be present")
    priors = np.empty(2)
    means = np.empty((2, X.shape[1]))
    variances = np.empty((2, X.shape[1]))
    for c in (0, 1):
        Xc = X[y == c]
        priors[c] = len(Xc) / len(X)
        means[c] = Xc.mean(axis=0)
        variances[c] = np.maximum(Xc.var(axis=0), VARIANCE_FLOOR)
    return NBParams(priors=priors, means=means, variances=variances)


def _nb_positive_probability(p: NBParams, X: np.ndarray) -> np.ndarray:
    """P(positive | x) from the Gaussian likelihood products, log-domain."""
    log_joint = np.empty((len(X), 2))
    for c in (0, 1):
        ll = -0.5 * (
            np.log(2.0 * np.pi * p.variances[c]) + (X - p.means[c]) ** 2 / p.variances[c]
        ).sum(axis=1)
        log_joint[:, c] = math.log(p.priors[c]) + ll
    peak = log_joint.max(axis=1, keepdims=True)
    norm = peak[:, 0] + np.log(np.exp(log_joint - peak).sum(axis=1))
    return np.exp(log_joint[:, 1] - norm)


def train_nb(ts: TrainingSet, metadata: dict[str, str] | None = None) -> TrainedModel:
    """Gaussian naive Bayes with empirical class priors."""
    X, y = ts.matrix()
    return TrainedModel(
        kind="nb",
        params=_fit_nb(X, y),
        feature_names=ts.feature_names,
        metadata=dict(metadata or {}),
    )


# ---------------------------------------------------------------------------
# bagging


def train_bagged_nb(
    ts: TrainingSet,
    members: int = 10,
    seed: int = 0,
    metadata: dict[str, str] | None = None,
) -> TrainedModel:
    """Bootstrap-resampled ensemble; prediction averages member scores."""
    if members < 1:
        raise ValueError("members must be >= 1")
    X, y = ts.matrix()
    rng = np.random.default_rng(seed)
    fitted = []
    for _ in range(members):
        idx = rng.integers(0, len(X), size=len(X))
        fitted.append(_fit_nb(X[idx], y[idx]))
    meta = dict(metadata or {})
    meta.setdefault("seed", str(seed))
    return TrainedModel(
        kind="nb_bagging",
        params=BaggingParams(members=fitted),
        feature_names=ts.feature_names,
        metadata=meta,
    )


# ---------------------------------------------------------------------------
# boosting


def _boost_rounds(
    X: np.ndarray, y: np.ndarray, rounds: int, rng: np.random.Generator
) -> tuple[list[tuple[NBParams, float]], list[dict]]:
    """Multiplicative-weight boosting with weighted-resampling weak fits.

    Each round draws a weight-proportional bootstrap, fits the base learner
    on it, and measures the weighted error on the full set. Returns the
    (member, stage weight) list plus a per-round trace used by diagnostics
    and tests: error, stage weight, and the weight vector after the update.
    """
    n = len(y)
    y_sign = 2 * y - 1
    weights = np.full(n, 1.0 / n)
    members: list[tuple[NBParams, float]] = []
    trace: list[dict] = []
    for _ in range(rounds):
        idx = rng.choice(n, size=n, replace=True, p=weights)
        params = _fit_nb(X[idx], y[idx])
        h_sign = np.where(_nb_positive_probability(params, X) >= 0.5, 1, -1)
        error = float(weights[h_sign != y_sign].sum())
        if error >= 0.5:
            if not members:
                logger.warning(
                    "first weak learner error %.3f >= 0.5; falling back to a single plain fit",
                    error,
                )
                members.append((_fit_nb(X, y), 1.0))
            break
        alpha = 0.5 * math.log((1.0 - error) / max(error, _MIN_ERROR))
        members.append((params, alpha))
        if error == 0.0:
            trace.append({"error": error, "alpha": alpha, "weights": weights.copy()})
            break
        weights = weights * np.exp(-alpha * y_sign * h_sign)
        weights = weights / weights.sum()
        trace.append({"error": error, "alpha": alpha, "weights": weights.copy()})
    return members, trace


def train_adaboost_nb(
    ts: TrainingSet,
    rounds: int = 10,
    seed: int = 0,
    metadata: dict[str, str] | None = None,
) -> TrainedModel:
    """Boosted ensemble; score is the logistic of the signed weighted vote."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    X, y = ts.matrix()
    if len(np.unique(y)) < 2:
        raise DegenerateTrainingSet("both classes must be present")
    members, _ = _boost_rounds(X, y, rounds, np.random.default_rng(seed))
    meta = dict(metadata or {})
    meta.setdefault("seed", str(seed))
    return TrainedModel(
        kind="nb_adaboost",
        params=AdaBoostParams(members=members),
        feature_names=ts.feature_names,
        metadata=meta,
    )


# ---------------------------------------------------------------------------
# gradient-boosted trees


def _best_split(X: np.ndarray, residual: np.ndarray) -> tuple[int, float] | None:
    """Scan all feature/midpoint thresholds; pick the lowest split SSE.

    Ties keep the lowest feature index, then the earliest threshold (both
    fall out of first-minimum argmin over an ordered scan).
    """
    n = len(residual)
    total = residual.sum()
    total_sq = (residual * residual).sum()
    parent_sse = total_sq - total * total / n
    if parent_sse <= 1e-12:
        return None
    best: tuple[float, int, float] | None = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        rs = residual[order]
        boundary = np.flatnonzero(xs[:-1] < xs[1:])
        if boundary.size == 0:
            continue
        csum = np.cumsum(rs)
        csq = np.cumsum(rs * rs)
        cl = boundary + 1.0
        sl = csum[boundary]
        ql = csq[boundary]
        cr = n - cl
        sr = total - sl
        qr = total_sq - ql
        sse = (ql - sl * sl / cl) + (qr - sr * sr / cr)
        j = int(np.argmin(sse))
        if best is None or sse[j] < best[0]:
            threshold = float((xs[boundary[j]] + xs[boundary[j] + 1]) / 2.0)
            best = (float(sse[j]), f, threshold)
    if best is None or parent_sse - best[0] <= 1e-12:
        return None
    return best[1], best[2]


def _leaf_value(residual: np.ndarray, hessian: np.ndarray, reg_lambda: float) -> float:
    return float(residual.sum() / (hessian.sum() + reg_lambda))


def _grow_tree(
    X: np.ndarray,
    residual: np.ndarray,
    hessian: np.ndarray,
    depth: int,
    max_depth: int,
    reg_lambda: float,
) -> TreeNode:
    if depth >= max_depth or len(residual) < 2:
        return TreeNode(value=_leaf_value(residual, hessian, reg_lambda))
    split = _best_split(X, residual)
    if split is None:
        return TreeNode(value=_leaf_value(residual, hessian, reg_lambda))
    f, threshold = split
    mask = X[:, f] <= threshold
    return TreeNode(
        feature=f,
        threshold=threshold,
        left=_grow_tree(X[mask], residual[mask], hessian[mask], depth + 1, max_depth, reg_lambda),
        right=_grow_tree(X[~mask], residual[~mask], hessian[~mask], depth + 1, max_depth, reg_lambda),
    )


def _apply_tree(node: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.empty(len(X))
    stack = [(node, np.arange(len(X)))]
    while stack:
        nd, idx = stack.pop()
        if nd.is_leaf:
            out[idx] = nd.value
            continue
        mask = X[idx, nd.feature] <= nd.threshold
        stack.append((nd.left, idx[mask]))
        stack.append((nd.right, idx[~mask]))
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def train_gbdt(
    ts: TrainingSet,
    trees: int = 100,
    max_depth: int = 3,
    learning_rate: float = 0.1,
    seed: int = 0,
    reg_lambda: float = 1.0,
    metadata: dict[str, str] | None = None,
) -> TrainedModel:
    """Gradient boosting with logistic loss.

    The raw score starts at the log-odds of the positive rate; every round
    fits a depth-limited regression tree to the current residuals y - p and
    assigns leaves the damped Newton step sum(residual)/(sum(hessian) + L2).
    The fit itself is deterministic; the seed is only recorded.
    """
    if trees < 1 or max_depth < 1:
        raise ValueError("trees and max_depth must be >= 1")
    X, y = ts.matrix()
    if len(np.unique(y)) < 2:
        raise DegenerateTrainingSet("both classes must be present")
    positive_rate = y.mean()
    init_score = math.log(positive_rate / (1.0 - positive_rate))
    raw = np.full(len(y), init_score)
    grown: list[TreeNode] = []
    for _ in range(trees):
        p = _sigmoid(raw)
        residual = y - p
        hessian = p * (1.0 - p)
        tree = _grow_tree(X, residual, hessian, 0, max_depth, reg_lambda)
        grown.append(tree)
        raw = raw + learning_rate * _apply_tree(tree, X)
    meta = dict(metadata or {})
    meta.setdefault("seed", str(seed))
    return TrainedModel(
        kind="gbdt",
        params=GBDTParams(
            init_score=init_score,
            learning_rate=learning_rate,
            reg_lambda=reg_lambda,
            max_depth=max_depth,
            trees=grown,
        ),
        feature_names=ts.feature_names,
        metadata=meta,
    )


def train_model(kind: str, ts: TrainingSet, seed: int = 0, metadata: dict[str, str] | None = None,
                **hyper) -> TrainedModel:
    """Kind-dispatched training entry point used by the CLI and evaluation."""
    if kind == "nb":
        return train_nb(ts, metadata=metadata)
    if kind == "nb_bagging":
        return train_bagged_nb(ts, members=hyper.get("members", 10), seed=seed, metadata=metadata)
    if kind == "nb_adaboost":
        return train_adaboost_nb(ts, rounds=hyper.get("rounds", 10), seed=seed, metadata=metadata)
    if kind == "gbdt":
        return train_gbdt(
            ts,
            trees=hyper.get("trees", 100),
            max_depth=hyper.get("max_depth", 3),
            learning_rate=hyper.get("learning_rate", 0.1),
            seed=seed,
            metadata=metadata,
        )
    raise ValueError(f"unknown model kind: {kind!r}")


# ---------------------------------------------------------------------------
# scoring


def score_matrix(m: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Positive-class probability per row of X."""
    if m.kind == "nb":
        return _nb_positive_probability(m.params, X)
    if m.kind == "nb_bagging":
        scores = np.stack([_nb_positive_probability(p, X) for p in m.params.members])
        return scores.mean(axis=0)
    if m.kind == "nb_adaboost":
        vote = np.zeros(len(X))
        for params, alpha in m.params.members:
            h = np.where(_nb_positive_probability(params, X) >= 0.5, 1.0, -1.0)
            vote += alpha * h
        return _sigmoid(vote)
    if m.kind == "gbdt":
        raw = np.full(len(X), m.params.init_score)
        for tree in m.params.trees:
            raw += m.params.learning_rate * _apply_tree(tree, X)
        return _sigmoid(raw)
    raise ValueError(f"unknown model kind: {m.kind!r}")


def predict(m: TrainedModel, fv: FeatureVector, word: str = "") -> Prediction:
    """Score a single feature vector; out-of-range features are clamped."""
    x = fv.as_array()
    if (x < 0.0).any() or (x > 1.0).any():
        logger.warning("feature vector outside [0, 1]; clamping")
        x = np.clip(x, 0.0, 1.0)
    score = float(score_matrix(m, x[np.newaxis, :])[0])
    return Prediction(word=word, score=score)


# ---------------------------------------------------------------------------
# serialization


def _tree_to_obj(node: TreeNode):
    if node.is_leaf:
        return {"value": node.value}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _tree_to_obj(node.left),
        "right": _tree_to_obj(node.right),
    }


def _tree_from_obj(obj) -> TreeNode:
    if "value" in obj:
        return TreeNode(value=float(obj["value"]))
    return TreeNode(
        feature=int(obj["feature"]),
        threshold=float(obj["threshold"]),
        left=_tree_from_obj(obj["left"]),
        right=_tree_from_obj(obj["right"]),
    )


def _nb_to_obj(p: NBParams):
    return {
        "priors": p.priors.tolist(),
        "means": p.means.tolist(),
        "variances": p.variances.tolist(),
    }


def _nb_from_obj(obj) -> NBParams:
    return NBParams(
        priors=np.array(obj["priors"], dtype=np.float64),
        means=np.array(obj["means"], dtype=np.float64),
        variances=np.array(obj["variances"], dtype=np.float64),
    )


def _params_to_obj(m: TrainedModel):
    if m.kind == "nb":
        return _nb_to_obj(m.params)
    if m.kind == "nb_bagging":
        return {"members": [_nb_to_obj(p) for p in m.params.members]}
    if m.kind == "nb_adaboost":
        return {"members": [[_nb_to_obj(p), alpha] for p, alpha in m.params.members]}
    if m.kind == "gbdt":
        return {
            "init_score": m.params.init_score,
            "learning_rate": m.params.learning_rate,
            "reg_lambda": m.params.reg_lambda,
            "max_depth": m.params.max_depth,
            "trees": [_tree_to_obj(t) for t in m.params.trees],
        }
    raise ValueError(f"unknown model kind: {m.kind!r}")


def _params_from_obj(kind: str, obj):
    if kind == "nb":
        return _nb_from_obj(obj)
    if kind == "nb_bagging":
        return BaggingParams(members=[_nb_from_obj(o) for o in obj["members"]])
    if kind == "nb_adaboost":
        return AdaBoostParams(
            members=[(_nb_from_obj(o), float(a)) for o, a in obj["members"]]
        )
    if kind == "gbdt":
        return GBDTParams(
            init_score=float(obj["init_score"]),
            learning_rate=float(obj["learning_rate"]),
            reg_lambda=float(obj["reg_lambda"]),
            max_depth=int(obj["max_depth"]),
            trees=[_tree_from_obj(o) for o in obj["trees"]],
        )
    raise ValueError(f"unknown model kind: {kind!r}")


def save_model(m: TrainedModel) -> bytes:
    """Serialize to the versioned envelope; identical models produce identical bytes."""
    if m.kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind: {m.kind!r}")
    payload = json.dumps(
        _params_to_obj(m), sort_keys=True, separators=(",", ":"), allow_nan=False
    ).encode("utf-8")
    lines = [f"{_MAGIC} {_FORMAT_VERSION}", f"kind: {m.kind}",
             f"feature-names: {','.join(m.feature_names)}"]
    for key in sorted(m.metadata):
        value = m.metadata[key]
        if "\n" in key or "\n" in value:
            raise ValueError("metadata entries must be single-line")
        lines.append(f"meta-{key}: {value}")
    lines.append(f"payload-bytes: {len(payload)}")
    return ("\n".join(lines) + "\n\n").encode("utf-8") + payload


def load_model(data: bytes) -> TrainedModel:
    """Parse the envelope back into a TrainedModel.

    Raises ModelFormatError on a bad magic line, unsupported version,
    missing fields, or a payload that is truncated or over-long.
    """
    sep = data.find(b"\n\n")
    if sep < 0:
        raise ModelFormatError("missing header/payload separator")
    try:
        header = data[:sep].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError("undecodable header") from exc
    payload = data[sep + 2:]

    lines = header.splitlines()
    if not lines:
        raise ModelFormatError("empty header")
    magic = lines[0].split(" ")
    if len(magic) != 2 or magic[0] != _MAGIC:
        raise ModelFormatError("not a model file")
    if magic[1] != str(_FORMAT_VERSION):
        raise ModelFormatError(f"unsupported format version {magic[1]}")

    fields: dict[str, str] = {}
    for line in lines[1:]:
        key, _, value = line.partition(": ")
        fields[key] = value
    for required in ("kind", "feature-names", "payload-bytes"):
        if required not in fields:
            raise ModelFormatError(f"missing header field {required!r}")
    if fields["kind"] not in MODEL_KINDS:
        raise ModelFormatError(f"unknown model kind {fields['kind']!r}")
    try:
        expected = int(fields["payload-bytes"])
    except ValueError as exc:
        raise ModelFormatError("payload-bytes is not an integer") from exc
    if len(payload) != expected:
        raise ModelFormatError(
            f"payload length {len(payload)} does not match declared {expected}"
        )
    try:
        obj = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError("corrupt payload") from exc

    metadata = {
        key[len("meta-"):]: value for key, value in fields.items() if key.startswith("meta-")
    }
    return TrainedModel(
        kind=fields["kind"],
        params=_params_from_obj(fields["kind"], obj),
        feature_names=tuple(fields["feature-names"].split(",")),
        metadata=metadata,
    )
