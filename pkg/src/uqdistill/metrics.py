"""Evaluation suite: NLL, calibration, threshold-based detection, and
prediction-rejection analysis.

Detection metrics follow the threshold detector convention "flag when the
uncertainty score is strictly above the threshold": AUROC uses the
rank/Mann-Whitney form with ties counted half, AUPR sweeps the observed
scores with step interpolation. Rejection curves replace the k most
uncertain predictions with an oracle's answers, so curves are normalised
by the full test size and reach zero error at fraction one.
"""

from __future__ import annotations

import csv
import json
import pathlib
from dataclasses import dataclass

import numpy as np

from . import dirichlet, ensemble as ens_mod, net

__all__ = [
    "UnsupportedMeasureError",
    "UndefinedMetricError",
    "ScoredPredictions",
    "RejectionCurve",
    "nll",
    "error_rate",
    "ece",
    "roc_auc",
    "pr_auc",
    "roc_points",
    "rejection_curve",
    "prr",
    "score_model",
    "write_metrics_json",
    "write_histograms_csv",
    "write_rejection_csv",
    "write_roc_csv",
]

MODEL_KINDS = ("dnn", "end", "ensemble", "end2")


class UnsupportedMeasureError(ValueError):
    """Raised when a model kind cannot provide the requested measure."""


class UndefinedMetricError(ValueError):
    """Raised when a metric has no defined value (e.g. PRR at zero error)."""


@dataclass
class ScoredPredictions:
    kind: str
    probs: np.ndarray  # (N, K)
    pred: np.ndarray  # (N,)
    confidence: np.ndarray  # (N,) max-class probability
    total: np.ndarray  # (N,) nats
    data: np.ndarray | None  # None for dnn / end
    knowledge: np.ndarray | None  # None for dnn / end
    correct: np.ndarray | None = None  # None when no labels were given

    def measure(self, name: str) -> np.ndarray:
        value = {
            "confidence": self.confidence,
            "total": self.total,
            "data": self.data,
            "knowledge": self.knowledge,
        }.get(name)
        if name not in ("confidence", "total", "data", "knowledge"):
            raise ValueError(f"unknown measure {name!r}")
        if value is None:
            raise UnsupportedMeasureError(
                f"model kind {self.kind!r} does not define measure {name!r}"
            )
        return value


@dataclass
class RejectionCurve:
    fractions: np.ndarray  # k/N for k = 0..N
    measured: np.ndarray  # oracle-corrected error after k rejections
    random_baseline: np.ndarray
    oracle: np.ndarray


def _check_probs_labels(probs, labels):
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if probs.ndim != 2:
        raise ValueError("probs must have shape (N, K)")
    if labels.shape != (probs.shape[0],):
        raise ValueError("labels must be one per row")
    if labels.size and (labels.min() < 0 or labels.max() >= probs.shape[1]):
        raise ValueError("label outside [0, K)")
    return probs, labels


def nll(probs, labels) -> float:
    """Mean negative log-likelihood, probabilities floored at 1e-12."""
    probs, labels = _check_probs_labels(probs, labels)
    p = np.maximum(probs[np.arange(len(labels)), labels], 1e-12)
    return float(-np.log(p).mean())


def error_rate(probs, labels) -> float:
    probs, labels = _check_probs_labels(probs, labels)
    return float((probs.argmax(axis=1) != labels).mean())


def ece(probs, labels, bins: int = 15) -> float:
    """Expected calibration error with equal-width confidence bins."""
    if bins < 1:
        raise ValueError("need at least one bin")
    probs, labels = _check_probs_labels(probs, labels)
    conf = probs.max(axis=1)
    correct = (probs.argmax(axis=1) == labels).astype(np.float64)
    idx = np.minimum((conf * bins).astype(int), bins - 1)
    count = np.bincount(idx, minlength=bins).astype(np.float64)
    conf_sum = np.bincount(idx, weights=conf, minlength=bins)
    acc_sum = np.bincount(idx, weights=correct, minlength=bins)
    occupied = count > 0
    gap = np.zeros(bins)
    gap[occupied] = np.abs(
        acc_sum[occupied] / count[occupied] - conf_sum[occupied] / count[occupied]
    )
    return float((count * gap).sum() / len(labels))


def _ranks_with_ties(values: np.ndarray) -> np.ndarray:
    """1-based ranks, ties averaged (exact in float64 for these sizes)."""
    uniq, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    starts = ends - counts
    avg = (starts + 1 + ends) / 2.0
    return avg[inverse]


def roc_auc(pos_scores, neg_scores) -> float:
    """P(random positive outranks random negative), ties counted half."""
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both score sets must be non-empty")
    ranks = _ranks_with_ties(np.concatenate([pos, neg]))
    r_pos = ranks[: pos.size].sum()
    return float((r_pos - pos.size * (pos.size + 1) / 2.0) / (pos.size * neg.size))


def pr_auc(pos_scores, neg_scores) -> float:
    """Area under the precision-recall curve, step interpolation over the
    observed score thresholds (detector fires strictly above threshold)."""
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both score sets must be non-empty")
    thresholds = np.unique(np.concatenate([pos, neg]))[::-1]
    area = 0.0
    prev_recall = 0.0
    for t in thresholds:
        tp = float((pos > t).sum())
        fp = float((neg > t).sum())
        if tp + fp == 0.0:
            continue
        recall = tp / pos.size
        area += (recall - prev_recall) * (tp / (tp + fp))
        prev_recall = recall
    # threshold below the minimum: everything flagged
    area += (1.0 - prev_recall) * (pos.size / (pos.size + neg.size))
    return float(area)


def roc_points(pos_scores, neg_scores):
    """ROC curve vertices (fpr, tpr) swept over observed thresholds."""
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both score sets must be non-empty")
    thresholds = np.unique(np.concatenate([pos, neg]))[::-1]
    tpr = [0.0]
    fpr = [0.0]
    for t in thresholds:
        tpr.append(float((pos > t).sum()) / pos.size)
        fpr.append(float((neg > t).sum()) / neg.size)
    tpr.append(1.0)
    fpr.append(1.0)
    return np.array(fpr), np.array(tpr)


def rejection_curve(scored: ScoredPredictions, measure: str) -> RejectionCurve:
    """Oracle-rejection curve: reject the k most uncertain predictions
    (most uncertain first; for measure="confidence", lowest confidence
    first), count rejected samples as answered correctly, and report the
    remaining error over the full test size. Ties are broken stably by
    sample index."""
    if scored.correct is None:
        raise ValueError("rejection analysis needs labelled predictions")
    n = len(scored.correct)
    if n < 2:
        raise ValueError("need at least two samples")
    key = scored.measure(measure)
    order = np.argsort(key if measure == "confidence" else -key, kind="stable")
    errors = (~scored.correct[order]).astype(np.float64)
    total_err = errors.sum()
    k = np.arange(n + 1, dtype=np.float64)
    rejected_err = np.concatenate([[0.0], np.cumsum(errors)])
    measured = (total_err - rejected_err) / n
    fractions = k / n
    base = total_err / n
    random_baseline = base * (1.0 - fractions)
    oracle = np.maximum(total_err - k, 0.0) / n
    return RejectionCurve(fractions, measured, random_baseline, oracle)


def prr(curve: RejectionCurve) -> float:
    """Prediction rejection ratio: area between the measured and random
    curves over the area between the oracle and random curves. 1 is
    oracle-grade ordering, 0 random, negative perverse."""
    if curve.random_baseline[0] <= 0.0:
        raise UndefinedMetricError("PRR undefined at zero base error")
    ar_uns = np.trapezoid(curve.random_baseline - curve.measured, curve.fractions)
    ar_orc = np.trapezoid(curve.random_baseline - curve.oracle, curve.fractions)
    return float(ar_uns / ar_orc)


def score_model(model, kind: str, inputs, labels=None) -> ScoredPredictions:
    """Evaluate a model (or ensemble) and derive its uncertainty measures.

    dnn/end expose confidence and total uncertainty only; ensembles
    decompose via member disagreement; end2 via the Dirichlet closed
    forms at temperature 1.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    inputs = np.asarray(inputs, dtype=np.float64)
    if kind == "ensemble":
        member_p = net.softmax(ens_mod.member_logits(model, inputs))
        probs = ens_mod.ensemble_predictive(member_p)
        total, data, knowledge = ens_mod.ensemble_uncertainties(member_p)
    else:
        logits, _ = net.forward(model, inputs)
        if kind == "end2":
            alpha = dirichlet.alphas_from_logits(logits)
            probs = dirichlet.expected_categorical(alpha)
            total = dirichlet.total_uncertainty(alpha)
            data = dirichlet.expected_data_uncertainty(alpha)
            knowledge = dirichlet.knowledge_uncertainty(alpha)
        else:  # dnn, end: categorical output only
            probs = net.softmax(logits)
            total = dirichlet.entropy(probs)
            data = None
            knowledge = None
    pred = probs.argmax(axis=1)
    correct = None
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (inputs.shape[0],):
            raise ValueError("labels must be one per input")
        correct = pred == labels
    return ScoredPredictions(
        kind=kind,
        probs=probs,
        pred=pred,
        confidence=probs.max(axis=1),
        total=np.asarray(total, dtype=np.float64),
        data=None if data is None else np.asarray(data, dtype=np.float64),
        knowledge=None if knowledge is None else np.asarray(knowledge, dtype=np.float64),
        correct=correct,
    )


def write_metrics_json(path, doc: dict) -> None:
    pathlib.Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def write_histograms_csv(path, scored: dict) -> None:
    """`scored` maps model name -> {"id": ScoredPredictions, "ood": ...}."""
    with pathlib.Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "split", "confidence", "total", "data", "knowledge"])
        for name in sorted(scored):
            for split in ("id", "ood"):
                sp = scored[name].get(split)
                if sp is None:
                    continue
                for i in range(len(sp.confidence)):
                    w.writerow(
                        [
                            name,
                            split,
                            _fmt(sp.confidence[i]),
                            _fmt(sp.total[i]),
                            _fmt(None if sp.data is None else sp.data[i]),
                            _fmt(None if sp.knowledge is None else sp.knowledge[i]),
                        ]
                    )


def write_rejection_csv(path, curves: dict) -> None:
    """`curves` maps (model, measure) -> RejectionCurve."""
    with pathlib.Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "measure", "fraction_rejected", "error", "random", "oracle"])
        for model, measure in sorted(curves):
            c = curves[(model, measure)]
            for f, e, r, o in zip(c.fractions, c.measured, c.random_baseline, c.oracle):
                w.writerow([model, measure, _fmt(f), _fmt(e), _fmt(r), _fmt(o)])


def write_roc_csv(path, points: dict) -> None:
    """`points` maps (model, measure) -> (fpr, tpr) arrays."""
    with pathlib.Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "measure", "fpr", "tpr"])
        for model, measure in sorted(points):
            fpr, tpr = points[(model, measure)]
            for f, t in zip(fpr, tpr):
                w.writerow([model, measure, _fmt(f), _fmt(t)])
