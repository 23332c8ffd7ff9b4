#!/usr/bin/env python3
"""
Evaluation statistics for actsteer
Distribution distance, ranking statistics, the concept probe score and the
EvalReport record written by sweeps.
"""

import csv
import io
import json
from dataclasses import dataclass, field, asdict
from typing import List, Optional, Sequence

import numpy as np
from sklearn.metrics import average_precision_score, roc_auc_score

from .config_loader import atomic_write_text
from .core import ActivationMatrix
from .errors import InvalidInputError
from .logger import get_metrics_logger
from .probe import LogisticProbe, ProbeConfig

logger = get_metrics_logger()


def wasserstein1(A, B) -> float:
    """
    Empirical W1 between two equal-size samples: mean absolute gap between
    the sorted values.
    """
    A = np.asarray(A, dtype=np.float64).ravel()
    B = np.asarray(B, dtype=np.float64).ravel()
    if A.size == 0 or A.size != B.size:
        raise InvalidInputError(f"wasserstein1 needs two non-empty samples of equal size, got {A.size} and {B.size}")
    return float(np.mean(np.abs(np.sort(A) - np.sort(B))))


def _ranking_inputs(pos, neg, name: str):
    pos = np.asarray(pos, dtype=np.float64).ravel()
    neg = np.asarray(neg, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise InvalidInputError(f"{name} needs non-empty positive and negative samples")
    return np.r_[np.ones(pos.size), np.zeros(neg.size)], np.concatenate([pos, neg])


def auroc(pos, neg) -> float:
    """Probability that a positive scores above a negative, ties counted half."""
    labels, scores = _ranking_inputs(pos, neg, "auroc")
    return float(roc_auc_score(labels, scores))


def average_precision(pos, neg) -> float:
    """
    Average precision of the score as a detector of ``pos``.

    Samples are ranked by value, highest first; tied scores form a single
    threshold, so an all-tied ranking scores exactly the positive prevalence.
    """
    labels, scores = _ranking_inputs(pos, neg, "average_precision")
    return float(average_precision_score(labels, scores))


def _rows(matrix) -> np.ndarray:
    return matrix.data if isinstance(matrix, ActivationMatrix) else np.asarray(matrix, dtype=np.float64)


def probe_accuracy(train_pos, train_neg, test_pos, test_neg,
                   config: Optional[ProbeConfig] = None) -> float:
    """
    Balanced test accuracy of a logistic probe trained to separate pos from neg.

    Args:
        train_pos, train_neg, test_pos, test_neg: ActivationMatrix (or n × M arrays),
            at least 4 rows each

    Returns:
        Mean of the per-class recalls on the test split
    """
    splits = [_rows(m) for m in (train_pos, train_neg, test_pos, test_neg)]
    if any(split.ndim != 2 or split.shape[0] < 4 for split in splits):
        raise InvalidInputError("probe_accuracy needs at least 4 rows in every split")
    train_pos, train_neg, test_pos, test_neg = splits

    X = np.vstack([train_pos, train_neg])
    y = np.r_[np.ones(train_pos.shape[0]), np.zeros(train_neg.shape[0])]
    probe = LogisticProbe(config).fit(X, y)

    recall_pos = probe.predict(test_pos).mean()
    recall_neg = 1.0 - probe.predict(test_neg).mean()
    return float(0.5 * (recall_pos + recall_neg))


@dataclass
class LayerScore:
    """Mean per-activation W1 to the target at one layer, before and after."""
    layer_id: int
    w1_before: float
    w1_after: float


@dataclass
class EvalReport:
    """Outcome of one intervention at one strength."""
    method: str
    lambda_value: float
    lambda_semantics: str
    layers: List[LayerScore] = field(default_factory=list)
    probe_before: Optional[float] = None
    probe_after: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        for score in self.layers:
            if score.w1_before < 0 or score.w1_after < 0:
                raise InvalidInputError(f"W1 must be >= 0 at layer {score.layer_id}")
        for accuracy in (self.probe_before, self.probe_after):
            if accuracy is not None and not 0.0 <= accuracy <= 1.0:
                raise InvalidInputError(f"Probe accuracy must lie in [0, 1], got {accuracy}")

    def score_for(self, layer_id: int) -> LayerScore:
        for score in self.layers:
            if score.layer_id == layer_id:
                return score
        raise KeyError(layer_id)

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_rows(self) -> List[dict]:
        return [{
            'label': self.label,
            'method': self.method,
            'lambda_semantics': self.lambda_semantics,
            'lambda': self.lambda_value,
            'layer_id': score.layer_id,
            'w1_before': score.w1_before,
            'w1_after': score.w1_after,
            'probe_before': '' if self.probe_before is None else self.probe_before,
            'probe_after': '' if self.probe_after is None else self.probe_after,
        } for score in self.layers]


CSV_FIELDS = ['label', 'method', 'lambda_semantics', 'lambda', 'layer_id',
              'w1_before', 'w1_after', 'probe_before', 'probe_after']


def reports_to_csv(reports: Sequence[EvalReport]) -> str:
    """Flat CSV, one row per layer × report."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        writer.writerows(report.csv_rows())
    return buffer.getvalue()


def write_reports_csv(reports: Sequence[EvalReport], path: str) -> None:
    atomic_write_text(path, reports_to_csv(reports))
    logger.info(f"Wrote {len(reports)} report(s) to {path}")


def write_report_json(reports: Sequence[EvalReport], path: str) -> None:
    payload = {'version': 1, 'reports': [report.to_dict() for report in reports]}
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")
    logger.info(f"Wrote {len(reports)} report(s) to {path}")
