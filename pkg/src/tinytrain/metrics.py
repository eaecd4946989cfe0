"""Classification metrics derived from a confusion matrix.

Rows index the true class, columns the predicted class. Per-class precision
and recall divide the diagonal by column and row sums respectively; classes
with an empty denominator score 0.0 and are listed as flagged so reports
can distinguish "never predicted" from "predicted badly".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .artifacts import format_table
from .errors import ShapeError
from .nn import Network, forward_pass
from .trainers import shaped_inputs


def confusion_matrix(y_true, y_pred, num_classes):
    """Count matrix (num_classes, num_classes); rows true, columns predicted."""
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    if t.shape != p.shape or t.ndim != 1:
        raise ShapeError(
            f"label vectors must be 1-D and equal length, got {t.shape} "
            f"and {p.shape}"
        )
    for name, arr in (("true", t), ("predicted", p)):
        if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
            raise ShapeError(
                f"{name} labels must lie in [0, {num_classes}), got range "
                f"[{arr.min()}, {arr.max()}]"
            )
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


def accuracy(cm):
    cm = np.asarray(cm)
    total = cm.sum()
    return float(cm.trace() / total) if total else 0.0


def precision_recall_f1(cm):
    """Per-class precision, recall, and F1 arrays from a confusion matrix.

    A class never predicted has precision 0; a class absent from the truth
    has recall 0; F1 is 0 whenever precision + recall is 0.
    """
    cm = np.asarray(cm, dtype=np.float64)
    diag = cm.diagonal()
    col = cm.sum(axis=0)
    row = cm.sum(axis=1)
    precision = np.divide(diag, col, out=np.zeros_like(diag), where=col > 0)
    recall = np.divide(diag, row, out=np.zeros_like(diag), where=row > 0)
    both = precision + recall
    f1 = np.divide(2.0 * precision * recall, both,
                   out=np.zeros_like(diag), where=both > 0)
    return precision, recall, f1


@dataclass
class MetricsReport:
    """Full evaluation summary: accuracy, per-class and macro P/R/F1."""

    num_samples: int
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: np.ndarray
    never_predicted: list
    never_true: list

    def to_dict(self):
        return {
            "num_samples": self.num_samples,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class": [
                {
                    "class": c,
                    "precision": float(self.precision[c]),
                    "recall": float(self.recall[c]),
                    "f1": float(self.f1[c]),
                }
                for c in range(len(self.precision))
            ],
            "confusion_matrix": self.confusion.tolist(),
            "never_predicted": self.never_predicted,
            "never_true": self.never_true,
        }

    def text(self):
        rows = [
            [str(c), f"{self.precision[c]:.4f}", f"{self.recall[c]:.4f}",
             f"{self.f1[c]:.4f}"]
            for c in range(len(self.precision))
        ]
        lines = [
            f"samples: {self.num_samples}",
            f"accuracy: {self.accuracy:.4f}",
            f"macro precision/recall/f1: {self.macro_precision:.4f} / "
            f"{self.macro_recall:.4f} / {self.macro_f1:.4f}",
            format_table(["class", "precision", "recall", "f1"], rows),
        ]
        if self.never_predicted:
            lines.append(f"classes never predicted: {self.never_predicted}")
        if self.never_true:
            lines.append(f"classes absent from truth: {self.never_true}")
        return "\n".join(lines)


def summarize(y_true, y_pred, num_classes):
    """Build a MetricsReport from label vectors."""
    cm = confusion_matrix(y_true, y_pred, num_classes)
    precision, recall, f1 = precision_recall_f1(cm)
    return MetricsReport(
        num_samples=int(cm.sum()),
        accuracy=accuracy(cm),
        precision=precision,
        recall=recall,
        f1=f1,
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        confusion=cm,
        never_predicted=[int(c) for c in np.nonzero(cm.sum(axis=0) == 0)[0]],
        never_true=[int(c) for c in np.nonzero(cm.sum(axis=1) == 0)[0]],
    )


def evaluate(net: Network, images, labels, batch_size=256):
    """Run the network over a labelled set and summarise predictions."""
    x = shaped_inputs(np.asarray(images, dtype=np.float64), net)
    y = np.asarray(labels)
    k = int(np.prod(net.layer_shapes[-1]))
    preds = np.empty(x.shape[0], dtype=np.int64)
    for lo in range(0, x.shape[0], batch_size):
        out = forward_pass(net, x[lo:lo + batch_size]).output
        preds[lo:lo + out.shape[0]] = out.argmax(axis=1)
    return summarize(y, preds, k)
