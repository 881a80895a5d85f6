"""Bootstrap metric estimation and inter-rater agreement.

Point metrics treat "positive" as the target class. Bootstrap reports are
the mean and population standard deviation of each metric over seeded
resamples (prediction/label pairs drawn with replacement). Agreement uses
Fleiss' kappa for >=2 raters (Cohen's for exactly two rating vectors), and
kappa values translate to verbal levels via contiguous half-open ranges:
[0,.20) None, [.20,.40) Minimal, [.40,.60) Weak, [.60,.80) Moderate,
[.80,.90) Strong, [.90,1] AlmostPerfect. Negative kappa (below-chance
agreement) reports as None.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import NEGATIVE, POSITIVE
from .errors import EvaluationError

METRICS = ("accuracy", "precision", "recall", "f1")

AGREEMENT_LEVELS = (
    (0.90, "AlmostPerfect"),
    (0.80, "Strong"),
    (0.60, "Moderate"),
    (0.40, "Weak"),
    (0.20, "Minimal"),
)


def _as_binary(values, what):
    out = []
    for v in values:
        if v == POSITIVE or v is True or v == 1:
            out.append(1)
        elif v == NEGATIVE or v is False or v == 0:
            out.append(0)
        else:
            raise EvaluationError(f"{what}: not a binary label: {v!r}")
    return np.asarray(out, dtype=np.int8)


@dataclass
class PointMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    degenerate: tuple = ()  # metrics whose denominator was 0 and reported as 0

    def as_dict(self) -> dict:
        return {m: getattr(self, m) for m in METRICS}


def point_metrics(predictions, labels) -> PointMetrics:
    """Accuracy, precision, recall, F1 with "positive" as the target class.

    A zero denominator (no predicted positives, no actual positives, or a
    zero precision+recall sum for F1) yields 0 for that metric and flags it
    in ``degenerate``.
    """
    pred = _as_binary(predictions, "predictions")
    gold = _as_binary(labels, "labels")
    if len(pred) != len(gold):
        raise EvaluationError(f"length mismatch: {len(pred)} predictions vs {len(gold)} labels")
    if len(pred) == 0:
        raise EvaluationError("empty evaluation set")

    tp = int(np.sum((pred == 1) & (gold == 1)))
    fp = int(np.sum((pred == 1) & (gold == 0)))
    fn = int(np.sum((pred == 0) & (gold == 1)))
    degenerate = []

    accuracy = float(np.mean(pred == gold))
    if tp + fp == 0:
        precision = 0.0
        degenerate.append("precision")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        degenerate.append("recall")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        f1 = 0.0
        degenerate.append("f1")
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return PointMetrics(accuracy, precision, recall, f1, tuple(degenerate))


def macro_f1(predictions, labels) -> float:
    """Unweighted mean of the F1 for the positive and the negative class."""
    pred = _as_binary(predictions, "predictions")
    gold = _as_binary(labels, "labels")
    f_pos = point_metrics(pred, gold).f1
    f_neg = point_metrics(1 - pred, 1 - gold).f1
    return (f_pos + f_neg) / 2


@dataclass
class EvalReport:
    means: dict
    stds: dict
    point: PointMetrics
    n_bootstrap: int
    seed: int
    n_examples: int

    def to_json_obj(self) -> dict:
        return {
            "metrics": {
                m: {"mean": self.means[m], "std": self.stds[m], "point": getattr(self.point, m)}
                for m in METRICS
            },
            "degenerate": list(self.point.degenerate),
            "n_bootstrap": self.n_bootstrap,
            "seed": self.seed,
            "n_examples": self.n_examples,
        }

    def to_table(self) -> str:
        """Aligned text table: metric, bootstrap mean, "(std)"."""
        lines = [f"{'Metric':<10} {'Mean':>8} {'Std':>8}"]
        for m in METRICS:
            lines.append(f"{m:<10} {self.means[m]:>8.4f} ({self.stds[m]:.4f})")
        return "\n".join(lines)


def _resample_metrics(pred, gold) -> PointMetrics:
    """Point metrics for one resample, with the vacuous case promoted.

    A resample containing no actual positives and no predicted positives has
    every denominator at 0 yet the classifier made zero mistakes on it, so
    precision/recall/F1 count as 1.0 there; any other degenerate case keeps
    the 0-with-flag rule.
    """
    pm = point_metrics(pred, gold)
    if "precision" in pm.degenerate and "recall" in pm.degenerate:
        return PointMetrics(pm.accuracy, 1.0, 1.0, 1.0, pm.degenerate)
    return pm


def bootstrap_metrics(predictions, labels, n_bootstrap: int = 1000, seed: int = 42) -> EvalReport:
    """Mean and population std of each metric over n_bootstrap resamples of
    (prediction, label) pairs with replacement; deterministic per seed.

    Resamples are scored by _resample_metrics, so an all-negative resample of
    an error-free classifier still counts as perfect."""
    if n_bootstrap < 1:
        raise EvaluationError("n_bootstrap must be >= 1")
    pred = _as_binary(predictions, "predictions")
    gold = _as_binary(labels, "labels")
    if len(pred) != len(gold):
        raise EvaluationError(f"length mismatch: {len(pred)} predictions vs {len(gold)} labels")
    if len(pred) == 0:
        raise EvaluationError("empty evaluation set")

    rng = np.random.default_rng(seed)
    n = len(pred)
    samples = {m: np.empty(n_bootstrap) for m in METRICS}
    for b in range(n_bootstrap):
        idx = rng.integers(0, n, n)
        pm = _resample_metrics(pred[idx], gold[idx])
        for m in METRICS:
            samples[m][b] = getattr(pm, m)

    return EvalReport(
        means={m: float(samples[m].mean()) for m in METRICS},
        stds={m: float(samples[m].std()) for m in METRICS},
        point=point_metrics(pred, gold),
        n_bootstrap=n_bootstrap,
        seed=seed,
        n_examples=n,
    )


# -- inter-rater agreement -----------------------------------------------------


def agreement_level(kappa: float) -> str:
    if not -1.0 - 1e-12 <= kappa <= 1.0 + 1e-12:
        raise EvaluationError(f"kappa out of range: {kappa}")
    for lower, level in AGREEMENT_LEVELS:
        if kappa >= lower:
            return level
    return "None"


@dataclass
class KappaReport:
    kappa: float
    agreement_level: str
    n_items: int
    n_raters: int

    def to_json_obj(self) -> dict:
        return {
            "kappa": self.kappa,
            "agreement_level": self.agreement_level,
            "n_items": self.n_items,
            "n_raters": self.n_raters,
        }


def fleiss_kappa(rating_matrix) -> KappaReport:
    """Fleiss' kappa from an items x categories matrix of rater counts.

    Every item must carry the same number of ratings n >= 2. Kappa is
    (P_bar - P_e) / (1 - P_e) with P_bar the mean per-item pair agreement
    and P_e the agreement expected from the marginal category proportions;
    complete agreement (P_bar = 1) is 1 by convention even when P_e = 1.
    """
    matrix = np.asarray(rating_matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 2:
        raise EvaluationError("rating matrix must be items x categories with >=2 categories")
    if (matrix < 0).any() or (matrix != np.floor(matrix)).any():
        raise EvaluationError("rating matrix entries must be non-negative integers")
    row_sums = matrix.sum(axis=1)
    n = row_sums[0]
    if (row_sums != n).any():
        raise EvaluationError("ragged rating matrix: items have different rater counts")
    if n < 2:
        raise EvaluationError("need at least 2 raters per item")

    p_item = (np.sum(matrix * (matrix - 1), axis=1)) / (n * (n - 1))
    p_bar = float(p_item.mean())
    p_cat = matrix.sum(axis=0) / matrix.sum()
    p_e = float(np.dot(p_cat, p_cat))
    if p_bar == 1.0:
        kappa = 1.0
    else:
        kappa = (p_bar - p_e) / (1.0 - p_e)
    return KappaReport(
        kappa=float(kappa),
        agreement_level=agreement_level(float(kappa)),
        n_items=matrix.shape[0],
        n_raters=int(n),
    )


def cohen_kappa(ratings_a, ratings_b) -> KappaReport:
    """Cohen's kappa for two raters' label vectors over the same items."""
    a = list(ratings_a)
    b = list(ratings_b)
    if len(a) != len(b):
        raise EvaluationError("rating vectors differ in length")
    if not a:
        raise EvaluationError("no items")
    categories = sorted(set(a) | set(b))
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    p_e = sum(
        (a.count(c) / n) * (b.count(c) / n) for c in categories
    )
    if p_o == 1.0:
        kappa = 1.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    return KappaReport(
        kappa=float(kappa),
        agreement_level=agreement_level(float(kappa)),
        n_items=n,
        n_raters=2,
    )


def read_rating_csv(path) -> np.ndarray:
    """CSV of per-item rater counts per category; optional non-numeric header."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = [c.strip() for c in line.split(",")]
            if line_no == 1 and not all(_is_int(c) for c in cells):
                continue  # header row
            if not all(_is_int(c) for c in cells):
                raise EvaluationError(f"{path}: line {line_no}: non-integer rating count")
            rows.append([int(c) for c in cells])
    if not rows:
        raise EvaluationError(f"{path}: no rating rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise EvaluationError(f"{path}: rows have different column counts")
    return np.asarray(rows, dtype=int)


def _is_int(cell: str) -> bool:
    try:
        int(cell)
        return True
    except ValueError:
        return False


def report_json(obj) -> str:
    return json.dumps(obj.to_json_obj(), ensure_ascii=False, sort_keys=True, indent=2)
