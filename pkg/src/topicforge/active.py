"""Active-learning queries and round orchestration.

Instance queries rank unlabeled sentences by posterior entropy (most
uncertain first). Feature queries rank features per class by an
information-gain score between the feature's presence indicator and the
class, estimated from hard labels (weight 1) plus the model's probabilistic
labels on the unlabeled pool (fractional weight). A round moves the
oracle's answers into the labeled pool and retrains the model.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import SentenceRecord
from .errors import CorpusError
from .nb import NbConfig, NbModel, train


@dataclass(frozen=True)
class InstanceQuery:
    sentence_id: str
    entropy: float
    rank: int  # 1-based; entropy non-increasing in rank


@dataclass(frozen=True)
class FeatureQuery:
    feature: str
    label: str  # the class whose ranking this row belongs to
    score: float
    rank: int  # 1-based within the class


@dataclass
class AlRoundLog:
    round: int
    new_instance_labels: int
    new_feature_labels: int
    labeled_size: int
    unlabeled_size: int
    metrics: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "round": self.round,
            "new_instance_labels": self.new_instance_labels,
            "new_feature_labels": self.new_feature_labels,
            "labeled_size": self.labeled_size,
            "unlabeled_size": self.unlabeled_size,
            "metrics": self.metrics,
        }


def read_feature_labels(path) -> list:
    """TSV of ``feature<TAB>class`` oracle assertions, one per line."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[0] or not fields[1]:
                raise CorpusError(f"{path}: line {line_no}: expected feature<TAB>class")
            out.append((fields[0], fields[1]))
    return out


def append_round_log(log: AlRoundLog, path) -> None:
    """Append one round log as a JSON line."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(log.to_json_obj(), ensure_ascii=False, sort_keys=True) + "\n")


def entropy(dist) -> float:
    """Shannon entropy -sum p ln p of a distribution (0 ln 0 := 0)."""
    probs = list(dist.values()) if isinstance(dist, dict) else list(dist)
    if any(p < 0 for p in probs):
        raise ValueError("negative probability")
    if abs(sum(probs) - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {sum(probs)}, not 1")
    return -sum(p * math.log(p) for p in probs if p > 0.0)


def rank_instances(model: NbModel, unlabeled, k: int) -> list:
    """Top-k unlabeled sentences by posterior entropy, descending.

    Ties break on sentence id ascending, so the ranking is invariant under
    permutation of the pool. k larger than the pool returns the whole pool.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    scored = []
    for item in unlabeled:
        sid, text = (item.id, item.text) if isinstance(item, SentenceRecord) else item
        scored.append((-entropy(model.predict_proba(text)), sid))
    scored.sort()
    return [
        InstanceQuery(sentence_id=sid, entropy=-neg_h, rank=r)
        for r, (neg_h, sid) in enumerate(scored[:k], start=1)
    ]


def feature_stats(labeled, probabilistic, classes, features=None) -> dict:
    """Joint presence/class table per feature.

    ``labeled``: (feature_collection, label) pairs, each weighing 1.
    ``probabilistic``: (feature_collection, distribution) pairs, weighing
    each class by its predicted probability.

    Returns {feature: 2 x n_classes array}, rows indexed by the presence
    indicator (0 = absent, 1 = present), normalized to sum 1 per feature.
    """
    classes = tuple(classes)
    index = {c: j for j, c in enumerate(classes)}
    class_mass = np.zeros(len(classes))
    presence: dict = {}
    restrict = None if features is None else set(features)

    def add(feats, weights):
        feats = set(feats)
        if restrict is not None:
            feats &= restrict
        np.add(class_mass, weights, out=class_mass)
        for f in feats:
            row = presence.get(f)
            if row is None:
                row = presence[f] = np.zeros(len(classes))
            np.add(row, weights, out=row)

    n_docs = 0
    for feats, label in labeled:
        if label not in index:
            raise ValueError(f"label {label!r} outside classes {classes}")
        w = np.zeros(len(classes))
        w[index[label]] = 1.0
        add(feats, w)
        n_docs += 1
    for feats, dist in probabilistic:
        w = np.zeros(len(classes))
        for c, p in dist.items():
            if p < 0:
                raise ValueError("negative probability in soft label")
            w[index[c]] = p
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("soft label does not sum to 1")
        add(feats, w)
        n_docs += 1

    if n_docs == 0:
        raise CorpusError("empty corpus: no labeled or probabilistically-labeled sentences")

    total = class_mass.sum()
    tables = {}
    wanted = presence.keys() if restrict is None else restrict
    for f in wanted:
        present = presence.get(f, np.zeros(len(classes)))
        table = np.vstack([(class_mass - present), present]) / total
        tables[f] = table
    return tables


def info_gain(table) -> tuple:
    """Per-class scores and their total for one joint presence/class table.

    score_j = sum over the presence indicator of
    P(I, y_j) * ln( P(I, y_j) / (P(I) * P(y_j)) ), zero entries dropped;
    the total over classes is the mutual information of the table.
    """
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[0] != 2:
        raise ValueError("expected a 2 x n_classes table")
    if (table < 0).any():
        raise ValueError("joint table entries must be >= 0")
    if abs(table.sum() - 1.0) > 1e-9:
        raise ValueError("joint table must sum to 1")
    p_i = table.sum(axis=1)
    p_j = table.sum(axis=0)
    scores = np.zeros(table.shape[1])
    for j in range(table.shape[1]):
        s = 0.0
        for i in (0, 1):
            p = table[i, j]
            if p > 0.0:
                s += p * math.log(p / (p_i[i] * p_j[j]))
        scores[j] = s
    return scores, float(scores.sum())


def rank_features(model: NbModel, labeled, unlabeled, m_per_class: int, exclude=()) -> list:
    """Per-class top-m features by information gain.

    ``labeled``: records or (text, label) pairs; ``unlabeled``: records or
    texts, probabilistically labeled by the model. Already-labeled
    (feature, class) pairs in ``exclude`` are skipped for that class's list;
    ties break on feature text.
    """
    if m_per_class < 0:
        raise ValueError("m_per_class must be >= 0")
    if m_per_class == 0:
        return []
    exclude = set(exclude)

    hard = []
    for item in labeled:
        text, label = (item.text, item.label) if isinstance(item, SentenceRecord) else item
        hard.append((set(model.featurize(text)), label))
    soft = []
    for item in unlabeled:
        text = item.text if isinstance(item, SentenceRecord) else item
        soft.append((set(model.featurize(text)), model.predict_proba(text)))

    tables = feature_stats(hard, soft, model.classes)
    per_class_scores = {c: [] for c in model.classes}
    for f in tables:
        scores, _ = info_gain(tables[f])
        for j, c in enumerate(model.classes):
            if (f, c) in exclude:
                continue
            per_class_scores[c].append((-scores[j], f))

    queries = []
    for c in model.classes:
        ranked = sorted(per_class_scores[c])[:m_per_class]
        queries.extend(
            FeatureQuery(feature=f, label=c, score=-neg, rank=r)
            for r, (neg, f) in enumerate(ranked, start=1)
        )
    return queries


# -- round orchestration -------------------------------------------------------


@dataclass
class AlPool:
    """Labeled/unlabeled sentence pools plus oracle-labeled features."""

    labeled: dict = field(default_factory=dict)  # id -> SentenceRecord (with label)
    unlabeled: dict = field(default_factory=dict)  # id -> SentenceRecord
    labeled_features: dict = field(default_factory=dict)  # (feature, class) -> boost

    def size(self) -> int:
        return len(self.labeled) + len(self.unlabeled)


@dataclass
class AlState:
    pool: AlPool
    config: NbConfig = field(default_factory=NbConfig)
    classes: tuple = ("negative", "positive")
    model: NbModel | None = None
    round: int = 0


@dataclass
class RoundAnswers:
    """Oracle answers for one round; unanswered queries are simply absent."""

    instance_labels: dict = field(default_factory=dict)  # id -> label
    feature_labels: list = field(default_factory=list)  # (feature, class) pairs


def make_state(records, config: NbConfig | None = None, classes=("negative", "positive")) -> AlState:
    """Initial state: labeled records seed the pool, the rest are queryable."""
    pool = AlPool()
    for rec in records:
        if rec.id in pool.labeled or rec.id in pool.unlabeled:
            raise CorpusError(f"duplicate sentence id: {rec.id}")
        if rec.label is None:
            pool.unlabeled[rec.id] = rec
        else:
            pool.labeled[rec.id] = rec
    state = AlState(pool=pool, config=config or NbConfig(), classes=tuple(classes))
    if state.pool.labeled or state.pool.labeled_features:
        state.model = _retrain(state)
    return state


def _retrain(state: AlState) -> NbModel:
    return train(
        labeled=list(state.pool.labeled.values()),
        labeled_features=state.pool.labeled_features,
        unlabeled=[r.text for r in state.pool.unlabeled.values()],
        config=state.config,
        classes=state.classes,
    )


def apply_answers(state: AlState, answers: RoundAnswers) -> tuple:
    """Move oracle answers into the pools without retraining.

    Returns (new instance labels, new feature labels). All answers are
    validated before any mutation, so a bad batch changes nothing.
    """
    for sid, label in answers.instance_labels.items():
        if sid not in state.pool.unlabeled:
            raise CorpusError(f"unknown or already-labeled sentence id: {sid}")
        if label not in state.classes:
            raise CorpusError(f"label {label!r} outside classes {state.classes}")
    for f, c in answers.feature_labels:
        if c not in state.classes:
            raise CorpusError(f"labeled feature class {c!r} outside classes {state.classes}")
        if not f:
            raise CorpusError("empty feature")

    for sid in sorted(answers.instance_labels):
        rec = state.pool.unlabeled.pop(sid)
        rec.label = answers.instance_labels[sid]
        rec.provenance = "active_learning"
        state.pool.labeled[sid] = rec

    new_features = 0
    for f, c in answers.feature_labels:
        if (f, c) not in state.pool.labeled_features:
            new_features += 1
        state.pool.labeled_features[(f, c)] = state.config.boost
    return len(answers.instance_labels), new_features


def run_round(state: AlState, answers: RoundAnswers) -> tuple:
    """Apply oracle answers, retrain, and log the round.

    Moves answered instances from the unlabeled to the labeled pool (their
    provenance becomes active_learning), registers labeled features at the
    configured boost, retrains the model, and increments the round counter.
    |labeled| + |unlabeled| is conserved. Empty answers still retrain.
    """
    n_instances, new_features = apply_answers(state, answers)
    state.model = _retrain(state)
    state.round += 1

    labeled = list(state.pool.labeled.values())
    correct = sum(1 for r in labeled if state.model.predict(r.text) == r.label)
    log = AlRoundLog(
        round=state.round,
        new_instance_labels=n_instances,
        new_feature_labels=new_features,
        labeled_size=len(state.pool.labeled),
        unlabeled_size=len(state.pool.unlabeled),
        metrics={
            "labeled_accuracy": correct / len(labeled) if labeled else 0.0,
            "labeled_per_class": {
                c: sum(1 for r in labeled if r.label == c) for c in state.classes
            },
        },
    )
    return state.model, log
