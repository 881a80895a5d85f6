"""Multinomial Naive Bayes over unigram+bigram features.

This is the model retrained inside the labeling loop, so it supports two
extra evidence channels besides labeled sentences:

* labeled features: an oracle assertion that a feature indicates a class,
  injected as a pseudocount boost. Boosts enter the per-class likelihood
  numerators only (the normalizer stays observed counts + smoothing mass),
  which guarantees a labeled feature can only pull posteriors toward its
  class, no matter what else the sentence contains.
* an optional single semi-supervised pass: the base model probabilistically
  labels the unlabeled pool and its predicted class distributions are added
  as fractional feature counts. Class priors stay on labeled instances only.

Everything is computed in log space; posteriors always normalize to 1.
"""

import json
import math
import re
from collections import Counter
from dataclasses import dataclass

from .errors import ModelError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

BIGRAM_SEP = "_"

MODEL_FORMAT = "topicforge-nb"
MODEL_VERSION = 1


def tokenize(text: str) -> list:
    return _TOKEN_RE.findall(text.lower())


def featurize(text: str, bigrams: bool = True) -> list:
    """Unigrams plus adjacent bigrams, as a multiset (list)."""
    tokens = tokenize(text)
    feats = list(tokens)
    if bigrams:
        feats.extend(
            tokens[i] + BIGRAM_SEP + tokens[i + 1] for i in range(len(tokens) - 1)
        )
    return feats


@dataclass(frozen=True)
class NbConfig:
    alpha: float = 1.0  # Laplace smoothing
    boost: float = 50.0  # pseudocount for an oracle-labeled feature
    bigrams: bool = True
    em_pass: bool = False  # one semi-supervised pass over the unlabeled pool

    def __post_init__(self):
        if self.alpha <= 0:
            raise ModelError("alpha must be > 0")
        if self.boost < 0:
            raise ModelError("boost must be >= 0")


def _text_of(item) -> str:
    return item.text if hasattr(item, "text") else item


def _text_label(item):
    if hasattr(item, "text") and hasattr(item, "label"):
        return item.text, item.label
    text, label = item
    return text, label


class NbModel:
    """Trained model; immutable once built, safe to share across threads."""

    def __init__(self, classes, prior_counts, feature_counts, labeled_features,
                 alpha, bigrams):
        self.classes = tuple(classes)
        self.prior_counts = dict(prior_counts)
        self.feature_counts = {c: dict(feature_counts.get(c, {})) for c in self.classes}
        self.labeled_features = dict(labeled_features)
        self.alpha = float(alpha)
        self.bigrams = bool(bigrams)
        self.vocabulary = set()
        for counts in self.feature_counts.values():
            self.vocabulary.update(counts)
        self.vocabulary.update(f for f, _ in self.labeled_features)
        self._totals = {c: sum(self.feature_counts[c].values()) for c in self.classes}
        self._log_prior_total = math.log(sum(self.prior_counts.values()))
        v = len(self.vocabulary)
        self._log_denom = {
            c: math.log(self._totals[c] + self.alpha * v) if v else 0.0
            for c in self.classes
        }

    def featurize(self, text: str) -> list:
        return featurize(text, self.bigrams)

    def predict_proba(self, text: str) -> dict:
        """Posterior distribution over classes; out-of-vocabulary features
        contribute nothing, so an all-OOV sentence returns the priors."""
        counts = Counter(f for f in self.featurize(text) if f in self.vocabulary)
        log_posts = []
        for c in self.classes:
            lp = math.log(self.prior_counts[c]) - self._log_prior_total
            class_counts = self.feature_counts[c]
            for f, m in counts.items():
                num = class_counts.get(f, 0.0) + self.alpha + self.labeled_features.get((f, c), 0.0)
                lp += m * (math.log(num) - self._log_denom[c])
            log_posts.append(lp)
        peak = max(log_posts)
        weights = [math.exp(lp - peak) for lp in log_posts]
        total = sum(weights)
        return {c: w / total for c, w in zip(self.classes, weights)}

    def predict(self, text: str) -> str:
        dist = self.predict_proba(text)
        return max(self.classes, key=lambda c: (dist[c], -self.classes.index(c)))

    # -- serialization ------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "classes": list(self.classes),
            "alpha": self.alpha,
            "bigrams": self.bigrams,
            "prior_counts": self.prior_counts,
            "feature_counts": self.feature_counts,
            "labeled_features": [[f, c, b] for (f, c), b in sorted(self.labeled_features.items())],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "NbModel":
        if obj.get("format") != MODEL_FORMAT:
            raise ModelError("not a topicforge model file")
        if obj.get("version") != MODEL_VERSION:
            raise ModelError(
                f"model version {obj.get('version')}, expected {MODEL_VERSION}"
            )
        return cls(
            classes=obj["classes"],
            prior_counts=obj["prior_counts"],
            feature_counts=obj["feature_counts"],
            labeled_features={(f, c): b for f, c, b in obj["labeled_features"]},
            alpha=obj["alpha"],
            bigrams=obj["bigrams"],
        )


def save_model(model: NbModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json_obj(), fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def load_model(path) -> NbModel:
    with open(path, "r", encoding="utf-8") as fh:
        return NbModel.from_json_obj(json.load(fh))


def train(labeled, labeled_features=None, unlabeled=None, config: NbConfig | None = None,
          classes=None) -> NbModel:
    """Fit the model on labeled sentences, oracle-labeled features, and
    (optionally, when config.em_pass) one probabilistic pass over unlabeled
    sentences.

    ``labeled``: sentence records or (text, label) pairs.
    ``labeled_features``: {(feature, class): boost} or (feature, class) pairs,
    which get config.boost.
    """
    config = config or NbConfig()

    pairs = [_text_label(item) for item in (labeled or [])]
    if isinstance(labeled_features, dict):
        boosts = dict(labeled_features)
    else:
        boosts = {(f, c): config.boost for f, c in (labeled_features or [])}
    if any(b < 0 for b in boosts.values()):
        raise ModelError("labeled-feature boosts must be >= 0")

    if not pairs and not boosts:
        raise ModelError("no class evidence: need labeled sentences or labeled features")

    if classes is None:
        classes = sorted({label for _, label in pairs} | {c for _, c in boosts})
    classes = tuple(classes)
    for _, label in pairs:
        if label not in classes:
            raise ModelError(f"label {label!r} outside classes {classes}")
    for _, c in boosts:
        if c not in classes:
            raise ModelError(f"labeled feature class {c!r} outside classes {classes}")

    prior_counts = {c: config.alpha for c in classes}
    feature_counts: dict = {c: {} for c in classes}
    for text, label in pairs:
        prior_counts[label] += 1
        counts = feature_counts[label]
        for f in featurize(text, config.bigrams):
            counts[f] = counts.get(f, 0.0) + 1.0

    model = NbModel(classes, prior_counts, feature_counts, boosts,
                    config.alpha, config.bigrams)

    if config.em_pass and unlabeled:
        for item in unlabeled:
            text = _text_of(item)
            dist = model.predict_proba(text)
            feats = Counter(featurize(text, config.bigrams))
            for c in classes:
                weight = dist[c]
                if weight <= 0.0:
                    continue
                counts = feature_counts[c]
                for f, m in feats.items():
                    counts[f] = counts.get(f, 0.0) + weight * m
        model = NbModel(classes, prior_counts, feature_counts, boosts,
                        config.alpha, config.bigrams)

    return model
