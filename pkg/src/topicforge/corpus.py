"""Sentence records: splitting, heuristic label propagation, sampling,
consensus labels, and the JSONL interchange format.

A record is one sentence plus provenance describing where its label came
from (heuristic propagation, a manual rater, the active-learning loop, or
multi-rater consensus). All sampling here is a pure function of the input
multiset and the seed.
"""

import json
import random
from dataclasses import dataclass, field
from importlib import resources

from .errors import CorpusError

POSITIVE = "positive"
NEGATIVE = "negative"
LABELS = (NEGATIVE, POSITIVE)  # canonical processing order

SOURCES = ("wiki", "tenk", "claims", "other")
PROVENANCES = ("heuristic", "manual", "active_learning", "consensus")

_RECORD_FIELDS = ("id", "text", "source", "doc_id", "label", "provenance", "rater_labels")


def _check_label(label, allow_none=False):
    if label is None and allow_none:
        return None
    if label not in LABELS:
        raise CorpusError(f"invalid label: {label!r}")
    return label


@dataclass
class SentenceRecord:
    """One sentence with its origin document and label provenance."""

    id: str
    text: str
    source: str = "other"
    doc_id: str = ""
    label: str | None = None
    provenance: str | None = None
    rater_labels: list | None = None  # list of (rater_id, label) pairs
    rule_ids: list | None = None  # optional guideline rule citations

    def __post_init__(self):
        if self.source not in SOURCES:
            raise CorpusError(f"invalid source: {self.source!r}")
        _check_label(self.label, allow_none=True)
        if self.provenance is not None and self.provenance not in PROVENANCES:
            raise CorpusError(f"invalid provenance: {self.provenance!r}")
        if self.provenance == "consensus" and len(self.rater_labels or []) < 2:
            raise CorpusError(f"record {self.id}: consensus provenance requires >=2 rater labels")
        if self.provenance == "heuristic" and (not self.doc_id or self.label is None):
            raise CorpusError(
                f"record {self.id}: heuristic provenance requires a labeled origin document"
            )
        if self.rater_labels is not None:
            self.rater_labels = [(str(r), _check_label(l)) for r, l in self.rater_labels]

    def to_json(self) -> str:
        obj = {
            "id": self.id,
            "text": self.text,
            "source": self.source,
            "doc_id": self.doc_id,
            "label": self.label,
            "provenance": self.provenance,
            "rater_labels": (
                [[r, l] for r, l in self.rater_labels] if self.rater_labels is not None else None
            ),
        }
        if self.rule_ids:
            obj["rule_ids"] = list(self.rule_ids)
        return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SentenceRecord":
        try:
            return cls(
                id=str(obj["id"]),
                text=obj["text"],
                source=obj.get("source", "other"),
                doc_id=obj.get("doc_id", ""),
                label=obj.get("label"),
                provenance=obj.get("provenance"),
                rater_labels=obj.get("rater_labels"),
                rule_ids=obj.get("rule_ids"),
            )
        except KeyError as exc:
            raise CorpusError(f"sentence record missing field {exc}") from exc


def read_records(path) -> list:
    """Read one SentenceRecord per JSONL line; blank lines are skipped."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {line_no}: invalid JSON: {exc}") from exc
            records.append(SentenceRecord.from_json_obj(obj))
    return records


def write_records(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json())
            fh.write("\n")


# -- sentence splitting --------------------------------------------------------

_TERMINALS = ".!?"


def default_abbreviations() -> frozenset:
    """The shipped abbreviation table (entries lowercase, no trailing dot)."""
    text = resources.files("topicforge").joinpath("data/abbreviations.txt").read_text("utf-8")
    entries = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.add(line.lower())
    return frozenset(entries)


_DEFAULT_ABBREVIATIONS = None


def _abbreviations():
    global _DEFAULT_ABBREVIATIONS
    if _DEFAULT_ABBREVIATIONS is None:
        _DEFAULT_ABBREVIATIONS = default_abbreviations()
    return _DEFAULT_ABBREVIATIONS


def _token_before(text: str, pos: int) -> str:
    """Word token (letters/digits/inner dots) ending just before ``pos``."""
    start = pos
    while start > 0 and (text[start - 1].isalnum() or text[start - 1] == "."):
        start -= 1
    return text[start:pos].strip(".").lower()


def split_sentences(text: str, abbreviations=None) -> list:
    """Deterministic sentence split.

    A boundary is a run of terminal punctuation (. ! ?) followed by
    whitespace and then an uppercase character, except when a lone period
    directly follows a token from the abbreviation table. Joining the output
    reproduces the input's non-whitespace content exactly.
    """
    if abbreviations is None:
        abbreviations = _abbreviations()
    sentences = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINALS:
            j = i
            while j + 1 < n and text[j + 1] in _TERMINALS:
                j += 1
            is_boundary = False
            if j + 1 < n and text[j + 1].isspace():
                k = j + 1
                while k < n and text[k].isspace():
                    k += 1
                if k < n and text[k].isupper():
                    is_boundary = True
                    if j == i and text[i] == "." and _token_before(text, i) in abbreviations:
                        is_boundary = False
            if is_boundary:
                sentence = text[start:j + 1].strip()
                if sentence:
                    sentences.append(sentence)
                start = j + 1
            i = j + 1
        else:
            i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


# -- documents and label propagation ------------------------------------------


@dataclass
class Document:
    doc_id: str
    text: str
    label: str | None = None
    source: str = "other"


def propagate_labels(docs) -> list:
    """Split each labeled document into sentences, every sentence inheriting
    the document label with provenance ``heuristic``."""
    records = []
    for doc in docs:
        if doc.label is None:
            raise CorpusError(f"document {doc.doc_id}: cannot propagate from an unlabeled document")
        _check_label(doc.label)
        for i, sentence in enumerate(split_sentences(doc.text)):
            records.append(
                SentenceRecord(
                    id=f"{doc.doc_id}#s{i:04d}",
                    text=sentence,
                    source=doc.source,
                    doc_id=doc.doc_id,
                    label=doc.label,
                    provenance="heuristic",
                )
            )
    return records


# -- sampling ------------------------------------------------------------------


def _pool(records, label):
    return sorted((r for r in records if r.label == label), key=lambda r: r.id)


def sample_balanced(records, n_per_class: int, seed: int) -> list:
    """Draw n_per_class records per label without replacement.

    Pools are canonicalized by record id and consumed from one seeded RNG in
    label order (negative first), so the result depends only on the input
    multiset and the seed.
    """
    if n_per_class < 0:
        raise CorpusError("n_per_class must be >= 0")
    if n_per_class == 0:
        return []
    rng = random.Random(seed)
    out = []
    for label in LABELS:
        pool = _pool(records, label)
        if len(pool) < n_per_class:
            raise CorpusError(
                f"not enough {label} records: have {len(pool)}, need {n_per_class}"
            )
        out.extend(rng.sample(pool, n_per_class))
    return out


def prediction_based_sample(records, predictions: dict, k_per_predicted_class: int, seed: int) -> list:
    """Draw k records from the predicted-positive pool and k from the
    predicted-negative pool, uniformly without replacement.

    ``predictions`` maps record id -> predicted label and must cover every
    record.
    """
    if k_per_predicted_class < 0:
        raise CorpusError("k_per_predicted_class must be >= 0")
    if k_per_predicted_class == 0:
        return []
    pools = {label: [] for label in LABELS}
    for rec in records:
        if rec.id not in predictions:
            raise CorpusError(f"missing prediction for record {rec.id}")
        pools[_check_label(predictions[rec.id])].append(rec)
    rng = random.Random(seed)
    out = []
    for label in LABELS:
        pool = sorted(pools[label], key=lambda r: r.id)
        if not pool:
            raise CorpusError(f"predicted-{label} pool empty")
        if len(pool) < k_per_predicted_class:
            raise CorpusError(
                f"predicted-{label} pool has {len(pool)} records, need {k_per_predicted_class}"
            )
        out.extend(rng.sample(pool, k_per_predicted_class))
    return out


def consensus_label(rater_labels) -> str:
    """Negative only if every rater said negative, positive otherwise."""
    labels = [_check_label(l) for l in rater_labels]
    if not labels:
        raise CorpusError("consensus requires at least one rater label")
    return NEGATIVE if all(l == NEGATIVE for l in labels) else POSITIVE


def apply_consensus(records) -> list:
    """Consensus-label every record that carries rater labels."""
    out = []
    for rec in records:
        if not rec.rater_labels:
            raise CorpusError(f"record {rec.id}: no rater labels to build consensus from")
        out.append(
            SentenceRecord(
                id=rec.id,
                text=rec.text,
                source=rec.source,
                doc_id=rec.doc_id,
                label=consensus_label([l for _, l in rec.rater_labels]),
                provenance="consensus",
                rater_labels=rec.rater_labels,
                rule_ids=rec.rule_ids,
            )
        )
    return out


# -- document-level splits -------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    """Document-id partition; no document may straddle two splits."""

    train: frozenset = field(default_factory=frozenset)
    dev: frozenset = field(default_factory=frozenset)
    test: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "train", frozenset(self.train))
        object.__setattr__(self, "dev", frozenset(self.dev))
        object.__setattr__(self, "test", frozenset(self.test))
        overlap = (self.train & self.dev) | (self.train & self.test) | (self.dev & self.test)
        if overlap:
            raise CorpusError(f"documents in multiple splits: {sorted(overlap)[:5]}")

    def split_of(self, doc_id: str):
        if doc_id in self.train:
            return "train"
        if doc_id in self.dev:
            return "dev"
        if doc_id in self.test:
            return "test"
        return None


def split_records(records, spec: SplitSpec) -> dict:
    """Partition sentence records by their document's split."""
    out = {"train": [], "dev": [], "test": []}
    for rec in records:
        split = spec.split_of(rec.doc_id)
        if split is None:
            raise CorpusError(f"document {rec.doc_id!r} is not assigned to any split")
        out[split].append(rec)
    return out


def split_counts(records, spec: SplitSpec) -> dict:
    """Per-split positive/negative sentence counts."""
    parts = split_records(records, spec)
    return {
        split: {
            POSITIVE: sum(1 for r in recs if r.label == POSITIVE),
            NEGATIVE: sum(1 for r in recs if r.label == NEGATIVE),
        }
        for split, recs in parts.items()
    }


# -- annotation guidelines -------------------------------------------------------


def load_guidelines(path=None) -> dict:
    """Load the versioned labeling-guideline tree (shipped copy by default)."""
    if path is None:
        text = resources.files("topicforge").joinpath("data/labeling_guidelines.json").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    guidelines = json.loads(text)
    for key in ("name", "version", "rules"):
        if key not in guidelines:
            raise CorpusError(f"guideline file missing {key!r}")
    return guidelines


def guideline_rule_ids(guidelines: dict) -> set:
    """All rule ids in the tree, e.g. {'1', '1a', '1b.i', ...}."""
    ids = set()

    def walk(rules):
        for rule in rules:
            ids.add(rule["id"])
            walk(rule.get("children", []))

    walk(guidelines["rules"])
    return ids
