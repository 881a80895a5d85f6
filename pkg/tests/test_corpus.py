import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topicforge.corpus import (
    Document,
    SentenceRecord,
    SplitSpec,
    apply_consensus,
    consensus_label,
    guideline_rule_ids,
    load_guidelines,
    prediction_based_sample,
    propagate_labels,
    read_records,
    sample_balanced,
    split_counts,
    split_records,
    split_sentences,
    write_records,
)
from topicforge.errors import CorpusError


# -- sentence splitting ----------------------------------------------------------


def test_split_two_sentences():
    assert split_sentences("It rains. It pours.") == ["It rains.", "It pours."]


def test_split_abbreviation_guard():
    assert split_sentences("Dr. Smith spoke.") == ["Dr. Smith spoke."]
    assert split_sentences("See fig. 4 for details. Next point.") == [
        "See fig. 4 for details.",
        "Next point.",
    ]


def test_split_empty():
    assert split_sentences("") == []
    assert split_sentences("   \n\t ") == []


def test_split_requires_uppercase_continuation():
    assert split_sentences("pH 7.4 is neutral. pH 8 is basic.") == [
        "pH 7.4 is neutral. pH 8 is basic."
    ]
    assert split_sentences("Stop! Now.") == ["Stop!", "Now."]
    assert split_sentences("Really?! Yes.") == ["Really?!", "Yes."]


def test_split_no_terminal_punctuation():
    assert split_sentences("no terminal punctuation") == ["no terminal punctuation"]


@given(st.text(max_size=400))
@settings(max_examples=200, deadline=None)
def test_split_preserves_non_whitespace_content(text):
    joined = "".join(split_sentences(text))
    assert "".join(joined.split()) == "".join(text.split())


def test_split_deterministic():
    text = "One. Two! Three? Four e.g. five. Six."
    assert split_sentences(text) == split_sentences(text)


# -- records and JSONL -----------------------------------------------------------


def _rec(i, label=None, **kw):
    return SentenceRecord(id=f"s{i:03d}", text=f"sentence {i}", label=label, **kw)


def test_record_round_trip(tmp_path):
    records = [
        _rec(1, "positive", provenance="manual"),
        _rec(2, "negative", provenance="manual", rater_labels=[("r1", "negative")]),
        SentenceRecord(
            id="s003",
            text="from doc",
            source="wiki",
            doc_id="d1",
            label="positive",
            provenance="heuristic",
        ),
        _rec(4),
    ]
    path = tmp_path / "records.jsonl"
    write_records(records, path)
    loaded = read_records(path)
    assert loaded == records


def test_record_rule_ids_round_trip(tmp_path):
    rec = SentenceRecord(
        id="a", text="t", label="negative", provenance="manual", rule_ids=["4"]
    )
    path = tmp_path / "r.jsonl"
    write_records([rec], path)
    assert read_records(path)[0].rule_ids == ["4"]
    assert "rule_ids" in path.read_text()
    # absent when not set
    write_records([_rec(1, "positive", provenance="manual")], path)
    assert "rule_ids" not in path.read_text()


def test_record_validation():
    with pytest.raises(CorpusError):
        SentenceRecord(id="x", text="t", label="maybe")
    with pytest.raises(CorpusError):
        SentenceRecord(id="x", text="t", source="web")
    with pytest.raises(CorpusError):
        SentenceRecord(id="x", text="t", provenance="consensus", rater_labels=[("r1", "positive")])
    with pytest.raises(CorpusError):
        SentenceRecord(id="x", text="t", label="positive", provenance="heuristic", doc_id="")


def test_read_records_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "a", "text": "t"}\nnot json\n', encoding="utf-8")
    with pytest.raises(CorpusError) as exc:
        read_records(path)
    assert "line 2" in str(exc.value)


# -- propagation -------------------------------------------------------------------


def test_propagate_single_doc():
    docs = [Document("d1", "One fact. Two facts. Three facts.", "positive", "wiki")]
    records = propagate_labels(docs)
    assert len(records) == 3
    assert all(r.label == "positive" for r in records)
    assert all(r.provenance == "heuristic" for r in records)
    assert all(r.doc_id == "d1" for r in records)
    assert len({r.id for r in records}) == 3


def test_propagate_mixed_corpus():
    docs = [
        Document("p1", "A one. A two.", "positive"),
        Document("p2", "B one. B two.", "positive"),
        Document("n1", "C one.", "negative"),
    ]
    records = propagate_labels(docs)
    assert sum(1 for r in records if r.label == "positive") == 4
    assert sum(1 for r in records if r.label == "negative") == 1


def test_propagate_empty_and_unlabeled():
    assert propagate_labels([]) == []
    with pytest.raises(CorpusError):
        propagate_labels([Document("d", "Text here.", None)])


# -- sampling ---------------------------------------------------------------------


def _mixed_records(n_pos, n_neg):
    recs = [_rec(i, "positive", provenance="manual") for i in range(n_pos)]
    recs += [_rec(100 + i, "negative", provenance="manual") for i in range(n_neg)]
    return recs


def test_sample_balanced_deterministic():
    records = _mixed_records(10, 10)
    a = sample_balanced(records, 3, seed=7)
    b = sample_balanced(records, 3, seed=7)
    assert [r.id for r in a] == [r.id for r in b]
    assert sum(1 for r in a if r.label == "positive") == 3
    assert sum(1 for r in a if r.label == "negative") == 3
    assert len({r.id for r in a}) == 6  # without replacement


def test_sample_balanced_order_insensitive():
    records = _mixed_records(8, 8)
    shuffled = records[:]
    random.Random(0).shuffle(shuffled)
    assert [r.id for r in sample_balanced(records, 4, seed=5)] == [
        r.id for r in sample_balanced(shuffled, 4, seed=5)
    ]


def test_sample_balanced_zero_and_errors():
    records = _mixed_records(2, 10)
    assert sample_balanced(records, 0, seed=1) == []
    with pytest.raises(CorpusError) as exc:
        sample_balanced(records, 3, seed=1)
    assert "positive" in str(exc.value)


def test_prediction_based_sample():
    records = _mixed_records(50, 50)
    predictions = {r.id: ("positive" if i % 5 < 2 else "negative") for i, r in enumerate(records)}
    picked = prediction_based_sample(records, predictions, 10, seed=3)
    assert len(picked) == 20
    by_pred = {"positive": 0, "negative": 0}
    for r in picked:
        by_pred[predictions[r.id]] += 1
    assert by_pred == {"positive": 10, "negative": 10}


def test_prediction_based_sample_empty_pool():
    records = _mixed_records(4, 4)
    predictions = {r.id: "negative" for r in records}
    with pytest.raises(CorpusError) as exc:
        prediction_based_sample(records, predictions, 1, seed=0)
    assert "predicted-positive pool empty" in str(exc.value)


def test_prediction_based_sample_requires_coverage():
    records = _mixed_records(2, 2)
    with pytest.raises(CorpusError):
        prediction_based_sample(records, {}, 1, seed=0)


def test_prediction_based_sample_zero():
    assert prediction_based_sample(_mixed_records(2, 2), {}, 0, seed=0) == []


# -- consensus ---------------------------------------------------------------------


def test_consensus_rule():
    assert consensus_label(["negative"] * 4) == "negative"
    assert consensus_label(["negative", "negative", "positive", "negative"]) == "positive"
    assert consensus_label(["positive"]) == "positive"


def test_consensus_empty_errors():
    with pytest.raises(CorpusError):
        consensus_label([])


@given(st.lists(st.sampled_from(["positive", "negative"]), min_size=1, max_size=8))
def test_consensus_permutation_invariant(labels):
    rng = random.Random(0)
    shuffled = labels[:]
    rng.shuffle(shuffled)
    assert consensus_label(labels) == consensus_label(shuffled)


def test_apply_consensus_sets_provenance():
    rec = SentenceRecord(
        id="a",
        text="t",
        rater_labels=[("r1", "negative"), ("r2", "positive")],
    )
    out = apply_consensus([rec])[0]
    assert out.label == "positive"
    assert out.provenance == "consensus"


# -- splits -------------------------------------------------------------------------


def test_split_spec_disjointness():
    with pytest.raises(CorpusError):
        SplitSpec(train={"a"}, dev={"a"}, test=set())


def test_split_records_by_document():
    spec = SplitSpec(train={"d1"}, dev={"d2"}, test={"d3"})
    records = propagate_labels(
        [
            Document("d1", "A one. A two.", "positive"),
            Document("d2", "B one.", "negative"),
            Document("d3", "C one.", "positive"),
        ]
    )
    parts = split_records(records, spec)
    assert {r.doc_id for r in parts["train"]} == {"d1"}
    assert {r.doc_id for r in parts["dev"]} == {"d2"}
    assert {r.doc_id for r in parts["test"]} == {"d3"}
    counts = split_counts(records, spec)
    assert counts["train"] == {"positive": 2, "negative": 0}


def test_split_records_unassigned_doc():
    spec = SplitSpec(train={"d1"}, dev=set(), test=set())
    rec = SentenceRecord(id="x", text="t", doc_id="other")
    with pytest.raises(CorpusError):
        split_records([rec], spec)


# -- guidelines -----------------------------------------------------------------------


def test_guidelines_load_and_ids():
    guide = load_guidelines()
    ids = guideline_rule_ids(guide)
    assert {"1", "1a", "1b.i", "1d", "2", "3", "4"} <= ids
    assert guide["version"]


def test_guideline_rule_1d_text():
    guide = load_guidelines()
    rule1 = next(r for r in guide["rules"] if r["id"] == "1")
    rule1d = next(r for r in rule1["children"] if r["id"] == "1d")
    assert "clean energy" in rule1d["text"]
