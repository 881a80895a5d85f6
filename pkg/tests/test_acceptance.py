"""Acceptance suite: one test per criterion, each printing a PASS line.

Expected values marked as derived were computed with the independent
oracles in helpers.py before being frozen here; the oracles never call the
code paths they check.
"""

import json
import math
import random
import threading
import time

import numpy as np
import pytest
import requests

from topicforge.active import entropy, info_gain, rank_instances
from topicforge.corpus import SentenceRecord
from topicforge.evaluation import agreement_level, bootstrap_metrics, fleiss_kappa, point_metrics
from topicforge.linkindex import build_index
from topicforge.nb import NbConfig, NbModel, train
from topicforge.ngd import UNRELATED, ngd, traverse
from topicforge.service import make_server

from helpers import (
    TOY_EDGES,
    brute_mutual_information,
    brute_traverse,
    exact_bootstrap_f1_mean,
    plain_adjacency,
    random_edges,
    run_labeling_simulation,
)

# frozen outputs of the direct-formula oracle (helpers.brute_ngd on the toy graph)
NGD_1_5 = 0.2924812503605782
NGD_1_6 = 1.1200851578342716


def _ok(name):
    print(f"[ACCEPTANCE] {name}: PASS")


def test_criterion_ngd_toy_graph():
    start = time.perf_counter()
    index = build_index(TOY_EDGES)
    got_15 = ngd(index, "1", "5")
    got_16 = ngd(index, "1", "6")
    assert got_15 == pytest.approx(NGD_1_5, abs=1e-9)
    assert got_16 == pytest.approx(NGD_1_6, abs=1e-9)
    assert got_15 < got_16
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _ok(f"ngd toy graph ({elapsed:.3f}s)")


def test_criterion_ngd_property_suite():
    start = time.perf_counter()
    rng = random.Random(20_240_601)
    n_graphs = 0
    while n_graphs < 200:
        edges = random_edges(rng, max_nodes=64)
        index = build_index(edges)
        titles = sorted(index.titles())
        _, _, inl = plain_adjacency(edges)
        total = index.total_articles

        for _ in range(12):
            a, b = rng.choice(titles), rng.choice(titles)
            ab = ngd(index, a, b)
            ba = ngd(index, b, a)
            inter = inl[a] & inl[b]
            if not inl[a] or not inl[b] or not inter:
                assert ab is UNRELATED and ba is UNRELATED
            else:
                assert ab == ba  # symmetry, exact
                identical = inl[a] == inl[b]
                assert (ab == 0.0) == identical

        seed_title = rng.choice(titles)
        t1, t2 = sorted((rng.uniform(0.2, 1.8), rng.uniform(0.2, 1.8)))
        small = traverse(index, seed_title, t1, 2)
        large = traverse(index, seed_title, t2, 2)
        assert set(small) <= set(large)

        if total <= 16:
            expected = brute_traverse(edges, seed_title, t2, 2)
            assert set(large) == set(expected)
            for title, (score, hop) in expected.items():
                assert large[title].value == pytest.approx(score, abs=1e-12)
                assert large[title].hop == hop
        n_graphs += 1

    # dedicated sweep of small graphs so the oracle comparison is never starved
    for _ in range(120):
        edges = random_edges(rng, max_nodes=16)
        index = build_index(edges)
        seed_title = rng.choice(sorted(index.titles()))
        threshold = rng.choice([0.4, 0.9, 1.5, 4.0])
        got = traverse(index, seed_title, threshold, 2)
        expected = brute_traverse(edges, seed_title, threshold, 2)
        assert set(got) == set(expected)
        for title, (score, hop) in expected.items():
            assert got[title].value == pytest.approx(score, abs=1e-12)
            assert got[title].hop == hop

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    _ok(f"ngd property suite, {n_graphs} graphs ({elapsed:.1f}s)")


def test_criterion_entropy():
    for n in range(2, 9):
        assert entropy([1.0 / n] * n) == pytest.approx(math.log(n), abs=1e-12)
        point = [0.0] * n
        point[n // 2] = 1.0
        assert entropy(point) == 0.0

    model = train(
        [("alpha beta", "positive"), ("gamma delta", "negative")],
        config=NbConfig(bigrams=False),
    )
    rng = random.Random(404)
    vocab = ["alpha", "beta", "gamma", "delta", "epsilon"]
    for _ in range(100):
        pool = [
            (f"s{i:03d}", " ".join(rng.choices(vocab, k=rng.randint(1, 6))))
            for i in range(rng.randint(2, 30))
        ]
        ranked = rank_instances(model, pool, len(pool))
        top = ranked[0]
        max_entropy = max(entropy(model.predict_proba(text)) for _, text in pool)
        assert top.entropy == pytest.approx(max_entropy, abs=0.0)
    _ok("entropy and uncertainty ranking")


def test_criterion_information_gain():
    grid = [i / 10 for i in range(11)]
    checked = 0
    for a in grid:
        for b in grid:
            for c in grid:
                for d in grid:
                    s = a + b + c + d
                    if s == 0:
                        continue
                    table = [[a / s, b / s], [c / s, d / s]]
                    _, total = info_gain(np.array(table))
                    assert total == pytest.approx(
                        brute_mutual_information(table), abs=1e-12
                    )
                    checked += 1
    assert checked == 11 ** 4 - 1

    _, independent = info_gain(np.array([[0.25, 0.25], [0.25, 0.25]]))
    assert independent == pytest.approx(0.0, abs=1e-12)
    scores, aligned = info_gain(np.array([[0.5, 0.0], [0.0, 0.5]]))
    assert aligned == pytest.approx(math.log(2), abs=1e-12)
    assert scores[1] == pytest.approx(0.5 * math.log(2), abs=1e-12)
    _ok(f"information gain vs brute-force MI ({checked} tables)")


def test_criterion_naive_bayes():
    model = train(
        [("warm climate", "positive"), ("cold beer", "negative")],
        config=NbConfig(bigrams=False),
    )
    assert model.predict_proba("climate")["positive"] == pytest.approx(2 / 3, abs=1e-9)

    rng = random.Random(8080)
    classes = ("negative", "positive")
    for _ in range(1000):
        vocab = [f"w{i}" for i in range(rng.randint(2, 9))]
        docs = [
            (" ".join(rng.choices(vocab, k=rng.randint(1, 7))), rng.choice(classes))
            for _ in range(rng.randint(1, 10))
        ]
        model = train(docs, config=NbConfig(alpha=rng.choice([0.5, 1.0, 2.0]), bigrams=False),
                      classes=classes)
        sentence = " ".join(rng.choices(vocab + ["oov"], k=rng.randint(0, 10)))
        dist = model.predict_proba(sentence)
        assert abs(sum(dist.values()) - 1.0) < 1e-12

    for _ in range(100):
        vocab = [f"w{i}" for i in range(rng.randint(2, 8))]
        docs = [
            (" ".join(rng.choices(vocab, k=rng.randint(1, 6))), rng.choice(classes))
            for _ in range(rng.randint(1, 8))
        ]
        base_boosts = {}
        if rng.random() < 0.4:
            base_boosts[(rng.choice(vocab), rng.choice(classes))] = rng.uniform(0, 40)
        model = train(docs, labeled_features=base_boosts,
                      config=NbConfig(bigrams=False), classes=classes)
        feature = rng.choice(vocab)
        cls = rng.choice(classes)
        sentence = " ".join([feature] + rng.choices(vocab, k=rng.randint(0, 9)))
        before = model.predict_proba(sentence)[cls]
        raised = dict(model.labeled_features)
        raised[(feature, cls)] = raised.get((feature, cls), 0.0) + rng.uniform(0.5, 60)
        bumped = NbModel(model.classes, model.prior_counts, model.feature_counts,
                         raised, model.alpha, model.bigrams)
        assert bumped.predict_proba(sentence)[cls] >= before - 1e-12
    _ok("naive bayes oracle, normalization, boost monotonicity")


def test_criterion_active_learning_simulation():
    start = time.perf_counter()
    wins = 0
    margins = []
    for seed in range(10):
        entropy_f1 = run_labeling_simulation("entropy", seed)
        random_f1 = run_labeling_simulation("random", seed)
        wins += entropy_f1 >= random_f1
        margins.append(entropy_f1 - random_f1)
    elapsed = time.perf_counter() - start
    assert wins >= 7, f"entropy sampling won only {wins}/10 seeds (margins: {margins})"
    assert elapsed < 60.0
    _ok(f"labeling-loop simulation, {wins}/10 wins ({elapsed:.1f}s)")


def test_criterion_bootstrap():
    gold = ["positive", "negative"] * 3
    report = bootstrap_metrics(gold, gold, n_bootstrap=500, seed=7)
    for metric in ("accuracy", "precision", "recall", "f1"):
        assert report.means[metric] == 1.0
        assert report.stds[metric] == 0.0

    pred = [1, 1, 0, 1, 0, 0, 1]
    labels = [1, 0, 0, 1, 1, 0, 1]
    assert bootstrap_metrics(pred, labels, 400, seed=42) == bootstrap_metrics(
        pred, labels, 400, seed=42
    )

    all_positive = [1, 1, 1, 1]
    two_two = [1, 1, 0, 0]
    report = bootstrap_metrics(all_positive, two_two, n_bootstrap=1000, seed=42)
    assert point_metrics(all_positive, two_two).f1 == 2 / 3
    oracle_mean = exact_bootstrap_f1_mean(all_positive, two_two)
    assert report.means["f1"] == pytest.approx(oracle_mean, abs=0.05)
    _ok("bootstrap evaluation")


def test_criterion_kappa():
    unanimous = np.array([[3, 0], [0, 3], [3, 0], [0, 3]])
    report = fleiss_kappa(unanimous)
    assert report.kappa == 1.0
    assert report.agreement_level == "AlmostPerfect"

    balanced = np.array([[2, 0], [0, 2], [1, 1], [1, 1]])
    assert fleiss_kappa(balanced).kappa == pytest.approx(0.0, abs=1e-12)

    assert agreement_level(0.65) == "Moderate"
    _ok("kappa agreement")


def test_criterion_service_replay(tmp_path):
    corpus = [
        SentenceRecord(id=f"u{i:03d}", text=f"sentence {i} alpha beta gamma")
        for i in range(25)
    ] + [
        SentenceRecord(id="seed-p", text="warm warm signal", label="positive",
                       provenance="manual"),
        SentenceRecord(id="seed-n", text="cold cold noise", label="negative",
                       provenance="manual"),
    ]

    server = make_server(port=0, data_dir=tmp_path, default_corpus=corpus)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        sid = requests.post(f"{base}/sessions", json={}).json()["session_id"]
        for rnd in range(3):
            queried = requests.get(
                f"{base}/sessions/{sid}/queries", params={"instances": 4, "features": 2}
            ).json()
            requests.post(
                f"{base}/sessions/{sid}/labels",
                json={
                    "token": f"round-{rnd}",
                    "rater_id": "sim",
                    "instances": [
                        {"id": q["sentence_id"],
                         "label": "positive" if i % 2 else "negative"}
                        for i, q in enumerate(queried["instances"])
                    ],
                    "features": [{"feature": f"alpha{rnd}", "class": "positive"}],
                },
            ).raise_for_status()
        before = requests.get(
            f"{base}/sessions/{sid}/queries", params={"instances": 10, "features": 5}
        ).content
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)

    # fresh process over the same data dir replays the event log
    revived = make_server(port=0, data_dir=tmp_path, default_corpus=None)
    thread2 = threading.Thread(target=revived.serve_forever, daemon=True)
    thread2.start()
    base2 = f"http://127.0.0.1:{revived.server_address[1]}"
    try:
        after = requests.get(
            f"{base2}/sessions/{sid}/queries", params={"instances": 10, "features": 5}
        ).content
    finally:
        revived.shutdown()
        revived.server_close()
        thread2.join(timeout=5)

    assert after == before
    _ok("service crash-replay, byte-identical queries")
