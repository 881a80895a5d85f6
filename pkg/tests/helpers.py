"""Independent reference implementations (oracles) used by the tests.

Everything here is deliberately written from scratch on plain dicts, sets,
and direct float math, so it shares no code path with the package.
"""

import itertools
import math
import random
import re
from collections import defaultdict

# -- toy link graph -------------------------------------------------------------

TOY_EDGES = [
    ("2", "1"), ("3", "1"), ("4", "1"),
    ("2", "5"), ("3", "5"),
    ("4", "6"), ("7", "6"), ("8", "6"),
]


def plain_adjacency(edges):
    """(titles, outlinks, inlinks) as plain dict-of-set structures."""
    titles = set()
    outl = defaultdict(set)
    inl = defaultdict(set)
    for s, t in edges:
        titles.add(s)
        titles.add(t)
        if s != t:
            outl[s].add(t)
            inl[t].add(s)
    return titles, outl, inl


def brute_ngd(inlinks, total, a, b):
    """Direct formula evaluation; None when the inlink sets do not intersect."""
    aa, bb = inlinks[a], inlinks[b]
    inter = aa & bb
    if not aa or not bb or not inter:
        return None
    num = math.log(max(len(aa), len(bb))) - math.log(len(inter))
    den = math.log(total) - math.log(min(len(aa), len(bb)))
    return num / den


def brute_traverse(edges, seed, threshold, iterations):
    """Exhaustive level-by-level expansion on plain sets.

    Returns {title: (score, hop)}. Mirrors the documented policy: candidates
    are articles co-linked with a frontier article; each keeps its minimum
    score over the frontier articles it shares a parent with; only
    sub-threshold candidates are collected and expanded; an article collected
    at an earlier hop is never rescored.
    """
    titles, outl, inl = plain_adjacency(edges)
    total = len(titles)
    collected = {}
    done = {seed}
    frontier = {seed}
    for hop in range(1, iterations + 1):
        candidates = defaultdict(set)
        for a in frontier:
            for parent in inl[a]:
                for b in outl[parent]:
                    if b not in frontier:
                        candidates[b].add(a)
        next_frontier = set()
        for b, sources in candidates.items():
            if b in done:
                continue
            best = None
            for a in sources:
                value = brute_ngd(inl, total, a, b)
                if value is not None and (best is None or value < best):
                    best = value
            if best is not None and best < threshold:
                collected[b] = (best, hop)
                done.add(b)
                next_frontier.add(b)
        frontier = next_frontier
        if not frontier:
            break
    return collected


def random_edges(rng, max_nodes=64, density=3.0):
    """Random edge list over up to max_nodes titles; at least one edge."""
    n = rng.randint(2, max_nodes)
    m = rng.randint(1, max(1, int(density * n)))
    names = [f"n{i}" for i in range(n)]
    return [(rng.choice(names), rng.choice(names)) for _ in range(m)]


# -- Naive Bayes oracle -----------------------------------------------------------

_WORD = re.compile(r"[^\W_]+", re.UNICODE)


def oracle_features(text, bigrams):
    tokens = _WORD.findall(text.lower())
    feats = list(tokens)
    if bigrams:
        feats += [f"{x}_{y}" for x, y in zip(tokens, tokens[1:])]
    return feats


def oracle_posterior(docs, sentence, alpha=1.0, bigrams=False, boosts=None, classes=None):
    """Direct (non-log) Bayes computation on hand-counted tables.

    Priors are instance counts plus alpha; each class likelihood multiplies
    (count + alpha + boost) / (class total + alpha * |V|) per feature
    occurrence, ignoring features outside the vocabulary; boosts inflate
    numerators only.
    """
    boosts = boosts or {}
    if classes is None:
        classes = sorted({label for _, label in docs} | {c for _, c in boosts})
    vocab = set()
    counts = {c: defaultdict(float) for c in classes}
    totals = {c: 0.0 for c in classes}
    n_docs = {c: 0 for c in classes}
    for text, label in docs:
        n_docs[label] += 1
        for f in oracle_features(text, bigrams):
            vocab.add(f)
            counts[label][f] += 1
            totals[label] += 1
    for f, _c in boosts:
        vocab.add(f)

    v = len(vocab)
    prior_total = sum(n_docs[c] + alpha for c in classes)
    weights = {}
    for c in classes:
        w = (n_docs[c] + alpha) / prior_total
        for f in oracle_features(sentence, bigrams):
            if f not in vocab:
                continue
            num = counts[c][f] + alpha + boosts.get((f, c), 0.0)
            w *= num / (totals[c] + alpha * v)
        weights[c] = w
    z = sum(weights.values())
    return {c: w / z for c, w in weights.items()}


# -- mutual information oracle -------------------------------------------------------


def brute_mutual_information(table):
    """MI of a joint table (rows x cols), zero entries skipped."""
    rows = len(table)
    cols = len(table[0])
    p_i = [sum(table[i]) for i in range(rows)]
    p_j = [sum(table[i][j] for i in range(rows)) for j in range(cols)]
    total = 0.0
    for i in range(rows):
        for j in range(cols):
            p = table[i][j]
            if p > 0:
                total += p * math.log(p / (p_i[i] * p_j[j]))
    return total


def brute_per_class_scores(table):
    cols = len(table[0])
    p_i = [sum(row) for row in table]
    p_j = [sum(table[i][j] for i in range(len(table))) for j in range(cols)]
    scores = []
    for j in range(cols):
        s = 0.0
        for i in range(len(table)):
            p = table[i][j]
            if p > 0:
                s += p * math.log(p / (p_i[i] * p_j[j]))
        scores.append(s)
    return scores


# -- bootstrap oracle -------------------------------------------------------------------


def _confusion_f1(pred, gold):
    tp = sum(1 for p, g in zip(pred, gold) if p == 1 and g == 1)
    fp = sum(1 for p, g in zip(pred, gold) if p == 1 and g == 0)
    fn = sum(1 for p, g in zip(pred, gold) if p == 0 and g == 1)
    if tp + fp == 0 and tp + fn == 0:
        return 1.0  # vacuous resample: no positives anywhere, no mistakes
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    return 2 * prec * rec / (prec + rec) if prec + rec else 0.0


def exact_bootstrap_f1_mean(pred, gold):
    """Expected resampled F1 by enumerating all n^n index tuples (n small)."""
    n = len(pred)
    total = 0.0
    for idx in itertools.product(range(n), repeat=n):
        total += _confusion_f1([pred[i] for i in idx], [gold[i] for i in idx])
    return total / n ** n


def sampled_bootstrap_f1_mean(pred, gold, n_rounds, seed):
    """Independent Monte Carlo resampling oracle on stdlib random."""
    rng = random.Random(seed)
    n = len(pred)
    total = 0.0
    for _ in range(n_rounds):
        idx = [rng.randrange(n) for _ in range(n)]
        total += _confusion_f1([pred[i] for i in idx], [gold[i] for i in idx])
    return total / n_rounds


# -- synthetic labeling corpus ---------------------------------------------------------

SIGNAL_WORDS = [f"topic{i:02d}" for i in range(20)]
BACKGROUND_WORDS = [f"word{i:03d}" for i in range(180)]


def planted_sentence(rng, positive):
    length = rng.randint(8, 14)
    words = [rng.choice(BACKGROUND_WORDS) for _ in range(length)]
    if positive:
        for _ in range(rng.randint(1, 3)):
            words[rng.randrange(len(words))] = rng.choice(SIGNAL_WORDS)
    return " ".join(words)


def planted_corpus(rng, size, positive_rate=0.3):
    """[(text, label)] with the label decided by planted signal words."""
    out = []
    for _ in range(size):
        positive = rng.random() < positive_rate
        text = planted_sentence(rng, positive)
        label = "positive" if any(w in SIGNAL_WORDS for w in text.split()) else "negative"
        out.append((text, label))
    return out


def run_labeling_simulation(strategy, seed, n_train=500, n_test=200, rounds=10,
                            k_instances=10, m_features=5):
    """One simulated labeling session against a rule-based oracle.

    ``strategy`` is "entropy" (rank unlabeled sentences by posterior entropy)
    or "random" (uniform picks). Both arms share the cold-start batch and the
    same feature-query protocol: per round up to m_features features ranked
    for the positive class are answered when they are planted signal words.
    Returns macro-F1 of the final model on a held-out test set.
    """
    from topicforge.active import RoundAnswers, make_state, rank_features, rank_instances, run_round
    from topicforge.corpus import SentenceRecord
    from topicforge.evaluation import macro_f1
    from topicforge.nb import NbConfig

    rng = random.Random(seed)
    train_pairs = planted_corpus(rng, n_train)
    test_pairs = planted_corpus(rng, n_test)
    records = [SentenceRecord(id=f"s{i:04d}", text=t) for i, (t, _) in enumerate(train_pairs)]
    oracle = {f"s{i:04d}": label for i, (_, label) in enumerate(train_pairs)}

    state = make_state(records, config=NbConfig(bigrams=False))
    for rnd in range(rounds):
        unlabeled_ids = sorted(state.pool.unlabeled)
        if not unlabeled_ids:
            break
        pick_rng = random.Random(seed * 7919 + rnd)
        if state.model is None or strategy == "random":
            picked = pick_rng.sample(unlabeled_ids, min(k_instances, len(unlabeled_ids)))
        else:
            picked = [
                q.sentence_id
                for q in rank_instances(state.model, state.pool.unlabeled.values(), k_instances)
            ]
        answered_features = []
        if state.model is not None and m_features > 0:
            queries = rank_features(
                state.model,
                state.pool.labeled.values(),
                state.pool.unlabeled.values(),
                m_features,
                exclude=state.pool.labeled_features,
            )
            for q in queries:
                if (
                    q.label == "positive"
                    and q.feature in SIGNAL_WORDS
                    and len(answered_features) < m_features
                ):
                    answered_features.append((q.feature, "positive"))
        run_round(state, RoundAnswers({sid: oracle[sid] for sid in picked}, answered_features))

    predictions = [state.model.predict(text) == "positive" for text, _ in test_pairs]
    gold = [label == "positive" for _, label in test_pairs]
    return macro_f1(predictions, gold)
