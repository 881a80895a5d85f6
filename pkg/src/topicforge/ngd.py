"""Link-based relatedness scoring and seed-anchored graph traversal.

The score between articles a and b is

    [log max(|A|,|B|) - log |A n B|] / [log |W| - log min(|A|,|B|)]

where A and B are the sets of articles linking to a and b and |W| is the
total article count. Natural log; the value is a ratio of log differences,
so any fixed base would give identical numbers. 0 means the two inlink sets
coincide; larger is less related. Pairs whose inlink sets do not intersect
(or are empty) get the UNRELATED sentinel instead of a signed infinity so
the value never leaks into float arithmetic.

The traversal expands a frontier from a seed article: collect the parents of
each frontier article, then all children of those parents (the co-linked
candidates), score every candidate against the frontier articles it shares a
parent with, and keep candidates scoring below the threshold as both result
entries and the next frontier. Each article keeps only the minimum score at
the minimum hop distance from the seed. The candidate space grows
exponentially per level, so the iteration cap is mandatory.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateGraphError, UnknownTitleError
from .linkindex import LinkIndex


class _Unrelated:
    """Sentinel score for pairs with no co-linking article."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNRELATED"


UNRELATED = _Unrelated()


@dataclass(frozen=True)
class NgdScore:
    """Best score of a collected article: value, the frontier article it was
    scored against, and the hop level at which it was first collected."""

    value: float
    reference: str
    hop: int


def ngd(index: LinkIndex, a: str, b: str):
    """Relatedness score between two known titles.

    Returns a float >= 0, or UNRELATED when the inlink sets do not intersect
    (including when either set is empty). Symmetric in (a, b).
    """
    ia = index.id_of(a)
    if ia is None:
        raise UnknownTitleError(a)
    ib = index.id_of(b)
    if ib is None:
        raise UnknownTitleError(b)
    indptr, indices = index.in_csr
    score = kernels.score_pairs(
        indptr,
        indices,
        np.asarray([ia], dtype=np.int32),
        np.asarray([ib], dtype=np.int32),
        index.total_articles,
    )[0]
    if np.isnan(score):
        raise DegenerateGraphError("degenerate graph: min(|A|,|B|) equals the article count")
    if np.isinf(score):
        return UNRELATED
    return float(score)


def traverse(index: LinkIndex, seed: str, threshold: float, max_iterations: int = 2) -> dict:
    """Collect articles related to ``seed``, mapping title -> NgdScore.

    Per iteration: frontier articles are scored against every co-linked
    candidate (candidates sharing at least one parent); a candidate keeps the
    minimum score over its co-linked frontier articles; candidates scoring
    below ``threshold`` enter the result at the current hop and form the next
    frontier. Articles already collected at a smaller hop are never rescored,
    so hops and scores are stable when max_iterations grows.
    """
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    seed_id = index.id_of(seed)
    if seed_id is None:
        raise UnknownTitleError(seed)

    indptr, indices = index.in_csr
    total = index.total_articles
    collected: dict = {}  # id -> (score, hop, reference id)
    visited = {seed_id}
    frontier = [seed_id]

    for hop in range(1, max_iterations + 1):
        if not frontier:
            break
        frontier_set = set(frontier)
        candidate_sources: dict = {}  # id -> set of frontier ids sharing a parent
        for a_id in frontier:
            for parent in index.inlink_ids(a_id):
                for b_id in index.outlink_ids(int(parent)):
                    b_id = int(b_id)
                    if b_id in frontier_set:
                        continue
                    candidate_sources.setdefault(b_id, set()).add(a_id)

        if not candidate_sources:
            break

        pair_a: list = []
        pair_b: list = []
        for b_id in candidate_sources:
            if b_id in visited:
                continue
            for a_id in candidate_sources[b_id]:
                pair_a.append(a_id)
                pair_b.append(b_id)
        if not pair_a:
            break

        scores = kernels.score_pairs(
            indptr,
            indices,
            np.asarray(pair_a, dtype=np.int32),
            np.asarray(pair_b, dtype=np.int32),
            total,
        )
        if np.isnan(scores).any():
            raise DegenerateGraphError(
                "degenerate graph: min(|A|,|B|) equals the article count"
            )

        # min-score reduction per candidate, ties resolved toward the smaller
        # reference id so parallel scoring cannot change the outcome
        best: dict = {}
        for a_id, b_id, score in zip(pair_a, pair_b, scores):
            if np.isinf(score):  # no co-linking article; never enters the result
                continue
            key = (float(score), a_id)
            if b_id not in best or key < best[b_id]:
                best[b_id] = key

        next_frontier = []
        for b_id in sorted(best):
            score, ref = best[b_id]
            # above-threshold candidates are dropped for this level but may be
            # rescored through a different frontier at a later hop
            if score < threshold:
                visited.add(b_id)
                collected[b_id] = (score, hop, ref)
                next_frontier.append(b_id)
        frontier = next_frontier

    return {
        index.title_of(b_id): NgdScore(value=score, reference=index.title_of(ref), hop=hop)
        for b_id, (score, hop, ref) in collected.items()
    }


def rank_candidates(result: dict) -> list:
    """Order a traversal result as (title, score, hop) tuples.

    Stable sort by hop ascending, then score ascending, then title.
    """
    return sorted(
        ((title, s.value, s.hop) for title, s in result.items()),
        key=lambda row: (row[2], row[1], row[0]),
    )
