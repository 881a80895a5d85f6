"""Topical-corpus construction and human-in-the-loop sentence labeling.

Pipeline pieces, in the order a corpus is usually built:

* :mod:`topicforge.linkindex` / :mod:`topicforge.ngd` -- build a link-graph
  index and collect documents related to a seed topic.
* :mod:`topicforge.corpus` -- sentence records, heuristic label propagation,
  sampling, consensus labels.
* :mod:`topicforge.keywords` / :mod:`topicforge.nb` -- the glossary baseline
  and the Naive Bayes classifier used inside the labeling loop.
* :mod:`topicforge.active` -- entropy instance queries, information-gain
  feature queries, round orchestration.
* :mod:`topicforge.service` -- the labeling-session HTTP service with an
  append-only event log.
* :mod:`topicforge.evaluation` -- bootstrap metrics and rater agreement.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND  # noqa: F401
