"""Kernel backend selection.

The hot loops of graph scoring (sorted-adjacency intersection and batched
relatedness scores) exist twice: a Cython extension (topicforge._ngdkern)
and a pure-Python/numpy fallback (topicforge._ngdpy). The compiled one is
used when importable; setting TOPIC_FORGE_PURE=1 forces the fallback.

``benchmarks/bench_kernels.py`` compares the two implementations.
"""

import os

if os.environ.get("TOPIC_FORGE_PURE"):
    from . import _ngdpy as _impl

    BACKEND = "pure"
else:
    try:
        from . import _ngdkern as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _ngdpy as _impl  # type: ignore[no-redef]

        BACKEND = "pure"

intersect_size = _impl.intersect_size
score_pairs = _impl.score_pairs

__all__ = ["BACKEND", "intersect_size", "score_pairs"]
