"""Immutable bidirectional link-graph index.

Four structures are precomputed at build time so that scoring never touches
raw edge data: title->id, id->title, outbound adjacency ("is linking") and
inbound adjacency ("is linked by"). Ids are dense integers assigned in
first-seen order; adjacency is stored as CSR with each row sorted ascending,
which keeps iteration deterministic and lets the scoring kernels intersect
rows with a linear merge.

The persisted form is a single binary file (magic ``CLIDX1``); the exact
layout is documented in docs/index_format.md and in save_index below.
"""

import io
import struct
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    EdgeParseError,
    IndexFileError,
    IndexVersionError,
    NotAnIndexError,
    TopicForgeError,
    TruncatedIndexError,
)

MAGIC = b"CLIDX1"
FORMAT_VERSION = 1


class LinkIndex:
    """Immutable link graph; build via build_index() or load_index()."""

    __slots__ = (
        "_title_to_id",
        "_titles",
        "_out_indptr",
        "_out_indices",
        "_in_indptr",
        "_in_indices",
    )

    def __init__(self, titles, out_indptr, out_indices, in_indptr, in_indices):
        self._titles = list(titles)
        self._title_to_id = {t: i for i, t in enumerate(self._titles)}
        self._out_indptr = out_indptr
        self._out_indices = out_indices
        self._in_indptr = in_indptr
        self._in_indices = in_indices

    # -- size ---------------------------------------------------------------

    @property
    def total_articles(self) -> int:
        """Count of distinct titles seen, used by score normalization."""
        return len(self._titles)

    def __len__(self) -> int:
        return len(self._titles)

    def __contains__(self, title: str) -> bool:
        return title in self._title_to_id

    # -- id/title mapping ----------------------------------------------------

    def id_of(self, title: str):
        """Dense id for a title, or None if unknown."""
        return self._title_to_id.get(title)

    def title_of(self, article_id: int) -> str:
        return self._titles[article_id]

    def titles(self) -> Iterator[str]:
        return iter(self._titles)

    # -- adjacency, id level (used by traversal and kernels) -----------------

    def inlink_ids(self, article_id: int) -> np.ndarray:
        """Sorted int32 ids of articles linking to ``article_id``."""
        return self._in_indices[self._in_indptr[article_id]:self._in_indptr[article_id + 1]]

    def outlink_ids(self, article_id: int) -> np.ndarray:
        return self._out_indices[self._out_indptr[article_id]:self._out_indptr[article_id + 1]]

    def inlink_count(self, article_id: int) -> int:
        return int(self._in_indptr[article_id + 1] - self._in_indptr[article_id])

    @property
    def in_csr(self):
        """(indptr, indices) of the inbound adjacency, for the kernels."""
        return self._in_indptr, self._in_indices

    # -- adjacency, title level ----------------------------------------------

    def inlinks(self, title: str) -> set:
        """Titles linking to ``title``; empty set for unknown/unlinked."""
        i = self._title_to_id.get(title)
        if i is None:
            return set()
        return {self._titles[j] for j in self.inlink_ids(i)}

    def outlinks(self, title: str) -> set:
        i = self._title_to_id.get(title)
        if i is None:
            return set()
        return {self._titles[j] for j in self.outlink_ids(i)}


def build_index(edges: Iterable[tuple]) -> LinkIndex:
    """Build a LinkIndex from (source_title, target_title) pairs.

    Titles are whitespace-trimmed; empty titles are rejected. Duplicate edges
    collapse to one, self-loops are dropped (an article linking itself carries
    no co-linking signal). An empty stream yields a valid empty index.
    """
    title_to_id: dict = {}
    titles: list = []

    def intern(title: str) -> int:
        i = title_to_id.get(title)
        if i is None:
            i = len(titles)
            title_to_id[title] = i
            titles.append(title)
        return i

    srcs: list = []
    dsts: list = []
    for src, dst in edges:
        src = src.strip()
        dst = dst.strip()
        if not src or not dst:
            raise TopicForgeError("empty title in edge stream")
        si = intern(src)
        di = intern(dst)
        if si == di:
            continue
        srcs.append(si)
        dsts.append(di)

    n = len(titles)
    if srcs:
        pairs = np.stack(
            [np.asarray(srcs, dtype=np.int32), np.asarray(dsts, dtype=np.int32)], axis=1
        )
        pairs = np.unique(pairs, axis=0)  # dedup; rows come back lexsorted
        out_src, out_dst = pairs[:, 0], pairs[:, 1]
    else:
        out_src = out_dst = np.empty(0, dtype=np.int32)

    out_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(out_src, minlength=n), out=out_indptr[1:])
    out_indices = np.ascontiguousarray(out_dst)

    # inbound CSR: group by target, sources ascending within each row
    order = np.lexsort((out_src, out_dst))
    in_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(out_dst, minlength=n), out=in_indptr[1:])
    in_indices = np.ascontiguousarray(out_src[order])

    return LinkIndex(titles, out_indptr, out_indices, in_indptr, in_indices)


def read_edge_file(path) -> Iterator[tuple]:
    """Yield (source, target) pairs from a TSV edge file.

    One edge per line, ``source<TAB>target``, UTF-8; blank lines and lines
    starting with ``#`` are skipped. Wrong field count or an empty title after
    trimming raises EdgeParseError with the 1-based line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise EdgeParseError(line_no, f"expected 2 tab-separated fields, got {len(fields)}")
            src, dst = fields[0].strip(), fields[1].strip()
            if not src or not dst:
                raise EdgeParseError(line_no, "empty title")
            yield src, dst


def build_index_from_file(path) -> LinkIndex:
    return build_index(read_edge_file(path))


# -- persistence --------------------------------------------------------------


def save_index(index: LinkIndex, path) -> None:
    """Write the index as a single binary file.

    Layout (all integers little-endian):
      magic ``CLIDX1`` (6 bytes), uint32 format version, uint32 article count,
      title table (per title: uint32 byte length + UTF-8 bytes),
      outbound section, inbound section. Each section holds one row per
      article id in order: uint32 link count followed by that many uint32
      target ids, sorted ascending.
    """
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<II", FORMAT_VERSION, len(index)))
    for title in index.titles():
        raw = title.encode("utf-8")
        buf.write(struct.pack("<I", len(raw)))
        buf.write(raw)
    for row_of in (index.outlink_ids, index.inlink_ids):
        for i in range(len(index)):
            row = row_of(i)
            buf.write(struct.pack("<I", row.size))
            buf.write(row.astype("<u4", copy=False).tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_index(path) -> LinkIndex:
    """Load an index written by save_index; inverse on all queries."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) or blob[: len(MAGIC)] != MAGIC:
        raise NotAnIndexError(f"{path}: not an index file")
    pos = len(MAGIC)
    if len(blob) < pos + 8:
        raise TruncatedIndexError(f"{path}: truncated index header")
    version, n = struct.unpack_from("<II", blob, pos)
    pos += 8
    if version != FORMAT_VERSION:
        raise IndexVersionError(
            f"{path}: index format version {version}, expected {FORMAT_VERSION}"
        )

    titles = []
    for _ in range(n):
        if len(blob) < pos + 4:
            raise TruncatedIndexError(f"{path}: truncated title table")
        (length,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        if len(blob) < pos + length:
            raise TruncatedIndexError(f"{path}: truncated title table")
        titles.append(blob[pos:pos + length].decode("utf-8"))
        pos += length

    payload = len(blob) - pos
    if payload % 4:
        raise TruncatedIndexError(f"{path}: truncated adjacency section")
    words = np.frombuffer(blob, dtype="<u4", offset=pos)

    def read_section(start):
        counts = np.empty(n, dtype=np.int64)
        rows = []
        w = start
        for i in range(n):
            if w >= words.size:
                raise TruncatedIndexError(f"{path}: truncated adjacency section")
            count = int(words[w])
            w += 1
            if w + count > words.size:
                raise TruncatedIndexError(f"{path}: truncated adjacency section")
            counts[i] = count
            rows.append(words[w:w + count])
            w += count
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        if rows:
            indices = np.concatenate(rows).astype(np.int32)
        else:
            indices = np.empty(0, dtype=np.int32)
        return indptr, np.ascontiguousarray(indices), w

    out_indptr, out_indices, w = read_section(0)
    in_indptr, in_indices, w = read_section(w)
    if w != words.size:
        raise IndexFileError(f"{path}: trailing bytes after index payload")
    return LinkIndex(titles, out_indptr, out_indices, in_indptr, in_indices)
