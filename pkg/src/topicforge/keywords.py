"""Glossary-driven keyword classifier.

A sentence is positive iff any glossary phrase occurs in it as a whole-token
sequence: matching is case-insensitive (Unicode casefold) and bounded by
word boundaries, so "warming" does not match inside "warmingly". No
stemming or lemmatization; the classifier is fully deterministic.
"""

import re
from dataclasses import dataclass, field

from .corpus import NEGATIVE, POSITIVE
from .errors import GlossaryError


@dataclass(frozen=True)
class Glossary:
    name: str
    keywords: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "keywords", frozenset(self.keywords))
        if not self.keywords:
            raise GlossaryError(f"glossary {self.name!r} is empty")
        if any(not k or k != k.strip() or k != k.casefold() for k in self.keywords):
            raise GlossaryError(f"glossary {self.name!r}: keywords must be trimmed and lowercase")

    def __len__(self):
        return len(self.keywords)


def normalize_phrase(phrase: str) -> str:
    return phrase.strip().casefold()


def load_glossary(path, name=None) -> Glossary:
    """One phrase per line; ``#`` comments and blank lines ignored; phrases
    trimmed, casefolded, and deduplicated."""
    keywords = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            keywords.add(normalize_phrase(line))
    if not keywords:
        raise GlossaryError(f"glossary file {path} has no keywords")
    return Glossary(name=name or str(path), keywords=frozenset(keywords))


def union_glossaries(glossaries, name="union") -> Glossary:
    glossaries = list(glossaries)
    if not glossaries:
        raise GlossaryError("union of zero glossaries")
    merged = frozenset().union(*(g.keywords for g in glossaries))
    return Glossary(name=name, keywords=merged)


_matcher_cache: dict = {}


def _matcher(glossary: Glossary):
    pattern = _matcher_cache.get(glossary.keywords)
    if pattern is None:
        # longest-first keeps the alternation unambiguous; (?<!\w)/(?!\w) are
        # the Unicode-aware word boundaries
        alternation = "|".join(
            re.escape(k) for k in sorted(glossary.keywords, key=lambda k: (-len(k), k))
        )
        pattern = re.compile(r"(?<!\w)(?:" + alternation + r")(?!\w)")
        _matcher_cache[glossary.keywords] = pattern
    return pattern


def matches(sentence: str, glossary: Glossary):
    """The glossary phrase found in the sentence, or None."""
    m = _matcher(glossary).search(sentence.casefold())
    return m.group(0) if m else None


def classify_keywords(sentence: str, glossary: Glossary) -> str:
    """positive iff any glossary phrase occurs as a whole-token sequence."""
    return POSITIVE if matches(sentence, glossary) else NEGATIVE
