"""Pluggable word lists and numeric word tables used by the extractors.

A lexicon file is UTF-8, one lowercase entry per line, with an optional
tab-separated subclass column; ``#`` starts a comment line.  Word-frequency
and sense-inventory resources share the line format with numeric columns.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .textmodel import AnnotatedDocument, Sentence


class LexiconError(ValueError):
    """Raised for missing, empty, or malformed lexicon resources."""


LEXICON_KINDS = (
    "simple_words",
    "positive_words",
    "negative_words",
    "connectives",
    "discourse_markers",
    "logical_operators",
    "pronouns",
)

# Canonical subclass tags queried by the feature extractors.  Files may carry
# additional tags (open vocabulary); these are the ones features depend on.
CONNECTIVE_TAGS = tuple(
    f"{cls}_{pol}"
    for cls in ("additive", "causal", "logical", "temporal")
    for pol in ("positive", "negative")
)
DISCOURSE_MARKER_TAGS = ("ambiguous", "unambiguous")
LOGICAL_OPERATOR_TAGS = ("and", "or", "if", "negation")
PRONOUN_TAGS = tuple(
    f"person{p}_{kind}" for p in (1, 2, 3) for kind in ("plain", "possessive")
)

_TAG_RE = re.compile(r"^[a-z][a-z0-9_]*$")


@dataclass(frozen=True)
class Lexicon:
    kind: str
    entries: frozenset[str]
    subclass: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in LEXICON_KINDS:
            raise LexiconError(f"unknown lexicon kind: {self.kind!r}")
        if not self.entries:
            raise LexiconError(f"empty lexicon ({self.kind})")

    @property
    def max_ngram(self) -> int:
        return max(len(e.split()) for e in self.entries)

    @property
    def tagged(self) -> bool:
        return bool(self.subclass)


def _read_lines(path: str | Path) -> list[tuple[int, str]]:
    p = Path(path)
    if not p.is_file():
        raise LexiconError(f"lexicon file not found: {p}")
    out = []
    for i, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        out.append((i, line))
    return out


def load_lexicon(path: str | Path, kind: str) -> Lexicon:
    """Load a lexicon file, deduplicating entries and validating tags."""
    if kind not in LEXICON_KINDS:
        raise LexiconError(f"unknown lexicon kind: {kind!r}")
    entries: set[str] = set()
    subclass: dict[str, str] = {}
    for line_no, line in _read_lines(path):
        parts = line.split("\t")
        entry = " ".join(parts[0].lower().split())
        if not entry:
            raise LexiconError(f"{path}:{line_no}: blank entry before tag column")
        entries.add(entry)
        if len(parts) > 1 and parts[1].strip():
            tag = parts[1].strip().lower()
            if not _TAG_RE.match(tag):
                raise LexiconError(
                    f"{path}:{line_no}: unknown subclass tag {tag!r}"
                )
            subclass[entry] = tag
    if not entries:
        raise LexiconError(f"empty lexicon: {path}")
    return Lexicon(kind=kind, entries=frozenset(entries), subclass=subclass)


def load_frequency_list(path: str | Path) -> dict[str, float]:
    """Load ``word<TAB>frequency`` rows into a lowercase lookup table."""
    table: dict[str, float] = {}
    for line_no, line in _read_lines(path):
        parts = line.split("\t")
        if len(parts) < 2 or not parts[1].strip():
            raise LexiconError(f"{path}:{line_no}: missing frequency column")
        word = " ".join(parts[0].lower().split())
        try:
            value = float(parts[1])
        except ValueError:
            raise LexiconError(
                f"{path}:{line_no}: non-numeric frequency {parts[1]!r}"
            ) from None
        if value < 0:
            raise LexiconError(f"{path}:{line_no}: negative frequency")
        table[word] = value
    if not table:
        raise LexiconError(f"empty frequency list: {path}")
    return table


@dataclass(frozen=True)
class SenseEntry:
    sense_count: float
    hypernym_depth: float


def load_sense_inventory(path: str | Path) -> dict[str, SenseEntry]:
    """Load ``lemma<TAB>sense_count<TAB>hypernym_depth`` rows."""
    table: dict[str, SenseEntry] = {}
    for line_no, line in _read_lines(path):
        parts = line.split("\t")
        if len(parts) < 3:
            raise LexiconError(
                f"{path}:{line_no}: expected lemma, sense count, hypernym depth"
            )
        lemma = " ".join(parts[0].lower().split())
        try:
            senses = float(parts[1])
            depth = float(parts[2])
        except ValueError:
            raise LexiconError(f"{path}:{line_no}: non-numeric column") from None
        if senses < 0 or depth < 0:
            raise LexiconError(f"{path}:{line_no}: negative value")
        table[lemma] = SenseEntry(sense_count=senses, hypernym_depth=depth)
    if not table:
        raise LexiconError(f"empty sense inventory: {path}")
    return table


# --------------------------------------------------------------------------
# Matching
# --------------------------------------------------------------------------


def _sentence_keys(sentence: Sentence) -> list[tuple[str, str]]:
    # (surface, lemma) lowercased per token; lemma falls back to surface.
    # Clitic tokens keep their leading hyphen at tokenization; strip it so
    # "viu-me" matches the pronoun entry "me".
    out = []
    for t in sentence.tokens:
        s = t.surface.lower()
        if len(s) > 1 and s.startswith("-"):
            s = s.lstrip("-")
        lemma = t.lemma.lower() if t.lemma else s
        out.append((s, lemma))
    return out


def iter_matches(lexicon: Lexicon, doc: AnnotatedDocument) -> Iterator[str]:
    """Yield matched entries: longest-match-first, non-overlapping.

    Surfaces are tried before lemmas at each length; multiword entries match
    contiguous token runs and never cross sentence boundaries.
    """
    max_n = lexicon.max_ngram
    for sentence in doc.sentences:
        keys = _sentence_keys(sentence)
        i = 0
        while i < len(keys):
            hit = None
            for n in range(min(max_n, len(keys) - i), 0, -1):
                surface = " ".join(k[0] for k in keys[i : i + n])
                if surface in lexicon.entries:
                    hit = surface
                    break
                lemma = " ".join(k[1] for k in keys[i : i + n])
                if lemma in lexicon.entries:
                    hit = lemma
                    break
            if hit is None:
                i += 1
            else:
                yield hit
                i += len(hit.split())


def match_count(
    lexicon: Lexicon, doc: AnnotatedDocument, subclass: str | None = None
) -> int:
    """Count lexicon occurrences in the document, optionally by subclass."""
    if subclass is not None and not lexicon.tagged:
        raise LexiconError(
            f"subclass {subclass!r} requested on untagged {lexicon.kind} lexicon"
        )
    count = 0
    for entry in iter_matches(lexicon, doc):
        if subclass is None or lexicon.subclass.get(entry) == subclass:
            count += 1
    return count


# --------------------------------------------------------------------------
# Resource bundle
# --------------------------------------------------------------------------

RESOURCE_FILENAMES = {
    "simple_words": "simple_words.txt",
    "positive_words": "positive_words.txt",
    "negative_words": "negative_words.txt",
    "connectives": "connectives.txt",
    "discourse_markers": "discourse_markers.txt",
    "logical_operators": "logical_operators.txt",
    "pronouns": "pronouns.txt",
    "word_frequencies": "word_frequencies.txt",
    "sense_inventory": "sense_inventory.txt",
}


@dataclass(frozen=True)
class Resources:
    """All loaded lexical resources; missing ones stay None and the features
    depending on them are reported unavailable rather than failing."""

    simple_words: Lexicon | None = None
    positive_words: Lexicon | None = None
    negative_words: Lexicon | None = None
    connectives: Lexicon | None = None
    discourse_markers: Lexicon | None = None
    logical_operators: Lexicon | None = None
    pronouns: Lexicon | None = None
    word_frequencies: dict[str, float] | None = None
    sense_inventory: dict[str, SenseEntry] | None = None

    def lexicon(self, kind: str) -> Lexicon | None:
        if kind not in LEXICON_KINDS:
            raise LexiconError(f"unknown lexicon kind: {kind!r}")
        return getattr(self, kind)

    def has(self, kind: str) -> bool:
        return getattr(self, kind, None) is not None

    @property
    def loaded_kinds(self) -> frozenset[str]:
        return frozenset(
            name for name in RESOURCE_FILENAMES if getattr(self, name) is not None
        )


def load_resources(
    directory: str | Path, overrides: dict[str, str | Path] | None = None
) -> Resources:
    """Load every resource found in ``directory`` by conventional filename.

    ``overrides`` remaps individual resource names to explicit paths; an
    override must exist, while conventional files are optional.
    """
    directory = Path(directory)
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(RESOURCE_FILENAMES)
    if unknown:
        raise LexiconError(f"unknown resource names: {sorted(unknown)}")
    loaded: dict[str, object] = {}
    for name, filename in RESOURCE_FILENAMES.items():
        if name in overrides:
            path = Path(overrides[name])
        else:
            path = directory / filename
            if not path.is_file():
                continue
        if name == "word_frequencies":
            loaded[name] = load_frequency_list(path)
        elif name == "sense_inventory":
            loaded[name] = load_sense_inventory(path)
        else:
            loaded[name] = load_lexicon(path, name)
    return Resources(**loaded)  # type: ignore[arg-type]


def default_resources() -> Resources:
    """Load the placeholder resources bundled with the package."""
    return load_resources(Path(__file__).parent / "resources")
