"""Document structure: paragraph/sentence/token segmentation and syllables.

Raw text is segmented with rule-based splitters tuned for Brazilian
Portuguese; pre-annotated input (PoS, morphology, clause counts, named
entities) is preserved as given.  All functions here are pure and the
resulting structures are treated as immutable.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Mapping, Sequence


class DocumentError(ValueError):
    """Raised for empty or structurally invalid document input."""


class AnnotationDepth(IntEnum):
    """How much linguistic markup a document carries."""

    RAW = 0
    TAGGED = 1
    PARSED = 2

    @classmethod
    def parse(cls, name: str) -> "AnnotationDepth":
        try:
            return cls[name.upper()]
        except KeyError:
            raise DocumentError(f"unknown annotation depth: {name!r}") from None


NE_CATEGORIES = frozenset(
    {
        "none",
        "human",
        "non-human-animate-moving",
        "non-human-animate-non-moving",
        "concrete-moving",
        "concrete-non-moving",
        "topological",
    }
)


def _norm_tag(value: str) -> str:
    return value.strip().lower().replace("_", "-")


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str | None = None
    pos: str | None = None
    morph: Mapping[str, str] = field(default_factory=dict)
    is_punct: bool = False
    ne_category: str = "none"

    def __post_init__(self) -> None:
        if not self.surface:
            raise DocumentError("token surface must be non-empty")
        if self.ne_category not in NE_CATEGORIES:
            raise DocumentError(f"unknown NE category: {self.ne_category!r}")

    @property
    def lemma_or_surface(self) -> str:
        return self.lemma if self.lemma else self.surface


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    clause_count: int | None = None
    clause_annotations: tuple[frozenset[str], ...] | None = None

    def __post_init__(self) -> None:
        if not self.tokens:
            raise DocumentError("sentence must contain at least one token")
        if self.clause_count is not None and self.clause_count < 0:
            raise DocumentError("clause_count must be non-negative")
        if (
            self.clause_annotations is not None
            and self.clause_count is not None
            and len(self.clause_annotations) != self.clause_count
        ):
            raise DocumentError(
                "clause_annotations length must equal clause_count"
            )

    @property
    def word_tokens(self) -> tuple[Token, ...]:
        return tuple(t for t in self.tokens if not t.is_punct)

    @property
    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)


@dataclass(frozen=True)
class AnnotatedDocument:
    id: str
    paragraphs: tuple[tuple[Sentence, ...], ...]
    source: str = ""
    annotation_depth: AnnotationDepth = AnnotationDepth.RAW

    def __post_init__(self) -> None:
        if not self.paragraphs or any(not p for p in self.paragraphs):
            raise DocumentError("document needs at least one sentence per paragraph")

    @property
    def sentences(self) -> list[Sentence]:
        return [s for p in self.paragraphs for s in p]

    @property
    def tokens(self) -> list[Token]:
        return [t for s in self.sentences for t in s.tokens]

    @property
    def word_tokens(self) -> list[Token]:
        return [t for t in self.tokens if not t.is_punct]


# --------------------------------------------------------------------------
# Segmentation
# --------------------------------------------------------------------------

_PARAGRAPH_SPLIT = re.compile(r"\n\s*\n")

# Common Brazilian Portuguese abbreviations that end in a period but do not
# terminate a sentence.  Extend via the `abbreviations` argument.
DEFAULT_ABBREVIATIONS = frozenset(
    {
        "sr.", "sra.", "srta.", "dr.", "dra.", "prof.", "profa.",
        "d.", "exmo.", "exma.", "av.", "r.", "pç.", "tel.", "pág.",
        "p.", "séc.", "núm.", "no.", "nº.", "etc.", "ex.", "obs.",
        "a.c.", "d.c.", "e.g.", "i.e.", "cia.", "ltda.", "s.a.",
    }
)

_TERMINALS = ".!?…"


def split_paragraphs(raw: str) -> list[str]:
    """Split on one-or-more blank lines, trimming and dropping empties."""
    if not raw or not raw.strip():
        raise DocumentError("empty document")
    parts = _PARAGRAPH_SPLIT.split(raw.strip())
    return [p.strip() for p in parts if p.strip()]


def split_sentences(
    paragraph: str, abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS
) -> list[str]:
    """Split a paragraph into sentences.

    A boundary is a run of terminal punctuation (. ! ? …) followed by
    whitespace and an uppercase letter, unless the word carrying a final
    period is a known abbreviation.  Text without boundaries comes back as
    a single sentence.
    """
    if not paragraph.strip():
        raise DocumentError("empty paragraph")
    abbrev = {a.lower() for a in abbreviations}
    text = paragraph.strip()
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINALS:
            j = i
            while j + 1 < n and text[j + 1] in _TERMINALS:
                j += 1
            # Word carrying the punctuation, e.g. "Dr." in "O Dr. Silva".
            w = i
            while w > start and not text[w - 1].isspace():
                w -= 1
            word = text[w : j + 1].lower()
            k = j + 1
            while k < n and text[k].isspace():
                k += 1
            boundary = (
                k > j + 1
                and k < n
                and text[k].isupper()
                and word not in abbrev
            )
            if boundary:
                sentences.append(text[start:k].strip())
                start = k
            i = j + 1
        else:
            i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


# A word is a run of word characters with optional internal hyphens;
# anything else that is not whitespace becomes a single-character token.
_TOKEN_RE = re.compile(r"\w+(?:-\w+)*|[^\w\s]", re.UNICODE)

# Clitic pronouns that attach with a hyphen ("viu-me" -> "viu", "-me").
DEFAULT_CLITICS = frozenset(
    {
        "me", "te", "se", "nos", "vos", "lhe", "lhes",
        "o", "a", "os", "as", "lo", "la", "los", "las",
        "no", "na", "nas", "mo", "ma", "to", "ta",
    }
)


def _is_punct_surface(surface: str) -> bool:
    return all(not ch.isalnum() and not ch.isspace() for ch in surface)


def _split_clitics(word: str, clitics: frozenset[str]) -> list[str]:
    parts = word.split("-")
    if len(parts) == 1:
        return [word]
    split_at = len(parts)
    while split_at > 1 and parts[split_at - 1].lower() in clitics:
        split_at -= 1
    if split_at == len(parts):
        return [word]
    head = "-".join(parts[:split_at])
    out = [head] if head else []
    out += ["-" + p for p in parts[split_at:]]
    return out


def tokenize(
    sentence: str, clitics: frozenset[str] = DEFAULT_CLITICS
) -> list[Token]:
    """Tokenize into word and single-character punctuation tokens.

    Concatenating the token surfaces reproduces every non-space character
    of the input.  Hyphen-attached clitic pronouns are split off the verb
    and keep their hyphen.
    """
    if not sentence.strip():
        raise DocumentError("empty sentence")
    tokens: list[Token] = []
    for m in _TOKEN_RE.finditer(sentence):
        piece = m.group()
        if _is_punct_surface(piece):
            tokens.append(Token(surface=piece, is_punct=True))
            continue
        for part in _split_clitics(piece, clitics):
            tokens.append(Token(surface=part, is_punct=False))
    return tokens


# --------------------------------------------------------------------------
# Syllables
# --------------------------------------------------------------------------

_VOWEL_BASE = {
    "a": "a", "á": "a", "â": "a", "ã": "a", "à": "a",
    "e": "e", "é": "e", "ê": "e",
    "i": "i", "í": "i", "y": "i",
    "o": "o", "ó": "o", "ô": "o", "õ": "o",
    "u": "u", "ú": "u", "ü": "u",
}

# Falling diphthongs always form one vowel group.
_FALLING = {"ai", "ei", "oi", "au", "eu", "ou", "ui", "iu"}
# Rising u+V groups only after q/g (qua-, gue-, ...).
_RISING_AFTER_QG = {"ua", "ue", "uo", "ui"}
# Nasal diphthongs, matched on the accented form.
_NASAL = {"ão", "ãe", "õe"}
# Accented i/u break any vowel cluster (sa-í-da, sa-ú-de).
_HIATUS_VOWELS = {"í", "ú"}


def count_syllables(word: str) -> int:
    """Count vowel groups using a diphthong/hiatus rule table.

    Deterministic and auditable rather than dictionary-exact: falling
    diphthongs and q/g rising diphthongs join, accented í/ú split, all
    remaining adjacent vowels are treated as hiatus.
    """
    w = word.lower()
    groups = 0
    prev: str | None = None  # previous char (lowercased)
    in_group = False  # previous char was a vowel in the current group
    group_rising = False  # current group started as a q/g rising pair
    group_len = 0
    before_group = ""  # char immediately preceding the current vowel group
    for ch in w:
        base = _VOWEL_BASE.get(ch)
        if base is None:
            in_group = False
            group_rising = False
            group_len = 0
            prev = ch
            continue
        if not in_group:
            groups += 1
            in_group = True
            group_len = 1
        else:
            pair_base = _VOWEL_BASE[prev] + base
            pair_exact = prev + ch
            combine = False
            if ch in _HIATUS_VOWELS or prev in _HIATUS_VOWELS:
                combine = pair_exact in _NASAL
            elif pair_exact in _NASAL:
                combine = True
            elif group_len == 1 and pair_base in _FALLING:
                combine = True
            elif (
                group_len == 1
                and pair_base in _RISING_AFTER_QG
                and before_group in ("q", "g")
            ):
                combine = True
                group_rising = True
            elif group_len == 2 and group_rising and pair_base in _FALLING:
                combine = True  # triphthong: quais, averiguou
            if combine:
                group_len += 1
            else:
                groups += 1
                group_len = 1
                group_rising = False
        if group_len == 1:
            before_group = prev if prev is not None else ""
        prev = ch
    if groups == 0:
        raise DocumentError(f"unsyllabifiable token: {word!r}")
    return groups


def has_vowel(word: str) -> bool:
    return any(ch in _VOWEL_BASE for ch in word.lower())


def count_syllables_lenient(word: str) -> int:
    """Like count_syllables but vowel-less tokens (digits, acronyms) count 1."""
    return count_syllables(word) if has_vowel(word) else 1


# --------------------------------------------------------------------------
# Document construction
# --------------------------------------------------------------------------


def build_document_from_text(
    raw: str,
    doc_id: str,
    source: str = "",
    abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS,
) -> AnnotatedDocument:
    """Segment raw text into a depth-RAW document."""
    paragraphs = []
    for para in split_paragraphs(raw):
        sentences = tuple(
            Sentence(tokens=tuple(tokenize(s)))
            for s in split_sentences(para, abbreviations)
        )
        paragraphs.append(sentences)
    return AnnotatedDocument(
        id=doc_id,
        paragraphs=tuple(paragraphs),
        source=source,
        annotation_depth=AnnotationDepth.RAW,
    )


def _token_from_record(rec: Mapping, where: str) -> Token:
    try:
        surface = rec["surface"]
    except KeyError:
        raise DocumentError(f"{where}: token record missing 'surface'") from None
    morph_in = rec.get("morph") or {}
    if not isinstance(morph_in, Mapping):
        raise DocumentError(f"{where}: morph must be a mapping")
    morph = {_norm_tag(k): _norm_tag(str(v)) for k, v in morph_in.items()}
    ne = _norm_tag(rec.get("ne", "none") or "none")
    if ne not in NE_CATEGORIES:
        raise DocumentError(f"{where}: unknown NE category {ne!r}")
    pos = rec.get("pos")
    return Token(
        surface=surface,
        lemma=rec.get("lemma"),
        pos=pos.strip().lower() if isinstance(pos, str) else None,
        morph=morph,
        is_punct=bool(rec.get("is_punct", _is_punct_surface(surface))),
        ne_category=ne,
    )


def build_document_from_records(
    token_records: Sequence[Mapping],
    doc_id: str,
    source: str = "",
) -> AnnotatedDocument:
    """Assemble a document from flat per-token annotation records.

    Each record carries surface plus optional lemma/pos/morph/ne and its
    paragraph and sentence indices; clause_count and clause_tags may ride
    on any token of their sentence but must agree when repeated.
    Annotation depth is inferred: tagged when every non-punct token has a
    PoS, parsed when additionally every sentence has a clause count.
    """
    if not token_records:
        raise DocumentError("empty document: no token records")
    grouped: dict[tuple[int, int], list[tuple[int, Mapping]]] = {}
    for line_no, rec in enumerate(token_records, start=1):
        where = f"token record {line_no}"
        try:
            para = int(rec["paragraph"])
            sent = int(rec["sentence"])
        except (KeyError, TypeError, ValueError):
            raise DocumentError(
                f"{where}: needs integer 'paragraph' and 'sentence' indices"
            ) from None
        grouped.setdefault((para, sent), []).append((line_no, rec))

    by_para: dict[int, list[Sentence]] = {}
    for (para, sent) in sorted(grouped):
        recs = grouped[(para, sent)]
        tokens = tuple(
            _token_from_record(rec, f"token record {ln}") for ln, rec in recs
        )
        clause_counts = {
            rec["clause_count"] for _, rec in recs if rec.get("clause_count") is not None
        }
        if len(clause_counts) > 1:
            raise DocumentError(
                f"sentence ({para},{sent}): conflicting clause_count values"
            )
        clause_count = int(clause_counts.pop()) if clause_counts else None
        tags = None
        for _, rec in recs:
            if rec.get("clause_tags") is not None:
                tags = tuple(
                    frozenset(_norm_tag(t) for t in clause)
                    for clause in rec["clause_tags"]
                )
                break
        by_para.setdefault(para, []).append(
            Sentence(tokens=tokens, clause_count=clause_count, clause_annotations=tags)
        )

    paragraphs = tuple(tuple(by_para[p]) for p in sorted(by_para))
    doc = AnnotatedDocument(
        id=doc_id,
        paragraphs=paragraphs,
        source=source,
        annotation_depth=AnnotationDepth.RAW,
    )
    depth = _infer_depth(doc)
    return AnnotatedDocument(
        id=doc_id, paragraphs=paragraphs, source=source, annotation_depth=depth
    )


def _infer_depth(doc: AnnotatedDocument) -> AnnotationDepth:
    words = doc.word_tokens
    tagged = bool(words) and all(t.pos for t in words)
    if not tagged:
        return AnnotationDepth.RAW
    if all(s.clause_count is not None for s in doc.sentences):
        return AnnotationDepth.PARSED
    return AnnotationDepth.TAGGED


def strip_accents(text: str) -> str:
    return "".join(
        c for c in unicodedata.normalize("NFD", text) if unicodedata.category(c) != "Mn"
    )
