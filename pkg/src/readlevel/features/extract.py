"""Per-document feature extraction with availability masking.

Availability is decided per feature from the document's annotation depth and
the loaded resources; unavailable features are filled per FeatureConfig.
Ratio features use a zero-on-empty-denominator convention so vectors stay
finite on degenerate documents (no clauses, no content words, one sentence).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

from ..lexicons import Lexicon, Resources, match_count
from ..textmodel import (
    AnnotatedDocument,
    Sentence,
    Token,
    count_syllables_lenient,
    strip_accents,
)
from . import metrics
from .registry import (
    SIMPLE_STATISTICS,
    FeatureSpec,
    feature_registry,
    registry_by_name,
)


class FeatureError(ValueError):
    """Raised for unextractable documents or missing required annotations."""


FILL_POLICIES = ("zero", "error")


@dataclass(frozen=True)
class FeatureConfig:
    incidence_base: int = metrics.DEFAULT_INCIDENCE_BASE
    flesch_constants: tuple[float, float, float] = metrics.FLESCH_CONSTANTS
    fk_constants: tuple[float, float, float] = metrics.FK_CONSTANTS
    fill_policy: str = "zero"
    honore_cap: float = metrics.DEFAULT_HONORE_CAP

    def __post_init__(self) -> None:
        if self.incidence_base <= 0:
            raise FeatureError("incidence_base must be positive")
        if self.fill_policy not in FILL_POLICIES:
            raise FeatureError(f"unknown fill policy: {self.fill_policy!r}")


@dataclass(frozen=True)
class FeatureVector:
    values: dict[str, float]
    available: dict[str, bool]
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if set(self.values) != set(self.available):
            raise FeatureError("values and availability mask disagree")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.values)

    def restrict(self, names: tuple[str, ...] | list[str]) -> "FeatureVector":
        missing = [n for n in names if n not in self.values]
        if missing:
            raise FeatureError(f"unknown feature names: {missing}")
        return FeatureVector(
            values={n: self.values[n] for n in names},
            available={n: self.available[n] for n in names},
            warnings=self.warnings,
        )


# Canonical coarse part-of-speech tags consumed by the extractors (documented
# in the repo's format reference).
NOUN_POS = frozenset({"noun", "propn"})
VERB_POS = frozenset({"verb", "aux"})
CONTENT_POS = frozenset({"noun", "propn", "verb", "adjective", "adverb"})
ARGUMENT_POS = NOUN_POS | {"pronoun"}
MODIFIER_POS = frozenset({"adjective", "determiner", "article", "numeral"})

# Iterative suffix stripping over accent-stripped lowercase words; a crude
# stand-in for a real stemmer, kept deliberately tiny.  Participle endings
# (-ado/-ida, ...) are left to the final-vowel/-s strips so that singular,
# plural, and gender variants converge on one stem.
_STEM_SUFFIXES = (
    "amente",
    "mente",
    "acoes",
    "coes",
    "aram",
    "eram",
    "iram",
    "ando",
    "endo",
    "indo",
    "cao",
    "es",
    "ns",
    "s",
    "a",
    "e",
    "o",
)


def word_stem(word: str) -> str:
    stem = strip_accents(word.lower())
    while True:
        for suffix in _STEM_SUFFIXES:
            if stem.endswith(suffix) and len(stem) - len(suffix) >= 3:
                stem = stem[: -len(suffix)]
                break
        else:
            return stem


def _token_key(token: Token) -> str:
    key = token.lemma_or_surface.lower()
    if len(key) > 1 and key.startswith("-"):
        key = key.lstrip("-")
    return key


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


class DocumentProfile:
    """Shared intermediates for one document, computed lazily and cached."""

    def __init__(
        self,
        doc: AnnotatedDocument,
        resources: Resources,
        cfg: FeatureConfig,
    ) -> None:
        self.doc = doc
        self.resources = resources
        self.cfg = cfg
        self._lex_counts: dict[tuple[str, str | None], int] = {}
        self.warnings: list[str] = []

    # ---- basic counts -----------------------------------------------------

    @cached_property
    def sentences(self) -> tuple[Sentence, ...]:
        return self.doc.sentences

    @cached_property
    def word_tokens(self) -> tuple[Token, ...]:
        return tuple(t for s in self.sentences for t in s.word_tokens)

    @cached_property
    def n_words(self) -> int:
        return len(self.word_tokens)

    @cached_property
    def n_sentences(self) -> int:
        return len(self.sentences)

    @cached_property
    def n_paragraphs(self) -> int:
        return len(self.doc.paragraphs)

    @cached_property
    def punct_tokens(self) -> tuple[Token, ...]:
        return tuple(t for s in self.sentences for t in s.tokens if t.is_punct)

    @cached_property
    def type_counts(self) -> Counter:
        return Counter(t.surface.lower() for t in self.word_tokens)

    @cached_property
    def n_types(self) -> int:
        return len(self.type_counts)

    @cached_property
    def n_hapax(self) -> int:
        return sum(1 for c in self.type_counts.values() if c == 1)

    @cached_property
    def total_syllables(self) -> int:
        return sum(count_syllables_lenient(t.surface) for t in self.word_tokens)

    @cached_property
    def words_per_sentence(self) -> float:
        return self.n_words / self.n_sentences

    @cached_property
    def syllables_per_word(self) -> float:
        return self.total_syllables / self.n_words

    def incidence(self, count: float) -> float:
        return metrics.incidence(count, self.n_words, self.cfg.incidence_base)

    # ---- tagged-depth helpers ---------------------------------------------

    def pos_count(self, tags: frozenset[str]) -> int:
        return sum(1 for t in self.word_tokens if t.pos in tags)

    @cached_property
    def content_tokens(self) -> tuple[Token, ...]:
        return tuple(t for t in self.word_tokens if t.pos in CONTENT_POS)

    @cached_property
    def noun_phrase_count(self) -> int:
        return self.pos_count(ARGUMENT_POS)

    def morph_count(self, wanted: dict[str, str]) -> int:
        total = 0
        for t in self.word_tokens:
            if all(t.morph.get(k) == v for k, v in wanted.items()):
                total += 1
        return total

    def verb_form_count(self, form: str) -> int:
        return self.morph_count({"verb-form": form})

    def mean_over(self, tokens, value: Callable[[Token], float]) -> float:
        vals = [value(t) for t in tokens]
        return sum(vals) / len(vals) if vals else 0.0

    def frequency_of(self, token: Token) -> float:
        table = self.resources.word_frequencies or {}
        surface = token.surface.lower()
        if surface in table:
            return table[surface]
        return table.get(token.lemma_or_surface.lower(), 0.0)

    def sense_count_of(self, token: Token) -> float:
        table = self.resources.sense_inventory or {}
        entry = table.get(token.lemma_or_surface.lower())
        return entry.sense_count if entry else 0.0

    def hypernym_depth_of(self, token: Token) -> float:
        table = self.resources.sense_inventory or {}
        entry = table.get(token.lemma_or_surface.lower())
        return entry.hypernym_depth if entry else 0.0

    def sense_count_mean(self, tags: frozenset[str]) -> float:
        tokens = [t for t in self.word_tokens if t.pos in tags]
        return self.mean_over(tokens, self.sense_count_of)

    # ---- clause helpers (parsed depth) ------------------------------------

    @cached_property
    def total_clauses(self) -> int:
        return sum(s.clause_count or 0 for s in self.sentences)

    def sentences_with_clauses(self, k: int, at_least: bool = False) -> int:
        if at_least:
            return sum(1 for s in self.sentences if (s.clause_count or 0) >= k)
        return sum(1 for s in self.sentences if (s.clause_count or 0) == k)

    def clause_tag_count(self, tag: str) -> int:
        total = 0
        for s in self.sentences:
            for tags in s.clause_annotations or ():
                if tag in tags:
                    total += 1
        return total

    def sentences_with_clause_tag(self, tag: str, first_only: bool = False) -> int:
        total = 0
        for s in self.sentences:
            anns = s.clause_annotations or ()
            if first_only:
                if anns and tag in anns[0]:
                    total += 1
            elif any(tag in tags for tags in anns):
                total += 1
        return total

    # ---- lexicon helpers ----------------------------------------------------

    def lex_count(self, kind: str, subclass: str | None = None) -> int:
        key = (kind, subclass)
        if key not in self._lex_counts:
            lexicon = self.resources.lexicon(kind)
            if lexicon is None:
                raise FeatureError(f"resource not loaded: {kind}")
            self._lex_counts[key] = match_count(lexicon, self.doc, subclass)
        return self._lex_counts[key]

    # ---- sentence-pair helpers ----------------------------------------------

    @cached_property
    def argument_keys(self) -> tuple[frozenset[str], ...]:
        return tuple(
            frozenset(_token_key(t) for t in s.word_tokens if t.pos in ARGUMENT_POS)
            for s in self.sentences
        )

    @cached_property
    def content_keys(self) -> tuple[frozenset[str], ...]:
        return tuple(
            frozenset(_token_key(t) for t in s.word_tokens if t.pos in CONTENT_POS)
            for s in self.sentences
        )

    @cached_property
    def stem_keys(self) -> tuple[frozenset[str], ...]:
        return tuple(
            frozenset(word_stem(k) for k in keys) for keys in self.content_keys
        )

    @cached_property
    def noun_flags(self) -> tuple[bool, ...]:
        return tuple(
            any(t.pos in NOUN_POS for t in s.word_tokens) for s in self.sentences
        )

    @cached_property
    def person3_flags(self) -> tuple[bool, ...]:
        lexicon = self.resources.pronouns
        if lexicon is None:
            raise FeatureError("resource not loaded: pronouns")
        person3 = {
            entry
            for entry, tag in lexicon.subclass.items()
            if tag.startswith("person3")
        }
        return tuple(
            any(_token_key(t) in person3 for t in s.word_tokens)
            for s in self.sentences
        )

    def pair_proportion(
        self, overlaps: Callable[[int, int], bool], adjacent_only: bool
    ) -> float:
        n = self.n_sentences
        if adjacent_only:
            pairs = [(i, i + 1) for i in range(n - 1)]
        else:
            pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        if not pairs:
            return 0.0
        return sum(1 for i, j in pairs if overlaps(i, j)) / len(pairs)

    def key_overlap(
        self, keys: tuple[frozenset[str], ...], adjacent_only: bool
    ) -> float:
        return self.pair_proportion(
            lambda i, j: bool(keys[i] & keys[j]), adjacent_only
        )

    def anaphora_proportion(self, adjacent_only: bool) -> float:
        nouns, pronouns = self.noun_flags, self.person3_flags
        return self.pair_proportion(
            lambda i, j: nouns[i] and pronouns[j], adjacent_only
        )

    # ---- named-entity helpers ------------------------------------------------

    def ne_count(self, category: str | None) -> int:
        if category is None:
            return sum(
                1 for t in self.word_tokens if t.ne_category != "none"
            )
        return sum(1 for t in self.word_tokens if t.ne_category == category)

    def ne_sentence_count(self, category: str) -> int:
        return sum(
            1
            for s in self.sentences
            if any(t.ne_category == category for t in s.word_tokens)
        )

    # ---- verb helpers ----------------------------------------------------------

    def first_finite_verb_offsets(self) -> list[int]:
        # Word-token offsets of the first finite verb per sentence; sentences
        # without one are skipped.
        offsets = []
        for s in self.sentences:
            for i, t in enumerate(s.word_tokens):
                finite = t.pos in VERB_POS and (
                    "mood" in t.morph or t.morph.get("verb-form") == "finite"
                )
                if finite:
                    offsets.append(i)
                    break
        return offsets


# --------------------------------------------------------------------------
# Feature computers
# --------------------------------------------------------------------------

Computer = Callable[[DocumentProfile], float]
COMPUTERS: dict[str, Computer] = {}


def _register(name: str) -> Callable[[Computer], Computer]:
    def wrap(fn: Computer) -> Computer:
        if name in COMPUTERS:
            raise AssertionError(f"duplicate computer: {name}")
        COMPUTERS[name] = fn
        return fn

    return wrap


def _honore(p: DocumentProfile) -> float:
    value, capped = metrics.honore_statistic(
        p.n_words, p.n_types, p.n_hapax, p.cfg.honore_cap
    )
    if capped:
        p.warnings.append(
            f"honore_statistic: every word is a hapax; capped at {p.cfg.honore_cap}"
        )
    return value


_DIRECT: dict[str, Computer] = {
    "flesch_index": lambda p: metrics.flesch_reading_ease(
        p.words_per_sentence, p.syllables_per_word, p.cfg.flesch_constants
    ),
    "flesch_kincaid_grade": lambda p: metrics.flesch_kincaid_grade(
        p.words_per_sentence, p.syllables_per_word, p.cfg.fk_constants
    ),
    "mean_sentences_per_paragraph": lambda p: p.n_sentences / p.n_paragraphs,
    "mean_words_per_sentence": lambda p: p.words_per_sentence,
    "num_paragraphs": lambda p: float(p.n_paragraphs),
    "num_sentences": lambda p: float(p.n_sentences),
    "num_words": lambda p: float(p.n_words),
    "type_token_ratio": lambda p: p.n_types / p.n_words,
    "num_simple_words": lambda p: float(p.lex_count("simple_words")),
    "ext_simple_word_ratio": lambda p: p.lex_count("simple_words") / p.n_words,
    "punct_incidence": lambda p: p.incidence(len(p.punct_tokens)),
    "punct_diversity": lambda p: float(
        len({t.surface for t in p.punct_tokens})
    ),
    "honore_statistic": _honore,
    "brunet_index": lambda p: metrics.brunet_index(p.n_words, p.n_types),
    "mean_syllables_per_content_word": lambda p: p.mean_over(
        p.content_tokens, lambda t: count_syllables_lenient(t.surface)
    ),
    "inc_adjectives": lambda p: p.incidence(p.pos_count(frozenset({"adjective"}))),
    "inc_adverbs": lambda p: p.incidence(p.pos_count(frozenset({"adverb"}))),
    "inc_nouns": lambda p: p.incidence(p.pos_count(NOUN_POS)),
    "inc_verbs": lambda p: p.incidence(p.pos_count(VERB_POS)),
    "inc_content_words": lambda p: p.incidence(len(p.content_tokens)),
    "inc_function_words": lambda p: p.incidence(
        p.n_words - len(p.content_tokens)
    ),
    "mean_content_word_frequency": lambda p: p.mean_over(
        p.content_tokens, p.frequency_of
    ),
    "min_content_word_frequency": lambda p: (
        min((p.frequency_of(t) for t in p.content_tokens), default=0.0)
    ),
    "mean_hypernyms_per_verb": lambda p: p.mean_over(
        [t for t in p.word_tokens if t.pos in VERB_POS], p.hypernym_depth_of
    ),
    "ambiguity_of_adjectives": lambda p: p.sense_count_mean(
        frozenset({"adjective"})
    ),
    "ambiguity_of_adverbs": lambda p: p.sense_count_mean(frozenset({"adverb"})),
    "ambiguity_of_nouns": lambda p: p.sense_count_mean(NOUN_POS),
    "ambiguity_of_verbs": lambda p: p.sense_count_mean(VERB_POS),
    "words_before_main_verb": lambda p: _mean(p.first_finite_verb_offsets()),
    "mean_pronouns_per_noun_phrase": lambda p: (
        p.pos_count(frozenset({"pronoun"})) / p.noun_phrase_count
        if p.noun_phrase_count
        else 0.0
    ),
    "modifiers_per_noun_phrase": lambda p: (
        p.pos_count(MODIFIER_POS) / p.noun_phrase_count
        if p.noun_phrase_count
        else 0.0
    ),
    "noun_phrase_incidence": lambda p: p.incidence(p.noun_phrase_count),
    "mean_prepositions_per_sentence": lambda p: (
        p.pos_count(frozenset({"preposition"})) / p.n_sentences
    ),
    "mean_prepositions_per_clause": lambda p: (
        p.pos_count(frozenset({"preposition"})) / p.total_clauses
        if p.total_clauses
        else 0.0
    ),
    "mean_clauses_per_sentence": lambda p: p.total_clauses / p.n_sentences,
    "mean_apposition_per_clause": lambda p: (
        p.clause_tag_count("apposition") / p.total_clauses
        if p.total_clauses
        else 0.0
    ),
    "mean_adverbial_adjuncts_per_clause": lambda p: (
        p.pos_count(frozenset({"adverb"})) / p.total_clauses
        if p.total_clauses
        else 0.0
    ),
    "inc_coordinate_clauses": lambda p: p.incidence(
        p.clause_tag_count("coordinate")
    ),
    "inc_subordinate_clauses": lambda p: p.incidence(
        p.clause_tag_count("subordinate")
    ),
    "inc_relative_clauses": lambda p: p.incidence(p.clause_tag_count("relative")),
    "inc_initiating_subordinate_clauses": lambda p: p.incidence(
        p.sentences_with_clause_tag("subordinate", first_only=True)
    ),
    "inc_passive_sentences": lambda p: p.incidence(
        p.sentences_with_clause_tag("passive")
    ),
    "inc_gerund_verbs": lambda p: p.incidence(p.verb_form_count("gerund")),
    "inc_infinitive_verbs": lambda p: p.incidence(p.verb_form_count("infinitive")),
    "inc_participle_verbs": lambda p: p.incidence(p.verb_form_count("participle")),
    "inc_verbals": lambda p: p.incidence(
        p.verb_form_count("gerund")
        + p.verb_form_count("infinitive")
        + p.verb_form_count("participle")
    ),
    "inc_imperative": lambda p: p.incidence(
        p.morph_count({"mood": "imperative"})
    ),
    "inc_subjunctive": lambda p: p.incidence(
        p.morph_count({"mood": "subjunctive"})
    ),
    "adjacent_argument_overlap": lambda p: p.key_overlap(p.argument_keys, True),
    "argument_overlap": lambda p: p.key_overlap(p.argument_keys, False),
    "adjacent_stem_overlap": lambda p: p.key_overlap(p.stem_keys, True),
    "stem_overlap": lambda p: p.key_overlap(p.stem_keys, False),
    "adjacent_content_word_overlap": lambda p: p.key_overlap(
        p.content_keys, True
    ),
    "adjacent_anaphoric_references": lambda p: p.anaphora_proportion(True),
    "anaphoric_references": lambda p: p.anaphora_proportion(False),
    "inc_logic_operators": lambda p: p.incidence(p.lex_count("logical_operators")),
    "inc_connectives": lambda p: p.incidence(p.lex_count("connectives")),
    "inc_discourse_markers": lambda p: p.incidence(
        p.lex_count("discourse_markers")
    ),
    "inc_ambiguous_discourse_markers": lambda p: p.incidence(
        p.lex_count("discourse_markers", "ambiguous")
    ),
    "inc_pronouns": lambda p: p.incidence(p.lex_count("pronouns")),
    "inc_positive_words": lambda p: p.incidence(p.lex_count("positive_words")),
    "inc_negative_words": lambda p: p.incidence(p.lex_count("negative_words")),
}

for _name, _fn in _DIRECT.items():
    _register(_name)(_fn)


def _register_tense(name: str, tense: str) -> None:
    @_register(name)
    def compute(p: DocumentProfile, tense: str = tense) -> float:
        return p.incidence(p.morph_count({"mood": "indicative", "tense": tense}))


_register_tense("inc_indicative_present", "present")
_register_tense("inc_indicative_imperfect", "imperfect")
_register_tense("inc_indicative_preterite_perfect", "preterite-perfect")
_register_tense("inc_indicative_pluperfect", "pluperfect")
_register_tense("inc_indicative_future", "future")
_register_tense("inc_indicative_future_of_past", "future-of-past")


def _register_clause_bucket(name: str, k: int, at_least: bool) -> None:
    @_register(name)
    def compute(
        p: DocumentProfile, k: int = k, at_least: bool = at_least
    ) -> float:
        return p.incidence(p.sentences_with_clauses(k, at_least))


_register_clause_bucket("inc_sentences_with_1_clause", 1, False)
for _k in (0, 2, 3, 4, 5, 6):
    _register_clause_bucket(f"inc_sentences_with_{_k}_clauses", _k, False)
_register_clause_bucket("inc_sentences_with_7_or_more_clauses", 7, True)


def _register_operator(name: str, tag: str) -> None:
    @_register(name)
    def compute(p: DocumentProfile, tag: str = tag) -> float:
        return p.incidence(p.lex_count("logical_operators", tag))


_register_operator("inc_ands", "and")
_register_operator("inc_ors", "or")
_register_operator("inc_ifs", "if")
_register_operator("inc_negations", "negation")


def _register_connective(cls: str, pol: str) -> None:
    @_register(f"inc_{cls}_{pol}_connectives")
    def compute(p: DocumentProfile, tag: str = f"{cls}_{pol}") -> float:
        return p.incidence(p.lex_count("connectives", tag))


for _cls in ("additive", "causal", "logical", "temporal"):
    for _pol in ("negative", "positive"):
        _register_connective(_cls, _pol)


def _register_pronoun(person: int, possessive: bool) -> None:
    kind = "possessive" if possessive else "plain"
    suffix = "possessive_pronouns" if possessive else "pronouns"

    @_register(f"inc_person{person}_{suffix}")
    def compute(p: DocumentProfile, tag: str = f"person{person}_{kind}") -> float:
        return p.incidence(p.lex_count("pronouns", tag))


for _person in (1, 2, 3):
    _register_pronoun(_person, True)
    _register_pronoun(_person, False)

_NE_CATEGORY = {
    "concrete_moving_entities": "concrete-moving",
    "concrete_non_moving_entities": "concrete-non-moving",
    "human_entities": "human",
    "non_human_moving_entities": "non-human-animate-moving",
    "non_human_non_moving_entities": "non-human-animate-non-moving",
    "topological_entities": "topological",
}


def _register_entities(stem: str, category: str | None) -> None:
    @_register(f"inc_{stem}_per_sentence")
    def per_sentence(p: DocumentProfile, category=category) -> float:
        return p.ne_count(category) / p.n_sentences

    if stem != "human_entities":

        @_register(f"inc_{stem}")
        def in_text(p: DocumentProfile, category=category) -> float:
            return p.incidence(p.ne_count(category))


for _stem, _cat in _NE_CATEGORY.items():
    _register_entities(_stem, _cat)
_register_entities("named_entities", None)


@_register("inc_human_entity_sentences")
def _human_entity_sentences(p: DocumentProfile) -> float:
    return p.incidence(p.ne_sentence_count("human"))


# --------------------------------------------------------------------------
# Extraction entry points
# --------------------------------------------------------------------------


def _check_computers_cover_registry() -> None:
    registry = {s.name for s in feature_registry()}
    computers = set(COMPUTERS)
    if registry != computers:
        missing = sorted(registry - computers)
        extra = sorted(computers - registry)
        raise AssertionError(
            f"computers out of sync: missing={missing} extra={extra}"
        )


_check_computers_cover_registry()


def _availability(spec: FeatureSpec, doc: AnnotatedDocument, res: Resources):
    if doc.annotation_depth < spec.required_depth:
        return False, f"needs {spec.required_depth.name.lower()} annotation"
    missing = sorted(
        name for name in spec.required_resources if not res.has(name)
    )
    if missing:
        return False, f"needs resources: {', '.join(missing)}"
    return True, ""


def _extract(
    doc: AnnotatedDocument,
    specs: tuple[FeatureSpec, ...],
    resources: Resources,
    cfg: FeatureConfig,
) -> FeatureVector:
    profile = DocumentProfile(doc, resources, cfg)
    if profile.n_words == 0:
        raise FeatureError(f"document {doc.id}: no words")
    values: dict[str, float] = {}
    available: dict[str, bool] = {}
    for spec in specs:
        ok, why = _availability(spec, doc, resources)
        if ok:
            values[spec.name] = float(COMPUTERS[spec.name](profile))
            available[spec.name] = True
        elif cfg.fill_policy == "error":
            raise FeatureError(f"feature {spec.name}: {why}")
        else:
            values[spec.name] = 0.0
            available[spec.name] = False
    return FeatureVector(
        values=values,
        available=available,
        warnings=tuple(profile.warnings),
    )


def extract_simple_statistics(
    doc: AnnotatedDocument, simple_words: Lexicon, cfg: FeatureConfig | None = None
) -> FeatureVector:
    """The ten baseline statistics; all computable from raw segmentation."""
    cfg = cfg or FeatureConfig()
    by_name = registry_by_name()
    specs = tuple(by_name[name] for name in SIMPLE_STATISTICS)
    return _extract(doc, specs, Resources(simple_words=simple_words), cfg)


def extract_category(
    doc: AnnotatedDocument,
    category: str,
    resources: Resources,
    cfg: FeatureConfig | None = None,
) -> FeatureVector:
    """Every feature whose primary category matches, availability-masked."""
    cfg = cfg or FeatureConfig()
    specs = tuple(s for s in feature_registry() if s.category == category)
    if not specs:
        raise FeatureError(f"unknown category: {category!r}")
    return _extract(doc, specs, resources, cfg)


def extract_all(
    doc: AnnotatedDocument,
    resources: Resources,
    cfg: FeatureConfig | None = None,
) -> FeatureVector:
    """The full registry in canonical order."""
    cfg = cfg or FeatureConfig()
    return _extract(doc, feature_registry(), resources, cfg)
