"""The frozen feature registry.

Every extractable feature is declared here once with its primary category,
the annotation depth it needs, and the lexical resources it reads.  Features
that belong to several linguistic categories are registered under one
primary category and carry the others as cross-category metadata.  Names and
order are frozen by a golden file in the test suite; changing either
requires bumping REGISTRY_VERSION.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from ..textmodel import AnnotationDepth

REGISTRY_VERSION = "1"

CATEGORIES = (
    "morphological",
    "lexical",
    "syntactic",
    "textual",
    "punctuation",
    "semantic_commonsense",
)

# The ten language-independent baseline statistics (plus the simple-words
# dictionary count), listed in their conventional report order.
SIMPLE_STATISTICS = (
    "flesch_kincaid_grade",
    "mean_sentences_per_paragraph",
    "mean_words_per_sentence",
    "num_paragraphs",
    "num_sentences",
    "num_words",
    "type_token_ratio",
    "num_simple_words",
    "punct_incidence",
    "punct_diversity",
)


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    category: str
    required_depth: AnnotationDepth
    required_resources: frozenset[str] = field(default_factory=frozenset)
    cross_categories: tuple[str, ...] = ()
    approximation: str | None = None
    extension: bool = False

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category: {self.category!r}")
        for extra in self.cross_categories:
            if extra not in CATEGORIES or extra == self.category:
                raise ValueError(f"bad cross category: {extra!r}")


RAW = AnnotationDepth.RAW
TAGGED = AnnotationDepth.TAGGED
PARSED = AnnotationDepth.PARSED

_NP_NOTE = "noun phrases approximated as noun and pronoun tokens"
_PAIR_NOTE = "binary per sentence pair; reported as proportion of pairs"


def _morphological() -> list[FeatureSpec]:
    def mood(name: str) -> FeatureSpec:
        return FeatureSpec(
            name=name,
            category="morphological",
            required_depth=TAGGED,
            cross_categories=("syntactic",),
        )

    return [
        mood("inc_indicative_preterite_perfect"),
        FeatureSpec("mean_syllables_per_content_word", "morphological", TAGGED),
        mood("inc_imperative"),
        mood("inc_indicative_imperfect"),
        mood("inc_indicative_future"),
        mood("inc_subjunctive"),
        mood("inc_indicative_pluperfect"),
        mood("inc_indicative_present"),
        FeatureSpec(
            "flesch_index",
            "morphological",
            RAW,
            cross_categories=("lexical", "punctuation"),
        ),
        mood("inc_indicative_future_of_past"),
        FeatureSpec("flesch_kincaid_grade", "morphological", RAW),
    ]


def _lexical() -> list[FeatureSpec]:
    def lex(name, depth=TAGGED, res=(), cross=(), note=None, ext=False):
        return FeatureSpec(
            name=name,
            category="lexical",
            required_depth=depth,
            required_resources=frozenset(res),
            cross_categories=cross,
            approximation=note,
            extension=ext,
        )

    return [
        lex("inc_adjectives"),
        lex("inc_adverbs"),
        lex("inc_content_words"),
        lex("inc_function_words"),
        lex("mean_words_per_sentence", depth=RAW),
        lex("inc_nouns"),
        lex("num_words", depth=RAW),
        lex("inc_verbs"),
        lex(
            "mean_content_word_frequency",
            res=("word_frequencies",),
            note="words absent from the frequency list count as frequency 0",
        ),
        lex(
            "min_content_word_frequency",
            res=("word_frequencies",),
            note="words absent from the frequency list count as frequency 0",
        ),
        lex("mean_hypernyms_per_verb", res=("sense_inventory",)),
        lex("brunet_index", depth=RAW),
        lex("honore_statistic", depth=RAW),
        lex(
            "mean_pronouns_per_noun_phrase",
            cross=("syntactic",),
            note=_NP_NOTE,
        ),
        lex("type_token_ratio", depth=RAW),
        lex("ambiguity_of_adjectives", res=("sense_inventory",)),
        lex("ambiguity_of_adverbs", res=("sense_inventory",)),
        lex("ambiguity_of_nouns", res=("sense_inventory",)),
        lex("ambiguity_of_verbs", res=("sense_inventory",)),
        lex(
            "words_before_main_verb",
            note="main verb taken as the first finite verb of each sentence",
        ),
        lex(
            "mean_prepositions_per_clause",
            depth=PARSED,
            cross=("syntactic",),
            note="ratio of preposition tokens to clauses",
        ),
        lex(
            "mean_prepositions_per_sentence",
            cross=("syntactic",),
            note="ratio of preposition tokens to sentences",
        ),
        lex("num_simple_words", depth=RAW, res=("simple_words",)),
        lex(
            "ext_simple_word_ratio",
            depth=RAW,
            res=("simple_words",),
            note="simple-word matches over word total; companion to the raw count",
            ext=True,
        ),
    ]


def _syntactic() -> list[FeatureSpec]:
    def syn(name, depth=PARSED, note=None):
        return FeatureSpec(
            name=name,
            category="syntactic",
            required_depth=depth,
            approximation=note,
        )

    specs = [
        syn("mean_clauses_per_sentence"),
        syn("modifiers_per_noun_phrase", depth=TAGGED, note=_NP_NOTE),
        syn("noun_phrase_incidence", depth=TAGGED, note=_NP_NOTE),
        syn(
            "mean_adverbial_adjuncts_per_clause",
            note="adverbial adjuncts approximated as adverb tokens",
        ),
        syn("inc_coordinate_clauses"),
        syn("mean_apposition_per_clause"),
        syn("inc_gerund_verbs", depth=TAGGED),
        syn("inc_infinitive_verbs", depth=TAGGED),
        syn("inc_verbals", depth=TAGGED),
        syn("inc_initiating_subordinate_clauses"),
        syn("inc_participle_verbs", depth=TAGGED),
        syn("inc_passive_sentences"),
        syn("inc_relative_clauses"),
    ]
    for k in (5, 4):
        specs.append(syn(f"inc_sentences_with_{k}_clauses"))
    specs.append(syn("inc_sentences_with_1_clause"))
    specs.append(syn("inc_sentences_with_7_or_more_clauses"))
    for k in (6, 3, 2, 0):
        specs.append(syn(f"inc_sentences_with_{k}_clauses"))
    specs.append(syn("inc_subordinate_clauses"))
    return specs


def _textual() -> list[FeatureSpec]:
    def txt(name, res=(), depth=RAW, note=None):
        return FeatureSpec(
            name=name,
            category="textual",
            required_depth=depth,
            required_resources=frozenset(res),
            approximation=note,
        )

    specs = [
        txt("inc_ands", res=("logical_operators",)),
        txt("inc_ifs", res=("logical_operators",)),
        txt("inc_ors", res=("logical_operators",)),
        txt("inc_negations", res=("logical_operators",)),
        txt("inc_logic_operators", res=("logical_operators",)),
        txt("inc_connectives", res=("connectives",)),
    ]
    for cls in ("additive", "causal", "logical", "temporal"):
        for pol in ("negative", "positive"):
            specs.append(
                txt(f"inc_{cls}_{pol}_connectives", res=("connectives",))
            )
    anaphora_note = (
        "anaphoric reference approximated as a third-person pronoun with a "
        "noun in the earlier sentence; " + _PAIR_NOTE
    )
    specs += [
        txt(
            "adjacent_anaphoric_references",
            res=("pronouns",),
            depth=TAGGED,
            note=anaphora_note,
        ),
        txt(
            "anaphoric_references",
            res=("pronouns",),
            depth=TAGGED,
            note=anaphora_note,
        ),
        txt("adjacent_argument_overlap", depth=TAGGED, note=_PAIR_NOTE),
        txt("argument_overlap", depth=TAGGED, note=_PAIR_NOTE),
        txt(
            "adjacent_stem_overlap",
            depth=TAGGED,
            note="stems from a small suffix-stripping rule list; " + _PAIR_NOTE,
        ),
        txt(
            "stem_overlap",
            depth=TAGGED,
            note="stems from a small suffix-stripping rule list; " + _PAIR_NOTE,
        ),
        txt("adjacent_content_word_overlap", depth=TAGGED, note=_PAIR_NOTE),
        txt("inc_ambiguous_discourse_markers", res=("discourse_markers",)),
        txt("inc_discourse_markers", res=("discourse_markers",)),
        txt("inc_pronouns", res=("pronouns",)),
    ]
    for person in (1, 2, 3):
        specs.append(
            txt(f"inc_person{person}_possessive_pronouns", res=("pronouns",))
        )
        specs.append(txt(f"inc_person{person}_pronouns", res=("pronouns",)))
    return specs


def _punctuation() -> list[FeatureSpec]:
    return [
        FeatureSpec("punct_diversity", "punctuation", RAW),
        FeatureSpec("num_paragraphs", "punctuation", RAW),
        FeatureSpec("punct_incidence", "punctuation", RAW),
        FeatureSpec("num_sentences", "punctuation", RAW),
        FeatureSpec("mean_sentences_per_paragraph", "punctuation", RAW),
    ]


def _semantic() -> list[FeatureSpec]:
    def sem(name, res=(), depth=TAGGED, note=None):
        return FeatureSpec(
            name=name,
            category="semantic_commonsense",
            required_depth=depth,
            required_resources=frozenset(res),
            approximation=note,
        )

    entity_note = "entity counts are per annotated token"
    specs = [
        sem("inc_negative_words", res=("negative_words",), depth=RAW),
        sem("inc_positive_words", res=("positive_words",), depth=RAW),
    ]
    for stem in (
        "concrete_moving_entities",
        "concrete_non_moving_entities",
    ):
        specs.append(sem(f"inc_{stem}_per_sentence", note=entity_note))
        specs.append(sem(f"inc_{stem}", note=entity_note))
    specs += [
        sem("inc_human_entities_per_sentence", note=entity_note),
        sem(
            "inc_human_entity_sentences",
            note="counts sentences containing a human entity",
        ),
        sem("inc_named_entities_per_sentence", note=entity_note),
        sem("inc_named_entities", note=entity_note),
    ]
    for stem in (
        "non_human_moving_entities",
        "non_human_non_moving_entities",
        "topological_entities",
    ):
        specs.append(sem(f"inc_{stem}_per_sentence", note=entity_note))
        specs.append(sem(f"inc_{stem}", note=entity_note))
    return specs


@lru_cache(maxsize=1)
def feature_registry() -> tuple[FeatureSpec, ...]:
    """All feature specs in their frozen canonical order."""
    specs = (
        _morphological()
        + _lexical()
        + _syntactic()
        + _textual()
        + _punctuation()
        + _semantic()
    )
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise AssertionError("duplicate feature names in registry")
    return tuple(specs)


@lru_cache(maxsize=1)
def registry_by_name() -> dict[str, FeatureSpec]:
    return {spec.name: spec for spec in feature_registry()}


def feature_names() -> tuple[str, ...]:
    return tuple(spec.name for spec in feature_registry())
