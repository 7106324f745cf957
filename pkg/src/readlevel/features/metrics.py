"""Readability and lexical-richness formulas as pure functions of counts.

All formulas take plain numbers so they can be checked against hand
computations independently of document parsing.
"""

from __future__ import annotations

import math

# Reading-ease constants recalibrated for Portuguese; the classic English
# constants are (206.835, 1.015, 84.6).
FLESCH_CONSTANTS = (248.835, 1.015, 84.6)
# Grade-level constants; these are the standard English ones.
FK_CONSTANTS = (0.39, 11.8, 15.59)

DEFAULT_INCIDENCE_BASE = 1000
DEFAULT_HONORE_CAP = 2000.0


def flesch_reading_ease(
    words_per_sentence: float,
    syllables_per_word: float,
    constants: tuple[float, float, float] = FLESCH_CONSTANTS,
) -> float:
    """a - b*(words/sentence) - c*(syllables/word); higher reads easier."""
    a, b, c = constants
    return a - b * words_per_sentence - c * syllables_per_word


def flesch_kincaid_grade(
    words_per_sentence: float,
    syllables_per_word: float,
    constants: tuple[float, float, float] = FK_CONSTANTS,
) -> float:
    """a*(words/sentence) + b*(syllables/word) - c; higher means harder."""
    a, b, c = constants
    return a * words_per_sentence + b * syllables_per_word - c


def incidence(
    count: float, word_total: int, base: int = DEFAULT_INCIDENCE_BASE
) -> float:
    """Occurrences per ``base`` words."""
    if word_total <= 0:
        raise ValueError("incidence requires a positive word total")
    return count * base / word_total


def honore_statistic(
    n_tokens: int,
    n_types: int,
    n_hapax: int,
    cap: float = DEFAULT_HONORE_CAP,
) -> tuple[float, bool]:
    """100*ln(N) / (1 - V1/V) over tokens N, types V, hapax types V1.

    The statistic diverges when every type is a hapax (V1 == V); that case
    returns ``(cap, True)`` so downstream vectors stay finite.
    """
    if n_tokens < 1 or n_types < 1 or not 0 <= n_hapax <= n_types:
        raise ValueError("honore_statistic needs 1 <= V, 0 <= V1 <= V, N >= 1")
    if n_hapax == n_types:
        return cap, True
    return 100.0 * math.log(n_tokens) / (1.0 - n_hapax / n_types), False


def brunet_index(n_tokens: int, n_types: int) -> float:
    """N ** (V ** -0.165); lower values mean a richer vocabulary."""
    if n_tokens < 1 or n_types < 1:
        raise ValueError("brunet_index needs N >= 1 and V >= 1")
    return n_tokens ** (n_types**-0.165)
