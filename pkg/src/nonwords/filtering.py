"""Candidate filtering and the orthographic neighborhood metric.

Filters are streaming: they return a lazy candidate iterator together with
a report object whose totals are final once the iterator is exhausted.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Iterable, Iterator

from .alphabets import SWEDISH_ALPHABET
from .corpus import Lexicon
from .errors import ScoringError
from .generator import Candidate
from .lm import PositionalNgramModel


@dataclass
class FilterReport:
    """Audit trail for one filtering pass.

    ``unscorable`` counts candidates removed because the model could not
    score them at all; they are included in ``removed_low_probability``.
    Invariant once the stream is exhausted: input_count equals output_count
    plus all removals.
    """

    input_count: int = 0
    removed_lexicon: int = 0
    removed_exclusion: int = 0
    removed_low_probability: int = 0
    unscorable: int = 0
    output_count: int = 0

    def removed_total(self) -> int:
        return (
            self.removed_lexicon
            + self.removed_exclusion
            + self.removed_low_probability
        )

    def add(self, other: "FilterReport") -> None:
        """Fold another pass into this report; input stays the first pass's."""
        self.removed_lexicon += other.removed_lexicon
        self.removed_exclusion += other.removed_exclusion
        self.removed_low_probability += other.removed_low_probability
        self.unscorable += other.unscorable
        self.output_count = other.output_count

    def as_dict(self) -> dict[str, int]:
        return {
            "input_count": self.input_count,
            "removed_lexicon": self.removed_lexicon,
            "removed_exclusion": self.removed_exclusion,
            "removed_low_probability": self.removed_low_probability,
            "unscorable": self.unscorable,
            "output_count": self.output_count,
        }


def filter_lexicon(
    candidates: Iterable[Candidate], lexicon: Lexicon
) -> tuple[Iterator[Candidate], FilterReport]:
    """Drop candidates that exist as words or sit on an exclusion list.

    The report's totals are only valid after the returned iterator has been
    fully consumed.
    """
    report = FilterReport()

    def passing() -> Iterator[Candidate]:
        for candidate in candidates:
            report.input_count += 1
            if lexicon.is_word(candidate.text):
                report.removed_lexicon += 1
            elif lexicon.is_excluded(candidate.text):
                report.removed_exclusion += 1
            else:
                report.output_count += 1
                yield candidate

    return passing(), report


def filter_low_probability(
    candidates: Iterable[Candidate],
    model: PositionalNgramModel,
    per_char_threshold: float,
) -> tuple[Iterator[Candidate], FilterReport]:
    """Drop candidates whose mean per-character log-likelihood is below the
    threshold; meant for the short exhaustive lengths where junk like
    "xxxxx" survives the lexicon filter. Unscorable candidates are removed
    and flagged."""
    report = FilterReport()

    def passing() -> Iterator[Candidate]:
        for candidate in candidates:
            report.input_count += 1
            try:
                mean = model.score_per_char(candidate.text)
            except (ScoringError, ValueError):
                report.removed_low_probability += 1
                report.unscorable += 1
                continue
            if mean < per_char_threshold:
                report.removed_low_probability += 1
            else:
                report.output_count += 1
                yield candidate

    return passing(), report


def default_low_probability_threshold(
    model: PositionalNgramModel,
    lexicon: Lexicon,
    length: int,
    percentile: float = 5.0,
) -> float:
    """Threshold anchored to real words: the given percentile of the
    per-character scores of lexicon words of the same length."""
    scores = []
    for word in lexicon.words:
        if len(word) != length:
            continue
        try:
            scores.append(model.score_per_char(word))
        except (ScoringError, ValueError):
            continue
    if len(scores) < 2:
        raise ValueError(
            f"lexicon has too few scorable words of length {length} "
            "to calibrate a threshold"
        )
    cuts = statistics.quantiles(scores, n=100, method="inclusive")
    rank = min(99, max(1, round(percentile))) - 1
    return cuts[rank]


def neighborhood_size(
    word: str, lexicon: Lexicon, alphabet: str = SWEDISH_ALPHABET
) -> int:
    """Coltheart's N: lexicon words reachable by substituting exactly one
    character. The word itself never counts (the substitution must change
    the character)."""
    if not word:
        raise ValueError("word must not be empty")
    count = 0
    for i, original in enumerate(word):
        prefix, suffix = word[:i], word[i + 1 :]
        for ch in alphabet:
            if ch != original and (prefix + ch + suffix) in lexicon.words:
                count += 1
    return count
