"""Position-aware character n-gram language model.

The model keeps separate count tables for three word zones (initial,
medial, final): the final character of a word is conditioned on the FINAL
zone, the first three characters on INITIAL, everything in between on
MEDIAL. Training, continuation lookup, the stochastic next-character
choice used by the generator, word scoring and a text file round trip all
live here.

Probabilities are maximum-likelihood relative frequencies with no
smoothing inside a context. Scoring backs off to shorter context suffixes
within the same zone and bottoms out at a fixed floor log-probability;
generation never backs off (an unseen stub simply has no continuations,
which makes the generator restart).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from random import Random
from typing import Iterable, Iterator, TextIO

from .alphabets import alphabet_index, validate_alphabet
from .corpus import WordFrequencyTable
from .errors import ModelFormatError, ScoringError, TrainingError

DEFAULT_ORDER = 4

# Contribution of a character no context level has ever seen.
FLOOR_LOG_PROB = math.log(1e-7)

FILE_MAGIC = "posgram"
FILE_VERSION = "v1"


class Zone(Enum):
    INITIAL = "I"
    MEDIAL = "M"
    FINAL = "F"


def zone_of(index: int, length: int) -> Zone:
    """Zone of character ``index`` (0-based) in a word of ``length``.

    The final character always counts as FINAL, even in words short enough
    that it would otherwise fall inside the initial window.
    """
    if index == length - 1:
        return Zone.FINAL
    if index <= 2:
        return Zone.INITIAL
    return Zone.MEDIAL


@dataclass(frozen=True)
class Continuation:
    """One observed follow-up character with its conditional log probability."""

    char: str
    log_likelihood: float


class PositionalNgramModel:
    """Zone-conditioned character n-gram counts with ordered lookup.

    Immutable once built; safe for unlimited concurrent readers. Counts are
    keyed by ``(zone, context)`` where the context is the up-to-(order-1)
    character stub preceding the predicted character.
    """

    def __init__(self, order: int, alphabet: str, name: str = "model"):
        if order < 2:
            raise ValueError("order must be at least 2")
        validate_alphabet(alphabet)
        self.order = order
        self.alphabet = alphabet
        self.name = name
        self._index = alphabet_index(alphabet)
        self._counts: dict[tuple[Zone, str], dict[str, int]] = {}
        self._totals: dict[tuple[Zone, str], int] = {}
        # Sorted continuation tuples, built lazily per context. setdefault
        # keeps concurrent readers consistent.
        self._ordered: dict[tuple[Zone, str], tuple[Continuation, ...]] = {}

    def _add(self, zone: Zone, context: str, char: str, count: int) -> None:
        key = (zone, context)
        bucket = self._counts.setdefault(key, {})
        bucket[char] = bucket.get(char, 0) + count
        self._totals[key] = self._totals.get(key, 0) + count

    def continuations(self, stub: str, zone: Zone) -> tuple[Continuation, ...]:
        """All characters observed after (zone, stub), most probable first.

        Ties break by alphabet order. An unseen context yields an empty
        tuple; that is a valid result, not an error.
        """
        if len(stub) >= self.order:
            raise ValueError(
                f"stub {stub!r} too long for order-{self.order} model"
            )
        key = (zone, stub)
        cached = self._ordered.get(key)
        if cached is not None:
            return cached
        bucket = self._counts.get(key)
        if bucket is None:
            return ()
        total = self._totals[key]
        ordered = tuple(
            sorted(
                (
                    Continuation(char, math.log(count / total))
                    for char, count in bucket.items()
                ),
                key=lambda c: (-c.log_likelihood, self._index[c.char]),
            )
        )
        return self._ordered.setdefault(key, ordered)

    def next_char(self, stub: str, zone: Zone, rng: Random) -> str | None:
        """Stochastic next-character choice over the ordered continuations.

        Walks the list from most to least probable, returning each element
        with probability 0.5; if no draw accepts, the last (least probable)
        element is returned. Returns None when the context has no
        continuations at all, in which case the caller must restart.
        """
        conts = self.continuations(stub, zone)
        if not conts:
            return None
        for cont in conts:
            if rng.random() >= 0.5:
                return cont.char
        return conts[-1].char

    def initial_characters(self) -> tuple[str, ...]:
        """Characters observed word-initially, in alphabet order."""
        bucket = self._counts.get((Zone.INITIAL, ""), {})
        return tuple(sorted(bucket, key=self._index.__getitem__))

    def score(self, word: str) -> float:
        """Natural-log likelihood of a word, summed over characters.

        Each character uses the longest context suffix (within its zone)
        that has actually been observed followed by that character; if no
        level down to the empty context has, the floor log-probability is
        contributed instead.
        """
        if len(word) < 2:
            raise ValueError("words shorter than 2 characters are not scorable")
        bad = sorted(set(word) - set(self.alphabet))
        if bad:
            raise ScoringError(
                f"cannot score {word!r}: characters {bad!r} outside the alphabet"
            )
        total = 0.0
        length = len(word)
        max_context = self.order - 1
        for i, char in enumerate(word):
            zone = zone_of(i, length)
            context = word[max(0, i - max_context) : i]
            contribution = FLOOR_LOG_PROB
            for start in range(len(context) + 1):
                key = (zone, context[start:])
                bucket = self._counts.get(key)
                if bucket is not None and char in bucket:
                    contribution = math.log(bucket[char] / self._totals[key])
                    break
            total += contribution
        return total

    def score_per_char(self, word: str) -> float:
        """Length-normalized score, for comparisons across lengths."""
        return self.score(word) / len(word)

    def iter_counts(self) -> Iterator[tuple[Zone, str, str, int]]:
        """Deterministic traversal of all (zone, context, char, count) entries."""
        for zone in Zone:
            contexts = sorted(
                ctx for (z, ctx) in self._counts if z is zone
            )
            for context in contexts:
                bucket = self._counts[(zone, context)]
                for char in sorted(bucket, key=self._index.__getitem__):
                    yield zone, context, char, bucket[char]

    def context_count(self) -> int:
        return len(self._counts)


def train(
    table: WordFrequencyTable, order: int = DEFAULT_ORDER, name: str = "model"
) -> PositionalNgramModel:
    """Count zone-conditioned n-gram statistics from a frequency table.

    Each word contributes once per occurrence (weighted by its count).
    """
    if not table.entries:
        raise TrainingError("cannot train on an empty frequency table")
    model = PositionalNgramModel(order=order, alphabet=table.alphabet, name=name)
    max_context = order - 1
    for word, count in table.entries.items():
        length = len(word)
        for i, char in enumerate(word):
            context = word[max(0, i - max_context) : i]
            model._add(zone_of(i, length), context, char, count)
    return model


_ZONE_BY_LETTER = {zone.value: zone for zone in Zone}


def save_model(model: PositionalNgramModel, target: str | Path | TextIO) -> None:
    """Write the model as UTF-8 text: a header line, then one count per line."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="\n") as stream:
            save_model(model, stream)
        return
    target.write(
        f"{FILE_MAGIC} {FILE_VERSION} order={model.order} alphabet={model.alphabet}\n"
    )
    for zone, context, char, count in model.iter_counts():
        target.write(f"{zone.value}\t{context}\t{char}\t{count}\n")


def load_model(
    source: str | Path | Iterable[str], name: str | None = None
) -> PositionalNgramModel:
    """Read a model file back; raises ModelFormatError naming the bad line."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        with open(path, encoding="utf-8") as stream:
            return load_model(stream, name=name or path.stem)
    lines = iter(source)
    try:
        header = next(lines)
    except StopIteration:
        raise ModelFormatError("empty model file", line=1) from None
    fields = header.rstrip("\n").split(" ")
    if len(fields) != 4 or fields[0] != FILE_MAGIC:
        raise ModelFormatError("not a posgram model file", line=1)
    if fields[1] != FILE_VERSION:
        raise ModelFormatError(f"unsupported version {fields[1]!r}", line=1)
    if not fields[2].startswith("order=") or not fields[3].startswith("alphabet="):
        raise ModelFormatError("malformed header", line=1)
    try:
        order = int(fields[2][len("order=") :])
    except ValueError:
        raise ModelFormatError("order is not an integer", line=1) from None
    alphabet = fields[3][len("alphabet=") :]
    try:
        model = PositionalNgramModel(
            order=order, alphabet=alphabet, name=name or "model"
        )
    except ValueError as exc:
        raise ModelFormatError(str(exc), line=1) from None
    allowed = set(alphabet)
    for lineno, raw in enumerate(lines, start=2):
        line = raw.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ModelFormatError("expected zone<TAB>context<TAB>char<TAB>count", line=lineno)
        zone_letter, context, char, count_text = parts
        zone = _ZONE_BY_LETTER.get(zone_letter)
        if zone is None:
            raise ModelFormatError(f"unknown zone {zone_letter!r}", line=lineno)
        if len(context) >= order:
            raise ModelFormatError("context longer than order allows", line=lineno)
        if len(char) != 1 or char not in allowed:
            raise ModelFormatError(f"bad character field {char!r}", line=lineno)
        if not allowed.issuperset(context):
            raise ModelFormatError(f"context {context!r} outside alphabet", line=lineno)
        try:
            count = int(count_text)
        except ValueError:
            raise ModelFormatError(f"bad count {count_text!r}", line=lineno) from None
        if count < 1:
            raise ModelFormatError("counts must be positive", line=lineno)
        model._add(zone, context, char, count)
    if not model._counts:
        raise ModelFormatError("model file has no count entries", line=1)
    return model
