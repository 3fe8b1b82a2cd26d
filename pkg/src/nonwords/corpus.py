"""Corpus ingestion: word-frequency tables, lexicons and transliteration.

Raw text goes in, a :class:`WordFrequencyTable` over a declared alphabet
comes out; lexicons provide the "existing word" authority for filtering;
transliteration maps vocalized Arabic onto a plain Latin alphabet so that
all language models share one character set.

All returned objects are immutable by convention after construction and
safe for concurrent readers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .alphabets import LATIN_ALPHABET, validate_alphabet
from .errors import InputFormatError, TransliterationError

MIN_WORD_LENGTH = 2

# Maximal runs of letters; everything else is a separator.
_LETTER_RUN = re.compile(r"[^\W\d_]+", re.UNICODE)


@dataclass
class WordFrequencyTable:
    """Lowercased word forms mapped to occurrence counts.

    Invariants: every key is at least two characters long, uses only
    characters of ``alphabet``, and has a count of at least one.
    """

    alphabet: str
    entries: dict[str, int] = field(default_factory=dict)

    def add(self, word: str, count: int = 1) -> None:
        self.entries[word] = self.entries.get(word, 0) + count

    def total_tokens(self) -> int:
        return sum(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def merge(self, other: "WordFrequencyTable") -> None:
        if other.alphabet != self.alphabet:
            raise ValueError("cannot merge tables over different alphabets")
        for word, count in other.entries.items():
            self.add(word, count)

    def top(self, n: int) -> list[str]:
        """The n most frequent forms (count desc, then alphabetical)."""
        return [
            w
            for w, _ in sorted(
                self.entries.items(), key=lambda item: (-item[1], item[0])
            )[:n]
        ]


def extract_words(text: str | Iterable[str], alphabet: str) -> WordFrequencyTable:
    """Tokenize text into a frequency table over the declared alphabet.

    Tokens are maximal runs of letters, lowercased. Tokens shorter than two
    characters or containing any character outside ``alphabet`` are
    discarded.
    """
    validate_alphabet(alphabet)
    table = WordFrequencyTable(alphabet=alphabet)
    allowed = set(alphabet)
    lines = [text] if isinstance(text, str) else text
    try:
        for line in lines:
            for match in _LETTER_RUN.finditer(line):
                token = match.group().lower()
                if len(token) < MIN_WORD_LENGTH:
                    continue
                if not allowed.issuperset(token):
                    continue
                table.add(token)
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"undecodable input: {exc}") from exc
    return table


def extract_words_from_path(path: str | Path, alphabet: str) -> WordFrequencyTable:
    try:
        with open(path, encoding="utf-8") as stream:
            return extract_words(stream, alphabet)
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"{path}: undecodable input: {exc}") from exc


def read_frequency_tsv(path: str | Path, alphabet: str) -> WordFrequencyTable:
    """Load a word<TAB>count table, validating the table invariants."""
    validate_alphabet(alphabet)
    allowed = set(alphabet)
    table = WordFrequencyTable(alphabet=alphabet)
    with open(path, encoding="utf-8") as stream:
        for lineno, raw in enumerate(stream, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise InputFormatError(f"{path}:{lineno}: expected word<TAB>count")
            word, count_text = parts[0].lower(), parts[1]
            try:
                count = int(count_text)
            except ValueError as exc:
                raise InputFormatError(
                    f"{path}:{lineno}: bad count {count_text!r}"
                ) from exc
            if count < 1:
                raise InputFormatError(f"{path}:{lineno}: count must be >= 1")
            if len(word) < MIN_WORD_LENGTH:
                raise InputFormatError(f"{path}:{lineno}: word shorter than 2")
            if not allowed.issuperset(word):
                raise InputFormatError(
                    f"{path}:{lineno}: {word!r} uses characters outside the alphabet"
                )
            table.add(word, count)
    return table


@dataclass
class Lexicon:
    """Existing word forms plus exclusion lists (names, abbreviations).

    Membership is exact string match after lowercasing the query. The
    filter treats the union of both sets as "existing".
    """

    words: set[str] = field(default_factory=set)
    exclusions: set[str] = field(default_factory=set)

    def is_word(self, text: str) -> bool:
        return text.lower() in self.words

    def is_excluded(self, text: str) -> bool:
        return text.lower() in self.exclusions

    def __contains__(self, text: str) -> bool:
        query = text.lower()
        return query in self.words or query in self.exclusions

    def size(self) -> int:
        """Number of distinct members across both sets."""
        return len(self.words | self.exclusions)


def _clean_lines(stream: Iterable[str]) -> Iterator[str]:
    for raw in stream:
        line = raw.strip().lower()
        if line:
            yield line


def load_lexicon(
    word_stream: Iterable[str], exclusion_stream: Iterable[str] = ()
) -> Lexicon:
    """Build a lexicon from newline-delimited word lists.

    Lines are lowercased and stripped; blanks and duplicates collapse.
    """
    try:
        words = set(_clean_lines(word_stream))
        exclusions = set(_clean_lines(exclusion_stream))
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"undecodable word list: {exc}") from exc
    return Lexicon(words=words, exclusions=exclusions)


def load_lexicon_from_paths(
    words_path: str | Path, exclusions_path: str | Path | None = None
) -> Lexicon:
    with open(words_path, encoding="utf-8") as words:
        if exclusions_path is None:
            return load_lexicon(words)
        with open(exclusions_path, encoding="utf-8") as exclusions:
            return load_lexicon(words, exclusions)


@dataclass
class TransliterationTable:
    """Ordered grapheme rewrite rules onto a Latin target alphabet.

    Rules apply left to right, longest source first; at most one rule fires
    per input position. Whitespace always passes through unchanged so that
    word boundaries survive. Characters with no rule are dropped when
    ``drop_unmapped`` is set, copied if they already belong to the target
    alphabet, and rejected otherwise.
    """

    rules: list[tuple[str, str]]
    drop_unmapped: bool = True
    target_alphabet: str = LATIN_ALPHABET

    def __post_init__(self) -> None:
        if not self.rules:
            raise ValueError("transliteration table needs at least one rule")
        allowed = set(self.target_alphabet)
        for source, replacement in self.rules:
            if not source:
                raise ValueError("empty rule source")
            if not allowed.issuperset(replacement):
                raise ValueError(
                    f"rule {source!r} -> {replacement!r} leaves the target alphabet"
                )
        self._by_source = dict(self.rules)
        self._lengths = sorted({len(s) for s in self._by_source}, reverse=True)


def transliterate(text: str, table: TransliterationTable) -> str:
    """Apply the table to a text, returning the Latin form."""
    out: list[str] = []
    allowed = set(table.target_alphabet)
    i = 0
    n = len(text)
    while i < n:
        fired = False
        for length in table._lengths:
            chunk = text[i : i + length]
            if len(chunk) == length and chunk in table._by_source:
                out.append(table._by_source[chunk])
                i += length
                fired = True
                break
        if fired:
            continue
        ch = text[i]
        if ch.isspace():
            out.append(ch)
        elif ch.lower() in allowed:
            out.append(ch.lower())
        elif not table.drop_unmapped:
            raise TransliterationError(ch, i)
        i += 1
    return "".join(out)


def transliterate_lines(
    lines: Iterable[str], table: TransliterationTable
) -> Iterator[str]:
    for line in lines:
        yield transliterate(line, table)


def load_transliteration_table(source: str | Path | Iterable[str]) -> TransliterationTable:
    """Parse a rule file: ``source<TAB>replacement`` lines, ``#`` comments,
    and optional ``!drop_unmapped`` / ``!alphabet`` header lines."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as stream:
            return load_transliteration_table(list(stream))
    rules: list[tuple[str, str]] = []
    drop_unmapped = True
    target_alphabet = LATIN_ALPHABET
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if line.startswith("!"):
            try:
                key, value = line[1:].split(None, 1)
            except ValueError as exc:
                raise InputFormatError(f"line {lineno}: bad header {line!r}") from exc
            if key == "drop_unmapped":
                if value.strip() not in ("true", "false"):
                    raise InputFormatError(
                        f"line {lineno}: drop_unmapped must be true or false"
                    )
                drop_unmapped = value.strip() == "true"
            elif key == "alphabet":
                target_alphabet = value.strip()
            else:
                raise InputFormatError(f"line {lineno}: unknown header {key!r}")
            continue
        if "\t" not in line:
            raise InputFormatError(f"line {lineno}: expected source<TAB>replacement")
        src, replacement = line.split("\t", 1)
        if not src:
            raise InputFormatError(f"line {lineno}: empty rule source")
        rules.append((src, replacement))
    try:
        return TransliterationTable(
            rules=rules, drop_unmapped=drop_unmapped, target_alphabet=target_alphabet
        )
    except ValueError as exc:
        raise InputFormatError(str(exc)) from exc
