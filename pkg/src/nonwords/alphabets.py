"""Alphabet definitions shared by models, generation and ranking.

An alphabet is an ordered string of distinct lowercase characters; its
order defines the deterministic tie-break used everywhere a list of words
or continuations must be totally ordered.
"""

SWEDISH_ALPHABET = "abcdefghijklmnopqrstuvwxyzåäö"
LATIN_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def alphabet_index(alphabet: str) -> dict[str, int]:
    """Map each character to its position in the declared alphabet."""
    return {ch: i for i, ch in enumerate(alphabet)}


def text_key(text: str, index: dict[str, int]) -> tuple[int, ...]:
    """Sort key ordering strings by alphabet position, character by character."""
    return tuple(index[ch] for ch in text)


def validate_alphabet(alphabet: str) -> None:
    if not alphabet:
        raise ValueError("alphabet must not be empty")
    if len(set(alphabet)) != len(alphabet):
        raise ValueError("alphabet contains duplicate characters")
