"""Candidate production: exhaustive short strings, model-driven sampling.

Lengths two to five are enumerated exhaustively (all combinations with
repetition, streamed in lexicographic order). Lengths six to eleven are
sampled from a trained model: a uniform random word-initial character,
then one character at a time from the ordered continuation walk; a dead
end restarts the whole word with a fresh first character.

Batches are generated in a fixed number of logical shards, each with its
own random stream derived from the caller's master source, and merged in
shard order. Worker threads only distribute shard execution, so output
depends on the seed alone, never on the worker count.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from random import Random
from typing import Iterator, Sequence

from .alphabets import validate_alphabet
from .errors import GenerationExhaustedError, PartialBatchError
from .lm import PositionalNgramModel, zone_of

EXHAUSTIVE_MIN_LENGTH = 2
EXHAUSTIVE_MAX_LENGTH = 5
SAMPLED_MIN_LENGTH = 6
SAMPLED_MAX_LENGTH = 11

DEFAULT_MAX_RESTARTS = 1000
DEFAULT_ATTEMPT_FACTOR = 50
BATCH_SHARDS = 8


class Provenance(Enum):
    EXHAUSTIVE = "exhaustive"
    SAMPLED = "sampled"


@dataclass(slots=True)
class Candidate:
    """A generated letter string; per-model scores are filled in by ranking."""

    text: str
    provenance: Provenance
    scores: dict[str, float] | None = None

    @property
    def length(self) -> int:
        return len(self.text)


def exhaustive_texts(alphabet: str, length: int) -> Iterator[str]:
    """Stream all |alphabet|^length strings in lexicographic order."""
    validate_alphabet(alphabet)
    if not EXHAUSTIVE_MIN_LENGTH <= length <= EXHAUSTIVE_MAX_LENGTH:
        raise ValueError(
            f"exhaustive generation covers lengths "
            f"{EXHAUSTIVE_MIN_LENGTH}-{EXHAUSTIVE_MAX_LENGTH}; "
            f"use sample_batch for length {length}"
        )
    return map("".join, itertools.product(alphabet, repeat=length))


def exhaustive(alphabet: str, length: int) -> Iterator[Candidate]:
    for text in exhaustive_texts(alphabet, length):
        yield Candidate(text, Provenance.EXHAUSTIVE)


def sample_word(
    model: PositionalNgramModel,
    target_length: int,
    rng: Random,
    max_restarts: int = DEFAULT_MAX_RESTARTS,
) -> Candidate:
    """Sample one word of exactly target_length from the model.

    The first character is uniform over characters observed word-initially;
    each later character comes from the model's next-character walk with
    the stub of up to order-1 preceding characters and the zone implied by
    the position within the target length. A dead end (no continuations)
    restarts the whole word.
    """
    if not SAMPLED_MIN_LENGTH <= target_length <= SAMPLED_MAX_LENGTH:
        raise ValueError(
            f"sampled generation covers lengths "
            f"{SAMPLED_MIN_LENGTH}-{SAMPLED_MAX_LENGTH}; "
            f"use exhaustive for length {target_length}"
        )
    if max_restarts < 1:
        raise ValueError("max_restarts must be at least 1")
    first_chars = model.initial_characters()
    if not first_chars:
        raise GenerationExhaustedError("model has no word-initial characters")
    stub_length = model.order - 1
    for _ in range(max_restarts):
        chars = [rng.choice(first_chars)]
        for i in range(1, target_length):
            stub = "".join(chars[-min(i, stub_length):])
            nxt = model.next_char(stub, zone_of(i, target_length), rng)
            if nxt is None:
                break
            chars.append(nxt)
        else:
            return Candidate("".join(chars), Provenance.SAMPLED)
    raise GenerationExhaustedError(
        f"no length-{target_length} word found in {max_restarts} restarts"
    )


def _derive_shard_rngs(rng: Random, shards: int) -> list[Random]:
    # One 64-bit seed per shard, drawn from the master source so the whole
    # batch is a pure function of that source's state.
    return [Random(rng.getrandbits(64)) for _ in range(shards)]


def sample_batch(
    model: PositionalNgramModel,
    target_length: int,
    count: int,
    rng: Random,
    max_attempts: int | None = None,
    shards: int = BATCH_SHARDS,
    workers: int = 1,
) -> list[Candidate]:
    """Sample ``count`` distinct words; duplicates are re-drawn.

    Words are produced round by round: every round each shard contributes a
    quota of words from its own stream, and the rounds' results are merged
    in shard order. The returned list preserves first-generation order in
    that merged sequence. Exceeding ``max_attempts`` raises
    PartialBatchError carrying whatever was generated.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if shards < 1:
        raise ValueError("shards must be at least 1")
    if max_attempts is None:
        max_attempts = DEFAULT_ATTEMPT_FACTOR * count
    shard_rngs = _derive_shard_rngs(rng, shards)
    found: dict[str, Candidate] = {}
    budget = max_attempts

    def run_shard(index: int, quota: int) -> list[Candidate]:
        shard_rng = shard_rngs[index]
        words = []
        for _ in range(quota):
            words.append(sample_word(model, target_length, shard_rng))
        return words

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while len(found) < count:
            need = count - len(found)
            quota = -(-need // shards)  # ceil
            if quota * shards > budget:
                quota = budget // shards
            if quota == 0:
                raise PartialBatchError(
                    f"generated {len(found)} of {count} distinct words "
                    f"within {max_attempts} attempts",
                    generated=list(found.values()),
                )
            tasks = range(shards)
            if pool is None:
                batches = [run_shard(s, quota) for s in tasks]
            else:
                batches = list(pool.map(lambda s: run_shard(s, quota), tasks))
            budget -= quota * shards
            for batch in batches:
                for candidate in batch:
                    if candidate.text not in found:
                        found[candidate.text] = candidate
    except GenerationExhaustedError as exc:
        if isinstance(exc, PartialBatchError):
            raise
        raise PartialBatchError(
            f"generated {len(found)} of {count} distinct words before "
            f"the model ran dry: {exc}",
            generated=list(found.values()),
        ) from exc
    finally:
        if pool is not None:
            pool.shutdown()
    return list(found.values())[:count]


def write_word_lines(candidates: Sequence[Candidate] | Iterator[Candidate], stream, tsv: bool = False) -> int:
    """Serialize candidates one word per line; TSV adds the provenance column."""
    n = 0
    for candidate in candidates:
        if tsv:
            stream.write(f"{candidate.text}\t{candidate.provenance.value}\n")
        else:
            stream.write(candidate.text + "\n")
        n += 1
    return n
