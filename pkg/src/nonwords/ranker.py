"""Score-based ordering, cross-model re-ranking and study list construction.

Ranking is deterministic: score descending, ties broken by the model
alphabet's order. Re-ranking by another language's model is how a plain
Swedish-looking list turns into an L1-specific one.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from random import Random
from typing import Iterable, Mapping, Sequence

from .alphabets import alphabet_index, text_key
from .errors import RankingError, SelectionError, StudyConstructionError
from .generator import Candidate
from .lm import PositionalNgramModel

FILLER_GROUP = "FI"
PERCEPTION_GROUPS = ("g1", "g2", "g3")
DECISION_BLOCK_SIZE = 4


class StudyDesign(Enum):
    PERCEPTION = "perception"
    LEXICAL_DECISION = "lexical_decision"


@dataclass
class RankedList:
    """Candidates ordered by one model's score (descending)."""

    model_id: str
    items: list[Candidate]

    def texts(self) -> list[str]:
        return [candidate.text for candidate in self.items]

    def top(self, k: int) -> list[Candidate]:
        return self.items[:k]

    def tsv_lines(self) -> Iterable[str]:
        for position, candidate in enumerate(self.items, start=1):
            score = candidate.scores[self.model_id]
            yield f"{position}\t{candidate.text}\t{score}"


@dataclass(frozen=True)
class StudyItem:
    text: str
    group: str
    block: int | None = None


@dataclass
class StudyList:
    """An ordered stimulus list for one of the two study designs."""

    design: StudyDesign
    items: list[StudyItem]
    seed: int | None = None

    def texts(self) -> list[str]:
        return [item.text for item in self.items]

    def to_json_dict(self) -> dict:
        return {
            "design": self.design.value,
            "seed": self.seed,
            "items": [
                {"text": item.text, "group": item.group, "block": item.block}
                for item in self.items
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "StudyList":
        return cls(
            design=StudyDesign(doc["design"]),
            seed=doc.get("seed"),
            items=[
                StudyItem(item["text"], item["group"], item.get("block"))
                for item in doc["items"]
            ],
        )


def _score_into(candidate: Candidate, model: PositionalNgramModel, model_id: str) -> float:
    if candidate.scores is None:
        candidate.scores = {}
    score = model.score(candidate.text)
    candidate.scores[model_id] = score
    return score


def rank(
    candidates: Iterable[Candidate],
    model: PositionalNgramModel,
    model_id: str | None = None,
) -> RankedList:
    """Order candidates by model score descending, alphabet-order tie-break.

    The input set is unchanged apart from the score annotation; duplicates
    or unscorable candidates raise RankingError naming the offenders.
    """
    mid = model_id or model.name
    index = alphabet_index(model.alphabet)
    items = list(candidates)
    offenders = []
    for candidate in items:
        try:
            _score_into(candidate, model, mid)
        except Exception:
            offenders.append(candidate.text)
    if offenders:
        raise RankingError(
            f"{len(offenders)} candidate(s) not scorable under {mid!r}: "
            f"{offenders[:10]}",
            offenders=offenders,
        )
    seen: set[str] = set()
    duplicates = []
    for candidate in items:
        if candidate.text in seen:
            duplicates.append(candidate.text)
        seen.add(candidate.text)
    if duplicates:
        raise RankingError(
            f"duplicate candidate texts: {sorted(set(duplicates))[:10]}",
            offenders=duplicates,
        )
    items.sort(key=lambda c: (-c.scores[mid], text_key(c.text, index)))
    return RankedList(model_id=mid, items=items)


def top_ranked(
    candidates: Iterable[Candidate],
    model: PositionalNgramModel,
    k: int,
    model_id: str | None = None,
) -> RankedList:
    """Streaming top-k variant of rank(): same ordering, bounded memory.

    Useful when the candidate stream is huge (exhaustive short lengths) and
    only the best k are wanted.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    mid = model_id or model.name
    index = alphabet_index(model.alphabet)
    # heap orders worst-first: lowest score, then alphabet-latest text. The
    # running counter keeps entries totally ordered without ever comparing
    # Candidate objects.
    heap: list[tuple[float, tuple[int, ...], int, Candidate]] = []
    for position, candidate in enumerate(candidates):
        score = _score_into(candidate, model, mid)
        entry = (
            score,
            tuple(-i for i in text_key(candidate.text, index)),
            -position,
            candidate,
        )
        if len(heap) < k:
            heapq.heappush(heap, entry)
        elif entry[:3] > heap[0][:3]:
            heapq.heapreplace(heap, entry)
    ordered = [entry[3] for entry in sorted(heap, key=lambda e: e[:3], reverse=True)]
    texts = [c.text for c in ordered]
    if len(set(texts)) != len(texts):
        raise RankingError("duplicate candidate texts in stream", offenders=texts)
    return RankedList(model_id=mid, items=ordered)


def rerank(
    ranked: RankedList,
    other_model: PositionalNgramModel,
    model_id: str | None = None,
) -> RankedList:
    """Re-order the same candidate set under another model's scores."""
    return rank(ranked.items, other_model, model_id=model_id)


def top_k_intersection(a: RankedList, b: RankedList, k: int) -> set[str]:
    """Texts present in the first k items of both rankings."""
    if k < 0 or k > len(a.items) or k > len(b.items):
        raise ValueError(
            f"k={k} out of range for rankings of size {len(a.items)} and {len(b.items)}"
        )
    return {c.text for c in a.items[:k]} & {c.text for c in b.items[:k]}


def select_disjoint_top(
    rankings: Sequence[RankedList], k: int
) -> list[list[Candidate]]:
    """Top-k per ranking with cross-list collisions skipped.

    Rankings are processed in the given order; each takes its k best items
    not already claimed by an earlier list, walking further down on
    collisions. The resulting lists are pairwise disjoint.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    claimed: set[str] = set()
    selections: list[list[Candidate]] = []
    for ranking in rankings:
        chosen: list[Candidate] = []
        for candidate in ranking.items:
            if len(chosen) == k:
                break
            if candidate.text in claimed:
                continue
            chosen.append(candidate)
            claimed.add(candidate.text)
        if len(chosen) < k:
            raise SelectionError(
                f"ranking {ranking.model_id!r} exhausted after "
                f"{len(chosen)} of {k} unclaimed items"
            )
        selections.append(chosen)
    return selections


def sample_items(items: Sequence[str], k: int, rng: Random) -> list[str]:
    """Seeded sample without replacement (e.g. picking study words from an
    intersection set)."""
    if k > len(items):
        raise ValueError(f"cannot sample {k} from {len(items)} items")
    return rng.sample(list(items), k)


def build_perception_list(
    g1: Sequence[str], g2: Sequence[str], g3: Sequence[str]
) -> StudyList:
    """Round-robin interleave of the three groups: g1, g2, g3, g1, ..."""
    if not (len(g1) == len(g2) == len(g3)):
        raise StudyConstructionError(
            f"groups must have equal lengths, got {len(g1)}/{len(g2)}/{len(g3)}"
        )
    items = []
    for triple in zip(g1, g2, g3):
        for text, group in zip(triple, PERCEPTION_GROUPS):
            items.append(StudyItem(text=text, group=group))
    return StudyList(design=StudyDesign.PERCEPTION, items=items)


def build_decision_blocks(
    per_model_lists: Mapping[str, Sequence[str]],
    fillers: Sequence[str],
    rng: Random,
    seed: int | None = None,
) -> StudyList:
    """Blocks of four, one item per source per block, shuffled inside.

    ``per_model_lists`` maps group tags (e.g. DE/EN/SV) to non-word lists;
    fillers are existing words and get the FI tag. All four lists must have
    the same length k, producing k blocks.
    """
    if FILLER_GROUP in per_model_lists:
        raise StudyConstructionError(
            f"{FILLER_GROUP!r} is reserved for fillers"
        )
    sources = [(tag, list(words)) for tag, words in per_model_lists.items()]
    sources.append((FILLER_GROUP, list(fillers)))
    if len(sources) != DECISION_BLOCK_SIZE:
        raise StudyConstructionError(
            f"need {DECISION_BLOCK_SIZE - 1} model lists plus fillers, "
            f"got {len(sources) - 1} model lists"
        )
    lengths = {len(words) for _, words in sources}
    if len(lengths) != 1:
        raise StudyConstructionError(
            f"all lists must have equal lengths, got {sorted(lengths)}"
        )
    (k,) = lengths
    items: list[StudyItem] = []
    for block in range(k):
        entries = [
            StudyItem(text=words[block], group=tag, block=block)
            for tag, words in sources
        ]
        rng.shuffle(entries)
        items.extend(entries)
    return StudyList(design=StudyDesign.LEXICAL_DECISION, items=items, seed=seed)
