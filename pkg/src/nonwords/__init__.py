"""Swedish-style non-word generation, ranking and study analysis."""

__version__ = "0.1.0"

from .alphabets import LATIN_ALPHABET, SWEDISH_ALPHABET
from .corpus import (
    Lexicon,
    TransliterationTable,
    WordFrequencyTable,
    extract_words,
    load_lexicon,
    load_transliteration_table,
    transliterate,
)
from .generator import Candidate, Provenance, exhaustive, sample_batch, sample_word
from .lm import PositionalNgramModel, Zone, load_model, save_model, train, zone_of
from .ranker import (
    RankedList,
    StudyDesign,
    StudyList,
    build_decision_blocks,
    build_perception_list,
    rank,
    rerank,
    select_disjoint_top,
    top_k_intersection,
)
from .study import TrialRecord, accuracy, group_reaction_times, normalized_average

__all__ = [
    "LATIN_ALPHABET",
    "SWEDISH_ALPHABET",
    "Candidate",
    "Lexicon",
    "PositionalNgramModel",
    "Provenance",
    "RankedList",
    "StudyDesign",
    "StudyList",
    "TransliterationTable",
    "TrialRecord",
    "WordFrequencyTable",
    "Zone",
    "accuracy",
    "build_decision_blocks",
    "build_perception_list",
    "exhaustive",
    "extract_words",
    "group_reaction_times",
    "load_lexicon",
    "load_model",
    "load_transliteration_table",
    "normalized_average",
    "rank",
    "rerank",
    "sample_batch",
    "sample_word",
    "save_model",
    "select_disjoint_top",
    "top_k_intersection",
    "train",
    "transliterate",
    "zone_of",
]
