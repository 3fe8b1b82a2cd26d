"""Shared fixtures: desk-scale models trained on the bundled word data."""

from __future__ import annotations

from pathlib import Path

import pytest

from nonwords.alphabets import SWEDISH_ALPHABET
from nonwords.corpus import (
    Lexicon,
    extract_words,
    load_transliteration_table,
    read_frequency_tsv,
    transliterate,
)
from nonwords.lm import save_model, train

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"
TRANSLIT_TABLE = REPO_ROOT / "src" / "nonwords" / "data" / "arabic_translit.tsv"


@pytest.fixture(scope="session")
def sv_table():
    return read_frequency_tsv(DATA_DIR / "sv_wordfreq.tsv", SWEDISH_ALPHABET)


@pytest.fixture(scope="session")
def sv_model(sv_table):
    return train(sv_table, order=4, name="sv")


@pytest.fixture(scope="session")
def sv_lexicon(sv_table):
    exclusions = {
        line.strip().lower()
        for line in (DATA_DIR / "sv_exclusions.txt").read_text("utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    }
    return Lexicon(words=set(sv_table.entries), exclusions=exclusions)


@pytest.fixture(scope="session")
def ar_model():
    table = load_transliteration_table(TRANSLIT_TABLE)
    text = (DATA_DIR / "arabic_vocalized.txt").read_text("utf-8")
    latin = transliterate(text, table)
    freq = extract_words(latin, SWEDISH_ALPHABET)
    return train(freq, order=4, name="ar")


@pytest.fixture(scope="session")
def sv_model_file(sv_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "sv.posgram"
    save_model(sv_model, path)
    return path


@pytest.fixture(scope="session")
def ar_model_file(ar_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "ar.posgram"
    save_model(ar_model, path)
    return path


@pytest.fixture(scope="session")
def sv_wordlist_file(sv_table, tmp_path_factory):
    """The lexicon as a newline-delimited word list for CLI/service use."""
    path = tmp_path_factory.mktemp("lexicon") / "sv_words.txt"
    path.write_text("\n".join(sorted(sv_table.entries)) + "\n", encoding="utf-8")
    return path


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" in nodeid and getattr(report, "when", "call") == "call":
                lines.append(f"{label}: {nodeid.split('::')[-1]}")
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
