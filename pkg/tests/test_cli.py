import csv
import io
import json
import os
import subprocess
import sys

import pytest

from nonwords.generator import Candidate, Provenance
from nonwords.lm import load_model
from nonwords.ranker import rank

from conftest import DATA_DIR


def run_cli(args, stdin="", env_extra=None):
    env = dict(os.environ)
    env.setdefault("PYTHONIOENCODING", "utf-8")
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "nonwords", *args],
        input=stdin,
        capture_output=True,
        text=True,
        encoding="utf-8",
        env=env,
    )


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "toy.txt"
    words = ["backen", "bocken", "bucken", "læ", "stacken", "stocken",
             "stugan", "stolen", "boken", "bokens", "stolens", "balken",
             "bolken", "banken", "bunken", "stolpen", "stampen", "stumpen",
             "stanken", "stinken", "backar", "bankar", "bunkar", "stolpar"]
    path.write_text(" ".join(words * 40) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def toy_model_file(corpus_file, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-models") / "toy.posgram"
    result = run_cli(
        ["train", "--corpus", str(corpus_file), "--order", "4", "--out", str(out)]
    )
    assert result.returncode == 0, result.stderr
    return out


class TestVersionAndUsage:
    def test_version(self):
        result = run_cli(["--version"])
        assert result.returncode == 0
        assert result.stdout.strip() == "nonwords 0.1.0"

    def test_unknown_flag_is_usage_error(self):
        result = run_cli(["generate", "--nope"])
        assert result.returncode == 1

    def test_missing_subcommand(self):
        result = run_cli([])
        assert result.returncode == 1


class TestTrain:
    def test_model_file_written_and_loadable(self, toy_model_file):
        model = load_model(toy_model_file)
        assert model.order == 4
        assert model.score("backen") < 0.0 or model.score("backen") == 0.0

    def test_missing_corpus_is_data_error(self, tmp_path):
        result = run_cli(
            ["train", "--corpus", str(tmp_path / "nope.txt"), "--out",
             str(tmp_path / "m.posgram")]
        )
        assert result.returncode == 2


class TestGenerate:
    def test_exhaustive_over_two_letter_alphabet(self):
        result = run_cli(
            ["generate", "--exhaustive", "--length", "2"],
            env_extra={"NONWORDS_ALPHABET": "ab"},
        )
        assert result.returncode == 0
        assert result.stdout.splitlines() == ["aa", "ab", "ba", "bb"]

    def test_exhaustive_uses_model_alphabet(self, toy_model_file):
        result = run_cli(
            ["generate", "--exhaustive", "--length", "2", "--model",
             str(toy_model_file)]
        )
        assert result.returncode == 0
        assert len(result.stdout.splitlines()) == 29**2

    def test_sampled_requires_model(self):
        result = run_cli(["generate", "--length", "6", "--count", "3"])
        assert result.returncode == 1

    def test_sampled_words(self, toy_model_file):
        result = run_cli(
            ["generate", "--model", str(toy_model_file), "--length", "6",
             "--count", "5", "--seed", "11"]
        )
        assert result.returncode == 0, result.stderr
        words = result.stdout.splitlines()
        assert len(words) == len(set(words)) == 5
        assert all(len(w) == 6 for w in words)

    def test_require_seed_lint(self, toy_model_file):
        result = run_cli(
            ["--require-seed", "generate", "--model", str(toy_model_file),
             "--length", "6", "--count", "2"]
        )
        assert result.returncode == 1

    def test_exhausted_exit_code(self, tmp_path, corpus_file):
        single = tmp_path / "single.txt"
        single.write_text("abcdef abcdef\n", encoding="utf-8")
        model_path = tmp_path / "single.posgram"
        assert run_cli(
            ["train", "--corpus", str(single), "--out", str(model_path)]
        ).returncode == 0
        result = run_cli(
            ["generate", "--model", str(model_path), "--length", "6",
             "--count", "10", "--seed", "1"]
        )
        assert result.returncode == 3


class TestFilterAndRank:
    def test_filter_reports_on_stderr(self, tmp_path):
        lexicon = tmp_path / "lex.txt"
        lexicon.write_text("hus\nbil\n", encoding="utf-8")
        result = run_cli(
            ["filter", "--lexicon", str(lexicon)], stdin="hus\nblork\nbil\nsnral\n"
        )
        assert result.returncode == 0
        assert result.stdout.splitlines() == ["blork", "snral"]
        report = dict(
            line.split("=") for line in result.stderr.strip().splitlines()
        )
        assert report["input_count"] == "4"
        assert report["removed_lexicon"] == "2"
        assert report["output_count"] == "2"

    def test_rank_tsv_matches_library(self, toy_model_file):
        words = ["snubbe", "backen", "blorke", "stulle"]
        result = run_cli(
            ["rank", "--model", str(toy_model_file)], stdin="\n".join(words) + "\n"
        )
        assert result.returncode == 0
        model = load_model(toy_model_file, name=str(toy_model_file))
        expected = rank(
            [Candidate(w, Provenance.SAMPLED) for w in words],
            model,
            model_id=str(toy_model_file),
        )
        assert result.stdout.splitlines() == list(expected.tsv_lines())

    def test_rank_top_k(self, toy_model_file):
        result = run_cli(
            ["rank", "--model", str(toy_model_file), "--top", "2"],
            stdin="snubbe\nbacken\nblorke\n",
        )
        assert len(result.stdout.splitlines()) == 2

    def test_unscorable_input_is_data_error(self, toy_model_file):
        result = run_cli(
            ["rank", "--model", str(toy_model_file)], stdin="abc123\n"
        )
        assert result.returncode == 2


class TestPipelineDeterminism:
    def test_generate_filter_rank_twice_identical(self, toy_model_file, tmp_path):
        lexicon = tmp_path / "lex.txt"
        lexicon.write_text("backen\nbocken\n", encoding="utf-8")

        def pipeline(workers):
            generated = run_cli(
                ["generate", "--model", str(toy_model_file), "--length", "6",
                 "--count", "8", "--seed", "99"],
                env_extra={"NONWORDS_WORKERS": workers},
            )
            assert generated.returncode == 0, generated.stderr
            filtered = run_cli(
                ["filter", "--lexicon", str(lexicon)], stdin=generated.stdout
            )
            assert filtered.returncode == 0
            ranked = run_cli(
                ["rank", "--model", str(toy_model_file)], stdin=filtered.stdout
            )
            assert ranked.returncode == 0
            return ranked.stdout

        first = pipeline("1")
        second = pipeline("1")
        with_workers = pipeline("4")
        assert first == second == with_workers


class TestStudyBuild:
    def test_perception(self, tmp_path):
        for tag, words in [("g1", "aa\nab"), ("g2", "ba\nbb"), ("g3", "ca\ncb")]:
            (tmp_path / f"{tag}.txt").write_text(words + "\n", encoding="utf-8")
        result = run_cli(
            ["study-build", "--design", "perception", "--inputs",
             str(tmp_path / "g1.txt"), str(tmp_path / "g2.txt"),
             str(tmp_path / "g3.txt")]
        )
        assert result.returncode == 0, result.stderr
        doc = json.loads(result.stdout)
        assert doc["design"] == "perception"
        assert [i["group"] for i in doc["items"]] == ["g1", "g2", "g3"] * 2

    def test_decision_with_tagged_inputs(self, tmp_path):
        for tag in ("DE", "EN", "SV", "FI"):
            (tmp_path / f"{tag.lower()}.txt").write_text(
                f"{tag.lower()}word\n", encoding="utf-8"
            )
        result = run_cli(
            ["study-build", "--design", "decision", "--seed", "5", "--inputs",
             f"DE={tmp_path / 'de.txt'}", f"EN={tmp_path / 'en.txt'}",
             f"SV={tmp_path / 'sv.txt'}", f"FI={tmp_path / 'fi.txt'}"]
        )
        assert result.returncode == 0, result.stderr
        doc = json.loads(result.stdout)
        assert doc["seed"] == 5
        assert sorted(i["group"] for i in doc["items"]) == ["DE", "EN", "FI", "SV"]
        again = run_cli(
            ["study-build", "--design", "decision", "--seed", "5", "--inputs",
             f"DE={tmp_path / 'de.txt'}", f"EN={tmp_path / 'en.txt'}",
             f"SV={tmp_path / 'sv.txt'}", f"FI={tmp_path / 'fi.txt'}"]
        )
        assert again.stdout == result.stdout


class TestStudyAnalyze:
    def test_control_fixture_reproduces_published_navg(self):
        result = run_cli(
            ["study-analyze", "--trials", str(DATA_DIR / "control_group_trials.csv")]
        )
        assert result.returncode == 0, result.stderr
        sections = result.stdout.split("\n\n")
        navg_section = next(s for s in sections if "# table: normalized_average" in s)
        rows = list(csv.reader(io.StringIO(navg_section.splitlines()[1] + "\n")))
        table = {}
        for line in navg_section.splitlines()[2:]:
            group, value = line.split(",")
            table[group] = value
        assert table == {"DE": "1.10", "EN": "0.94", "SV": "1.23", "FI": "0.72"}

    def test_proficiency_filter_flag(self, tmp_path):
        result = run_cli(
            ["study-analyze", "--trials",
             str(DATA_DIR / "control_group_trials.csv"), "--proficiency", "I,A"]
        )
        assert result.returncode == 0

    def test_missing_trials_file_is_data_error(self, tmp_path):
        result = run_cli(["study-analyze", "--trials", str(tmp_path / "x.csv")])
        assert result.returncode == 2
