import pytest
from fastapi.testclient import TestClient

from nonwords.corpus import WordFrequencyTable
from nonwords.lm import train
from nonwords.service import (
    AppState,
    JsonFileSessionStore,
    MemorySessionStore,
    ServiceConfig,
    app_from_config,
    create_app,
)

TABLE2_MEANS = {
    "R1": {"DE": 4.75, "EN": 3.50, "SV": 4.85, "FI": 1.45},
    "R2": {"DE": 1.60, "EN": 1.60, "SV": 1.80, "FI": 1.30},
    "R3": {"DE": 2.50, "EN": 2.15, "SV": 3.05, "FI": 2.40},
}
TABLE2_NAVG = {"DE": 1.10, "EN": 0.94, "SV": 1.23, "FI": 0.72}


@pytest.fixture(scope="module")
def client(sv_model, ar_model, sv_lexicon):
    state = AppState(
        models={"sv": sv_model, "ar": ar_model},
        lexicon=sv_lexicon,
        store=MemorySessionStore(),
    )
    return TestClient(create_app(state))


def make_decision_study(client, k=3):
    payload = {
        "design": "lexical_decision",
        "seed": 99,
        "models": {
            "DE": [f"dnork{n}x"[:6] for n in range(k)],
            "EN": [f"enork{n}x"[:6] for n in range(k)],
            "SV": [f"snork{n}x"[:6] for n in range(k)],
        },
        "fillers": [f"fnork{n}x"[:6] for n in range(k)],
    }
    response = client.post("/api/v1/study", json=payload)
    assert response.status_code == 200, response.text
    return response.json()


class TestModels:
    def test_lists_loaded_models_with_metadata(self, client, sv_model):
        response = client.get("/api/v1/models")
        assert response.status_code == 200
        body = response.json()
        assert [m["id"] for m in body] == ["ar", "sv"]
        sv = next(m for m in body if m["id"] == "sv")
        assert sv["order"] == 4
        assert sv["alphabet"] == sv_model.alphabet


class TestGenerate:
    def test_deterministic_for_fixed_seed(self, client):
        request = {"length": 6, "count": 20, "seed": 42}
        a = client.post("/api/v1/generate", json=request)
        b = client.post("/api/v1/generate", json=request)
        assert a.status_code == b.status_code == 200
        assert a.content == b.content
        body = a.json()
        assert body["seed"] == 42
        assert len(body["words"]) == 20
        assert [w["rank"] for w in body["words"]] == list(range(1, 21))
        scores = [w["score"] for w in body["words"]]
        assert scores == sorted(scores, reverse=True)

    def test_server_draws_and_returns_seed(self, client):
        response = client.post("/api/v1/generate", json={"length": 6, "count": 5})
        assert response.status_code == 200
        body = response.json()
        replay = client.post(
            "/api/v1/generate", json={"length": 6, "count": 5, "seed": body["seed"]}
        )
        assert replay.json()["words"] == body["words"]

    def test_out_of_bounds_rejected_with_field(self, client):
        response = client.post("/api/v1/generate", json={"length": 12, "count": 5})
        assert response.status_code == 400
        details = response.json()["details"]
        assert any("length" in d["field"] for d in details)
        response = client.post("/api/v1/generate", json={"length": 6, "count": 0})
        assert response.status_code == 400

    def test_unknown_l1_model(self, client):
        response = client.post(
            "/api/v1/generate", json={"length": 6, "count": 5, "l1_model": "de"}
        )
        assert response.status_code == 404

    def test_l1_reranking_same_schema_different_order(self, client):
        plain = client.post(
            "/api/v1/generate", json={"length": 6, "count": 20, "seed": 7}
        ).json()
        reranked = client.post(
            "/api/v1/generate",
            json={"length": 6, "count": 20, "seed": 7, "l1_model": "ar"},
        ).json()
        assert set(plain) == set(reranked)
        assert reranked["l1_model"] == "ar"
        assert sorted(w["text"] for w in plain["words"]) == sorted(
            w["text"] for w in reranked["words"]
        )
        assert [w["text"] for w in plain["words"]] != [
            w["text"] for w in reranked["words"]
        ]

    def test_exhaustive_short_length(self, client):
        response = client.post(
            "/api/v1/generate", json={"length": 2, "count": 10, "seed": 1}
        )
        assert response.status_code == 200
        body = response.json()
        assert len(body["words"]) == 10
        assert all(len(w["text"]) == 2 for w in body["words"])
        assert body["filter_report"]["input_count"] == 29**2

    def test_filter_report_shape(self, client):
        body = client.post(
            "/api/v1/generate", json={"length": 6, "count": 5, "seed": 3}
        ).json()
        report = body["filter_report"]
        assert set(report) == {
            "input_count",
            "removed_lexicon",
            "removed_exclusion",
            "removed_low_probability",
            "unscorable",
            "output_count",
        }

    def test_generation_exhausted_maps_to_503(self, sv_lexicon):
        tiny = train(
            WordFrequencyTable(alphabet="abcdef", entries={"abcdef": 1}), 4, name="sv"
        )
        state = AppState(models={"sv": tiny}, lexicon=sv_lexicon, store=MemorySessionStore())
        tiny_client = TestClient(create_app(state))
        response = tiny_client.post(
            "/api/v1/generate", json={"length": 6, "count": 50, "seed": 1}
        )
        assert response.status_code == 503


class TestStudyEndpoints:
    def test_perception_round_trip(self, client):
        payload = {
            "design": "perception",
            "groups": {"g1": ["aa", "ab"], "g2": ["ba", "bb"], "g3": ["ca", "cb"]},
        }
        response = client.post("/api/v1/study", json=payload)
        assert response.status_code == 200
        body = response.json()
        assert [i["group"] for i in body["items"]] == ["g1", "g2", "g3"] * 2
        fetched = client.get(f"/api/v1/study/{body['id']}")
        assert fetched.status_code == 200
        assert fetched.content == response.content

    def test_decision_round_trip_and_blocks(self, client):
        body = make_decision_study(client, k=4)
        assert body["seed"] == 99
        items = body["items"]
        assert len(items) == 16
        for block in range(4):
            chunk = items[block * 4 : block * 4 + 4]
            assert sorted(i["group"] for i in chunk) == ["DE", "EN", "FI", "SV"]
        fetched = client.get(f"/api/v1/study/{body['id']}")
        assert fetched.json() == body

    def test_unknown_id_404(self, client):
        assert client.get("/api/v1/study/nope").status_code == 404

    def test_invalid_design_400(self, client):
        response = client.post("/api/v1/study", json={"design": "oracle"})
        assert response.status_code == 400

    def test_structurally_bad_input_400(self, client):
        response = client.post(
            "/api/v1/study",
            json={
                "design": "perception",
                "groups": {"g1": ["a"], "g2": ["b", "c"], "g3": ["d"]},
            },
        )
        assert response.status_code == 400


class TestTrialsAndAnalysis:
    def test_submission_and_analysis_round_trip(self, client):
        study = make_decision_study(client)
        words = {i["group"]: i["text"] for i in study["items"]}
        records = []
        for rater, groups in TABLE2_MEANS.items():
            for group, rt in groups.items():
                records.append(
                    {
                        "rater_id": rater,
                        "l1": "Swedish",
                        "proficiency": "A",
                        "word": words[group],
                        "group": group,
                        "response": "ACCEPT" if group == "FI" else "REJECT",
                        "rt_seconds": rt,
                    }
                )
        response = client.post(
            "/api/v1/trials", json={"session": study["id"], "records": records}
        )
        assert response.status_code == 200
        assert response.json()["stored"] == len(records)

        analysis = client.get(f"/api/v1/analysis/{study['id']}")
        assert analysis.status_code == 200
        body = analysis.json()
        assert body["n_trials"] == len(records)
        navg = body["normalized_average"]
        for group, expected in TABLE2_NAVG.items():
            assert abs(navg[group] - expected) <= 0.005
        assert body["normalized_average_ia"] is not None
        assert body["accuracy"]["R1"]["SV"] == 100.0

    def test_foreign_word_conflict(self, client):
        study = make_decision_study(client)
        record = {
            "rater_id": "R1",
            "l1": "Swedish",
            "proficiency": "A",
            "word": "utanför",
            "group": "SV",
            "response": "REJECT",
            "rt_seconds": 1.0,
        }
        response = client.post(
            "/api/v1/trials", json={"session": study["id"], "records": [record]}
        )
        assert response.status_code == 409

    def test_unknown_session_404(self, client):
        response = client.post(
            "/api/v1/trials", json={"session": "missing", "records": []}
        )
        assert response.status_code == 404
        assert client.get("/api/v1/analysis/missing").status_code == 404

    def test_schema_violation_400(self, client):
        study = make_decision_study(client)
        bad = {
            "rater_id": "R1",
            "l1": "Swedish",
            "proficiency": "A",
            "word": "x",
            "group": "SV",
            "response": "REJECT",
            "rt_seconds": -2.0,
        }
        response = client.post(
            "/api/v1/trials", json={"session": study["id"], "records": [bad]}
        )
        assert response.status_code == 400

    def test_trials_append_only_accumulates(self, client):
        study = make_decision_study(client)
        word = study["items"][0]["text"]
        group = study["items"][0]["group"]
        record = {
            "rater_id": "R9",
            "l1": "Other",
            "proficiency": "I",
            "word": word,
            "group": group,
            "response": "REJECT",
            "rt_seconds": 1.5,
        }
        first = client.post(
            "/api/v1/trials", json={"session": study["id"], "records": [record]}
        )
        second = client.post(
            "/api/v1/trials", json={"session": study["id"], "records": [record]}
        )
        assert first.json()["total"] == 1
        assert second.json()["total"] == 2


class TestPersistence:
    def test_json_file_store_survives_reload(self, tmp_path):
        path = tmp_path / "sessions.json"
        store = JsonFileSessionStore(path)
        store.put_study("s1", {"id": "s1", "design": "perception", "items": []})
        store.append_trials("s1", [{"rater_id": "R1"}])
        reloaded = JsonFileSessionStore(path)
        assert reloaded.get_study("s1")["id"] == "s1"
        assert reloaded.get_trials("s1") == [{"rater_id": "R1"}]

    def test_app_from_config(self, tmp_path, sv_model_file, ar_model_file, sv_wordlist_file):
        config_path = tmp_path / "service.conf"
        config_path.write_text(
            "\n".join(
                [
                    "bind = 127.0.0.1:8123",
                    f"models.sv.path = {sv_model_file}",
                    f"models.ar.path = {ar_model_file}",
                    f"lexicon.path = {sv_wordlist_file}",
                    f"store.path = {tmp_path / 'sessions.json'}",
                ]
            )
            + "\n",
            encoding="utf-8",
        )
        config = ServiceConfig.from_file(config_path)
        assert config.port == 8123
        app = app_from_config(config)
        with TestClient(app) as local_client:
            body = local_client.get("/api/v1/models").json()
            assert [m["id"] for m in body] == ["ar", "sv"]
            generated = local_client.post(
                "/api/v1/generate", json={"length": 6, "count": 3, "seed": 5}
            )
            assert generated.status_code == 200
