"""Annotation service over real HTTP: pairing, judgments, replay safety."""

from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request
from pathlib import Path

import pytest

from qdiff.config import PipelineConfig
from qdiff.elo import EloBoard, read_judgment_log_file
from qdiff.questions import Question, Template
from qdiff.service import AnnotationService, make_server


def make_questions(n: int) -> list[Question]:
    return [
        Question(
            id=f"q{i:02d}",
            text=f"Question number {i}?",
            template=Template.ANALYTICAL,
            keywords=(f"kw{i}",),
        )
        for i in range(n)
    ]


class Client:
    def __init__(self, base: str):
        self.base = base

    def get(self, path: str) -> tuple[int, dict, dict]:
        return self._request(urllib.request.Request(self.base + path))

    def post(self, path: str, body: dict) -> tuple[int, dict, dict]:
        data = json.dumps(body).encode("utf-8")
        request = urllib.request.Request(
            self.base + path, data=data,
            headers={"Content-Type": "application/json"},
        )
        return self._request(request)

    @staticmethod
    def _request(request) -> tuple[int, dict, dict]:
        try:
            with urllib.request.urlopen(request) as response:
                return (
                    response.status,
                    json.loads(response.read()),
                    dict(response.headers),
                )
        except urllib.error.HTTPError as error:
            return error.code, json.loads(error.read()), dict(error.headers)


@pytest.fixture
def server(tmp_path):
    """A running service over 6 questions with a fresh log file."""
    service = AnnotationService(
        make_questions(6), tmp_path / "log.jsonl", PipelineConfig(seed=5)
    )
    httpd = make_server(service, port=0)
    thread = threading.Thread(
        target=lambda: httpd.serve_forever(poll_interval=0.02), daemon=True
    )
    thread.start()
    client = Client(f"http://127.0.0.1:{httpd.server_address[1]}")
    yield client, service, tmp_path / "log.jsonl"
    httpd.shutdown()
    httpd.server_close()
    service.close()


def judge_once(client: Client, annotator: str, winner: str = "LEFT") -> dict:
    _, pair, _ = client.get(f"/api/pair/next?annotator={annotator}")
    _, result, _ = client.post(
        "/api/judgment", {"pair_token": pair["pair_token"], "winner": winner}
    )
    return result


class TestPairEndpoint:
    def test_fresh_two_question_set_returns_that_pair(self, tmp_path):
        service = AnnotationService(make_questions(2), tmp_path / "l.jsonl")
        body = service.next_pair("ann")
        assert {body["left"]["id"], body["right"]["id"]} == {"q00", "q01"}

    def test_reissue_same_pair_until_judged(self, server):
        client, _, _ = server
        _, first, _ = client.get("/api/pair/next?annotator=alice")
        _, second, _ = client.get("/api/pair/next?annotator=alice")
        assert first["pair_token"] == second["pair_token"]
        assert (first["left"]["id"], first["right"]["id"]) == (
            second["left"]["id"], second["right"]["id"],
        )

    def test_conflict_when_too_few_questions(self, tmp_path):
        service = AnnotationService(make_questions(1), tmp_path / "l.jsonl")
        httpd = make_server(service, port=0)
        thread = threading.Thread(
        target=lambda: httpd.serve_forever(poll_interval=0.02), daemon=True
    )
        thread.start()
        client = Client(f"http://127.0.0.1:{httpd.server_address[1]}")
        status, body, _ = client.get("/api/pair/next?annotator=a")
        httpd.shutdown()
        httpd.server_close()
        assert status == 409
        assert "error" in body

    def test_missing_annotator_is_400(self, server):
        client, _, _ = server
        status, _, _ = client.get("/api/pair/next")
        assert status == 400

    def test_pair_sequence_matches_scheduler_trace(self, server):
        # The service derives the scheduler seed as seed*1000003 + judgments
        # applied, so an offline board fold predicts every issued pair.
        client, service, _ = server
        config_seed = service.config.seed
        shadow = EloBoard(
            [q.id for q in make_questions(6)],
            k_factor=service.config.elo_k,
            initial_rating=service.config.initial_rating,
        )
        for step in range(4):
            expected = shadow.next_pair(
                config_seed * 1_000_003 + step, annotator="tracer"
            )
            _, pair, _ = client.get("/api/pair/next?annotator=tracer")
            got = (pair["left"]["id"], pair["right"]["id"])
            assert got == expected
            _, result, _ = client.post(
                "/api/judgment",
                {"pair_token": pair["pair_token"], "winner": "LEFT"},
            )
            assert result["accepted"] is True
            shadow.apply(service.board.judgments[-1])


class TestJudgmentEndpoint:
    def test_equal_ratings_move_by_ten(self, server):
        client, _, _ = server
        _, pair, _ = client.get("/api/pair/next?annotator=bob")
        left = pair["left"]["id"]
        right = pair["right"]["id"]
        _, result, _ = client.post(
            "/api/judgment", {"pair_token": pair["pair_token"], "winner": "LEFT"}
        )
        assert result["accepted"] is True
        assert result["new_ratings"][left] == pytest.approx(1010.0)
        assert result["new_ratings"][right] == pytest.approx(990.0)

    def test_replayed_token_not_applied_again(self, server):
        client, service, log_path = server
        _, pair, _ = client.get("/api/pair/next?annotator=bob")
        body = {"pair_token": pair["pair_token"], "winner": "RIGHT"}
        _, first, _ = client.post("/api/judgment", body)
        _, second, _ = client.post("/api/judgment", body)
        assert first["accepted"] is True
        assert second["accepted"] is False
        assert second["new_ratings"] == first["new_ratings"]
        assert len(read_judgment_log_file(str(log_path))) == 1

    def test_unknown_token_is_410(self, server):
        client, _, _ = server
        status, _, _ = client.post(
            "/api/judgment", {"pair_token": "deadbeef", "winner": "LEFT"}
        )
        assert status == 410

    def test_expired_token_is_410(self, tmp_path):
        config = PipelineConfig(pair_timeout_seconds=1e-9)
        service = AnnotationService(make_questions(3), tmp_path / "l.jsonl", config)
        pair = service.next_pair("slow")
        with pytest.raises(Exception) as exc:
            service.submit_judgment(pair["pair_token"], "LEFT")
        assert getattr(exc.value, "status", None) == 410

    def test_malformed_body_is_400(self, server):
        client, _, _ = server
        status, _, _ = client.post("/api/judgment", {"winner": "LEFT"})
        assert status == 400
        _, pair, _ = client.get("/api/pair/next?annotator=x")
        status, _, _ = client.post(
            "/api/judgment", {"pair_token": pair["pair_token"], "winner": "UP"}
        )
        assert status == 400


class TestLeaderboardEndpoint:
    def test_empty_board_is_empty_list(self, tmp_path):
        service = AnnotationService([], tmp_path / "l.jsonl")
        assert service.leaderboard() == {"board_version": 0, "entries": []}
        service.close()

    def test_all_initial_before_any_judgment(self, server):
        client, _, _ = server
        _, body, _ = client.get("/api/leaderboard")
        assert body["board_version"] == 0
        assert [e["rating"] for e in body["entries"]] == [1000.0] * 6

    def test_winner_listed_above_loser(self, server):
        client, _, _ = server
        _, pair, _ = client.get("/api/pair/next?annotator=ann")
        client.post(
            "/api/judgment", {"pair_token": pair["pair_token"], "winner": "RIGHT"}
        )
        _, body, _ = client.get("/api/leaderboard")
        order = [e["question_id"] for e in body["entries"]]
        assert order.index(pair["right"]["id"]) < order.index(pair["left"]["id"])

    def test_matches_offline_log_fold(self, server):
        client, service, log_path = server
        for i in range(8):
            judge_once(client, f"ann{i % 3}", "LEFT" if i % 2 else "RIGHT")
        _, body, _ = client.get("/api/leaderboard")
        offline = EloBoard.from_log(
            [q.id for q in make_questions(6)],
            read_judgment_log_file(str(log_path)),
            k_factor=service.config.elo_k,
            initial_rating=service.config.initial_rating,
        )
        for entry in body["entries"]:
            assert entry["rating"] == pytest.approx(
                offline.ratings[entry["question_id"]], abs=1e-9
            )
            assert entry["comparisons"] == (
                offline.comparison_counts[entry["question_id"]]
            )

    def test_board_version_header_everywhere(self, server):
        client, _, _ = server
        for path in ("/api/leaderboard", "/api/question/q00",
                     "/api/pair/next?annotator=v"):
            _, _, headers = client.get(path)
            assert "X-Board-Version" in headers


class TestQuestionEndpoint:
    def test_known_id_full_record(self, server):
        client, _, _ = server
        status, body, _ = client.get("/api/question/q03")
        assert status == 200
        assert body == {
            "id": "q03", "text": "Question number 3?",
            "template": "ANALYTICAL", "keywords": ["kw3"],
        }

    def test_unknown_id_404(self, server):
        client, _, _ = server
        status, _, _ = client.get("/api/question/nope")
        assert status == 404

    def test_unicode_round_trip(self, tmp_path):
        text = "Pourquoi le protocole émet-il des accusés — 確認応答 ?"
        service = AnnotationService(
            [
                Question(id="u1", text=text, template=Template.SINGLE_TOPIC),
                Question(id="u2", text="plain", template=Template.SINGLE_TOPIC),
            ],
            tmp_path / "l.jsonl",
        )
        httpd = make_server(service, port=0)
        thread = threading.Thread(
        target=lambda: httpd.serve_forever(poll_interval=0.02), daemon=True
    )
        thread.start()
        client = Client(f"http://127.0.0.1:{httpd.server_address[1]}")
        _, body, _ = client.get("/api/question/u1")
        httpd.shutdown()
        httpd.server_close()
        assert body["text"] == text


class TestRestartReplay:
    def test_restart_reproduces_leaderboard(self, server):
        client, service, log_path = server
        for i in range(10):
            judge_once(client, f"ann{i % 4}")
        _, before, _ = client.get("/api/leaderboard")

        reborn = AnnotationService(
            make_questions(6), log_path, PipelineConfig(seed=5)
        )
        after = reborn.leaderboard()
        reborn.close()
        assert after == before
