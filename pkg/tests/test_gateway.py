"""Wire-protocol contract tests against a local stub server, plus the
dynamic sampling budget logic on scripted completers."""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from stepmark.errors import BackendError, ProtocolError
from stepmark.gateway import (
    MIN_CORRECT,
    N_CAP,
    N_INITIAL,
    CompleterConfig,
    PrefixState,
    RetryPolicy,
    SamplingParams,
    dynamic_sample_s0,
    estimate_state,
    sample_rollouts,
)
from stepmark.prompting import build_prompt

from helpers import ScriptedCompleter, s0


def completion_payload(texts_and_logprobs):
    return {
        "choices": [
            {"text": text, "logprobs": {"token_logprobs": lps}}
            for text, lps in texts_and_logprobs
        ]
    }


class _StubHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        server = self.server
        server.requests.append((time.monotonic(), self.path, body, dict(self.headers)))
        status, payload = server.script[min(len(server.requests) - 1, len(server.script) - 1)]
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    server.script = [(200, completion_payload([("ok", [-1.0])]))]
    server.requests = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    server.server_close()


def make_config(server, max_retries=3, base_backoff=0.05):
    return CompleterConfig(
        completer_id="stub",
        base_url=f"http://127.0.0.1:{server.server_address[1]}",
        model_name="stub-model",
        retry_policy=RetryPolicy(max_retries=max_retries, base_backoff=base_backoff),
    )


PARAMS = SamplingParams(
    temperature=0.7, top_p=0.95, max_tokens=512, stop_sequences=("Instruction:",), n_per_request=8
)


class TestWireProtocol:
    def test_request_body_shape_is_exact(self, stub_server):
        state = PrefixState("q1", "what is 1+1?", ("Step 1: add.",))
        stub_server.script = [
            (200, completion_payload([("a", [-0.5]), ("b", [-1.5]), ("c", [-2.0]), ("d", [-1.0])]))
        ]
        sample_rollouts(state, make_config(stub_server), PARAMS, 4, "2")
        _, path, body, _ = stub_server.requests[0]
        assert path == "/v1/completions"
        expected = json.dumps(
            {
                "model": "stub-model",
                "prompt": build_prompt("what is 1+1?", ("Step 1: add.",)),
                "n": 4,
                "temperature": 0.7,
                "top_p": 0.95,
                "max_tokens": 512,
                "stop": ["Instruction:"],
                "logprobs": 0,
                "echo": False,
            }
        ).encode()
        assert body == expected

    def test_logprobs_parse_losslessly(self, stub_server):
        lps = [-0.1234567890123456, -3.0000000000000004e-05, -7.25]
        stub_server.script = [(200, completion_payload([("x", lps)]))]
        batch = sample_rollouts(s0(), make_config(stub_server), PARAMS, 1, "1")
        assert list(batch.rollouts[0].tokens_logprobs) == lps
        assert batch.rollouts[0].token_count == 3

    def test_answer_verified_against_gold(self, stub_server):
        text = "Step 1: use the Pythagorean theorem. The final answer is $119$."
        stub_server.script = [(200, completion_payload([(text, [-1.0, -0.5])]))]
        batch = sample_rollouts(s0(), make_config(stub_server), PARAMS, 1, "119")
        assert batch.rollouts[0].extracted_answer == "$119$"
        assert batch.rollouts[0].is_correct is True

    def test_retry_on_429_then_success(self, stub_server):
        ok = (200, completion_payload([("x", [-1.0])]))
        stub_server.script = [(429, {"error": "slow down"}), (429, {"error": "again"}), ok]
        stats = {}
        batch = sample_rollouts(
            s0(), make_config(stub_server), PARAMS, 1, "1", stats=stats
        )
        assert batch.n == 1
        assert stats["retries"] == 2
        times = [t for t, *_ in stub_server.requests]
        assert times[1] - times[0] >= 0.05  # base backoff
        assert times[2] - times[1] >= 0.10  # doubled

    def test_persistent_5xx_exhausts_retries(self, stub_server):
        stub_server.script = [(503, {"error": "down"})]
        with pytest.raises(BackendError, match="giving up"):
            sample_rollouts(
                s0(), make_config(stub_server, max_retries=2, base_backoff=0.01), PARAMS, 1, "1"
            )
        assert len(stub_server.requests) == 3  # initial try + 2 retries

    def test_non_retryable_status_fails_fast(self, stub_server):
        stub_server.script = [(400, {"error": "bad request"})]
        with pytest.raises(BackendError):
            sample_rollouts(s0(), make_config(stub_server), PARAMS, 1, "1")
        assert len(stub_server.requests) == 1

    def test_missing_logprobs_is_protocol_error(self, stub_server):
        stub_server.script = [(200, {"choices": [{"text": "no logprobs here"}]})]
        with pytest.raises(ProtocolError, match="logprobs"):
            sample_rollouts(s0(), make_config(stub_server), PARAMS, 1, "1")

    def test_wrong_choice_count_is_protocol_error(self, stub_server):
        stub_server.script = [(200, completion_payload([("only one", [-1.0])]))]
        with pytest.raises(ProtocolError, match="expected 2"):
            sample_rollouts(s0(), make_config(stub_server), PARAMS, 2, "1")

    def test_large_n_is_chunked(self, stub_server):
        stub_server.script = [
            (200, completion_payload([("x", [-1.0])] * 8)),
            (200, completion_payload([("x", [-1.0])] * 8)),
            (200, completion_payload([("x", [-1.0])] * 4)),
        ]
        batch = sample_rollouts(s0(), make_config(stub_server), PARAMS, 20, "1")
        assert batch.n == 20
        assert [json.loads(b)["n"] for _, _, b, _ in stub_server.requests] == [8, 8, 4]

    def test_auth_header_from_env(self, stub_server, monkeypatch):
        monkeypatch.setenv("COMPLETIONS_API_KEY", "sk-test")
        sample_rollouts(s0(), make_config(stub_server), PARAMS, 1, "1")
        headers = stub_server.requests[0][3]
        assert headers.get("Authorization") == "Bearer sk-test"


class TestDynamicSampling:
    def test_enough_correct_on_first_batch(self):
        completer = ScriptedCompleter("c0", [12])
        outcome = dynamic_sample_s0(s0(), [completer], "1")
        assert outcome.n_used == N_INITIAL
        assert not outcome.discarded
        assert outcome.baseline.value > 0
        assert completer.calls == [16]

    def test_one_increment_round(self):
        completer = ScriptedCompleter("c0", [4, 7])
        outcome = dynamic_sample_s0(s0(), [completer], "1")
        assert outcome.n_used == 24
        assert not outcome.discarded
        assert completer.calls == [16, 8]
        assert outcome.batches[0].n == 24
        assert outcome.batches[0].n_correct == 11

    def test_cap_exhaustion_discards(self):
        completer = ScriptedCompleter("c0", [6] + [0] * 10)
        outcome = dynamic_sample_s0(s0(), [completer], "1")
        assert outcome.discarded
        assert outcome.n_used == N_CAP
        assert outcome.baseline is None
        assert completer.calls == [16] + [8] * 7

    def test_only_deficient_completers_resample(self):
        rich = ScriptedCompleter("rich", [16])
        poor = ScriptedCompleter("poor", [2, 8])
        outcome = dynamic_sample_s0(s0(), [rich, poor], "1")
        assert rich.calls == [16]
        assert poor.calls == [16, 8]
        assert outcome.n_used == 24
        assert not outcome.discarded

    def test_n_used_progression(self):
        for rounds in range(8):
            if rounds == 0:
                script = [MIN_CORRECT]
            else:
                # reach 10 cumulative correct exactly on the final increment
                script = [2] + [0] * (rounds - 1) + [8]
            completer = ScriptedCompleter("c0", script)
            outcome = dynamic_sample_s0(s0(), [completer], "1")
            assert not outcome.discarded
            assert outcome.n_used == N_INITIAL + 8 * rounds
            assert outcome.n_used in {16, 24, 32, 40, 48, 56, 64, 72}

    def test_requires_bare_question_state(self):
        state = PrefixState("q1", "text", ("Step 1: nope.",))
        with pytest.raises(ValueError):
            dynamic_sample_s0(state, [ScriptedCompleter("c0", [16])], "1")


class _FixedBatchCompleter:
    def __init__(self, completer_id, flags_and_logppls):
        self.completer_id = completer_id
        self.flags_and_logppls = flags_and_logppls

    def sample(self, state, n, gold_answer):
        from helpers import make_batch

        assert n == len(self.flags_and_logppls)
        return make_batch(self.flags_and_logppls, self.completer_id)


class TestEstimateState:
    def test_single_completer_weighted_ratio(self):
        completer = _FixedBatchCompleter("a", [(True, 1.0), (False, 3.0)])
        est = estimate_state(s0(), [completer], 2, "1")
        assert est.value == pytest.approx(0.25)

    def test_mean_over_completers(self):
        a = _FixedBatchCompleter("a", [(True, 1.0), (False, 3.0)])  # 0.25
        b = _FixedBatchCompleter("b", [(True, 3.0), (False, 1.0)])  # 0.75
        est = estimate_state(s0(), [a, b], 2, "1")
        assert est.value == pytest.approx(0.5)

    def test_all_incorrect_is_zero(self):
        est = estimate_state(s0(), [ScriptedCompleter("a", [0])], 8, "1")
        assert est.value == 0.0

    def test_ledger_token_counts(self):
        est = estimate_state(s0(), [ScriptedCompleter("a", [2])], 4, "1")
        assert est.total_generated_tokens == 4 * 4  # helpers use 4 tokens each
