"""Completer backends and state estimation.

A "completer" turns a prefix state (question plus the first t steps)
into sampled continuations with per-token logprobs.  The HTTP backend
speaks the OpenAI-compatible completions protocol; any object with the
same ``sample`` surface (e.g. the simulated completer) plugs into the
same estimation entry points.

Rollout budgets at the bare question grow dynamically: start at 16 per
completer and add 8 at a time until each completer has produced at least
10 correct rollouts, giving up (and discarding the question) at 72.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Protocol

import requests

from . import prompting
from .answers import answers_equivalent, extract_final_answer
from .errors import BackendError, ProtocolError
from .estimator import McEstimate, Rollout, RolloutBatch, mc_ppl

N_INITIAL = 16
N_INCREMENT = 8
N_CAP = 72
MIN_CORRECT = 10

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


@dataclass(frozen=True)
class PrefixState:
    """A question together with its first t verified-candidate steps."""

    question_id: str
    question_text: str
    steps: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def t(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = 0.7
    top_p: float = 1.0
    max_tokens: int = 1024
    stop_sequences: tuple[str, ...] = ("Instruction:",)
    n_per_request: int = 8

    def __post_init__(self):
        object.__setattr__(self, "stop_sequences", tuple(self.stop_sequences))
        if self.n_per_request < 1:
            raise ValueError("n_per_request must be >= 1")


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 3
    base_backoff: float = 0.5


@dataclass(frozen=True)
class CompleterConfig:
    completer_id: str
    base_url: str
    model_name: str
    auth_env_var: str = "COMPLETIONS_API_KEY"
    max_in_flight: int = 4
    request_timeout: float = 120.0
    retry_policy: RetryPolicy = field(default_factory=RetryPolicy)

    def __post_init__(self):
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


class Completer(Protocol):
    """Anything able to sample rollouts from a prefix state."""

    completer_id: str

    def sample(self, state: PrefixState, n: int, gold_answer: str) -> RolloutBatch: ...


def _completion_request_body(
    config: CompleterConfig, params: SamplingParams, prompt: str, n: int
) -> dict:
    return {
        "model": config.model_name,
        "prompt": prompt,
        "n": n,
        "temperature": params.temperature,
        "top_p": params.top_p,
        "max_tokens": params.max_tokens,
        "stop": list(params.stop_sequences),
        "logprobs": 0,
        "echo": False,
    }


def _post_with_retry(
    config: CompleterConfig,
    body: dict,
    session: requests.Session | None = None,
    stats: dict | None = None,
) -> dict:
    url = config.base_url.rstrip("/") + "/v1/completions"
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(config.auth_env_var)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    post = (session or requests).post

    policy = config.retry_policy
    last_error = None
    for attempt in range(policy.max_retries + 1):
        if attempt > 0:
            if stats is not None:
                stats["retries"] = stats.get("retries", 0) + 1
            time.sleep(policy.base_backoff * 2 ** (attempt - 1))
        try:
            resp = post(url, json=body, headers=headers, timeout=config.request_timeout)
        except requests.RequestException as exc:
            last_error = f"transport error: {exc}"
            continue
        if resp.status_code in RETRYABLE_STATUS:
            last_error = f"HTTP {resp.status_code}"
            continue
        if resp.status_code != 200:
            raise BackendError(
                f"{config.completer_id}: HTTP {resp.status_code}: {resp.text[:200]}"
            )
        return resp.json()
    raise BackendError(
        f"{config.completer_id}: giving up after {policy.max_retries} retries ({last_error})"
    )


def _rollout_from_choice(choice: dict, completer_id: str, gold_answer: str) -> Rollout:
    logprobs = choice.get("logprobs")
    if not isinstance(logprobs, dict) or "token_logprobs" not in logprobs:
        raise ProtocolError(
            f"{completer_id}: response choice carries no token_logprobs; "
            "the backend must be configured to return logprobs"
        )
    token_logprobs = [lp if lp is not None else 0.0 for lp in logprobs["token_logprobs"]]
    if not token_logprobs:
        raise ProtocolError(f"{completer_id}: empty token_logprobs in response choice")
    text = choice.get("text", "")
    answer = extract_final_answer(text)
    return Rollout(
        tokens_logprobs=tuple(min(lp, 0.0) for lp in token_logprobs),
        text=text,
        extracted_answer=answer,
        is_correct=answer is not None and answers_equivalent(answer, gold_answer),
        completer_id=completer_id,
    )


def sample_rollouts(
    state: PrefixState,
    config: CompleterConfig,
    params: SamplingParams,
    n: int,
    gold_answer: str,
    session: requests.Session | None = None,
    stats: dict | None = None,
) -> RolloutBatch:
    """Sample exactly n rollouts from one HTTP backend at the given state.

    Large requests are split into chunks of ``params.n_per_request``; a
    partial batch is treated as a failure, never returned.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    prompt = prompting.build_prompt(state.question_text, state.steps)
    rollouts: list[Rollout] = []
    remaining = n
    while remaining > 0:
        chunk = min(remaining, params.n_per_request)
        body = _completion_request_body(config, params, prompt, chunk)
        payload = _post_with_retry(config, body, session=session, stats=stats)
        choices = payload.get("choices")
        if not isinstance(choices, list) or len(choices) != chunk:
            raise ProtocolError(
                f"{config.completer_id}: expected {chunk} choices, "
                f"got {len(choices) if isinstance(choices, list) else 'none'}"
            )
        for choice in choices:
            rollouts.append(_rollout_from_choice(choice, config.completer_id, gold_answer))
        remaining -= chunk
    return RolloutBatch(completer_id=config.completer_id, rollouts=tuple(rollouts))


class HttpCompleter:
    """Completer backed by an OpenAI-compatible completions endpoint."""

    def __init__(self, config: CompleterConfig, params: SamplingParams):
        self.config = config
        self.params = params
        self.completer_id = config.completer_id
        self.stats: dict = {}
        self._session = requests.Session()

    def sample(self, state: PrefixState, n: int, gold_answer: str) -> RolloutBatch:
        return sample_rollouts(
            state,
            self.config,
            self.params,
            n,
            gold_answer,
            session=self._session,
            stats=self.stats,
        )


@dataclass(frozen=True)
class DynamicSampleOutcome:
    """Result of budget negotiation at the bare question."""

    n_used: int
    batches: tuple[RolloutBatch, ...]
    baseline: McEstimate | None
    discarded: bool


def _merge_batches(a: RolloutBatch, b: RolloutBatch) -> RolloutBatch:
    return RolloutBatch(completer_id=a.completer_id, rollouts=a.rollouts + b.rollouts)


def dynamic_sample_s0(
    state: PrefixState, completers: list[Completer], gold_answer: str
) -> DynamicSampleOutcome:
    """Grow the rollout budget at prefix 0 until every completer has at
    least MIN_CORRECT correct rollouts, or the cap discards the question."""
    if state.t != 0:
        raise ValueError("dynamic sampling applies to the bare question state only")
    if not completers:
        raise ValueError("at least one completer is required")

    batches = {c.completer_id: c.sample(state, N_INITIAL, gold_answer) for c in completers}
    n_used = N_INITIAL
    while (
        any(b.n_correct < MIN_CORRECT for b in batches.values()) and n_used < N_CAP
    ):
        n_used += N_INCREMENT
        for completer in completers:
            batch = batches[completer.completer_id]
            if batch.n_correct < MIN_CORRECT:
                extra = completer.sample(state, N_INCREMENT, gold_answer)
                batches[completer.completer_id] = _merge_batches(batch, extra)

    ordered = tuple(batches[c.completer_id] for c in completers)
    if any(b.n_correct < MIN_CORRECT for b in ordered):
        return DynamicSampleOutcome(n_used=n_used, batches=ordered, baseline=None, discarded=True)
    return DynamicSampleOutcome(
        n_used=n_used, batches=ordered, baseline=mc_ppl(list(ordered)), discarded=False
    )


def estimate_state(
    state: PrefixState, completers: list[Completer], n: int, gold_answer: str
) -> McEstimate:
    """Sample n rollouts from every completer at the state and estimate it."""
    if n < 1:
        raise ValueError("n must be >= 1")
    batches = [c.sample(state, n, gold_answer) for c in completers]
    return mc_ppl(batches)
