"""Shared test fixtures: canned rollouts, scripted completers, oracles."""

from __future__ import annotations

from stepmark.estimator import McEstimate, Rollout, RolloutBatch
from stepmark.gateway import PrefixState


def make_rollout(
    correct: bool,
    log_ppl: float = 1.0,
    tokens: int = 4,
    completer_id: str = "c0",
) -> Rollout:
    """Rollout whose per-token logprobs average to -log_ppl exactly."""
    return Rollout(
        tokens_logprobs=(-log_ppl,) * tokens,
        text="stub. The final answer is $1$.",
        extracted_answer="$1$" if correct else "$2$",
        is_correct=correct,
        completer_id=completer_id,
    )


def make_batch(flags_and_logppls, completer_id="c0", tokens=4) -> RolloutBatch:
    return RolloutBatch(
        completer_id=completer_id,
        rollouts=tuple(
            make_rollout(flag, log_ppl, tokens, completer_id)
            for flag, log_ppl in flags_and_logppls
        ),
    )


def estimate(value: float, n: int = 16, tokens_each: int = 10) -> McEstimate:
    return McEstimate(
        value=value,
        per_completer_values={"c0": value},
        total_rollouts=n,
        total_correct=int(round(value * n)),
        total_generated_tokens=n * tokens_each,
    )


class StepOracle:
    """Monotone oracle: full value before the true error, low value from it on.

    Probe costs are charged per estimate so ledger bookkeeping can be
    asserted exactly.
    """

    def __init__(
        self,
        baseline_value: float,
        first_error: int,
        fail_value: float = 0.0,
        n: int = 16,
        tokens_each: int = 10,
    ):
        self.first_error = first_error
        self.fail_value = fail_value
        self.n = n
        self.tokens_each = tokens_each
        self.baseline = estimate(baseline_value, n, tokens_each)
        self.calls: list[int] = []

    def estimate(self, prefix_len: int) -> McEstimate:
        self.calls.append(prefix_len)
        value = (
            self.baseline.value if prefix_len < self.first_error else self.fail_value
        )
        return estimate(value, self.n, self.tokens_each)


class TableOracle:
    """Oracle driven by an explicit prefix -> value table."""

    def __init__(self, values: dict[int, float], n: int = 16, tokens_each: int = 10):
        self.values = values
        self.baseline = estimate(values[0], n, tokens_each)
        self.n = n
        self.tokens_each = tokens_each

    def estimate(self, prefix_len: int) -> McEstimate:
        return estimate(self.values[prefix_len], self.n, self.tokens_each)


class ScriptedCompleter:
    """Completer returning batches with scripted correct counts per call."""

    def __init__(self, completer_id: str, correct_per_call: list[int], log_ppl=1.0):
        self.completer_id = completer_id
        self.correct_per_call = list(correct_per_call)
        self.log_ppl = log_ppl
        self.calls: list[int] = []

    def sample(self, state: PrefixState, n: int, gold_answer: str) -> RolloutBatch:
        self.calls.append(n)
        n_correct = min(n, self.correct_per_call.pop(0)) if self.correct_per_call else 0
        flags = [(i < n_correct, self.log_ppl) for i in range(n)]
        return make_batch(flags, self.completer_id)


def s0(question_id: str = "q1") -> PrefixState:
    return PrefixState(question_id=question_id, question_text="what is 1+1?", steps=())
