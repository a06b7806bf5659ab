"""Perplexity-weighted Monte Carlo estimation of step correctness.

A "rollout" is one sampled continuation from a prefix of a solution.  The
success probability of a prefix is estimated from sampled rollouts, but
instead of plain counting each rollout is weighted by the log of its
perplexity, so improbable completions carry different weight than likely
ones.  On top of the estimate sit the step-contribution ratio (with its
0/1 label threshold) and the 11-level difficulty bucket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import UnsolvableQuestionError

DEFAULT_ALPHA = 0.5


@dataclass(frozen=True)
class Rollout:
    """One sampled continuation with its per-token log-probabilities."""

    tokens_logprobs: tuple[float, ...]
    text: str
    extracted_answer: str | None
    is_correct: bool
    completer_id: str

    def __post_init__(self):
        object.__setattr__(self, "tokens_logprobs", tuple(self.tokens_logprobs))
        if len(self.tokens_logprobs) < 1:
            raise ValueError("rollout must contain at least one token logprob")
        if any(lp > 0.0 for lp in self.tokens_logprobs):
            raise ValueError("token logprobs must be <= 0")
        if self.is_correct and self.extracted_answer is None:
            raise ValueError("a correct rollout must carry an extracted answer")

    @property
    def token_count(self) -> int:
        return len(self.tokens_logprobs)


@dataclass(frozen=True)
class RolloutBatch:
    """All rollouts sampled from one completer at one prefix."""

    completer_id: str
    rollouts: tuple[Rollout, ...]

    def __post_init__(self):
        object.__setattr__(self, "rollouts", tuple(self.rollouts))
        if len(self.rollouts) < 1:
            raise ValueError("batch must contain at least one rollout")
        for r in self.rollouts:
            if r.completer_id != self.completer_id:
                raise ValueError(
                    f"rollout completer {r.completer_id!r} does not match "
                    f"batch completer {self.completer_id!r}"
                )

    @property
    def n(self) -> int:
        return len(self.rollouts)

    @property
    def n_correct(self) -> int:
        return sum(1 for r in self.rollouts if r.is_correct)

    @property
    def generated_tokens(self) -> int:
        return sum(r.token_count for r in self.rollouts)


@dataclass(frozen=True)
class McEstimate:
    """Perplexity-weighted success probability, averaged over completers."""

    value: float
    per_completer_values: dict[str, float] = field(default_factory=dict)
    total_rollouts: int = 0
    total_correct: int = 0
    total_generated_tokens: int = 0


@dataclass(frozen=True)
class Contribution:
    """A step's contribution ratio and the resulting 0/1 label."""

    c: float
    label: int
    alpha: float


@dataclass(frozen=True)
class Difficulty:
    """Question hardness on an 11-level scale; lower means harder."""

    d: int

    def __post_init__(self):
        if not 0 <= self.d <= 10:
            raise ValueError(f"difficulty must be in 0..10, got {self.d}")


def rollout_ppl(rollout: Rollout) -> float:
    """Perplexity of one rollout: exp of its mean negative token logprob."""
    return math.exp(log_ppl(rollout))


def log_ppl(rollout: Rollout) -> float:
    """Mean negative log-likelihood per token; this is the weight used by
    the estimate, and the log of :func:`rollout_ppl`."""
    return -sum(rollout.tokens_logprobs) / rollout.token_count


def mc_ppl(batches: list[RolloutBatch]) -> McEstimate:
    """Perplexity-weighted success estimate over one batch per completer.

    Per completer the estimate is (sum of correct rollouts' log-perplexities)
    / (sum of all rollouts' log-perplexities); the final value is the
    arithmetic mean over completers.  A degenerate batch whose weights are
    all zero (every token logprob exactly 0) falls back to the plain
    correct-count fraction M/N.
    """
    if not batches:
        raise ValueError("mc_ppl requires at least one batch")
    seen = set()
    for b in batches:
        if b.completer_id in seen:
            raise ValueError(f"duplicate batch for completer {b.completer_id!r}")
        seen.add(b.completer_id)

    per_completer: dict[str, float] = {}
    for batch in batches:
        weights = [log_ppl(r) for r in batch.rollouts]
        denom = sum(weights)
        if denom == 0.0:
            # all-certain rollouts make the weighted form undefined
            per_completer[batch.completer_id] = batch.n_correct / batch.n
        else:
            numer = sum(w for w, r in zip(weights, batch.rollouts) if r.is_correct)
            per_completer[batch.completer_id] = numer / denom

    return McEstimate(
        value=sum(per_completer.values()) / len(per_completer),
        per_completer_values=per_completer,
        total_rollouts=sum(b.n for b in batches),
        total_correct=sum(b.n_correct for b in batches),
        total_generated_tokens=sum(b.generated_tokens for b in batches),
    )


def contribution(mc_t: McEstimate, mc_0: McEstimate, alpha: float = DEFAULT_ALPHA) -> Contribution:
    """Ratio of a prefix's estimate to the bare-question baseline, labelled
    against the threshold (ratio <= alpha means the step is wrong)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    if mc_0.value <= 0.0:
        raise UnsolvableQuestionError("baseline estimate is zero; contribution undefined")
    c = mc_t.value / mc_0.value
    return Contribution(c=c, label=0 if c <= alpha else 1, alpha=alpha)


def difficulty(mc_0: McEstimate) -> Difficulty:
    """Bucket the baseline estimate into 11 levels, rounding half up."""
    v = mc_0.value
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"baseline value must lie in [0,1], got {v}")
    return Difficulty(d=math.floor(10.0 * v + 0.5))
