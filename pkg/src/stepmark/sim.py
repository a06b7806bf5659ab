"""Seeded simulated completer and synthetic corpus generation.

The simulator stands in for a real LLM backend at desk scale: each
synthetic question has a base solve probability, each solution a true
first-error position correlated with that probability (easy questions
fail late, hard ones early), and continuations past the error still
succeed occasionally through a single error-correction factor.  All
randomness is counter-based, keyed on (seed, question, prefix length,
completer, sample index), so results never depend on scheduling order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import _kernels
from .errors import ConfigError
from .estimator import Rollout, RolloutBatch
from .gateway import PrefixState

DEFAULT_STEP_RANGE = (4, 20)


@dataclass(frozen=True)
class SyntheticQuestion:
    id: str
    base_solve_prob: float
    gold_answer: str
    level: int

    def __post_init__(self):
        if not 0.0 < self.base_solve_prob <= 1.0:
            raise ValueError("base_solve_prob must lie in (0,1]")


@dataclass(frozen=True)
class SyntheticSolution:
    question_id: str
    steps: tuple[str, ...]
    true_first_error: int
    correction_prob: float

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not 1 <= self.true_first_error <= len(self.steps):
            raise ValueError("true_first_error must lie in 1..T")
        if not 0.0 <= self.correction_prob < 1.0:
            raise ValueError("correction_prob must lie in [0,1)")


@dataclass(frozen=True)
class SimParams:
    seed: int = 0
    token_len_range: tuple[int, int] = (40, 120)
    logprob_mean_correct: float = -0.5
    logprob_mean_incorrect: float = -1.5
    logprob_stddev: float = 0.25
    corpus_size: int = 300
    difficulty_position_slope: float = 0.75
    solve_prob_range: tuple[float, float] = (0.35, 0.95)
    max_correction_prob: float = 0.3

    def __post_init__(self):
        if self.corpus_size < 1:
            raise ConfigError("corpus_size must be >= 1")
        lo, hi = self.token_len_range
        if lo < 1 or hi < lo:
            raise ConfigError("token_len_range must satisfy 1 <= min <= max")
        if self.logprob_stddev < 0:
            raise ConfigError("logprob_stddev must be >= 0")
        plo, phi = self.solve_prob_range
        if not 0.0 < plo <= phi <= 1.0:
            raise ConfigError("solve_prob_range must lie in (0,1]")


def _wrong_answer(gold: str) -> str:
    return f"not-{gold}"


def gen_corpus(params: SimParams) -> list[tuple[SyntheticQuestion, SyntheticSolution]]:
    """Generate a deterministic corpus of erroneous solutions.

    The relative position of the true first error grows with the solve
    probability, with a little jitter, reproducing the observed
    easy-fails-late / hard-fails-early trend.
    """
    rng = random.Random(params.seed)
    plo, phi = params.solve_prob_range
    corpus = []
    for i in range(params.corpus_size):
        qid = f"simq-{i:05d}"
        p0 = rng.uniform(plo, phi)
        gold = str(rng.randrange(1, 1000))
        level = 1 + min(4, int((phi - p0) / max(phi - plo, 1e-9) * 5.0))
        num_steps = rng.randint(*DEFAULT_STEP_RANGE)
        frac = 0.08 + params.difficulty_position_slope * p0 + rng.uniform(-0.06, 0.06)
        frac = min(1.0, max(1.0 / num_steps, frac))
        first_error = max(1, min(num_steps, round(frac * num_steps)))
        gamma = rng.uniform(0.0, params.max_correction_prob)
        steps = tuple(
            f"Step {k}: simulated reasoning for {qid}." for k in range(1, num_steps + 1)
        )
        question = SyntheticQuestion(
            id=qid, base_solve_prob=p0, gold_answer=gold, level=level
        )
        solution = SyntheticSolution(
            question_id=qid,
            steps=steps,
            true_first_error=first_error,
            correction_prob=gamma,
        )
        corpus.append((question, solution))
    return corpus


def sim_sample_rollouts(
    state: PrefixState,
    question: SyntheticQuestion,
    solution: SyntheticSolution,
    n: int,
    params: SimParams,
    completer_index: int = 0,
    start_index: int = 0,
    completer_id: str | None = None,
) -> RolloutBatch:
    """Sample n synthetic rollouts for a prefix of the solution.

    A rollout is correct with the base solve probability while the prefix
    is still clean, and with the (smaller) corrected probability once the
    prefix contains the true first error.
    """
    if state.t > len(solution.steps):
        raise ValueError("prefix longer than the solution")
    p0 = question.base_solve_prob
    p_correct = p0 if state.t < solution.true_first_error else solution.correction_prob * p0
    key = _kernels.stream_key(
        params.seed,
        _kernels.fnv1a64(state.question_id.encode("utf-8")),
        state.t,
        completer_index,
    )
    lmin, lmax = params.token_len_range
    flags, logprob_lists = _kernels.sample_rollout_batch(
        key,
        start_index,
        n,
        lmin,
        lmax,
        p_correct,
        params.logprob_mean_correct,
        params.logprob_mean_incorrect,
        params.logprob_stddev,
    )
    cid = completer_id or f"sim-{completer_index}"
    gold = question.gold_answer
    rollouts = []
    for correct, logprobs in zip(flags, logprob_lists):
        answer = gold if correct else _wrong_answer(gold)
        rollouts.append(
            Rollout(
                tokens_logprobs=tuple(logprobs),
                text=f"Simulated continuation. The final answer is ${answer}$.",
                extracted_answer=f"${answer}$",
                is_correct=correct,
                completer_id=cid,
            )
        )
    return RolloutBatch(completer_id=cid, rollouts=tuple(rollouts))


class SimCompleter:
    """Completer-protocol adapter over the simulated world.

    Repeated samples at the same prefix continue the sample-index stream,
    so dynamic budget growth stays deterministic no matter how calls are
    chunked.  Expects one solution per question.
    """

    def __init__(
        self,
        corpus: list[tuple[SyntheticQuestion, SyntheticSolution]],
        params: SimParams,
        completer_index: int = 0,
    ):
        self.params = params
        self.completer_index = completer_index
        self.completer_id = f"sim-{completer_index}"
        self._by_question = {q.id: (q, s) for q, s in corpus}
        if len(self._by_question) != len(corpus):
            raise ConfigError("simulated corpus must contain one solution per question")
        self._drawn: dict[tuple[str, int], int] = {}

    def sample(self, state: PrefixState, n: int, gold_answer: str) -> RolloutBatch:
        try:
            question, solution = self._by_question[state.question_id]
        except KeyError:
            raise ConfigError(f"unknown simulated question {state.question_id!r}") from None
        counter_key = (state.question_id, state.t)
        start = self._drawn.get(counter_key, 0)
        self._drawn[counter_key] = start + n
        return sim_sample_rollouts(
            state,
            question,
            solution,
            n,
            self.params,
            completer_index=self.completer_index,
            start_index=start,
            completer_id=self.completer_id,
        )

    def reset(self) -> None:
        """Forget sample-index counters (fresh streams per search run)."""
        self._drawn.clear()

    def reset_prefixes(self) -> None:
        """Forget counters for interior prefixes, keeping bare-question ones.

        Called between solutions so that a resumed run replays the exact
        streams of an uninterrupted one."""
        for key in [k for k in self._drawn if k[1] > 0]:
            del self._drawn[key]


def corpus_to_records(
    corpus: list[tuple[SyntheticQuestion, SyntheticSolution]],
) -> tuple[list, list]:
    """Render the synthetic corpus as pipeline question/solution records.

    Simulator-specific attributes ride along as extra fields, so the
    corpus files are self-describing and a simulated backend can be
    rebuilt from them."""
    from .records import QuestionRecord, SolutionRecord

    questions = []
    solutions = []
    for question, solution in corpus:
        questions.append(
            QuestionRecord(
                question_id=question.id,
                question_text=f"Simulated question {question.id}.",
                gold_answer=question.gold_answer,
                level=question.level,
                extra={"base_solve_prob": question.base_solve_prob},
            )
        )
        solutions.append(
            SolutionRecord(
                question_id=question.id,
                solution_id=f"{question.id}-sol",
                steps=solution.steps,
                final_answer=_wrong_answer(question.gold_answer),
                is_correct=False,
                extra={
                    "true_first_error": solution.true_first_error,
                    "correction_prob": solution.correction_prob,
                },
            )
        )
    return questions, solutions


def corpus_from_records(questions, solutions) -> list[tuple[SyntheticQuestion, SyntheticSolution]]:
    """Inverse of :func:`corpus_to_records`."""
    by_question = {q.question_id: q for q in questions}
    corpus = []
    for record in solutions:
        q = by_question[record.question_id]
        question = SyntheticQuestion(
            id=q.question_id,
            base_solve_prob=float(q.extra["base_solve_prob"]),
            gold_answer=q.gold_answer,
            level=q.level if q.level is not None else 3,
        )
        solution = SyntheticSolution(
            question_id=q.question_id,
            steps=tuple(record.steps),
            true_first_error=int(record.extra["true_first_error"]),
            correction_prob=float(record.extra["correction_prob"]),
        )
        corpus.append((question, solution))
    return corpus
