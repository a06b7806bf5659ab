"""Search-cost benchmark over the simulated corpus.

Runs the selected first-error search algorithms over an identical seeded
corpus and compares their merged cost ledgers.  The fixed-budget
baselines (sequential, binary) sample a constant number of rollouts per
probe; the adaptive search negotiates its budget at the bare question
and reuses it for every probe of that question.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .estimator import McEstimate
from .gateway import PrefixState, dynamic_sample_s0, estimate_state
from .reporting import cost_table, format_ledger
from .search import ALGORITHMS, CostLedger, find_first_error, merge_ledgers
from .sim import SimCompleter, SimParams, SyntheticQuestion, SyntheticSolution

FIXED_SAMPLE_COUNT = 48
DEFAULT_COMPLETERS = 2


class _PrefixOracle:
    """Estimates prefixes of one solution with a fixed per-probe budget."""

    def __init__(
        self,
        question: SyntheticQuestion,
        solution: SyntheticSolution,
        completers: list[SimCompleter],
        n: int,
        baseline: McEstimate,
    ):
        self.question = question
        self.solution = solution
        self.completers = completers
        self.n = n
        self.baseline = baseline

    def estimate(self, prefix_len: int) -> McEstimate:
        state = PrefixState(
            question_id=self.question.id,
            question_text=self.question.id,
            steps=self.solution.steps[:prefix_len],
        )
        return estimate_state(state, self.completers, self.n, self.question.gold_answer)


@dataclass
class SolutionOutcome:
    question_id: str
    num_steps: int
    true_first_error: int
    result_index: int
    n_used: int
    ledger: CostLedger

    @property
    def exact(self) -> bool:
        return self.result_index == self.true_first_error


@dataclass
class AlgorithmResult:
    algorithm: str
    outcomes: list[SolutionOutcome] = field(default_factory=list)
    discarded: int = 0

    @property
    def ledger(self) -> CostLedger:
        return merge_ledgers([o.ledger for o in self.outcomes])

    @property
    def exact_match_rate(self) -> float:
        if not self.outcomes:
            return 0.0
        return sum(o.exact for o in self.outcomes) / len(self.outcomes)

    def as_record(self) -> dict:
        ledger = self.ledger
        return {
            "algorithm": self.algorithm,
            "solutions": len(self.outcomes),
            "discarded": self.discarded,
            "verified_steps": ledger.verified_steps,
            "sampled_rollouts": ledger.sampled_rollouts,
            "generated_tokens": ledger.generated_tokens,
            "exact_match_rate": round(self.exact_match_rate, 4),
        }


@dataclass
class BenchmarkReport:
    results: dict[str, AlgorithmResult]

    def ledgers(self) -> dict[str, CostLedger]:
        return {name: res.ledger for name, res in self.results.items()}

    def render(self) -> str:
        lines = [cost_table(self.ledgers())]
        for name, res in self.results.items():
            lines.append(
                f"{name}: {len(res.outcomes)} solutions, "
                f"{res.discarded} discarded, "
                f"exact-match {res.exact_match_rate:.3f}, "
                f"cost {format_ledger(res.ledger)}"
            )
        return "\n".join(lines)


def _s0_state(question: SyntheticQuestion) -> PrefixState:
    return PrefixState(question_id=question.id, question_text=question.id, steps=())


def _annotate_fixed(
    algorithm: str,
    question: SyntheticQuestion,
    solution: SyntheticSolution,
    completers: list[SimCompleter],
    alpha: float,
    n_fixed: int,
) -> SolutionOutcome:
    baseline = estimate_state(
        _s0_state(question), completers, n_fixed, question.gold_answer
    )
    s0_cost = CostLedger(
        sampled_rollouts=baseline.total_rollouts,
        generated_tokens=baseline.total_generated_tokens,
    )
    oracle = _PrefixOracle(question, solution, completers, n_fixed, baseline)
    trace = find_first_error(algorithm, len(solution.steps), oracle, alpha)
    return SolutionOutcome(
        question_id=question.id,
        num_steps=len(solution.steps),
        true_first_error=solution.true_first_error,
        result_index=trace.result_index,
        n_used=n_fixed,
        ledger=s0_cost + trace.ledger,
    )


def _annotate_adaptive(
    question: SyntheticQuestion,
    solution: SyntheticSolution,
    completers: list[SimCompleter],
    alpha: float,
) -> SolutionOutcome | None:
    outcome = dynamic_sample_s0(_s0_state(question), completers, question.gold_answer)
    s0_cost = CostLedger(
        sampled_rollouts=sum(b.n for b in outcome.batches),
        generated_tokens=sum(b.generated_tokens for b in outcome.batches),
    )
    if outcome.discarded:
        return None
    oracle = _PrefixOracle(question, solution, completers, outcome.n_used, outcome.baseline)
    trace = find_first_error("adaptive", len(solution.steps), oracle, alpha)
    return SolutionOutcome(
        question_id=question.id,
        num_steps=len(solution.steps),
        true_first_error=solution.true_first_error,
        result_index=trace.result_index,
        n_used=outcome.n_used,
        ledger=s0_cost + trace.ledger,
    )


def run_cost_benchmark(
    corpus: list[tuple[SyntheticQuestion, SyntheticSolution]],
    algorithms: tuple[str, ...] = ALGORITHMS,
    alpha: float = 0.5,
    params: SimParams | None = None,
    n_fixed: int = FIXED_SAMPLE_COUNT,
    num_completers: int = DEFAULT_COMPLETERS,
) -> BenchmarkReport:
    """Annotate every corpus solution with each algorithm and tally costs.

    Questions that the adaptive budget negotiation discards are excluded
    from every algorithm, keeping the merged ledgers comparable.
    """
    if not algorithms:
        raise ValueError("select at least one algorithm")
    for name in algorithms:
        if name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {name!r}")
    params = params or SimParams()

    results: dict[str, AlgorithmResult] = {}
    discarded_questions: set[str] = set()

    # adaptive runs first so its discard decisions apply everywhere
    ordered = sorted(algorithms, key=lambda a: a != "adaptive")
    for algorithm in ordered:
        completers = [SimCompleter(corpus, params, idx) for idx in range(num_completers)]
        result = AlgorithmResult(algorithm=algorithm)
        for question, solution in corpus:
            if question.id in discarded_questions:
                continue
            if algorithm == "adaptive":
                outcome = _annotate_adaptive(question, solution, completers, alpha)
                if outcome is None:
                    result.discarded += 1
                    discarded_questions.add(question.id)
                    continue
            else:
                outcome = _annotate_fixed(
                    algorithm, question, solution, completers, alpha, n_fixed
                )
            result.outcomes.append(outcome)
        results[algorithm] = result

    return BenchmarkReport(results={a: results[a] for a in algorithms})
