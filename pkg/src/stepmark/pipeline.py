"""End-to-end annotation pipeline: ingest, annotate with checkpoint and
resume, export training data and cost reports.

The unit of work is one question: its bare-question budget negotiation is
shared by all of its candidate solutions.  Completed solutions are
appended to a journal and tracked in a checkpoint file; the final output
is rewritten from the journal sorted by (question_id, solution_id), so a
run interrupted and resumed produces byte-identical output.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .answers import answers_equivalent
from .errors import ConfigError
from .estimator import DEFAULT_ALPHA, McEstimate, difficulty
from .gateway import Completer, PrefixState, dynamic_sample_s0, estimate_state
from .records import (
    AnnotatedRecord,
    CheckpointEntry,
    QuestionRecord,
    SolutionRecord,
    read_jsonl,
)
from .reporting import cost_table
from .search import CostLedger, find_first_error, merge_ledgers

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# configuration


def parse_config(path: str | Path) -> dict[str, str]:
    """Parse a plain key = value config file; '#' starts a comment."""
    config: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            config[key.strip()] = value.strip()
    return config


# ---------------------------------------------------------------------------
# checkpointed annotation


@dataclass
class AnnotateOptions:
    algorithm: str = "adaptive"
    alpha: float = DEFAULT_ALPHA
    workers: int = 1
    max_attempts: int = 3


class _Journal:
    """Append-only record journal plus an atomically rewritten checkpoint."""

    def __init__(self, journal_path: Path, checkpoint_path: Path):
        self.journal_path = journal_path
        self.checkpoint_path = checkpoint_path
        self.entries: dict[str, CheckpointEntry] = {}
        self.records: dict[str, AnnotatedRecord] = {}
        self._lock = threading.Lock()
        self._load()

    def _load(self) -> None:
        if self.checkpoint_path.exists():
            for entry in read_jsonl(self.checkpoint_path, CheckpointEntry.from_json):
                self.entries[entry.solution_id] = entry
        if self.journal_path.exists():
            for record in read_jsonl(self.journal_path, AnnotatedRecord.from_json):
                self.records.setdefault(record.solution_id, record)
        # a crashed run may leave in_progress markers; retry those
        for sid, entry in list(self.entries.items()):
            if entry.status in ("in_progress", "failed"):
                self.entries[sid] = CheckpointEntry(sid, "pending", entry.attempt_count)

    def is_done(self, solution_id: str) -> bool:
        entry = self.entries.get(solution_id)
        return entry is not None and entry.status in ("done", "discarded")

    def attempts(self, solution_id: str) -> int:
        entry = self.entries.get(solution_id)
        return entry.attempt_count if entry else 0

    def _flush_checkpoint(self) -> None:
        fd, tmp = tempfile.mkstemp(
            dir=self.checkpoint_path.parent, prefix=self.checkpoint_path.name
        )
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for sid in sorted(self.entries):
                fh.write(self.entries[sid].to_json() + "\n")
        os.replace(tmp, self.checkpoint_path)

    def mark(self, solution_id: str, status: str, attempt_count: int = 0) -> None:
        with self._lock:
            self.entries[solution_id] = CheckpointEntry(solution_id, status, attempt_count)
            self._flush_checkpoint()

    def commit(self, record: AnnotatedRecord, status: str = "done") -> None:
        with self._lock:
            self.records[record.solution_id] = record
            with open(self.journal_path, "a", encoding="utf-8") as fh:
                fh.write(record.to_json() + "\n")
            entry = self.entries.get(record.solution_id)
            attempts = entry.attempt_count if entry else 0
            self.entries[record.solution_id] = CheckpointEntry(
                record.solution_id, status, attempts
            )
            self._flush_checkpoint()


class _PipelineOracle:
    """Prefix estimator bound to one solution and a fixed probe budget."""

    def __init__(
        self,
        question: QuestionRecord,
        solution: SolutionRecord,
        completers: list[Completer],
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
            question_id=self.question.question_id,
            question_text=self.question.question_text,
            steps=self.solution.steps[:prefix_len],
        )
        return estimate_state(state, self.completers, self.n, self.question.gold_answer)


@dataclass
class AnnotateResult:
    annotated: int = 0
    discarded: int = 0
    failed: list[str] = field(default_factory=list)


def _reset_prefix_counters(completers: list[Completer]) -> None:
    for completer in completers:
        reset = getattr(completer, "reset_prefixes", None)
        if reset is not None:
            reset()


def _annotate_question(
    question: QuestionRecord,
    solutions: list[SolutionRecord],
    completers: list[Completer],
    options: AnnotateOptions,
    journal: _Journal,
    result: AnnotateResult,
) -> None:
    pending = [s for s in solutions if not journal.is_done(s.solution_id)]
    if not pending:
        return
    for solution in pending:
        journal.mark(
            solution.solution_id, "in_progress", journal.attempts(solution.solution_id) + 1
        )
    try:
        state0 = PrefixState(
            question_id=question.question_id,
            question_text=question.question_text,
            steps=(),
        )
        outcome = dynamic_sample_s0(state0, completers, question.gold_answer)
        s0_cost = CostLedger(
            sampled_rollouts=sum(b.n for b in outcome.batches),
            generated_tokens=sum(b.generated_tokens for b in outcome.batches),
        )
        if outcome.discarded:
            for solution in pending:
                journal.mark(solution.solution_id, "discarded")
                result.discarded += 1
            return

        baseline = outcome.baseline
        level = difficulty(baseline)
        completer_ids = tuple(c.completer_id for c in completers)
        first_of_question = True
        for solution in pending:
            num_steps = solution.num_steps
            correct = answers_equivalent(solution.final_answer, question.gold_answer)
            if correct:
                trace = None
                ledger = CostLedger()
                labels = (1,) * num_steps
                first_error = None
            else:
                _reset_prefix_counters(completers)
                oracle = _PipelineOracle(
                    question, solution, completers, outcome.n_used, baseline
                )
                trace = find_first_error(options.algorithm, num_steps, oracle, options.alpha)
                first_error = trace.result_index
                labels = tuple(1 if i < first_error else 0 for i in range(1, num_steps + 1))
                ledger = trace.ledger
            if first_of_question:
                # the shared bare-question sampling is billed to the first
                # record of the question so merged ledgers stay accurate
                ledger = ledger + s0_cost
                first_of_question = False
            journal.commit(
                AnnotatedRecord(
                    question_id=question.question_id,
                    solution_id=solution.solution_id,
                    labels=labels,
                    first_error_index=first_error,
                    difficulty=level.d,
                    baseline_value=baseline.value,
                    n_used=outcome.n_used,
                    trace=trace,
                    ledger=ledger,
                    completer_ids=completer_ids,
                )
            )
            result.annotated += 1
    except Exception:
        log.exception("annotation failed for question %s", question.question_id)
        for solution in pending:
            if not journal.is_done(solution.solution_id):
                journal.mark(
                    solution.solution_id, "failed", journal.attempts(solution.solution_id)
                )
                result.failed.append(solution.solution_id)


def annotate_corpus(
    questions_path: str | Path,
    solutions_path: str | Path,
    out_path: str | Path,
    completers: list[Completer],
    options: AnnotateOptions | None = None,
    checkpoint_path: str | Path | None = None,
) -> AnnotateResult:
    """Annotate every solution; resumable, deterministic under the
    simulated backend.  Returns counts; failures leave the run resumable."""
    options = options or AnnotateOptions()
    out_path = Path(out_path)
    checkpoint_path = Path(checkpoint_path or str(out_path) + ".checkpoint")
    journal = _Journal(Path(str(out_path) + ".journal"), checkpoint_path)

    questions = {q.question_id: q for q in read_jsonl(questions_path, QuestionRecord.from_json)}
    by_question: dict[str, list[SolutionRecord]] = {}
    for solution in read_jsonl(solutions_path, SolutionRecord.from_json):
        if solution.question_id not in questions:
            raise ConfigError(f"solution {solution.solution_id} references unknown question")
        by_question.setdefault(solution.question_id, []).append(solution)
    for sols in by_question.values():
        sols.sort(key=lambda s: s.solution_id)

    result = AnnotateResult()
    work = [(questions[qid], by_question[qid]) for qid in sorted(by_question)]
    if options.workers <= 1:
        for question, sols in work:
            _annotate_question(question, sols, completers, options, journal, result)
    else:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            futures = [
                pool.submit(
                    _annotate_question, question, sols, completers, options, journal, result
                )
                for question, sols in work
            ]
            for future in futures:
                future.result()

    ordered = sorted(
        journal.records.values(), key=lambda r: (r.question_id, r.solution_id)
    )
    with open(out_path, "w", encoding="utf-8") as fh:
        for record in ordered:
            fh.write(record.to_json() + "\n")
    return result


# ---------------------------------------------------------------------------
# export


@dataclass
class ExportOptions:
    balance: bool = True
    ratio: float = 1.0  # majority:minority examples, 1.0 means 1:1
    seed: int = 0
    tokens_bucket: int = 10


def _approx_tokens(text: str) -> int:
    return len(text.split())


def export_dataset(
    annotated_path: str | Path,
    questions_path: str | Path,
    solutions_path: str | Path,
    out_path: str | Path,
    stats_path: str | Path | None = None,
    options: ExportOptions | None = None,
) -> dict:
    """Emit one training example per step and a statistics report.

    An example is the question plus the solution prefix up to and
    including the step, with the step's 0/1 label.  Balancing downsamples
    the majority label class to the requested ratio with a seeded pick.
    """
    options = options or ExportOptions()
    questions = {q.question_id: q for q in read_jsonl(questions_path, QuestionRecord.from_json)}
    solutions = {s.solution_id: s for s in read_jsonl(solutions_path, SolutionRecord.from_json)}
    records = list(read_jsonl(annotated_path, AnnotatedRecord.from_json))
    if not records:
        raise ConfigError(f"no annotated records in {annotated_path}")

    examples = []
    steps_per_solution = Counter()
    tokens_per_step = Counter()
    for record in records:
        question = questions[record.question_id]
        solution = solutions[record.solution_id]
        steps_per_solution[solution.num_steps] += 1
        for t, label in enumerate(record.labels, start=1):
            prefix = "\n".join(solution.steps[:t])
            tokens_per_step[
                _approx_tokens(solution.steps[t - 1]) // options.tokens_bucket
                * options.tokens_bucket
            ] += 1
            examples.append(
                {
                    "question_id": record.question_id,
                    "solution_id": record.solution_id,
                    "step_index": t,
                    "question": question.question_text,
                    "input_text": f"{question.question_text}\n{prefix}",
                    "label": label,
                }
            )

    if options.balance:
        examples = _balance(examples, options.ratio, options.seed)

    with open(out_path, "w", encoding="utf-8") as fh:
        for example in examples:
            fh.write(json.dumps(example, ensure_ascii=False) + "\n")

    label_counts = Counter(e["label"] for e in examples)
    stats = {
        "solutions": len(records),
        "examples": len(examples),
        "label_counts": {str(k): v for k, v in sorted(label_counts.items())},
        "label_ratio": (
            label_counts[1] / label_counts[0] if label_counts[0] else None
        ),
        "steps_per_solution_hist": {str(k): v for k, v in sorted(steps_per_solution.items())},
        "tokens_per_step_hist": {
            f"{k}-{k + options.tokens_bucket - 1}": v
            for k, v in sorted(tokens_per_step.items())
        },
    }
    if stats_path is not None:
        with open(stats_path, "w", encoding="utf-8") as fh:
            json.dump(stats, fh, ensure_ascii=False, indent=2)
            fh.write("\n")
    return stats


def _balance(examples: list[dict], ratio: float, seed: int) -> list[dict]:
    import random

    by_label: dict[int, list[dict]] = {0: [], 1: []}
    for example in examples:
        by_label[example["label"]].append(example)
    if not by_label[0] or not by_label[1]:
        return examples
    minority_label = min((0, 1), key=lambda lb: len(by_label[lb]))
    majority_label = 1 - minority_label
    keep = min(
        len(by_label[majority_label]), round(len(by_label[minority_label]) * ratio)
    )
    rng = random.Random(seed)
    kept_majority = rng.sample(by_label[majority_label], keep)
    kept_ids = {id(e) for e in kept_majority}
    return [
        e
        for e in examples
        if e["label"] == minority_label or id(e) in kept_ids
    ]


# ---------------------------------------------------------------------------
# cost reporting


def cost_report(annotated_paths: list[str | Path]) -> str:
    """Render the per-algorithm cost comparison from annotated JSONL files."""
    per_algorithm: dict[str, list[CostLedger]] = {}
    for path in annotated_paths:
        for record in read_jsonl(path, AnnotatedRecord.from_json):
            name = record.trace.algorithm if record.trace is not None else "none"
            per_algorithm.setdefault(name, []).append(record.ledger)
    if not per_algorithm:
        raise ConfigError("no annotated records found")
    order = ["sequential", "binary", "adaptive"]
    merged = {
        name: merge_ledgers(per_algorithm[name])
        for name in sorted(per_algorithm, key=lambda n: (order.index(n) if n in order else 99, n))
    }
    return cost_table(merged)
