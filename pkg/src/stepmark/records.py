"""JSONL record types for the annotation pipeline.

All files are UTF-8 JSON lines, one object per line.  Unknown fields on
input records are preserved through a round trip; serialization uses a
fixed key order (known fields first, extras sorted) so that
serialize -> parse -> serialize is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .search import CostLedger, SearchTrace

CHECKPOINT_STATUSES = ("pending", "in_progress", "done", "discarded", "failed")


def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False)


def _with_extra(known: dict, extra: dict) -> dict:
    for key in sorted(extra):
        if key not in known:
            known[key] = extra[key]
    return known


def _split_extra(data: dict, known_keys: tuple[str, ...]) -> dict:
    return {k: v for k, v in data.items() if k not in known_keys}


@dataclass(frozen=True)
class QuestionRecord:
    question_id: str
    question_text: str
    gold_answer: str
    level: int | None = None
    extra: dict = field(default_factory=dict)

    _KEYS = ("question_id", "question_text", "gold_answer", "level")

    def to_json(self) -> str:
        known = {
            "question_id": self.question_id,
            "question_text": self.question_text,
            "gold_answer": self.gold_answer,
        }
        if self.level is not None:
            known["level"] = self.level
        return _dumps(_with_extra(known, self.extra))

    @classmethod
    def from_json(cls, line: str) -> "QuestionRecord":
        data = json.loads(line)
        return cls(
            question_id=data["question_id"],
            question_text=data["question_text"],
            gold_answer=data["gold_answer"],
            level=data.get("level"),
            extra=_split_extra(data, cls._KEYS),
        )


@dataclass(frozen=True)
class SolutionRecord:
    question_id: str
    solution_id: str
    steps: tuple[str, ...]
    final_answer: str
    is_correct: bool
    extra: dict = field(default_factory=dict)

    _KEYS = ("question_id", "solution_id", "steps", "final_answer", "is_correct")

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if len(self.steps) < 1:
            raise ValueError("a solution must contain at least one step")

    @property
    def num_steps(self) -> int:
        return len(self.steps)

    def to_json(self) -> str:
        known = {
            "question_id": self.question_id,
            "solution_id": self.solution_id,
            "steps": list(self.steps),
            "final_answer": self.final_answer,
            "is_correct": self.is_correct,
        }
        return _dumps(_with_extra(known, self.extra))

    @classmethod
    def from_json(cls, line: str) -> "SolutionRecord":
        data = json.loads(line)
        return cls(
            question_id=data["question_id"],
            solution_id=data["solution_id"],
            steps=tuple(data["steps"]),
            final_answer=data["final_answer"],
            is_correct=data["is_correct"],
            extra=_split_extra(data, cls._KEYS),
        )


def trace_to_dict(trace: SearchTrace) -> dict:
    return {
        "algorithm": trace.algorithm,
        "probes": [[index, value] for index, value in trace.probes],
        "result_index": trace.result_index,
        "ledger": ledger_to_dict(trace.ledger),
    }


def trace_from_dict(data: dict) -> SearchTrace:
    return SearchTrace(
        algorithm=data["algorithm"],
        probes=tuple((int(i), float(v)) for i, v in data["probes"]),
        result_index=data["result_index"],
        ledger=ledger_from_dict(data["ledger"]),
    )


def ledger_to_dict(ledger: CostLedger) -> dict:
    return {
        "verified_steps": ledger.verified_steps,
        "sampled_rollouts": ledger.sampled_rollouts,
        "generated_tokens": ledger.generated_tokens,
    }


def ledger_from_dict(data: dict) -> CostLedger:
    return CostLedger(
        verified_steps=data["verified_steps"],
        sampled_rollouts=data["sampled_rollouts"],
        generated_tokens=data["generated_tokens"],
    )


@dataclass(frozen=True)
class AnnotatedRecord:
    """One fully annotated solution: labels, provenance, and search cost."""

    question_id: str
    solution_id: str
    labels: tuple[int, ...]
    first_error_index: int | None
    difficulty: int
    baseline_value: float
    n_used: int
    trace: SearchTrace | None
    ledger: CostLedger
    completer_ids: tuple[str, ...]
    extra: dict = field(default_factory=dict)

    _KEYS = (
        "question_id",
        "solution_id",
        "labels",
        "first_error_index",
        "difficulty",
        "baseline_value",
        "n_used",
        "trace",
        "ledger",
        "completer_ids",
    )

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "completer_ids", tuple(self.completer_ids))
        t = len(self.labels)
        if t < 1:
            raise ValueError("labels must cover at least one step")
        if self.first_error_index is None:
            if any(lb != 1 for lb in self.labels):
                raise ValueError("a fully-correct solution must have all-1 labels")
        else:
            if not 1 <= self.first_error_index <= t:
                raise ValueError("first_error_index must lie in 1..T")
            expected = tuple(
                1 if i < self.first_error_index else 0 for i in range(1, t + 1)
            )
            if self.labels != expected:
                raise ValueError("labels must be 1 before the first error and 0 from it on")

    def to_json(self) -> str:
        known = {
            "question_id": self.question_id,
            "solution_id": self.solution_id,
            "labels": list(self.labels),
            "first_error_index": self.first_error_index,
            "difficulty": self.difficulty,
            "baseline_value": self.baseline_value,
            "n_used": self.n_used,
            "trace": trace_to_dict(self.trace) if self.trace is not None else None,
            "ledger": ledger_to_dict(self.ledger),
            "completer_ids": list(self.completer_ids),
        }
        return _dumps(_with_extra(known, self.extra))

    @classmethod
    def from_json(cls, line: str) -> "AnnotatedRecord":
        data = json.loads(line)
        trace = data.get("trace")
        return cls(
            question_id=data["question_id"],
            solution_id=data["solution_id"],
            labels=tuple(data["labels"]),
            first_error_index=data["first_error_index"],
            difficulty=data["difficulty"],
            baseline_value=data["baseline_value"],
            n_used=data["n_used"],
            trace=trace_from_dict(trace) if trace is not None else None,
            ledger=ledger_from_dict(data["ledger"]),
            completer_ids=tuple(data["completer_ids"]),
            extra=_split_extra(data, cls._KEYS),
        )


@dataclass(frozen=True)
class CheckpointEntry:
    solution_id: str
    status: str
    attempt_count: int = 0

    def __post_init__(self):
        if self.status not in CHECKPOINT_STATUSES:
            raise ValueError(f"unknown checkpoint status {self.status!r}")

    def to_json(self) -> str:
        return _dumps(
            {
                "solution_id": self.solution_id,
                "status": self.status,
                "attempt_count": self.attempt_count,
            }
        )

    @classmethod
    def from_json(cls, line: str) -> "CheckpointEntry":
        data = json.loads(line)
        return cls(
            solution_id=data["solution_id"],
            status=data["status"],
            attempt_count=data.get("attempt_count", 0),
        )


def read_jsonl(path: str | Path, parser) -> Iterator:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield parser(line)


def write_jsonl(path: str | Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")
