"""Command-line entry point.

Subcommands: generate, select, annotate, simulate, report, export.
Configuration comes from a plain key = value file; API keys are read
only from the environment variables the config names.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import benchmark as bench
from . import pipeline, selection, sim
from .errors import ConfigError, StepmarkError
from .gateway import (
    CompleterConfig,
    HttpCompleter,
    PrefixState,
    RetryPolicy,
    SamplingParams,
)
from .records import QuestionRecord, SolutionRecord, read_jsonl, write_jsonl
from .search import ALGORITHMS

log = logging.getLogger(__name__)


def _sampling_params(config: dict[str, str]) -> SamplingParams:
    kwargs = {}
    if "sampling.temperature" in config:
        kwargs["temperature"] = float(config["sampling.temperature"])
    if "sampling.top_p" in config:
        kwargs["top_p"] = float(config["sampling.top_p"])
    if "sampling.max_tokens" in config:
        kwargs["max_tokens"] = int(config["sampling.max_tokens"])
    if "sampling.stop" in config:
        kwargs["stop_sequences"] = tuple(
            s for s in config["sampling.stop"].split("|") if s
        )
    if "sampling.n_per_request" in config:
        kwargs["n_per_request"] = int(config["sampling.n_per_request"])
    return SamplingParams(**kwargs)


def _http_completers(config: dict[str, str]) -> list[HttpCompleter]:
    ids = sorted(
        {
            key.split(".")[1]
            for key in config
            if key.startswith("completer.") and key.count(".") >= 2
        }
    )
    if not ids:
        raise ConfigError("no completer.<id>.* entries in config")
    params = _sampling_params(config)
    completers = []
    for cid in ids:
        prefix = f"completer.{cid}."

        def get(name: str, default: str | None = None) -> str:
            value = config.get(prefix + name, default)
            if value is None:
                raise ConfigError(f"missing config key {prefix + name}")
            return value

        completers.append(
            HttpCompleter(
                CompleterConfig(
                    completer_id=cid,
                    base_url=get("base_url"),
                    model_name=get("model"),
                    auth_env_var=get("auth_env_var", "COMPLETIONS_API_KEY"),
                    max_in_flight=int(get("max_in_flight", "4")),
                    request_timeout=float(get("timeout", "120")),
                    retry_policy=RetryPolicy(
                        max_retries=int(get("max_retries", "3")),
                        base_backoff=float(get("base_backoff", "0.5")),
                    ),
                ),
                params,
            )
        )
    return completers


def _sim_params(config: dict[str, str], seed: int) -> sim.SimParams:
    kwargs = {"seed": int(config.get("sim.seed", seed))}
    if "sim.corpus_size" in config:
        kwargs["corpus_size"] = int(config["sim.corpus_size"])
    if "sim.slope" in config:
        kwargs["difficulty_position_slope"] = float(config["sim.slope"])
    return sim.SimParams(**kwargs)


def _build_completers(config: dict[str, str], args, questions_path, solutions_path):
    backend = config.get("backend", "http")
    if backend == "http":
        return _http_completers(config)
    if backend == "simulated":
        questions = list(read_jsonl(questions_path, QuestionRecord.from_json))
        solutions = list(read_jsonl(solutions_path, SolutionRecord.from_json))
        corpus = sim.corpus_from_records(questions, solutions)
        params = _sim_params(config, args.seed)
        count = int(config.get("sim.num_completers", "2"))
        return [sim.SimCompleter(corpus, params, idx) for idx in range(count)]
    raise ConfigError(f"unknown backend {backend!r}")


def _cmd_generate(args) -> int:
    config = pipeline.parse_config(args.config)
    completers = _http_completers(config)
    questions = list(read_jsonl(args.questions, QuestionRecord.from_json))
    solutions = []
    for question in questions:
        state = PrefixState(
            question_id=question.question_id,
            question_text=question.question_text,
            steps=(),
        )
        for completer in completers:
            batch = completer.sample(state, args.num_per_completer, question.gold_answer)
            for i, rollout in enumerate(batch.rollouts):
                solutions.append(
                    SolutionRecord(
                        question_id=question.question_id,
                        solution_id=f"{question.question_id}-{completer.completer_id}-{i:03d}",
                        steps=tuple(selection.segment_steps(rollout.text)),
                        final_answer=rollout.extracted_answer or "",
                        is_correct=rollout.is_correct,
                    )
                )
    write_jsonl(args.out, solutions)
    print(f"wrote {len(solutions)} candidate solutions to {args.out}")
    return 0


def _cmd_select(args) -> int:
    candidates = list(read_jsonl(args.solutions, SolutionRecord.from_json))
    chosen = selection.select_diverse_solutions(candidates, args.n_correct, args.n_incorrect)
    write_jsonl(args.out, chosen)
    print(f"selected {len(chosen)} of {len(candidates)} solutions -> {args.out}")
    return 0


def _cmd_annotate(args) -> int:
    config = pipeline.parse_config(args.config) if args.config else {"backend": "http"}
    completers = _build_completers(config, args, args.questions, args.solutions)
    options = pipeline.AnnotateOptions(
        algorithm=args.algorithm, alpha=args.alpha, workers=args.workers
    )
    result = pipeline.annotate_corpus(
        args.questions,
        args.solutions,
        args.out,
        completers,
        options,
        checkpoint_path=args.checkpoint,
    )
    print(
        f"annotated {result.annotated}, discarded {result.discarded}, "
        f"failed {len(result.failed)}"
    )
    return 1 if result.failed else 0


def _cmd_simulate(args) -> int:
    params = sim.SimParams(
        seed=args.seed,
        corpus_size=args.corpus_size,
        difficulty_position_slope=args.slope,
    )
    corpus = sim.gen_corpus(params)
    if args.write_corpus:
        questions, solutions = sim.corpus_to_records(corpus)
        write_jsonl(Path(args.write_corpus + ".questions.jsonl"), questions)
        write_jsonl(Path(args.write_corpus + ".solutions.jsonl"), solutions)
    algorithms = tuple(args.algorithms.split(","))
    report = bench.run_cost_benchmark(
        corpus, algorithms=algorithms, alpha=args.alpha, params=params
    )
    print(report.render())
    if args.out_jsonl:
        import json

        with open(args.out_jsonl, "w", encoding="utf-8") as fh:
            for result in report.results.values():
                fh.write(json.dumps(result.as_record()) + "\n")
    return 0


def _cmd_report(args) -> int:
    print(pipeline.cost_report(args.annotated))
    return 0


def _cmd_export(args) -> int:
    stats = pipeline.export_dataset(
        args.annotated,
        args.questions,
        args.solutions,
        args.out,
        stats_path=args.stats,
        options=pipeline.ExportOptions(
            balance=not args.no_balance, ratio=args.ratio, seed=args.seed
        ),
    )
    print(
        f"exported {stats['examples']} examples "
        f"(labels {stats['label_counts']}) -> {args.out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="key = value config file")
    shared.add_argument("--seed", type=int, default=0)
    shared.add_argument("--algorithm", choices=ALGORITHMS, default="adaptive")
    shared.add_argument("--alpha", type=float, default=0.5)
    shared.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(
        prog="stepmark",
        description="Step-level annotation of chain-of-thought solutions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[shared], help="sample candidate solutions")
    p.add_argument("--questions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--num-per-completer", type=int, default=8)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("select", parents=[shared], help="pick diverse candidates")
    p.add_argument("--solutions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-correct", type=int, default=2)
    p.add_argument("--n-incorrect", type=int, default=6)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("annotate", parents=[shared], help="run step annotation")
    p.add_argument("--questions", required=True)
    p.add_argument("--solutions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint")
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("simulate", parents=[shared], help="run the simulated cost benchmark")
    p.add_argument("--corpus-size", type=int, default=300)
    p.add_argument("--slope", type=float, default=0.75)
    p.add_argument("--algorithms", default="sequential,binary,adaptive")
    p.add_argument("--write-corpus", help="path prefix for corpus JSONL files")
    p.add_argument("--out-jsonl", help="machine-readable per-algorithm results")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("report", parents=[shared], help="cost comparison table")
    p.add_argument("annotated", nargs="+", help="annotated JSONL files")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("export", parents=[shared], help="emit training examples")
    p.add_argument("--annotated", required=True)
    p.add_argument("--questions", required=True)
    p.add_argument("--solutions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stats")
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--no-balance", action="store_true")
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StepmarkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
