"""CLI smoke tests running the full simulated workflow in-process."""

from __future__ import annotations

import pytest

from stepmark.cli import main
from stepmark.records import (
    AnnotatedRecord,
    SolutionRecord,
    read_jsonl,
    write_jsonl,
)
from stepmark.sim import SimParams, corpus_to_records, gen_corpus


@pytest.fixture
def sim_files(tmp_path):
    corpus = gen_corpus(SimParams(seed=5, corpus_size=6))
    questions, solutions = corpus_to_records(corpus)
    qpath = tmp_path / "questions.jsonl"
    spath = tmp_path / "solutions.jsonl"
    write_jsonl(qpath, questions)
    write_jsonl(spath, solutions)
    config = tmp_path / "sim.conf"
    config.write_text("backend = simulated\nsim.seed = 5\n")
    return qpath, spath, config


def test_annotate_report_export_round(sim_files, tmp_path, capsys):
    qpath, spath, config = sim_files
    out = tmp_path / "annotated.jsonl"
    code = main(
        [
            "annotate",
            "--config", str(config),
            "--questions", str(qpath),
            "--solutions", str(spath),
            "--out", str(out),
        ]
    )
    assert code == 0
    assert "annotated" in capsys.readouterr().out
    records = list(read_jsonl(out, AnnotatedRecord.from_json))
    assert records

    assert main(["report", str(out)]) == 0
    assert "Algorithm" in capsys.readouterr().out

    train = tmp_path / "train.jsonl"
    code = main(
        [
            "export",
            "--annotated", str(out),
            "--questions", str(qpath),
            "--solutions", str(spath),
            "--out", str(train),
            "--no-balance",
        ]
    )
    assert code == 0
    assert "exported" in capsys.readouterr().out
    assert train.read_text().strip()


def test_select_subcommand(sim_files, tmp_path, capsys):
    _, spath, _ = sim_files
    out = tmp_path / "selected.jsonl"
    code = main(
        ["select", "--solutions", str(spath), "--out", str(out), "--n-incorrect", "1"]
    )
    assert code == 0
    selected = list(read_jsonl(out, SolutionRecord.from_json))
    assert len(selected) == 6  # one per question


def test_simulate_subcommand(tmp_path, capsys):
    out_jsonl = tmp_path / "bench.jsonl"
    code = main(
        [
            "simulate",
            "--corpus-size", "8",
            "--algorithms", "binary,adaptive",
            "--out-jsonl", str(out_jsonl),
        ]
    )
    assert code == 0
    rendered = capsys.readouterr().out
    assert "binary" in rendered and "adaptive" in rendered
    assert len(out_jsonl.read_text().splitlines()) == 2


def test_config_error_exit_code(tmp_path, capsys):
    config = tmp_path / "bad.conf"
    config.write_text("backend = teapot\n")
    code = main(
        [
            "annotate",
            "--config", str(config),
            "--questions", str(tmp_path / "missing.jsonl"),
            "--solutions", str(tmp_path / "missing.jsonl"),
            "--out", str(tmp_path / "out.jsonl"),
        ]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err
