"""Step segmentation and diversity-based candidate selection."""

from __future__ import annotations

from stepmark.prompting import EXAMPLE_1_RESPONSE
from stepmark.records import SolutionRecord
from stepmark.selection import segment_steps, select_diverse_solutions


def sol(sid, steps, correct=False, qid="q1"):
    return SolutionRecord(
        question_id=qid,
        solution_id=sid,
        steps=tuple(steps),
        final_answer="x",
        is_correct=correct,
    )


class TestSegmentation:
    def test_worked_solution_splits_into_seven_steps(self):
        steps = segment_steps(EXAMPLE_1_RESPONSE)
        assert len(steps) == 7
        assert steps[0].startswith("Step 1:I know that the Pythagorean theorem")
        assert steps[-1].startswith("Step 7:")
        assert steps[-1].endswith("The final answer is $119$.")

    def test_preamble_before_first_marker_dropped(self):
        steps = segment_steps("Let's think step by step.\n\nStep 1:Compute.\n\nStep 2:Done.")
        assert steps == ["Step 1:Compute.", "Step 2:Done."]

    def test_no_markers_is_single_step(self):
        text = "Just one blob of reasoning. The final answer is $4$."
        assert segment_steps(text) == [text]

    def test_numbering_gap_preserved(self):
        steps = segment_steps("Step 1:a.\nStep 3:b.\nStep 4:c.")
        assert [s.split(":")[0] for s in steps] == ["Step 1", "Step 3", "Step 4"]

    def test_marker_must_start_a_line(self):
        text = "Step 1:mentions that Step 2: is not a marker mid-line.\nStep 2:real."
        assert len(segment_steps(text)) == 2

    def test_spacing_tolerated(self):
        steps = segment_steps("Step  1 : a.\nStep 2: b.")
        assert len(steps) == 2


class TestDiverseSelection:
    def test_picks_most_dissimilar_pair(self):
        a = sol("sol-a", ["Step 1:use the quadratic formula on the equation."])
        b = sol("sol-b", ["Step 1:use the quadratic formula on this equation."])
        c = sol("sol-c", ["Step 1:integrate by parts twice instead."])
        picked = select_diverse_solutions([a, b, c], n_correct=0, n_incorrect=2)
        assert {s.solution_id for s in picked} == {"sol-a", "sol-c"}

    def test_identical_candidates_tie_break_by_id(self):
        cands = [sol(f"sol-{i}", ["Step 1:same text."]) for i in (3, 1, 2)]
        picked = select_diverse_solutions(cands, n_correct=0, n_incorrect=2)
        assert [s.solution_id for s in picked] == ["sol-1", "sol-2"]

    def test_classes_selected_independently(self):
        group = [
            sol("c-1", ["Step 1:alpha beta."], correct=True),
            sol("c-2", ["Step 1:alpha beta gamma."], correct=True),
            sol("i-1", ["Step 1:delta epsilon."]),
            sol("i-2", ["Step 1:delta epsilon zeta."]),
        ]
        picked = select_diverse_solutions(group, n_correct=1, n_incorrect=1)
        assert [s.solution_id for s in picked] == ["c-1", "i-1"]

    def test_shortfall_returns_everything(self):
        cands = [sol("only", ["Step 1:x."])]
        picked = select_diverse_solutions(cands, n_correct=0, n_incorrect=5)
        assert picked == cands

    def test_grouped_by_question_and_sorted(self):
        cands = [
            sol("b-1", ["Step 1:text one."], qid="q-b"),
            sol("a-1", ["Step 1:text two."], qid="q-a"),
        ]
        picked = select_diverse_solutions(cands, n_correct=0, n_incorrect=1)
        assert [s.question_id for s in picked] == ["q-a", "q-b"]

    def test_zero_request_empty(self):
        assert select_diverse_solutions([sol("s", ["Step 1:x."])], 0, 0) == []

    def test_selection_is_deterministic(self):
        cands = [
            sol(f"sol-{i}", [f"Step 1:topic {i % 3} with shared filler words."])
            for i in range(9)
        ]
        first = select_diverse_solutions(cands, 0, 4)
        second = select_diverse_solutions(list(reversed(cands)), 0, 4)
        assert first == second
