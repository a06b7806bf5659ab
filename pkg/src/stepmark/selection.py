"""Solution step segmentation and diversity-based candidate selection."""

from __future__ import annotations

import logging
import re

import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer

from .records import SolutionRecord

log = logging.getLogger(__name__)

_STEP_MARKER_RE = re.compile(r"(?m)^Step\s*\d+\s*:")


def segment_steps(solution_text: str) -> list[str]:
    """Split a solution on line-leading "Step n:" markers.

    Each step keeps its marker; whatever trails the last marker (the
    final-answer sentence) stays attached to the last step.  Text without
    markers is a single-step solution.  Numbering gaps are preserved.
    """
    matches = list(_STEP_MARKER_RE.finditer(solution_text))
    if not matches:
        return [solution_text.strip()]
    steps = []
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(solution_text)
        steps.append(solution_text[m.start() : end].strip())
    return steps


def _similarity_matrix(texts: list[str]) -> np.ndarray:
    try:
        matrix = TfidfVectorizer().fit_transform(texts)
    except ValueError:
        # empty vocabulary: nothing to distinguish the candidates
        return np.ones((len(texts), len(texts)))
    sims = (matrix @ matrix.T).toarray()
    return np.clip(sims, 0.0, 1.0)


def _select_subset(candidates: list[SolutionRecord], k: int) -> list[SolutionRecord]:
    candidates = sorted(candidates, key=lambda s: s.solution_id)
    if k <= 0:
        return []
    if k >= len(candidates):
        if k > len(candidates):
            log.warning(
                "requested %d candidates but only %d available", k, len(candidates)
            )
        return candidates
    if k == 1:
        return [candidates[0]]

    sims = _similarity_matrix(["\n".join(c.steps) for c in candidates])
    n = len(candidates)

    # seed with the least-similar pair, ids breaking ties
    best = min(
        ((sims[i, j], candidates[i].solution_id, candidates[j].solution_id, i, j)
         for i in range(n) for j in range(i + 1, n)),
        key=lambda t: t[:3],
    )
    selected = [best[3], best[4]]

    while len(selected) < k:
        remaining = [i for i in range(n) if i not in selected]
        pick = min(
            remaining,
            key=lambda i: (max(sims[i, j] for j in selected), candidates[i].solution_id),
        )
        selected.append(pick)
    return [candidates[i] for i in sorted(selected)]


def select_diverse_solutions(
    candidates: list[SolutionRecord], n_correct: int, n_incorrect: int
) -> list[SolutionRecord]:
    """Per question and correctness class, keep the least mutually similar
    candidates (greedy farthest-point over TF-IDF cosine similarity)."""
    by_question: dict[str, list[SolutionRecord]] = {}
    for c in candidates:
        by_question.setdefault(c.question_id, []).append(c)

    selected: list[SolutionRecord] = []
    for qid in sorted(by_question):
        group = by_question[qid]
        correct = [s for s in group if s.is_correct]
        incorrect = [s for s in group if not s.is_correct]
        selected.extend(_select_subset(correct, n_correct))
        selected.extend(_select_subset(incorrect, n_incorrect))
    return selected
