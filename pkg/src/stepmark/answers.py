"""Final-answer extraction and equivalence checking.

Completions state their result after a fixed marker ("The final answer
is ..."), in MATH-dataset style: possibly wrapped in ``$`` or
``\\boxed{}``, with LaTeX fractions and thousands separators.  Two
answers are equivalent when their canonical strings match, or when both
parse as exact rationals with equal value (no floating-point epsilon).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

_MARKER_RE = re.compile(r"The final answer is\s*:?\s*", re.IGNORECASE)
_FRAC_RE = re.compile(r"\\[dt]?frac\s*\{([^{}]*)\}\s*\{([^{}]*)\}")
_INT_COMMA_RE = re.compile(r"(?<=\d),(?=\d{3}\b)")
_NUMBER_RE = re.compile(r"[-+]?(\d+(\.\d*)?|\.\d+)(/\d+)?$")


@dataclass(frozen=True)
class NormalizedAnswer:
    raw: str
    canonical: str
    numeric_value: Fraction | None


def extract_final_answer(text: str) -> str | None:
    """Return the answer after the last final-answer marker, or None.

    The last occurrence wins: sampled completions sometimes restate the
    marker, and the final statement is the authoritative one.
    """
    matches = list(_MARKER_RE.finditer(text))
    if not matches:
        return None
    answer = text[matches[-1].end() :].strip()
    # keep only the first line of whatever follows the marker
    answer = answer.splitlines()[0].strip() if answer else ""
    answer = answer.rstrip(".").strip()
    return answer or None


def _strip_boxed(s: str) -> str:
    m = re.search(r"\\boxed\s*\{", s)
    if m is None:
        return s
    start = m.end()
    depth = 1
    for i in range(start, len(s)):
        if s[i] == "{":
            depth += 1
        elif s[i] == "}":
            depth -= 1
            if depth == 0:
                return s[:m.start()] + s[start:i] + s[i + 1 :]
    return s


def _strip_outer_braces(s: str) -> str:
    while len(s) >= 2 and s[0] == "{" and s[-1] == "}":
        depth = 0
        for i, ch in enumerate(s):
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0 and i < len(s) - 1:
                    return s  # braces do not wrap the whole string
        s = s[1:-1].strip()
    return s


def canonicalize(answer: str) -> str:
    """Normalize one answer string to its canonical comparison form."""
    s = answer.strip()
    s = _strip_boxed(s)
    s = s.replace(r"\left", "").replace(r"\right", "")
    s = s.replace("$", "")
    s = _FRAC_RE.sub(lambda m: f"{m.group(1).strip()}/{m.group(2).strip()}", s)
    s = _INT_COMMA_RE.sub("", s)
    s = s.strip().rstrip(".,;:!").strip()
    s = _strip_outer_braces(s)
    s = re.sub(r"\s+", " ", s)
    return s


def _parse_rational(canonical: str) -> Fraction | None:
    s = canonical.replace(" ", "")
    if not _NUMBER_RE.match(s):
        return None
    try:
        if "/" in s:
            num, den = s.split("/")
            return Fraction(num) / Fraction(den)
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        return None


def normalize(answer: str) -> NormalizedAnswer:
    canonical = canonicalize(answer)
    return NormalizedAnswer(raw=answer, canonical=canonical, numeric_value=_parse_rational(canonical))


def answers_equivalent(candidate: str | None, gold: str) -> bool:
    """Decide whether a candidate answer matches the gold answer."""
    if not gold:
        raise ValueError("gold answer must be non-empty")
    if candidate is None:
        return False
    cand = normalize(candidate)
    ref = normalize(gold)
    if not cand.canonical or not ref.canonical:
        return False
    if cand.canonical == ref.canonical:
        return True
    if cand.numeric_value is not None and ref.numeric_value is not None:
        return cand.numeric_value == ref.numeric_value
    return False
