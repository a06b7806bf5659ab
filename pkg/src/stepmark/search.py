"""First-error localization over a known-incorrect solution.

Three interchangeable strategies probe prefixes of the solution and
compare the prefix's Monte Carlo estimate against a threshold derived
from the bare-question baseline:

* sequential: probe prefixes 1, 2, ... until one fails;
* binary: standard bisection over [0, T-1];
* adaptive: bisection whose first probe is shifted by question
  difficulty (earlier for hard questions, later for easy ones).

Every probe's cost (sampled rollouts, generated tokens) is tallied in a
ledger; the probe at prefix 0 reuses the cached baseline and costs
nothing.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Protocol

from .estimator import DEFAULT_ALPHA, Difficulty, McEstimate, difficulty

ALGORITHMS = ("sequential", "binary", "adaptive")


@dataclass(frozen=True)
class CostLedger:
    """Annotation expense: probes that sampled, rollouts drawn, tokens generated."""

    verified_steps: int = 0
    sampled_rollouts: int = 0
    generated_tokens: int = 0

    def __add__(self, other: "CostLedger") -> "CostLedger":
        return CostLedger(
            self.verified_steps + other.verified_steps,
            self.sampled_rollouts + other.sampled_rollouts,
            self.generated_tokens + other.generated_tokens,
        )


def merge_ledgers(ledgers: list[CostLedger]) -> CostLedger:
    """Componentwise sum; the empty list merges to the zero ledger."""
    total = CostLedger()
    for ledger in ledgers:
        total = total + ledger
    return total


@dataclass(frozen=True)
class SearchTrace:
    """Record of one search run: probes in order, verdict, and its cost."""

    algorithm: str
    probes: tuple[tuple[int, float], ...]
    result_index: int
    ledger: CostLedger

    def __post_init__(self):
        object.__setattr__(self, "probes", tuple(tuple(p) for p in self.probes))
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


class StateOracle(Protocol):
    """Supplies Monte Carlo estimates for prefixes of one solution.

    ``baseline`` is the (already computed) estimate at prefix 0; calling
    ``estimate(m)`` samples fresh rollouts for the prefix of length m.
    """

    baseline: McEstimate

    def estimate(self, prefix_len: int) -> McEstimate: ...


def initial_mid(left: int, right: int, length: int, d: Difficulty) -> int:
    """Difficulty-shifted first bisection point, clamped into [left, right].

    Hard questions (d < 2) shift a quarter of the solution earlier, easy
    ones (d >= 6) a quarter later; mid-range difficulty keeps the plain
    midpoint.
    """
    if left > right:
        raise ValueError(f"empty interval: left={left} right={right}")
    mid = (left + right) // 2
    if d.d < 2:
        mid -= length // 4
    elif d.d >= 6:
        mid += length // 4
    return max(left, min(right, mid))


@dataclass
class _ProbeSession:
    """Shared probing machinery: caches the baseline, accrues the ledger."""

    oracle: StateOracle
    probes: list[tuple[int, float]] = field(default_factory=list)
    ledger: CostLedger = field(default_factory=CostLedger)

    def probe(self, prefix_len: int) -> float:
        if prefix_len == 0:
            est = self.oracle.baseline
        else:
            est = self.oracle.estimate(prefix_len)
            self.ledger = self.ledger + CostLedger(
                verified_steps=1,
                sampled_rollouts=est.total_rollouts,
                generated_tokens=est.total_generated_tokens,
            )
        self.probes.append((prefix_len, est.value))
        return est.value


def _check_preconditions(num_steps: int, oracle: StateOracle, alpha: float) -> float:
    if num_steps < 1:
        raise ValueError("solution must contain at least one step")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    baseline = oracle.baseline.value
    if baseline <= 0.0:
        raise ValueError("search requires a positive baseline estimate")
    return alpha * baseline


def _bisect(num_steps: int, oracle: StateOracle, alpha: float, adaptive: bool) -> SearchTrace:
    threshold = _check_preconditions(num_steps, oracle, alpha)
    session = _ProbeSession(oracle)
    left, right = 0, num_steps - 1
    first = True
    while left <= right:
        if adaptive and first and num_steps >= 4:
            mid = initial_mid(left, right, num_steps, difficulty(oracle.baseline))
        else:
            mid = (left + right) // 2
        first = False
        if session.probe(mid) <= threshold:
            right = mid - 1
        else:
            left = mid + 1
    return SearchTrace(
        algorithm="adaptive" if adaptive else "binary",
        probes=tuple(session.probes),
        result_index=left,
        ledger=session.ledger,
    )


def find_first_error_adaptive(num_steps: int, oracle: StateOracle, alpha: float = DEFAULT_ALPHA) -> SearchTrace:
    """Difficulty-guided bisection; returns the 1-based first-error index.

    An index of ``num_steps`` means every interior prefix passed and the
    final step carries the error (the solution's answer is known wrong).
    """
    return _bisect(num_steps, oracle, alpha, adaptive=True)


def find_first_error_binary(num_steps: int, oracle: StateOracle, alpha: float = DEFAULT_ALPHA) -> SearchTrace:
    """Plain bisection baseline; same contract as the adaptive variant."""
    return _bisect(num_steps, oracle, alpha, adaptive=False)


def find_first_error_sequential(num_steps: int, oracle: StateOracle, alpha: float = DEFAULT_ALPHA) -> SearchTrace:
    """Probe prefixes 1, 2, ... in order; stop at the first failing one."""
    threshold = _check_preconditions(num_steps, oracle, alpha)
    session = _ProbeSession(oracle)
    result = num_steps
    for m in range(1, num_steps):
        if session.probe(m) <= threshold:
            result = m
            break
    return SearchTrace(
        algorithm="sequential",
        probes=tuple(session.probes),
        result_index=result,
        ledger=session.ledger,
    )


def find_first_error(algorithm: str, num_steps: int, oracle: StateOracle, alpha: float = DEFAULT_ALPHA) -> SearchTrace:
    """Dispatch on algorithm name."""
    finders = {
        "sequential": find_first_error_sequential,
        "binary": find_first_error_binary,
        "adaptive": find_first_error_adaptive,
    }
    try:
        finder = finders[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}") from None
    return finder(num_steps, oracle, alpha)


def ledger_as_dict(ledger: CostLedger) -> dict:
    return dataclasses.asdict(ledger)
