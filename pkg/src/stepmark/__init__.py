"""Step-level annotation of chain-of-thought math solutions.

Labels intermediate reasoning steps by perplexity-weighted Monte Carlo
estimation, locates each erroneous solution's first bad step with an
adaptive binary search, and accounts for the sampling cost of doing so.
"""

from .estimator import (
    Contribution,
    Difficulty,
    McEstimate,
    Rollout,
    RolloutBatch,
    contribution,
    difficulty,
    mc_ppl,
    rollout_ppl,
)
from .search import (
    CostLedger,
    SearchTrace,
    find_first_error,
    find_first_error_adaptive,
    find_first_error_binary,
    find_first_error_sequential,
    initial_mid,
    merge_ledgers,
)

__version__ = "0.1.0"

__all__ = [
    "Contribution",
    "CostLedger",
    "Difficulty",
    "McEstimate",
    "Rollout",
    "RolloutBatch",
    "SearchTrace",
    "contribution",
    "difficulty",
    "find_first_error",
    "find_first_error_adaptive",
    "find_first_error_binary",
    "find_first_error_sequential",
    "initial_mid",
    "mc_ppl",
    "merge_ledgers",
    "rollout_ppl",
]
