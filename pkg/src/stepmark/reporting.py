"""Human-readable cost tables and count formatting."""

from __future__ import annotations

from .search import CostLedger

COLUMN_TITLES = ("Algorithm", "Verified steps", "Sampled number", "Generated tokens")


def humanize_count(n: int) -> str:
    """Format a count the way the cost tables do: 4204, 70.40K, 27.30M."""
    if n < 10_000:
        return str(n)
    if n < 1_000_000:
        return f"{n / 1_000:.2f}K"
    return f"{n / 1_000_000:.2f}M"


def format_ledger(ledger: CostLedger) -> str:
    """One-line ledger rendering: verified / sampled / tokens."""
    return (
        f"{humanize_count(ledger.verified_steps)} / "
        f"{humanize_count(ledger.sampled_rollouts)} / "
        f"{humanize_count(ledger.generated_tokens)}"
    )


def _delta(value: int, base: int) -> str:
    if base == 0:
        return "n/a"
    return f"{(value - base) / base * 100.0:+.2f}%".replace("+-", "-")


def format_deltas(ledger: CostLedger, base: CostLedger) -> str:
    """Percentage change of each ledger column against a baseline ledger."""
    return (
        f"{_delta(ledger.verified_steps, base.verified_steps)} / "
        f"{_delta(ledger.sampled_rollouts, base.sampled_rollouts)} / "
        f"{_delta(ledger.generated_tokens, base.generated_tokens)}"
    )


def cost_table(ledgers: dict[str, CostLedger], baseline: str = "sequential") -> str:
    """Aligned comparison table; deltas are shown against the baseline row
    when it is present and more than one algorithm was run."""
    base = ledgers.get(baseline) if len(ledgers) > 1 else None

    def cell(value: int, base_value: int | None) -> str:
        text = humanize_count(value)
        if base_value is not None and base_value != value:
            text += f"({_delta(value, base_value)})"
        return text

    rows = [COLUMN_TITLES]
    for name, ledger in ledgers.items():
        against = base if name != baseline else None
        rows.append(
            (
                name,
                cell(ledger.verified_steps, against.verified_steps if against else None),
                cell(ledger.sampled_rollouts, against.sampled_rollouts if against else None),
                cell(ledger.generated_tokens, against.generated_tokens if against else None),
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(COLUMN_TITLES))]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(col.ljust(widths[i]) for i, col in enumerate(row)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
