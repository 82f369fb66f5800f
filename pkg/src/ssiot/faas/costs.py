"""Per-invocation cost metering with exact decimal arithmetic.

Pricing mirrors the pay-per-invocation model: a flat request charge plus a
GB-seconds duration charge. One million requests cost $0.20; a second at the
3 GB memory ceiling costs $5.00e-5.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable

REQUEST_RATE_USD = Decimal("2.0E-7")
GBS_RATE_USD = Decimal("1.66667E-5")

# Smallest billable unit, charged for keep-alive / no-op invocations.
NOOP_BILLED_SECONDS = Decimal("0.1")


def invocation_cost(billed_gbs: Decimal | float | str) -> Decimal:
    """Exact cost in USD of one invocation billing ``billed_gbs`` GB-seconds."""
    gbs = Decimal(str(billed_gbs))
    if gbs < 0:
        raise ValueError("billed GB-seconds must be nonnegative")
    return REQUEST_RATE_USD + GBS_RATE_USD * gbs


def requests_per_dollar(billed_gbs: Decimal | float | str) -> int:
    """How many invocations at this billing one dollar buys (floored)."""
    return int(Decimal(1) / invocation_cost(billed_gbs))


def noop_billed_gbs(memory_gb: float) -> Decimal:
    return NOOP_BILLED_SECONDS * Decimal(str(memory_gb))


@dataclass(frozen=True)
class LedgerEntry:
    invocation_id: str
    billed_gbs: Decimal
    cost_usd: Decimal


@dataclass
class CostMeter:
    """Append-only invocation ledger; rates are immutable per run."""

    request_rate_usd: Decimal = REQUEST_RATE_USD
    gbs_rate_usd: Decimal = GBS_RATE_USD
    ledger: list[LedgerEntry] = field(default_factory=list)

    def charge(self, invocation_id: str, billed_gbs: Decimal | float | str) -> LedgerEntry:
        gbs = Decimal(str(billed_gbs))
        if gbs < 0:
            raise ValueError("billed GB-seconds must be nonnegative")
        entry = LedgerEntry(
            invocation_id=invocation_id,
            billed_gbs=gbs,
            cost_usd=self.request_rate_usd + self.gbs_rate_usd * gbs,
        )
        self.ledger.append(entry)
        return entry

    def total_usd(self) -> Decimal:
        return sum((entry.cost_usd for entry in self.ledger), Decimal(0))

    def total_gbs(self) -> Decimal:
        return sum((entry.billed_gbs for entry in self.ledger), Decimal(0))

    def __len__(self) -> int:
        return len(self.ledger)


def recompute_total(entries: Iterable[LedgerEntry]) -> Decimal:
    """Independent re-computation of a ledger total from first principles."""
    total = Decimal(0)
    for entry in entries:
        total += REQUEST_RATE_USD + GBS_RATE_USD * entry.billed_gbs
    return total
