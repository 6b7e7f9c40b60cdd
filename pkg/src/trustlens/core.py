"""Domain types and knowledge-base management for transaction trust assessment.

An agent's knowledge base is its own transaction history: each entry carries a
quantitative feature vector, a categorical context tag, and a binary outcome.
Candidate transactions being assessed are the same type with a pending outcome.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from .errors import DimensionMismatch, DuplicateId, EmptyLog, LogFormatError


class Outcome(Enum):
    """Binary transaction rating. There is no neutral grade."""

    SUCCESSFUL = 1
    UNSUCCESSFUL = 0


@dataclass(frozen=True)
class Transaction:
    """One past or candidate interaction with a counterparty.

    ``outcome`` is ``None`` while the transaction is pending (a candidate
    under assessment); completed transactions carry a binary outcome.
    Repeat counterparties are stored as separate entries, never merged.
    """

    id: str
    counterparty: str
    context: str
    features: tuple[float, ...]
    outcome: Outcome | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "features", tuple(float(x) for x in self.features))
        if not all(math.isfinite(x) for x in self.features):
            raise ValueError(f"transaction {self.id!r} has non-finite feature values")

    @property
    def is_pending(self) -> bool:
        return self.outcome is None


@dataclass
class TransactionLog:
    """An agent's local history of completed transactions.

    Every entry shares the log's dimensionality, has a resolved outcome, and
    a unique id. Mutation is single-writer: only the owning agent appends.
    """

    owner: str
    dimensionality: int
    entries: list[Transaction] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.dimensionality < 1:
            raise ValueError("dimensionality must be >= 1")
        ids: set[str] = set()
        for t in self.entries:
            self._validate_entry(t, ids)
            ids.add(t.id)
        self._ids = ids

    def _validate_entry(self, t: Transaction, ids: set[str]) -> None:
        if t.outcome is None:
            raise ValueError(f"transaction {t.id!r} is pending; logs hold completed transactions")
        if len(t.features) != self.dimensionality:
            raise DimensionMismatch(
                f"transaction {t.id!r} has {len(t.features)} features, log expects {self.dimensionality}"
            )
        if t.id in ids:
            raise DuplicateId(f"transaction id {t.id!r} already present in log of {self.owner!r}")

    def append(self, t: Transaction) -> None:
        self._validate_entry(t, self._ids)
        self.entries.append(t)
        self._ids.add(t.id)

    def __len__(self) -> int:
        return len(self.entries)

    def class_counts(self) -> tuple[int, int]:
        """(successful, unsuccessful) entry counts."""
        n_s = sum(1 for t in self.entries if t.outcome is Outcome.SUCCESSFUL)
        return n_s, len(self.entries) - n_s


@dataclass(frozen=True)
class Prediction:
    """A classifier's call on a candidate transaction.

    ``confidence`` is 0 for a coin-flip recommendation and 1 for a fully
    decisive one. ``algorithm`` tags the producing classifier
    (LDA, DT, Combined, or Baseline-*).
    """

    label: Outcome
    confidence: float
    algorithm: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


def partition(log: TransactionLog) -> tuple[list[Transaction], list[Transaction]]:
    """Split a log into its successful and unsuccessful groups.

    Entry order is preserved within each group; every entry lands in exactly
    one group.
    """
    if not log.entries:
        raise EmptyLog(f"log of {log.owner!r} has no entries to partition")
    successful = [t for t in log.entries if t.outcome is Outcome.SUCCESSFUL]
    unsuccessful = [t for t in log.entries if t.outcome is Outcome.UNSUCCESSFUL]
    return successful, unsuccessful


def filter_by_context(log: TransactionLog, context: str) -> TransactionLog:
    """Sub-log of entries whose context tag matches exactly.

    Owner and dimensionality are preserved; the result may be empty.
    """
    kept = [t for t in log.entries if t.context == context]
    return TransactionLog(owner=log.owner, dimensionality=log.dimensionality, entries=kept)


# CSV log format: header `id,counterparty,context,outcome,f1,...,fd`,
# outcome in {1,0} (1 = successful), d inferred from the feature columns.

_FIXED_COLUMNS = ("id", "counterparty", "context", "outcome")


def read_log_csv(path: str | Path, owner: str = "local") -> TransactionLog:
    """Load a transaction log from its CSV representation."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LogFormatError("missing header row", row=1) from None
        d = _check_header(header)
        entries: list[Transaction] = []
        ids: set[str] = set()
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4 + d:
                raise LogFormatError(
                    f"expected {4 + d} fields, found {len(row)}", row=row_no
                )
            tid, counterparty, context, outcome_text = row[:4]
            if outcome_text == "1":
                outcome = Outcome.SUCCESSFUL
            elif outcome_text == "0":
                outcome = Outcome.UNSUCCESSFUL
            else:
                raise LogFormatError(
                    f"outcome must be 1 or 0, found {outcome_text!r}",
                    row=row_no,
                    column="outcome",
                )
            features = []
            for i, cell in enumerate(row[4:], start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise LogFormatError(
                        f"feature value {cell!r} is not a number",
                        row=row_no,
                        column=f"f{i}",
                    ) from None
                if not math.isfinite(value):
                    raise LogFormatError(
                        f"feature value {cell!r} is not finite", row=row_no, column=f"f{i}"
                    )
                features.append(value)
            if tid in ids:
                raise LogFormatError(f"duplicate transaction id {tid!r}", row=row_no, column="id")
            ids.add(tid)
            entries.append(Transaction(tid, counterparty, context, tuple(features), outcome))
    return TransactionLog(owner=owner, dimensionality=d, entries=entries)


def _check_header(header: list[str]) -> int:
    names = [h.strip() for h in header]
    if tuple(names[:4]) != _FIXED_COLUMNS:
        raise LogFormatError(
            f"header must start with {','.join(_FIXED_COLUMNS)}", row=1
        )
    feature_names = names[4:]
    if not feature_names:
        raise LogFormatError("header declares no feature columns", row=1)
    for i, name in enumerate(feature_names, start=1):
        if name != f"f{i}":
            raise LogFormatError(
                f"feature columns must be f1..fd in order, found {name!r}",
                row=1,
                column=name,
            )
    return len(feature_names)


def write_log_csv(log: TransactionLog, path: str | Path) -> None:
    """Write a log in the CSV format read back by :func:`read_log_csv`."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(_FIXED_COLUMNS) + [f"f{i}" for i in range(1, log.dimensionality + 1)])
        for t in log.entries:
            outcome = "1" if t.outcome is Outcome.SUCCESSFUL else "0"
            writer.writerow([t.id, t.counterparty, t.context, outcome] + [repr(x) for x in t.features])
