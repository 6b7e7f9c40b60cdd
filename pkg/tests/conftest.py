"""Shared helpers for building small transaction logs in tests."""

from __future__ import annotations

from typing import Iterable, Sequence

from trustlens.core import Outcome, Transaction, TransactionLog


def make_log(
    successful: Iterable[Sequence[float]],
    unsuccessful: Iterable[Sequence[float]],
    context: str = "c",
    owner: str = "me",
) -> TransactionLog:
    successful = [tuple(p) for p in successful]
    unsuccessful = [tuple(p) for p in unsuccessful]
    d = len((successful + unsuccessful)[0]) if (successful or unsuccessful) else 1
    log = TransactionLog(owner=owner, dimensionality=d)
    i = 0
    for features in successful:
        log.append(Transaction(f"s{i}", f"p{i}", context, features, Outcome.SUCCESSFUL))
        i += 1
    for features in unsuccessful:
        log.append(Transaction(f"u{i}", f"p{i}", context, features, Outcome.UNSUCCESSFUL))
        i += 1
    return log
