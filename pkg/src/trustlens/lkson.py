"""Knowledge-sharing overlay: a weighted directed trust graph over which
agents exchange trained-model tuples (direction plus group centroids) instead
of raw histories or feedbacks.

Requesters combine collected tuples weighted by provider trust, classify with
the combined model, and afterwards adjust each provider's trust with a
beta-mean update driven by how the provider's knowledge alone would have
predicted the realized outcome.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import lda
from .core import Outcome, Prediction
from .errors import (
    CancelledDirection,
    DegenerateModel,
    DimensionMismatch,
    EmptyTupleSet,
    UndefinedConfidence,
)

MIN_DIRECTION_NORM = 1e-9


@dataclass(frozen=True)
class KnowledgeTuple:
    """The shareable summary of a provider's trained model.

    Carries no raw transactions: only the unit projection direction and the
    two group centroids, plus the context the model was trained in.
    """

    provider: str
    context: str
    direction: tuple[float, ...]
    centroid_successful: tuple[float, ...]
    centroid_unsuccessful: tuple[float, ...]

    def __post_init__(self) -> None:
        d = len(self.direction)
        if len(self.centroid_successful) != d or len(self.centroid_unsuccessful) != d:
            raise DimensionMismatch("tuple fields disagree on dimensionality")


@dataclass(frozen=True)
class ProviderList:
    """An agent's ordered list of (provider id, trust score) pairs."""

    owner: str
    entries: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        ids = [p for p, _ in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError("provider ids must be unique")

    def provider_ids(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.entries)


@dataclass
class TrustEdge:
    """Per-edge counters of correct/incorrect predictions by a provider."""

    successes: int = 0
    failures: int = 0

    @property
    def trust(self) -> float:
        # beta-mean of the counters; 0.5 for a fresh edge
        return (self.successes + 1) / (self.successes + self.failures + 2)


def update_trust(edge: TrustEdge, correct: bool) -> float:
    """Record one prediction result on an edge and return the new trust.

    A correct prediction moves trust to (s+2)/(s+u+3), an incorrect one to
    (s+1)/(s+u+3); the counters persist so trust always equals the beta mean
    of the accumulated evidence.
    """
    if correct:
        edge.successes += 1
    else:
        edge.failures += 1
    return edge.trust


def share_knowledge(provider: str, model: lda.LdaModel, context: str) -> KnowledgeTuple:
    """Project a trained model into its shareable tuple."""
    if np.array_equal(model.centroid_successful, model.centroid_unsuccessful):
        raise DegenerateModel("model centroids coincide; nothing useful to share")
    return KnowledgeTuple(
        provider=provider,
        context=context,
        direction=tuple(float(x) for x in model.direction),
        centroid_successful=tuple(float(x) for x in model.centroid_successful),
        centroid_unsuccessful=tuple(float(x) for x in model.centroid_unsuccessful),
    )


def combine(
    tuples: Sequence[KnowledgeTuple], scores: Sequence[float]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Trust-weighted combination of collected tuples.

    Weights are the trust scores normalized to sum to 1; the combined
    direction is re-normalized to unit length so confidences stay comparable
    with locally trained models.
    """
    if not tuples:
        raise EmptyTupleSet("no knowledge tuples to combine")
    if len(scores) != len(tuples):
        raise ValueError("one trust score per tuple is required")
    if any(s <= 0.0 for s in scores):
        raise ValueError("trust scores must be positive")
    d = len(tuples[0].direction)
    context = tuples[0].context
    for t in tuples:
        if len(t.direction) != d:
            raise DimensionMismatch("tuples disagree on dimensionality")
        if t.context != context:
            raise ValueError(f"tuples mix contexts {context!r} and {t.context!r}")

    weights = np.asarray(scores, dtype=float)
    weights = weights / weights.sum()
    directions = np.asarray([t.direction for t in tuples], dtype=float)
    combined = weights @ directions
    norm = np.linalg.norm(combined)
    if norm < MIN_DIRECTION_NORM:
        raise CancelledDirection("weighted directions annihilate each other")
    direction = combined / norm
    centroid_s = weights @ np.asarray([t.centroid_successful for t in tuples], dtype=float)
    centroid_u = weights @ np.asarray([t.centroid_unsuccessful for t in tuples], dtype=float)
    return direction, centroid_s, centroid_u


def classify_with_combined(
    combined: tuple[np.ndarray, np.ndarray, np.ndarray], p: Sequence[float]
) -> Prediction:
    """Classify a candidate with combined knowledge.

    Same decision rule and confidence as a locally trained discriminant,
    applied to the combined direction and centroids.
    """
    direction, centroid_s, centroid_u = (np.asarray(x, dtype=float) for x in combined)
    dist_s, dist_u, label = lda.decide(direction, centroid_s, centroid_u, p)
    try:
        confidence = lda.confidence_lda(dist_s, dist_u)
    except UndefinedConfidence:
        confidence = 0.0
    return Prediction(label, confidence, "Combined")


def solo_prediction(knowledge: KnowledgeTuple, p: Sequence[float]) -> Outcome:
    """Label a point using one provider's knowledge alone."""
    _, _, label = lda.decide(
        np.asarray(knowledge.direction, dtype=float),
        np.asarray(knowledge.centroid_successful, dtype=float),
        np.asarray(knowledge.centroid_unsuccessful, dtype=float),
        p,
    )
    return label


EVALUATED_FRACTION_DENOM = 5  # evaluate 1/5 of providers after a success


class OverlayGraph:
    """The overlay network: trust edges, provider lists, and tuple exchange.

    ``supplier`` is the requester-side hook for fetching a provider's current
    tuple: ``supplier(provider_id, context) -> KnowledgeTuple | None`` (None
    when that provider cannot train a model right now). Edge mutation is
    single-writer per requester; tuple requests are read-only.
    """

    def __init__(
        self,
        supplier: Callable[[str, str], KnowledgeTuple | None] | None = None,
        fanout: int | None = None,
    ):
        self.supplier = supplier
        self.fanout = fanout
        self._edges: dict[tuple[str, str], TrustEdge] = {}
        self._provider_lists: dict[str, ProviderList] = {}

    def edge(self, requester: str, provider: str) -> TrustEdge:
        if requester == provider:
            raise ValueError("the overlay has no self-edges")
        key = (requester, provider)
        found = self._edges.get(key)
        if found is None:
            found = self._edges[key] = TrustEdge()
        return found

    def trust(self, requester: str, provider: str) -> float:
        return self.edge(requester, provider).trust

    def record_result(self, requester: str, provider: str, correct: bool) -> float:
        return update_trust(self.edge(requester, provider), correct)

    def register_providers(self, provider_list: ProviderList) -> None:
        self._provider_lists[provider_list.owner] = provider_list
        for provider, _ in provider_list.entries:
            self.edge(provider_list.owner, provider)

    def provider_list(self, agent: str) -> ProviderList | None:
        return self._provider_lists.get(agent)

    def combined_assessment(
        self, requester: str, context: str, p: Sequence[float]
    ) -> tuple[Prediction, tuple[KnowledgeTuple, ...]]:
        """Gather tuples from the requester's providers and classify.

        Raises EmptyTupleSet when the requester has no provider list, no
        supplier is configured, or no provider can answer.
        """
        if self.supplier is None:
            raise EmptyTupleSet("overlay has no tuple supplier configured")
        provider_list = self._provider_lists.get(requester)
        if provider_list is None or not provider_list.entries:
            raise EmptyTupleSet(f"agent {requester!r} has no knowledge providers")
        provider_ids = provider_list.provider_ids()
        if self.fanout is not None:
            provider_ids = provider_ids[: self.fanout]

        tuples: list[KnowledgeTuple] = []
        scores: list[float] = []
        for provider in provider_ids:
            knowledge = self.supplier(provider, context)
            if knowledge is None:
                continue
            tuples.append(knowledge)
            scores.append(self.trust(requester, provider))
        if not tuples:
            raise EmptyTupleSet(f"no provider of {requester!r} could answer in context {context!r}")
        combined = combine(tuples, scores)
        return classify_with_combined(combined, p), tuple(tuples)


def post_transaction_update(
    graph: OverlayGraph,
    requester: str,
    providers: Sequence[KnowledgeTuple],
    outcome: Outcome,
    p: Sequence[float],
    rng: np.random.Generator,
) -> None:
    """Adjust provider trust after an overlay-assisted transaction completes.

    An unsuccessful outcome re-evaluates every provider's solo prediction; a
    successful one samples a fifth of them (at least one) to keep overheads
    low while still adapting the weights.
    """
    if not providers:
        return
    if outcome is Outcome.UNSUCCESSFUL:
        evaluated: Sequence[KnowledgeTuple] = providers
    else:
        k = max(1, len(providers) // EVALUATED_FRACTION_DENOM)
        indices = sorted(rng.choice(len(providers), size=k, replace=False).tolist())
        evaluated = [providers[i] for i in indices]
    for knowledge in evaluated:
        predicted = solo_prediction(knowledge, p)
        graph.record_result(requester, knowledge.provider, correct=(predicted is outcome))


def bootstrap_providers(
    agent: str,
    population: Mapping[str, Iterable[str]],
    k: int,
    rng: np.random.Generator,
    context: str | None = None,
) -> ProviderList:
    """Build an initial provider list, preferring context-familiar agents.

    ``population`` maps agent ids to the contexts they hold knowledge for.
    Familiar agents (sharing the requested context) are drawn first; the
    remainder fills up uniformly at random. Everyone starts at trust 0.5.
    """
    candidates = [a for a in population if a != agent]
    size = min(k, len(candidates))
    if size <= 0:
        return ProviderList(owner=agent, entries=())
    if context is not None:
        familiar = [a for a in candidates if context in population[a]]
        unfamiliar = [a for a in candidates if context not in population[a]]
    else:
        familiar, unfamiliar = [], candidates

    chosen: list[str]
    if len(familiar) >= size:
        idx = rng.choice(len(familiar), size=size, replace=False)
        chosen = [familiar[i] for i in sorted(idx.tolist())]
    else:
        chosen = list(familiar)
        fill = size - len(familiar)
        if fill and unfamiliar:
            idx = rng.choice(len(unfamiliar), size=fill, replace=False)
            chosen.extend(unfamiliar[i] for i in sorted(idx.tolist()))
    return ProviderList(owner=agent, entries=tuple((a, 0.5) for a in chosen))


# Wire codec: one self-describing CSV record per tuple,
# `provider,context,d,v_1..v_d,cs_1..cs_d,cu_1..cu_d`, floats written with
# shortest round-trip precision.


def encode_tuple(knowledge: KnowledgeTuple) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="")
    d = len(knowledge.direction)
    writer.writerow(
        [knowledge.provider, knowledge.context, d]
        + [repr(x) for x in knowledge.direction]
        + [repr(x) for x in knowledge.centroid_successful]
        + [repr(x) for x in knowledge.centroid_unsuccessful]
    )
    return buf.getvalue()


def decode_tuple(line: str) -> KnowledgeTuple:
    row = next(csv.reader([line]))
    if len(row) < 3:
        raise ValueError("tuple record needs at least provider, context, d")
    provider, context, d_text = row[0], row[1], row[2]
    d = int(d_text)
    if len(row) != 3 + 3 * d:
        raise ValueError(f"tuple record for d={d} must have {3 + 3 * d} fields, found {len(row)}")
    values = [float(x) for x in row[3:]]
    return KnowledgeTuple(
        provider=provider,
        context=context,
        direction=tuple(values[:d]),
        centroid_successful=tuple(values[d : 2 * d]),
        centroid_unsuccessful=tuple(values[2 * d :]),
    )


def write_tuples(tuples: Iterable[KnowledgeTuple], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        for knowledge in tuples:
            fh.write(encode_tuple(knowledge) + "\n")


def read_tuples(path: str | Path) -> list[KnowledgeTuple]:
    out = []
    with Path(path).open(newline="") as fh:
        for line in fh:
            line = line.strip("\n")
            if line:
                out.append(decode_tuple(line))
    return out
