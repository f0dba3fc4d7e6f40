"""Density clustering over evasion-signal presence vectors.

Samples that dodge forcing entirely (return-first patterns) still carry
the signal APIs in their source; clustering their presence vectors next
to confirmed evasive samples surfaces them for review. Vectors cover the
root scripts only: injected children rarely carry a second evasion layer
and their availability depends on the run.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Optional

from .frontend import AstNode
from .taxonomy import CATEGORIES, TAXONOMY_SIZE, collect_terms, signals_match

NOISE = -1


@dataclass(frozen=True)
class FeatureVector:
    sample_id: str
    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != TAXONOMY_SIZE:
            raise ValueError("expected %d bits, got %d"
                             % (TAXONOMY_SIZE, len(self.bits)))
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0/1")

    def mask(self) -> int:
        value = 0
        for i, bit in enumerate(self.bits):
            if bit:
                value |= 1 << i
        return value


@dataclass(frozen=True)
class ClusterAssignment:
    sample_id: str
    label: int                       # cluster id, or NOISE
    is_core: bool


def build_feature_vector(sample_id: str, root_programs: Iterable[AstNode],
                         signal_sets: Optional[dict] = None,
                         mode: Optional[str] = None) -> FeatureVector:
    """One bit per category: any signal term anywhere in the root ASTs.

    With a mode given, categories that do not apply to that environment
    stay 0 (an npm-only signal like a bare `window` check is ambient noise
    in browser code, not a feature).
    """
    terms: set[str] = set()
    for program in root_programs:
        terms |= collect_terms(program)
    bits = []
    for category in CATEGORIES:
        if mode == "browser" and not category.browser:
            bits.append(0)
            continue
        if mode == "npm" and not category.npm:
            bits.append(0)
            continue
        signals: tuple[str, ...] = category.signals
        if signal_sets is not None and category.name in signal_sets:
            signals = tuple(signal_sets[category.name])
        bits.append(1 if signals_match(terms, signals) else 0)
    return FeatureVector(sample_id, tuple(bits))


def distance(a: FeatureVector, b: FeatureVector, metric: str = "jaccard") -> float:
    return _mask_distance(a.mask(), b.mask(), metric, len(a.bits))


def _mask_distance(a: int, b: int, metric: str, width: int) -> float:
    if metric == "jaccard":
        union = (a | b).bit_count()
        if union == 0:
            return 0.0               # two empty vectors are identical
        return 1.0 - (a & b).bit_count() / union
    if metric == "hamming":
        return (a ^ b).bit_count() / width
    raise ValueError("Unknown metric %r" % metric)


def dbscan(points: list[FeatureVector], eps: float = 0.3, min_pts: int = 2,
           metric: str = "jaccard") -> list[ClusterAssignment]:
    """Plain DBSCAN; deterministic under input permutation.

    Points are visited in ascending sample id. A point is core when at
    least min_pts points (itself included) lie within eps. Border points
    join the earliest-seeded adjacent cluster. Assignments come back in
    the input's order.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must be within [0, 1], got %r" % eps)
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1, got %r" % min_pts)
    order = sorted(range(len(points)), key=lambda i: points[i].sample_id)
    masks = [points[i].mask() for i in order]
    width = TAXONOMY_SIZE
    n = len(order)

    neighbors = [
        [j for j in range(n) if _mask_distance(masks[i], masks[j], metric, width) <= eps]
        for i in range(n)
    ]
    core = [len(neighbors[i]) >= min_pts for i in range(n)]

    labels: list[Optional[int]] = [None] * n
    next_label = 0
    for i in range(n):
        if labels[i] is not None or not core[i]:
            continue
        labels[i] = next_label
        queue = list(neighbors[i])
        at = 0
        while at < len(queue):
            j = queue[at]
            at += 1
            if labels[j] is not None:
                continue
            labels[j] = next_label
            if core[j]:
                queue.extend(neighbors[j])
        next_label += 1

    out: list[Optional[ClusterAssignment]] = [None] * len(points)
    for rank, original in enumerate(order):
        label = labels[rank] if labels[rank] is not None else NOISE
        out[original] = ClusterAssignment(points[original].sample_id,
                                          label, core[rank])
    return out  # type: ignore[return-value]


def expand_flags(assignments: Iterable[ClusterAssignment],
                 seed_flagged: set[str]) -> set[str]:
    """Non-noise co-cluster members of the seeds, the seeds excluded."""
    assignments = list(assignments)
    seed_labels = {a.label for a in assignments
                   if a.sample_id in seed_flagged and a.label != NOISE}
    return {a.sample_id for a in assignments
            if a.label in seed_labels and a.sample_id not in seed_flagged}


# -- JSONL interchange -----------------------------------------------------------


def write_vectors(vectors: Iterable[FeatureVector], sink: IO[str]) -> None:
    for vec in vectors:
        sink.write(json.dumps({"id": vec.sample_id, "bits": list(vec.bits)},
                              separators=(",", ":")) + "\n")


def read_vectors(source: IO[str]) -> list[FeatureVector]:
    out = []
    for line in source:
        line = line.strip()
        if not line:
            continue
        doc = json.loads(line)
        out.append(FeatureVector(doc["id"], tuple(int(b) for b in doc["bits"])))
    return out


def write_assignments(assignments: Iterable[ClusterAssignment],
                      sink: IO[str]) -> None:
    for a in assignments:
        sink.write(json.dumps(
            {"id": a.sample_id, "label": a.label, "core": a.is_core},
            separators=(",", ":")) + "\n")
