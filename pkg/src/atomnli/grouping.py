"""Semantic grouping of critical atoms and the inferential-consistency metric.

Two critical atoms are equivalent when their embeddings are cosine-similar
above a threshold AND each entails the other; equivalence groups are the
maximal cliques of that graph. Examples are bucketed by the clique of
their critical atoms, splitting an example's unit weight evenly across its
critical atoms, and a model's inferential consistency is the probability
that two examples drawn from one bucket are both predicted correctly or
both incorrectly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .backends import EntailmentBackend
from .core import Atom, NliLabel
from .defeasible import CriticalAtomSet
from .errors import IntegrityError, ValidationError

DEFAULT_SIMILARITY_THRESHOLD = 0.75


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1 or u.size == 0:
        raise ValidationError("cosine needs two vectors of equal nonzero dimension")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValidationError("cosine is undefined for zero-norm vectors")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


@dataclass(frozen=True)
class SimilarityGraph:
    """Simple undirected graph over critical atom ids."""

    nodes: Tuple[str, ...]
    edges: FrozenSet[Tuple[str, str]]
    threshold: float

    def __post_init__(self):
        known = set(self.nodes)
        for u, v in self.edges:
            if u == v:
                raise IntegrityError(f"self-loop on {u}")
            if (u, v) != tuple(sorted((u, v))):
                raise IntegrityError(f"edge {u},{v} is not stored in sorted order")
            if u not in known or v not in known:
                raise IntegrityError(f"edge {u},{v} references unknown node")

    def neighbors(self) -> Dict[str, Set[str]]:
        adjacency: Dict[str, Set[str]] = {node: set() for node in self.nodes}
        for u, v in self.edges:
            adjacency[u].add(v)
            adjacency[v].add(u)
        return adjacency

    def to_record(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": sorted(list(edge) for edge in self.edges),
            "threshold": self.threshold,
        }

    @classmethod
    def from_record(cls, record: dict) -> "SimilarityGraph":
        return cls(
            nodes=tuple(record["nodes"]),
            edges=frozenset(tuple(edge) for edge in record["edges"]),
            threshold=record["threshold"],
        )


def build_graph(
    atoms: Sequence[Atom],
    embeddings: Mapping[str, np.ndarray],
    threshold: float,
    nli: EntailmentBackend,
) -> SimilarityGraph:
    """Connect atom pairs that pass the similarity cutoff and are entailed
    in both directions. Entailment checks are only issued for pairs that
    already passed the cutoff, keeping classifier cost linear in the
    number of similar pairs."""
    missing = sorted(a.atom_id for a in atoms if a.atom_id not in embeddings)
    if missing:
        raise IntegrityError("no embedding for atoms: " + ", ".join(missing))
    ordered = sorted(atoms, key=lambda a: a.atom_id)
    edges = set()
    for i, left in enumerate(ordered):
        for right in ordered[i + 1 :]:
            similarity = cosine(embeddings[left.atom_id], embeddings[right.atom_id])
            if similarity < threshold:
                continue
            if (
                nli.classify(left.text, right.text) == NliLabel.ENTAILMENT
                and nli.classify(right.text, left.text) == NliLabel.ENTAILMENT
            ):
                edges.add((left.atom_id, right.atom_id))
    return SimilarityGraph(
        nodes=tuple(a.atom_id for a in ordered),
        edges=frozenset(edges),
        threshold=threshold,
    )


def maximal_cliques(graph: SimilarityGraph) -> List[FrozenSet[str]]:
    """All maximal cliques via pivoting Bron-Kerbosch, returned in
    deterministic lexicographic order of their sorted members."""
    adjacency = graph.neighbors()
    cliques: List[FrozenSet[str]] = []

    def expand(r: Set[str], p: Set[str], x: Set[str]) -> None:
        if not p and not x:
            cliques.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda node: (len(adjacency[node] & p), node))
        for node in sorted(p - adjacency[pivot]):
            expand(r | {node}, p & adjacency[node], x & adjacency[node])
            p.remove(node)
            x.add(node)

    expand(set(), set(graph.nodes), set())
    return sorted(cliques, key=lambda clique: sorted(clique))


@dataclass(frozen=True)
class CriticalAtomBucket:
    """One equivalence clique plus the examples it carries.

    ``member_examples`` holds (example_id, weight) pairs; an example with
    k critical atoms contributes 1/k per critical atom, so its weights
    across all buckets sum to one.
    """

    bucket_id: str
    member_atom_ids: FrozenSet[str]
    member_examples: Tuple[Tuple[str, float], ...]

    @property
    def weight_total(self) -> float:
        return sum(weight for _, weight in self.member_examples)

    def to_record(self) -> dict:
        return {
            "bucket_id": self.bucket_id,
            "member_atom_ids": sorted(self.member_atom_ids),
            "member_examples": [[eid, weight] for eid, weight in self.member_examples],
        }

    @classmethod
    def from_record(cls, record: dict) -> "CriticalAtomBucket":
        return cls(
            bucket_id=record["bucket_id"],
            member_atom_ids=frozenset(record["member_atom_ids"]),
            member_examples=tuple((e, w) for e, w in record["member_examples"]),
        )


def assign_atoms_to_cliques(
    cliques: Sequence[FrozenSet[str]], atom_ids: Sequence[str]
) -> Dict[str, int]:
    """Resolve overlapping maximal cliques into one clique per atom: the
    largest containing clique wins, ties break toward the lexicographically
    first clique (lowest index, since cliques arrive sorted)."""
    assignment: Dict[str, int] = {}
    for atom_id in atom_ids:
        best: Optional[int] = None
        for index, clique in enumerate(cliques):
            if atom_id not in clique:
                continue
            if best is None or len(clique) > len(cliques[best]):
                best = index
        if best is None:
            raise IntegrityError(
                f"critical atom {atom_id} is in no clique; isolated nodes should "
                "form singleton cliques, so the graph is inconsistent"
            )
        assignment[atom_id] = best
    return assignment


def overlap_diagnostics(cliques: Sequence[FrozenSet[str]]) -> dict:
    counts: Dict[str, int] = {}
    for clique in cliques:
        for atom_id in clique:
            counts[atom_id] = counts.get(atom_id, 0) + 1
    overlapping = sorted(a for a, n in counts.items() if n > 1)
    return {"atoms_in_multiple_cliques": len(overlapping), "overlapping_atom_ids": overlapping}


def build_buckets(
    cliques: Sequence[FrozenSet[str]], critical_sets: Sequence[CriticalAtomSet]
) -> List[CriticalAtomBucket]:
    """Bucket examples by the cliques of their critical atoms with 1/k
    weights. Only cliques that receive at least one critical atom become
    buckets; empty critical sets contribute nothing."""
    wanted: List[Tuple[str, str, int]] = []
    for critical in critical_sets:
        k = len(critical.atom_ids)
        for atom_id in sorted(critical.atom_ids):
            wanted.append((critical.example_id, atom_id, k))
    assignment = assign_atoms_to_cliques(cliques, sorted({a for _, a, _ in wanted}))

    weights: Dict[int, Dict[str, float]] = {}
    for example_id, atom_id, k in wanted:
        index = assignment[atom_id]
        bucket = weights.setdefault(index, {})
        bucket[example_id] = bucket.get(example_id, 0.0) + 1.0 / k

    buckets = []
    for index in sorted(weights):
        members = tuple(sorted(weights[index].items()))
        buckets.append(
            CriticalAtomBucket(
                bucket_id=f"b{index:04d}",
                member_atom_ids=cliques[index],
                member_examples=members,
            )
        )
    return buckets


@dataclass(frozen=True)
class BucketAccuracy:
    bucket_id: str
    theta: float
    weight_total: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValidationError(f"bucket {self.bucket_id}: theta must be in [0, 1]")


def bucket_accuracies(
    buckets: Sequence[CriticalAtomBucket], correct: Mapping[str, bool]
) -> List[BucketAccuracy]:
    """Weighted accuracy of each bucket's member examples."""
    accuracies = []
    for bucket in buckets:
        missing = sorted(e for e, _ in bucket.member_examples if e not in correct)
        if missing:
            raise IntegrityError(
                f"bucket {bucket.bucket_id}: no prediction for " + ", ".join(missing)
            )
        total = bucket.weight_total
        hit = sum(w for e, w in bucket.member_examples if correct[e])
        accuracies.append(BucketAccuracy(bucket.bucket_id, hit / total, total))
    return accuracies


def inferential_consistency(
    accuracies: Sequence[BucketAccuracy], weighting: str = "uniform"
) -> float:
    """Probability that two with-replacement draws from the same bucket
    agree in correctness: E[theta^2] + E[(1-theta)^2] over buckets.

    The expectation is uniform over buckets by default; "weighted" uses
    each bucket's total example weight instead.
    """
    if not accuracies:
        raise ValidationError("inferential consistency needs at least one bucket")
    per_bucket = np.array([b.theta**2 + (1.0 - b.theta) ** 2 for b in accuracies])
    if weighting == "uniform":
        return float(per_bucket.mean())
    if weighting == "weighted":
        weights = np.array([b.weight_total for b in accuracies])
        return float(np.average(per_bucket, weights=weights))
    raise ValidationError(f"unknown weighting: {weighting!r}")
