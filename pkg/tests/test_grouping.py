import itertools
import random

import numpy as np
import pytest

from atomnli.backends import BackendDescriptor, MockEmbeddingBackend, MockEntailmentBackend
from atomnli.core import Atom, DefeasibleLabel, NliLabel
from atomnli.defeasible import CriticalAtomSet
from atomnli.errors import IntegrityError, ValidationError
from atomnli.grouping import (
    BucketAccuracy,
    CriticalAtomBucket,
    SimilarityGraph,
    assign_atoms_to_cliques,
    bucket_accuracies,
    build_buckets,
    build_graph,
    cosine,
    inferential_consistency,
    maximal_cliques,
    overlap_diagnostics,
)


def test_cosine_basic():
    x = np.array([1.0, 2.0, 3.0])
    assert cosine(x, x) == pytest.approx(1.0)
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(0.0)
    assert cosine(x, -x) == pytest.approx(-1.0)
    with pytest.raises(ValidationError):
        cosine(np.zeros(3), x)
    with pytest.raises(ValidationError):
        cosine(np.array([1.0]), np.array([1.0, 2.0]))


def graph_from_edges(nodes, edges, threshold=0.75):
    return SimilarityGraph(
        nodes=tuple(sorted(nodes)),
        edges=frozenset(tuple(sorted(e)) for e in edges),
        threshold=threshold,
    )


def test_graph_rejects_self_loops_and_unknown_nodes():
    with pytest.raises(IntegrityError):
        graph_from_edges(["a"], [("a", "a")])
    with pytest.raises(IntegrityError):
        graph_from_edges(["a"], [("a", "b")])


def brute_force_cliques(nodes, edges):
    """All maximal cliques by testing every one of the 2^n subsets."""
    edge_set = {frozenset(e) for e in edges}
    nodes = sorted(nodes)

    def is_clique(subset):
        return all(
            frozenset((u, v)) in edge_set for u, v in itertools.combinations(subset, 2)
        )

    cliques = []
    for size in range(1, len(nodes) + 1):
        for subset in itertools.combinations(nodes, size):
            if not is_clique(subset):
                continue
            if any(
                other not in subset and is_clique(subset + (other,))
                for other in nodes
            ):
                continue
            cliques.append(frozenset(subset))
    return sorted(cliques, key=lambda c: sorted(c))


def test_maximal_cliques_simple_shapes():
    triangle = graph_from_edges("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    assert maximal_cliques(triangle) == [frozenset("abc")]
    path = graph_from_edges("abc", [("a", "b"), ("b", "c")])
    assert maximal_cliques(path) == [frozenset(("a", "b")), frozenset(("b", "c"))]
    isolated = graph_from_edges("ab", [])
    assert maximal_cliques(isolated) == [frozenset("a"), frozenset("b")]


def test_maximal_cliques_match_brute_force_on_random_graphs():
    rng = random.Random(2024)
    for trial in range(100):
        n = rng.randint(1, 12)
        nodes = [f"n{i:02d}" for i in range(n)]
        edges = [
            (u, v)
            for u, v in itertools.combinations(nodes, 2)
            if rng.random() < rng.choice([0.15, 0.35, 0.6])
        ]
        graph = graph_from_edges(nodes, edges)
        assert maximal_cliques(graph) == brute_force_cliques(nodes, edges), f"trial {trial}"


def test_maximal_cliques_output_is_deterministic_and_valid():
    rng = random.Random(5)
    nodes = [f"n{i}" for i in range(10)]
    edges = [e for e in itertools.combinations(nodes, 2) if rng.random() < 0.4]
    graph = graph_from_edges(nodes, edges)
    cliques = maximal_cliques(graph)
    assert cliques == maximal_cliques(graph)
    assert cliques == sorted(cliques, key=lambda c: sorted(c))
    edge_set = {frozenset(e) for e in edges}
    for clique in cliques:
        for u, v in itertools.combinations(sorted(clique), 2):
            assert frozenset((u, v)) in edge_set
        # maximality: no single-node extension stays a clique
        for other in set(nodes) - clique:
            assert not all(frozenset((other, member)) in edge_set for member in clique)


def _atoms(texts, parent="d1"):
    return [Atom.create(parent, t) for t in texts]


def test_build_graph_similarity_then_bidirectional_entailment():
    emb = MockEmbeddingBackend(BackendDescriptor("emb:mock"))
    texts = ["The person is a man.", "The person is a man.", "There is a dog."]
    atoms = [Atom.create(f"d{i}", t) for i, t in enumerate(texts)]
    embeddings = {a.atom_id: emb.embed(a.text) for a in atoms}
    nli = MockEntailmentBackend(BackendDescriptor("nli:mock"))
    graph = build_graph(atoms, embeddings, 0.75, nli)
    identical = tuple(sorted((atoms[0].atom_id, atoms[1].atom_id)))
    assert graph.edges == frozenset({identical})
    # entailment calls only issued for the single pair above the cutoff
    assert nli.calls == 2


def test_build_graph_one_directional_entailment_is_not_enough():
    atoms = [Atom.create("d1", "Text A."), Atom.create("d2", "Text B.")]
    embeddings = {a.atom_id: np.array([1.0, 0.0]) for a in atoms}  # similarity 1.0
    nli = MockEntailmentBackend(
        BackendDescriptor("nli:mock"),
        fixtures={("Text A.", "Text B."): NliLabel.ENTAILMENT,
                  ("Text B.", "Text A."): NliLabel.NEUTRAL},
    )
    graph = build_graph(atoms, embeddings, 0.75, nli)
    assert graph.edges == frozenset()


def test_build_graph_short_circuits_below_threshold():
    atoms = [Atom.create("d1", "Text A."), Atom.create("d2", "Text B.")]
    embeddings = {
        atoms[0].atom_id: np.array([1.0, 0.0]),
        atoms[1].atom_id: np.array([0.8, 0.6]),  # cosine 0.8 < 0.9 threshold
    }
    nli = MockEntailmentBackend(BackendDescriptor("nli:mock"))
    graph = build_graph(atoms, embeddings, 0.9, nli)
    assert graph.edges == frozenset()
    assert nli.calls == 0


def _critical(eid, atom_ids, polarity=DefeasibleLabel.STRENGTHENER, magnitude=2):
    return CriticalAtomSet(eid, frozenset(atom_ids), polarity, magnitude)


def test_bucket_weights_split_across_critical_atoms():
    cliques = [frozenset({"a1"}), frozenset({"a2"}), frozenset({"a3"})]
    criticals = [
        _critical("e1", {"a1", "a2"}),
        _critical("e2", {"a3"}),
    ]
    buckets = build_buckets(cliques, criticals)
    by_atom = {tuple(sorted(b.member_atom_ids)): b for b in buckets}
    assert by_atom[("a1",)].member_examples == (("e1", 0.5),)
    assert by_atom[("a2",)].member_examples == (("e1", 0.5),)
    assert by_atom[("a3",)].member_examples == (("e2", 1.0),)


def test_bucket_weight_conservation_on_random_configurations():
    rng = random.Random(77)
    for _ in range(50):
        n_atoms = rng.randint(1, 15)
        atom_ids = [f"a{i:02d}" for i in range(n_atoms)]
        edges = [e for e in itertools.combinations(atom_ids, 2) if rng.random() < 0.3]
        graph = graph_from_edges(atom_ids, edges)
        cliques = maximal_cliques(graph)
        criticals = []
        for e in range(rng.randint(1, 10)):
            size = rng.randint(1, min(3, n_atoms))
            criticals.append(_critical(f"e{e:02d}", rng.sample(atom_ids, size)))
        buckets = build_buckets(cliques, criticals)
        totals = {}
        for bucket in buckets:
            for eid, weight in bucket.member_examples:
                totals[eid] = totals.get(eid, 0.0) + weight
        for critical in criticals:
            assert abs(totals[critical.example_id] - 1.0) <= 1e-9


def test_same_bucket_weights_accumulate():
    cliques = [frozenset({"a1", "a2"})]
    buckets = build_buckets(cliques, [_critical("e1", {"a1", "a2"})])
    assert len(buckets) == 1
    assert buckets[0].member_examples == (("e1", 1.0),)


def test_overlapping_cliques_resolved_to_larger_then_lexicographic():
    # a2 sits in two maximal cliques; the larger one wins
    cliques = sorted(
        [frozenset({"a1", "a2"}), frozenset({"a2", "a3", "a4"})],
        key=lambda c: sorted(c),
    )
    assignment = assign_atoms_to_cliques(cliques, ["a1", "a2", "a3"])
    assert cliques[assignment["a2"]] == frozenset({"a2", "a3", "a4"})
    # equal sizes: lexicographically first clique wins
    tied = sorted([frozenset({"a2", "a9"}), frozenset({"a2", "a5"})],
                  key=lambda c: sorted(c))
    tied_assignment = assign_atoms_to_cliques(tied, ["a2"])
    assert tied[tied_assignment["a2"]] == frozenset({"a2", "a5"})
    diagnostics = overlap_diagnostics(cliques)
    assert diagnostics["atoms_in_multiple_cliques"] == 1
    assert diagnostics["overlapping_atom_ids"] == ["a2"]


def test_critical_atom_missing_from_all_cliques_is_integrity_error():
    with pytest.raises(IntegrityError, match="ghost"):
        build_buckets([frozenset({"a1"})], [_critical("e1", {"ghost"})])


def test_bucket_round_trip():
    bucket = CriticalAtomBucket("b0000", frozenset({"a1", "a2"}), (("e1", 0.5), ("e2", 1.0)))
    assert CriticalAtomBucket.from_record(bucket.to_record()) == bucket
    assert bucket.weight_total == pytest.approx(1.5)


def test_bucket_accuracies_weighted_mean():
    buckets = [
        CriticalAtomBucket("b0000", frozenset({"a1"}), (("e1", 0.5), ("e2", 1.0))),
    ]
    accuracies = bucket_accuracies(buckets, {"e1": True, "e2": False})
    assert accuracies[0].theta == pytest.approx(0.5 / 1.5)
    with pytest.raises(IntegrityError):
        bucket_accuracies(buckets, {"e1": True})


def _ba(theta, weight=1.0):
    return BucketAccuracy("b", theta, weight)


def enumerate_agreement(members):
    """Oracle for one bucket: probability two with-replacement weighted
    draws agree in correctness, by explicit pair enumeration."""
    total = sum(w for _, w in members)
    agree = 0.0
    for (ci, wi) in members:
        for (cj, wj) in members:
            if ci == cj:
                agree += wi * wj
    return agree / total**2


def test_inferential_consistency_examples():
    assert inferential_consistency([_ba(1.0), _ba(1.0)]) == pytest.approx(1.0)
    assert inferential_consistency([_ba(0.5)]) == pytest.approx(0.5)
    assert inferential_consistency([_ba(1.0), _ba(0.5)]) == pytest.approx(0.75)
    with pytest.raises(ValidationError):
        inferential_consistency([])
    with pytest.raises(ValidationError):
        inferential_consistency([_ba(0.5)], weighting="nope")


def test_inferential_consistency_matches_pair_enumeration_oracle():
    rng = random.Random(300)
    for _ in range(200):
        n_buckets = rng.randint(1, 8)
        accuracies = []
        oracle_values = []
        for b in range(n_buckets):
            members = [
                (rng.random() < 0.6, rng.choice([0.25, 0.5, 1.0]))
                for _ in range(rng.randint(1, 6))
            ]
            total = sum(w for _, w in members)
            theta = sum(w for c, w in members if c) / total
            accuracies.append(BucketAccuracy(f"b{b}", theta, total))
            oracle_values.append(enumerate_agreement(members))
        estimator = inferential_consistency(accuracies)
        oracle = sum(oracle_values) / len(oracle_values)
        assert abs(estimator - oracle) <= 1e-12
        assert 0.5 - 1e-12 <= estimator <= 1.0 + 1e-12
        flipped = [BucketAccuracy(b.bucket_id, 1.0 - b.theta, b.weight_total)
                   for b in accuracies]
        assert abs(inferential_consistency(flipped) - estimator) <= 1e-12


def test_inferential_consistency_weighted_variant():
    accuracies = [_ba(1.0, weight=3.0), _ba(0.5, weight=1.0)]
    assert inferential_consistency(accuracies, weighting="weighted") == pytest.approx(
        (3.0 * 1.0 + 1.0 * 0.5) / 4.0
    )
