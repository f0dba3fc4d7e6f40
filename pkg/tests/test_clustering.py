"""DBSCAN against a brute-force reference, plus vector construction.

The oracle clusters by connected components over the core graph and
attaches border points to the earliest-seeded adjacent component,
computing distances from the bit lists directly. It shares no code with
the module under test.
"""
import io
import random
from collections import defaultdict

import pytest

from branchforce.clustering import (
    NOISE,
    ClusterAssignment,
    FeatureVector,
    build_feature_vector,
    dbscan,
    distance,
    expand_flags,
    read_vectors,
    write_assignments,
    write_vectors,
)
from branchforce.frontend import parse
from branchforce.taxonomy import CATEGORIES, TAXONOMY_SIZE

WINDOW_SIZE_INDEX = next(i for i, c in enumerate(CATEGORIES) if c.name == "window-size")


def vec(sample_id, *set_bits):
    bits = [0] * TAXONOMY_SIZE
    for b in set_bits:
        bits[b] = 1
    return FeatureVector(sample_id, tuple(bits))


# -- oracle ----------------------------------------------------------------------


def oracle_dbscan(points, eps, min_pts, metric):
    """Partition (as frozensets), noise set, and core set."""
    by_id = {p.sample_id: p for p in points}
    ids = sorted(by_id)

    def dist(p, q):
        inter = sum(1 for x, y in zip(p.bits, q.bits) if x and y)
        union = sum(1 for x, y in zip(p.bits, q.bits) if x or y)
        if metric == "jaccard":
            return 0.0 if union == 0 else 1.0 - inter / union
        return sum(1 for x, y in zip(p.bits, q.bits) if x != y) / len(p.bits)

    neigh = {i: {j for j in ids if dist(by_id[i], by_id[j]) <= eps} for i in ids}
    cores = [i for i in ids if len(neigh[i]) >= min_pts]
    core_set = set(cores)

    rep = {}
    for seed in cores:
        if seed in rep:
            continue
        stack = [seed]
        rep[seed] = seed
        while stack:
            x = stack.pop()
            for y in neigh[x]:
                if y in core_set and y not in rep:
                    rep[y] = seed
                    stack.append(y)

    members = defaultdict(set)
    for c in cores:
        members[rep[c]].add(c)
    seed_rank = {seed: k for k, seed in enumerate(r for r in cores if rep[r] == r)}
    for i in ids:
        if i in core_set:
            continue
        touching = {rep[c] for c in cores if i in neigh[c]}
        if touching:
            members[min(touching, key=seed_rank.__getitem__)].add(i)

    clustered = set().union(*members.values()) if members else set()
    partition = frozenset(frozenset(m) for m in members.values())
    return partition, set(ids) - clustered, core_set


def as_partition(assignments):
    groups = defaultdict(set)
    noise = set()
    for a in assignments:
        if a.label == NOISE:
            noise.add(a.sample_id)
        else:
            groups[a.label].add(a.sample_id)
    return frozenset(frozenset(g) for g in groups.values()), noise


# -- dbscan ----------------------------------------------------------------------


def test_three_identical_vectors_form_one_all_core_cluster():
    points = [vec("a", 1, 2), vec("b", 1, 2), vec("c", 1, 2)]
    out = dbscan(points, eps=0.0, min_pts=2)
    assert len({a.label for a in out}) == 1
    assert all(a.is_core and a.label != NOISE for a in out)


def test_two_separated_groups_form_two_clusters():
    points = [vec("a1", 0, 1), vec("a2", 0, 1), vec("b1", 9, 10), vec("b2", 9, 10)]
    partition, noise = as_partition(dbscan(points, eps=0.3, min_pts=2))
    assert partition == frozenset({frozenset({"a1", "a2"}), frozenset({"b1", "b2"})})
    assert noise == set()


def test_isolated_point_is_noise():
    points = [vec("a", 0), vec("b", 0), vec("far", 20, 21, 22)]
    out = {a.sample_id: a for a in dbscan(points, eps=0.2, min_pts=2)}
    assert out["far"].label == NOISE
    assert not out["far"].is_core
    assert out["a"].label == out["b"].label != NOISE


def test_zero_vectors_cluster_together_under_jaccard():
    points = [vec("a"), vec("b")]
    assert distance(points[0], points[1]) == 0.0
    out = dbscan(points, eps=0.0, min_pts=2)
    assert out[0].label == out[1].label != NOISE


def test_border_point_joins_earliest_seeded_cluster():
    # "mid" reaches exactly one core in each group, so it is never core
    # itself (neighborhood of 3 < min_pts 4) and both clusters could claim it
    points = [
        vec("a1", 0, 1, 2, 3, 4), vec("a2", 0, 1, 2, 3, 5), vec("a3", 0, 1, 2, 3, 6),
        vec("b1", 10, 11, 12, 13, 14), vec("b2", 10, 11, 12, 13, 15),
        vec("b3", 10, 11, 12, 13, 16),
        vec("mid", 0, 1, 2, 3, 4, 10, 11, 12, 13, 14),
    ]
    eps, min_pts = 0.5, 4
    out = {a.sample_id: a for a in dbscan(points, eps=eps, min_pts=min_pts)}
    assert not out["mid"].is_core
    assert out["a1"].is_core and out["b1"].is_core
    assert out["mid"].label == out["a1"].label != out["b1"].label
    partition, noise, cores = oracle_dbscan(points, eps, min_pts, "jaccard")
    got_partition, got_noise = as_partition(out.values())
    assert got_partition == partition
    assert got_noise == noise
    assert cores == {"a1", "b1"}


def test_hamming_metric_counts_differing_bits():
    a, b = vec("a", 0), vec("b", 0, 1)
    assert distance(a, b, "hamming") == pytest.approx(1 / TAXONOMY_SIZE)
    assert distance(a, b, "jaccard") == pytest.approx(0.5)
    out = dbscan([a, b], eps=0.1, min_pts=2, metric="hamming")
    assert out[0].label == out[1].label != NOISE


def test_random_corpora_match_oracle():
    rng = random.Random(2024)
    for trial in range(40):
        count = rng.randint(2, 40)
        points = []
        for i in range(count):
            bits = rng.sample(range(TAXONOMY_SIZE), rng.randint(0, 5))
            points.append(vec("s%03d" % i, *bits))
        eps = rng.choice([0.0, 0.2, 0.3, 0.5, 0.8])
        min_pts = rng.randint(1, 4)
        metric = rng.choice(["jaccard", "hamming"])
        got = dbscan(points, eps=eps, min_pts=min_pts, metric=metric)
        got_partition, got_noise = as_partition(got)
        partition, noise, cores = oracle_dbscan(points, eps, min_pts, metric)
        assert got_partition == partition, (trial, eps, min_pts, metric)
        assert got_noise == noise
        assert {a.sample_id for a in got if a.is_core} == cores


def test_permutation_invariance_exact_labels():
    rng = random.Random(7)
    points = [vec("s%02d" % i, *rng.sample(range(TAXONOMY_SIZE), rng.randint(1, 4)))
              for i in range(25)]
    baseline = sorted(dbscan(points, eps=0.4, min_pts=2),
                      key=lambda a: a.sample_id)
    for _ in range(10):
        shuffled = points[:]
        rng.shuffle(shuffled)
        again = sorted(dbscan(shuffled, eps=0.4, min_pts=2),
                       key=lambda a: a.sample_id)
        assert again == baseline


def test_assignments_come_back_in_input_order():
    points = [vec("z", 1), vec("a", 1), vec("m", 1)]
    out = dbscan(points, eps=0.0, min_pts=1)
    assert [a.sample_id for a in out] == ["z", "a", "m"]


def test_parameter_validation():
    with pytest.raises(ValueError):
        dbscan([], eps=1.5)
    with pytest.raises(ValueError):
        dbscan([], min_pts=0)
    with pytest.raises(ValueError):
        distance(vec("a"), vec("b"), "euclid")
    with pytest.raises(ValueError):
        FeatureVector("x", (0,) * (TAXONOMY_SIZE - 1))
    with pytest.raises(ValueError):
        FeatureVector("x", (0,) * (TAXONOMY_SIZE - 1) + (2,))


# -- expansion --------------------------------------------------------------------


def test_expand_flags_surfaces_co_cluster_members():
    assignments = [
        ClusterAssignment("A", 0, True),
        ClusterAssignment("B", 0, True),
        ClusterAssignment("C", 0, False),
        ClusterAssignment("D", 1, True),
        ClusterAssignment("N", NOISE, False),
    ]
    assert expand_flags(assignments, {"A"}) == {"B", "C"}
    assert expand_flags(assignments, set()) == set()
    assert expand_flags(assignments, {"N"}) == set()
    assert expand_flags(assignments, {"A", "B"}) == {"C"}
    assert expand_flags(assignments, {"A", "D"}) == {"B", "C"}


# -- feature vectors ----------------------------------------------------------------


def test_window_size_sample_sets_exactly_that_bit():
    program = parse("if (window.height > 100 && window.width > 50) { go(); }")
    fv = build_feature_vector("s", [program], mode="browser")
    expected = [0] * TAXONOMY_SIZE
    expected[WINDOW_SIZE_INDEX] = 1
    assert list(fv.bits) == expected


def test_empty_sample_gives_zero_vector():
    fv = build_feature_vector("s", [parse("")], mode="browser")
    assert set(fv.bits) == {0}


def test_vector_sees_code_outside_conditions():
    # signals count anywhere in the file, not only inside guards
    program = parse("var probe = navigator.userAgent; doSomething(probe);")
    fv = build_feature_vector("s", [program], mode="browser")
    browser_type = next(i for i, c in enumerate(CATEGORIES) if c.name == "browser-type")
    assert fv.bits[browser_type] == 1


def test_mode_none_keeps_all_categories():
    program = parse("if (typeof window !== 'undefined') { leave(); }")
    unscoped = build_feature_vector("s", [program])
    runs_in_browser = next(i for i, c in enumerate(CATEGORIES)
                           if c.name == "runs-in-browser")
    assert unscoped.bits[runs_in_browser] == 1
    scoped = build_feature_vector("s", [program], mode="browser")
    assert scoped.bits[runs_in_browser] == 0


# -- JSONL interchange ----------------------------------------------------------------


def test_vector_jsonl_round_trip():
    vectors = [vec("a", 1, 5), vec("b"), vec("c", 27)]
    sink = io.StringIO()
    write_vectors(vectors, sink)
    assert read_vectors(io.StringIO(sink.getvalue())) == vectors


def test_assignment_jsonl_shape():
    sink = io.StringIO()
    write_assignments([ClusterAssignment("a", 0, True),
                       ClusterAssignment("n", NOISE, False)], sink)
    lines = sink.getvalue().strip().split("\n")
    assert lines[0] == '{"id":"a","label":0,"core":true}'
    assert lines[1] == '{"id":"n","label":-1,"core":false}'
