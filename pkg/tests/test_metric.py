import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horocover.errors import ExactnessError, InvalidInputError, SizeCapError
from horocover.groups import FreeAbelian, FreeGroup, Heisenberg, Lamplighter
from horocover.metric import (
    FiniteMetricSpace,
    all_pairs_distances,
    cayley_ball,
    four_point_delta,
    greedy_cover,
    max_packing,
    word_metric_space,
)


def free_dist(u, v):
    """|u^-1 v| by cancelling the common prefix."""
    k = 0
    while k < min(len(u), len(v)) and u[k] == v[k]:
        k += 1
    return len(u) + len(v) - 2 * k


def min_cover_size(D, subset, r):
    """Exhaustive minimum number of r-balls centered in subset."""
    sub = list(subset)
    for k in range(1, len(sub) + 1):
        for cs in itertools.combinations(sub, k):
            if all(min(D[c, x] for c in cs) <= r for x in sub):
                return k
    raise AssertionError("unreachable")


def z_ball(R):
    return all_pairs_distances(cayley_ball(FreeAbelian(1), R))


# --- cayley_ball


def test_cayley_ball_examples():
    b = cayley_ball(FreeAbelian(1), 3)
    assert len(b) == 7 and b.sphere_sizes == [1, 2, 2, 2]
    assert [v[0] for v in b.vertices] == [0, 1, -1, 2, -2, 3, -3]
    assert len(cayley_ball(FreeGroup(2), 2)) == 17
    assert len(cayley_ball(Heisenberg(), 1)) == 5


@pytest.mark.parametrize("model,R", [(FreeAbelian(2), 6), (FreeGroup(2), 5), (Heisenberg(), 5), (Lamplighter(), 7)])
def test_ball_invariants(model, R):
    b = cayley_ball(model, R)
    assert len(b) == sum(b.sphere_sizes) and b.sphere_sizes[0] == 1
    adj = b.adjacency().tocsr()
    for i in range(1, len(b)):
        nb = adj.indices[adj.indptr[i] : adj.indptr[i + 1]]
        assert (b.word_length[nb] == b.word_length[i] - 1).any()
    assert cayley_ball(model, R).vertices == b.vertices


def test_cayley_ball_cap_names_radius():
    with pytest.raises(SizeCapError) as exc:
        cayley_ball(FreeGroup(2), 10, max_vertices=1000)
    assert exc.value.radius == 6
    with pytest.raises(InvalidInputError):
        cayley_ball(FreeGroup(2), -1)


def test_growth_submultiplicative():
    for model in (FreeGroup(2), Heisenberg(), Lamplighter()):
        gr = np.cumsum(cayley_ball(model, 8).sphere_sizes)
        for a in range(9):
            for b in range(9 - a):
                assert gr[a + b] <= gr[a] * gr[b]


# --- all_pairs_distances and certification


def test_all_pairs_examples():
    m = all_pairs_distances(cayley_ball(FreeAbelian(2), 2))
    i, j = m.labels.index("(1,0)"), m.labels.index("(0,1)")
    assert m.dist(i, j) == 2
    assert m.certified(i, [j])[0]
    b = cayley_ball(FreeGroup(2), 3)
    m = all_pairs_distances(b)
    i, j = b.index[(1, 2)], b.index[(2, 1)]
    assert m.dist(i, j) == 4
    assert not m.certified(i, [j])[0]
    # the same pair is certified once the ball is large enough
    b6 = cayley_ball(FreeGroup(2), 4)
    m6 = all_pairs_distances(b6)
    assert m6.certified(b6.index[(1, 2)], [b6.index[(2, 1)]])[0]


@pytest.mark.parametrize("model,R", [(FreeAbelian(2), 5), (FreeGroup(2), 4), (Heisenberg(), 4)])
def test_norm_equals_word_length_and_metric_axioms(model, R):
    b = cayley_ball(model, R)
    m = all_pairs_distances(b)
    D = m.matrix
    assert np.array_equal(D[0], b.word_length)
    assert np.array_equal(D, D.T) and (np.diag(D) == 0).all()
    assert m.integral and D.dtype.kind == "i"
    rng = np.random.default_rng(0)
    idx = rng.integers(0, len(b), size=(3000, 3))
    x, y, z = idx.T
    assert (D[x, z] <= D[x, y] + D[y, z]).all()


def test_certified_pairs_are_exact_free_group():
    b = cayley_ball(FreeGroup(2), 4)
    m = all_pairs_distances(b)
    ok = m.certified_matrix()
    D = m.matrix
    for i in range(len(b)):
        for j in range(len(b)):
            if ok[i, j]:
                assert D[i, j] == free_dist(b.vertices[i], b.vertices[j])
            else:
                assert D[i, j] >= free_dist(b.vertices[i], b.vertices[j])


def test_uncertified_distances_bound_from_above_heisenberg():
    small = all_pairs_distances(cayley_ball(Heisenberg(), 3))
    big = cayley_ball(Heisenberg(), 7)
    mb = big.metric()
    ok = small.certified_matrix()
    for i in range(len(small)):
        row = mb.row(big.index[cayley_ball(Heisenberg(), 3).vertices[i]])
        for j in range(len(small)):
            true = row[j]
            if ok[i, j]:
                assert small.dist(i, j) == true
            else:
                assert small.dist(i, j) >= true


def test_check_ball_guards_exactness():
    m = all_pairs_distances(cayley_ball(FreeGroup(2), 4))
    assert len(m.check_ball(0, 2)) == 17
    assert len(m.check_ball(1, 1)) == 5
    # a, AAAA have midpoint (1 + 4 + 5) / 2 > 4
    for c, r in [(0, 3), (0, 4), (1, 2), (1, 4)]:
        with pytest.raises(ExactnessError):
            m.check_ball(c, r)


def test_word_metric_space_matches_bfs():
    for model, R in [(FreeAbelian(2), 5), (FreeGroup(2), 4), (Lamplighter(), 5)]:
        b = cayley_ball(model, R)
        exact = word_metric_space(model, b.vertices)
        big = b.metric()
        for i in range(0, len(b), max(1, len(b) // 20)):
            d = np.asarray(exact.row(i))
            assert (d <= big.row(i)).all()
        assert np.array_equal(exact.row(0), b.word_length)


def test_csv_round_trip(tmp_path):
    m = all_pairs_distances(cayley_ball(FreeAbelian(2), 2))
    p = tmp_path / "d.csv"
    m.to_csv(p)
    back = FiniteMetricSpace.from_csv(p)
    assert back.labels == m.labels
    assert np.array_equal(back.matrix, m.matrix)
    assert back.integral
    p.write_text("a,b\n0,1\n2,0\n")
    with pytest.raises(InvalidInputError):
        FiniteMetricSpace.from_csv(p)


def test_ball_graph_export(tmp_path):
    b = cayley_ball(FreeGroup(2), 1)
    b.write_csv(tmp_path / "e.csv", tmp_path / "v.csv")
    edges = (tmp_path / "e.csv").read_text().splitlines()
    verts = (tmp_path / "v.csv").read_text().splitlines()
    assert edges[0] == "src,dst,generator" and "e,a,a" in edges
    assert verts[0] == "label,word_length" and verts[1] == "e,0" and len(verts) == 6


# --- four-point delta


def test_four_point_examples():
    line = FiniteMetricSpace(list("abcd"), np.abs(np.subtract.outer([0, 1, 3, 7], [0, 1, 3, 7])))
    assert four_point_delta(line) == 0
    tree = all_pairs_distances(cayley_ball(FreeGroup(2), 3))
    assert four_point_delta(tree, sample_count=20_000) == 0
    with pytest.raises(InvalidInputError):
        four_point_delta(FiniteMetricSpace(list("abc"), np.zeros((3, 3))))


@pytest.mark.parametrize("R", [1, 2, 3, 5, 8])
def test_four_point_square_corners(R):
    # corners of the l1 square [0, 2R]^2: sums 4R, 4R, 8R, so delta = 2R
    pts = [(0, 0), (2 * R, 0), (0, 2 * R), (2 * R, 2 * R)]
    assert four_point_delta(word_metric_space(FreeAbelian(2), pts)) == 2 * R
    # the square of l1 diameter 2R (side R) gives R
    pts = [(0, 0), (R, 0), (0, R), (R, R)]
    assert four_point_delta(word_metric_space(FreeAbelian(2), pts)) == R


def test_four_point_monotone_in_samples_and_relabel_invariant():
    m = all_pairs_distances(cayley_ball(FreeAbelian(2), 4))
    vals = [four_point_delta(m, sample_count=k, seed=5) for k in (10, 100, 1000, 10_000)]
    assert vals == sorted(vals)
    perm = np.random.default_rng(1).permutation(m.n)
    D = m.matrix[np.ix_(perm, perm)]
    relabeled = FiniteMetricSpace([m.labels[i] for i in perm], D)
    assert four_point_delta(relabeled, sample_count=10**6) == four_point_delta(m, sample_count=10**6)


# --- greedy cover and packing


def test_greedy_cover_examples():
    m = z_ball(4)
    cs = greedy_cover(m, range(m.n), 2)
    assert [m.labels[c] for c in cs] == ["(0)", "(4)", "(-4)"]
    assert min_cover_size(m.matrix, range(m.n), 2) == 2
    assert greedy_cover(m, [0, 1, 2], 5) == [0]


def test_greedy_cover_free_group_grows():
    b = cayley_ball(FreeGroup(2), 4)
    m = all_pairs_distances(b)
    big = len(greedy_cover(m, range(len(b)), 2))
    small = len(greedy_cover(m, range(17), 1))
    assert big > small
    # the graph-backed lazy path gives the same centers as the dense path
    assert greedy_cover(b.metric(), range(len(b)), 2) == greedy_cover(m, range(len(b)), 2)


def test_packing_examples():
    m = z_ball(4)
    pk = max_packing(m, range(m.n), 2)
    assert sorted(int(m.labels[i][1:-1]) for i in pk) == [-4, -2, 0, 2, 4]
    assert max_packing(m, [3], 10) == [3]
    assert max_packing(m, range(m.n), 1) == list(range(m.n))
    b = cayley_ball(FreeGroup(2), 3)
    assert max_packing(b.metric(), range(len(b)), 3) == max_packing(all_pairs_distances(b), range(len(b)), 3)


def _random_subset_space(seed):
    model = [FreeAbelian(2), FreeGroup(2), Heisenberg()][seed % 3]
    m = all_pairs_distances(cayley_ball(model, 3))
    rng = np.random.default_rng(seed)
    sub = np.sort(rng.choice(min(m.n, 60), size=int(rng.integers(1, 13)), replace=False))
    return m, sub


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3]))
def test_cover_packing_duality(seed, r):
    m, sub = _random_subset_space(seed)
    D = m.matrix
    greedy = greedy_cover(m, sub, r)
    best = min_cover_size(D, sub, r)
    # integer metric: pairwise > 2r means >= 2r + 1
    pack = max_packing(m, sub, 2 * r + 1)
    assert len(pack) <= best <= len(greedy)
    # greedy covers, and its centers are pairwise more than r apart
    assert all(min(D[c, x] for c in greedy) <= r for x in sub)
    for a, b in itertools.combinations(greedy, 2):
        assert D[a, b] > r


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3]))
def test_packing_is_maximal_separated(seed, s):
    m, sub = _random_subset_space(seed)
    D = m.matrix
    pk = max_packing(m, sub, s)
    for a, b in itertools.combinations(pk, 2):
        assert D[a, b] >= s
    for x in sub:
        assert x in pk or min(D[x, p] for p in pk) < s


def test_cover_rejects_bad_input():
    m = z_ball(2)
    with pytest.raises(InvalidInputError):
        greedy_cover(m, [], 1)
    with pytest.raises(InvalidInputError):
        greedy_cover(m, [0], 0)
    with pytest.raises(InvalidInputError):
        max_packing(m, [0], -1)
    with pytest.raises(InvalidInputError):
        greedy_cover(m, [99], 1)
