import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horocover.errors import DomainError, ExactnessError, InvalidInputError
from horocover.groups import FreeAbelian, FreeGroup, Heisenberg
from horocover.horoball import (
    HoroballSpace,
    HoroPoint,
    MeshOracle,
    cayley_horoball,
    cover_extent,
    distortion_audit,
    horoball_ball_cover,
    horoball_distance,
    horoball_sample,
    horosphere_distance,
    mesh_oracle_distance,
    project_to_level,
    rho,
)
from horocover.metric import FiniteMetricSpace, four_point_delta


def half_plane(x1, y1, x2, y2):
    """Hyperbolic distance in the upper half-plane, the textbook formula."""
    return math.acosh(1 + ((x2 - x1) ** 2 + (y2 - y1) ** 2) / (2 * y1 * y2))


def path_space(n):
    """d1 on a path of n vertices."""
    x = np.arange(n)
    return FiniteMetricSpace([str(i) for i in x], np.abs(np.subtract.outer(x, x)), integral=True)


@pytest.fixture(scope="module")
def z2():
    return cayley_horoball(FreeAbelian(2), 3, truncation=5)


@pytest.fixture(scope="module")
def z2_mesh(z2):
    return MeshOracle(z2, 0.05)


def random_pairs(h, rng, count, top=3.5):
    out = []
    while len(out) < count:
        v, w = (int(x) for x in rng.integers(0, h.base.n, 2))
        a, b = (float(x) for x in rng.uniform(1, top, 2))
        p, q = HoroPoint(v, a), HoroPoint(w, b)
        try:
            out.append((p, q, horoball_distance(h, p, q)))
        except DomainError:
            continue
    return out


# --- closed form


def test_horoball_distance_examples():
    h = HoroballSpace(path_space(6), truncation=10)
    assert horoball_distance(h, HoroPoint(0, 1), HoroPoint(0, 4)) == pytest.approx(3, abs=1e-12)
    assert horoball_distance(h, HoroPoint(0, 1), HoroPoint(1, 1)) == pytest.approx(2 * math.asinh(0.5))
    assert horoball_distance(h, HoroPoint(0, 1), HoroPoint(1, 1)) == pytest.approx(0.9624, abs=1e-4)
    d = horoball_distance(h, HoroPoint(0, 1), HoroPoint(4, 3))
    assert d == pytest.approx(2.2603, abs=1e-4)
    assert math.cosh(d) == pytest.approx(1 + (16 + (math.e**2 - 1) ** 2) / (2 * math.e**2), rel=1e-12)
    assert math.cosh(d) == pytest.approx(4.8450, abs=5e-4)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 50), st.floats(1, 8), st.floats(1, 8))
def test_closed_form_matches_half_plane(n, t1, t2):
    y1, y2 = math.exp(t1 - 1), math.exp(t2 - 1)
    assert float(rho(n, t1, t2)) == pytest.approx(half_plane(0, y1, n, y2), rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(1, 20), st.floats(1, 20))
def test_vertical_distance_exact(t1, t2):
    assert float(rho(0, t1, t2)) == pytest.approx(abs(t1 - t2), abs=1e-9)


def test_rho_monotone_in_offset():
    n = np.linspace(0, 40, 400)
    for t1, t2 in [(1, 1), (1, 3), (2.5, 4), (6, 1)]:
        r = rho(n, t1, t2)
        assert (np.diff(r) > 0).all()


def test_identity_and_symmetry(z2):
    rng = np.random.default_rng(4)
    for p, q, d in random_pairs(z2, rng, 200):
        assert d == pytest.approx(horoball_distance(z2, q, p), abs=1e-12)
        assert (d == 0) == (p == q) or d < 1e-12
    assert horoball_distance(z2, HoroPoint(3, 2.0), HoroPoint(3, 2.0)) == 0


def test_triangle_inequality_random_triples():
    h = cayley_horoball(FreeAbelian(2), 6)
    rng = np.random.default_rng(7)
    v = rng.integers(0, h.base.n, size=(10_000, 3))
    t = rng.uniform(1, 6, size=(10_000, 3))
    D = h.base.matrix.astype(float)
    xy = rho(D[v[:, 0], v[:, 1]], t[:, 0], t[:, 1])
    yz = rho(D[v[:, 1], v[:, 2]], t[:, 1], t[:, 2])
    xz = rho(D[v[:, 0], v[:, 2]], t[:, 0], t[:, 2])
    assert (xz <= xy + yz + 1e-9).all()


def test_domain_and_exactness_errors():
    h = HoroballSpace(path_space(30), truncation=3)
    with pytest.raises(DomainError):
        horoball_distance(h, HoroPoint(0, 0.5), HoroPoint(0, 1))
    with pytest.raises(DomainError):
        horoball_distance(h, HoroPoint(0, 1), HoroPoint(0, 3.5))
    # a long horizontal geodesic bulges above the truncation
    with pytest.raises(DomainError):
        horoball_distance(h, HoroPoint(0, 1), HoroPoint(29, 1))
    with pytest.raises(InvalidInputError):
        horoball_distance(h, HoroPoint(99, 1), HoroPoint(0, 1))
    with pytest.raises(DomainError):
        HoroballSpace(path_space(3), truncation=0.5)
    hz = cayley_horoball(Heisenberg(), 3)
    far = hz.base.n - 1
    with pytest.raises(ExactnessError):
        horoball_distance(hz, HoroPoint(far - 1, 1), HoroPoint(far, 1))


def test_peak_check_allows_low_geodesics():
    h = HoroballSpace(path_space(30), truncation=3)
    # offset 2 at level 1: peak at 1 + log(sqrt(1 + 1)) < 3
    assert horoball_distance(h, HoroPoint(0, 1), HoroPoint(2, 1)) == pytest.approx(2 * math.asinh(1))


# --- horospheres and projection


def test_horosphere_examples():
    h = HoroballSpace(path_space(6), truncation=10)
    assert horosphere_distance(h, 1, 0, 4) == 4
    assert horosphere_distance(h, 3, 0, 4) == pytest.approx(4 * math.exp(-2))
    assert horosphere_distance(h, 3, 0, 4) == pytest.approx(0.5413, abs=1e-4)
    assert horosphere_distance(h, 7.5, 2, 2) == 0
    with pytest.raises(DomainError):
        horosphere_distance(h, 11, 0, 1)


def test_projection_examples_and_relation():
    assert project_to_level(HoroPoint(3, 1.0), 3) == HoroPoint(3, 3.0)
    assert project_to_level(HoroPoint(3, 2.0), 2) == HoroPoint(3, 2.0)
    with pytest.raises(DomainError):
        project_to_level(HoroPoint(0, 2.0), 5, truncation=4)
    h = HoroballSpace(path_space(6), truncation=10)
    x, y = HoroPoint(0, 1.0), HoroPoint(4, 1.0)
    px, py = project_to_level(x, 3), project_to_level(y, 3)
    d3 = horosphere_distance(h, 3, px.vertex, py.vertex)
    assert horosphere_distance(h, 1, 0, 4) == pytest.approx(math.exp(2) * d3)
    for t in (1.0, 2.5, 4.0):
        for tp in (1.0, 1.5, t):
            if tp <= t:
                assert horosphere_distance(h, tp, 1, 5) == pytest.approx(
                    math.exp(t - tp) * horosphere_distance(h, t, 1, 5)
                )


# --- distortion audit


def test_distortion_examples():
    h = HoroballSpace(path_space(12), truncation=10)
    r = distortion_audit(h, 1.0, [(0, 1)])
    assert r.max_identity_residual <= 1e-12 and r.ok
    r = distortion_audit(h, 1.0, [(0, 10)])
    rho10 = 2 * math.asinh(5)
    assert float(rho(10, 1, 1)) == pytest.approx(rho10, rel=1e-12)
    assert rho10 == pytest.approx(4.6252, abs=5e-4)
    # e^(asinh 5) = 5 + sqrt(26)
    assert 10 <= math.exp(rho10 / 2) == pytest.approx(5 + math.sqrt(26), rel=1e-12)
    assert r.ok and r.lower_checked == 1
    r = distortion_audit(h, 2.0, [(3, 3)])
    assert r.ok and r.lower_checked == 0


def test_distortion_all_pairs_in_z2_ball():
    h = cayley_horoball(FreeAbelian(2), 8)
    pairs = [(i, j) for i in range(0, h.base.n, 3) for j in range(h.base.n) if i < j]
    for t in (1.0, 2.0, 3.5):
        r = distortion_audit(h, t, pairs)
        assert r.ok and r.pairs == len(pairs)


# --- mesh oracle


def test_mesh_examples():
    h = HoroballSpace(path_space(3), truncation=4)
    assert mesh_oracle_distance(h, HoroPoint(0, 1), HoroPoint(0, 2), 0.1) == pytest.approx(1, abs=0.02)
    d = mesh_oracle_distance(h, HoroPoint(0, 1), HoroPoint(1, 1), 0.05)
    assert abs(d - 2 * math.asinh(0.5)) <= 0.05
    assert mesh_oracle_distance(h, HoroPoint(2, 1.7), HoroPoint(2, 1.7), 0.05) == 0
    with pytest.raises(InvalidInputError):
        MeshOracle(h, 0)


def test_mesh_within_two_steps_of_closed_form(z2, z2_mesh):
    rng = np.random.default_rng(0)
    for p, q, d in random_pairs(z2, rng, 100):
        m = z2_mesh.distance(p, q)
        assert d - 1e-9 <= m <= d + 2 * 0.05


def test_mesh_monotone_under_refinement(z2):
    oracles = [MeshOracle(z2, s) for s in (0.2, 0.1, 0.05)]
    rng = np.random.default_rng(1)
    for p, q, d in random_pairs(z2, rng, 12):
        vals = [o.distance(p, q) for o in oracles]
        assert vals[0] + 1e-12 >= vals[1] and vals[1] + 1e-12 >= vals[2] >= d - 1e-9


# --- hyperbolicity of samples


def test_delta_bounded_independent_of_truncation():
    deltas = []
    for T in (4, 6, 8):
        s = horoball_sample(FreeAbelian(2), list(range(1, T + 1)), [6] * T)
        pts = np.sort(np.random.default_rng(0).choice(s.n, 45, replace=False))
        deltas.append(four_point_delta(s, sample_count=10**6, points=pts))
    assert max(deltas) <= 1.5
    # the plain l1 ball of the same base is far from hyperbolic
    flat = horoball_sample(FreeAbelian(2), [1], [6])
    assert four_point_delta(flat, sample_count=10**6, points=np.arange(0, flat.n, 2)) > max(deltas)


# --- samples


def test_sample_ball_guard():
    s = horoball_sample(FreeAbelian(2), [1, 2, 3], [8, 8, 8])
    c = s.index_of(0, 2.0)
    assert len(s.check_ball(c, 1.0)) > 1
    with pytest.raises(ExactnessError):
        s.check_ball(c, 3.0)
    with pytest.raises(InvalidInputError):
        s.index_of(0, 9.0)


# --- layered cover


def test_layered_cover_degenerate_and_errors():
    h = cayley_horoball(FreeAbelian(2), 3, truncation=5)
    c = horoball_ball_cover(h, HoroPoint(0, 2.0), 0, 1)
    assert c.cardinality == 1
    with pytest.raises(DomainError):
        horoball_ball_cover(h, HoroPoint(0, 4.5), 1, 1)
    with pytest.raises(ExactnessError):
        horoball_ball_cover(h, HoroPoint(0, 3.0), 1, 1)


def test_layered_cover_covers_the_ball():
    h = cayley_horoball(FreeAbelian(2), int(cover_extent(2.0, 1, 1)) + 1)
    center = HoroPoint(0, 2.0)
    c = horoball_ball_cover(h, center, 1, 1)
    assert c.containment_ok
    # every point of the ball on a fine level grid lies within R'/R of a center
    D = h.base.matrix
    cv = np.asarray([p.vertex for p in c.centers])
    ct = np.asarray([p.t for p in c.centers])
    for t in np.linspace(1, 3, 21):
        inside = np.flatnonzero(rho(D[0], 2.0, t) <= 1)
        for v in inside:
            assert rho(D[v, cv].astype(float), t, ct).min() <= 1 + 1e-9


def test_layered_cover_z2_levels():
    sizes = []
    for t in range(1, 7):
        h = cayley_horoball(FreeAbelian(2), int(cover_extent(t, 1, 1)) + 1)
        c = horoball_ball_cover(h, HoroPoint(0, float(t)), 1, 1)
        assert c.containment_ok
        sizes.append(c.cardinality)
    # away from the boundary horosphere the count is level independent up to 2
    assert max(sizes[1:]) <= 2 * min(sizes[1:])


def test_layered_cover_free_group_grows():
    sizes = []
    for t in (1, 2):
        h = cayley_horoball(FreeGroup(2), int(cover_extent(t, 1, 1)))
        sizes.append(horoball_ball_cover(h, HoroPoint(0, float(t)), 1, 1).cardinality)
    assert sizes[0] < sizes[1]
