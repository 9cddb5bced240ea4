"""Combinatorial horoballs C(K) over a graph K.

A point is (v, t) with v a vertex of K and level t >= 1.  Every edge strip
[0, 1] x [1, inf) is glued isometrically to a strip of the upper half-plane in
which level t sits at height e^(t - 1).  Developing a chain of strips along a
d1-geodesic into the half-plane gives the closed form

    rho((v, t), (w, t')) = dist_H2((0, e^(t-1)), (d1(v, w), e^(t'-1))),

evaluated here as 2 asinh(sqrt(n^2 + (h' - h)^2) / (2 sqrt(h h'))), which stays
accurate for tiny distances.  ``MeshOracle`` recomputes distances by Dijkstra
on a sampled mesh of the strips and serves as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DomainError, ExactnessError, InvalidInputError, SizeCapError
from .groups import FreeAbelian, GroupModel
from .metric import (
    DEFAULT_MAX_VERTICES,
    TOL,
    FiniteMetricSpace,
    all_pairs_distances,
    cayley_ball,
    greedy_cover,
    word_metric_space,
)

# distortion constants audited on every level: d_t <= A e^(alpha rho)
# always, and d_t >= B e^(beta rho) once rho >= LOWER_FROM
UPPER = (1.0, 0.5)
LOWER = (0.5, 0.5)
LOWER_FROM = 1.0


@dataclass(frozen=True, order=True)
class HoroPoint:
    """A point of C(K): base vertex index and level."""

    vertex: int
    t: float


def height(t):
    return np.exp(np.asarray(t, dtype=float) - 1.0)


def rho(n, t1, t2):
    """Closed-form horoball distance for horizontal offset n (a d1 value)."""
    n = np.asarray(n, dtype=float)
    h1, h2 = height(t1), height(t2)
    return 2.0 * np.arcsinh(np.sqrt(n * n + (h2 - h1) ** 2) / (2.0 * np.sqrt(h1 * h2)))


def reach(t, s, r):
    """Largest d1 offset n with rho((., t), (., s)) <= r (NaN-free, 0 if none)."""
    h, hs = height(t), height(s)
    q = 4.0 * h * hs * np.sinh(r / 2.0) ** 2 - (hs - h) ** 2
    return np.sqrt(np.maximum(q, 0.0))


def peak_level(n: float, t1: float, t2: float) -> float:
    """Highest level touched by the geodesic between the two points."""
    h1, h2 = math.exp(t1 - 1), math.exp(t2 - 1)
    if n <= 0:
        return max(t1, t2)
    c = (n * n + h2 * h2 - h1 * h1) / (2 * n)
    top = math.hypot(c, h1) if 0 <= c <= n else max(h1, h2)
    return 1 + math.log(top)


def same_level_rho(dt):
    """rho between two points of one level at horosphere distance dt."""
    return 2.0 * np.arcsinh(np.asarray(dt, dtype=float) / 2.0)


class HoroballSpace:
    """C(K) over a finite base space, levels truncated to [1, truncation].

    ``extent`` is the radius around the base's basepoint inside which K
    contains every vertex of the ambient graph (inf when K is the whole graph);
    constructions that need complete d1-balls check against it.
    """

    def __init__(self, base: FiniteMetricSpace, truncation: float = math.inf, extent: float = math.inf):
        if not truncation >= 1:
            raise DomainError(f"truncation must be >= 1, got {truncation}")
        self.base = base
        self.truncation = float(truncation)
        self.extent = float(extent)

    def __repr__(self) -> str:
        return f"<HoroballSpace over {self.base.name} T={self.truncation}>"

    def check_level(self, t: float) -> float:
        t = float(t)
        if not (1 - TOL <= t <= self.truncation + TOL):
            raise DomainError(f"level {t} outside [1, {self.truncation}]")
        return t

    def point(self, label, t: float) -> HoroPoint:
        try:
            v = self.base.labels.index(label)
        except ValueError:
            raise InvalidInputError(f"{label!r} is not a vertex of {self.base.name}") from None
        return HoroPoint(v, self.check_level(t))

    def check_point(self, p: HoroPoint) -> None:
        if not 0 <= p.vertex < self.base.n:
            raise InvalidInputError(f"vertex index {p.vertex} not in {self.base.name}")
        self.check_level(p.t)

    def d1(self, v: int, w: int) -> float:
        if not self.base.certified(v, [w])[0]:
            raise ExactnessError(
                f"d1({self.base.labels[v]}, {self.base.labels[w]}) is not certified exact"
            )
        return float(self.base.dist(v, w))

    def complete_reach(self, v: int, r: float) -> bool:
        """Does K contain the full d1-ball of radius r around v?"""
        need = float(self.base.norms[v]) + r
        if self.base.integral:
            need = math.floor(need + 1e-9)
        return need <= self.extent + TOL


def horoball_distance(h: HoroballSpace, p: HoroPoint, q: HoroPoint) -> float:
    h.check_point(p)
    h.check_point(q)
    n = h.d1(p.vertex, q.vertex)
    if math.isfinite(h.truncation) and peak_level(n, p.t, q.t) > h.truncation + TOL:
        raise DomainError(
            f"geodesic between levels {p.t} and {q.t} at offset {n} rises above T={h.truncation}"
        )
    return float(rho(n, p.t, q.t))


def horosphere_distance(h: HoroballSpace, t: float, v: int, w: int) -> float:
    t = h.check_level(t)
    return math.exp(1 - t) * h.d1(v, w)


def project_to_level(p: HoroPoint, t: float, truncation: float = math.inf) -> HoroPoint:
    t = float(t)
    if not (1 - TOL <= t <= truncation + TOL):
        raise DomainError(f"level {t} outside [1, {truncation}]")
    return HoroPoint(p.vertex, t)


@dataclass
class DistortionReport:
    level: float
    pairs: int
    max_identity_residual: float
    upper_violations: int
    lower_checked: int
    lower_violations: int
    max_violation: float

    @property
    def ok(self) -> bool:
        return self.upper_violations == 0 and self.lower_violations == 0 and self.max_identity_residual <= 1e-9

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def distortion_audit(h: HoroballSpace, t: float, pairs) -> DistortionReport:
    """Check d_t = 2 sinh(rho/2) and the exponential sandwich on level t.

    ``pairs`` is an iterable of (v, w) vertex-index pairs; uncertified pairs
    are skipped.
    """
    t = h.check_level(t)
    pairs = list(pairs)
    dts, rhos = [], []
    for v, w in pairs:
        if not h.base.certified(v, [w])[0]:
            continue
        n = float(h.base.dist(v, w))
        dts.append(math.exp(1 - t) * n)
        rhos.append(float(rho(n, t, t)))
    dt = np.asarray(dts)
    r = np.asarray(rhos)
    if dt.size == 0:
        return DistortionReport(t, 0, 0.0, 0, 0, 0, 0.0)
    resid = float(np.abs(dt - 2 * np.sinh(r / 2)).max())
    A, a = UPPER
    B, b = LOWER
    up_gap = dt - A * np.exp(a * r)
    big = r >= LOWER_FROM
    lo_gap = B * np.exp(b * r[big]) - dt[big]
    worst = max(float(up_gap.max()), float(lo_gap.max()) if lo_gap.size else -math.inf, 0.0)
    return DistortionReport(
        level=t,
        pairs=int(dt.size),
        max_identity_residual=resid,
        upper_violations=int((up_gap > TOL).sum()),
        lower_checked=int(big.sum()),
        lower_violations=int((lo_gap > TOL).sum()),
        max_violation=worst,
    )


def _strip_length(ya, yb):
    """Half-plane distance between (0, ya) and (1, yb), broadcast."""
    return 2.0 * np.arcsinh(np.sqrt(1.0 + (yb - ya) ** 2) / (2.0 * np.sqrt(ya * yb)))


def base_edges(base: FiniteMetricSpace) -> np.ndarray:
    """Edges (u < v) of the graph underlying a unit-step base metric."""
    if base.graph is not None:
        indptr, indices, _ = base.graph
        src = np.repeat(np.arange(base.n), np.diff(indptr))
        e = np.stack([src, indices], axis=1)
    else:
        rows = []
        for i in range(base.n):
            js = np.flatnonzero(np.abs(np.asarray(base.row(i), dtype=float) - 1.0) <= TOL)
            rows.append(np.stack([np.full(js.size, i), js], axis=1))
        e = np.vstack(rows) if rows else np.zeros((0, 2), dtype=int)
    e = e[e[:, 0] < e[:, 1]]
    return np.unique(e, axis=0)


class MeshOracle:
    """Dijkstra on a mesh of the glued strips.

    Nodes sit on the vertex lines {v} x [1, T] at levels 1, 1 + step, ...
    (plus T); consecutive nodes on a line are joined vertically, and every
    pair of nodes on the two sides of a strip is joined by their exact
    half-plane distance inside that strip.  Every mesh path is a real path in
    C(K), so the result bounds rho from above, and halving ``step`` refines
    the mesh, so the result can only decrease.  Query endpoints are inserted
    as extra nodes on their lines.
    """

    def __init__(self, h: HoroballSpace, step: float, max_edges: int = 20_000_000):
        if step <= 0:
            raise InvalidInputError(f"mesh step must be positive, got {step}")
        if not math.isfinite(h.truncation):
            raise DomainError("the mesh oracle needs a finite truncation")
        self.h = h
        self.step = float(step)
        T = h.truncation
        k = int(math.floor((T - 1) / step + 1e-9))
        levels = 1 + step * np.arange(k + 1)
        if T - levels[-1] > 1e-9:
            levels = np.append(levels, T)
        self.levels = levels
        self.edges = base_edges(h.base)
        M = len(levels)
        self.M = M
        n_arcs = 2 * (len(self.edges) * M * M + h.base.n * (M - 1))
        if n_arcs > max_edges:
            raise SizeCapError(f"mesh needs {n_arcs} arcs, cap is {max_edges}", radius=None)
        y = height(levels)
        W = _strip_length(y[:, None], y[None, :])
        u, v = self.edges[:, 0], self.edges[:, 1]
        ar = np.arange(M)
        shape = (len(u), M, M)
        a = np.broadcast_to(u[:, None, None] * M + ar[None, :, None], shape)
        b = np.broadcast_to(v[:, None, None] * M + ar[None, None, :], shape)
        w = np.broadcast_to(W, shape)
        verts = np.arange(h.base.n)
        va = (verts[:, None] * M + np.arange(M - 1)[None, :]).ravel()
        vw = np.broadcast_to(np.diff(levels), (h.base.n, M - 1)).ravel()
        self._src = np.concatenate([a.ravel(), va])
        self._dst = np.concatenate([b.ravel(), va + 1])
        self._w = np.concatenate([w.ravel(), vw])
        self._nbrs = [[] for _ in range(h.base.n)]
        for x, z in self.edges:
            self._nbrs[x].append(z)
            self._nbrs[z].append(x)

    def _attach(self, p: HoroPoint, node: int):
        """Arcs from an inserted endpoint node to the mesh."""
        M, L = self.M, self.levels
        src, dst, w = [], [], []
        k = int(np.searchsorted(L, p.t))
        for j in (k - 1, k):
            if 0 <= j < M:
                src.append(node)
                dst.append(p.vertex * M + j)
                w.append(abs(L[j] - p.t))
        y = height(p.t)
        ys = height(L)
        for z in self._nbrs[p.vertex]:
            src.extend([node] * M)
            dst.extend(z * M + np.arange(M))
            w.extend(_strip_length(y, ys))
        return src, dst, w

    def distance(self, p: HoroPoint, q: HoroPoint) -> float:
        h = self.h
        h.check_point(p)
        h.check_point(q)
        if p == q:
            return 0.0
        nn = h.base.n * self.M
        P, Q = nn, nn + 1
        s1, d1, w1 = self._attach(p, P)
        s2, d2, w2 = self._attach(q, Q)
        src = [*s1, *s2]
        dst = [*d1, *d2]
        w = [*w1, *w2]
        if p.vertex == q.vertex:
            src.append(P)
            dst.append(Q)
            w.append(abs(p.t - q.t))
        elif q.vertex in self._nbrs[p.vertex]:
            src.append(P)
            dst.append(Q)
            w.append(float(_strip_length(height(p.t), height(q.t))))
        S = np.concatenate([self._src, np.asarray(src, dtype=np.int64)])
        D = np.concatenate([self._dst, np.asarray(dst, dtype=np.int64)])
        Wt = np.concatenate([self._w, np.asarray(w, dtype=float)])
        # zero-length arcs (endpoint on a mesh level) must survive the sparse format
        Wt = np.maximum(Wt, 1e-300)
        g = coo_matrix((Wt, (S, D)), shape=(nn + 2, nn + 2)).tocsr()
        out = dijkstra(g, directed=False, indices=P)
        return float(out[Q]) if out[Q] > 1e-200 else 0.0


def mesh_oracle_distance(h: HoroballSpace, p: HoroPoint, q: HoroPoint, step: float) -> float:
    return MeshOracle(h, step).distance(p, q)


def cayley_horoball(
    model: GroupModel, radius: int, truncation: float = math.inf, max_vertices: int = DEFAULT_MAX_VERTICES
) -> HoroballSpace:
    """C(K) over the radius-r Cayley ball.  With a closed-form word length
    every d1 is exact; otherwise ball-intrinsic distances are certified by
    the usual midpoint rule."""
    if isinstance(model, FreeAbelian):
        # lattice ball straight from numpy, ordered by norm then coordinates
        pts = _lattice_points(model.n, radius, 1)
        if len(pts) > max_vertices:
            raise SizeCapError(f"ball of {model.name} exceeds {max_vertices} vertices", radius=radius)
        base = word_metric_space(model, pts, name=f"word({model.name},{radius})")
        return HoroballSpace(base, truncation, extent=radius)
    ball = cayley_ball(model, radius, max_vertices=max_vertices)
    if model.has_word_length:
        base = word_metric_space(model, ball.vertices, name=f"word({model.name},{radius})")
    else:
        base = all_pairs_distances(ball)
    return HoroballSpace(base, truncation, extent=radius)


@dataclass
class LayeredCover:
    """Union of per-horosphere greedy covers of an ambient ball."""

    center: HoroPoint
    R_prime: float
    R: float
    ambient_radius: float
    slice_spacing: float
    slice_levels: list = field(default_factory=list)
    slice_sizes: list = field(default_factory=list)
    slice_counts: list = field(default_factory=list)
    centers: list = field(default_factory=list)
    containment_ok: bool = True
    max_slice_spread: float = 0.0

    @property
    def cardinality(self) -> int:
        return len(self.centers)

    def to_dict(self) -> dict:
        return {
            "center": [self.center.vertex, self.center.t],
            "R_prime": self.R_prime,
            "R": self.R,
            "ambient_radius": self.ambient_radius,
            "slice_spacing": self.slice_spacing,
            "slice_levels": [float(x) for x in self.slice_levels],
            "slice_sizes": self.slice_sizes,
            "slice_counts": self.slice_counts,
            "cardinality": self.cardinality,
            "containment_ok": self.containment_ok,
            "max_slice_spread": self.max_slice_spread,
        }


def cover_extent(center_level: float, R_prime: float, R: float) -> float:
    """d1 radius around the center vertex that horoball_ball_cover reads."""
    if R_prime == 0:
        return 0.0
    s = min(1 / (2 * R_prime), R_prime / R)
    lo = max(1.0, center_level - R_prime)
    k = int(math.ceil((center_level + R_prime - lo) / s - 1e-12))
    return max(float(reach(center_level, lo + s * i, R_prime + s / 2)) for i in range(k + 1))


def horoball_ball_cover(h: HoroballSpace, center: HoroPoint, R_prime: float, R: float) -> LayeredCover:
    """Cover B(center, R') by balls of radius R'/R, one horosphere at a time.

    Slices sit at spacing s = min(1/(2R'), R'/R) from max(1, t - R') up to
    t + R'; every point of the ball lies within s/2 of a slice level.  Slice
    k collects the vertices v with rho((v, t_k), center) <= R' + s/2 (the
    vertical projections of nearby ball points) and covers them greedily in
    d1 at the radius 2 sinh(r/2) e^(t_k - 1), r = R'/R - s/2, i.e. by
    ambient balls of radius r on the slice; moving a ball point vertically
    onto its slice costs at most s/2, so the union covers B at radius R'/R.
    The exact slice section (rho <= R') is also checked to lie in a d_t-ball
    of radius e^(R') around any of its points.
    """
    h.check_point(center)
    if R_prime < 0 or R <= 0:
        raise DomainError(f"need R' >= 0 and R > 0, got {R_prime}, {R}")
    if R_prime == 0:
        return LayeredCover(center, 0.0, R, 0.0, 0.0, [center.t], [1], [1], [center])
    amb = R_prime / R
    s = min(1 / (2 * R_prime), amb)
    r_slice = amb - s / 2
    lo = max(1.0, center.t - R_prime)
    hi = center.t + R_prime
    if hi > h.truncation + TOL:
        raise DomainError(f"ball reaches level {hi} above T={h.truncation}")
    k = int(math.ceil((hi - lo) / s - 1e-12))
    levels = [lo + s * i for i in range(k + 1)]
    out = LayeredCover(center, float(R_prime), float(R), amb, s)
    base = h.base
    for tk in levels:
        xr = float(reach(center.t, tk, R_prime + s / 2))
        if xr <= 0 and abs(tk - center.t) > R_prime + s / 2:
            continue
        if not h.complete_reach(center.vertex, xr):
            raise ExactnessError(
                f"slice at level {tk:.4g} needs d1 radius {xr:.4g} around the center, "
                f"beyond the base extent {h.extent}"
            )
        sl = base.ball(center.vertex, xr)
        d = np.asarray(base.row(center.vertex), dtype=float)[sl]
        sl = sl[rho(d, center.t, tk) <= R_prime + s / 2 + TOL]
        if sl.size == 0:
            continue
        cut = 2 * math.sinh(r_slice / 2) * math.exp(tk - 1)
        cs = greedy_cover(base, sl, cut)
        exact = sl[rho(np.asarray(base.row(center.vertex), dtype=float)[sl], center.t, tk) <= R_prime + TOL]
        if exact.size:
            spread = math.exp(1 - tk) * float(np.asarray(base.row(int(exact[0])), dtype=float)[exact].max())
            out.max_slice_spread = max(out.max_slice_spread, spread)
            if spread > math.exp(R_prime) + TOL:
                out.containment_ok = False
        out.slice_levels.append(tk)
        out.slice_sizes.append(int(sl.size))
        out.slice_counts.append(len(cs))
        out.centers.extend(HoroPoint(int(c), tk) for c in cs)
    return out


class HoroSample(FiniteMetricSpace):
    """A finite set of points of C(K) with the closed-form metric.

    ``reaches[s]`` records, for each sampled level s, that the sample holds
    every allowed vertex v at level s with |v| <= reaches[s] (allowed vertices
    are all of K, or a sub-net when ``net_spacing`` is set, which turns the
    sample into a net of C(K) rather than a subset of full balls).  Balls are
    complete (relative to the sampled levels and net) when their d1 reach on
    every sampled level stays inside these radii.
    """

    def __init__(self, h: HoroballSpace, points, reaches: dict, name: str = "horoball-sample"):
        self.h = h
        self.points = list(points)
        self.reaches = dict(reaches)
        verts = np.asarray([p.vertex for p in self.points], dtype=np.int64)
        lev = np.asarray([p.t for p in self.points], dtype=float)
        self.vertex_index = verts
        self.level = lev
        base = h.base
        labels = [f"{base.labels[p.vertex]}@{p.t:g}" for p in self.points]

        def row_fn(i, limit):
            d = np.asarray(base.row(int(verts[i])), dtype=float)[verts]
            return rho(d, lev[i], lev)

        bp = 0
        for i, p in enumerate(self.points):
            if p.vertex == base.basepoint and p.t == 1.0:
                bp = i
                break
        super().__init__(labels, row_fn=row_fn, basepoint=bp, name=name)

    def certified(self, i: int, js) -> np.ndarray:
        return self.h.base.certified(int(self.vertex_index[i]), self.vertex_index[np.asarray(js)])

    def index_of(self, vertex: int, t: float) -> int:
        hits = np.flatnonzero((self.vertex_index == vertex) & (np.abs(self.level - t) <= 1e-12))
        if hits.size == 0:
            raise InvalidInputError(f"({self.h.base.labels[vertex]}, {t}) is not in the sample")
        return int(hits[0])

    def check_ball(self, center: int, r: float) -> np.ndarray:
        v = int(self.vertex_index[center])
        t = float(self.level[center])
        nv = float(self.h.base.norms[v])
        for s, rs in self.reaches.items():
            xr = float(reach(t, s, r))
            # word lengths are integers, so only floor(|v| + reach) matters
            if abs(s - t) <= r + TOL and math.floor(nv + xr + 1e-9) > rs + TOL:
                raise ExactnessError(
                    f"ball of radius {r} around {self.labels[center]} needs vertices of norm "
                    f"{nv + xr:.4g} on level {s:g}, sample holds {rs:.4g}"
                )
        idx = self.ball(center, r)
        if not self.certified(center, idx).all():
            raise ExactnessError(f"uncertified base distance inside the ball at {self.labels[center]}")
        return idx


def _lattice_points(n: int, radius: int, spacing: int) -> list:
    """Points of spacing * Z^n with l1 norm <= radius, ordered by norm then
    lexicographically."""
    k = radius // spacing
    axes = [np.arange(-k, k + 1) * spacing] * n
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    norm = np.abs(grid).sum(axis=1)
    grid = grid[norm <= radius]
    norm = norm[norm <= radius]
    order = np.lexsort(tuple(grid[:, j] for j in range(n - 1, -1, -1)) + (norm,))
    return [tuple(int(x) for x in row) for row in grid[order]]


def horoball_sample(
    model: GroupModel,
    levels,
    reaches,
    net_spacing=None,
    max_vertices: int = DEFAULT_MAX_VERTICES,
) -> HoroSample:
    """Sample of C(G) with points (g, s) for each level s and each g with
    |g| <= reaches[s].

    ``net_spacing`` (free abelian only) maps a level to an integer m; level s
    then keeps only g in m Z^n.  The base space is the exact word metric on
    the union of the kept elements.
    """
    levels = [float(s) for s in levels]
    reaches = [int(math.floor(r + 1e-9)) for r in reaches]
    if len(levels) != len(reaches) or not levels:
        raise InvalidInputError("need one reach per level")
    if not model.has_word_length:
        raise InvalidInputError(f"{model.name} has no closed-form word metric for horoball samples")
    per_level = []
    if net_spacing is not None:
        if not isinstance(model, FreeAbelian):
            raise InvalidInputError("net sampling is implemented for free abelian groups only")
        for s, rr in zip(levels, reaches):
            per_level.append(_lattice_points(model.n, max(rr, 0), int(net_spacing(s))))
        seen, elements = set(), []
        for pts in per_level:
            for g in pts:
                if g not in seen:
                    seen.add(g)
                    elements.append(g)
        elements.sort(key=lambda g: (model.word_length(g), g))
        if len(elements) > max_vertices:
            raise SizeCapError(f"sample base has {len(elements)} elements", radius=max(reaches))
    else:
        ball = cayley_ball(model, max(max(reaches), 0), max_vertices=max_vertices)
        elements = ball.vertices
        wl = ball.word_length
        per_level = [elements[: int(np.searchsorted(wl, rr, side="right"))] if rr >= 0 else [] for rr in reaches]
    index = {g: i for i, g in enumerate(elements)}
    base = word_metric_space(model, elements, name=f"word({model.name})")
    h = HoroballSpace(base, extent=max(reaches) if net_spacing is None else math.inf)
    points = [HoroPoint(index[g], s) for s, pts in zip(levels, per_level) for g in pts]
    if len(points) > max_vertices:
        raise SizeCapError(f"sample has {len(points)} points", radius=max(reaches))
    return HoroSample(
        h,
        points,
        {s: float(rr) for s, rr in zip(levels, reaches)},
        name=f"C({model.name})-sample",
    )


def sample_for_balls(
    model: GroupModel,
    centers,
    radius: float,
    top_level: int | None = None,
    net_spacing=None,
    max_vertices: int = DEFAULT_MAX_VERTICES,
) -> HoroSample:
    """Integer-level sample of C(G) holding the balls B((g, t), radius) for
    every (|g|, t) in ``centers`` (pairs of word length and level)."""
    centers = list(centers)
    t_top = max(t for _, t in centers) + radius if top_level is None else top_level
    levels = list(range(1, int(math.floor(t_top + 1e-9)) + 1))
    reaches = []
    for s in levels:
        r = -1.0
        for g_norm, t in centers:
            if abs(s - t) <= radius + TOL:
                r = max(r, g_norm + float(reach(t, s, radius)))
        reaches.append(r)
    keep = [(s, r) for s, r in zip(levels, reaches) if r >= 0]
    return horoball_sample(
        model, [s for s, _ in keep], [r for _, r in keep], net_spacing=net_spacing, max_vertices=max_vertices
    )
