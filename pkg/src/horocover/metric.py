"""Finite metric spaces, Cayley balls, and the covering/packing engine.

Distances from a truncated Cayley ball are only trustworthy for pairs whose
geodesics cannot leave the ball.  A geodesic from x to y in the full Cayley
graph passes only through points z with |z| <= (|x| + |y| + d(x, y)) / 2, so a
pair is certified exact when that quantity is at most the ball radius.
Uncertified pairs carry ball-intrinsic distances, which bound the true
distance from above.
"""

from __future__ import annotations

import csv
import heapq
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra, shortest_path

from .errors import ExactnessError, InvalidInputError, SizeCapError
from .groups import FreeAbelian, FreeGroup, GroupModel

DEFAULT_MAX_VERTICES = 5_000_000

# slack for comparisons of real-valued distances
TOL = 1e-9


class FiniteMetricSpace:
    """Labeled points with a distance function.

    Distances come either from a dense matrix or from a row callback
    ``row_fn(i, limit) -> ndarray`` evaluated lazily (graph searches, closed
    forms).  ``exactness_radius`` is the certification radius described in the
    module docstring; ``math.inf`` means every distance is exact.
    """

    def __init__(
        self,
        labels,
        matrix=None,
        *,
        row_fn=None,
        exactness_radius: float = math.inf,
        basepoint: int = 0,
        integral: bool = False,
        name: str = "space",
        cache_rows: int = 4096,
        graph=None,
    ):
        if (matrix is None) == (row_fn is None):
            raise InvalidInputError("give exactly one of matrix or row_fn")
        self.labels = list(labels)
        self.n = len(self.labels)
        if matrix is not None:
            matrix = np.asarray(matrix)
            if matrix.shape != (self.n, self.n):
                raise InvalidInputError(
                    f"distance matrix has shape {matrix.shape}, expected {(self.n, self.n)}"
                )
        if not 0 <= basepoint < max(self.n, 1):
            raise InvalidInputError(f"basepoint {basepoint} out of range")
        self._matrix = matrix
        self._row_fn = row_fn
        self._cache: dict[int, np.ndarray] = {}
        self._cache_rows = cache_rows
        self.exactness_radius = float(exactness_radius)
        self.basepoint = basepoint
        self.integral = integral
        self.name = name
        self._norms = None
        # optional (indptr, indices, weights-or-None) for graph-backed spaces
        self.graph = graph

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"<FiniteMetricSpace {self.name!r} n={self.n} exact<= {self.exactness_radius}>"

    def row(self, i: int, limit: float | None = None) -> np.ndarray:
        """Distances from point i to every point.

        With ``limit`` set, entries above the limit may be reported as inf.
        """
        if self._matrix is not None:
            return self._matrix[i]
        if limit is not None:
            return self._row_fn(i, limit)
        r = self._cache.get(i)
        if r is None:
            r = self._row_fn(i, None)
            if len(self._cache) >= self._cache_rows:
                self._cache.pop(next(iter(self._cache)))
            self._cache[i] = r
        return r

    def dist(self, i: int, j: int):
        return self.row(i)[j]

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.vstack([self._row_fn(i, None) for i in range(self.n)])
            self._row_fn = None
            self._cache.clear()
        return self._matrix

    @property
    def norms(self) -> np.ndarray:
        """Distance of every point to the basepoint."""
        if self._norms is None:
            self._norms = np.asarray(self.row(self.basepoint), dtype=float)
        return self._norms

    @property
    def all_exact(self) -> bool:
        return math.isinf(self.exactness_radius)

    def certified(self, i: int, js) -> np.ndarray:
        """Boolean mask: is d(i, j) certified exact, for each j in js."""
        js = np.asarray(js)
        if self.all_exact:
            return np.ones(js.shape, dtype=bool)
        nr = self.norms
        d = np.asarray(self.row(i), dtype=float)[js]
        return (nr[i] + nr[js] + d) / 2 <= self.exactness_radius + TOL

    def certified_matrix(self) -> np.ndarray:
        if self.all_exact:
            return np.ones((self.n, self.n), dtype=bool)
        nr = self.norms
        d = np.asarray(self.matrix, dtype=float)
        return (nr[:, None] + nr[None, :] + d) / 2 <= self.exactness_radius + TOL

    def ball(self, center: int, r: float) -> np.ndarray:
        """Indices (ascending) of points within distance r of center."""
        d = self.row(center, limit=r)
        return np.flatnonzero(d <= r + TOL)

    def check_ball(self, center: int, r: float) -> np.ndarray:
        """Return the ball, raising ExactnessError unless it is complete and
        all of its internal distances are certified."""
        idx = self.ball(center, r)
        if self.all_exact:
            return idx
        c = self.norms[center]
        if c + r > self.exactness_radius + TOL:
            raise ExactnessError(
                f"ball of radius {r} around {self.labels[center]} reaches past the "
                f"certified radius {self.exactness_radius}"
            )
        if c + 2 * r <= self.exactness_radius + TOL:
            return idx
        for i in idx:
            ok = self.certified(i, idx)
            if not ok.all():
                j = idx[np.argmin(ok)]
                raise ExactnessError(
                    f"distance {self.labels[i]} -> {self.labels[j]} inside the ball is not certified"
                )
        return idx

    def subspace(self, indices, name: str | None = None) -> "FiniteMetricSpace":
        """Dense restriction to the given points (exactness is not carried over
        unless the parent is exact everywhere)."""
        idx = np.asarray(indices, dtype=int)
        sub = np.vstack([np.asarray(self.row(i))[idx] for i in idx]) if len(idx) else np.zeros((0, 0))
        if not self.all_exact:
            for a, i in enumerate(idx):
                if not self.certified(i, idx).all():
                    raise ExactnessError(f"subspace contains uncertified pairs at {self.labels[i]}")
        return FiniteMetricSpace(
            [self.labels[i] for i in idx],
            sub,
            integral=self.integral,
            name=name or f"{self.name}[sub]",
        )

    def to_csv(self, path) -> None:
        m = self.matrix
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.labels)
            for r in m:
                w.writerow([_fmt_num(x, self.integral) for x in r])

    @classmethod
    def from_csv(cls, path, *, name: str | None = None) -> "FiniteMetricSpace":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise InvalidInputError(f"{path}: empty distance file")
        labels = rows[0]
        try:
            raw = [[float(x) for x in r] for r in rows[1:]]
        except ValueError as exc:
            raise InvalidInputError(f"{path}: non-numeric distance ({exc})") from None
        m = np.asarray(raw, dtype=float).reshape(len(raw), -1) if raw else np.zeros((0, 0))
        if m.shape != (len(labels), len(labels)):
            raise InvalidInputError(f"{path}: matrix is {m.shape}, header has {len(labels)} labels")
        if (m < 0).any() or not np.array_equal(m, m.T) or (np.diag(m) != 0).any():
            raise InvalidInputError(f"{path}: not a symmetric nonnegative matrix with zero diagonal")
        integral = bool(np.all(m == np.round(m)))
        if integral:
            m = m.astype(np.int64)
        return cls(labels, m, integral=integral, name=name or Path(path).stem)


def _fmt_num(x, integral: bool) -> str:
    if integral:
        return str(int(x))
    return repr(float(x))


@dataclass
class BallGraph:
    """The radius-R ball of a Cayley graph in BFS order."""

    model: GroupModel
    radius: int
    vertices: list
    index: dict
    word_length: np.ndarray
    arc_src: np.ndarray
    arc_dst: np.ndarray
    arc_gen: np.ndarray
    sphere_sizes: list
    _adjacency: csr_matrix | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def labels(self) -> list[str]:
        return [self.model.format(v) for v in self.vertices]

    def adjacency(self) -> csr_matrix:
        if self._adjacency is None:
            n = len(self.vertices)
            data = np.ones(len(self.arc_src), dtype=np.int8)
            a = csr_matrix((data, (self.arc_src, self.arc_dst)), shape=(n, n))
            a.data[:] = 1
            self._adjacency = a
        return self._adjacency

    def metric(self, cache_rows: int = 256) -> FiniteMetricSpace:
        """Lazy ball-intrinsic graph metric (rows by BFS on demand)."""
        adj = self.adjacency()

        def row_fn(i, limit):
            kw = {} if limit is None else {"limit": float(limit)}
            return dijkstra(adj, directed=False, indices=i, unweighted=True, **kw)

        return FiniteMetricSpace(
            self.labels,
            row_fn=row_fn,
            exactness_radius=self.radius,
            basepoint=0,
            integral=True,
            name=f"ball({self.model.name},{self.radius})",
            cache_rows=cache_rows,
            graph=(adj.indptr, adj.indices, None),
        )

    def write_csv(self, edges_path, vertices_path) -> None:
        labels = self.labels
        gen_names = self.model.generator_names()
        with open(edges_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["src", "dst", "generator"])
            for s, d, g in zip(self.arc_src, self.arc_dst, self.arc_gen):
                w.writerow([labels[s], labels[d], gen_names[g]])
        with open(vertices_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "word_length"])
            for lab, ell in zip(labels, self.word_length):
                w.writerow([lab, int(ell)])


def cayley_ball(model: GroupModel, R: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> BallGraph:
    """Exact radius-R ball of the word metric, discovered breadth first."""
    if not isinstance(R, (int, np.integer)) or R < 0:
        raise InvalidInputError(f"radius must be a nonnegative integer, got {R!r}")
    gens = model.generators
    mul = model.mul
    e = model.identity()
    vertices = [e]
    index = {e: 0}
    lengths = [0]
    sphere = [1]
    src, dst, lab = [], [], []
    frontier = [0]
    for ell in range(1, R + 1):
        new = []
        for i in frontier:
            g = vertices[i]
            for k, s in enumerate(gens):
                h = mul(g, s)
                j = index.get(h)
                if j is None:
                    if len(vertices) >= max_vertices:
                        raise SizeCapError(
                            f"ball of {model.name} exceeds {max_vertices} vertices at radius {ell}",
                            radius=ell,
                        )
                    j = len(vertices)
                    index[h] = j
                    vertices.append(h)
                    lengths.append(ell)
                    new.append(j)
                src.append(i)
                dst.append(j)
                lab.append(k)
        sphere.append(len(new))
        frontier = new
    # arcs leaving the outer sphere
    for i in frontier:
        g = vertices[i]
        for k, s in enumerate(gens):
            j = index.get(mul(g, s))
            if j is not None:
                src.append(i)
                dst.append(j)
                lab.append(k)
    return BallGraph(
        model=model,
        radius=int(R),
        vertices=vertices,
        index=index,
        word_length=np.asarray(lengths, dtype=np.int64),
        arc_src=np.asarray(src, dtype=np.int64),
        arc_dst=np.asarray(dst, dtype=np.int64),
        arc_gen=np.asarray(lab, dtype=np.int64),
        sphere_sizes=sphere,
    )


def all_pairs_distances(g: BallGraph) -> FiniteMetricSpace:
    """Dense ball-intrinsic distance matrix, certified up to the ball radius."""
    d = shortest_path(g.adjacency(), method="D", directed=False, unweighted=True)
    return FiniteMetricSpace(
        g.labels,
        d.astype(np.int32),
        exactness_radius=g.radius,
        basepoint=0,
        integral=True,
        name=f"ball({g.model.name},{g.radius})",
    )


def word_metric_space(model: GroupModel, elements, basepoint: int = 0, name: str | None = None):
    """Exact word metric on an explicit finite set of elements.

    Needs a closed-form word length; free abelian and free groups use
    vectorized kernels, other families fall back to a per-pair loop.
    """
    elements = list(elements)
    if not model.has_word_length:
        raise InvalidInputError(f"{model.name} has no closed-form word metric")
    if isinstance(model, FreeAbelian):
        coords = np.asarray(elements, dtype=np.int64).reshape(len(elements), model.n)

        def row_fn(i, limit):
            return np.abs(coords - coords[i]).sum(axis=1)

    elif isinstance(model, FreeGroup):
        lens = np.fromiter((len(w) for w in elements), dtype=np.int64, count=len(elements))
        width = int(lens.max()) if len(elements) else 0
        words = np.zeros((len(elements), max(width, 1)), dtype=np.int16)
        for r, w in enumerate(elements):
            words[r, : len(w)] = w

        def row_fn(i, limit):
            same = words == words[i]
            lcp = np.cumprod(same, axis=1).sum(axis=1)
            lcp = np.minimum(np.minimum(lcp, lens), lens[i])
            return lens + lens[i] - 2 * lcp

    else:
        inv, mul, wl = model.inv, model.mul, model.word_length

        def row_fn(i, limit):
            gi = inv(elements[i])
            return np.fromiter((wl(mul(gi, h)) for h in elements), dtype=np.int64, count=len(elements))

    return FiniteMetricSpace(
        [model.format(g) for g in elements],
        row_fn=row_fn,
        basepoint=basepoint,
        integral=True,
        name=name or f"word({model.name})",
    )


def four_point_delta(m: FiniteMetricSpace, sample_count: int = 100_000, seed: int = 0, points=None) -> float:
    """Largest (L1 - L2) / 2 over quadruples, where L1 >= L2 >= L3 are the
    three pairwise sums.  Exhaustive when C(n, 4) <= sample_count, otherwise
    over ``sample_count`` seeded random quadruples (a lower bound)."""
    idx = np.arange(m.n) if points is None else np.asarray(points, dtype=int)
    n = len(idx)
    if n < 4:
        raise InvalidInputError(f"four-point delta needs at least 4 points, got {n}")
    D = np.asarray(m.matrix if points is None else np.vstack([np.asarray(m.row(i))[idx] for i in idx]), dtype=float)
    best = 0.0
    if math.comb(n, 4) <= sample_count:
        chunks = _combination_chunks(n, 200_000)
    else:
        rng = np.random.default_rng(seed)
        quads = rng.integers(0, n, size=(sample_count, 4))
        chunks = (quads[k : k + 200_000] for k in range(0, sample_count, 200_000))
    for q in chunks:
        w, x, y, z = q.T
        s = np.stack(
            [D[w, x] + D[y, z], D[w, y] + D[x, z], D[w, z] + D[x, y]],
            axis=1,
        )
        s.sort(axis=1)
        best = max(best, float(((s[:, 2] - s[:, 1]) / 2).max()))
    return best


def _combination_chunks(n: int, size: int):
    it = itertools.combinations(range(n), 4)
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, size)), dtype=np.int64)
        if block.size == 0:
            return
        yield block.reshape(-1, 4)


def _subset_array(m: FiniteMetricSpace, subset) -> np.ndarray:
    sub = np.unique(np.asarray(list(subset) if not isinstance(subset, np.ndarray) else subset, dtype=int))
    if sub.size == 0:
        raise InvalidInputError("subset must be nonempty")
    if sub[0] < 0 or sub[-1] >= m.n:
        raise InvalidInputError("subset index out of range")
    return sub


def greedy_cover(m: FiniteMetricSpace, subset, r: float) -> list[int]:
    """Farthest-first centers whose r-balls cover ``subset``.

    Starts at the lowest-index point; each next center is the point farthest
    from the chosen centers, ties to the lower index.
    """
    if r <= 0:
        raise InvalidInputError(f"cover radius must be positive, got {r}")
    sub = _subset_array(m, subset)
    first = int(sub[0])
    centers = [first]
    if m.graph is not None:
        # distances to the nearest center for every vertex, improved by pruned searches
        mind = np.asarray(m.row(first), dtype=float).copy()
        while True:
            k = int(np.argmax(mind[sub]))
            if mind[sub[k]] <= r + TOL:
                return centers
            c = int(sub[k])
            centers.append(c)
            _improve(m.graph, c, mind)
    mind = np.asarray(m.row(first), dtype=float)[sub]
    while True:
        k = int(np.argmax(mind))
        if mind[k] <= r + TOL:
            return centers
        c = int(sub[k])
        centers.append(c)
        mind = np.minimum(mind, np.asarray(m.row(c, limit=mind[k]), dtype=float)[sub])


def max_packing(m: FiniteMetricSpace, subset, s: float) -> list[int]:
    """Greedy s-separated subset, scanning in index order."""
    if s <= 0:
        raise InvalidInputError(f"separation must be positive, got {s}")
    sub = _subset_array(m, subset)
    chosen = []
    if m.graph is not None:
        blocked_all = np.zeros(m.n, dtype=bool)
        for i in sub:
            if blocked_all[i]:
                continue
            chosen.append(int(i))
            for j in _within(m.graph, int(i), s - TOL):
                blocked_all[j] = True
        return chosen
    blocked = np.zeros(len(sub), dtype=bool)
    for k, i in enumerate(sub):
        if blocked[k]:
            continue
        chosen.append(int(i))
        d = np.asarray(m.row(int(i), limit=s), dtype=float)[sub]
        blocked |= d < s - TOL
    return chosen


def _improve(graph, source: int, mind: np.ndarray) -> None:
    """Lower ``mind`` to min(mind, d(source, .)), exploring only vertices
    whose value improves (no shortest path runs through an unimproved one)."""
    indptr, indices, weights = graph
    mind[source] = 0.0
    if weights is None:
        q = deque([source])
        while q:
            x = q.popleft()
            nd = mind[x] + 1.0
            for y in indices[indptr[x] : indptr[x + 1]]:
                if nd < mind[y]:
                    mind[y] = nd
                    q.append(y)
        return
    heap = [(0.0, source)]
    while heap:
        dx, x = heapq.heappop(heap)
        if dx > mind[x]:
            continue
        lo, hi = indptr[x], indptr[x + 1]
        for y, w in zip(indices[lo:hi], weights[lo:hi]):
            nd = dx + w
            if nd < mind[y]:
                mind[y] = nd
                heapq.heappush(heap, (nd, y))


def _within(graph, source: int, radius: float) -> list[int]:
    """Vertices at distance strictly less than ``radius`` from source."""
    indptr, indices, weights = graph
    dist = {source: 0.0}
    if weights is None:
        q = deque([source])
        while q:
            x = q.popleft()
            nd = dist[x] + 1.0
            if nd >= radius:
                continue
            for y in indices[indptr[x] : indptr[x + 1]]:
                if y not in dist:
                    dist[y] = nd
                    q.append(y)
        return [x for x, d in dist.items() if d < radius]
    heap = [(0.0, source)]
    done = set()
    while heap:
        dx, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        lo, hi = indptr[x], indptr[x + 1]
        for y, w in zip(indices[lo:hi], weights[lo:hi]):
            nd = dx + w
            if nd < radius and nd < dist.get(y, math.inf):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return sorted(done)
