"""Free products and cusped spaces: a Cayley ball with combinatorial
horoballs glued along the pieces of parabolic cosets."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra, shortest_path

from .errors import InvalidElementError, InvalidInputError
from .groups import GroupModel
from .horoball import HoroballSpace
from .metric import DEFAULT_MAX_VERTICES, BallGraph, FiniteMetricSpace, cayley_ball


class FreeProduct(GroupModel):
    """A * B; an element is a tuple of syllables (side, g) with sides
    alternating between 0 (A) and 1 (B) and every g a non-identity element.

    Generators are A's generators (as one-syllable words) followed by B's.
    """

    def __init__(self, left: GroupModel, right: GroupModel):
        self.factors = (left, right)
        self.name = f"free-product({left.name},{right.name})"
        self.generators = tuple(((0, s),) for s in left.generators) + tuple(
            ((1, s),) for s in right.generators
        )

    def identity(self):
        return ()

    def mul(self, a, b):
        a = list(a)
        b = list(b)
        while a and b and a[-1][0] == b[0][0]:
            side = a[-1][0]
            f = self.factors[side]
            g = f.mul(a.pop()[1], b.pop(0)[1])
            if g != f.identity():
                a.append((side, g))
                break
        return tuple(a + b)

    def inv(self, a):
        return tuple((side, self.factors[side].inv(g)) for side, g in reversed(a))

    def is_canonical(self, a) -> bool:
        if not isinstance(a, tuple):
            return False
        prev = None
        for syl in a:
            if not (isinstance(syl, tuple) and len(syl) == 2 and syl[0] in (0, 1)):
                return False
            side, g = syl
            f = self.factors[side]
            if side == prev or not f.is_canonical(g) or g == f.identity():
                return False
            prev = side
        return True

    def format(self, a) -> str:
        if not a:
            return "e"
        return "*".join(self.factors[side].format(g) for side, g in a)

    def word_length(self, a) -> int:
        return sum(self.factors[side].word_length(g) for side, g in a)


@dataclass
class CuspedSpace:
    """Glued graph: base ball vertices at level 1, horoball vertices (v, n)
    for n = 2..floor(T) over every parabolic coset piece."""

    base_ball: BallGraph
    parabolic: tuple
    truncation: float
    components: list
    horoballs: list
    labels: list
    level: np.ndarray
    coset_id: np.ndarray
    glue: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    metric: FiniteMetricSpace = field(repr=False)

    @property
    def horoball_count(self) -> int:
        return len(self.components)

    @property
    def vertex_count(self) -> int:
        return len(self.labels)

    def write_csv(self, edges_path, vertices_path) -> None:
        lab = self.labels
        with open(edges_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["src", "dst", "weight"])
            for (a, b), x in zip(self.edges, self.weights):
                w.writerow([lab[a], lab[b], repr(float(x))])
        with open(vertices_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "level", "coset_id"])
            for i, name in enumerate(lab):
                w.writerow([name, int(self.level[i]), int(self.coset_id[i])])

    def summary(self, delta_estimate: float | None = None) -> dict:
        return {
            "vertex_count": self.vertex_count,
            "horoball_count": self.horoball_count,
            "delta_estimate": delta_estimate,
        }

    def summary_json(self, delta_estimate: float | None = None) -> str:
        return json.dumps(self.summary(delta_estimate), sort_keys=True)


def _resolve_parabolic(base: GroupModel, parabolic_gens) -> tuple:
    idx = []
    for g in parabolic_gens:
        if isinstance(g, (int, np.integer)) and not isinstance(g, bool):
            k = int(g)
            if not 0 <= k < len(base.generators):
                raise InvalidInputError(f"generator index {k} out of range")
        else:
            try:
                k = base.generators.index(g)
            except ValueError:
                raise InvalidElementError(f"{g!r} is not a generator of {base.name}") from None
        if k not in idx:
            idx.append(k)
    gens = [base.generators[k] for k in idx]
    for g in gens:
        if base.inv(g) not in gens:
            raise InvalidInputError("parabolic generators must be closed under inversion")
    return tuple(sorted(idx))


def cusped_space(
    base: GroupModel,
    parabolic_gens,
    R: int,
    T: float,
    max_vertices: int = DEFAULT_MAX_VERTICES,
) -> CuspedSpace:
    """Cusped space over the radius-R ball of ``base``.

    Parabolic edges (arcs labeled by ``parabolic_gens``) split into connected
    pieces; each piece with at least one edge carries a horoball with integer
    levels 2..floor(T): vertical edges of length 1 and level-n copies of the
    piece's edges of length e^(1-n).  The returned metric is the weighted
    graph metric of the glued finite graph, exact for that graph; as a model
    of the continuous cusped space it is a bounded-distortion stand-in.
    """
    if T < 1:
        raise InvalidInputError(f"truncation must be >= 1, got {T}")
    par = _resolve_parabolic(base, parabolic_gens)
    ball = cayley_ball(base, R, max_vertices=max_vertices)
    n0 = len(ball)
    mask = np.isin(ball.arc_gen, par)
    ps, pd = ball.arc_src[mask], ball.arc_dst[mask]
    keep = ps < pd
    ps, pd = ps[keep], pd[keep]
    pairs = np.unique(np.stack([ps, pd], axis=1), axis=0) if ps.size else np.zeros((0, 2), dtype=np.int64)
    if len(pairs):
        g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n0, n0))
        _, comp = connected_components(g, directed=False)
    else:
        comp = np.arange(n0)
    touched = np.zeros(n0, dtype=bool)
    touched[pairs.ravel()] = True
    # components numbered by their lowest (BFS-first) vertex
    reps = sorted({int(np.flatnonzero((comp == c) & touched)[0]) for c in np.unique(comp[touched])})
    comp_of_rep = {int(comp[r]): k for k, r in enumerate(reps)}
    coset = np.full(n0, -1, dtype=np.int64)
    for v in np.flatnonzero(touched):
        coset[v] = comp_of_rep[int(comp[v])]
    top = int(math.floor(T + 1e-12))
    base_labels = ball.labels
    labels = list(base_labels)
    level = [1] * n0
    cid = list(coset)
    glue = list(range(n0))
    src = list(ball.arc_src[ball.arc_src < ball.arc_dst])
    dst = list(ball.arc_dst[ball.arc_src < ball.arc_dst])
    w = [1.0] * len(src)
    components = []
    horoballs = []
    for k, rep in enumerate(reps):
        verts = np.flatnonzero(coset == k)
        local = {int(v): i for i, v in enumerate(verts)}
        e_in = pairs[coset[pairs[:, 0]] == k]
        components.append((labels[rep], verts))
        sub = coo_matrix(
            (np.ones(len(e_in)), ([local[int(a)] for a in e_in[:, 0]], [local[int(b)] for b in e_in[:, 1]])),
            shape=(len(verts), len(verts)),
        )
        d1 = shortest_path(sub, directed=False, unweighted=True)
        horoballs.append(
            HoroballSpace(
                FiniteMetricSpace([labels[v] for v in verts], d1.astype(np.int64), integral=True, name=f"coset[{labels[rep]}]"),
                truncation=float(T),
            )
        )
        prev = {int(v): int(v) for v in verts}
        for n in range(2, top + 1):
            cur = {}
            for v in verts:
                cur[int(v)] = len(labels)
                labels.append(f"{base_labels[v]}@{n}")
                level.append(n)
                cid.append(k)
                glue.append(int(v))
                src.append(prev[int(v)])
                dst.append(cur[int(v)])
                w.append(1.0)
            for a, b in e_in:
                src.append(cur[int(a)])
                dst.append(cur[int(b)])
                w.append(math.exp(1 - n))
            prev = cur
    n = len(labels)
    E = np.stack([np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)], axis=1)
    W = np.asarray(w, dtype=float)
    if len(E):
        E, first = np.unique(E, axis=0, return_index=True)
        W = W[first]
    adj = coo_matrix(
        (np.concatenate([W, W]), (np.concatenate([E[:, 0], E[:, 1]]), np.concatenate([E[:, 1], E[:, 0]]))),
        shape=(n, n),
    ).tocsr()

    def row_fn(i, limit):
        kw = {} if limit is None else {"limit": float(limit)}
        return dijkstra(adj, directed=False, indices=i, **kw)

    metric = FiniteMetricSpace(
        labels,
        row_fn=row_fn,
        name=f"cusped({base.name},R={R},T={T:g})",
        integral=top < 2,
        graph=(adj.indptr, adj.indices, adj.data),
    )
    return CuspedSpace(
        base_ball=ball,
        parabolic=par,
        truncation=float(T),
        components=components,
        horoballs=horoballs,
        labels=labels,
        level=np.asarray(level, dtype=np.int64),
        coset_id=np.asarray(cid, dtype=np.int64),
        glue=np.asarray(glue, dtype=np.int64),
        edges=E,
        weights=W,
        metric=metric,
    )


def cusped_sample(cs: CuspedSpace, size: int, seed: int = 0) -> np.ndarray:
    """Seeded sample of base (level-1) vertices, sorted."""
    n0 = len(cs.base_ball)
    rng = np.random.default_rng(seed)
    k = min(size, n0)
    return np.sort(rng.choice(n0, size=k, replace=False))
