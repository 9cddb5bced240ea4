"""Bounded-geometry profiles, the tree map and orbit counting behind the
growth converse, and covering certificates for asymptotic dimension."""

from __future__ import annotations

import csv
import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import CertificateInvalidError, DomainError, InvalidInputError, SizeCapError
from .groups import FreeAbelian, GroupModel
from .growth import growth_table
from .horoball import rho
from .metric import (
    DEFAULT_MAX_VERTICES,
    TOL,
    FiniteMetricSpace,
    cayley_ball,
    greedy_cover,
    max_packing,
    word_metric_space,
)


# ---------------------------------------------------------------- profiles


@dataclass(frozen=True)
class ProfileEntry:
    R: float
    basepoint: int
    f_cover: int
    f_fine: int


@dataclass
class GeometryProfile:
    space: str
    labels: dict
    entries: list = field(default_factory=list)

    def f_cover(self, R, basepoint) -> int:
        for e in self.entries:
            if e.R == R and e.basepoint == basepoint:
                return e.f_cover
        raise KeyError((R, basepoint))

    def ratios(self) -> dict:
        """max/min f_cover across basepoints, per radius."""
        out = {}
        for R in sorted({e.R for e in self.entries}):
            vals = [e.f_cover for e in self.entries if e.R == R]
            out[R] = max(vals) / min(vals)
        return out

    def to_dict(self) -> dict:
        return {
            "space": self.space,
            "entries": [
                {"R": e.R, "basepoint": self.labels[e.basepoint], "f_cover": e.f_cover, "f_fine": e.f_fine}
                for e in self.entries
            ],
            "ratios": {str(k): v for k, v in self.ratios().items()},
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["R", "basepoint", "f_cover", "f_fine"])
            for e in self.entries:
                w.writerow([e.R, self.labels[e.basepoint], e.f_cover, e.f_fine])


def geometry_profile(space: FiniteMetricSpace, radii, basepoints) -> GeometryProfile:
    """Greedy unit-ball covers of B(b, R) and (1/R)-ball covers of B(b, 1).

    On graph-like spaces the fine clause is trivial whenever 1/R is below the
    smallest positive distance; it is reported but carries little signal.
    """
    prof = GeometryProfile(space.name, {int(b): space.labels[int(b)] for b in basepoints})
    unit = None
    for R in radii:
        if R < 0:
            raise DomainError(f"radius must be >= 0, got {R}")
        for b in basepoints:
            b = int(b)
            ball = space.check_ball(b, R)
            fc = len(greedy_cover(space, ball, 1.0))
            if unit is None or unit[0] != b:
                unit = (b, space.check_ball(b, 1.0))
            ff = len(greedy_cover(space, unit[1], 1.0 / R)) if R > 0 else 1
            prof.entries.append(ProfileEntry(R, b, fc, ff))
    return prof


# ---------------------------------------------------------------- tree map


@dataclass
class TreeMap:
    """A map from the N-regular rooted tree into a space.

    Children of a tree vertex go to the greedy unit-ball centers of the
    2-ball around its image (cycled when there are fewer than N).  The image
    of a subtree depends only on the image of its root, so a vertex whose
    image was already expanded is stored unexpanded: its subtree is a copy.
    """

    N: int
    depth: int
    parent: list
    image: list
    tree_depth: list
    expanded: list
    labels: list

    def __len__(self) -> int:
        return len(self.parent)

    def edges(self):
        return [(p, c) for c, p in enumerate(self.parent) if p >= 0]

    def max_edge_length(self, space: FiniteMetricSpace) -> float:
        worst = 0.0
        for p, c in self.edges():
            worst = max(worst, float(space.dist(self.image[p], self.image[c])))
        return worst

    def density_gap(self, space: FiniteMetricSpace, region) -> tuple:
        """Largest distance from a point of ``region`` to the image, with the
        witnessing point."""
        img = np.unique(np.asarray(self.image, dtype=int))
        region = np.asarray(region, dtype=int)
        best = np.full(len(region), np.inf)
        for i in img:
            best = np.minimum(best, np.asarray(space.row(int(i)), dtype=float)[region])
        k = int(np.argmax(best))
        return float(best[k]), int(region[k])

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "depth": self.depth,
            "stored_vertices": len(self.parent),
            "image_size": len(set(self.image)),
            "edges": [[self.labels[self.image[p]], self.labels[self.image[c]]] for p, c in self.edges()],
        }


def tree_lipschitz_map(space: FiniteMetricSpace, basepoint: int, depth: int) -> TreeMap:
    if depth < 0:
        raise DomainError(f"depth must be >= 0, got {depth}")
    basepoint = int(basepoint)
    children: dict[int, list] = {}

    def centers(x: int) -> list:
        if x not in children:
            children[x] = greedy_cover(space, space.check_ball(x, 2.0), 1.0)
        return children[x]

    # first pass: every image reached within the depth, and the valence N
    frontier = {basepoint}
    seen = {basepoint}
    for _ in range(depth):
        nxt = set()
        for x in sorted(frontier):
            for c in centers(x):
                if c not in seen:
                    seen.add(c)
                    nxt.add(c)
        frontier = nxt
    N = max((len(centers(x)) for x in children), default=1) if depth > 0 else 1
    if depth > 0:
        N = max(N, len(centers(basepoint)))
    parent, image, tdepth, expanded = [-1], [basepoint], [0], [False]
    done = set()
    q = deque([0])
    while q:
        v = q.popleft()
        x = image[v]
        if tdepth[v] >= depth or x in done:
            continue
        done.add(x)
        expanded[v] = True
        cs = centers(x)
        for k in range(N):
            parent.append(v)
            image.append(int(cs[k % len(cs)]))
            tdepth.append(tdepth[v] + 1)
            expanded.append(False)
            q.append(len(parent) - 1)
    return TreeMap(N, depth, parent, image, tdepth, expanded, space.labels)


def separated_count(space: FiniteMetricSpace, basepoint: int, R: float, s: float = 2.0) -> int:
    """Size of the greedy s-separated subset of B(basepoint, R)."""
    ball = space.check_ball(int(basepoint), R)
    return len(max_packing(space, ball, s))


def regular_tree(N: int, depth: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> FiniteMetricSpace:
    """Ball of radius ``depth`` around a vertex of the N-regular tree (root
    has N children, every other vertex N - 1)."""
    if N < 2 or depth < 0:
        raise InvalidInputError(f"need N >= 2 and depth >= 0, got {N}, {depth}")
    size = 1 + sum(N * (N - 1) ** (k - 1) for k in range(1, depth + 1))
    if size > max_vertices:
        raise SizeCapError(f"tree ball has {size} vertices, cap is {max_vertices}", radius=depth)
    labels, parent = ["r"], [-1]
    level = [0]
    for k in range(1, depth + 1):
        nxt = []
        for v in level:
            for c in range(N if v == 0 else N - 1):
                labels.append(f"{labels[v]}.{c}")
                parent.append(v)
                nxt.append(len(labels) - 1)
        level = nxt
    n = len(labels)
    par = np.asarray(parent)
    kids = np.arange(1, n)
    src = np.concatenate([kids, par[1:]])
    dst = np.concatenate([par[1:], kids])
    adj = csr_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))

    def row_fn(i, limit):
        kw = {} if limit is None else {"limit": float(limit)}
        return dijkstra(adj, directed=False, indices=i, unweighted=True, **kw)

    space = FiniteMetricSpace(
        labels, row_fn=row_fn, integral=True, name=f"tree({N},{depth})", graph=(adj.indptr, adj.indices, None)
    )
    space.parent = par
    space.depth = np.asarray([lab.count(".") for lab in labels])
    return space


# ---------------------------------------------------------------- orbit growth


@dataclass
class OrbitAudit:
    model: str
    radii: list
    orbit_count: list
    identity_side: list
    identity_holds: bool
    chain: list
    chain_holds: bool
    beta: float
    B: float
    implied_degree: float
    bound_holds: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def orbit_growth_audit(
    model: GroupModel,
    R_list,
    A: float = 1.0,
    alpha: float = 0.5,
    max_vertices: int = DEFAULT_MAX_VERTICES,
) -> OrbitAudit:
    """Orbit of level-1 points of C(G) seen from x0 = (e, 1).

    f(R) = |O cap B_rho(x0, R)| is counted directly from word lengths through
    the closed-form metric and compared with gr(floor(2 sinh(R/2))) from an
    independent growth table.  For R >= 1 the chain gr_O(A e^(alpha R)) <=
    f(R) is checked.  f is then bounded by B e^(beta R): beta is the
    least-squares rate of log f over the tested R >= 1 and B the smallest
    constant for which the bound holds at every real R in [1, max R] (f is a
    step function, so its jump points suffice).  Finally the derived
    polynomial bound gr_O(t) <= B (t/A)^(beta/alpha) is tested at
    t = A e^(alpha R) for the tested radii.
    """
    R_list = [float(R) for R in R_list]
    if not R_list or min(R_list) < 0:
        raise DomainError("radii must be nonnegative")
    r_top = max(R_list)
    reach = 2 * math.sinh(r_top / 2)
    t_top = A * math.exp(alpha * r_top)
    n_top = int(math.floor(max(reach, t_top) + 1e-12))
    ball = cayley_ball(model, n_top + 1, max_vertices=max_vertices)
    wl = ball.word_length.astype(float)
    table = growth_table(model, n_top + 1, max_vertices=max_vertices)
    counts, ident, chain = [], [], []
    for R in R_list:
        f = int((rho(wl, 1.0, 1.0) <= R + TOL).sum())
        counts.append(f)
        ident.append(table[int(math.floor(2 * math.sinh(R / 2) + 1e-12))])
        if R >= 1:
            lhs = table[int(math.floor(A * math.exp(alpha * R) + 1e-12))]
            chain.append({"R": R, "gr_O": lhs, "f": f, "ok": lhs <= f})
    big = [(R, f) for R, f in zip(R_list, counts) if R >= 1]
    beta, B, ok = 0.0, 1.0, True
    if len(big) >= 2:
        rr = np.asarray([R for R, _ in big])
        beta = max(float(np.polyfit(rr, np.log([f for _, f in big]), 1)[0]), 1e-12)
        # jumps of f on [1, r_top]: R_n = 2 asinh(n/2), plus the left end
        jumps = [1.0] + [2 * math.asinh(n / 2) for n in range(n_top + 1) if 1 <= 2 * math.asinh(n / 2) <= r_top]
        B = max(table[int(math.floor(2 * math.sinh(R / 2) + 1e-12))] / math.exp(beta * R) for R in jumps)
        for R in rr:
            t = A * math.exp(alpha * R)
            if table[int(math.floor(t + 1e-12))] > B * (t / A) ** (beta / alpha) * (1 + 1e-12):
                ok = False
    return OrbitAudit(
        model=model.name,
        radii=R_list,
        orbit_count=counts,
        identity_side=ident,
        identity_holds=counts == ident,
        chain=chain,
        chain_holds=all(c["ok"] for c in chain),
        beta=beta,
        B=B,
        implied_degree=beta / alpha,
        bound_holds=ok,
    )


# ---------------------------------------------------------------- certificates


@dataclass
class CoverCertificate:
    space: str
    sets: list
    scale: float
    diameter_bound: float
    claimed_asdim: int
    multiplicity: int | None = None
    witness: int | None = None
    labels: list | None = None

    @property
    def consistent(self) -> bool:
        return self.multiplicity is not None and self.multiplicity <= self.claimed_asdim + 1

    def to_dict(self) -> dict:
        lab = self.labels
        return {
            "space": self.space,
            "scale": self.scale,
            "diameter_bound": self.diameter_bound,
            "sets": [[lab[i] if lab else int(i) for i in s] for s in self.sets],
            "multiplicity": self.multiplicity,
            "claimed_asdim": self.claimed_asdim,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def check_cover_certificate(space: FiniteMetricSpace, cert: CoverCertificate) -> CoverCertificate:
    """Verify union, diameters and d-multiplicity by brute force; returns the
    certificate with ``multiplicity`` and its witness point filled in."""
    n = space.n
    sets = [np.unique(np.asarray(s, dtype=int)) for s in cert.sets]
    owner_ptr = [[] for _ in range(n)]
    for k, s in enumerate(sets):
        if s.size and (s[0] < 0 or s[-1] >= n):
            raise CertificateInvalidError(f"set {k} has points outside the space", witness=k)
        for i in s:
            owner_ptr[i].append(k)
    for i in range(n):
        if not owner_ptr[i]:
            raise CertificateInvalidError(f"point {space.labels[i]} is not covered", witness=space.labels[i])
    for k, s in enumerate(sets):
        for i in s:
            d = float(np.asarray(space.row(int(i)), dtype=float)[s].max())
            if d > cert.diameter_bound + TOL:
                raise CertificateInvalidError(
                    f"set {k} has diameter {d} > bound {cert.diameter_bound}", witness=k
                )
    flat = np.concatenate([np.asarray(o, dtype=int) for o in owner_ptr])
    ptr = np.concatenate([[0], np.cumsum([len(o) for o in owner_ptr])])
    best, who = 0, 0
    for x in range(n):
        ball = space.ball(x, cert.scale)
        hit = np.unique(np.concatenate([flat[ptr[j] : ptr[j + 1]] for j in ball]))
        if hit.size > best:
            best, who = int(hit.size), x
    out = CoverCertificate(
        cert.space,
        [list(map(int, s)) for s in sets],
        cert.scale,
        cert.diameter_bound,
        cert.claimed_asdim,
        multiplicity=best,
        witness=who,
        labels=space.labels,
    )
    return out


def line_space(n: int) -> FiniteMetricSpace:
    pts = np.arange(n)
    return FiniteMetricSpace(
        [str(i) for i in range(n)],
        row_fn=lambda i, limit: np.abs(pts - pts[i]),
        integral=True,
        name=f"line({n})",
    )


def grid_space(w: int, h: int) -> FiniteMetricSpace:
    pts = [(x, y) for y in range(h) for x in range(w)]
    return word_metric_space(FreeAbelian(2), pts, name=f"grid({w}x{h})")


def build_asdim_certificate(kind: str, extent, d: float, N: int = 3, max_vertices: int = DEFAULT_MAX_VERTICES):
    """Standard bounded covers with small d-multiplicity.

    * ``integer_line``: {0..extent-1} in blocks of 4d+1.
    * ``integer_grid_2d``: extent (w, h); rows of height 4d+1, bricks of
      width 8d+2, odd rows shifted by 2d+1.
    * ``regular_tree``: N-regular tree of depth ``extent``; annuli of
      thickness L = 4d+1, each annulus split by the ancestor lying
      ceil(L/2) levels above its inner boundary.  Splitting by the annulus's
      own components instead lets a vertex just inside an annulus see one
      class plus all its children's classes.

    Returns (space, certificate); the certificate still has to go through
    ``check_cover_certificate``.
    """
    if d <= 0:
        raise DomainError(f"scale must be positive, got {d}")
    di = int(math.ceil(d))
    L = 4 * di + 1
    if kind == "integer_line":
        n = int(extent)
        if n > max_vertices:
            raise SizeCapError(f"line of {n} points exceeds cap", radius=None)
        space = line_space(n)
        sets = [list(range(a, min(a + L, n))) for a in range(0, n, L)]
        return space, CoverCertificate(space.name, sets, d, L - 1, 1, labels=space.labels)
    if kind == "integer_grid_2d":
        w, h = (extent, extent) if isinstance(extent, int) else (int(extent[0]), int(extent[1]))
        if w * h > max_vertices:
            raise SizeCapError(f"grid of {w * h} points exceeds cap", radius=None)
        space = grid_space(w, h)
        W = 8 * di + 2
        off = 2 * di + 1
        bricks: dict = {}
        for k, (x, y) in enumerate((x, y) for y in range(h) for x in range(w)):
            row = y // L
            col = (x + off * (row % 2)) // W
            bricks.setdefault((row, col), []).append(k)
        sets = [bricks[key] for key in sorted(bricks)]
        return space, CoverCertificate(space.name, sets, d, (W - 1) + (L - 1), 2, labels=space.labels)
    if kind == "regular_tree":
        space = regular_tree(N, int(extent), max_vertices=max_vertices)
        depth, par = space.depth, space.parent
        half = (L + 1) // 2
        classes: dict = {}
        for v in range(space.n):
            k = depth[v] // L
            up = depth[v] - (k * L - half)
            a = v
            if k * L - half >= 0:
                for _ in range(up):
                    a = par[a]
            else:
                a = 0
            classes.setdefault((k, a), []).append(v)
        sets = [classes[key] for key in sorted(classes)]
        return space, CoverCertificate(space.name, sets, d, 2 * (L - 1 + half), 1, labels=space.labels)
    raise InvalidInputError(f"unknown certificate kind {kind!r}")
