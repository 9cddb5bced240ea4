"""Growth functions, degree fitting, and the covering criterion for
polynomial growth."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, InvalidInputError, SizeCapError
from .groups import GroupModel
from .metric import DEFAULT_MAX_VERTICES, cayley_ball, greedy_cover, max_packing

POLYNOMIAL = "polynomial"
EXPONENTIAL = "exponential"
INCONCLUSIVE = "inconclusive"

# N(eps, R) is read as bounded when its exponential rate stays below this
# fraction of (1 - eps) * (rate of gr); exponential growth forces
# N >= gr(R) / gr(eps R), i.e. a rate of at least (1 - eps) * rate(gr)
BOUNDED_RATE_FRACTION = 0.5

# vertex budget for the enlarged ball that carries covering distances
WORK_VERTICES = 300_000


@dataclass(frozen=True)
class GrowthTable:
    model: str
    gr: tuple

    @property
    def r_max(self) -> int:
        return len(self.gr) - 1

    def __getitem__(self, R: int) -> int:
        return self.gr[R]

    def rows(self):
        return list(enumerate(self.gr))


@dataclass(frozen=True)
class GrowthFit:
    verdict: str
    p: float | None
    K1: float | None
    K2: float | None
    window: tuple | None
    residual: float | None
    exp_residual: float | None = None
    base: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window) if self.window else None
        return d

    @classmethod
    def inconclusive(cls, window=None) -> "GrowthFit":
        return cls(INCONCLUSIVE, None, None, None, tuple(window) if window else None, None)


def growth_table(model: GroupModel, R_max: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> GrowthTable:
    ball = cayley_ball(model, R_max, max_vertices=max_vertices)
    return GrowthTable(model.name, tuple(int(x) for x in np.cumsum(ball.sphere_sizes)))


def fit_degree(t: GrowthTable, window) -> GrowthFit:
    """Least-squares degree of log gr against log R on the window, with the
    competing semilog fit deciding polynomial against exponential."""
    lo, hi = int(window[0]), int(window[1])
    if lo < 2:
        raise InvalidInputError(f"fit window must start at R >= 2, got {lo}")
    if hi > t.r_max:
        raise InvalidInputError(f"fit window ends at {hi} but the table stops at {t.r_max}")
    if hi - lo + 1 < 3:
        raise InvalidInputError(f"fit window [{lo}, {hi}] has fewer than 3 points")
    R = np.arange(lo, hi + 1, dtype=float)
    y = np.log(np.asarray(t.gr[lo : hi + 1], dtype=float))
    p, c = np.polyfit(np.log(R), y, 1)
    res_poly = float(np.abs(y - (p * np.log(R) + c)).max())
    k, c2 = np.polyfit(R, y, 1)
    res_exp = float(np.abs(y - (k * R + c2)).max())
    ratios = np.asarray(t.gr[lo : hi + 1], dtype=float) / R**p
    exponential = k > 1e-9 and res_exp < res_poly - 1e-12
    return GrowthFit(
        verdict=EXPONENTIAL if exponential else POLYNOMIAL,
        p=float(p),
        K1=float(ratios.min()),
        K2=float(ratios.max()),
        window=(lo, hi),
        residual=res_poly,
        exp_residual=res_exp,
        base=float(math.exp(k)),
    )


def _working_ball(model, r_need: int, r_want: int, max_vertices: int):
    """Ball of radius r_want if it fits the work budget, otherwise the largest
    radius that does (never below r_need)."""
    if r_want <= r_need:
        return cayley_ball(model, r_need, max_vertices=max_vertices)
    try:
        return cayley_ball(model, r_want, max_vertices=min(WORK_VERTICES, max_vertices))
    except SizeCapError as exc:
        return cayley_ball(model, max(r_need, exc.radius - 1), max_vertices=max_vertices)


def covering_constant(
    model: GroupModel, eps: float, radii, max_vertices: int = DEFAULT_MAX_VERTICES
) -> list[int]:
    """Greedy number of eps*R balls needed to cover B(R), for each R.

    Distances come from one BFS ball of radius up to (1 + eps) * max(radii),
    where the covering relation d <= eps*R is exact; when the budget forces a
    smaller ball its intrinsic metric still bounds the word metric from above,
    so every cover found is a genuine cover.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    radii = [int(R) for R in radii]
    if not radii:
        return []
    r_max = max(radii)
    ball = _working_ball(model, r_max, math.ceil((1 + eps) * r_max), max_vertices)
    metric = ball.metric()
    sizes = np.cumsum(ball.sphere_sizes)
    return [len(greedy_cover(metric, np.arange(sizes[R]), eps * R)) if R > 0 else 1 for R in radii]


def iterated_cover_bound(N: int, eps: float, gr1: int, R: float) -> float:
    """gr(1) * R ** (-log N / log eps): the growth bound obtained by iterating
    a cover of R-balls by N balls of radius eps*R."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if R < 1:
        raise DomainError(f"R must be >= 1, got {R}")
    return gr1 * R ** (-math.log(N) / math.log(eps))


@dataclass
class A1A2Report:
    model: str
    eps: float
    radii: list
    N: list
    table: GrowthTable
    fit: GrowthFit
    n_rate: float
    gr_rate: float
    bounded: bool
    consistent: bool
    iteration_holds: bool
    packing_witness: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "CONSISTENT" if self.consistent else "INCONSISTENT"

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "eps": self.eps,
            "radii": self.radii,
            "N": self.N,
            "gr": list(self.table.gr),
            "fit": self.fit.to_dict(),
            "n_rate": self.n_rate,
            "gr_rate": self.gr_rate,
            "bounded_N": self.bounded,
            "iteration_holds": self.iteration_holds,
            "packing_witness": self.packing_witness,
            "verdict": self.verdict,
        }


def a1_a2_report(
    model: GroupModel, eps: float, radii, window, max_vertices: int = DEFAULT_MAX_VERTICES
) -> A1A2Report:
    """Compare covering evidence (bounded N) with the growth verdict.

    The growth table runs to ``max(max(radii), window[1])``.  Rates are
    least-squares slopes of log N and log gr against R over the tested radii;
    N counts as bounded when its rate is at most
    BOUNDED_RATE_FRACTION * (1 - eps) * (rate of gr).  When N is unbounded, a
    packing of disjoint (eps*R/4)-balls inside B(R) is exhibited per radius.
    """
    radii = sorted(int(R) for R in radii)
    if len(radii) < 2 or radii[0] < 1:
        raise InvalidInputError("need at least two radii, all >= 1")
    r_top = max(radii[-1], int(window[1]))
    ball = _working_ball(model, r_top, max(r_top, math.ceil((1 + eps) * radii[-1])), max_vertices)
    metric = ball.metric()
    sizes = [int(x) for x in np.cumsum(ball.sphere_sizes)]
    table = GrowthTable(model.name, tuple(sizes))
    fit = fit_degree(table, window)
    N = [len(greedy_cover(metric, np.arange(sizes[R]), eps * R)) for R in radii]
    rr = np.asarray(radii, dtype=float)
    n_rate = float(np.polyfit(rr, np.log(N), 1)[0])
    gr_rate = float(np.polyfit(rr, np.log([sizes[R] for R in radii]), 1)[0])
    bounded = n_rate <= 1e-12 or n_rate <= BOUNDED_RATE_FRACTION * (1 - eps) * gr_rate
    iteration = all(sizes[R] <= n * sizes[int(math.floor(eps * R))] for R, n in zip(radii, N))
    witness = []
    if not bounded:
        for R in radii:
            # closed balls of radius r are disjoint once centers are 2*floor(r)+1 apart
            r = eps * R / 4
            sep = 2 * math.floor(r) + 1
            centers = max_packing(metric, np.arange(sizes[R]), sep)
            witness.append({"R": R, "ball_radius": r, "separation": sep, "disjoint_balls": len(centers)})
    consistent = bounded == (fit.verdict == POLYNOMIAL)
    return A1A2Report(
        model=model.name,
        eps=eps,
        radii=radii,
        N=N,
        table=table,
        fit=fit,
        n_rate=n_rate,
        gr_rate=gr_rate,
        bounded=bounded,
        consistent=consistent,
        iteration_holds=iteration,
        packing_witness=witness,
    )
