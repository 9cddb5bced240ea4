"""Command-line experiment runner.

Each subcommand writes one primary artifact (JSON, or CSV where a table is
natural) into the output directory, ``--out`` or ``$HOROCOVER_OUT`` or the
current directory.  JSON artifacts embed the full configuration and the
package version.  Exit codes: 0 success, 2 invalid configuration, 3 a size
or exactness cap was hit, 4 an audited invariant failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .audit import (
    build_asdim_certificate,
    check_cover_certificate,
    geometry_profile,
    orbit_growth_audit,
    separated_count,
    tree_lipschitz_map,
)
from .cusped import cusped_sample, cusped_space
from .errors import (
    CertificateInvalidError,
    ElementOverflowError,
    ExactnessError,
    InvalidInputError,
    SizeCapError,
)
from .groups import FreeAbelian, parse_group
from .growth import GrowthFit, a1_a2_report, covering_constant, fit_degree, growth_table
from .horoball import (
    HoroPoint,
    MeshOracle,
    cayley_horoball,
    distortion_audit,
    horoball_distance,
    peak_level,
    sample_for_balls,
)
from .metric import DEFAULT_MAX_VERTICES, FiniteMetricSpace, all_pairs_distances, cayley_ball, four_point_delta

OUT_ENV = "HOROCOVER_OUT"

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_INVARIANT = 0, 2, 3, 4


def _ints(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _floats(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _window(s: str) -> list[int]:
    w = _ints(s)
    if len(w) != 2:
        raise argparse.ArgumentTypeError(f"window must be lo,hi, got {s!r}")
    return w


def _num(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _write_json(path: Path, config: dict, result: dict) -> None:
    doc = {"config": config, "version": __version__, "result": result}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2, default=_num) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ----------------------------------------------------------------- commands


def cmd_growth(a, cfg):
    model = parse_group(a.group)
    t = growth_table(model, a.rmax, max_vertices=a.max_vertices)
    window = a.window or [max(2, a.rmax // 2), a.rmax]
    try:
        fit = fit_degree(t, window)
    except InvalidInputError:
        if a.window:
            raise
        fit = GrowthFit.inconclusive()
    if a.format == "csv":
        return [("R", "gr"), [(R, g) for R, g in t.rows()]], True
    return {"gr": list(t.gr), "fit": fit.to_dict()}, True


def cmd_covering(a, cfg):
    model = parse_group(a.group)
    if a.window:
        rep = a1_a2_report(model, a.eps, a.radii, a.window, max_vertices=a.max_vertices)
        if a.format == "csv":
            return [("R", "gr", "N_eps"), [(R, rep.table[R], n) for R, n in zip(rep.radii, rep.N)]], True
        return rep.to_dict(), rep.consistent and rep.iteration_holds
    N = covering_constant(model, a.eps, a.radii, max_vertices=a.max_vertices)
    t = growth_table(model, max(a.radii), max_vertices=a.max_vertices)
    if a.format == "csv":
        return [("R", "gr", "N_eps"), [(R, t[R], n) for R, n in zip(a.radii, N)]], True
    return {"radii": a.radii, "N": N, "gr": [t[R] for R in a.radii]}, True


def cmd_horoball(a, cfg):
    model = parse_group(a.group)
    h = cayley_horoball(model, a.radius, truncation=a.T, max_vertices=a.max_vertices)
    rng = np.random.default_rng(a.seed)
    n = h.base.n
    audits = []
    ok = True
    for t in a.levels:
        pairs = rng.integers(0, n, size=(a.pairs, 2))
        rep = distortion_audit(h, t, [tuple(map(int, p)) for p in pairs])
        audits.append(rep.to_dict())
        ok &= rep.ok
    mesh = []
    if a.mesh_pairs:
        oracle = MeshOracle(h, a.step)
        tries = 0
        while len(mesh) < a.mesh_pairs and tries < 100 * a.mesh_pairs:
            tries += 1
            v, w = (int(x) for x in rng.integers(0, n, size=2))
            t1, t2 = (float(x) for x in np.round(1 + (a.T - 1) * rng.random(2), 6))
            if not h.base.certified(v, [w])[0]:
                continue
            if peak_level(float(h.base.dist(v, w)), t1, t2) > a.T:
                continue
            p, q = HoroPoint(v, t1), HoroPoint(w, t2)
            exact = horoball_distance(h, p, q)
            approx = oracle.distance(p, q)
            mesh.append({"p": [h.base.labels[v], t1], "q": [h.base.labels[w], t2], "rho": exact, "mesh": approx})
        gaps = [m["mesh"] - m["rho"] for m in mesh]
        ok &= all(-1e-9 <= g <= 2 * a.step for g in gaps)
    return {"distortion": audits, "mesh": mesh}, ok


def _sample_for(model, levels, R, net_factor):
    centers = [(0, float(t)) for t in levels]
    net = None
    if isinstance(model, FreeAbelian) and net_factor:
        net = lambda s: max(1, int(math.floor(math.exp(s - 1) / net_factor)))  # noqa: E731
    return sample_for_balls(model, centers, max(R), net_spacing=net)


def cmd_profile(a, cfg):
    model = parse_group(a.group)
    if a.parabolic:
        cs = cusped_space(model, a.parabolic, a.radius, a.T, max_vertices=a.max_vertices)
        space = cs.metric
        levels = [lv for lv in a.levels if lv <= math.floor(a.T)]
        bps = []
        for lv in levels:
            if lv == 1:
                bps.append(0)
            else:
                bps.append(cs.labels.index(f"{cs.labels[0]}@{lv}"))
        # balls are complete only well inside the base ball
        if max(a.radii) > a.radius:
            raise ExactnessError(f"radius {max(a.radii)} exceeds the cusped ball radius {a.radius}")
    else:
        space = _sample_for(model, a.levels, a.radii, a.net_factor)
        bps = [space.index_of(0, float(t)) for t in a.levels]
    prof = geometry_profile(space, a.radii, bps)
    if a.format == "csv":
        d = prof.to_dict()
        return [("R", "basepoint", "f_cover", "f_fine"), [(e["R"], e["basepoint"], e["f_cover"], e["f_fine"]) for e in d["entries"]]], True
    return prof.to_dict(), True


def cmd_cusped(a, cfg):
    model = parse_group(a.group)
    cs = cusped_space(model, a.parabolic, a.radius, a.T, max_vertices=a.max_vertices)
    idx = cusped_sample(cs, a.sample, a.seed)
    sub = FiniteMetricSpace(
        [cs.labels[i] for i in idx], np.vstack([np.asarray(cs.metric.row(int(i)))[idx] for i in idx])
    )
    delta = four_point_delta(sub, a.quadruples, a.seed) if len(idx) >= 4 else None
    out = Path(cfg["_out"])
    if a.export:
        cs.write_csv(out / "cusped_edges.csv", out / "cusped_vertices.csv")
    res = cs.summary(delta)
    res["sample"] = [cs.labels[i] for i in idx]
    return res, True


def cmd_treemap(a, cfg):
    model = parse_group(a.group)
    if a.levels:
        space = _sample_for(model, a.levels, [2 * a.depth + 2], a.net_factor)
        base = space.index_of(0, float(a.levels[0]))
    else:
        space = all_pairs_distances(cayley_ball(model, a.radius, max_vertices=a.max_vertices))
        base = 0
    tm = tree_lipschitz_map(space, base, a.depth)
    worst = tm.max_edge_length(space)
    region = space.check_ball(base, a.depth)
    gap, who = tm.density_gap(space, region)
    sep = separated_count(space, base, a.depth, a.s)
    bound = tm.N ** (a.depth + 1)
    ok = worst <= 2 + 1e-9 and gap <= 1 + 1e-9 and sep <= bound
    res = {
        "N": tm.N,
        "stored_vertices": len(tm),
        "max_edge_length": worst,
        "density_gap": gap,
        "density_witness": space.labels[who],
        "separated_count": sep,
        "separated_bound": bound,
    }
    return res, ok


def cmd_asdim(a, cfg):
    extent = a.extent[0] if len(a.extent) == 1 and a.kind != "integer_grid_2d" else a.extent
    if a.kind == "integer_grid_2d" and len(extent) == 1:
        extent = (extent[0], extent[0])
    space, cert = build_asdim_certificate(a.kind, extent, a.d, N=a.N, max_vertices=a.max_vertices)
    cert = check_cover_certificate(space, cert)
    d = cert.to_dict()
    d["witness"] = space.labels[cert.witness]
    d["consistent"] = cert.consistent
    return d, cert.consistent


def cmd_orbit(a, cfg):
    model = parse_group(a.group)
    rep = orbit_growth_audit(model, a.radii, max_vertices=a.max_vertices)
    return rep.to_dict(), rep.identity_holds and rep.chain_holds and rep.bound_holds


COMMANDS = {
    "growth": cmd_growth,
    "covering": cmd_covering,
    "horoball": cmd_horoball,
    "profile": cmd_profile,
    "cusped": cmd_cusped,
    "treemap": cmd_treemap,
    "asdim": cmd_asdim,
    "orbit": cmd_orbit,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-vertices", type=int, default=DEFAULT_MAX_VERTICES)
    common.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--format", choices=["json", "csv"], default="json")

    p = argparse.ArgumentParser(prog="horocover", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("growth", parents=[common], help="growth table and degree fit")
    s.add_argument("--group", required=True)
    s.add_argument("--rmax", type=int, required=True)
    s.add_argument("--window", type=_window)

    s = sub.add_parser("covering", parents=[common], help="covering constants and growth consistency report")
    s.add_argument("--group", required=True)
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--radii", type=_ints, required=True)
    s.add_argument("--window", type=_window)

    s = sub.add_parser("horoball", parents=[common], help="distortion audit and mesh cross-check")
    s.add_argument("--group", default="free-abelian:2")
    s.add_argument("--radius", type=int, default=4)
    s.add_argument("--T", type=float, default=4.0)
    s.add_argument("--levels", type=_floats, default=[1.0, 2.0, 3.0])
    s.add_argument("--pairs", type=int, default=200)
    s.add_argument("--mesh-pairs", type=int, default=10)
    s.add_argument("--step", type=float, default=0.05)

    s = sub.add_parser("profile", parents=[common], help="bounded-geometry profile")
    s.add_argument("--group", required=True)
    s.add_argument("--radii", type=_floats, default=[2.0])
    s.add_argument("--levels", type=_ints, default=[1, 2, 3])
    s.add_argument("--net-factor", type=int, default=4, help="free abelian nets: spacing e^(s-1)/factor")
    s.add_argument("--parabolic", type=_ints, help="profile the cusped space with these generator indices")
    s.add_argument("--radius", type=int, default=3, help="cusped ball radius")
    s.add_argument("--T", type=float, default=4.0)

    s = sub.add_parser("cusped", parents=[common], help="cusped space and four-point delta")
    s.add_argument("--group", default="free-product(free:1,free-abelian:2)")
    s.add_argument("--parabolic", type=_ints, default=[2, 3, 4, 5])
    s.add_argument("--radius", type=int, default=3)
    s.add_argument("--T", type=float, default=4.0)
    s.add_argument("--sample", type=int, default=32)
    s.add_argument("--quadruples", type=int, default=100_000)
    s.add_argument("--export", action="store_true", help="also write edge and vertex CSVs")

    s = sub.add_parser("treemap", parents=[common], help="tree map and separated count")
    s.add_argument("--group", default="free-abelian:1")
    s.add_argument("--radius", type=int, default=8)
    s.add_argument("--depth", type=int, default=4)
    s.add_argument("--s", type=float, default=2.0)
    s.add_argument("--levels", type=_ints, help="run on a C(G) sample rooted at (e, level)")
    s.add_argument("--net-factor", type=int, default=4)

    s = sub.add_parser("asdim", parents=[common], help="asymptotic dimension certificate")
    s.add_argument("--kind", required=True, choices=["integer_line", "integer_grid_2d", "regular_tree"])
    s.add_argument("--extent", type=_ints, required=True)
    s.add_argument("--d", type=float, required=True)
    s.add_argument("--N", type=int, default=3)

    s = sub.add_parser("orbit", parents=[common], help="orbit growth audit in C(G)")
    s.add_argument("--group", required=True)
    s.add_argument("--radii", type=_floats, default=[1, 2, 3, 4, 5, 6])
    return p


def run(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    out = Path(a.out or os.environ.get(OUT_ENV) or ".")
    cfg = {k: v for k, v in sorted(vars(a).items()) if k != "out"}
    try:
        out.mkdir(parents=True, exist_ok=True)
        cfg["_out"] = str(out)
        result, ok = COMMANDS[a.command](a, cfg)
        cfg.pop("_out")
        path = out / f"{a.command}.{a.format}"
        if a.format == "csv" and isinstance(result, list):
            _write_csv(path, result[0], result[1])
        else:
            path = out / f"{a.command}.json"
            _write_json(path, cfg, result)
    except (SizeCapError, ExactnessError, ElementOverflowError) as exc:
        print(f"horocover: cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except CertificateInvalidError as exc:
        print(f"horocover: invariant: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except InvalidInputError as exc:
        print(f"horocover: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(path)
    if not ok:
        print(f"horocover: invariant violation reported in {path}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
