"""Desk-scale experiments on horoballs, growth and covering in finitely
generated groups."""

__version__ = "0.1.0"

from .errors import (
    CertificateInvalidError,
    DomainError,
    ElementOverflowError,
    ExactnessError,
    HorocoverError,
    InvalidElementError,
    InvalidInputError,
    SizeCapError,
)
from .groups import (
    DirectProduct,
    FiniteCyclic,
    FreeAbelian,
    FreeGroup,
    GroupModel,
    Heisenberg,
    Lamplighter,
    commutator,
    identity,
    inverse,
    multiply,
    parse_group,
)
from .metric import (
    BallGraph,
    FiniteMetricSpace,
    all_pairs_distances,
    cayley_ball,
    four_point_delta,
    greedy_cover,
    max_packing,
    word_metric_space,
)
from .growth import (
    GrowthFit,
    GrowthTable,
    a1_a2_report,
    covering_constant,
    fit_degree,
    growth_table,
    iterated_cover_bound,
)
from .horoball import (
    HoroballSpace,
    HoroPoint,
    MeshOracle,
    cayley_horoball,
    distortion_audit,
    horoball_ball_cover,
    horoball_distance,
    horosphere_distance,
    mesh_oracle_distance,
    project_to_level,
)
from .cusped import CuspedSpace, FreeProduct, cusped_space
from .audit import (
    CoverCertificate,
    GeometryProfile,
    TreeMap,
    build_asdim_certificate,
    check_cover_certificate,
    geometry_profile,
    orbit_growth_audit,
    separated_count,
    tree_lipschitz_map,
)
