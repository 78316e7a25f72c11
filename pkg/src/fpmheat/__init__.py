"""Meshless fragile-points heat conduction solvers.

Four spatial discretizations of transient heat conduction in anisotropic,
continuously nonhomogeneous media share one geometry/operator stack:

* ``fpm``  -- Galerkin baseline (linear trial = test functions);
* ``pg1``  -- collocation variant (Dirac test functions, quadratic trials);
* ``pg2``  -- finite-volume variant (Heaviside test functions);
* ``pg3``  -- singular-solution variant (local fundamental-solution tests).

See :mod:`fpmheat.harness` for the benchmark catalog and the ``fpm`` CLI.
"""

from . import errors
from .geometry import (
    Box,
    Face,
    Partition,
    PointCloud,
    PolygonDomain,
    SupportSet,
    build_structured_partition,
    build_voronoi_partition,
    compute_supports,
    grid_points,
    import_mesh,
    insert_crack,
    random_points,
    regular_polygon,
    sunflower_disc_points,
)
from .approximation import (
    DqOperator,
    ShapeFunction,
    build_gfd,
    build_rbf_dq,
    shape_eval,
    transform_to_standard,
)
from .materials import MaterialField, fg_preset, grad_k
from .assembly import (
    DiscreteSystem,
    ProblemSpec,
    SolverConfig,
    assemble,
    assemble_collocation,
    assemble_finite_volume,
    assemble_galerkin,
    assemble_singular,
    estimate_kbar,
    jump_and_average,
    structure_report,
)
from .timeint import TransientSolution, run_transient, solve_steady, step_backward_euler

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
