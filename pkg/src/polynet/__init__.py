"""Weak and strong nets for polynomial superlevel sets of finite measures.

The pipeline lifts a weighted point cloud by the Veronese map, finds a
centerpoint of the lifted cloud, and writes it as a short convex combination
of lifted points.  The atoms form a net: every polynomial of the given degree
that is nonnegative on them is nonnegative on a large share of the cloud.
"""
__version__ = "0.1.0"

from ._backend import backend_name, compiled_available, set_backend, use_backend
from .adversary import (AdversaryReport, exact_min_mass, heuristic_min_mass, kept_set,
                        non_net_witness, witness_report)
from .bounds_lab import BoundsRecord, GridMeasurement, caratheodory_bounds, grid_vanishing_dimension
from .decompose import (AtomicMeasure, MomentMatrix, PrunedCombination, caratheodory_prune,
                        decompose_quadratic, moment_matrix_from_lift)
from .depth import (CenterpointResult, DepthCertificate, OrientedHalfspace, affine_hull_reduce,
                    centerpoint, find_centerpoint, tukey_depth)
from .errors import (BasisOverflowError, CapabilityError, DegenerateInputError, DimensionError,
                     EigenConvergenceError, InfeasibleError, LPIterationError, NotPSDError,
                     PolynetError)
from .lpsolve import LinearProgram, LPResult, lp_feasible_point, lp_solve
from .nets import NetCertificate, strong_net, weak_net_quadratic
from .numlin import exact_rank, null_space, rank, sym_eig
from .poly_core import (MonomialBasis, PointCloud, Poly, basis_size, enumerate_monomials,
                        evaluation_matrix, vanishing_polynomials, veronese_affine,
                        veronese_homogeneous)

__all__ = [name for name in dir() if not name.startswith("_")]
