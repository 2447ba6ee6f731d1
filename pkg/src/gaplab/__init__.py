"""gaplab: gradient blow-up rates for insulated conductivity problems.

The sphere eigenvalue ``lambda_1`` of the weight ``a(xi) = xi^T M xi``
fixes the exponent ``(alpha(lambda_1) - 1) / 2`` with which the gradient
blows up as the gap ``epsilon`` closes.  The subpackages compute the
spectrum, the exponent algebra, the reduced and full-gap solutions and
the sweeps that compare the two.
"""
__version__ = "0.1.0"

from .errors import (ConvergenceError, GaplabError, GeometryError, InapplicableError,
                     NumericalError, SetupError, SweepAborted, UsageError)
from .exponents import ExponentReport, alpha_of, ball_beta, gradient_exponent, predict_rate
from .geometry import GapGeometry, Weight, build_weight, gap_width
from .spectral import SpectralBasis, classify_parity, odd_eigenfunction, solve_spectrum
from .radialode import (RadialFunction, apply_L, extract_leading, geometric_grid,
                        reduction_of_order)
from .reduced import (DiskField, DiskGrid, Forcing, barrier_check, decompose_five,
                      disk_grid, mode_norm, project_mode, solve_reduced, weighted_norm)
from .gapfull import average_vertical, averaged_residual, map_strip, solve_gap

__all__ = [
    "__version__", "GaplabError", "UsageError", "GeometryError", "SetupError",
    "NumericalError", "ConvergenceError", "InapplicableError", "SweepAborted",
    "ExponentReport", "alpha_of", "ball_beta", "gradient_exponent", "predict_rate",
    "GapGeometry", "Weight", "build_weight", "gap_width",
    "SpectralBasis", "classify_parity", "odd_eigenfunction", "solve_spectrum",
    "RadialFunction", "apply_L", "extract_leading", "geometric_grid", "reduction_of_order",
    "DiskField", "DiskGrid", "Forcing", "barrier_check", "decompose_five", "disk_grid",
    "mode_norm", "project_mode", "solve_reduced", "weighted_norm",
    "average_vertical", "averaged_residual", "map_strip", "solve_gap",
]
