"""Numerical lab for the Hurwitz zeta function on the critical line.

Evaluation (Euler-Maclaurin, approximate functional equation, blocked grids),
Diophantine tools for the shift parameter, moment integrals, value
distribution and the combinatorics of the diagonal and off-diagonal terms.
"""

from .diophantine import (ContinuedFraction, bilinear_exp_sum, expand_cf, growth_check,
                          irrationality_exponent_estimate, kruse_sum, synth_liouville)
from .moments import (MomentEstimate, QuadratureSpec, c_alpha, gaussian_sample_and_test, holder_consistency,
                      make_bump_window, moment_integral, rane_prediction, rational_fourth_prediction)
from .offdiagonal import (DiagonalEquationInstance, OffDiagonalTuple, diagonal_main_term, enumerate_diagonal,
                          gcd_refine, near_diagonal_filter, offdiag_oscillatory_estimate, parametrize_offdiagonal)
from .shift import ShiftParameter, as_shift
from .special_functions import chi_critical, chi_factor, log_chi, log_gamma
from .zeta_eval import (WeightProfile, hurwitz_afe, hurwitz_euler_maclaurin, periodic_zeta, riemann_zeta, weight_w,
                        zeta_critical)
from .critical import zeta_grid, zeta_points

__version__ = "0.1.0"

__all__ = [
    "ContinuedFraction", "DiagonalEquationInstance", "MomentEstimate", "OffDiagonalTuple", "QuadratureSpec",
    "ShiftParameter", "WeightProfile", "as_shift", "bilinear_exp_sum", "c_alpha", "chi_critical", "chi_factor",
    "diagonal_main_term", "enumerate_diagonal", "expand_cf", "gaussian_sample_and_test", "gcd_refine",
    "growth_check", "holder_consistency", "hurwitz_afe", "hurwitz_euler_maclaurin",
    "irrationality_exponent_estimate", "kruse_sum", "log_chi", "log_gamma", "make_bump_window", "moment_integral",
    "near_diagonal_filter", "offdiag_oscillatory_estimate", "parametrize_offdiagonal", "periodic_zeta",
    "rane_prediction", "rational_fourth_prediction", "riemann_zeta", "synth_liouville", "weight_w",
    "zeta_critical", "zeta_grid", "zeta_points",
]
