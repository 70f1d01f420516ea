"""Expanding circle maps, transfer operators, and spectral verification.

The package builds piecewise linear expanding lifts of degree-p circle
maps, applies the associated transfer operator exactly on piecewise linear
functions with jump discontinuities, mollifies the derivative with a
Gaussian kernel, and verifies numerically that an isolated subleading
eigenvalue survives the smoothing, above the essential radius of the
smooth operator.
"""

from .bvcalc import (LAMBDA2, JumpPLFunction, KappaError, LYConstants,
                     ProjectionDivergence, ProjectionResult, apply_P,
                     apply_P_iterates, check_ly, check_ly_sequence,
                     ly_constants, project_phi2, random_jump_pl, sup_gN,
                     var_g, var_gN, variation)
from .circlemap import (BranchSystem, LiftError, NotMarkovError,
                        PiecewiseLinearLift, branch_system, build_lift,
                        derivative_inf, doubling_lift, eval_tau,
                        eval_tau_inv, keller_rugh, map_T, markov_check,
                        natural_grid, singular_set, weight_g)
from .mollifier import (ApproxCheck, C0Estimate, MollifiedLift, NewtonError,
                        apply_P_delta, apply_P_delta_n, approx_bound_check,
                        derivative_inf_delta, estimate_C0, eval_dtau_delta,
                        eval_tau_delta, eval_tau_delta_inv, map_T_delta,
                        mollify)
from .serialize import (SchemaError, coeffs_dump, coeffs_load,
                        lift_from_json, lift_to_json, matrix_to_csv,
                        sweep_to_csv, sweep_to_json)
from .spectra import (IdentificationError, InsufficientModesError,
                      SpectrumReport, SweepRow, assemble, decay_rate,
                      delta_sweep, eigenfunction, ess_radius_bound,
                      leading_spectrum, theorem_chain_ok, ulam_lambda_delta,
                      ulam_matrix, ulam_spectrum)
from .steptransfer import (CharPoly, StepFunction, TransitionMatrix,
                           apply_P_step, char_poly, eigenvalues,
                           left_eigenvector, second_eigenpair,
                           step_eigenfunction, transition_matrix)
from .surd import Surd, format_surd

__version__ = "0.1.0"

__all__ = [
    "ApproxCheck", "BranchSystem", "C0Estimate", "CharPoly",
    "IdentificationError", "InsufficientModesError", "JumpPLFunction",
    "KappaError", "LAMBDA2", "LYConstants", "LiftError", "MollifiedLift",
    "NewtonError", "NotMarkovError", "PiecewiseLinearLift",
    "ProjectionDivergence", "ProjectionResult", "SchemaError",
    "SpectrumReport", "StepFunction", "Surd", "SweepRow",
    "TransitionMatrix", "apply_P", "apply_P_delta", "apply_P_delta_n",
    "apply_P_iterates", "apply_P_step", "approx_bound_check", "assemble",
    "branch_system", "build_lift", "char_poly", "check_ly",
    "check_ly_sequence", "coeffs_dump", "coeffs_load", "decay_rate",
    "delta_sweep", "derivative_inf", "derivative_inf_delta",
    "doubling_lift", "eigenfunction", "eigenvalues", "ess_radius_bound",
    "estimate_C0", "eval_dtau_delta", "eval_tau", "eval_tau_delta",
    "eval_tau_delta_inv", "eval_tau_inv", "format_surd", "keller_rugh",
    "leading_spectrum", "left_eigenvector", "lift_from_json",
    "lift_to_json", "ly_constants", "map_T", "map_T_delta",
    "markov_check", "matrix_to_csv", "mollify", "natural_grid",
    "project_phi2", "random_jump_pl", "second_eigenpair", "singular_set",
    "step_eigenfunction", "sup_gN", "sweep_to_csv", "sweep_to_json",
    "theorem_chain_ok", "transition_matrix", "ulam_lambda_delta",
    "ulam_matrix", "ulam_spectrum", "var_g", "var_gN", "variation",
    "weight_g",
]
