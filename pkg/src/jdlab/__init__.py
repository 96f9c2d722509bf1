"""Joint matrix diagonalization lab."""
from .cost import cost_Y, cost_via_gamma, gamma, off
from .ensemble import (
    DiagonalSet,
    PerturbationSetup,
    Transvection,
    build_M0,
    build_M_a_lambda,
    build_M_lambda,
    build_N_a_lambda,
    decompose_transvections,
    product_ensemble,
    random_setup,
    separation_condition,
    transvection_matrix,
)
from .linalg import adjoint, fro_dist, is_antihermitian, is_unitary, random_unitary, unit_basis
from .perturbation import AlignmentJ, align, build_G, f_coeff, predicted_diagonalizer
from .solver import SolverConfig, SolveResult, SweepReport, jacobi_minimize, lambda_sweep
from .stationarity import S_first_order, S_map, T_map, first_order_terms, stationarity_residual

__version__ = "0.1.0"
