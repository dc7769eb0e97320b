"""Simulation and Gaussian-pulse optimization of Lambda-type ensemble quantum memory."""
from .bound import bound_report, eta_opt, kernel_matrix
from .fields import ControlParams, MemoryParams, control_envelope, signal_bandwidth, signal_envelope
from .numerics import cheb_grid
from .optimizer import OptResult, nelder_mead, objective, optimize_control, optimize_theta_only
from .protocols import ProtocolDiagnostics, adiabaticity, ats_effective_depth, character_ratio, classify
from .shapeopt import build_storage_map, compare_methods, optimal_signal_efficiency
from .solver import GridSpec, SolverResult, energy_balance, simulate_storage, solve, storage_efficiency
from .sweep import SweepRecord, SweepSpec, resume, run_sweep

__version__ = "0.1.0"
