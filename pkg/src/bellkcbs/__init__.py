"""Simulator and verification toolkit for joint CHSH and KCBS violation in a
qubit-qutrit Bell scenario where Bob's measurements form a KCBS pentagon."""
from .errors import DatasetError, DomainError, NumericError, StructuralError
from .hidden import classical_bounds, enumerate_local_vertices, enumerate_noncontextual_vertices
from .inequalities import alpha_chsh, beta_kcbs, classify, evaluate, quantum_correlators
from .quantum import THETA_U, THETA_V, QuantumModel, quantum_behavior
from .scenario import Behavior, MarginalBehavior, Scenario
from .search import joint_violation_window, optimize_state_params, phi_scan
from .shotnoise import simulate_experiment

__version__ = "0.1.0"

__all__ = [
    "Behavior", "DatasetError", "DomainError", "MarginalBehavior", "NumericError", "QuantumModel",
    "Scenario", "StructuralError", "THETA_U", "THETA_V", "alpha_chsh", "beta_kcbs", "classical_bounds",
    "classify", "enumerate_local_vertices", "enumerate_noncontextual_vertices", "evaluate",
    "joint_violation_window", "optimize_state_params", "phi_scan", "quantum_behavior",
    "quantum_correlators", "simulate_experiment",
]
