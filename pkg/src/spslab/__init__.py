"""Normalized standing waves and dynamics for the Schrodinger-Poisson-Slater equation

    i u_t + Lap u - (|x|^{-1} * |u|^2) u + |u|^{p-2} u = 0   in R^3,  10/3 < p < 6.
"""
from .energy import Couplings, EnergyReport, energy_report
from .fibering import Classification, classify_initial_datum, fiber_scan, project_to_V, t_star
from .fields import BoxField, RadialField, gaussian, random_field, read_snapshot, write_snapshot
from .grids import BoxGrid, RadialGrid
from .groundstate import GroundState, SolverOptions, gamma_curve, solve_ground_state
from .dynamics import SimConfig, Termination, TrajectoryRecord, evolve, strang_step

__version__ = "0.1.0"

__all__ = [
    "BoxField", "BoxGrid", "Classification", "Couplings", "EnergyReport", "GroundState",
    "RadialField", "RadialGrid", "SimConfig", "SolverOptions", "Termination",
    "TrajectoryRecord", "classify_initial_datum", "energy_report", "evolve", "fiber_scan",
    "gamma_curve", "gaussian", "project_to_V", "random_field", "read_snapshot",
    "solve_ground_state", "strang_step", "t_star", "write_snapshot",
]
