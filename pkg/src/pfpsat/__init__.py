"""Parallel fixed-point quantum search for SAT, simulated on statevectors."""
from .cnf import CnfError, CnfFormula, load_dimacs, parse_dimacs
from .schedule import PhiSchedule, critical_phi, grover_angle, phi_critical, phi_unknown
from .search import PfpRunReport, grover_run, pfp_run, pfp_trajectories

__version__ = "0.1.0"

__all__ = [
    "CnfError", "CnfFormula", "load_dimacs", "parse_dimacs", "PhiSchedule", "critical_phi",
    "grover_angle", "phi_critical", "phi_unknown", "PfpRunReport", "grover_run", "pfp_run",
    "pfp_trajectories", "__version__",
]
