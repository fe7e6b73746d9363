"""Bethe Ansatz workbench for the periodic XXZ chain with roots on two lines."""
from .kernels import Anisotropy, Line, Rapidity
from .solver import (BetheSystem, Escaped, NoConvergence, QuantumNumbers, RootSet,
                     SolverConfig, critical_number, newton_solve, seed_from_xx)
from .states import dual_numbers, ground_system, real_vacancies, verify_duality
from .evolution import EvolveConfig, evolve, solve_at

__version__ = "0.1.0"
