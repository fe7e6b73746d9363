"""Quantum-number bookkeeping, vacancy counts and the particle-hole map.

Brillouin window
    The ``L`` allowed values of a parity class are
    ``{-L/2 + p, ..., L/2 - 1 + p}`` with ``p = 1`` for integers and
    ``p = 1/2`` for half-integers.  The integer window therefore contains
    ``L/2`` but not ``-L/2``.

Particle-hole map
    With holes ``n0`` taken over the window, a hole maps to
    ``L/2 - n0`` if ``n0 >= 0`` and to ``-L/2 - n0`` if ``n0 < 0``.  The
    hole ``n0 = 0`` (integers only) is sent to ``L/2``, the only image that
    stays inside the window and keeps the map an involution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .kernels import Anisotropy
from .solver import BetheSystem, QuantumNumbers, to_number

__all__ = [
    "HoleSet", "DualPair", "DualityReport", "AtJumpPoint", "WindowMismatch",
    "window", "ground_numbers", "ground_system", "holes", "dual_map",
    "real_vacancies", "complex_count", "jump_points", "near_jump",
    "dual_numbers", "verify_duality",
]

HALF = Fraction(1, 2)


class AtJumpPoint(ValueError):
    """The vacancy formula is evaluated at (or too close to) a jump point."""


class WindowMismatch(ValueError):
    """Quantum numbers fall outside the Brillouin window."""


def _parity_offset(M: int) -> Fraction:
    return Fraction(1) if M % 2 else HALF


def window(L: int, M: int) -> tuple:
    """The ``L`` allowed quantum numbers for ``M`` roots.

    >>> [str(v) for v in window(4, 1)]
    ['-1', '0', '1', '2']
    >>> [str(v) for v in window(4, 2)]
    ['-3/2', '-1/2', '1/2', '3/2']
    """
    p = _parity_offset(M)
    lo = -Fraction(L, 2) + p
    return tuple(lo + j for j in range(L))


def ground_numbers(L: int, M: int) -> QuantumNumbers:
    """Symmetric consecutive filling of ``M`` values.

    >>> [str(v) for v in ground_numbers(8, 3)]
    ['-1', '0', '1']
    """
    if not 0 <= M <= L:
        raise ValueError("0 <= M <= L required")
    return QuantumNumbers(tuple(Fraction(M - 1, 2) * -1 + j for j in range(M)))


def ground_system(L: int, M: int, a: Anisotropy) -> BetheSystem:
    return BetheSystem(L, M, a, ground_numbers(L, M))


@dataclass(frozen=True)
class HoleSet:
    """Window values not occupied by a quantum-number set."""

    values: tuple


def holes(numbers: Iterable, L: int, M: int | None = None) -> HoleSet:
    nums = [to_number(v) for v in numbers]
    M = len(nums) if M is None else M
    win = window(L, M)
    occupied = set(nums)
    if not occupied <= set(win):
        raise WindowMismatch(f"quantum numbers outside the window {win[0]}..{win[-1]}")
    return HoleSet(tuple(v for v in win if v not in occupied))


def _map_hole(n0: Fraction, L: int) -> Fraction:
    h = Fraction(L, 2)
    return h - n0 if n0 >= 0 else -h - n0


def dual_map(numbers: Iterable, L: int) -> tuple:
    """Apply the particle-hole map to a quantum-number set.

    Returns
    -------
    dual : tuple of Fraction
        The ``L - M`` dual quantum numbers, sorted.
    hole_map : dict
        ``{hole: dual number}``.

    Examples
    --------
    >>> d, _ = dual_map([-1, 0, 1], 8)
    >>> [int(v) for v in d]
    [-2, -1, 0, 1, 2]
    """
    nums = [to_number(v) for v in numbers]
    hs = holes(nums, L, len(nums))
    M_dual = L - len(nums)
    if len(hs.values) != M_dual:
        raise WindowMismatch("hole count differs from L - M")
    mp = {n0: _map_hole(n0, L) for n0 in hs.values}
    dual = tuple(sorted(mp.values()))
    if not set(dual) <= set(window(L, M_dual)):
        raise WindowMismatch("dual numbers left the window")
    return dual, mp


@dataclass(frozen=True)
class DualPair:
    primal: BetheSystem
    dual: BetheSystem
    hole_map: dict


def dual_numbers(primal: BetheSystem) -> DualPair:
    """Dual system with ``L - M`` roots obtained by the particle-hole map.

    The map is applied to any ``M``; applied twice it returns the
    original set.
    """
    dual, mp = dual_map(primal.numbers, primal.L)
    sys = BetheSystem(primal.L, primal.L - primal.M, primal.anisotropy, QuantumNumbers(dual))
    return DualPair(primal, sys, mp)


# vacancy formulas ---------------------------------------------------------

def jump_points(k: int) -> list:
    """Jump points ``(pi/k)(m + 1/2)`` inside ``(0, pi/2]``.

    >>> [round(v / math.pi, 4) for v in jump_points(3)]
    [0.1667, 0.5]
    """
    k = abs(int(k))
    if k < 1:
        raise ValueError("k >= 1 required")
    out, m = [], 0
    while True:
        eta = math.pi / k * (m + 0.5)
        if eta > math.pi / 2 + 1e-12:
            return out
        out.append(min(eta, math.pi / 2))
        m += 1


def near_jump(k: int, eta: float, width: float) -> bool:
    """True if ``eta`` lies within ``width`` of a jump point of ``|k|``."""
    if k == 0:
        return False
    return any(abs(eta - e) <= width for e in jump_points(k))


def _integer_part(k: int, eta: float, eps: float) -> int:
    arg = 0.5 + abs(k) * eta / math.pi
    if abs(arg - round(arg)) < eps:
        raise AtJumpPoint(f"1/2 + |k| eta/pi = {arg} is an integer")
    return math.floor(arg)


def real_vacancies(L: int, k: int, eta: float, eps: float = 1e-6) -> int:
    """Real-axis count ``R`` from the vacancy formulas.

    ``k >= 0``: ``R = L/2 - k + 2 [1/2 + k eta/pi]``;
    ``k < 0``: ``R = L/2 + |k| - 2 [1/2 + |k| eta/pi]``.

    >>> real_vacancies(12, 2, 0.1 * math.pi)
    4
    """
    f = _integer_part(k, eta, eps)
    if k >= 0:
        return L // 2 - k + 2 * f
    return L // 2 - k - 2 * f


def complex_count(L: int, M: int, eta: float, eps: float = 1e-6) -> int:
    """``C = M - R`` for ``k = M - L/2 >= 0``.

    >>> complex_count(12, 8, 0.3 * math.pi), complex_count(12, 8, 0.2 * math.pi)
    (2, 4)
    """
    k = M - L // 2
    if k < 0:
        raise ValueError("complex_count is defined for k >= 0")
    return M - real_vacancies(L, k, eta, eps)


# duality verification -----------------------------------------------------

@dataclass(frozen=True)
class DualityReport:
    """Comparison of the two descriptions of one eigenstate."""

    primal_energy: float
    dual_energy: float
    delta_e: float
    overlap: float
    ed_energy: float
    ed_overlap_primal: float
    ed_overlap_dual: float
    success: bool
    note: str = ""


def verify_duality(pair: DualPair, tol: float = 1e-8, solver_cfg=None, evolve_cfg=None) -> DualityReport:
    """Solve both members of a dual pair and compare their eigenvectors.

    The dual vector (sector ``L - M``) is compared with the spin-flipped
    primal vector; both are also matched against exact diagonalisation.
    Success means ``|dE| < tol`` and ``overlap > 1 - tol``.
    """
    from . import ed_oracle as ed
    from .evolution import solve_at

    a, L = pair.primal.anisotropy, pair.primal.L
    rs_p = solve_at(pair.primal, solver_cfg, evolve_cfg)
    rs_d = solve_at(pair.dual, solver_cfg, evolve_cfg)
    vp = ed.bethe_amplitudes(rs_p)
    vd = ed.bethe_amplitudes(rs_d)
    if vp.is_null or vd.is_null:
        return DualityReport(math.nan, math.nan, math.inf, 0.0, math.nan, 0.0, 0.0, False, "null vector")
    e_p, e_d = ed.energy_from_roots(rs_p), ed.energy_from_roots(rs_d)
    flipped = ed.spin_flip(vp)
    ov = ed.overlap(flipped, vd)
    eig = ed.diagonalize(ed.build_hamiltonian(L, a.delta, pair.dual.M))
    md = ed.match_state(vd, eig)
    eig_p = ed.diagonalize(ed.build_hamiltonian(L, a.delta, pair.primal.M))
    mp = ed.match_state(vp, eig_p)
    de = abs(e_p - e_d)
    ok = de < tol and ov > 1 - tol and abs(md.ed_energy - e_d) < tol
    return DualityReport(e_p, e_d, de, ov, md.ed_energy, mp.overlap, md.overlap, bool(ok))
