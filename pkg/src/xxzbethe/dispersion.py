"""Particle and hole dispersion, two-excitation kinematics, finite-size checks.

``epsilon(p) = (pi/2) (sin eta / eta) sin p`` serves both excitation kinds.

Momenta of single excitations at size ``L`` are read off the quantum
numbers, relative to the ``M = L/2`` ground state:

* hole at ``h`` (real line): ``p = pi/2 + 2 pi h / L``
* particle at ``n`` (shifted line): ``p = 3 pi/2 - 2 pi n_eq / L`` with
  ``n_eq = n`` for ``n > 0`` and ``n + L`` otherwise.

With the logarithmic equations summed over all roots these give the total
momentum change of a Bethe state exactly, modulo ``2 pi``.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .kernels import Anisotropy
from .solver import BetheSystem, to_number
from .states import ground_numbers

__all__ = [
    "Kind", "Excitation", "DispersionPoint", "epsilon", "two_excitation",
    "fold", "hole_momentum", "particle_momentum", "ph_system", "hole_hole_system",
    "particle_particle_system", "excitation", "scan", "to_csv",
]


class Kind(str, enum.Enum):
    PARTICLE = "particle"
    HOLE = "hole"


def fold(p):
    """Map momenta into ``(-pi, pi]``."""
    p = np.asarray(p, dtype=float)
    out = p - 2 * np.pi * np.ceil((p - np.pi) / (2 * np.pi))
    return float(out) if out.ndim == 0 else out


def epsilon(p, eta: float):
    """One-excitation energy ``(pi/2)(sin eta / eta) sin p``.

    >>> round(float(epsilon(math.pi / 2, math.pi / 2)), 12)
    1.0
    """
    if not 0.0 < eta <= math.pi / 2 + 1e-15:
        raise ValueError("eta must lie in (0, pi/2]")
    return 0.5 * np.pi * np.sin(eta) / eta * np.sin(p)


def two_excitation(p1: float, p2: float, eta: float) -> tuple:
    """``(dE, dP) = (eps(p1) + eps(p2), p1 + p2)`` with ``dP`` folded."""
    return float(epsilon(p1, eta) + epsilon(p2, eta)), fold(p1 + p2)


@dataclass(frozen=True)
class Excitation:
    kind: Kind
    p: float
    energy: float

    @classmethod
    def from_formula(cls, kind, p: float, eta: float) -> "Excitation":
        return cls(Kind(kind), fold(p), float(epsilon(p, eta)))


def hole_momentum(h, L: int) -> float:
    return fold(np.pi / 2 + 2 * np.pi * float(to_number(h)) / L)


def particle_momentum(n, L: int) -> float:
    v = float(to_number(n))
    return fold(1.5 * np.pi - 2 * np.pi * (v if v > 0 else v + L) / L)


# excited systems --------------------------------------------------------------

def ph_system(L: int, hole, particle, a: Anisotropy) -> BetheSystem:
    """``M = L/2`` ground state with ``hole`` removed and ``particle`` added."""
    gs = list(ground_numbers(L, L // 2))
    h, p = to_number(hole), to_number(particle)
    if h not in gs:
        raise ValueError(f"hole {h} is not in the ground-state sea")
    if p in gs:
        raise ValueError(f"particle {p} is already occupied")
    return BetheSystem(L, L // 2, a, [v for v in gs if v != h] + [p])


def _vacancy_sea(L: int) -> list:
    # L/2 + 1 symmetric vacancies for M = L/2 - 1
    q = Fraction(L, 4)
    return [-q + j for j in range(L // 2 + 1)]


def hole_hole_system(L: int, h1, h2, a: Anisotropy) -> BetheSystem:
    """``M = L/2 - 1`` state with holes ``h1, h2`` among ``-L/4 .. L/4``."""
    sea = _vacancy_sea(L)
    hs = {to_number(h1), to_number(h2)}
    if len(hs) != 2 or not hs <= set(sea):
        raise ValueError("holes must be two distinct vacancies in [-L/4, L/4]")
    return BetheSystem(L, L // 2 - 1, a, [v for v in sea if v not in hs])


def particle_particle_system(L: int, p1, p2, a: Anisotropy) -> BetheSystem:
    """``M = L/2 + 1`` state: ``L/2 - 1`` consecutive real numbers plus ``p1, p2``."""
    sea = list(ground_numbers(L, L // 2 - 1))
    ps = [to_number(p1), to_number(p2)]
    if len(set(ps)) != 2 or set(ps) & set(sea):
        raise ValueError("particles must be distinct and outside the sea")
    return BetheSystem(L, L // 2 + 1, a, sea + ps)


# Bethe-state excitation energies ------------------------------------------------

@dataclass(frozen=True)
class DispersionPoint:
    L: int
    eta: float
    kind: str
    numbers: tuple
    p1: float
    p2: float
    dE_formula: float
    dP_formula: float
    dE_ba: float
    dP_ba: float
    rootset: object = field(default=None, repr=False, compare=False)

    @property
    def energy_error(self) -> float:
        return abs(self.dE_ba - self.dE_formula)

    @property
    def momentum_error(self) -> float:
        return abs(fold(self.dP_ba - self.dP_formula))


_ground_cache: dict = {}


def _ground(L: int, a: Anisotropy):
    from .ed_oracle import energy_from_roots, total_momentum
    from .evolution import solve_at

    key = (L, a.eta)
    if key not in _ground_cache:
        rs = solve_at(BetheSystem(L, L // 2, a, ground_numbers(L, L // 2)))
        _ground_cache[key] = (energy_from_roots(rs), total_momentum(rs))
    return _ground_cache[key]


def excitation(sys: BetheSystem, kind: str, p1: float, p2: float) -> DispersionPoint:
    """Solve ``sys`` and compare its ``(dE, dP)`` above the ``M = L/2`` ground state."""
    from .ed_oracle import energy_from_roots, total_momentum
    from .evolution import solve_at

    a = sys.anisotropy
    E0, P0 = _ground(sys.L, a)
    rs = solve_at(sys)
    dE, dP = two_excitation(p1, p2, a.eta)
    return DispersionPoint(sys.L, a.eta, kind, tuple(str(v) for v in sys.numbers), p1, p2, dE, dP,
                           energy_from_roots(rs) - E0, fold(total_momentum(rs) - P0), rs)


def scan(L: int, a: Anisotropy, kind: str) -> list:
    """Symmetric excitation pairs for plotting ``epsilon``.

    ``kind``:
      * ``"ph"``: hole ``h`` with particle ``L/2 - h`` (equal momenta).
      * ``"hole"``: holes ``-h, h`` (equal energies).
      * ``"particle"``: particles ``n, -n`` (equal energies).
    Each point's single-excitation energy is half of ``dE``.
    """
    pts = []
    q = Fraction(L, 4)
    if kind == "ph":
        for h in ground_numbers(L, L // 2):
            if h <= 0:
                continue
            p = Fraction(L, 2) - h
            ph = hole_momentum(h, L)
            pts.append(excitation(ph_system(L, h, p, a), kind, ph, particle_momentum(p, L)))
    elif kind == "hole":
        for h in _vacancy_sea(L):
            if h <= 0:
                continue
            pts.append(excitation(hole_hole_system(L, -h, h, a), kind,
                                  hole_momentum(-h, L), hole_momentum(h, L)))
    elif kind == "particle":
        top = ground_numbers(L, L // 2 - 1).values[-1]
        n = top + 2
        while n < Fraction(L, 2):
            if n > q:
                pts.append(excitation(particle_particle_system(L, -n, n, a), kind,
                                      particle_momentum(-n, L), particle_momentum(n, L)))
            n += 1
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return pts


def to_csv(points) -> str:
    """CSV with columns ``p, eps_formula, eps_ba, L`` (one row per symmetric pair)."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["p", "eps_formula", "eps_ba", "L"])
    for pt in points:
        w.writerow([f"{pt.p2:.15g}", f"{pt.dE_formula / 2:.15g}", f"{pt.dE_ba / 2:.15g}", pt.L])
    return buf.getvalue()
