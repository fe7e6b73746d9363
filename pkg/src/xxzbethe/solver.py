"""Logarithmic Bethe equations: residual, Jacobian, damped Newton.

For a root ``t_a`` with quantum number ``n_a`` the equation reads::

    F_a = L phi(t_a) - 2 pi n_a^eq - sum_{g != a} phi2(t_a - t_g) + twist

``n_a^eq`` equals ``n_a`` except for shifted-line roots with ``n_a < 0``,
whose continuous ``phi`` branch sits near ``pi`` and therefore needs
``n_a + L`` (the zone-folding of quantum numbers).  Roots that have escaped
to ``+-inf`` leave behind the constant ``twist = (pi - 2 eta) sum(sign)``,
which vanishes when escapes are balanced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .kernels import (
    Anisotropy, Line, Rapidity, CoincidentRoots,
    phi_real, phi_shifted, phi_real_prime, phi_shifted_prime,
    phi2_same, phi2_mixed, phi2_same_prime, phi2_mixed_prime,
)

__all__ = [
    "QuantumNumbers", "BetheSystem", "Escaped", "RootSet", "SolverConfig",
    "BoundaryAmbiguous", "NoConvergence", "ParityError",
    "to_number", "equation_number", "zone_number",
    "residual", "jacobian", "newton_solve", "counting_function",
    "counting_limit", "critical_number", "classify_number", "seed_from_xx",
]


class BoundaryAmbiguous(ValueError):
    """A quantum number sits on the real/shifted boundary ``n_c``."""


class NoConvergence(RuntimeError):
    """Newton failed; ``rootset`` holds the best iterate."""

    def __init__(self, msg: str, rootset: "RootSet | None" = None):
        super().__init__(msg)
        self.rootset = rootset


class ParityError(ValueError):
    """Quantum numbers violate the integer / half-integer rule."""


def to_number(v) -> Fraction:
    """Convert to an exact integer or half-integer.

    >>> to_number(1.5), to_number("-3/2"), to_number(2)
    (Fraction(3, 2), Fraction(-3, 2), Fraction(2, 1))
    """
    f = Fraction(v) if not isinstance(v, float) else Fraction(v).limit_denominator(2)
    if (2 * f).denominator != 1 or (isinstance(v, float) and abs(float(f) - v) > 1e-12):
        raise ParityError(f"{v!r} is neither integer nor half-integer")
    return f


def equation_number(n, line: Line, L: int) -> float:
    """Right-hand-side number used in the equation of a root on ``line``."""
    n = float(n)
    return n + L if (line is Line.SHIFTED and n < 0) else n


def zone_number(v: float, L: int) -> float:
    """Fold an equation number back into ``(-L/2, L/2]``."""
    return v - L if v > L / 2 else v


@dataclass(frozen=True)
class QuantumNumbers:
    """Sorted, distinct integers or half-integers."""

    values: tuple

    def __post_init__(self):
        vals = tuple(sorted(to_number(v) for v in self.values))
        if len(set(vals)) != len(vals):
            raise ParityError("quantum numbers must be distinct")
        if len({v.denominator for v in vals}) > 1:
            raise ParityError("mixed integer and half-integer quantum numbers")
        object.__setattr__(self, "values", vals)

    @property
    def half_integer(self) -> bool:
        return bool(self.values) and self.values[0].denominator == 2

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


@dataclass(frozen=True)
class BetheSystem:
    """Chain length, root count, anisotropy and quantum numbers."""

    L: int
    M: int
    anisotropy: Anisotropy
    numbers: QuantumNumbers

    def __post_init__(self):
        if not isinstance(self.numbers, QuantumNumbers):
            object.__setattr__(self, "numbers", QuantumNumbers(tuple(self.numbers)))
        if self.L <= 0 or self.L % 2:
            raise ValueError("L must be a positive even integer")
        if not 0 <= self.M <= self.L:
            raise ValueError("M must lie in [0, L]")
        if len(self.numbers) != self.M:
            raise ValueError(f"expected {self.M} quantum numbers, got {len(self.numbers)}")
        if self.M and self.numbers.half_integer != (self.M % 2 == 0):
            kind = "half-integers" if self.M % 2 == 0 else "integers"
            raise ParityError(f"M={self.M} requires {kind}")

    @property
    def k(self) -> int:
        return self.M - self.L // 2

    @property
    def eta(self) -> float:
        return self.anisotropy.eta

    def at(self, a: Anisotropy) -> "BetheSystem":
        return replace(self, anisotropy=a)


@dataclass(frozen=True)
class Escaped:
    """A root that sits at ``sign * inf``.

    Its quantum number and last line are kept when known; the phase it
    imposes on finite roots does not depend on them.
    """

    sign: int
    number: Fraction | None = None
    line: Line | None = None


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    max_iter: int = 200
    max_halvings: int = 20
    boundary_eps: float = 1e-6
    coincidence_tol: float = 1e-9


@dataclass(frozen=True)
class RootSet:
    """Solution (or best attempt) for a :class:`BetheSystem`.

    ``roots`` and ``numbers`` are co-indexed and hold the finite roots;
    escaped roots are listed separately.
    """

    system: BetheSystem
    roots: tuple
    numbers: tuple
    escaped: tuple = ()
    residual_norm: float = math.inf
    iterations: int = 0
    converged: bool = False
    message: str = ""

    @property
    def re(self) -> np.ndarray:
        return np.array([r.re for r in self.roots], dtype=float)

    @property
    def shifted(self) -> np.ndarray:
        return np.array([r.line is Line.SHIFTED for r in self.roots], dtype=bool)

    @property
    def n_real(self) -> int:
        return int(np.count_nonzero(~self.shifted))

    @property
    def n_shifted(self) -> int:
        return int(np.count_nonzero(self.shifted))

    @property
    def n_escaped(self) -> int:
        return len(self.escaped)

    @property
    def R(self) -> int:
        """Finite roots on the real axis."""
        return self.n_real

    @property
    def C(self) -> int:
        """Roots off the real axis: shifted plus escaped."""
        return self.system.M - self.n_real

    def with_arrays(self, x, sh) -> "RootSet":
        roots = tuple(Rapidity(float(v), Line.SHIFTED if s else Line.REAL) for v, s in zip(x, sh))
        return replace(self, roots=roots)


# core ---------------------------------------------------------------------

def _twist(escaped: Iterable[Escaped], a: Anisotropy) -> float:
    s = sum(e.sign for e in escaped)
    return 0.0 if s == 0 else (math.pi - 2.0 * a.eta) * s


def _eq_numbers(numbers, sh, L) -> np.ndarray:
    n = np.array([float(v) for v in numbers], dtype=float)
    return np.where(sh & (n < 0), n + L, n)


def _pair_matrices(x, sh, a, derivative=True):
    d = x[:, None] - x[None, :]
    same = sh[:, None] == sh[None, :]
    P = np.where(same, phi2_same(d, a), phi2_mixed(d, a))
    np.fill_diagonal(P, 0.0)
    if not derivative:
        return P, None
    D = np.where(same, phi2_same_prime(d, a), phi2_mixed_prime(d, a))
    np.fill_diagonal(D, 0.0)
    return P, D


def _coincident(x, sh, tol) -> bool:
    for line in (False, True):
        v = np.sort(x[sh == line])
        if v.size > 1 and np.min(np.diff(v)) <= tol:
            return True
    return False


def _equations(x, sh, neq, L, a, twist, derivative=True):
    P, D = _pair_matrices(x, sh, a, derivative)
    bare = np.where(sh, phi_shifted(x, a), phi_real(x, a))
    F = L * bare - 2.0 * np.pi * neq - P.sum(axis=1) + twist
    if not derivative:
        return F, None
    J = D.copy()
    J[np.diag_indices_from(J)] = L * np.where(sh, phi_shifted_prime(x, a), phi_real_prime(x, a)) - D.sum(axis=1)
    return F, J


def _arrays(roots: Sequence[Rapidity]):
    x = np.array([r.re for r in roots], dtype=float)
    sh = np.array([r.line is Line.SHIFTED for r in roots], dtype=bool)
    return x, sh


def _numbers_for(sys: BetheSystem, roots, numbers):
    if numbers is None:
        numbers = sys.numbers.values
    if len(numbers) != len(roots):
        raise ValueError("roots and quantum numbers must be co-indexed")
    return numbers


def residual(roots: Sequence[Rapidity], sys: BetheSystem, numbers=None,
             escaped: Sequence[Escaped] = (), coincidence_tol: float = 1e-9) -> np.ndarray:
    """Residual vector ``F`` of the logarithmic Bethe equations.

    Parameters
    ----------
    roots : sequence of Rapidity
        Finite roots.
    sys : BetheSystem
    numbers : sequence, optional
        Quantum numbers co-indexed with ``roots``; defaults to ``sys.numbers``.
    escaped : sequence of Escaped
        Roots at infinity (contribute a constant twist).

    Raises
    ------
    CoincidentRoots
    """
    numbers = _numbers_for(sys, roots, numbers)
    x, sh = _arrays(roots)
    if _coincident(x, sh, coincidence_tol):
        raise CoincidentRoots("coincident roots on one line")
    F, _ = _equations(x, sh, _eq_numbers(numbers, sh, sys.L), sys.L, sys.anisotropy,
                      _twist(escaped, sys.anisotropy), derivative=False)
    return F


def jacobian(roots: Sequence[Rapidity], sys: BetheSystem, numbers=None,
             coincidence_tol: float = 1e-9) -> np.ndarray:
    """Exact Jacobian ``dF_a / d re_g``."""
    numbers = _numbers_for(sys, roots, numbers)
    x, sh = _arrays(roots)
    if _coincident(x, sh, coincidence_tol):
        raise CoincidentRoots("coincident roots on one line")
    _, J = _equations(x, sh, _eq_numbers(numbers, sh, sys.L), sys.L, sys.anisotropy, 0.0)
    return J


def newton_solve(seed: Sequence[Rapidity], sys: BetheSystem, cfg: SolverConfig | None = None,
                 numbers=None, escaped: Sequence[Escaped] = (), strict: bool = False) -> RootSet:
    """Damped Newton iteration at fixed line assignments.

    The step is halved (at most ``cfg.max_halvings`` times) until the
    sup-norm of the residual decreases.  Steps producing coincident roots
    are halved as well.

    Parameters
    ----------
    seed : sequence of Rapidity
    sys : BetheSystem
    cfg : SolverConfig, optional
    numbers : sequence, optional
        Quantum numbers of the finite roots; defaults to ``sys.numbers``.
    escaped : sequence of Escaped
    strict : bool
        Raise :class:`NoConvergence` instead of returning an unconverged set.

    Returns
    -------
    RootSet
    """
    cfg = cfg or SolverConfig()
    numbers = tuple(_numbers_for(sys, seed, numbers))
    a, L = sys.anisotropy, sys.L
    x, sh = _arrays(seed)
    if _coincident(x, sh, cfg.coincidence_tol):
        raise CoincidentRoots("coincident roots in seed")
    neq = _eq_numbers(numbers, sh, L)
    tw = _twist(escaped, a)
    base = RootSet(sys, tuple(seed), numbers, tuple(escaped))
    if x.size == 0:
        return replace(base, residual_norm=0.0, converged=True)

    F, J = _equations(x, sh, neq, L, a, tw)
    fn = np.max(np.abs(F))
    it, msg = 0, ""
    while fn >= cfg.tol:
        if it >= cfg.max_iter:
            msg = "max_iter reached"
            break
        it += 1
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -F, rcond=None)[0]
        if not np.all(np.isfinite(dx)):
            msg = "non-finite Newton step"
            break
        lam, accepted = 1.0, False
        for _ in range(cfg.max_halvings + 1):
            xn = x + lam * dx
            if not _coincident(xn, sh, cfg.coincidence_tol):
                Fn, Jn = _equations(xn, sh, neq, L, a, tw)
                fnn = np.max(np.abs(Fn))
                if fnn < fn:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            msg = "line search stalled"
            break
        x, F, J, fn = xn, Fn, Jn, fnn
    out = replace(base, residual_norm=float(fn), iterations=it, converged=bool(fn < cfg.tol),
                  message=msg if fn >= cfg.tol else "").with_arrays(x, sh)
    if strict and not out.converged:
        raise NoConvergence(msg or "no convergence", out)
    return out


# counting function and classification -------------------------------------

def counting_function(t: Rapidity, roots, sys: BetheSystem | None = None) -> float:
    """Counting function ``n_L(t) = (L phi(t) - sum_g phi2(t - t_g)) / 2 pi``.

    Parameters
    ----------
    t : Rapidity
        Evaluation point; on the shifted line the result is the equation
        number (see :func:`zone_number` to fold it).
    roots : RootSet or sequence of Rapidity
        A root coinciding with ``t`` on the same line contributes zero, so at
        a root the function returns that root's own quantum number.
    sys : BetheSystem, optional
        Needed when ``roots`` is a plain sequence.
    """
    escaped = ()
    if isinstance(roots, RootSet):
        sys, escaped, roots = roots.system, roots.escaped, roots.roots
    a, L = sys.anisotropy, sys.L
    x, sh = _arrays(roots)
    d = t.re - x
    same = sh == (t.line is Line.SHIFTED)
    pair = np.where(same, phi2_same(d, a), phi2_mixed(d, a))
    bare = phi_shifted(t.re, a) if t.line is Line.SHIFTED else phi_real(t.re, a)
    return float((L * bare - pair.sum() + _twist(escaped, a)) / (2.0 * np.pi))


def counting_limit(sign: int, rootset: RootSet) -> float:
    """``n_L(sign * inf)`` on the real axis for a solved state."""
    sys, a = rootset.system, rootset.system.anisotropy
    c = (sys.L * sign * (np.pi - a.eta)
         - sign * (np.pi - 2 * a.eta) * len(rootset.roots) + _twist(rootset.escaped, a))
    return float(c / (2.0 * np.pi))


def critical_number(sys: BetheSystem) -> float:
    """Boundary ``n_c`` between real and shifted quantum numbers.

    ``n_c = [L (pi - eta) - (M - 1)(pi - 2 eta)] / 2 pi`` is the value the
    equation of a single root approaches as that root runs to infinity
    while the other ``M - 1`` roots stay finite.  It is evaluated in units
    of ``pi`` so that the XX point gives exactly ``L / 4``.

    Examples
    --------
    >>> from xxzbethe.states import ground_system
    >>> critical_number(ground_system(8, 4, Anisotropy.from_pi(0.5)))
    2.0
    """
    x = sys.anisotropy.eta_over_pi
    return (sys.L * (1.0 - x) - (sys.M - 1) * (1.0 - 2.0 * x)) / 2.0


def classify_number(n, sys: BetheSystem, cfg: SolverConfig | None = None) -> Line:
    """Line of the root carrying quantum number ``n``.

    Raises
    ------
    BoundaryAmbiguous
        If ``|n|`` is within ``cfg.boundary_eps`` of :func:`critical_number`.
    """
    cfg = cfg or SolverConfig()
    nc = critical_number(sys)
    v = abs(float(n))
    if abs(v - nc) < cfg.boundary_eps:
        raise BoundaryAmbiguous(f"|n|={v} at n_c={nc}")
    return Line.REAL if v < nc else Line.SHIFTED


def seed_from_xx(sys: BetheSystem, cfg: SolverConfig | None = None,
                 allow_escaped: bool = False) -> RootSet:
    """Exact roots at the XX point, where the pair phases vanish.

    Each root solves ``L phi(t) = 2 pi n`` on the line chosen by
    :func:`classify_number`; both branches invert in closed form.

    Parameters
    ----------
    sys : BetheSystem
        Must be at ``eta = pi/2``.
    allow_escaped : bool
        Quantum numbers on the boundary ``|n| = L/4`` belong to roots at
        infinity (momentum ``+-pi/2``).  They raise
        :class:`BoundaryAmbiguous` unless this flag is set.
    """
    cfg = cfg or SolverConfig()
    a, L = sys.anisotropy, sys.L
    if not a.is_xx:
        raise ValueError("seed_from_xx requires eta = pi/2")
    roots, nums, esc = [], [], []
    for n in sys.numbers:
        try:
            line = classify_number(n, sys, cfg)
        except BoundaryAmbiguous:
            if not allow_escaped:
                raise
            esc.append(Escaped(1 if n > 0 else -1, n, None))
            continue
        if line is Line.REAL:
            x = math.atanh(math.tan(math.pi * float(n) / L))
        else:
            x = math.atanh(1.0 / math.tan(math.pi * equation_number(n, line, L) / L))
        roots.append(Rapidity(x, line))
        nums.append(n)
    F = residual(roots, sys, nums, esc) if roots else np.zeros(0)
    fn = float(np.max(np.abs(F))) if F.size else 0.0
    return RootSet(sys, tuple(roots), tuple(nums), tuple(esc), fn, 0, fn < cfg.tol)
