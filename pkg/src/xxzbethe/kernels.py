"""Scattering phases of the XXZ Bethe equations on the two root lines.

Roots live either on the real axis or on the line ``Im t = pi/2``.  Every
branch below is an explicit arctangent decomposition of the defining
logarithm, so no complex-log branch choice is ever made at run time.

Conventions
-----------
* ``phi`` on the real line is odd and increasing with limits ``+-(pi - eta)``.
* ``phi`` on the shifted line is the continuous branch with value ``pi`` at
  ``re = 0``; it decreases from ``pi + eta`` to ``pi - eta``.
* ``phi2`` between two roots on the same line is odd with limits
  ``+-(pi - 2 eta)``.
* ``phi2`` between a real and a shifted root (difference ``dt + i pi/2``) uses
  the odd branch ``pi*s(dt) - 2 arctan(tanh(dt) tan(eta))`` where ``s`` is the
  sign with ``s(0) = +1``.  It tends to ``+-(pi - 2 eta)`` at ``+-inf``, is
  identically zero at the XX point and reduces to ``pi*sign(dt)`` as
  ``eta -> 0``.  It differs from the continuous branch (value ``pi`` at 0)
  by ``2 pi`` for ``dt < 0`` only, i.e. by a relabelling of quantum numbers.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Line", "Anisotropy", "Rapidity", "CoincidentRoots",
    "phi", "phi2", "phi_prime", "phi2_prime",
    "phi_real", "phi_shifted", "phi_real_prime", "phi_shifted_prime",
    "phi2_same", "phi2_mixed", "phi2_same_prime", "phi2_mixed_prime",
    "phi_limit", "phi2_limit",
]


class CoincidentRoots(ValueError):
    """Two roots on the same line share their real part."""


class Line(str, enum.Enum):
    """The two lines a root may occupy."""

    REAL = "real"
    SHIFTED = "shifted"

    @property
    def other(self) -> "Line":
        return Line.SHIFTED if self is Line.REAL else Line.REAL


@dataclass(frozen=True)
class Anisotropy:
    """Anisotropy ``Delta = cos(eta)`` with ``0 < eta <= pi/2``.

    Trigonometric values are cached; at ``eta = pi/2`` they are set to their
    exact values so that the XX point decouples exactly.

    Parameters
    ----------
    eta : float
        Anisotropy angle in radians.
    """

    eta: float
    delta: float = field(init=False)
    _trig: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        eta = float(self.eta)
        if not (0.0 < eta <= math.pi / 2 + 1e-15):
            raise ValueError(f"eta must lie in (0, pi/2], got {eta!r}")
        if abs(eta - math.pi / 2) <= 1e-15:
            eta = math.pi / 2
            c, s, c2, s2 = 0.0, 1.0, -1.0, 0.0
            ch = sh = math.sqrt(0.5)
        else:
            c, s = math.cos(eta), math.sin(eta)
            c2, s2 = math.cos(2 * eta), math.sin(2 * eta)
            ch, sh = math.cos(eta / 2), math.sin(eta / 2)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "delta", c)
        object.__setattr__(self, "_trig", (c, s, c2, s2, ch, sh))

    @classmethod
    def from_pi(cls, x: float) -> "Anisotropy":
        """Build from ``eta / pi``."""
        return cls(math.pi / 2 if x == 0.5 else x * math.pi)

    @classmethod
    def from_delta(cls, delta: float) -> "Anisotropy":
        """Build from ``Delta`` in ``[0, 1)``."""
        if not 0.0 <= delta < 1.0:
            raise ValueError("delta must lie in [0, 1)")
        return cls(math.pi / 2 if delta == 0 else math.acos(delta))

    @property
    def is_xx(self) -> bool:
        return self.eta == math.pi / 2

    @property
    def eta_over_pi(self) -> float:
        return 0.5 if self.is_xx else self.eta / math.pi

    @property
    def cos(self) -> float:
        return self._trig[0]

    @property
    def sin(self) -> float:
        return self._trig[1]

    @property
    def cos2(self) -> float:
        return self._trig[2]

    @property
    def sin2(self) -> float:
        return self._trig[3]

    @property
    def cos_half(self) -> float:
        return self._trig[4]

    @property
    def sin_half(self) -> float:
        return self._trig[5]


@dataclass(frozen=True)
class Rapidity:
    """A finite root ``re`` (real line) or ``re + i pi/2`` (shifted line)."""

    re: float
    line: Line = Line.REAL

    def __post_init__(self):
        if not math.isfinite(self.re):
            raise ValueError("rapidity must be finite; escaped roots are tracked separately")
        object.__setattr__(self, "line", Line(self.line))

    @property
    def value(self) -> complex:
        return complex(self.re, math.pi / 2 if self.line is Line.SHIFTED else 0.0)


# vectorised branches ------------------------------------------------------

def phi_real(x, a: Anisotropy):
    """``phi`` on the real line."""
    return 2.0 * np.arctan2(np.tanh(x) * a.cos_half, a.sin_half)


def phi_shifted(x, a: Anisotropy):
    """``phi`` at ``x + i pi/2``, continuous branch through ``pi``."""
    return np.pi - 2.0 * np.arctan2(np.tanh(x) * a.sin_half, a.cos_half)


def phi_real_prime(x, a: Anisotropy):
    # cosh 2x - cos eta written without cancellation
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return 2.0 * a.sin / (2.0 * np.sinh(x) ** 2 + 2.0 * a.sin_half ** 2)


def phi_shifted_prime(x, a: Anisotropy):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return -2.0 * a.sin / (2.0 * np.cosh(x) ** 2 - 2.0 * a.sin_half ** 2)


def phi2_same(d, a: Anisotropy):
    """``phi2`` for two roots on the same line; odd branch."""
    return 2.0 * np.arctan2(np.tanh(d) * a.cos, a.sin)


def phi2_mixed(d, a: Anisotropy):
    """``phi2`` for ``dt + i pi/2``; odd branch with ``s(0) = +1``."""
    d = np.asarray(d, dtype=float)
    if a.is_xx:
        return np.zeros_like(d)
    s = np.where(d >= 0, 1.0, -1.0)
    return np.pi * s - 2.0 * np.arctan2(np.tanh(d) * a.sin, a.cos)


def phi2_same_prime(d, a: Anisotropy):
    d = np.asarray(d, dtype=float)
    with np.errstate(over="ignore"):
        return 2.0 * a.sin2 / (2.0 * np.sinh(d) ** 2 + 2.0 * a.sin ** 2)


def phi2_mixed_prime(d, a: Anisotropy):
    d = np.asarray(d, dtype=float)
    if a.is_xx:
        return np.zeros_like(d)
    with np.errstate(over="ignore"):
        return -2.0 * a.sin2 / (2.0 * np.cosh(d) ** 2 - 2.0 * a.sin ** 2)


def phi_limit(sign: int, line: Line, a: Anisotropy) -> float:
    """Limit of ``phi`` at ``re -> sign * inf``.

    Both lines share the limit ``sign * (pi - eta)`` modulo ``2 pi``; the
    shifted branch returns ``pi + eta`` at ``-inf``.
    """
    if Line(line) is Line.SHIFTED and sign < 0:
        return np.pi + a.eta
    return sign * (np.pi - a.eta)


def phi2_limit(sign: int, a: Anisotropy) -> float:
    """Limit of ``phi2`` at ``dt -> sign * inf``; the same for both pairings."""
    return sign * (np.pi - 2.0 * a.eta)


# scalar API on Rapidity ---------------------------------------------------

def phi(t: Rapidity, a: Anisotropy) -> float:
    """Bare phase ``phi(t)`` of a single root.

    Parameters
    ----------
    t : Rapidity
        Root on either line.
    a : Anisotropy

    Returns
    -------
    float
        Value in ``(-(pi - eta), pi - eta)`` on the real line and in
        ``(pi - eta, pi + eta)`` on the shifted line.

    Examples
    --------
    >>> a = Anisotropy.from_pi(1/3)
    >>> float(phi(Rapidity(0.0, Line.SHIFTED), a)) == float(np.pi)
    True
    """
    f = phi_real if t.line is Line.REAL else phi_shifted
    return float(f(t.re, a))


def phi_prime(t: Rapidity, a: Anisotropy) -> float:
    """Derivative of :func:`phi` with respect to ``re``."""
    f = phi_real_prime if t.line is Line.REAL else phi_shifted_prime
    return float(f(t.re, a))


def phi2(dt: float, same_line: bool, a: Anisotropy) -> float:
    """Two-root phase ``phi2`` at real-part difference ``dt``.

    Parameters
    ----------
    dt : float
        Real part of ``t_alpha - t_gamma``.
    same_line : bool
        True if both roots lie on the same line.
    a : Anisotropy

    Raises
    ------
    CoincidentRoots
        If ``same_line`` and ``dt == 0``.
    """
    if same_line:
        if dt == 0.0:
            raise CoincidentRoots("coincident roots on one line")
        return float(phi2_same(dt, a))
    return float(phi2_mixed(dt, a))


def phi2_prime(dt: float, same_line: bool, a: Anisotropy) -> float:
    """Derivative of :func:`phi2` with respect to ``dt``."""
    if same_line:
        if dt == 0.0:
            raise CoincidentRoots("coincident roots on one line")
        return float(phi2_same_prime(dt, a))
    return float(phi2_mixed_prime(dt, a))
