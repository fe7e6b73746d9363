"""Exact diagonalisation, coordinate Bethe vectors and overlaps.

Hamiltonian (periodic, ``L`` sites, ``M`` up spins)::

    H = sum_j [ Sx_j Sx_{j+1} + Sy_j Sy_{j+1} + Delta (Sz_j Sz_{j+1} - 1/4) ]

The ``-1/4`` makes the fully polarised state the zero of energy, so a
Bethe state has ``E = sum_a (cos k_a - Delta)`` with no extra constant.

Bethe vectors use momenta ``k = pi - phi(t)`` (``exp(ik) =
sinh(t + i eta/2) / sinh(t - i eta/2)``) and the amplitudes::

    psi(x_1 < ... < x_M) = sum_P sgn(P) prod_{j<l} f(k_Pj, k_Pl)
                           exp(i sum_j k_Pj x_j),
    f(a, b) = 1 + exp(i(a + b)) - 2 Delta exp(i a).

``psi`` is totally antisymmetric in the momenta.  A group of escaped roots
at the same infinity has coinciding momenta; its vector is the confluent
limit ``psi / Vandermonde``, evaluated by averaging over rotated complex
offsets (all non-constant Taylor terms up to the averaging order cancel).

``T`` shifts every spin one site to the left, ``(T psi)(x) = psi(x + 1)``,
so a Bethe vector has ``T`` eigenvalue ``exp(i sum k)``.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import root as _root

from .kernels import Anisotropy, Line, phi_real, phi_shifted
from .solver import BetheSystem, RootSet, to_number

__all__ = [
    "SectorBasis", "WaveVector", "SpectralMatch", "Eigenpairs", "Hamiltonian",
    "SectorTooLarge", "NullState", "sector_basis", "build_hamiltonian",
    "translation_operator", "diagonalize", "momenta", "amplitudes_from_momenta",
    "bethe_amplitudes", "slater_state", "energy_from_roots", "total_momentum",
    "match_state", "overlap", "spin_flip", "raise_spin", "translation_eigenvalue",
    "solve_xxx", "xxx_momenta", "xxx_state", "xxx_limit_check", "XXXLimitReport",
    "EigenCache", "MAX_L", "MAX_DENSE",
]

MAX_L = 14
MAX_DENSE = 4000
CACHE_VERSION = 1


class SectorTooLarge(ValueError):
    """Sector exceeds the dense-diagonalisation limits."""


class NullState(RuntimeError):
    """A Bethe vector whose amplitudes all cancel."""


@dataclass(frozen=True)
class SectorBasis:
    """Configurations with ``M`` up spins as ascending integers (bit j = site j)."""

    L: int
    M: int
    states: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return int(self.states.size)

    def index(self, configs) -> np.ndarray:
        configs = np.asarray(configs, dtype=np.int64)
        idx = np.searchsorted(self.states, configs)
        if np.any(idx >= self.dim) or np.any(self.states[np.minimum(idx, self.dim - 1)] != configs):
            raise KeyError("configuration outside the sector")
        return idx

    def positions(self) -> np.ndarray:
        """``(dim, M)`` array of occupied sites in ascending order."""
        bits = (self.states[:, None] >> np.arange(self.L)) & 1
        return np.nonzero(bits)[1].reshape(self.dim, self.M) if self.M else np.zeros((self.dim, 0), int)


def sector_basis(L: int, M: int) -> SectorBasis:
    if not 0 <= M <= L:
        raise ValueError("0 <= M <= L required")
    states = np.array(sorted(sum(1 << i for i in c) for c in itertools.combinations(range(L), M)),
                      dtype=np.int64)
    return SectorBasis(L, M, states)


@dataclass(frozen=True)
class Hamiltonian:
    matrix: sp.csr_matrix
    basis: SectorBasis
    delta: float


def build_hamiltonian(L: int, delta: float, M: int, max_L: int = MAX_L) -> Hamiltonian:
    """Sparse XXZ Hamiltonian on the ``M`` sector.

    Raises
    ------
    SectorTooLarge
        If ``L > max_L``.

    Examples
    --------
    >>> H = build_hamiltonian(2, 0.5, 1).matrix.toarray()
    >>> H.tolist()
    [[-0.5, 1.0], [1.0, -0.5]]
    """
    if L > max_L:
        raise SectorTooLarge(f"L={L} exceeds max_L={max_L}")
    basis = sector_basis(L, M)
    s = basis.states
    diag = np.zeros(basis.dim)
    rows, cols = [], []
    bonds = [(j, (j + 1) % L) for j in range(L if L > 2 else 1)]
    for i, j in bonds:
        bi, bj = (s >> i) & 1, (s >> j) & 1
        anti = bi != bj
        diag[anti] -= 0.5 * delta
        src = np.nonzero(anti)[0]
        dst = basis.index(s[src] ^ ((1 << i) | (1 << j)))
        rows.append(src)
        cols.append(dst)
    if L == 2:
        # the single physical bond appears twice in a periodic 2-site ring
        diag *= 2.0
    r = np.concatenate(rows + [np.arange(basis.dim)]) if rows else np.arange(basis.dim)
    c = np.concatenate(cols + [np.arange(basis.dim)]) if cols else np.arange(basis.dim)
    off = 0.5 * (2.0 if L == 2 else 1.0)
    vals = np.concatenate([np.full(sum(len(x) for x in rows), off), diag])
    H = sp.csr_matrix((vals, (r, c)), shape=(basis.dim, basis.dim))
    H.sum_duplicates()
    return Hamiltonian(H, basis, float(delta))


def translation_operator(basis: SectorBasis) -> sp.csr_matrix:
    """Permutation matrix with ``(T v)[s] = v[s shifted one site to the right]``."""
    L, s = basis.L, basis.states
    rot = ((s << 1) | (s >> (L - 1))) & ((1 << L) - 1)
    cols = basis.index(rot)
    return sp.csr_matrix((np.ones(basis.dim), (np.arange(basis.dim), cols)), shape=(basis.dim,) * 2)


@dataclass(frozen=True)
class Eigenpairs:
    energies: np.ndarray
    vectors: np.ndarray
    basis: SectorBasis
    delta: float


def diagonalize(H: Hamiltonian, max_dim: int = MAX_DENSE) -> Eigenpairs:
    """Full dense decomposition, energies ascending."""
    if H.basis.dim > max_dim:
        raise SectorTooLarge(f"dimension {H.basis.dim} exceeds {max_dim}")
    w, v = np.linalg.eigh(H.matrix.toarray())
    return Eigenpairs(w, v, H.basis, H.delta)


# Bethe vectors --------------------------------------------------------------

@dataclass(frozen=True)
class WaveVector:
    """Amplitudes over a sector basis; ``is_null`` flags complete cancellation."""

    basis: SectorBasis
    amplitudes: np.ndarray = field(repr=False)
    scale: float = 1.0
    is_null: bool = False

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> np.ndarray:
        if self.is_null:
            raise NullState("cannot normalise a null Bethe vector")
        return self.amplitudes / self.norm


def momenta(rootset: RootSet) -> tuple:
    """Quasi-momenta of the finite roots and signs of the escaped ones.

    Returns
    -------
    k : ndarray
        ``pi - phi(t)`` folded into ``(-pi, pi]``.
    signs : list of int
        An escaped root at ``sign * inf`` carries momentum ``sign * eta``.
    """
    a = rootset.system.anisotropy
    x, sh = rootset.re, rootset.shifted
    ph = np.where(sh, phi_shifted(x, a), phi_real(x, a)) if x.size else np.zeros(0)
    k = np.pi - ph
    k = np.where(k > np.pi, k - 2 * np.pi, k)
    return k, [e.sign for e in rootset.escaped]


def _perm_parity(perms: np.ndarray) -> np.ndarray:
    n = perms.shape[1]
    inv = np.zeros(perms.shape[0], dtype=np.int64)
    for i in range(n):
        inv += np.sum(perms[:, i:i + 1] > perms[:, i + 1:], axis=1)
    return np.where(inv % 2 == 0, 1.0, -1.0)


def _plain_sum(k: np.ndarray, X: np.ndarray, delta: float, chunk: int = 40320):
    M = k.size
    if M == 0:
        return np.ones(X.shape[0], complex), np.ones(X.shape[0])
    perms = np.array(list(itertools.permutations(range(M))), dtype=np.int64)
    sgn = _perm_parity(perms)
    psi = np.zeros(X.shape[0], complex)
    scale = np.zeros(X.shape[0])
    for lo in range(0, perms.shape[0], chunk):
        K = k[perms[lo:lo + chunk]]
        A = sgn[lo:lo + chunk].astype(complex)
        for j in range(M):
            for l in range(j + 1, M):
                A = A * (1.0 + np.exp(1j * (K[:, j] + K[:, l])) - 2.0 * delta * np.exp(1j * K[:, j]))
        E = np.exp(1j * (X @ K.T))
        psi += E @ A
        scale += np.abs(E) @ np.abs(A)
    return psi, scale


def amplitudes_from_momenta(k: Sequence[complex], basis: SectorBasis, delta: float,
                            clusters: Sequence[tuple] = (), radius: float = 0.2,
                            order: int = 24, null_tol: float = 1e-10) -> WaveVector:
    """Coordinate Bethe vector for explicit momenta.

    Parameters
    ----------
    k : sequence
        Momenta of distinct roots.
    basis : SectorBasis
        Sector with ``M = len(k) + sum of cluster sizes``.
    delta : float
    clusters : sequence of (k0, m)
        Groups of ``m`` coinciding momenta ``k0``; the confluent limit
        ``psi / prod Vandermonde`` is returned.  Clusters sharing ``k0`` are
        kept apart by different offset radii, so the limit of the whole
        coincident configuration is taken.
    radius, order : float, int
        Offset radius and number of rotations used for that limit.
    null_tol : float
        The vector is null when ``max |psi| < null_tol * max(scale)``.
    """
    k = np.asarray(k, dtype=complex)
    X = basis.positions().astype(float)
    bases = [k0 for k0, m in clusters if m]
    confluent = any(m > 1 for _, m in clusters) or len(set(bases)) < len(bases)
    if not confluent:
        extra = [k0 for k0, m in clusters for _ in range(m)]
        kk = np.concatenate([k, np.asarray(extra, complex)])
        psi, scale = _plain_sum(kk, X, delta)
    else:
        psi = np.zeros(basis.dim, complex)
        scale = np.zeros(basis.dim)
        for q in range(order):
            rot = np.exp(2j * np.pi * q / order)
            kk, vdm = list(k), 1.0 + 0j
            for c, (k0, m) in enumerate(clusters):
                offs = [radius * (1.0 + 0.15 * c) * np.exp(2j * np.pi * (j + 0.37 * c) / m) * rot
                        for j in range(m)]
                for i in range(m):
                    for j in range(i + 1, m):
                        vdm *= offs[i] - offs[j]
                kk.extend(k0 + o for o in offs)
            p, s = _plain_sum(np.asarray(kk, complex), X, delta)
            psi += p / vdm / order
            scale += s / abs(vdm) / order
    mx = float(np.max(scale)) if scale.size else 0.0
    null = bool(np.max(np.abs(psi)) < null_tol * mx) if mx > 0 else True
    return WaveVector(basis, psi, mx, null)


def slater_state(k: Sequence[float], basis: SectorBasis, null_tol: float = 1e-10) -> WaveVector:
    """Free-fermion vector ``det[exp(i k_a x_b)]`` (the ``Delta = 0`` Bethe vector)."""
    k = np.asarray(k, dtype=float)
    if k.size == 0:
        return WaveVector(basis, np.ones(basis.dim, complex), 1.0, False)
    X = basis.positions()
    mats = np.exp(1j * X[:, :, None] * k[None, None, :])
    psi = np.linalg.det(mats)
    scale = float(math.factorial(k.size))
    return WaveVector(basis, psi, scale, bool(np.max(np.abs(psi)) < null_tol * scale))


def bethe_amplitudes(rootset: RootSet, null_tol: float = 1e-10) -> WaveVector:
    """Coordinate Bethe vector of a solved state.

    At the XX point the Slater determinant is used; it is the Bethe vector
    with the momentum-symmetric factor ``prod f`` divided out, which stays
    finite when ``k_a + k_b = pi``.  Escaped roots enter with momentum
    ``sign * eta``; several on one side form a confluent cluster.
    """
    sys = rootset.system
    a = sys.anisotropy
    basis = sector_basis(sys.L, sys.M)
    k, signs = momenta(rootset)
    if a.is_xx:
        kk = np.concatenate([k, np.array([s * a.eta for s in signs])])
        return slater_state(kk, basis, null_tol)
    n_plus = sum(1 for s in signs if s > 0)
    n_minus = len(signs) - n_plus
    clusters = [(c, m) for c, m in ((a.eta, n_plus), (-a.eta, n_minus)) if m]
    return amplitudes_from_momenta(k, basis, a.delta, clusters, null_tol=null_tol)


def total_momentum(rootset: RootSet) -> float:
    """``sum k`` folded into ``(-pi, pi]``."""
    k, signs = momenta(rootset)
    P = float(np.sum(k) + rootset.system.anisotropy.eta * sum(signs))
    return P - 2 * np.pi * math.floor((P + np.pi) / (2 * np.pi) + 1e-15) if P != np.pi else P


def energy_from_roots(rootset: RootSet) -> float:
    """``E = sum_a (cos k_a - Delta)``; escaped roots contribute ``cos(eta) - Delta = 0``."""
    a = rootset.system.anisotropy
    k, signs = momenta(rootset)
    return float(np.sum(np.cos(k) - a.delta) + len(signs) * (math.cos(a.eta) - a.delta))


# overlaps -------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralMatch:
    bethe_energy: float
    ed_energy: float
    overlap: float
    sector: tuple
    indices: tuple = ()

    @property
    def delta_e(self) -> float:
        return abs(self.bethe_energy - self.ed_energy)


def _vec(v):
    if isinstance(v, WaveVector):
        if v.is_null:
            raise NullState("null Bethe vector")
        return v.amplitudes
    return np.asarray(v)


def overlap(u, v) -> float:
    """``|<u, v>| / (|u| |v|)``."""
    u, v = _vec(u), _vec(v)
    return float(abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v)))


def match_state(v, eig: Eigenpairs, bethe_energy: float | None = None,
                degeneracy_tol: float = 1e-8) -> SpectralMatch:
    """Best-matching eigenspace of ``v``.

    Eigenvalues closer than ``degeneracy_tol`` form one eigenspace and the
    overlap is the norm of the projection of ``v`` onto it.

    Raises
    ------
    NullState
        If ``v`` is a null Bethe vector.
    """
    psi = _vec(v)
    psi = psi / np.linalg.norm(psi)
    c = eig.vectors.conj().T @ psi
    w = np.abs(c) ** 2
    E = eig.energies
    groups, start = [], 0
    for i in range(1, E.size + 1):
        if i == E.size or E[i] - E[i - 1] > degeneracy_tol:
            groups.append(np.arange(start, i))
            start = i
    weights = [w[g].sum() for g in groups]
    best = groups[int(np.argmax(weights))]
    if bethe_energy is None:
        bethe_energy = float(np.sum(w * E) / np.sum(w))
    return SpectralMatch(float(bethe_energy), float(np.mean(E[best])),
                         float(min(1.0, math.sqrt(max(weights)))),
                         (eig.basis.L, eig.basis.M), tuple(int(i) for i in best))


def translation_eigenvalue(v) -> complex:
    """``<v| T |v> / <v|v>`` for a vector on a sector basis."""
    if not isinstance(v, WaveVector):
        raise TypeError("WaveVector required")
    psi = _vec(v)
    T = translation_operator(v.basis)
    return complex(np.vdot(psi, T @ psi) / np.vdot(psi, psi))


def spin_flip(v: WaveVector) -> WaveVector:
    """Global spin flip, mapping sector ``M`` to ``L - M``."""
    L = v.basis.L
    target = sector_basis(L, L - v.basis.M)
    idx = target.index(v.basis.states ^ ((1 << L) - 1))
    out = np.zeros(target.dim, complex)
    out[idx] = v.amplitudes
    return WaveVector(target, out, v.scale, v.is_null)


def raise_spin(v: WaveVector) -> WaveVector:
    """Apply ``S+ = sum_j S+_j`` (sector ``M`` to ``M + 1``)."""
    L, M = v.basis.L, v.basis.M
    target = sector_basis(L, M + 1)
    out = np.zeros(target.dim, complex)
    s = v.basis.states
    for j in range(L):
        free = ((s >> j) & 1) == 0
        idx = target.index(s[free] | (1 << j))
        np.add.at(out, idx, v.amplitudes[free])
    return WaveVector(target, out, v.scale, v.is_null)


# isotropic point ------------------------------------------------------------

def solve_xxx(numbers, L: int, tol: float = 1e-13) -> np.ndarray:
    """Real roots ``lambda`` of the isotropic equations.

    ``2L arctan(2 lam_a) = 2 pi n_a + sum_b 2 arctan(lam_a - lam_b)``; this is
    the ``eta -> 0`` limit of the real-line equations with ``t = eta lam``.
    """
    n = np.array([float(to_number(v)) for v in numbers])
    if n.size == 0:
        return n

    def F(lam):
        d = lam[:, None] - lam[None, :]
        return 2 * L * np.arctan(2 * lam) - 2 * np.pi * n - 2 * np.arctan(d).sum(axis=1)

    def J(lam):
        d = lam[:, None] - lam[None, :]
        D = 2.0 / (1.0 + d ** 2)
        np.fill_diagonal(D, 0.0)
        out = D.copy()
        out[np.diag_indices_from(out)] = 4 * L / (1 + 4 * lam ** 2) - D.sum(axis=1)
        return out

    seed = 0.5 * np.tan(np.pi * n / L)
    sol = _root(F, seed, jac=J, method="hybr", options={"xtol": 1e-15})
    if np.max(np.abs(F(sol.x))) > 1e-9:
        raise RuntimeError("isotropic Bethe equations did not converge")
    return sol.x


def xxx_momenta(lam) -> np.ndarray:
    """``k = pi - 2 arctan(2 lam)`` folded into ``(-pi, pi]``."""
    k = np.pi - 2 * np.arctan(2 * np.asarray(lam, float))
    return np.where(k > np.pi, k - 2 * np.pi, k)


def xxx_state(numbers, L: int, null_tol: float = 1e-10) -> WaveVector:
    """Bethe vector at ``Delta = 1``.

    For ``M <= L/2`` the isotropic equations are solved directly.  For
    ``M > L/2`` the state is built from its particle-hole partner plus
    ``2k`` roots at ``lambda = +-inf``; these all carry momentum 0, so the
    amplitudes cancel identically.
    """
    from .states import dual_map

    nums = [to_number(v) for v in numbers]
    M = len(nums)
    basis = sector_basis(L, M)
    if 2 * M <= L:
        k = xxx_momenta(solve_xxx(nums, L))
        return amplitudes_from_momenta(k, basis, 1.0, null_tol=null_tol)
    partner, _ = dual_map(nums, L)
    k = xxx_momenta(solve_xxx(partner, L))
    half = (2 * M - L) // 2
    return amplitudes_from_momenta(k, basis, 1.0, [(0.0, half), (0.0, half)], null_tol=null_tol)


@dataclass(frozen=True)
class XXXLimitReport:
    eta: float
    overlap: float
    xxz_numbers: tuple
    complex_numbers: tuple
    xxx_numbers: tuple
    xxx_holes: tuple
    mapped_holes: tuple
    holes_match: bool
    sector: tuple


def xxx_limit_check(sys: BetheSystem, xxx_hole_numbers=None, solver_cfg=None,
                    evolve_cfg=None) -> XXXLimitReport:
    """Compare a ``k > 0`` state at small ``eta`` with ``(S+)^{2k}`` of an isotropic state.

    The isotropic state has ``L/2 - k`` roots.  Its holes default to the
    images ``L/2 - n`` (``n > 0``) and ``-L/2 - n`` (``n < 0``) of the
    shifted-line quantum numbers of ``sys``.
    """
    from .evolution import solve_at
    from .solver import critical_number

    L, M, k = sys.L, sys.M, sys.k
    if k <= 0:
        raise ValueError("xxx_limit_check needs k > 0")
    nc = critical_number(sys)
    cplx = tuple(n for n in sys.numbers if abs(float(n)) > nc)
    h = Fraction(L, 2)
    mapped = tuple(sorted(h - n if n > 0 else -h - n for n in cplx))
    holes = tuple(sorted(to_number(v) for v in xxx_hole_numbers)) if xxx_hole_numbers is not None else mapped
    Mx = L // 2 - k
    vmax = Fraction(L - Mx - 1, 2)
    vac = list(_frange(-vmax, vmax))
    xnums = tuple(v for v in vac if v not in set(holes))
    if len(xnums) != Mx:
        raise ValueError("hole set inconsistent with L/2 - k isotropic roots")
    u = xxx_state(xnums, L)
    for _ in range(2 * k):
        u = raise_spin(u)
    rs = solve_at(sys, solver_cfg, evolve_cfg)
    v = bethe_amplitudes(rs)
    return XXXLimitReport(sys.eta, overlap(u, v), tuple(sys.numbers), cplx, xnums, holes, mapped,
                          holes == mapped, (L, M))


def _frange(lo, hi):
    v = lo
    while v <= hi:
        yield v
        v += 1


# eigenpair cache --------------------------------------------------------------

class EigenCache:
    """On-disk cache of dense eigenpairs.

    One ``.npz`` file per ``(L, M, Delta)`` named by the SHA-256 of
    ``"v{version}|{L}|{M}|{Delta!r}"``.  Arrays: ``energies`` (float64,
    ascending), ``vectors`` (float64, columns), ``states`` (int64 basis),
    ``meta`` (JSON string with version, L, M, delta).
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(L: int, M: int, delta: float) -> str:
        return hashlib.sha256(f"v{CACHE_VERSION}|{L}|{M}|{float(delta)!r}".encode()).hexdigest()

    def path(self, L, M, delta) -> Path:
        return self.directory / f"{self.key(L, M, delta)}.npz"

    def get(self, L: int, M: int, delta: float) -> Eigenpairs:
        p = self.path(L, M, delta)
        if p.exists():
            with np.load(p) as z:
                meta = json.loads(str(z["meta"]))
                if meta.get("version") == CACHE_VERSION:
                    return Eigenpairs(z["energies"], z["vectors"], SectorBasis(L, M, z["states"]), delta)
        eig = diagonalize(build_hamiltonian(L, delta, M))
        meta = json.dumps({"version": CACHE_VERSION, "L": L, "M": M, "delta": float(delta)})
        np.savez(p, energies=eig.energies, vectors=eig.vectors, states=eig.basis.states, meta=meta)
        return eig
