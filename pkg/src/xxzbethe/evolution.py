"""Continuation of a fixed-quantum-number state in ``eta``.

A state is solved exactly at the XX point and followed down in ``eta``
with Newton seeded from the previous step.  Failed steps are bisected.
When a root runs off to ``sign * inf`` it is re-seeded on the other line
at ``sign * reseed_re`` with the same quantum number; if no solution exists
there it is kept as an :class:`~xxzbethe.solver.Escaped` root.  Escaped
roots are offered re-entry whenever their own equation, evaluated at large
``|re|`` on either line, changes sign.

States with ``M > L/2`` are not continued.  They are assembled from their
particle-hole partner (``L - M`` roots) plus ``k`` roots at ``+inf`` and
``k`` at ``-inf``; see :func:`reflection`.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import (Anisotropy, CoincidentRoots, Line, Rapidity, phi2_mixed, phi2_same,
                      phi_real, phi_shifted)
from .solver import (BetheSystem, Escaped, NoConvergence, RootSet, SolverConfig,
                     counting_limit, equation_number, newton_solve, seed_from_xx)
from .states import dual_numbers, jump_points, near_jump, real_vacancies, AtJumpPoint

__all__ = [
    "Direction", "EvolveConfig", "JumpEvent", "Step", "EvolutionTrace", "CountReport",
    "StuckAtJump", "LockedPair", "vacancies", "evolve", "check_counts", "solve_at",
    "reflection", "eta_grid",
]

XX = math.pi / 2


class StuckAtJump(NoConvergence):
    """A root left for infinity and could be placed neither on a line nor at infinity."""


class LockedPair(StuckAtJump):
    """An XX-degenerate real/shifted pair that cannot be sent to infinity.

    Below the XX point such a pair leaves both lines (it becomes a bound
    pair centred at ``Im = pi/4``).  Sending it to infinity is exact only
    when the escaped roots end up as ``k`` at ``+inf`` and ``k`` at ``-inf``.
    """


class Direction(str, enum.Enum):
    REAL_TO_SHIFTED = "RealToShifted"
    SHIFTED_TO_REAL = "ShiftedToReal"
    ESCAPED = "Escaped"
    REENTERED = "Reentered"


@dataclass(frozen=True)
class EvolveConfig:
    """Continuation controls.

    ``probe_re`` is the ``|re|`` beyond which a root whose step keeps failing
    after full refinement is treated as having reached infinity.
    """

    steps: int = 400
    refine_levels: int = 12
    escape_threshold: float = 25.0
    reseed_re: float = 10.0
    probe_re: float = 6.0
    jump_window: float = 0.02 * math.pi
    grid: str = "uniform"
    solver: SolverConfig = field(default_factory=SolverConfig)


@dataclass(frozen=True)
class JumpEvent:
    eta_at: float
    quantum_number: object
    direction: Direction
    predicted_eta: float
    sign: int = 0

    @property
    def offset(self) -> float:
        return abs(self.eta_at - self.predicted_eta)


@dataclass(frozen=True)
class Step:
    """One point of a trace.

    ``R`` counts finite real roots and ``C = M - R``.  ``V`` is the number of
    admissible quantum numbers strictly between the real-axis counting
    limits ``n_L(-inf)`` and ``n_L(+inf)`` (real vacancies, filled or not).
    """

    eta: float
    rootset: RootSet
    R: int
    C: int
    V: int


def vacancies(rs: RootSet) -> int:
    """Admissible numbers strictly inside the real-axis counting range."""
    lo, hi = counting_limit(-1, rs), counting_limit(1, rs)
    off = 0.0 if rs.system.M % 2 else 0.5
    first = math.floor(lo - off) + 1
    last = math.ceil(hi - off) - 1
    return max(0, last - first + 1)


def _step(rs: RootSet) -> Step:
    return Step(rs.system.eta, rs, rs.R, rs.C, vacancies(rs))


@dataclass
class EvolutionTrace:
    """Steps (``eta`` strictly decreasing) and jump events."""

    system: BetheSystem
    steps: list = field(default_factory=list)
    events: list = field(default_factory=list)
    truncated: bool = False
    message: str = ""

    @property
    def final(self) -> RootSet:
        return self.steps[-1].rootset

    def etas(self) -> np.ndarray:
        return np.array([s.eta for s in self.steps])

    def counts(self) -> np.ndarray:
        return np.array([(s.R, s.C) for s in self.steps], dtype=int)

    def observed(self) -> np.ndarray:
        """Quantity compared with the vacancy formula: ``R`` for ``k >= 0``, ``V`` otherwise."""
        return np.array([s.R if self.system.k >= 0 else s.V for s in self.steps], dtype=int)

    def to_csv(self) -> str:
        """CSV text with columns ``eta, eta_over_pi, roots, R, C, energy``.

        ``roots`` is a ``;``-separated list of ``re:line`` (``line`` is
        ``r`` or ``s``); escaped roots appear as ``+inf:e`` or ``-inf:e``.
        """
        from .ed_oracle import energy_from_roots

        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["eta", "eta_over_pi", "roots", "R", "C", "energy"])
        for s in self.steps:
            rs = s.rootset
            parts = [f"{r.re:.15g}:{'s' if r.line is Line.SHIFTED else 'r'}" for r in rs.roots]
            parts += [f"{'+' if e.sign > 0 else '-'}inf:e" for e in rs.escaped]
            w.writerow([f"{s.eta:.15g}", f"{s.eta / math.pi:.12g}", ";".join(parts), s.R, s.C,
                        f"{energy_from_roots(rs):.15g}"])
        return buf.getvalue()

    def events_json(self) -> list:
        return [{"eta_at": e.eta_at, "eta_at_over_pi": e.eta_at / math.pi,
                 "quantum_number": str(e.quantum_number), "direction": e.direction.value,
                 "predicted_eta": e.predicted_eta, "sign": e.sign} for e in self.events]

    def to_json(self) -> str:
        return json.dumps({"schema": 1, "L": self.system.L, "M": self.system.M,
                           "numbers": [str(v) for v in self.system.numbers],
                           "truncated": self.truncated, "message": self.message,
                           "events": self.events_json(),
                           "steps": [{"eta": s.eta, "R": s.R, "C": s.C} for s in self.steps]})


# single-step machinery -----------------------------------------------------

def _predicted(sys: BetheSystem, eta: float) -> float:
    k = abs(sys.k)
    if k == 0:
        return math.nan
    return min(jump_points(k), key=lambda e: abs(e - eta))


def _newton(roots, numbers, escaped, sys, cfg: EvolveConfig):
    try:
        out = newton_solve(tuple(roots), sys, cfg.solver, tuple(numbers), tuple(escaped))
    except CoincidentRoots:
        return None
    return out if out.converged else None


def _jump(rs: RootSet, idx, cfg: EvolveConfig, events: list):
    """Move the roots ``idx`` to infinity together.

    They are first re-seeded on their other line at ``sign * reseed_re``;
    if that does not converge inside ``reseed_re`` they join the escaped list.
    Symmetric partners run off at the same ``eta``, so they are moved as one.
    """
    sys = rs.system
    idx = sorted(idx)
    roots = list(rs.roots)
    signs = {i: (1 if rs.roots[i].re > 0 else -1) for i in idx}
    for i in idx:
        roots[i] = Rapidity(signs[i] * cfg.reseed_re, rs.roots[i].line.other)
    out = _newton(roots, rs.numbers, rs.escaped, sys, cfg)
    if out is not None and all(abs(out.roots[i].re) <= cfg.reseed_re for i in idx) \
            and all(abs(x.re) <= cfg.escape_threshold for x in out.roots):
        for i in idx:
            d = Direction.REAL_TO_SHIFTED if rs.roots[i].line is Line.REAL else Direction.SHIFTED_TO_REAL
            events.append(JumpEvent(sys.eta, rs.numbers[i], d, _predicted(sys, sys.eta), signs[i]))
        return out
    keep = [j for j in range(len(rs.roots)) if j not in idx]
    esc = rs.escaped + tuple(Escaped(signs[i], rs.numbers[i], rs.roots[i].line) for i in idx)
    out = _newton([rs.roots[j] for j in keep], [rs.numbers[j] for j in keep], esc, sys, cfg)
    if out is None:
        raise StuckAtJump(f"roots {[str(rs.numbers[i]) for i in idx]} cannot be placed "
                          f"at eta={sys.eta}", rs)
    for i in idx:
        events.append(JumpEvent(sys.eta, rs.numbers[i], Direction.ESCAPED,
                                _predicted(sys, sys.eta), signs[i]))
    return out


def _own_equation(x, line: Line, n, sign_excluded: Escaped, rs: RootSet):
    """Equation of an escaped root placed at ``re = x`` on ``line``."""
    sys, a = rs.system, rs.system.anisotropy
    others = list(rs.escaped)
    others.remove(sign_excluded)
    tw = sum(e.sign for e in others)
    tw = 0.0 if tw == 0 else (math.pi - 2 * a.eta) * tw
    xs, sh = rs.re, rs.shifted
    same = sh == (line is Line.SHIFTED)
    d = x - xs
    pair = np.where(same, phi2_same(d, a), phi2_mixed(d, a)).sum() if xs.size else 0.0
    bare = phi_shifted(x, a) if line is Line.SHIFTED else phi_real(x, a)
    return float(sys.L * bare - 2 * np.pi * equation_number(n, line, sys.L) - pair + tw)


def _reenter(rs: RootSet, cfg: EvolveConfig, events: list) -> RootSet:
    """Bring escaped roots back when their equation has a sign change at large ``|re|``."""
    changed = True
    while changed and rs.escaped:
        changed = False
        for e in rs.escaped:
            if e.number is None:
                continue
            same_side = sum(1 for f in rs.escaped if f.sign == e.sign)
            if same_side > 1:
                continue
            grid = e.sign * np.linspace(0.5, cfg.reseed_re, 39)
            for line in ((e.line or Line.REAL), (e.line or Line.REAL).other):
                g = np.array([_own_equation(x, line, e.number, e, rs) for x in grid])
                idx = np.nonzero(g[1:] * g[:-1] < 0)[0]
                if idx.size == 0:
                    continue
                x0 = 0.5 * (grid[idx[-1]] + grid[idx[-1] + 1])
                esc = list(rs.escaped)
                esc.remove(e)
                out = _newton(list(rs.roots) + [Rapidity(float(x0), line)],
                              list(rs.numbers) + [e.number], esc, rs.system, cfg)
                if out is not None and abs(out.roots[-1].re) <= cfg.reseed_re \
                        and all(abs(r.re) <= cfg.escape_threshold for r in out.roots):
                    events.append(JumpEvent(rs.system.eta, e.number, Direction.REENTERED,
                                            _predicted(rs.system, rs.system.eta), e.sign))
                    rs, changed = out, True
                    break
            if changed:
                break
    return rs


def _release_locked_pairs(rs: RootSet, cfg: EvolveConfig, events: list) -> RootSet:
    """Send coincident real/shifted pairs to infinity.

    At the XX point a real root with ``n`` and a shifted root with
    ``n' = L/2 - n`` share their real part.  For any smaller ``eta`` the pair
    sits beyond every finite position, so both members are moved to the
    escaped list at once.

    Raises
    ------
    LockedPair
        If the escaped roots would not be ``k`` at each infinity.
    """
    x, sh = rs.re, rs.shifted
    drop = set()
    for i in np.nonzero(~sh)[0]:
        for j in np.nonzero(sh)[0]:
            if j not in drop and abs(x[i] - x[j]) < cfg.solver.coincidence_tol:
                drop.update((int(i), int(j)))
                break
    if not drop:
        return rs
    keep = [i for i in range(len(rs.roots)) if i not in drop]
    esc = list(rs.escaped)
    for i in sorted(drop):
        r, n = rs.roots[i], rs.numbers[i]
        sign = 1 if r.re > 0 else -1
        esc.append(Escaped(sign, n, r.line))
        events.append(JumpEvent(rs.system.eta, n, Direction.ESCAPED,
                                _predicted(rs.system, rs.system.eta), sign))
    k = rs.system.k
    if sum(e.sign > 0 for e in esc) != k or sum(e.sign < 0 for e in esc) != k:
        raise LockedPair("locked real/shifted pair leaves both lines below the XX point; "
                         "not representable on the real and shifted lines", rs)
    out = _newton([rs.roots[i] for i in keep], [rs.numbers[i] for i in keep], esc, rs.system, cfg)
    if out is None:
        raise StuckAtJump("state without its locked pairs does not converge", rs)
    return out


def _post(rs: RootSet, cfg: EvolveConfig, events: list) -> RootSet:
    while True:
        far = [i for i, r in enumerate(rs.roots) if abs(r.re) > cfg.escape_threshold]
        if not far:
            break
        rs = _jump(rs, far, cfg, events)
    return _reenter(rs, cfg, events)


def _advance(rs: RootSet, e_from: float, e_to: float, level: int, cfg: EvolveConfig,
             events: list, out: list):
    sys = rs.system.at(Anisotropy(e_to))
    res = _newton(rs.roots, rs.numbers, rs.escaped, sys, cfg)
    if res is not None:
        out.append(_post(res, cfg, events))
        return
    if level < cfg.refine_levels:
        mid = 0.5 * (e_from + e_to)
        _advance(rs, e_from, mid, level + 1, cfg, events, out)
        _advance(out[-1], mid, e_to, level + 1, cfg, events, out)
        return
    far = [i for i, r in enumerate(rs.roots) if abs(r.re) > cfg.probe_re]
    if not far:
        raise NoConvergence(f"step to eta={e_to} failed after {level} refinements", rs)
    moved = replace(rs, system=sys)
    out.append(_post(_jump(moved, far, cfg, events), cfg, events))


def eta_grid(eta0: float, eta1: float, steps: int, kind: str = "uniform") -> np.ndarray:
    """Points after ``eta0`` down to ``eta1`` (inclusive)."""
    if kind == "geometric":
        g = eta0 * (eta1 / eta0) ** (np.arange(1, steps + 1) / steps)
    elif kind == "uniform":
        g = np.linspace(eta0, eta1, steps + 1)[1:]
    else:
        raise ValueError(f"unknown grid {kind!r}")
    g[-1] = eta1
    return g


def evolve(start: RootSet, eta_target: float, steps: int | None = None,
           cfg: EvolveConfig | None = None, etas=None) -> EvolutionTrace:
    """Follow ``start`` in ``eta`` at fixed quantum numbers.

    Parameters
    ----------
    start : RootSet
        Converged state; its anisotropy is the starting point.
    eta_target : float
        Final ``eta`` (below the start).
    steps : int, optional
        Grid size; defaults to ``cfg.steps``.
    cfg : EvolveConfig, optional
    etas : sequence of float, optional
        Explicit decreasing grid overriding ``steps``; ``eta_target`` is
        appended if missing.

    Returns
    -------
    EvolutionTrace
        Includes the start and every refinement point.

    Raises
    ------
    NoConvergence
        With ``.trace`` holding the truncated trace.
    """
    cfg = cfg or EvolveConfig()
    if not start.converged:
        raise ValueError("start state is not converged")
    eta0 = start.system.eta
    if not eta_target < eta0:
        raise ValueError("eta_target must lie below the starting eta")
    if etas is None:
        grid = eta_grid(eta0, eta_target, steps or cfg.steps, cfg.grid)
    else:
        grid = [e for e in etas if e < eta0]
        if not grid or grid[-1] != eta_target:
            grid.append(eta_target)
    events: list = []
    trace = EvolutionTrace(start.system, events=events)
    trace.steps.append(_step(start))
    try:
        rs, prev = _post(_release_locked_pairs(start, cfg, events), cfg, events), eta0
    except NoConvergence as exc:
        trace.truncated, trace.message = True, str(exc)
        exc.trace = trace
        raise
    for e in grid:
        buf: list = []
        try:
            _advance(rs, prev, float(e), 0, cfg, events, buf)
        except NoConvergence as exc:
            trace.steps.extend(_step(r) for r in buf)
            trace.truncated, trace.message = True, str(exc)
            exc.trace = trace
            raise
        trace.steps.extend(_step(r) for r in buf)
        rs, prev = buf[-1], float(e)
    return trace


# counts ---------------------------------------------------------------------

@dataclass(frozen=True)
class CountReport:
    """Observed ``R`` against the vacancy formula along a trace."""

    checked: int
    violations: tuple
    flagged: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def check_counts(trace: EvolutionTrace, cfg: EvolveConfig | None = None) -> CountReport:
    """Compare the trace with :func:`~xxzbethe.states.real_vacancies` outside jump windows.

    For ``k >= 0`` the formula is compared with the number of finite real
    roots; for ``k < 0`` it counts real vacancies, including holes, and is
    compared with :attr:`Step.V`.

    Steps within ``cfg.jump_window`` of a jump point are listed in
    ``flagged`` (with observed and predicted ``R``) and never counted as
    violations.
    """
    cfg = cfg or EvolveConfig()
    sys = trace.system
    k = sys.k
    checked, bad, flagged = 0, [], []
    for s, obs in zip(trace.steps, trace.observed()):
        obs = int(obs)
        try:
            pred = real_vacancies(sys.L, k, s.eta)
        except AtJumpPoint:
            flagged.append((s.eta, obs, None))
            continue
        if near_jump(k, s.eta, cfg.jump_window):
            if obs != pred:
                flagged.append((s.eta, obs, pred))
            continue
        checked += 1
        if obs != pred:
            bad.append((s.eta, obs, pred))
    return CountReport(checked, tuple(bad), tuple(flagged))


# direct solves at a target anisotropy ---------------------------------------

def _route_grid(eta: float, cfg: EvolveConfig):
    floor = 0.02 * math.pi
    n = max(8, math.ceil(cfg.steps * (XX - max(eta, floor)) / XX))
    g = list(eta_grid(XX, max(eta, floor), n))
    if eta < floor:
        g += list(eta_grid(floor, eta, 60, "geometric"))
    return g


def solve_at(sys: BetheSystem, solver_cfg: SolverConfig | None = None,
             evolve_cfg: EvolveConfig | None = None) -> RootSet:
    """Solve ``sys`` at its own anisotropy.

    * XX point: closed form, boundary numbers ``|n| = L/4`` become roots at
      infinity with momentum ``+-pi/2``.
    * ``M <= L/2``: continuation from the XX point.
    * ``M > L/2``: :func:`reflection`.

    Raises
    ------
    NoConvergence
    """
    ecfg = evolve_cfg or EvolveConfig()
    if solver_cfg is not None:
        ecfg = replace(ecfg, solver=solver_cfg)
    if sys.anisotropy.is_xx:
        rs = seed_from_xx(sys, ecfg.solver, allow_escaped=True)
        if not rs.converged:
            raise NoConvergence("XX closed form did not satisfy the equations", rs)
        return rs
    if 2 * sys.M > sys.L:
        return reflection(sys, ecfg.solver, ecfg)
    start = seed_from_xx(sys.at(Anisotropy(XX)), ecfg.solver, allow_escaped=True)
    trace = evolve(start, sys.eta, cfg=ecfg, etas=_route_grid(sys.eta, ecfg))
    return replace(trace.final, system=sys)


def reflection(sys: BetheSystem, solver_cfg: SolverConfig | None = None,
               evolve_cfg: EvolveConfig | None = None) -> RootSet:
    """State with ``M > L/2`` from its particle-hole partner.

    The partner (``L - M`` roots, quantum numbers from the particle-hole map)
    is solved; ``k = M - L/2`` roots are then added at each of ``+inf`` and
    ``-inf``.  Balanced escapes leave the partner's equations unchanged, so
    the finite roots and their quantum numbers are the partner's.
    """
    if 2 * sys.M <= sys.L:
        raise ValueError("reflection needs M > L/2")
    partner = dual_numbers(sys).dual
    rs = solve_at(partner, solver_cfg, evolve_cfg)
    k = sys.k
    esc = tuple(rs.escaped) + (Escaped(1),) * k + (Escaped(-1),) * k
    return replace(rs, system=sys, escaped=esc)
