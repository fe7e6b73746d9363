"""Command-line front end.

Subcommands: ``solve``, ``evolve``, ``dual``, ``verify``, ``dispersion``.

Exit codes: 0 success (including an expected null state), 1 numerical
failure, 2 input error.  JSON outputs carry ``"schema": 1``.

``--eta`` accepts ``0.5pi``, ``pi/3``, ``0.4π`` or plain radians;
``--delta`` gives ``Delta = cos(eta)`` instead.

Configuration file (``--config``), INI format, section ``[xxzbethe]``::

    tol = 1e-12
    max_iter = 200
    boundary_eps = 1e-6
    steps = 400
    refine_levels = 12
    escape_threshold = 25
    reseed_re = 10
    probe_re = 6
    jump_window = 0.0628
    xxx_eps = 1e-3
    max_L = 14

Flags override the file, the file overrides built-in defaults.
"""
from __future__ import annotations

import argparse
import configparser
import itertools
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import ed_oracle as ed
from .dispersion import scan, to_csv
from .evolution import EvolveConfig, check_counts, evolve, solve_at
from .kernels import Anisotropy, Line, Rapidity
from .solver import (BetheSystem, Escaped, NoConvergence, SolverConfig, counting_function,
                     equation_number, newton_solve, seed_from_xx, to_number)
from .states import WindowMismatch, dual_numbers, ground_numbers, verify_duality, window

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2
SCHEMA = 1

EVOLVE_CSV_HELP = """\
trace CSV columns:
  eta          anisotropy angle (radians)
  eta_over_pi  eta / pi
  roots        ';'-separated re:line, line r (real) or s (Im t = pi/2);
               escaped roots as +inf:e / -inf:e
  R, C         finite real roots and M - R
  energy       sum(cos k - Delta)
dispersion CSV columns: p, eps_formula, eps_ba, L
"""


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-12
    max_iter: int = 200
    boundary_eps: float = 1e-6
    steps: int = 400
    refine_levels: int = 12
    escape_threshold: float = 25.0
    reseed_re: float = 10.0
    probe_re: float = 6.0
    jump_window: float = 0.02 * math.pi
    xxx_eps: float = 1e-3
    max_L: int = ed.MAX_L

    def __post_init__(self):
        for name in ("tol", "boundary_eps", "jump_window", "xxx_eps", "escape_threshold",
                     "reseed_re", "probe_re"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if not 0 < self.max_L <= ed.MAX_L:
            raise InputError(f"max_L must lie in (0, {ed.MAX_L}]")

    def solver(self) -> SolverConfig:
        return SolverConfig(tol=self.tol, max_iter=self.max_iter, boundary_eps=self.boundary_eps)

    def evolution(self) -> EvolveConfig:
        return EvolveConfig(steps=self.steps, refine_levels=self.refine_levels,
                            escape_threshold=self.escape_threshold, reseed_re=self.reseed_re,
                            probe_re=self.probe_re, jump_window=self.jump_window,
                            solver=self.solver())


_ETA = re.compile(r"^\s*([-+0-9.eE]*)\s*\*?\s*(pi|π)\s*(?:/\s*([0-9.]+))?\s*$")


def parse_eta(text: str) -> float:
    """``"0.5pi" -> pi/2``, ``"pi/3"``, ``"0.4π"``; otherwise radians.

    >>> parse_eta("0.5pi") == math.pi / 2
    True
    """
    m = _ETA.match(text)
    try:
        if m:
            coef = float(m.group(1)) if m.group(1) not in ("", "+") else 1.0
            if m.group(1) == "-":
                coef = -1.0
            val = coef / (float(m.group(3)) if m.group(3) else 1.0)
            return math.pi / 2 if val == 0.5 else val * math.pi
        return float(text)
    except ValueError as exc:
        raise InputError(f"cannot parse eta {text!r}") from exc


def _numbers(text: str) -> list:
    try:
        return [to_number(Fraction(t.strip())) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad quantum numbers {text!r}") from exc


def load_config(args) -> RunConfig:
    vals = {}
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise InputError(f"cannot read config {args.config}")
        sec = cp["xxzbethe"] if cp.has_section("xxzbethe") else {}
        fields = {f.lower(): f for f in RunConfig.__dataclass_fields__}
        for key, v in dict(sec).items():
            k = fields.get(key.lower())
            if k is None:
                raise InputError(f"unknown config key {key!r}")
            typ = RunConfig.__dataclass_fields__[k].type
            vals[k] = int(v) if typ == "int" else float(v)
    for k in RunConfig.__dataclass_fields__:
        v = getattr(args, k, None)
        if v is not None:
            vals[k] = v
    return RunConfig(**vals)


def anisotropy_from(args) -> Anisotropy:
    if getattr(args, "delta", None) is not None:
        return Anisotropy.from_delta(args.delta)
    if getattr(args, "eta", None) is None:
        raise InputError("give --eta or --delta")
    return Anisotropy(parse_eta(args.eta))


def state_from(args, a: Anisotropy) -> BetheSystem:
    """Build the state from ``--numbers`` or ``--ground`` (+ ``--particles/--holes``)."""
    L, M = args.L, args.M
    if L is None or M is None:
        raise InputError("--L and --M are required")
    if args.numbers is not None:
        nums = _numbers(args.numbers)
    elif args.ground:
        parts = _numbers(args.particles) if args.particles else []
        hs = _numbers(args.holes) if args.holes else []
        base = list(ground_numbers(L, M - len(parts) + len(hs)))
        missing = [h for h in hs if h not in base]
        if missing:
            raise InputError(f"holes {[str(h) for h in missing]} are not in the ground sea")
        nums = [v for v in base if v not in hs] + parts
    else:
        raise InputError("give --numbers or --ground")
    sys_ = BetheSystem(L, M, a, nums)
    if not set(sys_.numbers) <= set(window(L, M)):
        raise WindowMismatch("quantum numbers outside the Brillouin window")
    return sys_


# JSON helpers --------------------------------------------------------------------

def rootset_json(rs) -> dict:
    sys_ = rs.system
    checks = []
    for r, n in zip(rs.roots, rs.numbers):
        target = equation_number(n, r.line, sys_.L)
        checks.append(abs(counting_function(r, rs) - target))
    return {
        "roots": [{"re": r.re, "line": r.line.value, "n": str(n)} for r, n in zip(rs.roots, rs.numbers)],
        "escaped": [{"sign": e.sign, "n": None if e.number is None else str(e.number),
                     "line": None if e.line is None else Line(e.line).value} for e in rs.escaped],
        "residual": rs.residual_norm,
        "iterations": rs.iterations,
        "converged": rs.converged,
        "R": rs.R,
        "C": rs.C,
        "energy": ed.energy_from_roots(rs),
        "momentum": ed.total_momentum(rs),
        "counting_check": max(checks) if checks else 0.0,
    }


def header(sys_: BetheSystem) -> dict:
    a = sys_.anisotropy
    return {"schema": SCHEMA, "L": sys_.L, "M": sys_.M, "k": sys_.k, "eta": a.eta,
            "eta_over_pi": a.eta_over_pi, "delta": a.delta,
            "numbers": [str(v) for v in sys_.numbers]}


def emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=lambda o: str(o) if isinstance(o, Fraction) else float(o))


# commands ------------------------------------------------------------------------

def _seed_from_json(path: str, sys_: BetheSystem):
    with open(path) as fh:
        data = json.load(fh)
    roots = [Rapidity(r["re"], Line(r["line"])) for r in data["roots"]]
    nums = [to_number(Fraction(r["n"])) for r in data["roots"]]
    esc = [Escaped(e["sign"], None if e["n"] is None else to_number(Fraction(e["n"])),
                   None if e["line"] is None else Line(e["line"])) for e in data.get("escaped", [])]
    return roots, nums, esc


def cmd_solve(args) -> int:
    cfg = load_config(args)
    a = anisotropy_from(args)
    s = state_from(args, a)
    if args.seed:
        roots, nums, esc = _seed_from_json(args.seed, s)
        rs = newton_solve(roots, s, cfg.solver(), nums, esc)
    else:
        rs = solve_at(s, cfg.solver(), cfg.evolution())
    out = header(s) | rootset_json(rs)
    emit(_dump(out), args.out)
    return EXIT_OK if rs.converged else EXIT_NUMERIC


def cmd_evolve(args) -> int:
    cfg = load_config(args)
    a_to = anisotropy_from(args)
    eta_from = parse_eta(args.eta_from)
    s = state_from(args, Anisotropy(eta_from))
    ecfg = replace(cfg.evolution(), grid=args.grid)
    start = (seed_from_xx(s, ecfg.solver, allow_escaped=True) if s.anisotropy.is_xx
             else solve_at(s, ecfg.solver, ecfg))
    etas = None
    if args.first is not None:
        first = parse_eta(args.first)
        from .evolution import eta_grid
        etas = [first] + list(eta_grid(first, a_to.eta, args.steps or ecfg.steps, ecfg.grid))
    status = EXIT_OK
    try:
        trace = evolve(start, a_to.eta, args.steps, ecfg, etas=etas)
    except NoConvergence as exc:
        trace = getattr(exc, "trace", None)
        if trace is None:
            raise
        status = EXIT_NUMERIC
    rep = check_counts(trace, ecfg)
    if args.csv:
        emit(trace.to_csv(), args.csv)
    out = header(s) | {
        "eta_from": eta_from, "eta_to": a_to.eta, "steps": len(trace.steps),
        "truncated": trace.truncated, "message": trace.message,
        "events": trace.events_json(),
        "counts": {"checked": rep.checked, "ok": rep.ok,
                   "violations": [list(v) for v in rep.violations],
                   "flagged": [list(v) for v in rep.flagged]},
        "final": rootset_json(trace.final),
    }
    emit(_dump(out), args.out)
    return status


def cmd_dual(args) -> int:
    cfg = load_config(args)
    a = anisotropy_from(args)
    s = state_from(args, a)
    pair = dual_numbers(s)
    out = header(s) | {"dual_M": pair.dual.M,
                       "dual_numbers": [str(v) for v in pair.dual.numbers],
                       "hole_map": {str(k): str(v) for k, v in sorted(pair.hole_map.items())}}
    status = EXIT_OK
    if not args.no_verify:
        if s.L > cfg.max_L:
            raise ed.SectorTooLarge(f"L={s.L} exceeds max_L={cfg.max_L}")
        rep = verify_duality(pair, solver_cfg=cfg.solver(), evolve_cfg=cfg.evolution())
        out["verification"] = {k: getattr(rep, k) for k in rep.__dataclass_fields__}
        status = EXIT_OK if rep.success else EXIT_NUMERIC
    emit(_dump(out), args.out)
    return status


def _match_json(m: ed.SpectralMatch) -> dict:
    return {"bethe_energy": m.bethe_energy, "ed_energy": m.ed_energy, "delta_e": m.delta_e,
            "overlap": m.overlap, "sector": list(m.sector)}


def _verify_one(s: BetheSystem, cfg: RunConfig, xxx: bool = False) -> dict:
    if s.L > cfg.max_L:
        raise ed.SectorTooLarge(f"L={s.L} exceeds max_L={cfg.max_L}")
    key = {"M": s.M, "numbers": [str(v) for v in s.numbers]}
    if xxx:
        v = ed.xxx_state(s.numbers, s.L)
        delta, E = 1.0, None
    else:
        rs = solve_at(s, cfg.solver(), cfg.evolution())
        v = ed.bethe_amplitudes(rs)
        delta, E = s.anisotropy.delta, ed.energy_from_roots(rs)
    if v.is_null:
        return key | {"null_state": True, "scale": v.scale,
                      "max_amplitude": float(np.max(np.abs(v.amplitudes)))}
    eig = ed.diagonalize(ed.build_hamiltonian(s.L, delta, s.M, cfg.max_L))
    m = ed.match_state(v, eig, E)
    out = key | {"null_state": False} | _match_json(m)
    if not xxx:
        t = ed.translation_eigenvalue(v)
        out["translation_error"] = abs(t - np.exp(1j * ed.total_momentum(rs)))
    return out


def _xxx_limit(s: BetheSystem, cfg: RunConfig) -> dict:
    """Overlap of the state at small ``eta`` with ``(S+)^{2k}`` of its isotropic partner."""
    try:
        rep = ed.xxx_limit_check(s, solver_cfg=cfg.solver(), evolve_cfg=cfg.evolution())
    except ValueError as exc:
        return {"eta": s.eta, "skipped": str(exc)}
    return {"eta": rep.eta, "overlap": rep.overlap,
            "xxx_numbers": [str(v) for v in rep.xxx_numbers],
            "xxx_holes": [str(v) for v in rep.xxx_holes], "holes_match": rep.holes_match}


def _sweep_sector(task):
    L, M, eta, cfg = task
    a = Anisotropy(eta)
    xx = Anisotropy(math.pi / 2)
    eig = ed.diagonalize(ed.build_hamiltonian(L, a.delta, M, cfg.max_L))
    states, vecs, energies = [], [], []
    for nums in itertools.combinations(window(L, M), M):
        s = BetheSystem(L, M, a, nums)
        rec = {"M": M, "numbers": [str(v) for v in s.numbers]}
        try:
            rs = solve_at(s, cfg.solver(), cfg.evolution()) if not a.is_xx else \
                seed_from_xx(s.at(xx), cfg.solver(), allow_escaped=True)
            v = ed.bethe_amplitudes(rs)
        except NoConvergence as exc:
            states.append(rec | {"status": "no_convergence", "message": str(exc)})
            continue
        if v.is_null:
            states.append(rec | {"status": "null"})
            continue
        E = ed.energy_from_roots(rs)
        m = ed.match_state(v, eig, E)
        vecs.append(v.normalized())
        energies.append(E)
        states.append(rec | {"status": "ok"} | _match_json(m))
    rank = int(np.linalg.matrix_rank(np.array(vecs).T, tol=1e-8)) if vecs else 0
    covered = [bool(energies) and float(np.min(np.abs(np.array(energies) - e))) < 1e-10
               for e in eig.energies]
    max_de = max((st["delta_e"] for st in states if st["status"] == "ok"), default=0.0)
    return {"M": M, "dim": eig.basis.dim, "rank": rank, "all_eigenvalues_matched": all(covered),
            "max_delta_e": max_de, "states": states}


def cmd_verify(args) -> int:
    cfg = load_config(args)
    if args.sweep:
        if args.L is None:
            raise InputError("--L is required")
        if args.xxx:
            raise InputError("--sweep does not support --xxx")
        a = anisotropy_from(args)
        sectors = [args.M] if args.M is not None else list(range(args.L + 1))
        tasks = [(args.L, M, a.eta, cfg) for M in sectors]
        if args.workers and args.workers > 1:
            with ProcessPoolExecutor(args.workers) as pool:
                res = list(pool.map(_sweep_sector, tasks))
        else:
            res = [_sweep_sector(t) for t in tasks]
        res.sort(key=lambda r: r["M"])
        ok = all(r["all_eigenvalues_matched"] and r["rank"] == r["dim"] for r in res)
        out = {"schema": SCHEMA, "L": args.L, "eta": a.eta, "eta_over_pi": a.eta_over_pi,
               "complete": ok, "max_delta_e": max(r["max_delta_e"] for r in res), "sectors": res}
        emit(_dump(out), args.out)
        return EXIT_OK if ok else EXIT_NUMERIC
    if args.xxx:
        # the isotropic path solves its own equations; the anisotropy is unused
        s = state_from(args, Anisotropy(math.pi / 2))
        res = _verify_one(s, cfg, xxx=True)
        out = {"schema": SCHEMA, "L": s.L, "M": s.M, "delta": 1.0} | res
        if 2 * s.M > s.L:
            out["limit"] = _xxx_limit(s.at(Anisotropy(cfg.xxx_eps)), cfg)
    else:
        a = anisotropy_from(args)
        s = state_from(args, a)
        out = header(s) | _verify_one(s, cfg)
    emit(_dump(out), args.out)
    if out["null_state"]:
        return EXIT_OK
    return EXIT_OK if out["overlap"] > 1 - 1e-8 and out["delta_e"] < 1e-9 else EXIT_NUMERIC


def cmd_dispersion(args) -> int:
    if args.L is None:
        raise InputError("--L is required")
    a = anisotropy_from(args)
    emit(to_csv(scan(args.L, a, args.kind)), args.out)
    return EXIT_OK


# parser --------------------------------------------------------------------------

def _common(p, state=True):
    p.add_argument("--L", type=int)
    p.add_argument("--eta", help="anisotropy angle, e.g. 0.5pi, pi/3 or radians")
    p.add_argument("--delta", type=float, help="Delta = cos(eta) in [0, 1)")
    p.add_argument("--config", help="INI file with a [xxzbethe] section")
    p.add_argument("--out", help="output file (default stdout)")
    for name, typ in (("tol", float), ("max_iter", int), ("boundary_eps", float),
                      ("steps", int), ("refine_levels", int), ("escape_threshold", float),
                      ("reseed_re", float), ("probe_re", float), ("jump_window", float),
                      ("xxx_eps", float), ("max_L", int)):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ, default=None)
    if state:
        p.add_argument("--M", type=int)
        g = p.add_mutually_exclusive_group()
        g.add_argument("--numbers", help="comma-separated quantum numbers; write --numbers=-3/2,-1/2,1/2,3/2 "
                            "when the first one is negative")
        g.add_argument("--ground", action="store_true", help="symmetric consecutive filling")
        p.add_argument("--particles", help="with --ground: numbers added to the sea")
        p.add_argument("--holes", help="with --ground: numbers removed from the sea")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xxzbethe", description=__doc__.split("\n")[0],
                                 epilog=EVOLVE_CSV_HELP,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one state at its anisotropy")
    _common(p)
    p.add_argument("--seed", help="JSON from a previous solve used as Newton seed")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evolve", help="continue a state in eta", epilog=EVOLVE_CSV_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p)
    p.add_argument("--eta-from", default="0.5pi")
    p.add_argument("--first", help="first grid point below --eta-from (e.g. 0.49pi)")
    p.add_argument("--grid", choices=("uniform", "geometric"), default="uniform")
    p.add_argument("--csv", help="write the trace CSV here")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("dual", help="particle-hole dual numbers and verification")
    _common(p)
    p.add_argument("--no-verify", action="store_true")
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("verify", help="match Bethe states against exact diagonalisation")
    _common(p)
    p.add_argument("--sweep", action="store_true", help="all quantum-number sets for L (and M)")
    p.add_argument("--xxx", action="store_true", help="isotropic point Delta = 1")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dispersion", help="excitation energies against epsilon(p)",
                       epilog=EVOLVE_CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p, state=False)
    p.add_argument("--kind", choices=("ph", "hole", "particle"), default="ph")
    p.set_defaults(func=cmd_dispersion)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (NoConvergence, ed.NullState, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, OSError) as exc:
        # includes ParityError, WindowMismatch, BoundaryAmbiguous, SectorTooLarge
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
