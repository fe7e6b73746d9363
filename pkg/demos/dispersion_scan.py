"""Excitation energies against epsilon(p) = (pi/2)(sin eta / eta) sin p.

Prints, for L = 32 and 64 at eta = pi/3, the single-excitation energy of
symmetric particle-hole pairs next to the formula, and L times the worst
deviation for each family.
"""
import math

from xxzbethe import dispersion as dsp
from xxzbethe.kernels import Anisotropy

a = Anisotropy.from_pi(1 / 3)
for L in (32, 64):
    print(f"\nL = {L}")
    for kind in ("ph", "hole", "particle"):
        pts = dsp.scan(L, a, kind)
        worst = max(p.energy_error for p in pts)
        print(f"  {kind:<8} {len(pts):3d} points   L * max|dE - formula| = {L * worst:.3f}")
    for p in dsp.scan(L, a, "ph")[:: max(1, L // 16)]:
        print(f"    p = {p.p2 / math.pi:.4f} pi   eps = {p.dE_formula / 2:.6f}   bethe = {p.dE_ba / 2:.6f}")
