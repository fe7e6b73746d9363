"""Approach to the isotropic point.

The k = 1 state {-3, -1, 0, 1, 3} at L = 8 has two shifted roots.  As eta
shrinks its vector approaches (S+)^2 applied to an isotropic state with
three roots, whose holes are the images of the shifted numbers.  At the
isotropic point itself the M = 5 Bethe vector vanishes identically.
"""
import numpy as np

from xxzbethe import ed_oracle as ed
from xxzbethe.kernels import Anisotropy
from xxzbethe.solver import BetheSystem

nums = [-3, -1, 0, 1, 3]
for eta in (1e-1, 3e-2, 1e-2, 3e-3, 1e-3):
    r = ed.xxx_limit_check(BetheSystem(8, 5, Anisotropy(eta), nums))
    print(f"eta = {eta:.0e}   1 - overlap = {1 - r.overlap:.2e}   "
          f"isotropic numbers {[str(v) for v in r.xxx_numbers]}, holes {[str(v) for v in r.xxx_holes]}")

v = ed.xxx_state(nums, 8)
print(f"\nDelta = 1, M = 5: null = {v.is_null}, max |psi| = {np.max(np.abs(v.amplitudes)):.1e}, "
      f"scale = {v.scale:.1e}")
