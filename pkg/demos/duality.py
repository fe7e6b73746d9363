"""Two descriptions of one eigenstate.

A state with M roots and its particle-hole partner with L - M roots give
the same energy, and the spin-flipped vectors coincide.  The script prints
the hole map and the comparison for a few L = 8 states.
"""
from xxzbethe.kernels import Anisotropy
from xxzbethe.solver import BetheSystem
from xxzbethe.states import dual_numbers, verify_duality

for x in (0.5, 0.4, 0.3):
    a = Anisotropy.from_pi(x)
    for nums in ([-1, 0, 1], [-1, 0, 2], [-0.5, 0.5], [-0.5, 1.5]):
        pair = dual_numbers(BetheSystem(8, len(nums), a, nums))
        rep = verify_duality(pair)
        hm = ", ".join(f"{k}->{v}" for k, v in sorted(pair.hole_map.items()))
        print(f"eta={x:.1f}pi  {[str(v) for v in pair.primal.numbers]} -> "
              f"{[str(v) for v in pair.dual.numbers]}")
        print(f"    holes {hm}")
        print(f"    E = {rep.primal_energy:+.12f}  |dE| = {rep.delta_e:.1e}  overlap = {rep.overlap:.15f}")
