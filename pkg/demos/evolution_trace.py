"""Following states from the XX point towards the isotropic limit.

Three traces at L = 12:

* the k = 0 ground state, which keeps all roots real;
* a k = -2 state whose two shifted roots come down to the real axis;
* the k = 1 no-hole state, whose real count follows the vacancy formula.
"""
import math

from xxzbethe.evolution import check_counts, evolve
from xxzbethe.kernels import Anisotropy
from xxzbethe.solver import BetheSystem, seed_from_xx
from xxzbethe.states import ground_numbers

XX = Anisotropy.from_pi(0.5)
L = 12

cases = {
    "k=0 ground": ground_numbers(L, 6),
    "k=-2, shifted +-7/2": ["-7/2", "-1/2", "1/2", "7/2"],
    "k=1 no-hole": ground_numbers(L, 7),
}
for label, nums in cases.items():
    s = BetheSystem(L, len(nums), XX, nums)
    trace = evolve(seed_from_xx(s, allow_escaped=True), 0.05 * math.pi, steps=150)
    rep = check_counts(trace)
    print(f"\n{label}: numbers {[str(v) for v in s.numbers]}")
    print(f"  steps {len(trace.steps)}, count check ok={rep.ok} over {rep.checked} points")
    for e in trace.events:
        print(f"  {e.direction.value:<14} n={e.quantum_number!s:<5} at eta = {e.eta_at / math.pi:.4f} pi")
    for st in trace.steps[:: max(1, len(trace.steps) // 6)]:
        print(f"  eta = {st.eta / math.pi:.3f} pi   R = {st.R}  C = {st.C}")
