import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xxzbethe import dispersion as dsp
from xxzbethe import ed_oracle as ed
from xxzbethe.evolution import solve_at
from xxzbethe.kernels import Anisotropy
from xxzbethe.solver import BetheSystem
from xxzbethe.states import ground_system


def test_epsilon_known_values():
    assert dsp.epsilon(math.pi / 2, math.pi / 2) == pytest.approx(1.0)
    # isotropic limit: amplitude pi/2
    assert dsp.epsilon(math.pi / 2, 1e-8) == pytest.approx(math.pi / 2, rel=1e-12)
    assert dsp.epsilon(0.0, 0.7) == 0.0
    with pytest.raises(ValueError):
        dsp.epsilon(1.0, 2.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(0.01, math.pi / 2))
def test_epsilon_symmetries(p, eta):
    assert dsp.epsilon(math.pi - p, eta) == pytest.approx(dsp.epsilon(p, eta), abs=1e-12)
    assert dsp.epsilon(p + 2 * math.pi, eta) == pytest.approx(dsp.epsilon(p, eta), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-20, 20))
def test_fold_range(p):
    f = dsp.fold(p)
    assert -math.pi < f <= math.pi
    assert math.cos(f) == pytest.approx(math.cos(p), abs=1e-9)
    assert math.sin(f) == pytest.approx(math.sin(p), abs=1e-9)


def test_two_excitation_adds_energies_and_folds_momentum():
    dE, dP = dsp.two_excitation(2.5, 2.0, math.pi / 3)
    assert dE == pytest.approx(dsp.epsilon(2.5, math.pi / 3) + dsp.epsilon(2.0, math.pi / 3))
    assert dP == pytest.approx(4.5 - 2 * math.pi)
    ex = dsp.Excitation.from_formula("hole", 4.0, math.pi / 4)
    assert ex.kind is dsp.Kind.HOLE and ex.p == pytest.approx(4.0 - 2 * math.pi)


def test_state_builders_validate():
    a = Anisotropy.from_pi(1 / 3)
    with pytest.raises(ValueError):
        dsp.ph_system(8, 7 / 2, 5 / 2, a)
    with pytest.raises(ValueError):
        dsp.ph_system(8, 1 / 2, 3 / 2, a)
    with pytest.raises(ValueError):
        dsp.hole_hole_system(8, 1, 1, a)
    with pytest.raises(ValueError):
        dsp.particle_particle_system(8, 0, 3, a)
    with pytest.raises(ValueError):
        dsp.scan(8, a, "triplet")


@pytest.mark.parametrize("kind", ["ph", "hole", "particle"])
@pytest.mark.parametrize("x", [0.5, 1 / 3])
def test_excited_states_are_ed_eigenstates_with_the_assigned_momentum(kind, x):
    # ED energy and translation phase independently confirm dE and dP at L = 8
    L, a = 8, Anisotropy.from_pi(x)
    g = solve_at(ground_system(L, L // 2, a))
    vg = ed.bethe_amplitudes(g)
    for pt in dsp.scan(L, a, kind):
        nums = list(pt.numbers)
        rs = solve_at(BetheSystem(L, len(nums), a, nums))
        v = ed.bethe_amplitudes(rs)
        eig = ed.diagonalize(ed.build_hamiltonian(L, a.delta, len(nums)))
        m = ed.match_state(v, eig)
        assert m.overlap > 1 - 1e-9
        assert m.ed_energy - ed.energy_from_roots(g) == pytest.approx(pt.dE_ba, abs=1e-9)
        phase = ed.translation_eigenvalue(v) / ed.translation_eigenvalue(vg)
        assert phase == pytest.approx(np.exp(1j * pt.dP_formula), abs=1e-9)
        assert pt.momentum_error < 1e-9


def test_free_fermion_point_is_exact():
    pts = dsp.scan(16, Anisotropy.from_pi(0.5), "ph")
    assert max(p.energy_error for p in pts) < 1e-12


@pytest.mark.parametrize("kind", ["ph", "hole", "particle"])
def test_finite_size_error_scales_like_one_over_L(kind):
    a = Anisotropy.from_pi(1 / 3)
    worst = [max(p.energy_error for p in dsp.scan(L, a, kind)) * L for L in (16, 32)]
    assert max(worst) < 5.0


def test_csv_columns():
    pts = dsp.scan(8, Anisotropy.from_pi(1 / 3), "hole")
    rows = list(csv.DictReader(io.StringIO(dsp.to_csv(pts))))
    assert list(rows[0]) == ["p", "eps_formula", "eps_ba", "L"]
    assert len(rows) == len(pts)
    for r, p in zip(rows, pts):
        assert float(r["eps_formula"]) == pytest.approx(dsp.epsilon(p.p2, p.eta))
