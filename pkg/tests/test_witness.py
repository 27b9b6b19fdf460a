from __future__ import annotations

import math

import numpy as np
import pytest

from pmselftest.counterex import sic_family
from pmselftest.ensemble import WeightedEnsemble, complete_ensemble
from pmselftest.qmat import basis, depolarize, overlap, projector, random_density_matrix, random_povm, random_pure_state
from pmselftest.witness import (
    Behavior,
    ShapeMismatch,
    behavior_from_realization,
    build_state_witness,
    cvec,
    eval_witness,
    ideal_behavior,
    ideal_measurements,
    pair_list,
    pair_overlap_bound,
    robust_overlap_bounds,
)


def basis_ensemble():
    return WeightedEnsemble((basis(2, 0), basis(2, 1)), (0.5, 0.5), completed=True)


def sic_ensemble():
    return WeightedEnsemble(tuple(sic_family(0.0)), (1 / 9,) * 9, completed=True)


class TestBuild:
    def test_pair_order_is_j_major(self):
        assert pair_list(4) == [(1, 0), (2, 0), (3, 0), (2, 1), (3, 1), (3, 2)]

    def test_basis(self):
        w = build_state_witness(basis_ensemble())
        assert w.coefficients == pytest.approx([0.5])
        assert w.w_star == 0.5

    def test_sic(self):
        w = build_state_witness(sic_ensemble())
        assert w.n_measurements == 36
        # ‖ψ_i − ψ_j‖₁ = 2√(1 − 1/4) = √3
        assert np.allclose(w.coefficients, math.sqrt(3) / 81)
        assert w.w_star == pytest.approx(2 / 3)

    def test_requires_completion(self):
        e = WeightedEnsemble((basis(2, 0),), (1.0,))
        with pytest.raises(ValueError):
            build_state_witness(e)


class TestEval:
    def test_basis_ideal(self):
        e = basis_ensemble()
        p = ideal_behavior(e)
        assert p.p(2, 0, 0) == pytest.approx(0)
        assert p.p(2, 1, 0) == pytest.approx(1)
        assert eval_witness(build_state_witness(e), p) == pytest.approx(0.5)

    def test_sic_ideal(self):
        e = sic_ensemble()
        assert eval_witness(build_state_witness(e), ideal_behavior(e)) == pytest.approx(2 / 3, abs=1e-9)

    def test_uniform_behavior(self):
        e = sic_ensemble()
        p = Behavior(np.full((9, 36, 2), 0.5))
        assert eval_witness(build_state_witness(e), p) == pytest.approx(0, abs=1e-15)

    def test_depolarized_is_lower(self, rng):
        e = complete_ensemble([random_pure_state(rng, 3) for _ in range(5)])
        w = build_state_witness(e)
        noisy = [depolarize(r, 0.01) for r in e.projectors()]
        p = behavior_from_realization(noisy, ideal_measurements(e))
        assert eval_witness(w, p) < w.w_star

    def test_extra_cells_ignored(self):
        e = basis_ensemble()
        table = np.zeros((3, 2, 3))
        table[1, 0, 1] = 1.0
        assert eval_witness(build_state_witness(e), Behavior(table)) == pytest.approx(0.5)

    def test_shape_errors(self):
        with pytest.raises(ShapeMismatch):
            eval_witness(build_state_witness(sic_ensemble()), Behavior(np.zeros((9, 10, 2))))
        with pytest.raises(ShapeMismatch):
            Behavior(np.zeros((2, 2)))

    def test_check(self):
        Behavior(np.full((2, 1, 2), 0.5)).check()
        with pytest.raises(ValueError):
            Behavior(np.full((2, 1, 2), 0.6)).check()

    @pytest.mark.parametrize("dim", [2, 3, 4])
    def test_soundness_random_realizations(self, rng, dim):
        e = complete_ensemble([random_pure_state(rng, dim) for _ in range(dim + 1)])
        w = build_state_witness(e)
        for _ in range(200):
            states = [random_density_matrix(rng, dim, rank=int(rng.integers(1, dim + 1))) for _ in range(len(e))]
            meas = [random_povm(rng, dim, 2) for _ in range(w.n_measurements)]
            assert eval_witness(w, behavior_from_realization(states, meas)) <= w.w_star + 1e-9


class TestDiagnostics:
    def test_pure_states_tight(self, rng):
        rhos = [random_pure_state(rng, 3) for _ in range(4)]
        v = cvec(rhos, [0.25] * 4)
        assert np.allclose(v.c, v.d)

    def test_identical_mixed_states(self, rng):
        rho = random_density_matrix(rng, 3)
        v = cvec([rho, rho], [0.5, 0.5])
        assert v.c == pytest.approx([0.0], abs=1e-12)
        assert v.d == pytest.approx([2 * 0.5 * math.sqrt(1 - overlap(rho, rho))])

    def test_proposition_one_chain(self, rng):
        for _ in range(200):
            dim = int(rng.integers(2, 5))
            n = int(rng.integers(2, 6))
            rhos = [random_density_matrix(rng, dim) for _ in range(n)]
            alpha = rng.dirichlet(np.ones(n))
            avg = sum(a * r for a, r in zip(alpha, rhos))
            c = cvec(rhos, alpha).c
            mid = 2 * (1 - overlap(avg, avg))
            assert np.sum(c**2) <= mid + 1e-10
            assert mid <= 2 * (1 - 1 / dim) + 1e-10

    def test_robust_bounds_formula(self):
        assert robust_overlap_bounds(0.0, [0.5, 0.5], 2) == (0.0, 0.0)
        do, dp = robust_overlap_bounds(1e-4, [1 / 9] * 9, 3)
        assert dp == pytest.approx(2e-4 / (9 / 81))
        assert do == pytest.approx(math.sqrt(8e-4) * 9)
        assert pair_overlap_bound(1e-4, 1 / 9, 1 / 9) == pytest.approx(do)

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ValueError):
            robust_overlap_bounds(0.9, [0.5, 0.5], 2)
