from __future__ import annotations

import numpy as np
import pytest

from pmselftest.counterex import sic_family
from pmselftest.ensemble import complete_ensemble, fiducial_set, gram, min_basis_weight, randomize_basis
from pmselftest.qmat import DimensionMismatch, basis, haar_unitary, overlap, projector, random_density_matrix, random_pure_state


class TestCompletion:
    def test_single_qubit_state(self):
        e = complete_ensemble([basis(2, 0)])
        assert e.weights == pytest.approx((0.5, 0.5))
        assert abs(np.vdot(e.states[1], basis(2, 1))) == pytest.approx(1)
        assert e.n_targets == 1

    def test_basis_needs_nothing(self):
        e = complete_ensemble([basis(4, k) for k in range(4)])
        assert len(e) == 4
        assert e.weights == pytest.approx((0.25,) * 4)

    def test_fiducials_d3(self):
        e = complete_ensemble(fiducial_set(3).states)
        e.check()
        assert np.max(np.abs(e.resolution() - np.eye(3) / 3)) < 1e-9

    @pytest.mark.parametrize("dim", [2, 3, 4, 5])
    def test_random_inputs(self, rng, dim):
        for _ in range(250):
            n = int(rng.integers(1, 2 * dim + 2))
            e = complete_ensemble([random_pure_state(rng, dim) for _ in range(n)])
            assert all(a > 0 for a in e.weights)
            assert len(e) - n <= dim - 1
            assert np.max(np.abs(e.resolution() - np.eye(dim) / dim)) < 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            complete_ensemble([basis(2, 0), basis(3, 0)])


class TestFiducialSet:
    def test_counts(self):
        assert len(fiducial_set(3).states) == 9
        assert len(fiducial_set(4).states) == 14
        for d in range(3, 9):
            fid = fiducial_set(d)
            assert len(fid.states) == len(fid) == 5 * d - 6
            assert all(abs(np.linalg.norm(v) - 1) < 1e-14 for v in fid.states)

    def test_x_overlap(self):
        for d in (3, 5):
            fid = fiducial_set(d)
            assert abs(np.vdot(fid.x[0], fid.z[0])) ** 2 == pytest.approx(0.5)

    def test_printed_yy(self):
        yy = fiducial_set(3).yy[0]
        assert np.allclose(yy * np.sqrt(3), [1j, 1, 1j])

    def test_slices_and_labels(self):
        fid = fiducial_set(4)
        s = fid.slices()
        assert [fid.labels[i] for i in range(len(fid))[s["XX"]]] == ["XX1", "XX2"]
        assert s["YY"].stop == 14

    def test_too_small(self):
        with pytest.raises(ValueError):
            fiducial_set(2)


class TestRandomizeBasis:
    def test_generic_state_is_untouched(self, rng):
        psi = np.full(3, 1 / np.sqrt(3), dtype=complex)
        u, rotated, f = randomize_basis([psi], seed=1)
        assert np.array_equal(u, np.eye(3))
        assert f == pytest.approx([3.0])

    def test_basis_state_is_rotated(self):
        u, rotated, f = randomize_basis([basis(2, 0)], seed=3)
        assert min_basis_weight(rotated[0]) >= 1e-3
        assert f[0] == pytest.approx(1 / min_basis_weight(rotated[0]))

    def test_deterministic(self):
        a = randomize_basis([basis(3, 0), basis(3, 1)], seed=11)
        b = randomize_basis([basis(3, 0), basis(3, 1)], seed=11)
        assert np.array_equal(a[0], b[0])

    def test_preserves_gram(self, rng):
        states = [basis(4, 0)] + [random_pure_state(rng, 4) for _ in range(5)]
        _, rotated, _ = randomize_basis(states, seed=5)
        assert np.max(np.abs(gram(states) - gram(rotated))) < 1e-12


class TestGram:
    def test_orthonormal(self):
        assert np.allclose(gram([basis(3, k) for k in range(3)]), np.eye(3))

    def test_sic_off_diagonals(self):
        g = gram(sic_family(0.0))
        off = g[~np.eye(9, dtype=bool)]
        # |<ψ_i|ψ_j>|² = 1/(D+1) for a qutrit SIC
        assert np.allclose(off, 0.25, atol=1e-12)

    def test_mixed_diagonal_is_purity(self, rng):
        rhos = [random_density_matrix(rng, 3) for _ in range(4)]
        g = gram(rhos)
        assert np.allclose(g, g.T)
        assert np.allclose(np.diag(g), [overlap(r, r) for r in rhos])
