import numpy as np
import pytest

import brute
from dickelab.errors import ConvergenceError
from dickelab.model import ModelParams, build_hamiltonian, build_sector_basis
from dickelab.solver import (
    coherent_photon_number,
    converge_ground,
    initial_lambda,
    lowest_eigenpairs,
)


def _solve(params, lam_max, parity, k):
    basis = build_sector_basis(params, lam_max, parity)
    return lowest_eigenpairs(build_hamiltonian(params, basis), k)


class TestLowestEigenpairs:
    def test_gamma_zero_even_ground(self):
        p = ModelParams(1.0, 0.0, 20)
        res = _solve(p, 30, "even", 1)
        assert res.eigenvalues[0] == pytest.approx(-10.0, abs=1e-12)

    def test_gamma_zero_odd_degenerate(self):
        p = ModelParams(1.0, 0.0, 2)
        res = _solve(p, 6, "odd", 2)
        assert res.eigenvalues[0] == pytest.approx(0.0, abs=1e-12)
        assert res.eigenvalues[1] == pytest.approx(0.0, abs=1e-12)

    def test_small_coupling_odd_shift(self):
        # the lambda=1 block is [[0, gamma], [gamma, 0]] at resonance
        p = ModelParams(1.0, 0.1, 2)
        block = _solve(p, 1, "odd", 1)
        assert block.eigenvalues[0] == pytest.approx(-0.1, abs=1e-14)
        # the converged sector value sits just below the 2x2 estimate
        res = converge_ground(p, "odd", tol=1e-10, k=1)
        assert res.eigenvalues[0] == pytest.approx(-0.1, abs=2e-2)
        assert res.eigenvalues[0] <= -0.1 + 1e-12

    def test_matches_brute_dense(self):
        p = ModelParams(0.8, 0.6, 4)
        basis = build_sector_basis(p, 12, "even")
        res = lowest_eigenpairs(build_hamiltonian(p, basis), 3)
        Hb, _ = brute.dense_hamiltonian(0.8, 0.6, 4, 12, "even")
        wb = np.sort(np.linalg.eigvalsh(Hb))
        assert np.allclose(res.eigenvalues, wb[:3], atol=1e-10)

    def test_residuals_and_norms(self):
        p = ModelParams(1.0, 1.0, 10)
        basis = build_sector_basis(p, 60, "even")
        op = build_hamiltonian(p, basis)
        res = lowest_eigenpairs(op, 2)
        for col in range(2):
            v = res.eigenvectors[:, col]
            assert abs(np.linalg.norm(v) - 1.0) < 1e-12
            r = np.linalg.norm(op.matrix @ v - res.eigenvalues[col] * v)
            assert r <= 1e-8

    def test_sign_convention(self):
        p = ModelParams(1.0, 0.9, 8)
        res = _solve(p, 40, "even", 2)
        for col in range(2):
            v = res.eigenvectors[:, col]
            assert v[np.argmax(np.abs(v))] > 0

    def test_sparse_path_agrees_with_dense(self):
        # dimension above the dense cutoff exercises the ARPACK path
        p = ModelParams(1.0, 1.0, 20)
        basis = build_sector_basis(p, 80, "even")
        op = build_hamiltonian(p, basis)
        assert op.dimension > 600
        res = lowest_eigenpairs(op, 2)
        dense = np.sort(np.linalg.eigvalsh(op.toarray()))[:2]
        assert np.allclose(res.eigenvalues, dense, atol=1e-9)

    def test_k_bounds(self):
        p = ModelParams(1.0, 0.5, 2)
        op = build_hamiltonian(p, build_sector_basis(p, 4, "even"))
        with pytest.raises(ValueError):
            lowest_eigenpairs(op, 0)
        with pytest.raises(ValueError):
            lowest_eigenpairs(op, op.dimension + 1)


class TestConvergeGround:
    def test_converges_quickly_at_moderate_coupling(self):
        p = ModelParams(1.0, 1.0, 10)
        assert coherent_photon_number(p) == pytest.approx(9.375)
        res = converge_ground(p, "even", tol=1e-8)
        assert res.converged
        assert res.lambda_max < 400
        assert len(res.history) >= 2

    def test_gamma_zero_converges_immediately(self):
        p = ModelParams(1.0, 0.0, 6)
        res = converge_ground(p, "even", tol=1e-12)
        assert res.converged
        assert len(res.history) == 2  # first comparison already settles
        assert res.eigenvalues[0] == pytest.approx(-3.0, abs=1e-14)

    def test_zero_tolerance_rejected(self):
        with pytest.raises(ValueError, match="unreachable"):
            converge_ground(ModelParams(1.0, 0.5, 4), "even", tol=0.0)

    def test_cap_exceeded_carries_best(self):
        p = ModelParams(1.0, 1.0, 10)
        with pytest.raises(ConvergenceError) as err:
            converge_ground(p, "even", tol=1e-8, lambda_start=10, lambda_cap=16)
        assert err.value.best is not None
        assert err.value.best.eigenvalues.shape == (1,)
        assert len(err.value.diagnostics["history"]) == 4

    def test_monotone_truncation(self):
        # ground eigenvalue is non-increasing as the window grows
        p = ModelParams(1.0, 0.9, 8)
        vals = [_solve(p, lam, "even", 1).eigenvalues[0] for lam in (12, 16, 20, 30, 40)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_history_matches_eigenvalues(self):
        p = ModelParams(1.0, 0.7, 6)
        res = converge_ground(p, "odd", tol=1e-9, k=2)
        lam_last, eigs_last = res.history[-1]
        assert lam_last == res.lambda_max
        assert np.array_equal(eigs_last, res.eigenvalues)

    def test_initial_lambda_seed(self):
        p = ModelParams(1.0, 1.0, 10)
        # N + mu + 10 sqrt(mu+1) with mu = 9.375
        assert initial_lambda(p) == int(np.ceil(10 + 9.375 + 10 * np.sqrt(10.375)))

    def test_even_odd_near_degenerate_above_transition(self):
        p = ModelParams(1.0, 1.0, 20)
        e_even = converge_ground(p, "even", tol=1e-8).eigenvalues[0]
        e_odd = converge_ground(p, "odd", tol=1e-8).eigenvalues[0]
        assert abs(e_even - e_odd) < 1e-3 * p.n_atoms
