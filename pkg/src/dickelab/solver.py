"""Lowest eigenpairs per parity sector with truncation convergence.

The dense LAPACK path is the baseline at small dimension; larger sectors use
shift-invert ARPACK seeded at a Gershgorin lower bound, falling back to a
plain smallest-algebraic solve and finally to the dense path.  Every result
is residual-checked against ||H v - E v|| <= 1e-8.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as spla

from .errors import ConvergenceError
from .model import ModelParams, OperatorMatrix, SectorBasis, build_hamiltonian, build_sector_basis

DENSE_CUTOFF = 600
RESIDUAL_TOL = 1e-8
DEFAULT_LAMBDA_CAP = 400


@dataclass
class SpectralResult:
    """Lowest eigenpairs of one sector plus truncation metadata.

    ``eigenvalues`` are ascending, eigenvectors unit-norm columns in the
    SectorBasis ordering with the largest-magnitude coefficient positive.
    ``history`` records (lambda_max, eigenvalues) per truncation step.
    """

    parity: str | None
    lambda_max: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    basis: SectorBasis
    converged: bool = False
    history: list = field(default_factory=list)


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    for col in range(vecs.shape[1]):
        i = np.argmax(np.abs(vecs[:, col]))
        if vecs[i, col] < 0:
            vecs[:, col] *= -1.0
    return vecs


def _gershgorin_lower(H) -> float:
    d = H.diagonal()
    radius = np.asarray(abs(H).sum(axis=1)).ravel() - np.abs(d)
    return float((d - radius).min())


def lowest_eigenpairs(op: OperatorMatrix, k: int) -> SpectralResult:
    """k lowest eigenpairs of a symmetric operator, residual-checked."""
    dim = op.dimension
    if not 1 <= k <= dim:
        raise ValueError(f"k must be in [1, {dim}], got {k}")
    H = op.matrix
    vals = vecs = None
    attempts = []
    if dim > DENSE_CUTOFF and k < dim - 1:
        try:
            sigma = _gershgorin_lower(H) - 1.0
            vals, vecs = spla.eigsh(H, k=k, sigma=sigma, which="LM")
        except Exception as exc:  # ARPACK / factorization failure
            attempts.append(f"shift-invert: {exc}")
            try:
                vals, vecs = spla.eigsh(H, k=k, which="SA")
            except Exception as exc2:
                attempts.append(f"SA: {exc2}")
                vals = vecs = None
    if vals is None:
        vals, vecs = la.eigh(H.toarray(), subset_by_index=(0, k - 1))
    order = np.argsort(vals)
    vals = np.asarray(vals)[order]
    vecs = _fix_signs(np.asarray(vecs)[:, order])
    residuals = np.linalg.norm(H @ vecs - vecs * vals[None, :], axis=0)
    if np.any(residuals > RESIDUAL_TOL):
        if dim > DENSE_CUTOFF:  # final safety net: dense solve
            vals, vecs = la.eigh(H.toarray(), subset_by_index=(0, k - 1))
            vecs = _fix_signs(vecs)
            residuals = np.linalg.norm(H @ vecs - vecs * vals[None, :], axis=0)
        if np.any(residuals > RESIDUAL_TOL):
            raise ConvergenceError(
                f"eigensolver residual {residuals.max():.3e} exceeds {RESIDUAL_TOL:.1e}",
                diagnostics={"residuals": residuals, "attempts": attempts, "dim": dim},
            )
    return SpectralResult(
        parity=op.basis.parity,
        lambda_max=op.basis.lambda_max,
        eigenvalues=vals,
        eigenvectors=vecs,
        basis=op.basis,
    )


def coherent_photon_number(params: ModelParams) -> float:
    """Mean photon number of the minimizing coherent state (0 in the normal phase)."""
    x = abs(params.x)
    if x <= 1.0:
        return 0.0
    return params.n_atoms * params.gamma_c ** 2 * x ** 2 * -math.expm1(-4 * math.log(x))


def initial_lambda(params: ModelParams) -> int:
    """Truncation seed: atom count plus the coherent photon bulk plus 10 sigma."""
    mu = coherent_photon_number(params)
    return math.ceil(params.n_atoms + mu + 10.0 * math.sqrt(mu + 1.0))


def _eigs_close(prev: np.ndarray, cur: np.ndarray, tol: float) -> bool:
    d = np.abs(cur - prev)
    scale = np.maximum(np.abs(cur), np.abs(prev))
    return bool(np.all((d == 0.0) | (d <= tol * scale)))


def converge_ground(params: ModelParams, parity: str, tol: float = 1e-8,
                    k: int = 1, lambda_cap: int = DEFAULT_LAMBDA_CAP,
                    lambda_start: int | None = None) -> SpectralResult:
    """Grow lambda_max in steps of 2 until the k lowest eigenvalues settle.

    Convergence means each eigenvalue changes by less than ``tol`` relative
    between successive truncations.  Raises ConvergenceError (carrying the
    best result) if ``lambda_cap`` is exceeded.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be > 0 (tol={tol} is unreachable)")
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    lam = lambda_start if lambda_start is not None else initial_lambda(params)
    # the sector must hold at least k states to start with
    while build_sector_basis(params, lam, parity).size < max(k, 1):
        lam += 2
    history: list[tuple[int, np.ndarray]] = []
    prev = None
    best = None
    while lam <= lambda_cap:
        basis = build_sector_basis(params, lam, parity)
        res = lowest_eigenpairs(build_hamiltonian(params, basis), k)
        history.append((lam, res.eigenvalues.copy()))
        if prev is not None and _eigs_close(prev, res.eigenvalues, tol):
            res.converged = True
            res.history = history
            return res
        prev = res.eigenvalues
        best = res
        lam += 2
    if best is not None:
        best.history = history
    raise ConvergenceError(
        f"ground state not converged below lambda_max cap {lambda_cap}",
        best=best,
        diagnostics={"history": history, "tol": tol},
    )
