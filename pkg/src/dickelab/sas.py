"""Closed-form observables of the coherent and parity-projected trial states,
the numerically constructed projected state itself, and the photon/atom
distributions with their Gaussian limits.

Everything is evaluated at the superradiant critical point and expressed in
mu = N gamma_c^2 x^2 (1 - x^-4) (the coherent photon number) and the overlap
decay factor F.  Factorials and binomials go through log-gamma; F stays in
the log domain.  Useful identities: x^N sqrt(F) = exp(-mu) and
x^(2N) F = exp(-2 mu).

The table_closed_forms_* registries carry the closed forms exactly as
tabulated, including three rows that disagree with the projected-state
oracle (lam; var_n_photons; jz_n_photons, which is low by a factor
j = N/2); the *_observables constructors return the oracle-faithful
values instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ProjectionAnnihilationError, TruncationError
from .model import ModelParams
from .observables import ObservableSet, grid_observables
from .surface import f_function, k_ratio

ODD_LIMIT_WINDOW = 1e-8  # |x|-1 below this: use exact x->1 limits (odd branch)


# -- shared geometry ----------------------------------------------------------

def _require_superradiant(params: ModelParams, strict: bool = False) -> float:
    xa = abs(params.x)
    if xa < 1.0 or (strict and xa == 1.0):
        bound = "> 1" if strict else ">= 1"
        raise ValueError(f"superradiant branch requires |x| {bound}, got {params.x}")
    return xa


def one_minus_x4(xa: float) -> float:
    return -math.expm1(-4.0 * math.log(xa)) if xa > 1.0 else 0.0


def photon_number_coherent(params: ModelParams) -> float:
    """mu = N gamma_c^2 x^2 (1 - x^-4)."""
    xa = abs(params.x)
    return params.n_atoms * params.gamma_c ** 2 * xa ** 2 * one_minus_x4(xa)


def _sgn(parity: str) -> float:
    if parity == "even":
        return 1.0
    if parity == "odd":
        return -1.0
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def default_nu_max(params: ModelParams) -> int:
    """Photon cutoff covering the Poisson bulk plus a 20-sigma tail and floor."""
    mu = photon_number_coherent(params)
    return math.ceil(mu + 20.0 * math.sqrt(mu) + 50.0)


# -- coherent (unprojected) column --------------------------------------------

def coherent_observables(params: ModelParams) -> ObservableSet:
    """Product-state expectation values at the minimizing critical point.

    Sign convention: the phi_c = 0 branch, i.e. <q> < 0 and <Jx> > 0.
    """
    xa = _require_superradiant(params)
    n = params.n_atoms
    gc = params.gamma_c
    omx4 = one_minus_x4(xa)
    mu = n * gc ** 2 * xa ** 2 * omx4
    jz = -0.5 * n * xa ** -2
    lam = 0.5 * n * (1.0 - xa ** -2 + 2.0 * gc ** 2 * xa ** 2 * omx4)
    return ObservableSet(
        q=-math.sqrt(2.0 * n) * gc * xa * math.sqrt(omx4),
        p=0.0,
        jx=0.5 * n * math.sqrt(omx4),
        jy=0.0,
        jz=jz,
        n_photons=mu,
        lam=lam,
        var_q=0.5,
        var_p=0.5,
        var_jx=0.25 * n * xa ** -4,
        var_jy=0.25 * n,
        var_jz=0.25 * n * omx4,
        var_n_photons=mu,
        var_lam=0.5 * n * (0.5 + 2.0 * gc ** 2 * xa ** 2) * omx4,
        jz_n_photons=jz * mu,
        jx_q=-math.sqrt(n ** 3 / 2.0) * gc * xa * omx4,
    )


# -- symmetry-adapted column ---------------------------------------------------

def _sas_odd_limits(params: ModelParams) -> ObservableSet:
    """Exact x -> 1 limits of the odd-branch observables.

    Continuous with the single-excitation normal-phase state at the
    separatrix (same <a'a>, <Jz>, fluctuations and correlations).
    """
    n = params.n_atoms
    gc2 = params.gamma_c ** 2
    kappa = 2.0 / (n * (1.0 + 4.0 * gc2))
    amp = n * gc2 * kappa  # lim mu/(1-F)
    n_phot = 2.0 * amp
    jz = -0.5 * n * (1.0 - kappa)
    var_n = 2.0 * amp - 4.0 * amp ** 2
    var_jz = 4.0 * gc2 / (1.0 + 4.0 * gc2) ** 2
    jz_n = -n * amp
    return ObservableSet(
        q=0.0, p=0.0, jx=0.0, jy=0.0,
        jz=jz,
        n_photons=n_phot,
        lam=n_phot + jz + 0.5 * n,
        var_q=0.5 + 2.0 * amp,
        var_p=0.5 + 2.0 * amp,
        var_jx=0.25 * n * (1.0 + (n - 1.0) * kappa),
        var_jy=0.25 * n * (1.0 + (n - 1.0) * kappa),
        var_jz=var_jz,
        var_n_photons=var_n,
        var_lam=var_n + var_jz + 2.0 * (jz_n - n_phot * jz),
        jz_n_photons=jz_n,
        jx_q=-math.sqrt(n ** 3 / 2.0) * params.gamma_c * kappa,
    )


def sas_observables(params: ModelParams, parity: str) -> ObservableSet:
    """Projected-state expectation values in closed form (oracle-faithful).

    lam is the operator identity <a'a> + <Jz> + N/2; var_n_photons and
    jz_n_photons use the corrected closed forms (see module docstring).
    Odd-branch 0/0 indeterminacies at x = 1 are replaced by their limits.
    """
    sgn = _sgn(parity)
    xa = _require_superradiant(params)
    if parity == "odd" and xa - 1.0 <= ODD_LIMIT_WINDOW:
        return _sas_odd_limits(params)
    n = params.n_atoms
    gc = params.gamma_c
    omx4 = one_minus_x4(xa)
    mu = n * gc ** 2 * xa ** 2 * omx4
    log_f = f_function(params).log_f
    f = math.exp(log_f)
    denom = 1.0 + sgn * f
    x4f = math.exp(4.0 * math.log(xa) + log_f)  # x^4 F without overflow
    ratio = omx4 / denom if parity == "even" else k_ratio(params)
    n_phot = mu * (1.0 - sgn * f) / denom
    jz = -0.5 * n * (xa ** -2 + sgn * xa ** 2 * f) / denom
    var_n = mu * ((1.0 - sgn * f) * denom + sgn * 4.0 * mu * f) / denom ** 2
    var_jz = (0.25 * n * ratio / denom
              * (1.0 + sgn * (n - 1.0) * (x4f - f) - xa ** 4 * f * f))
    jz_n = -0.5 * n * mu * (xa ** -2 - sgn * xa ** 2 * f) / denom
    return ObservableSet(
        q=0.0, p=0.0, jx=0.0, jy=0.0,
        jz=jz,
        n_photons=n_phot,
        lam=n_phot + jz + 0.5 * n,
        var_q=0.5 + 2.0 * n * gc ** 2 * xa ** 2 * ratio,
        var_p=0.5 - sgn * 2.0 * n * gc ** 2 * xa ** 2 * ratio * f,
        var_jx=0.25 * n * (1.0 + (n - 1.0) * ratio),
        var_jy=0.25 * n * (1.0 + sgn * (n - 1.0) * (f - x4f) / denom),
        var_jz=var_jz,
        var_n_photons=var_n,
        var_lam=var_n + var_jz + 2.0 * (jz_n - n_phot * jz),
        jz_n_photons=jz_n,
        jx_q=-math.sqrt(n ** 3 / 2.0) * gc * xa * omx4 / denom,
    )


# -- literal closed-form table rows (for the verification harness) -------------

def table_closed_forms_sas(params: ModelParams, parity: str) -> dict[str, float]:
    """The symmetry-adapted column exactly as tabulated (x > 1)."""
    sgn = _sgn(parity)
    xa = _require_superradiant(params, strict=True)
    n = params.n_atoms
    gc2 = params.gamma_c ** 2
    omx4 = one_minus_x4(xa)
    log_f = f_function(params).log_f
    f = math.exp(log_f)
    denom = 1.0 + sgn * f
    swap = (1.0 - sgn * f) / denom
    x4 = xa ** 4
    lam_brace = (xa ** 2 + 2.0 * gc2 * xa ** 2 * (1.0 + xa ** 2)
                 - sgn * (x4 + 2.0 * gc2 * xa ** 2 * (1.0 + xa ** 2)) * f)
    return {
        "q": 0.0,
        "p": 0.0,
        "jx": 0.0,
        "jy": 0.0,
        "jz": -0.5 * n * xa ** 2 * (1.0 - omx4 / denom),
        "n_photons": n * gc2 * xa ** 2 * omx4 * swap,
        "lam": 0.5 * n * ((1.0 - xa ** -2) / denom) * lam_brace,
        "var_q": 0.5 + 2.0 * n * gc2 * xa ** 2 * omx4 / denom,
        "var_p": 0.5 - sgn * 2.0 * n * gc2 * xa ** 2 * (omx4 / denom) * f,
        "var_jx": 0.25 * n * (1.0 + (n - 1.0) * omx4 / denom),
        "var_jy": 0.25 * n * (1.0 + sgn * (n - 1.0) * (1.0 - x4) * f / denom),
        "var_jz": (0.25 * n * omx4 / denom ** 2
                   * (1.0 - sgn * (n - 1.0) * (1.0 - x4) * f - x4 * f * f)),
        "var_n_photons": n * gc2 * xa ** 2 * (
            n * gc2 * xa ** -6 * (1.0 - x4) * swap ** 2
            + omx4 * (n * gc2 * xa ** 2 * omx4 + swap)),
        "jz_n_photons": -n * gc2 * x4 * omx4 * (xa ** -4 - sgn * f) / denom,
        "jx_q": -math.sqrt(n ** 3 / 2.0) * params.gamma_c * xa * omx4 / denom,
    }


def table_closed_forms_coherent(params: ModelParams) -> dict[str, float]:
    """The coherent column exactly as tabulated (x >= 1)."""
    xa = _require_superradiant(params)
    n = params.n_atoms
    gc = params.gamma_c
    omx4 = one_minus_x4(xa)
    mu = n * gc ** 2 * xa ** 2 * omx4
    return {
        "q": -math.sqrt(2.0 * n) * gc * xa * math.sqrt(omx4),
        "p": 0.0,
        "jx": 0.5 * n * math.sqrt(omx4),
        "jy": 0.0,
        "jz": -0.5 * n * xa ** -2,
        "n_photons": mu,
        "lam": 0.5 * n * (1.0 - xa ** -2 + 2.0 * gc ** 2 * xa ** 2 * omx4),
        "var_q": 0.5,
        "var_p": 0.5,
        "var_jx": 0.25 * n * xa ** -4,
        "var_jy": 0.25 * n,
        "var_jz": 0.25 * n * omx4,
        "var_n_photons": mu,
        "jz_n_photons": -n * gc ** 2 * omx4,
        "jx_q": -math.sqrt(n ** 3 / 2.0) * gc * xa * omx4,
    }


# -- numerically constructed projected state -----------------------------------

@dataclass(frozen=True)
class SASStateVector:
    """Projected coherent state on the rectangular (nu, n_e) grid.

    ``coeffs`` is unit-norm after truncation at nu <= nu_max;
    ``norm_defect`` records the probability mass dropped by the cutoff.
    Signs follow the phi_c = 0 critical branch, c(nu, n_e) ~ (-1)**nu.
    """

    params: ModelParams
    parity: str
    nu_max: int
    coeffs: np.ndarray
    norm_defect: float


def _log_weights(params: ModelParams, nu_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Half-log of the joint probability pieces, without parity/normalization."""
    xa = abs(params.x)
    n = params.n_atoms
    nu = np.arange(nu_max + 1)[:, None]
    ne = np.arange(n + 1)[None, :]
    log_alpha = math.log(math.sqrt(n) * params.gamma_c * xa)
    log_one_minus = math.log(-math.expm1(-2.0 * math.log(xa)))  # callers ensure xa > 1
    log_one_plus = math.log1p(xa ** -2)
    log_binom = gammaln(n + 1) - gammaln(ne + 1) - gammaln(n - ne + 1)
    half = (nu * log_alpha - 0.5 * gammaln(nu + 1.0) + 0.5 * log_binom
            + 0.5 * (nu + ne) * log_one_minus + 0.5 * (n + nu - ne) * log_one_plus)
    return half, (nu + ne)


def build_sas_state(params: ModelParams, parity: str, nu_max: int | None = None) -> SASStateVector:
    """Assemble the projected state from its closed-form expansion.

    Coefficients are built in the log domain, parity-masked, truncated at
    nu_max (default covers the Poisson bulk to 20 sigma) and renormalized;
    a truncation norm defect above 1e-8 raises TruncationError.
    """
    sgn = _sgn(parity)
    xa = _require_superradiant(params)
    n = params.n_atoms
    if xa == 1.0:
        if parity == "odd":
            raise ProjectionAnnihilationError(
                "odd projection annihilates the coherent state at x = 1")
        grid = np.zeros((1, n + 1))
        grid[0, 0] = 1.0
        return SASStateVector(params, parity, 0, grid, 0.0)
    if nu_max is None:
        nu_max = default_nu_max(params)
    half, lam = _log_weights(params, nu_max)
    mu = photon_number_coherent(params)
    log_f = f_function(params).log_f
    log_norm = (math.log(2.0) - 0.5 * (n + 1) * math.log(2.0) - 0.5 * mu
                - 0.5 * (math.log1p(sgn * math.exp(log_f))
                         if parity == "even" else math.log(-math.expm1(log_f))))
    allowed = (lam % 2 == 0) if parity == "even" else (lam % 2 == 1)
    coeffs = np.where(allowed, np.exp(half + log_norm), 0.0)
    coeffs *= (-1.0) ** np.arange(nu_max + 1)[:, None]
    norm_sq = float(np.sum(coeffs * coeffs))
    defect = 1.0 - norm_sq
    if defect > 1e-8:
        raise TruncationError(
            f"truncation at nu_max={nu_max} loses {defect:.3e} probability; increase nu_max")
    coeffs = coeffs / math.sqrt(norm_sq)
    return SASStateVector(params, parity, nu_max, coeffs, defect)


def state_observables(state: SASStateVector) -> ObservableSet:
    """Observables of the constructed state by direct operator application."""
    n = state.params.n_atoms
    pad = np.zeros((state.coeffs.shape[0] + 2, n + 1))
    pad[: state.coeffs.shape[0]] = state.coeffs
    return grid_observables(pad, n)


def sas_coefficients_at(params: ModelParams, nu: np.ndarray, ne: np.ndarray) -> np.ndarray:
    """Normalized projected-state coefficients on given (nu, n_e) index pairs.

    The pairs are assumed to all share one parity and to cover the state's
    support (a converged sector basis does); the result is renormalized on
    that support.  Requires |x| > 1.
    """
    _require_superradiant(params, strict=True)
    xa = abs(params.x)
    n = params.n_atoms
    nu = np.asarray(nu, dtype=float)
    ne = np.asarray(ne, dtype=float)
    log_alpha = math.log(math.sqrt(n) * params.gamma_c * xa)
    log_one_minus = math.log(-math.expm1(-2.0 * math.log(xa)))
    log_one_plus = math.log1p(xa ** -2)
    log_binom = gammaln(n + 1) - gammaln(ne + 1) - gammaln(n - ne + 1)
    half = (nu * log_alpha - 0.5 * gammaln(nu + 1.0) + 0.5 * log_binom
            + 0.5 * (nu + ne) * log_one_minus + 0.5 * (n + nu - ne) * log_one_plus)
    half -= half.max()  # normalization removes the shift
    coeffs = (-1.0) ** nu * np.exp(half)
    return coeffs / np.linalg.norm(coeffs)


# -- joint and marginal distributions ------------------------------------------

@dataclass(frozen=True)
class JointDistribution:
    """P(nu, n_e) of a parity-projected state; parity holes are exact zeros."""

    params: ModelParams
    parity: str
    nu_max: int
    matrix: np.ndarray


def joint_distribution_sas(params: ModelParams, parity: str,
                           nu_max: int | None = None) -> JointDistribution:
    """Closed-form joint distribution, using x^N sqrt(F) = exp(-mu)."""
    sgn = _sgn(parity)
    xa = _require_superradiant(params)
    n = params.n_atoms
    if xa == 1.0:
        if parity == "odd":
            raise ProjectionAnnihilationError(
                "odd projection annihilates the coherent state at x = 1")
        m = np.zeros((1, n + 1))
        m[0, 0] = 1.0
        return JointDistribution(params, parity, 0, m)
    if nu_max is None:
        nu_max = default_nu_max(params)
    half, lam = _log_weights(params, nu_max)
    mu = photon_number_coherent(params)
    log_f = f_function(params).log_f
    log_denom = (math.log1p(sgn * math.exp(log_f)) if parity == "even"
                 else math.log(-math.expm1(log_f)))
    allowed = (lam % 2 == 0) if parity == "even" else (lam % 2 == 1)
    log_p = 2.0 * half + (1.0 - n) * math.log(2.0) - mu - log_denom
    matrix = np.where(allowed, np.exp(log_p), 0.0)
    return JointDistribution(params, parity, nu_max, matrix)


def marginal_photon(params: ModelParams, parity: str,
                    nu_max: int | None = None) -> np.ndarray:
    """Photon-number distribution: Poisson(mu) times the parity correction
    (1 +- (-1)^nu x^-2N) / (1 +- exp(-2 mu) x^-2N)."""
    sgn = _sgn(parity)
    xa = _require_superradiant(params, strict=(parity == "odd"))
    n = params.n_atoms
    if nu_max is None:
        nu_max = default_nu_max(params)
    nu = np.arange(nu_max + 1)
    mu = photon_number_coherent(params)
    if mu == 0.0:
        base = np.zeros(nu_max + 1)
        base[0] = 1.0
    else:
        base = np.exp(nu * math.log(mu) - gammaln(nu + 1.0) - mu)
    t2n = math.exp(-2.0 * n * math.log(xa))
    correction = 1.0 + sgn * (-1.0) ** nu * t2n
    denom = 1.0 + sgn * math.exp(-2.0 * mu) * t2n
    return base * correction / denom


def marginal_excited(params: ModelParams, parity: str) -> np.ndarray:
    """Excited-atom distribution: binomial(N, (1-x^-2)/2) times the parity
    correction (1 +- (-1)^n_e exp(-2 mu)) / (1 +- F)."""
    sgn = _sgn(parity)
    xa = _require_superradiant(params, strict=(parity == "odd"))
    n = params.n_atoms
    ne = np.arange(n + 1)
    log_binom = gammaln(n + 1) - gammaln(ne + 1) - gammaln(n - ne + 1)
    if xa == 1.0:
        base = np.zeros(n + 1)
        base[0] = 1.0
    else:
        log_a = math.log(-math.expm1(-2.0 * math.log(xa))) - math.log(2.0)
        log_b = math.log1p(xa ** -2) - math.log(2.0)
        base = np.exp(log_binom + ne * log_a + (n - ne) * log_b)
    mu = photon_number_coherent(params)
    log_f = f_function(params).log_f
    correction = 1.0 + sgn * (-1.0) ** ne * math.exp(-2.0 * mu)
    denom = 1.0 + sgn * math.exp(log_f)
    return base * correction / denom


# -- Gaussian limits -------------------------------------------------------------

@dataclass(frozen=True)
class GaussianLimits:
    """Large-N normal approximations of the photon and atom marginals."""

    photon_mean: float
    photon_var: float
    atom_mean: float
    atom_var: float


def gaussian_limits(params: ModelParams) -> GaussianLimits:
    xa = _require_superradiant(params, strict=True)
    n = params.n_atoms
    mu = photon_number_coherent(params)
    return GaussianLimits(
        photon_mean=mu,
        photon_var=mu,
        atom_mean=0.5 * n * (1.0 - xa ** -2),
        atom_var=0.25 * n * one_minus_x4(xa),
    )


def gaussian_sup_distance(pmf: np.ndarray, mean: float, var: float) -> float:
    """Sup-norm distance between a lattice pmf and the Gaussian density."""
    k = np.arange(pmf.size)
    density = np.exp(-((k - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
    return float(np.max(np.abs(pmf - density)))
