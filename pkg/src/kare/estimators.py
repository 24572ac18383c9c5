"""Risk estimators for kernel ridge regression.

Data-driven scores (computable from the training set alone):

    kare      (1/n) y^T B^{-2} y / ((1/n) Tr B^{-1})^2,   B = (1/n)G + ridge I
    varrho    y^T B^{-2} y / Tr B^{-2}

both invariant under the simultaneous rescaling (G, ridge) -> (a G, a ridge),
plus the three usual comparators: k-fold cross-validation, Gaussian-process
log marginal likelihood and classical kernel alignment.

Closed-form counterparts under a known population spectrum: the expected
risk theta'(ridge) * (sum_k b_k^2 theta^2/(theta+d_k)^2 + noise^2), the
expected train error (ridge^2/theta^2) times that, per-mode predictor
means and variances, and the average risk over a random target with a
given covariance spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import krr
from .kernels import KernelSpec, _as_points
from .spectral import EIGENVALUE_FLOOR, SYMMETRY_TOL, GramSpectrum
from .sct import SctResult, Spectrum, solve_sct


@dataclass(frozen=True)
class TrueFunction:
    """Target coefficients along the expanded spectrum modes, plus noise level."""

    coeffs: np.ndarray
    noise: float = 0.0

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float).ravel()
        object.__setattr__(self, "coeffs", coeffs)
        if not self.noise >= 0:
            raise ValueError(f"noise level must be >= 0, got {self.noise}")


class RidgeScores:
    """Every label-dependent ridge score from one eigendecomposition of (1/n)G.

    Grid sweeps evaluate many ridges per dataset; after rotating the
    labels into the eigenbasis each score is an O(n) sum over
    (mu_i + ridge), so the n^3 work is paid once.
    """

    def __init__(self, G, y):
        G = np.asarray(G, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        n = y.shape[0]
        if G.shape != (n, n):
            raise ValueError(f"Gram shape {G.shape} does not match {n} labels")
        if float(np.max(np.abs(G - G.T))) > SYMMETRY_TOL:
            raise ValueError("Gram matrix is not symmetric")
        mu, vectors = np.linalg.eigh(G / n)
        if mu[0] < EIGENVALUE_FLOOR:
            raise ValueError(
                f"Gram matrix is not positive semidefinite (min eigenvalue {mu[0]:.3e})"
            )
        self.n = n
        self.mu = np.clip(mu, 0.0, None)
        self.vectors = vectors
        self.w = vectors.T @ y
        self._w2 = self.w**2

    @staticmethod
    def _check_ridge(ridge: float) -> float:
        ridge = float(ridge)
        if not ridge > 0:
            raise ValueError(f"ridge must be positive, got {ridge}")
        return ridge

    def gram_spectrum(self) -> GramSpectrum:
        eigenvalues = self.mu.copy()
        eigenvalues.flags.writeable = False
        return GramSpectrum(eigenvalues, self.n)

    def stieltjes(self, ridge: float) -> float:
        ridge = self._check_ridge(ridge)
        return float(np.mean(1.0 / (self.mu + ridge)))

    def stieltjes_derivative(self, ridge: float) -> float:
        ridge = self._check_ridge(ridge)
        return float(np.mean(1.0 / (self.mu + ridge) ** 2))

    def solve(self, ridge: float) -> np.ndarray:
        """((1/n)G + ridge I)^{-1} y."""
        ridge = self._check_ridge(ridge)
        return self.vectors @ (self.w / (self.mu + ridge))

    def kare(self, ridge: float) -> float:
        ridge = self._check_ridge(ridge)
        numerator = float(np.mean(self._w2 / (self.mu + ridge) ** 2))
        return numerator / self.stieltjes(ridge) ** 2

    def varrho(self, ridge: float) -> float:
        ridge = self._check_ridge(ridge)
        q = (self.mu + ridge) ** 2
        return float(np.sum(self._w2 / q) / np.sum(1.0 / q))

    def train_error(self, ridge: float) -> float:
        ridge = self._check_ridge(ridge)
        return ridge**2 * float(np.mean(self._w2 / (self.mu + ridge) ** 2))

    def log_marginal_likelihood(self, ridge: float) -> float:
        """Per-sample Gaussian evidence with covariance (1/n)G + ridge I.

        -(1/n) [ 1/2 y^T B^{-1} y + 1/2 log det B ]; the n log(2 pi)/2
        constant is dropped.  Higher is better.
        """
        ridge = self._check_ridge(ridge)
        quad = float(np.sum(self._w2 / (self.mu + ridge)))
        logdet = float(np.sum(np.log(self.mu + ridge)))
        return -0.5 * (quad + logdet) / self.n


def kare(y, G, ridge: float) -> float:
    """Alignment risk score; approximates the test risk from training data."""
    return RidgeScores(G, y).kare(ridge)


def varrho(y, G, ridge: float) -> float:
    """Companion score approximating the risk of the *expected* predictor."""
    return RidgeScores(G, y).varrho(ridge)


def log_marginal_likelihood(y, G, ridge: float) -> float:
    return RidgeScores(G, y).log_marginal_likelihood(ridge)


def classical_alignment(y, G) -> float:
    """y^T G y / (||G||_F ||y||^2), in [-1, 1]."""
    y = np.asarray(y, dtype=float).ravel()
    G = np.asarray(G, dtype=float)
    gnorm = float(np.linalg.norm(G))
    ynorm2 = float(y @ y)
    if ynorm2 == 0.0:
        raise ValueError("labels are identically zero")
    if gnorm == 0.0:
        raise ValueError("Gram matrix is identically zero")
    return float(y @ G @ y) / (gnorm * ynorm2)


def _sct_and_bias(
    spec: Spectrum, f: TrueFunction, n: int, ridge: float
) -> tuple[SctResult, float]:
    d = spec.expand()
    if f.coeffs.shape[0] != d.shape[0]:
        raise ValueError(
            f"{f.coeffs.shape[0]} coefficients but {d.shape[0]} expanded modes"
        )
    res = solve_sct(spec, n, ridge)
    if d.size:
        bias = float(np.sum(f.coeffs**2 * (res.theta / (res.theta + d)) ** 2))
    else:
        bias = 0.0
    return res, bias


def theoretical_risk(spec: Spectrum, f: TrueFunction, n: int, ridge: float) -> float:
    """theta' * (sum_k b_k^2 theta^2/(theta+d_k)^2 + noise^2)."""
    res, bias = _sct_and_bias(spec, f, n, ridge)
    return res.theta_prime * (bias + f.noise**2)


def theoretical_train_error(
    spec: Spectrum, f: TrueFunction, n: int, ridge: float
) -> float:
    """(ridge/theta)^2 times the theoretical risk."""
    res, bias = _sct_and_bias(spec, f, n, ridge)
    return (ridge / res.theta) ** 2 * res.theta_prime * (bias + f.noise**2)


def mean_predictor_coeffs(
    spec: Spectrum, f: TrueFunction, n: int, ridge: float
) -> np.ndarray:
    """Expected predictor coefficient per mode: b_k * d_k / (theta + d_k)."""
    d = spec.expand()
    if f.coeffs.shape[0] != d.shape[0]:
        raise ValueError(
            f"{f.coeffs.shape[0]} coefficients but {d.shape[0]} expanded modes"
        )
    theta = solve_sct(spec, n, ridge).theta
    return f.coeffs * d / (theta + d)


def predictor_variance_component(
    spec: Spectrum, f: TrueFunction, n: int, ridge: float, k: int
) -> float:
    """Predicted variance of the predictor coefficient along expanded mode k."""
    d = spec.expand()
    if not 0 <= k < d.shape[0]:
        raise ValueError(f"mode index {k} out of range for {d.shape[0]} modes")
    res, bias = _sct_and_bias(spec, f, n, ridge)
    theta = res.theta
    own = f.coeffs[k] ** 2 * (theta / (theta + d[k])) ** 2
    return (
        res.theta_prime
        / n
        * (bias + f.noise**2 + own)
        * (d[k] / (theta + d[k])) ** 2
    )


def bayesian_risk(
    spec_k: Spectrum, spec_sigma: Spectrum, noise: float, n: int, ridge: float
) -> float:
    """Average risk over a random target with covariance spectrum spec_sigma.

    n*theta + n*theta'*(noise^2/n - ridge) + theta'*theta^2 *
    sum_k mult_k (s_k - d_k)/(d_k + theta)^2, where theta is the SCT of
    the regression spectrum spec_k.  Identical to averaging the
    closed-form risk over targets with per-mode variance s_k.  With
    spec_sigma = spec_k and ridge = noise^2/n this collapses to
    n*theta(noise^2/n), the optimal configuration.
    """
    if not noise >= 0:
        raise ValueError(f"noise level must be >= 0, got {noise}")
    if len(spec_k.entries) != len(spec_sigma.entries) or any(
        mk != ms
        for (_, mk), (_, ms) in zip(spec_k.entries, spec_sigma.entries)
    ):
        raise ValueError("spectra are not aligned entry by entry")
    res = solve_sct(spec_k, n, ridge)
    d, m = spec_k.arrays()
    s = np.array([sv for sv, _ in spec_sigma.entries])
    if d.size:
        dtau = (
            res.theta_prime
            * res.theta**2
            * float(np.sum(m * (s - d) / (d + res.theta) ** 2))
        )
    else:
        dtau = 0.0
    return n * res.theta + n * res.theta_prime * (noise**2 / n - ridge) + dtau


def cross_validation_risk(
    kernel: KernelSpec, X, y, ridge: float, folds: int, seed: int = 0
) -> float:
    """Mean held-out MSE over k folds.

    Fold assignment is reproducible: a seeded shuffle of the indices,
    then equal contiguous blocks with the remainder handed out one per
    fold from the front.
    """
    X = _as_points(X)
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    if not 2 <= folds <= n:
        raise ValueError(f"folds must be between 2 and {n}, got {folds}")
    order = np.random.default_rng(seed).permutation(n)
    base, rem = divmod(n, folds)
    errors = []
    start = 0
    for i in range(folds):
        size = base + (1 if i < rem else 0)
        held = order[start:start + size]
        start += size
        rest = np.setdiff1d(order, held)
        p = krr.fit(kernel, X[rest], y[rest], ridge)
        errors.append(krr.test_risk(p, X[held], y[held]))
    return float(np.mean(errors))
