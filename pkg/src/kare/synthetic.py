"""Gaussian observation model in the kernel eigenbasis, plus Monte Carlo oracles.

A draw materializes the model directly in coefficient space: the n x M
observation matrix O has iid standard normal entries (one column per
expanded spectrum mode), the Gram matrix is O diag(d) O^T, and labels are
O b + noise * e.  Risks are then exact sums over modes, no test sampling.

Reproducibility rule: trial t of a Monte Carlo run draws from
numpy's default_rng seeded with (seed, t), so results are independent of
execution order and thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .estimators import TrueFunction
from .kernels import KernelSpec, gram_matrix
from .spectral import GramSpectrum, decompose, stieltjes
from .sct import Spectrum, solve_sct

# Expanded mode cap; multiplicities beyond this make direct sampling
# intractable (use the classical input-space route instead).
MAX_MODES = 5000


@dataclass(frozen=True)
class ObservationDraw:
    O: np.ndarray
    G: np.ndarray
    y: np.ndarray
    seed: object


def _expanded(spec: Spectrum, f: TrueFunction | None) -> np.ndarray:
    d = spec.expand()
    if d.shape[0] < 1:
        raise ValueError("cannot sample from an empty spectrum")
    if d.shape[0] > MAX_MODES:
        raise ValueError(
            f"expanded spectrum has {d.shape[0]} modes, above the {MAX_MODES} cap"
        )
    if f is not None and f.coeffs.shape[0] != d.shape[0]:
        raise ValueError(
            f"{f.coeffs.shape[0]} coefficients but {d.shape[0]} expanded modes"
        )
    return d


def draw(spec: Spectrum, f: TrueFunction, n: int, seed) -> ObservationDraw:
    """One draw of (O, G, y); deterministic given the seed."""
    d = _expanded(spec, f)
    rng = np.random.default_rng(seed)
    O = rng.standard_normal((n, d.shape[0]))
    e = rng.standard_normal(n)
    G = (O * d) @ O.T
    G = 0.5 * (G + G.T)
    y = O @ f.coeffs + f.noise * e
    return ObservationDraw(O, G, y, seed)


def _ridge_solve(dr: ObservationDraw, ridge: float) -> np.ndarray:
    ridge = float(ridge)
    if not ridge > 0:
        raise ValueError(f"ridge must be positive, got {ridge}")
    n = dr.y.shape[0]
    B = dr.G / n
    B[np.diag_indices_from(B)] += ridge
    return cho_solve(cho_factor(B, lower=True), dr.y)


def predictor_coeffs(dr: ObservationDraw, spec: Spectrum, ridge: float) -> np.ndarray:
    """Fitted predictor coefficients per mode: (d_k/n) O_k^T B^{-1} y."""
    d = _expanded(spec, None)
    v = _ridge_solve(dr, ridge)
    return d * (dr.O.T @ v) / dr.y.shape[0]


def exact_risk(dr: ObservationDraw, spec: Spectrum, f: TrueFunction, ridge: float) -> float:
    """sum_k (a_k - b_k)^2 + noise^2, computed exactly in the eigenbasis."""
    d = _expanded(spec, f)
    a = predictor_coeffs(dr, spec, ridge)
    r = a - f.coeffs
    return float(r @ r) + f.noise**2


def empirical_train_error(dr: ObservationDraw, ridge: float) -> float:
    """ridge^2/n * y^T ((1/n)G + ridge I)^{-2} y for this draw."""
    v = _ridge_solve(dr, ridge)
    return ridge**2 * float(v @ v) / dr.y.shape[0]


def mc_expected_risk(
    spec: Spectrum, f: TrueFunction, n: int, ridge: float, trials: int, seed: int
) -> tuple[float, float]:
    """Sample mean and standard error of exact_risk over independent draws."""
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    risks = np.array(
        [exact_risk(draw(spec, f, n, (seed, t)), spec, f, ridge) for t in range(trials)]
    )
    return float(risks.mean()), float(risks.std(ddof=1) / np.sqrt(trials))


def _variance_stderr(samples: np.ndarray) -> float:
    # Asymptotic standard error of the sample variance via the fourth
    # central moment; no normality assumed.
    n = samples.shape[0]
    centered = samples - samples.mean()
    s2 = float(centered @ centered) / (n - 1)
    m4 = float(np.mean(centered**4))
    return float(np.sqrt(max(m4 - s2**2, 0.0) / n))


@dataclass(frozen=True)
class OperatorMoments:
    """Monte Carlo moments of the reconstruction operator entries A_kl."""

    indices: tuple[int, ...]
    diag_mean: np.ndarray
    diag_mean_stderr: np.ndarray
    diag_var: np.ndarray
    diag_var_stderr: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    offdiag_mean: np.ndarray
    offdiag_stderr: np.ndarray
    stieltjes_gap_mean: float
    trials: int


def mc_operator_moments(
    spec: Spectrum,
    n: int,
    ridge: float,
    trials: int,
    seed: int,
    k_indices: tuple[int, ...],
) -> OperatorMoments:
    """Sample the entries A_kl = (d_k/n) O_k^T ((1/n)G + ridge I)^{-1} O_l.

    Returns per-index means and variances of the diagonal entries, means
    of every ordered off-diagonal pair among k_indices, and the mean gap
    |1/theta - m(-ridge)| between the solved threshold and the Gram
    Stieltjes transform.
    """
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    d = _expanded(spec, None)
    idx = tuple(int(k) for k in k_indices)
    for k in idx:
        if not 0 <= k < d.shape[0]:
            raise ValueError(f"mode index {k} out of range for {d.shape[0]} modes")
    zero_f = TrueFunction(np.zeros(d.shape[0]), 0.0)
    theta = solve_sct(spec, n, ridge).theta
    cols = np.array(idx)
    sub = np.empty((trials, len(idx), len(idx)))
    gaps = np.empty(trials)
    for t in range(trials):
        dr = draw(spec, zero_f, n, (seed, t))
        B = dr.G / n
        B[np.diag_indices_from(B)] += ridge
        factor = cho_factor(B, lower=True)
        V = cho_solve(factor, dr.O[:, cols])
        sub[t] = (d[cols][:, None] / n) * (dr.O[:, cols].T @ V)
        mu = np.clip(np.linalg.eigvalsh(dr.G / n), 0.0, None)
        gaps[t] = abs(1.0 / theta - float(np.mean(1.0 / (mu + ridge))))
    diag = np.einsum("tkk->tk", sub)
    pairs = tuple((a, b) for a in idx for b in idx if a != b)
    off = np.stack(
        [sub[:, idx.index(a), idx.index(b)] for a, b in pairs], axis=1
    ) if pairs else np.empty((trials, 0))
    return OperatorMoments(
        indices=idx,
        diag_mean=diag.mean(axis=0),
        diag_mean_stderr=diag.std(axis=0, ddof=1) / np.sqrt(trials),
        diag_var=diag.var(axis=0, ddof=1),
        diag_var_stderr=np.array([_variance_stderr(diag[:, j]) for j in range(len(idx))]),
        pairs=pairs,
        offdiag_mean=off.mean(axis=0) if pairs else np.empty(0),
        offdiag_stderr=(off.std(axis=0, ddof=1) / np.sqrt(trials)) if pairs else np.empty(0),
        stieltjes_gap_mean=float(gaps.mean()),
        trials=trials,
    )


@dataclass(frozen=True)
class CoeffStats:
    """Monte Carlo moments of the fitted predictor coefficients."""

    indices: tuple[int, ...]
    mean: np.ndarray
    mean_stderr: np.ndarray
    var: np.ndarray
    var_stderr: np.ndarray
    trials: int


def mc_coeff_stats(
    spec: Spectrum,
    f: TrueFunction,
    n: int,
    ridge: float,
    trials: int,
    seed: int,
    k_indices: tuple[int, ...],
) -> CoeffStats:
    """Sample the predictor coefficients a_k over independent draws."""
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    d = _expanded(spec, f)
    idx = tuple(int(k) for k in k_indices)
    for k in idx:
        if not 0 <= k < d.shape[0]:
            raise ValueError(f"mode index {k} out of range for {d.shape[0]} modes")
    cols = np.array(idx)
    samples = np.empty((trials, len(idx)))
    for t in range(trials):
        dr = draw(spec, f, n, (seed, t))
        v = _ridge_solve(dr, ridge)
        samples[t] = d[cols] * (dr.O[:, cols].T @ v) / n
    return CoeffStats(
        indices=idx,
        mean=samples.mean(axis=0),
        mean_stderr=samples.std(axis=0, ddof=1) / np.sqrt(trials),
        var=samples.var(axis=0, ddof=1),
        var_stderr=np.array([_variance_stderr(samples[:, j]) for j in range(len(idx))]),
        trials=trials,
    )


def rbf_gaussian_gram_spectrum(
    dim: int, lengthscale: float, sigma: float, n: int, seed
) -> GramSpectrum:
    """Gram eigenvalues for the rbf kernel on n iid N(0, sigma^2 I) inputs.

    The input-space route to a Gram sample: the matching population
    spectrum (rbf_gaussian_spectrum) has shell multiplicities far beyond
    MAX_MODES already at moderate dimension, so eigenbasis sampling is
    not an option there.
    """
    rng = np.random.default_rng(seed)
    X = sigma * rng.standard_normal((n, dim))
    return decompose(gram_matrix(KernelSpec("rbf", lengthscale), X))


def mc_stieltjes_gap(
    spec: Spectrum, n: int, ridge: float, trials: int, seed: int
) -> tuple[float, float]:
    """Mean and standard error of |1/theta - m(-ridge)| over draws."""
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    d = _expanded(spec, None)
    zero_f = TrueFunction(np.zeros(d.shape[0]), 0.0)
    theta = solve_sct(spec, n, ridge).theta
    gaps = np.empty(trials)
    for t in range(trials):
        dr = draw(spec, zero_f, n, (seed, t))
        gaps[t] = abs(1.0 / theta - stieltjes(decompose(dr.G), ridge))
    return float(gaps.mean()), float(gaps.std(ddof=1) / np.sqrt(trials))
