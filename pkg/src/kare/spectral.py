"""Eigenvalue view of the normalized Gram matrix.

Ridge sweeps evaluate resolvent traces of (1/n) G at many ridges; one
symmetric eigendecomposition turns each evaluation into an O(n) sum.
The Stieltjes transform here is always evaluated on the negative real
axis, i.e. m(-ridge) for ridge > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-8
EIGENVALUE_FLOOR = -1e-8


@dataclass(frozen=True)
class GramSpectrum:
    """Eigenvalues of (1/n) G, ascending and clamped to be nonnegative."""

    eigenvalues: np.ndarray
    n: int


def _check_ridge(ridge: float) -> float:
    ridge = float(ridge)
    if not ridge > 0:
        raise ValueError(f"ridge must be positive, got {ridge}")
    return ridge


def decompose(G, n: int | None = None) -> GramSpectrum:
    """Eigendecompose G/n into a GramSpectrum.

    Eigenvalues in [-1e-8, 0) are floating noise on a PSD matrix and are
    clamped to zero; anything below -1e-8 signals a broken kernel and
    raises.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {G.shape}")
    if n is None:
        n = G.shape[0]
    elif n != G.shape[0]:
        raise ValueError(f"sample count {n} does not match matrix size {G.shape[0]}")
    asymmetry = float(np.max(np.abs(G - G.T)))
    if asymmetry > SYMMETRY_TOL:
        raise ValueError(f"matrix is not symmetric (max asymmetry {asymmetry:.3e})")
    eigenvalues = np.linalg.eigvalsh(G / n)
    if eigenvalues[0] < EIGENVALUE_FLOOR:
        raise ValueError(
            f"matrix is not positive semidefinite (min eigenvalue {eigenvalues[0]:.3e})"
        )
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    eigenvalues.flags.writeable = False
    return GramSpectrum(eigenvalues, n)


def stieltjes(s: GramSpectrum, ridge: float) -> float:
    """m(-ridge) = (1/n) sum_i 1 / (mu_i + ridge); lies in (0, 1/ridge]."""
    ridge = _check_ridge(ridge)
    return float(np.mean(1.0 / (s.eigenvalues + ridge)))


def stieltjes_derivative(s: GramSpectrum, ridge: float) -> float:
    """d/dz m(z) at z = -ridge, i.e. (1/n) sum_i 1 / (mu_i + ridge)^2."""
    ridge = _check_ridge(ridge)
    return float(np.mean(1.0 / (s.eigenvalues + ridge) ** 2))
