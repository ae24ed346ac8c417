"""Dense complex operator algebra.

Commutators, Schatten norms, PSD matrix square roots, matrix exponentials
and the column-stacking vectorization used for superoperator propagation.
All functions are pure and operate on square complex numpy arrays; validation
helpers enforce the structural roles (Hermitian observable, density matrix)
with absolute tolerances on the largest entry deviation.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

HERMITIAN_ATOL = 1e-12
DENSITY_ATOL = 1e-12
PSD_EIG_ATOL = 1e-10

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class OperatorError(ValueError):
    """A matrix violates a structural precondition (shape, Hermiticity, ...)."""


def as_square_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise OperatorError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise OperatorError("matrix has non-finite entries")
    return m


def hermiticity_defect(a) -> float:
    """Largest entrywise deviation of a from its conjugate transpose."""
    m = as_square_matrix(a)
    return float(np.max(np.abs(m - m.conj().T)))


def assert_hermitian(a, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    m = as_square_matrix(a)
    defect = hermiticity_defect(m)
    if defect > atol:
        raise OperatorError(
            f"matrix is not Hermitian (defect {defect:.3e} exceeds {atol:.3e})"
        )
    return m


def assert_density(a, atol: float = DENSITY_ATOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, eigenvalues >= -atol."""
    m = assert_hermitian(a, atol=atol)
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > atol:
        raise OperatorError(f"trace {tr:.12g} is not 1 within {atol:.3e}")
    lo = float(np.linalg.eigvalsh(m)[0])
    if lo < -atol:
        raise OperatorError(f"negative eigenvalue {lo:.3e} below -{atol:.3e}")
    return m


def commutator(a, b) -> np.ndarray:
    """ab - ba; anti-Hermitian and traceless when a and b are Hermitian."""
    ma = as_square_matrix(a)
    mb = as_square_matrix(b)
    if ma.shape != mb.shape:
        raise OperatorError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return ma @ mb - mb @ ma


def schatten_norm(a, p) -> float:
    """Schatten-p norm (sum sigma_i^p)^(1/p); p = inf gives the operator norm."""
    m = as_square_matrix(a)
    if not (p == np.inf or (np.isreal(p) and p >= 1)):
        raise ValueError(f"Schatten order must be a real p >= 1 or inf, got {p}")
    sv = np.linalg.svd(m, compute_uv=False)
    if p == np.inf:
        return float(sv[0])
    return float(np.sum(sv ** float(p)) ** (1.0 / float(p)))


def hs_norm(a) -> float:
    """Hilbert-Schmidt norm sqrt(tr(a^dag a)), i.e. the Frobenius norm."""
    return float(np.linalg.norm(np.asarray(a)))


EIG_ZERO_RTOL = 1e-14


def sqrtm_psd(rho, eig_atol: float = PSD_EIG_ATOL) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in [-eig_atol, 0) are clamped to zero; density matrices coming
    out of numerics routinely carry such tiny negatives.  Anything lower is a
    genuine positivity failure.  Eigenvalues below EIG_ZERO_RTOL * max(w) are
    below eigh's resolution and are zeroed as well, so sqrt does not turn
    O(eps) eigenvalue noise of rank-deficient inputs into O(sqrt(eps)) jitter.
    """
    m = assert_hermitian(rho, atol=eig_atol)
    w, v = np.linalg.eigh(m)
    if w[0] < -eig_atol:
        raise OperatorError(f"matrix is not PSD (eigenvalue {w[0]:.3e})")
    w = np.maximum(w, 0.0)
    if w[-1] > 0.0:
        w[w < EIG_ZERO_RTOL * w[-1]] = 0.0
    root = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (root + root.conj().T)


def expm(a) -> np.ndarray:
    """Matrix exponential (scipy's Pade scaling-and-squaring)."""
    return scipy.linalg.expm(as_square_matrix(a))


def vectorize(a) -> np.ndarray:
    """Column-stacking vectorization: entry (i, j) occupies position j*d + i.

    With this convention vec(ABC) = (C^T kron A) vec(B).
    """
    return as_square_matrix(a).reshape(-1, order="F")


def devectorize(v) -> np.ndarray:
    vec = np.asarray(v, dtype=complex).reshape(-1)
    d = math.isqrt(vec.size)
    if d * d != vec.size:
        raise OperatorError(f"vector length {vec.size} is not a perfect square")
    return vec.reshape((d, d), order="F")
