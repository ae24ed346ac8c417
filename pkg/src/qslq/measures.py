"""Quantumness functionals.

- quantumness Q(A, B) = 2 ||[A, B]||_HS^2 of two observables,
- Wigner-Yanase skew information I(rho, A) = (1/2) ||[sqrt(rho), A]||_HS^2,
- skew-information coherence C(rho, basis) = sum_k I(rho, |k><k|),
- the l1 coherence and the non-commutativity witness N_A = ||[A, A_d]||_1
  (max column sum norm, not the Schatten trace norm).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import opalg

BASIS_GRAM_ATOL = 1e-12
INVOLUTORY_ATOL = 1e-8
DIM_INEQUALITY_SLACK = 1e-10


@dataclass(frozen=True)
class Basis:
    """Orthonormal reference basis; columns of `matrix` are the kets |k>."""

    matrix: np.ndarray

    def __post_init__(self):
        m = opalg.as_square_matrix(self.matrix)
        gram = m.conj().T @ m
        defect = np.max(np.abs(gram - np.eye(m.shape[0])))
        if defect > BASIS_GRAM_ATOL:
            raise opalg.OperatorError(
                f"basis is not orthonormal (Gram defect {defect:.3e})"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def computational(cls, dim: int) -> "Basis":
        return cls(np.eye(dim, dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def transform(self, a) -> np.ndarray:
        """Matrix elements of a in this basis, V^dag a V."""
        m = opalg.as_square_matrix(a)
        if m.shape[0] != self.dim:
            raise opalg.OperatorError("operator dimension does not match basis")
        return self.matrix.conj().T @ m @ self.matrix

    def projector(self, k: int) -> np.ndarray:
        ket = self.matrix[:, k]
        return np.outer(ket, ket.conj())


def quantumness(a, b) -> float:
    """Q(A, B) = 2 ||[A, B]||_HS^2; zero iff the observables commute."""
    ma = opalg.assert_hermitian(a)
    mb = opalg.assert_hermitian(b)
    return 2.0 * opalg.hs_norm(opalg.commutator(ma, mb)) ** 2


def _skew_information_from_root(root: np.ndarray, a: np.ndarray) -> float:
    return 0.5 * opalg.hs_norm(opalg.commutator(root, a)) ** 2


def skew_information(rho, a) -> float:
    """Wigner-Yanase skew information; for pure rho this is the variance of a."""
    rho_m = opalg.assert_density(rho)
    am = opalg.assert_hermitian(a)
    if rho_m.shape != am.shape:
        raise opalg.OperatorError("state and observable dimensions differ")
    return _skew_information_from_root(opalg.sqrtm_psd(rho_m), am)


def coherence(rho, basis: Basis) -> float:
    """Skew-information coherence: sum of I(rho, |k><k|) over the basis."""
    rho_m = opalg.assert_density(rho)
    if rho_m.shape[0] != basis.dim:
        raise opalg.OperatorError("state dimension does not match basis")
    root = opalg.sqrtm_psd(rho_m)
    return sum(
        _skew_information_from_root(root, basis.projector(k))
        for k in range(basis.dim)
    )


def l1_coherence(rho, basis: Basis) -> float:
    """Sum of absolute off-diagonal entries of rho in the basis."""
    rho_m = opalg.assert_density(rho)
    if rho_m.shape[0] != basis.dim:
        raise opalg.OperatorError("state dimension does not match basis")
    rb = np.abs(basis.transform(rho_m))
    return float(np.sum(rb) - np.trace(rb))


def max_column_sum_norm(a) -> float:
    """||A||_1 = max_j sum_i |A_ij| (the induced 1-norm, not the trace norm)."""
    m = opalg.as_square_matrix(a)
    return float(np.max(np.sum(np.abs(m), axis=0)))


def dephased_part(a, basis: Basis) -> np.ndarray:
    """Diagonal part of a in the basis, mapped back to the original frame."""
    ab = basis.transform(a)
    v = basis.matrix
    return v @ np.diag(np.diag(ab)) @ v.conj().T


def witness_noncommutativity(a, basis: Basis) -> float:
    """N_A = ||[A, A_d]||_1 with A_d the basis-dephased part of A.

    For a qubit Bloch observable (a1, a2, a3).sigma in the computational
    basis this equals 2|a3| sqrt(a1^2 + a2^2).
    """
    am = opalg.assert_hermitian(a)
    ab = basis.transform(am)
    ad = np.diag(np.diag(ab))
    return max_column_sum_norm(ab @ ad - ad @ ab)


@dataclass(frozen=True)
class DimInequalityCheck:
    lhs: float
    rhs: float
    holds: bool
    argmax_column: int


def check_dim_inequality(a, basis: Basis) -> DimInequalityCheck:
    """Evaluate ||[A, A_d]||_1 >= |(|A_nn| - 1)| ||A||_1 for involutory A.

    n is the column of A (in the basis) with the largest absolute column sum;
    ties break to the lowest index.  The record reports both sides and
    whether the inequality holds up to a small slack.
    """
    am = opalg.assert_hermitian(a)
    eye = np.eye(am.shape[0])
    defect = opalg.hs_norm(am @ am - eye)
    if defect > INVOLUTORY_ATOL:
        raise opalg.OperatorError(
            f"observable is not involutory (||A^2 - I||_HS = {defect:.3e})"
        )
    ab = basis.transform(am)
    col_sums = np.sum(np.abs(ab), axis=0)
    n = int(np.argmax(col_sums))
    ad = np.diag(np.diag(ab))
    lhs = max_column_sum_norm(ab @ ad - ad @ ab)
    rhs = abs(abs(ab[n, n]) - 1.0) * float(col_sums[n])
    return DimInequalityCheck(lhs=lhs, rhs=rhs, holds=lhs + DIM_INEQUALITY_SLACK >= rhs,
                              argmax_column=n)
