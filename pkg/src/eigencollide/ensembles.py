"""GOE/GUE-type matrix paths built from independent scalar field copies.

A path is Y(t) = A + X(t) where X(t) is symmetric (beta = 1) or Hermitian
(beta = 2) with entries driven by independent copies of a scalar Gaussian
field: off-diagonal entries xi_ij(t) (+ i eta_ij(t) for beta = 2), diagonal
sqrt(2) xi_ii(t) for beta = 1 and real xi_ii(t) for beta = 2.

Storage keeps only the independent coefficients (the flat vector); full
matrices are materialized on demand, which makes Hermitianity exact by
construction rather than approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import FieldSample, GridSpec

__all__ = [
    "n_beta",
    "vec_to_matrix",
    "matrix_to_vec",
    "EnsemblePath",
    "build_ensemble_path",
    "rescale_self_similar",
    "upper_indices",
    "strict_upper_indices",
    "diagonal_positions",
    "coefficient_scale",
    "validate_shift",
]


def _check_beta(beta: int) -> int:
    beta = int(beta)
    if beta not in (1, 2):
        raise ValueError(f"symmetry class beta must be 1 or 2, got {beta}")
    return beta


def n_beta(beta: int, d: int) -> int:
    """Real dimension of the symmetric (d(d+1)/2) or Hermitian (d^2) matrices."""
    beta = _check_beta(beta)
    d = int(d)
    if d < 2:
        raise ValueError("matrix dimension must be >= 2")
    return d * (d + 1) // 2 if beta == 1 else d * d


def upper_indices(d: int):
    """Row-major upper-triangle (i <= j) index pair, the packing order."""
    return np.triu_indices(d)


def strict_upper_indices(d: int):
    return np.triu_indices(d, k=1)


def diagonal_positions(d: int) -> np.ndarray:
    """Positions of the (i,i) entries inside the row-major upper-triangle packing."""
    iu, ju = upper_indices(d)
    return np.flatnonzero(iu == ju)


def coefficient_scale(beta: int, d: int) -> np.ndarray:
    """Entrywise scale mapping raw field copies to packed matrix coefficients.

    beta = 1 puts sqrt(2) on the diagonal entries; beta = 2 keeps the diagonal
    real with unit scale, and the trailing d(d-1)/2 imaginary coefficients are
    unit scale as well.
    """
    beta = _check_beta(beta)
    scale = np.ones(n_beta(beta, d))
    if beta == 1:
        scale[diagonal_positions(d)] = np.sqrt(2.0)
    return scale


def vec_to_matrix(x: np.ndarray, beta: int, d: int) -> np.ndarray:
    """Unpack a coefficient vector into the corresponding (exactly) Hermitian matrix.

    Packing order: real parts of the upper triangle row-major (diagonal
    included), then for beta = 2 the imaginary parts of the strict upper
    triangle row-major. Last-axis batching is supported: x may have shape
    (..., n_beta(beta, d)).
    """
    beta = _check_beta(beta)
    n = n_beta(beta, d)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise ValueError(f"coefficient vector must have length {n}, got {x.shape[-1]}")
    n1 = d * (d + 1) // 2
    iu, ju = upper_indices(d)
    if beta == 1:
        M = np.zeros(x.shape[:-1] + (d, d))
        M[..., iu, ju] = x[..., :n1]
        M[..., ju, iu] = x[..., :n1]
        return M
    M = np.zeros(x.shape[:-1] + (d, d), dtype=complex)
    M[..., iu, ju] = x[..., :n1]
    M[..., ju, iu] = x[..., :n1]
    si, sj = strict_upper_indices(d)
    M[..., si, sj] += 1j * x[..., n1:]
    M[..., sj, si] -= 1j * x[..., n1:]
    return M


def matrix_to_vec(M: np.ndarray, beta: int) -> np.ndarray:
    """Pack a Hermitian matrix into its coefficient vector; inverse of vec_to_matrix.

    Input must be Hermitian within 1e-12 (and real for beta = 1); it is
    symmetrized exactly before packing so the round trip is an identity.
    """
    beta = _check_beta(beta)
    M = np.asarray(M)
    d = M.shape[-1]
    if M.shape[-2] != d:
        raise ValueError("matrix must be square")
    herm_err = np.max(np.abs(M - np.swapaxes(M, -1, -2).conj()))
    if herm_err > 1e-12:
        raise ValueError(f"input not Hermitian within 1e-12 (defect {herm_err:.3g})")
    if beta == 1 and np.iscomplexobj(M) and np.max(np.abs(M.imag)) > 1e-12:
        raise ValueError("beta = 1 requires a real symmetric matrix")
    Mh = 0.5 * (M + np.swapaxes(M, -1, -2).conj())
    iu, ju = upper_indices(d)
    real_part = np.real(Mh[..., iu, ju])
    if beta == 1:
        return real_part
    si, sj = strict_upper_indices(d)
    return np.concatenate([real_part, np.imag(Mh[..., si, sj])], axis=-1)


def validate_shift(A: Optional[np.ndarray], beta: int, d: int) -> np.ndarray:
    """Normalize and validate the deterministic shift matrix (None means 0)."""
    beta = _check_beta(beta)
    if A is None:
        return np.zeros((d, d)) if beta == 1 else np.zeros((d, d), dtype=complex)
    A = np.asarray(A)
    if A.shape != (d, d):
        raise ValueError(f"shift matrix must be {d}x{d}, got {A.shape}")
    if np.max(np.abs(A - A.conj().T)) > 1e-12:
        raise ValueError("shift matrix must be Hermitian")
    if beta == 1:
        if np.iscomplexobj(A) and np.max(np.abs(A.imag)) > 1e-12:
            raise ValueError("beta = 1 shift matrix must be real")
        return np.real(A).astype(float)
    return A.astype(complex)


@dataclass(frozen=True)
class EnsemblePath:
    """Matrix path stored as packed coefficients of X plus the shift A.

    coeffs has shape (replicas, ntimes, n_beta(beta, d)) and holds X only;
    matrices materialize Y = A + X.
    """

    times: np.ndarray
    coeffs: np.ndarray
    beta: int
    d: int
    A: np.ndarray

    @property
    def replicas(self) -> int:
        return self.coeffs.shape[0]

    @property
    def ntimes(self) -> int:
        return self.coeffs.shape[1]

    def matrices(self, replica=None) -> np.ndarray:
        """Materialize Y(t) as (replicas, ntimes, d, d), or one replica's slice."""
        c = self.coeffs if replica is None else self.coeffs[replica]
        return vec_to_matrix(c, self.beta, self.d) + self.A

    def matrix(self, replica: int, k: int) -> np.ndarray:
        return vec_to_matrix(self.coeffs[replica, k], self.beta, self.d) + self.A


def build_ensemble_path(
    fields: FieldSample,
    beta: int,
    d: int,
    A: Optional[np.ndarray],
    grid: Optional[GridSpec] = None,
) -> EnsemblePath:
    """Assemble matrix replicas from a block of independent scalar field copies.

    fields.values must hold m * n_beta(beta, d) field replicas (m matrix
    replicas of n_beta(beta, d) consecutive copies each), ordered per replica
    as: the d(d+1)/2 xi copies in row-major upper-triangle order, then for
    beta = 2 the d(d-1)/2 eta copies in row-major strict-upper order.
    """
    beta = _check_beta(beta)
    A = validate_shift(A, beta, d)
    grid = grid if grid is not None else fields.grid
    if grid.r != 1:
        raise ValueError("matrix paths are indexed by a 1-d time grid")
    nf = n_beta(beta, d)
    total = fields.values.shape[0]
    if total % nf != 0:
        raise ValueError(
            f"need a multiple of {nf} field replicas per matrix replica, got {total}"
        )
    m = total // nf
    nt = fields.values.shape[1]
    # (m, nf, nt) -> (m, nt, nf), then scale the diagonal copies
    coeffs = fields.values.reshape(m, nf, nt).transpose(0, 2, 1).copy()
    coeffs *= coefficient_scale(beta, d)
    times = grid.axes()[0]
    return EnsemblePath(times=times, coeffs=coeffs, beta=beta, d=d, A=A)


def rescale_self_similar(path: EnsemblePath, c: float, H: float) -> EnsemblePath:
    """Self-similar rescaling s -> c^(-H) X(cs): new grid times/c, coefficients x c^(-H).

    Valid only for shift-free paths (A = 0): the scaling acts on X, and the
    rescaled path equals the original in law on the rescaled grid.
    """
    c = float(c)
    if c <= 0.0:
        raise ValueError("scale must be positive")
    if np.any(path.A != 0):
        raise ValueError("self-similar rescaling requires A = 0")
    if not 0.0 < H < 1.0:
        raise ValueError("Hurst parameter must lie in (0,1)")
    return EnsemblePath(
        times=path.times / c,
        coeffs=path.coeffs * c ** (-H),
        beta=path.beta,
        d=path.d,
        A=path.A,
    )
