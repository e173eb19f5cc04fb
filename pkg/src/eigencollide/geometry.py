"""Constructive geometry of matrices with a repeated eigenvalue.

The degenerate set (symmetric or Hermitian matrices whose spectrum has at
most d-1 distinct values) is parametrized locally by a Stiefel frame of d-2
orthonormal columns, a completion to a full basis, and d-1 eigenvalue levels
with the last one doubled. These charts supply random degenerate samples for
dimension estimation and exact collision witnesses for the detectors.
"""

from __future__ import annotations

import numpy as np

from .streams import TAG_GEOMETRY, substream

__all__ = [
    "lambda_matrix",
    "check_frame",
    "complete_frame",
    "chart_matrix",
    "phase_fix",
    "random_stiefel",
    "sample_degenerate",
    "distance_to_degenerate_upper",
    "merged_degenerate_witness",
]

_FRAME_TOL = 1e-12
_COMPLETION_FLOOR = 1e-6


def lambda_matrix(levels, d: int) -> np.ndarray:
    """diag(levels[0], ..., levels[d-3], levels[d-2], levels[d-2]).

    The d-1 levels fill the diagonal with the last one doubled, so the output
    always has an eigenvalue of multiplicity >= 2.
    """
    levels = np.asarray(levels, dtype=float)
    if levels.shape != (d - 1,):
        raise ValueError(f"need d-1 = {d - 1} levels, got shape {levels.shape}")
    return np.diag(np.concatenate([levels, levels[-1:]]))


def check_frame(R: np.ndarray, tol: float = _FRAME_TOL) -> np.ndarray:
    """Validate orthonormal columns (A*A = I within tol)."""
    R = np.asarray(R)
    if R.ndim != 2:
        raise ValueError("frame must be a 2-d array")
    if R.shape[1] == 0:
        return R  # empty frame is trivially orthonormal (the d = 2 chart)
    gram = R.conj().T @ R
    defect = np.max(np.abs(gram - np.eye(R.shape[1])))
    if defect > tol:
        raise ValueError(f"columns not orthonormal within {tol:g} (defect {defect:.3g})")
    return R


def complete_frame(R: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Extend a d x (d-2) frame to a full basis by Gram-Schmidt against a reference.

    psi1 orthonormalizes reference column d-2 (0-based) against the frame
    columns; psi2 orthonormalizes reference column d-1 against the frame and
    psi1. Both normalizations must stay above 1e-6, otherwise the reference
    is too close to the frame's span and the caller must pick another one.
    """
    R = check_frame(R)
    d, k = R.shape
    if k != d - 2:
        raise ValueError(f"frame must have d-2 = {d - 2} columns, got {k}")
    reference = check_frame(np.asarray(reference))
    if reference.shape != (d, d):
        raise ValueError("reference must be a full orthonormal basis")
    v1 = reference[:, d - 2]
    w1 = v1 - R @ (R.conj().T @ v1)
    n1 = np.linalg.norm(w1)
    if n1 < _COMPLETION_FLOOR:
        raise ValueError(
            f"completion degenerate: reference column {d - 2} lies within "
            f"{_COMPLETION_FLOOR:g} of the frame span"
        )
    psi1 = w1 / n1
    v2 = reference[:, d - 1]
    w2 = v2 - R @ (R.conj().T @ v2) - psi1 * (psi1.conj() @ v2)
    n2 = np.linalg.norm(w2)
    if n2 < _COMPLETION_FLOOR:
        raise ValueError(
            f"completion degenerate: reference column {d - 1} lies within "
            f"{_COMPLETION_FLOOR:g} of the span of the frame and psi1"
        )
    psi2 = w2 / n2
    full = np.column_stack([R, psi1, psi2])
    return check_frame(full)


def chart_matrix(frame: np.ndarray, levels) -> np.ndarray:
    """Pi Lambda(levels) Pi* for a completed frame Pi; always degenerate.

    Output is exactly Hermitian (symmetrized) and its spectrum is the sorted
    multiset of the levels with the last one doubled.
    """
    frame = check_frame(frame)
    d = frame.shape[0]
    if frame.shape[1] != d:
        raise ValueError("chart needs a completed (square) frame")
    lam = lambda_matrix(levels, d)
    M = frame @ lam @ frame.conj().T
    M = 0.5 * (M + M.conj().T)
    if not np.iscomplexobj(frame):
        M = M.real
    return M


def phase_fix(A: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Rotate each column of A by the unit scalar making <A_j, R_j> real positive.

    The inner products must stay away from zero (within 1e-10). Fixing is
    idempotent and preserves the column span and the frame property exactly
    (columns are multiplied by unit-modulus scalars).
    """
    A = np.asarray(A)
    R = np.asarray(R)
    if A.shape != R.shape:
        raise ValueError("frames must have matching shapes")
    ips = np.sum(R.conj() * A, axis=0)
    mags = np.abs(ips)
    if np.any(mags < 1e-10):
        raise ValueError("vanishing column inner product; phase undefined")
    return A * (np.conj(ips) / mags)


def random_stiefel(d: int, k: int, field: str, seed=None, rng=None) -> np.ndarray:
    """Haar-distributed d x k orthonormal frame, real or complex.

    QR of a Gaussian matrix with the R-diagonal phase fixed to be positive,
    which makes the distribution exactly invariant under fixed orthogonal or
    unitary left multiplication.
    """
    if k > d:
        raise ValueError("need k <= d columns")
    if rng is None:
        rng = substream(seed, TAG_GEOMETRY)
    if field == "real":
        G = rng.standard_normal((d, k))
    elif field == "complex":
        G = (rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))) / np.sqrt(2.0)
    else:
        raise ValueError("field must be 'real' or 'complex'")
    Q, Rm = np.linalg.qr(G)
    diag = np.diagonal(Rm)
    Q = Q * (diag / np.abs(diag))
    return Q


def _default_levels(d: int, rng: np.random.Generator) -> np.ndarray:
    """d-1 distinct levels, sorted descending."""
    while True:
        levels = np.sort(rng.standard_normal(d - 1))[::-1]
        if d == 2 or np.min(-np.diff(levels)) > 1e-12:
            return levels


def sample_degenerate(d: int, beta: int, seed=None, rng=None, level_sampler=None) -> np.ndarray:
    """Random matrix with exactly one repeated eigenvalue pair (|spectrum| = d-1).

    Chart construction: Haar frame of d-2 columns, completion against the
    identity basis (random reference on the rare completion failure), and
    distinct descending levels from level_sampler (standard normals by
    default). For d = 2 the real degenerate set is just the scalar matrices,
    and the construction reduces to c * I.
    """
    if beta not in (1, 2):
        raise ValueError(f"symmetry class beta must be 1 or 2, got {beta}")
    if rng is None:
        rng = substream(seed, TAG_GEOMETRY)
    field = "real" if beta == 1 else "complex"
    R = random_stiefel(d, d - 2, field, rng=rng)
    eye = np.eye(d) if beta == 1 else np.eye(d, dtype=complex)
    try:
        frame = complete_frame(R, eye)
    except ValueError:
        frame = complete_frame(R, random_stiefel(d, d, field, rng=rng))
    levels = _default_levels(d, rng) if level_sampler is None else level_sampler(rng)
    return chart_matrix(frame, levels)


def distance_to_degenerate_upper(M: np.ndarray) -> float:
    """Certified upper bound on the operator-norm distance to the degenerate set.

    Merging the closest adjacent eigenvalue pair at its midpoint perturbs M
    by half that gap in operator norm, so min_i (lambda_i - lambda_(i+1)) / 2
    is always achievable.
    """
    M = np.asarray(M)
    lam = np.linalg.eigvalsh(M)[::-1]
    return float(np.min(lam[:-1] - lam[1:]) / 2.0)


def merged_degenerate_witness(M: np.ndarray) -> np.ndarray:
    """The degenerate matrix achieving distance_to_degenerate_upper.

    Same eigenvectors, with the closest adjacent pair replaced by its
    midpoint. Eigensolving the output confirms the bound constructively.
    """
    M = np.asarray(M)
    lam, V = np.linalg.eigh(M)
    lam = lam[::-1].copy()
    V = V[:, ::-1]
    i = int(np.argmin(lam[:-1] - lam[1:]))
    mid = 0.5 * (lam[i] + lam[i + 1])
    lam[i] = lam[i + 1] = mid
    W = (V * lam) @ V.conj().T
    W = 0.5 * (W + W.conj().T)
    return W.real if not np.iscomplexobj(M) else W
