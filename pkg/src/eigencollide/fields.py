"""Scalar Gaussian fields driving the matrix ensembles.

Fractional Brownian motion and its multiparameter product-kernel sheet, with
three samplers:

* exact dense factorization on arbitrary grids (the reference sampler),
* circulant embedding for stationary increments on uniform 1-d grids
  (the fast path used by the Monte Carlo experiments),
* a Volterra-kernel quadrature used purely as a covariance cross-check.

All samplers are deterministic given (seed, replica index); see streams.py.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.linalg import toeplitz

from .streams import TAG_FIELD, substream

__all__ = [
    "GridSpec",
    "CovarianceModel",
    "FieldSample",
    "RegularityReport",
    "fbm_covariance",
    "sheet_covariance",
    "fbm_model",
    "sheet_model",
    "custom_model",
    "covariance_matrix",
    "sample_field_exact",
    "sample_fgn_circulant",
    "fgn_sqrt_eigenvalues",
    "fgn_from_normals",
    "volterra_kernel",
    "volterra_covariance_quadrature",
    "conditional_variance",
    "verify_regularity_bounds",
    "cholesky_with_jitter",
]


def _check_hurst(H: float) -> float:
    H = float(H)
    if not 0.0 < H < 1.0:
        raise ValueError(f"Hurst parameter must lie in (0,1), got {H}")
    return H


def fbm_covariance(s, t, H):
    """Covariance of fractional Brownian motion, (1/2)(t^2H + s^2H - |t-s|^2H).

    Accepts scalars or arrays (broadcast); times must be nonnegative.
    """
    H = _check_hurst(H)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("fbm covariance requires nonnegative times")
    h2 = 2.0 * H
    out = 0.5 * (t**h2 + s**h2 - np.abs(t - s) ** h2)
    return out.item() if out.ndim == 0 else out


def sheet_covariance(s, t, H):
    """Product kernel prod_j R_{H_j}(s_j, t_j) of the fractional sheet.

    s, t are r-vectors (or arrays with trailing axis r); H has length r.
    For r = 1 this reduces exactly to fbm_covariance.
    """
    H = tuple(float(h) for h in np.atleast_1d(H))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if s.shape[-1] != len(H) or t.shape[-1] != len(H):
        raise ValueError(
            f"dimension mismatch: s has {s.shape[-1]} components, "
            f"t has {t.shape[-1]}, H has {len(H)}"
        )
    out = np.ones(np.broadcast_shapes(s.shape[:-1], t.shape[:-1]))
    for j, h in enumerate(H):
        out = out * fbm_covariance(s[..., j], t[..., j], h)
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class GridSpec:
    """Rectangular evaluation grid: axis j holds n[j] equispaced points in [a[j], b[j]].

    A singleton axis (n_j = 1) must have a_j = b_j. Points are enumerated in
    C order (last axis fastest), matching points().
    """

    a: tuple
    b: tuple
    n: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in np.atleast_1d(self.a))
        b = tuple(float(x) for x in np.atleast_1d(self.b))
        n = tuple(int(x) for x in np.atleast_1d(self.n))
        if not len(a) == len(b) == len(n):
            raise ValueError("a, b, n must have equal lengths")
        for j, (aj, bj, nj) in enumerate(zip(a, b, n)):
            if aj < 0:
                raise ValueError(f"axis {j}: left endpoint {aj} < 0")
            if bj < aj:
                raise ValueError(f"axis {j}: endpoints out of order ({aj} > {bj})")
            if nj < 1:
                raise ValueError(f"axis {j}: need at least one point, got {nj}")
            if nj == 1 and aj != bj:
                raise ValueError(f"axis {j}: singleton axis requires a == b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "n", n)

    @property
    def r(self) -> int:
        return len(self.n)

    @property
    def npoints(self) -> int:
        return int(np.prod(self.n))

    def axes(self):
        return [np.linspace(aj, bj, nj) for aj, bj, nj in zip(self.a, self.b, self.n)]

    def points(self) -> np.ndarray:
        """All grid points as an (npoints, r) array, C order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def interval(a: float, b: float, n: int) -> GridSpec:
    """1-d grid shorthand."""
    return GridSpec((a,), (b,), (n,))


@dataclass(frozen=True)
class CovarianceModel:
    """A covariance kernel plus the metadata needed to route fast paths.

    kind is one of {"fbm", "fractional_sheet", "custom"}. Evaluating the
    kernel on any finite grid must give a symmetric PSD matrix; this is
    checked operationally by factorization with bounded jitter.
    """

    kind: str
    hurst: Optional[tuple] = None
    kernel: Optional[Callable] = field(default=None, compare=False)

    def k(self, s, t):
        """Kernel value at r-vector arguments (scalars allowed for r = 1)."""
        if self.kind == "fbm":
            (H,) = self.hurst
            return fbm_covariance(np.squeeze(s), np.squeeze(t), H)
        if self.kind == "fractional_sheet":
            return sheet_covariance(s, t, self.hurst)
        return self.kernel(s, t)


def fbm_model(H: float) -> CovarianceModel:
    return CovarianceModel("fbm", (_check_hurst(H),))


def sheet_model(H) -> CovarianceModel:
    return CovarianceModel("fractional_sheet", tuple(_check_hurst(h) for h in H))


def custom_model(kernel: Callable) -> CovarianceModel:
    return CovarianceModel("custom", None, kernel)


def covariance_matrix(grid: GridSpec, cov: CovarianceModel) -> np.ndarray:
    """Dense covariance matrix of the field on grid.points()."""
    pts = grid.points()
    if cov.kind == "fbm":
        (H,) = cov.hurst
        t = pts[:, 0]
        return np.asarray(fbm_covariance(t[:, None], t[None, :], H))
    if cov.kind == "fractional_sheet":
        out = np.ones((len(pts), len(pts)))
        for j, h in enumerate(cov.hurst):
            tj = pts[:, j]
            out *= fbm_covariance(tj[:, None], tj[None, :], h)
        return out
    n = len(pts)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            # custom kernels see coordinate arrays even for r = 1
            out[i, j] = out[j, i] = float(np.asarray(cov.kernel(pts[i], pts[j])).reshape(()))
    return out


# jitter schedule: 1e-14, x10 per retry, capped at 1e-10
_JITTERS = (0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10)


def cholesky_with_jitter(C: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of C, adding diagonal jitter up to 1e-10 if needed.

    Failure past the largest jitter signals a kernel that is not positive
    semidefinite and raises.
    """
    C = np.asarray(C, dtype=float)
    eye = np.eye(C.shape[0])
    for j in _JITTERS:
        try:
            return np.linalg.cholesky(C + j * eye)
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError(
        "covariance matrix not factorizable with diagonal jitter up to 1e-10; "
        "kernel is not positive semidefinite on this grid"
    )


@dataclass(frozen=True)
class FieldSample:
    """Joint Gaussian field values, one row per independent replica.

    values has shape (replicas, grid.npoints), replica r generated from the
    substream (seed, TAG_FIELD, r).
    """

    grid: GridSpec
    values: np.ndarray

    @property
    def replicas(self) -> int:
        return self.values.shape[0]


def sample_field_exact(
    grid: GridSpec, cov: CovarianceModel, seed: int, replicas: int
) -> FieldSample:
    """Exact draws of the centered Gaussian vector with covariance cov on grid.

    Dense O(N^3) factorization; meant for reference-quality sampling on grids
    of at most a few thousand points. Output is bit-identical for fixed
    (seed, replicas) no matter how the replica loop is scheduled.
    """
    if replicas < 0:
        raise ValueError("replicas must be nonnegative")
    N = grid.npoints
    if replicas == 0:
        return FieldSample(grid, np.empty((0, N)))
    L = cholesky_with_jitter(covariance_matrix(grid, cov))
    values = np.empty((replicas, N))
    for r in range(replicas):
        z = substream(seed, TAG_FIELD, r).standard_normal(N)
        values[r] = L @ z
    return FieldSample(grid, values)


# ---------------------------------------------------------------------------
# circulant embedding of fractional Gaussian noise
# ---------------------------------------------------------------------------

_FGN_EIG_CACHE: dict = {}


def _fgn_autocov(n: int, H: float) -> np.ndarray:
    """gamma(0..n) for unit-step fGn: gamma(k) = (1/2)(|k+1|^2H - 2|k|^2H + |k-1|^2H)."""
    k = np.arange(n + 1, dtype=float)
    h2 = 2.0 * H
    return 0.5 * ((k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)


def fgn_sqrt_eigenvalues(n: int, H: float, dt: float) -> Optional[np.ndarray]:
    """sqrt eigenvalues of the 2n circulant embedding of fGn, or None.

    None signals a genuinely negative eigenvalue (embedding invalid); tiny
    negatives from fft roundoff (within 1e-8 of the largest eigenvalue) are
    clipped to zero. Cached per (n, H); dt enters as the exact scale dt^H.
    """
    H = _check_hurst(H)
    key = (int(n), float(H))
    unit = _FGN_EIG_CACHE.get(key)
    if unit is None:
        g = _fgn_autocov(n, H)
        # first circulant row: g_0 .. g_{n-1}, g_n, g_{n-1} .. g_1
        row = np.concatenate([g[:n], [g[n]], g[n - 1 : 0 : -1]])
        eigs = np.fft.fft(row).real
        if eigs.min() < -1e-8 * eigs.max():
            unit = (False, None)
        else:
            unit = (True, np.sqrt(np.clip(eigs, 0.0, None)))
        _FGN_EIG_CACHE[key] = unit
    ok, sqrt_eigs = unit
    if not ok:
        return None
    return float(dt) ** H * sqrt_eigs


def fgn_from_normals(z: np.ndarray, sqrt_eigs: np.ndarray) -> np.ndarray:
    """Map standard normals (m, 2n) to fGn increments (m, n).

    Consumes exactly 2n normals per path in a fixed order, so per-replica
    substreams stay aligned regardless of batching.
    """
    z = np.atleast_2d(z)
    m, L = z.shape
    n = L // 2
    if L != 2 * n or L != sqrt_eigs.shape[0]:
        raise ValueError("normals must have shape (m, 2n) matching the embedding")
    Z = np.zeros((m, L), dtype=complex)
    Z[:, 0] = z[:, 0]
    Z[:, n] = z[:, 1]
    if n > 1:
        Z[:, 1:n] = (z[:, 2::2] + 1j * z[:, 3::2]) / np.sqrt(2.0)
        Z[:, n + 1 :] = np.conj(Z[:, 1:n])[:, ::-1]
    inc = np.sqrt(L) * np.fft.ifft(sqrt_eigs * Z, axis=1).real
    return inc[:, :n]


def _fgn_exact(n: int, H: float, dt: float, rng: np.random.Generator) -> np.ndarray:
    g = _fgn_autocov(n - 1, H) * float(dt) ** (2.0 * H)
    L = cholesky_with_jitter(toeplitz(g))
    return L @ rng.standard_normal(n)


def sample_fgn_circulant(n: int, H: float, dt: float, seed: int) -> np.ndarray:
    """n stationary fGn increments whose cumulative sums have fBm law.

    Uses the circulant embedding; if the embedding has a negative eigenvalue
    (never observed for fBm on the tested H range, but possible for other
    stationary kernels routed here) it warns and falls back to exact dense
    sampling.
    """
    if n < 1:
        raise ValueError("need n >= 1 increments")
    H = _check_hurst(H)
    rng = substream(seed, TAG_FIELD)
    sqrt_eigs = fgn_sqrt_eigenvalues(n, H, dt)
    if sqrt_eigs is None:
        warnings.warn(
            "circulant embedding not nonnegative definite; "
            "falling back to exact dense sampling",
            RuntimeWarning,
        )
        return _fgn_exact(n, H, dt, rng)
    z = rng.standard_normal((1, 2 * n))
    return fgn_from_normals(z, sqrt_eigs)[0]


# ---------------------------------------------------------------------------
# Volterra kernel (H < 1/2), used as a covariance cross-check only
# ---------------------------------------------------------------------------

_VOLTERRA_CONST_CACHE: dict = {}


def _volterra_constant(H: float) -> float:
    """Normalization making int_0^(s^t) K(u,s)K(u,t)du equal the fBm covariance.

    The defining integral I_H = int_0^1 (1-x)^(-2H) x^(H-1/2) dx is computed
    once per H by adaptive quadrature (weighted rule handles both endpoint
    singularities exactly); the constant is sqrt(2H / ((1-2H) I_H)).
    """
    c = _VOLTERRA_CONST_CACHE.get(H)
    if c is None:
        I_H, _ = integrate.quad(
            lambda x: 1.0, 0.0, 1.0, weight="alg", wvar=(H - 0.5, -2.0 * H),
            epsabs=0.0, epsrel=1e-12, limit=200,
        )
        c = np.sqrt(2.0 * H / ((1.0 - 2.0 * H) * I_H))
        _VOLTERRA_CONST_CACHE[H] = c
    return c


def _check_volterra_hurst(H: float) -> float:
    H = float(H)
    if not 0.0 < H < 0.5:
        raise ValueError(f"Volterra kernel defined for H in (0, 1/2), got {H}")
    return H


def volterra_kernel(s: float, t: float, H: float) -> float:
    """Volterra kernel K_H(s,t) of fBm for H < 1/2; zero for s >= t.

    K_H(s,t) = c_H [ (t/s)^(H-1/2) (t-s)^(H-1/2)
                     - (H-1/2) s^(1/2-H) int_s^t u^(H-3/2) (u-s)^(H-1/2) du ].
    The inner integral is computed after substituting u = s + v^2, which
    removes the endpoint singularity.
    """
    H = _check_volterra_hurst(H)
    s = float(s)
    t = float(t)
    if s >= t:
        return 0.0  # Volterra support convention
    if s <= 0.0:
        raise ValueError("kernel requires 0 < s < t")
    c = _volterra_constant(H)
    lead = (t / s) ** (H - 0.5) * (t - s) ** (H - 0.5)
    vmax = np.sqrt(t - s)
    inner, _ = integrate.quad(
        lambda v: 2.0 * (s + v * v) ** (H - 1.5) * v ** (2.0 * H),
        0.0, vmax, epsabs=0.0, epsrel=1e-10, limit=200,
    )
    return c * (lead - (H - 0.5) * s ** (0.5 - H) * inner)


def volterra_covariance_quadrature(s: float, t: float, H: float) -> float:
    """int_0^(s^t) K_H(u,s) K_H(u,t) du by adaptive quadrature.

    Cross-check: equals fbm_covariance(s, t, H) up to quadrature error. The
    integrand has an integrable (power < 1) singularity at u = min(s,t);
    scipy flags it with an IntegrationWarning although the value converges,
    so that warning is silenced here.
    """
    H = _check_volterra_hurst(H)
    lo, hi = 0.0, min(s, t)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(
            lambda u: volterra_kernel(u, s, H) * volterra_kernel(u, t, H),
            lo, hi, epsabs=0.0, epsrel=1e-8, limit=300,
        )
    return val


def conditional_variance(s, t, cov: CovarianceModel) -> float:
    """Var[xi(t) | xi(s)] = R(t,t) - R(s,t)^2 / R(s,s) for the Gaussian pair."""
    rss = float(cov.k(s, s))
    if rss <= 0.0:
        raise ValueError("conditioning point has zero variance (on the axes)")
    rtt = float(cov.k(t, t))
    rst = float(cov.k(s, t))
    return rtt - rst * rst / rss


@dataclass(frozen=True)
class RegularityReport:
    """Empirical regularity constants of a field over a finite grid.

    var_min:                min_t R(t,t)
    increment_ratio_min/max: range of E[(xi(s)-xi(t))^2] / sum_j |s_j-t_j|^(2H_j)
    conditional_ratio_min:  min of Var[xi(t)|xi(s)] over the same denominator
    ok:                     all constants strictly positive and finite
    """

    var_min: float
    increment_ratio_min: float
    increment_ratio_max: float
    conditional_ratio_min: float
    ok: bool


def verify_regularity_bounds(grid: GridSpec, cov: CovarianceModel, H) -> RegularityReport:
    """Scan a grid for the two-sided increment and conditional-variance bounds.

    Empirical check on a finite grid only; it reports the observed constants
    and flags a violation when any of them is nonpositive or non-finite. It
    cannot certify the infimum over the continuum.
    """
    if any(nj < 2 for nj in grid.n):
        raise ValueError("regularity scan needs at least 2 points per axis")
    H = [_check_hurst(h) for h in np.atleast_1d(H)]
    if len(H) != grid.r:
        raise ValueError("Hurst vector length must match grid dimension")
    pts = grid.points()
    R = covariance_matrix(grid, cov)
    var = np.diag(R)
    # sum_j |s_j - t_j|^(2H_j) for every ordered pair
    denom = np.zeros_like(R)
    for j, h in enumerate(H):
        dj = np.abs(pts[:, j][:, None] - pts[:, j][None, :])
        denom += dj ** (2.0 * h)
    off = denom > 0.0
    incr = var[:, None] + var[None, :] - 2.0 * R
    ratios = incr[off] / denom[off]
    # condition on s (rows), evaluate at t (columns); rows with zero variance
    # cannot be conditioned on and would be a violation anyway
    with np.errstate(divide="ignore", invalid="ignore"):
        condvar = var[None, :] - R**2 / var[:, None]
        cond_ratios = (condvar / denom)[off]
    var_min = float(var.min())
    rmin = float(ratios.min())
    rmax = float(ratios.max())
    cmin = float(np.min(cond_ratios))
    vals = (var_min, rmin, rmax, cmin)
    ok = all(np.isfinite(v) and v > 0.0 for v in vals)
    return RegularityReport(var_min, rmin, rmax, cmin, ok)
