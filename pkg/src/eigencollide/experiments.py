"""Monte Carlo orchestration: collision probabilities under grid refinement,
Hurst phase sweeps, small-gap exponent fits, small-time studies, and the d=2
closed-form oracle.

Performance notes. Collision runs sample each replica once at the finest mesh
and reuse strided subgrids for the coarser ladder entries, so refining the
grid never increases a replica's minimum gap by construction. All randomness
is drawn from per-replica counter-based substreams in fixed-size batches
(BATCH below), which makes every result bit-identical for any worker count.
BATCH is part of the output contract: changing it reshuffles nothing
statistically but changes nothing bitwise either (draws are per replica);
it is fixed to keep fft batch shapes, and therefore float rounding, stable.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .capacity import collision_regime
from .ensembles import (
    EnsemblePath,
    coefficient_scale,
    n_beta,
    validate_shift,
    vec_to_matrix,
)
from .fields import _fgn_exact, fgn_from_normals, fgn_sqrt_eigenvalues
from .spectral import adjacent_gaps, gap_closed_form_2x2, ordered_eigenvalues
from .ensembles import matrix_to_vec
from .geometry import sample_degenerate
from .streams import (
    TAG_BOXDIM,
    TAG_COLLISION,
    TAG_GAPFIT,
    TAG_ORACLE,
    TAG_SMALLTIME,
    substream,
)

__all__ = [
    "CollisionStats",
    "RefinementResult",
    "PhaseSweepResult",
    "ExponentFit",
    "wilson_interval",
    "estimate_collision_probability",
    "refinement_study",
    "gap_exponent_fit",
    "phase_sweep",
    "small_time_study",
    "oracle_vector_reduction",
    "flattened_degenerate_sampler",
    "degenerate_point_cloud",
]

# replica batch size; fixed (see module docstring)
BATCH = 32

_Z95 = 1.959963984540054


def wilson_interval(hits: int, n: int, z: float = _Z95) -> tuple:
    """Wilson 95% score interval for a binomial proportion."""
    if n < 1:
        raise ValueError("need at least one trial")
    if not 0 <= hits <= n:
        raise ValueError("hits must lie in [0, n]")
    denom = n + z * z
    center = (hits + 0.5 * z * z) / denom
    half = z * np.sqrt(hits * (n - hits) / n + 0.25 * z * z) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class CollisionStats:
    """Collision-probability estimate at one (interval, mesh, threshold) point."""

    p_hat: float
    wilson_lo: float
    wilson_hi: float
    hits: int
    replicas: int
    delta: float
    intervals: int  # mesh cell count N
    interval: tuple  # (a, b) time window


@dataclass(frozen=True)
class RefinementResult:
    """Collision estimates along a mesh ladder, sharing replicas across meshes.

    trend_last_over_first = p_hat at the finest mesh over the coarsest;
    trend_top_pair = finest over second-finest (nan where undefined).
    """

    stats: tuple
    trend_last_over_first: float
    trend_top_pair: float


@dataclass(frozen=True)
class PhaseSweepResult:
    """One refinement study per Hurst value, plus the cross-threshold summary.

    separation_ratio divides the smallest finest-mesh p_hat on the collision
    side by the largest on the no-collision side (nan if either side is
    empty or the denominator is 0 with a 0 numerator).
    """

    hurst_values: tuple
    regimes: tuple
    studies: tuple
    separation_ratio: float


@dataclass(frozen=True)
class ExponentFit:
    """Log-log slope of the small-gap CDF over an epsilon window."""

    slope: float
    stderr: float
    window: tuple
    samples: int
    eps: np.ndarray
    cdf: np.ndarray


def _require_r1(hurst) -> float:
    hurst = tuple(float(h) for h in np.atleast_1d(hurst))
    if len(hurst) != 1:
        raise NotImplementedError(
            "path experiments are implemented for 1-parameter time only; "
            "multiparameter Hurst vectors enter through the decision rule"
        )
    return hurst[0]


def _threshold(kappa: float, mesh: float, H: float) -> float:
    """delta = kappa * mesh^H, the Hoelder-modulus threshold schedule."""
    return float(kappa) * float(mesh) ** float(H)


def _run_batches(replicas: int, threads: int, work) -> None:
    """Apply work(lo, hi) over fixed [lo, hi) replica batches, maybe threaded.

    Batching is identical for any thread count; workers write disjoint output
    slices, so scheduling cannot change results.
    """
    spans = [(lo, min(lo + BATCH, replicas)) for lo in range(0, replicas, BATCH)]
    if threads <= 1:
        for lo, hi in spans:
            work(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda s: work(*s), spans))


def _field_path_batch(
    beta: int,
    d: int,
    H: float,
    step: float,
    i0: int,
    npoints: int,
    seed: int,
    prefix: tuple,
    lo: int,
    hi: int,
) -> np.ndarray:
    """Sample field paths for replicas [lo, hi): shape (hi-lo, nfields, npoints).

    Each matrix replica consumes one standard_normal((nfields, 2M)) block from
    its own substream; the circulant embedding maps them to fGn increments
    whose cumulative sums give the field path on the uniform grid
    a + k*step (k = 0..npoints-1) with a = i0*step.
    """
    nf = n_beta(beta, d)
    M = i0 + npoints - 1
    sqrt_eigs = fgn_sqrt_eigenvalues(M, H, step)
    m = hi - lo
    if sqrt_eigs is None:
        # embedding failure: exact dense fallback, reported not fatal
        warnings.warn(
            "circulant embedding not nonnegative definite; exact fallback",
            RuntimeWarning,
        )
        out = np.empty((m, nf, npoints))
        for r in range(lo, hi):
            rng = substream(seed, *prefix, r)
            for f in range(nf):
                inc = _fgn_exact(M, H, step, rng)
                out[r - lo, f] = np.cumsum(inc)[i0 - 1 : i0 - 1 + npoints]
        return out
    L = 2 * M
    z = np.empty((m, nf, L))
    for r in range(lo, hi):
        z[r - lo] = substream(seed, *prefix, r).standard_normal((nf, L))
    out = np.empty((m, nf, npoints))
    for f in range(nf):
        inc = fgn_from_normals(z[:, f, :], sqrt_eigs)
        np.cumsum(inc, axis=1, out=inc)
        out[:, f, :] = inc[:, i0 - 1 : i0 - 1 + npoints]
    return out


def _gaps_from_fields(fields: np.ndarray, beta: int, d: int, A: np.ndarray) -> np.ndarray:
    """Minimum adjacent eigenvalue gap of Y(t) = A + X(t): (m, npoints).

    d = 2 goes through the closed form (no eigensolver); larger d materializes
    matrices and diagonalizes.
    """
    if d == 2:
        if beta == 1:
            diff = np.sqrt(2.0) * (fields[:, 0, :] - fields[:, 2, :]) + (A[0, 0] - A[1, 1])
            off = fields[:, 1, :] + A[0, 1]
            return np.sqrt(diff**2 + 4.0 * off**2)
        diff = (fields[:, 0, :] - fields[:, 2, :]) + np.real(A[0, 0] - A[1, 1])
        offr = fields[:, 1, :] + np.real(A[0, 1])
        offi = fields[:, 3, :] + np.imag(A[0, 1])
        return np.sqrt(diff**2 + 4.0 * offr**2 + 4.0 * offi**2)
    coeffs = fields.transpose(0, 2, 1) * coefficient_scale(beta, d)
    mats = vec_to_matrix(coeffs, beta, d) + A
    eigs = np.linalg.eigvalsh(mats)[..., ::-1]
    return adjacent_gaps(eigs).min(axis=-1)


def _min_gaps_ladder(
    beta: int,
    d: int,
    H: float,
    a: float,
    b: float,
    mesh_ladder: Sequence[int],
    A: np.ndarray,
    replicas: int,
    seed: int,
    prefix: tuple,
    threads: int,
) -> np.ndarray:
    """Per-replica minimum gaps on every ladder subgrid: (replicas, len(ladder)).

    Samples once at the finest mesh; coarser meshes reuse strided subgrids of
    the same paths (nested-grid coupling), so the reported minimum never
    increases under refinement, replica by replica.
    """
    ladder = [int(N) for N in mesh_ladder]
    if sorted(ladder) != ladder or len(set(ladder)) != len(ladder):
        raise ValueError("mesh ladder must be strictly increasing")
    Nmax = ladder[-1]
    if any(Nmax % N for N in ladder):
        raise ValueError("every ladder mesh must divide the finest mesh")
    if not 0.0 < a < b:
        raise ValueError("collision window requires 0 < a < b")
    step = (b - a) / Nmax
    i0f = a / step
    i0 = int(round(i0f))
    if abs(i0f - i0) > 1e-9 or i0 < 1:
        raise ValueError(
            "fast path needs a/step integral (a*Nmax/(b-a) must be an integer)"
        )
    strides = [Nmax // N for N in ladder]
    minima = np.empty((replicas, len(ladder)))

    def work(lo: int, hi: int) -> None:
        fields = _field_path_batch(beta, d, H, step, i0, Nmax + 1, seed, prefix, lo, hi)
        gaps = _gaps_from_fields(fields, beta, d, A)
        for col, s in enumerate(strides):
            minima[lo:hi, col] = gaps[:, ::s].min(axis=1)

    _run_batches(replicas, threads, work)
    return minima


def _stats_from_minima(
    minima_col: np.ndarray, delta: float, N: int, window: tuple
) -> CollisionStats:
    n = minima_col.shape[0]
    hits = int(np.count_nonzero(minima_col < delta))
    lo, hi = wilson_interval(hits, n)
    return CollisionStats(
        p_hat=hits / n,
        wilson_lo=lo,
        wilson_hi=hi,
        hits=hits,
        replicas=n,
        delta=float(delta),
        intervals=int(N),
        interval=window,
    )


def refinement_study(
    config,
    mesh_ladder: Optional[Sequence[int]] = None,
    threads: int = 1,
    _prefix: tuple = (),
) -> RefinementResult:
    """Collision probability across a mesh ladder with nested-grid coupling.

    The threshold at mesh N is delta_N = kappa * ((b-a)/N)^H. Shared replicas
    across the ladder make the trend ratios low-variance.
    """
    H = _require_r1(config.hurst)
    ladder = list(mesh_ladder if mesh_ladder is not None else config.ladder())
    a, b = config.interval
    A = validate_shift(config.shift, config.beta, config.d)
    minima = _min_gaps_ladder(
        config.beta, config.d, H, a, b, ladder, A,
        config.replicas, config.seed, (TAG_COLLISION,) + _prefix, threads,
    )
    stats = []
    for col, N in enumerate(ladder):
        delta = _threshold(config.kappa, (b - a) / N, H)
        stats.append(_stats_from_minima(minima[:, col], delta, N, (a, b)))
    p = [s.p_hat for s in stats]
    first = p[0] if p[0] > 0 else np.nan
    second = p[-2] if len(p) > 1 and p[-2] > 0 else np.nan
    return RefinementResult(
        stats=tuple(stats),
        trend_last_over_first=p[-1] / first,
        trend_top_pair=p[-1] / second if len(p) > 1 else np.nan,
    )


def estimate_collision_probability(config, threads: int = 1) -> CollisionStats:
    """Fraction of replicas whose path minimum gap falls below the threshold."""
    return refinement_study(config, [config.intervals], threads=threads).stats[0]


def phase_sweep(
    hurst_values: Sequence[float],
    config,
    mesh_ladder: Optional[Sequence[int]] = None,
    threads: int = 1,
) -> PhaseSweepResult:
    """One refinement study per Hurst value, on a shared mesh ladder.

    Every H must stay at least 0.02 away from the critical value 1/(1+beta),
    where the dichotomy is undecided. The summary ratio compares finest-mesh
    estimates across the threshold.
    """
    critical = 1.0 / (1.0 + config.beta)
    hs = [float(h) for h in hurst_values]
    for h in hs:
        if abs(h - critical) < 0.02:
            raise ValueError(
                f"H={h} is within 0.02 of the critical value {critical:.4g}"
            )
    studies = []
    regimes = []
    for idx, h in enumerate(hs):
        cfg = config.with_hurst((h,))
        studies.append(refinement_study(cfg, mesh_ladder, threads, _prefix=(idx,)))
        regimes.append(collision_regime(config.beta, (h,)))
    coll = [s.stats[-1].p_hat for s, r in zip(studies, regimes) if r == "collision"]
    none = [s.stats[-1].p_hat for s, r in zip(studies, regimes) if r == "no_collision"]
    if coll and none:
        lo_side = min(coll)
        hi_side = max(none)
        sep = lo_side / hi_side if hi_side > 0 else (np.inf if lo_side > 0 else np.nan)
    else:
        sep = np.nan
    return PhaseSweepResult(
        hurst_values=tuple(hs),
        regimes=tuple(regimes),
        studies=tuple(studies),
        separation_ratio=float(sep),
    )


def gap_exponent_fit(
    beta: int,
    d: int,
    t0: float,
    samples: int,
    window: tuple,
    seed: int,
    hurst: float = 0.5,
    grid_points: int = 12,
) -> ExponentFit:
    """Small-gap CDF slope of X(t0) from i.i.d. samples, log-log regression.

    The slope estimates beta + 1 (the codimension of the degenerate set).
    hurst only sets the sampling scale t0^H; the exponent itself is
    scale-free, which is why t0-invariance holds.
    """
    if samples < 10_000:
        raise ValueError("need at least 1e4 samples for a stable fit")
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    lo, hi = float(window[0]), float(window[1])
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < lo < hi")
    scale = float(t0) ** float(hurst)
    nf = n_beta(beta, d)
    sc = coefficient_scale(beta, d) * scale
    gaps = np.empty(samples)
    chunk = 4096
    for ci, start in enumerate(range(0, samples, chunk)):
        stop = min(start + chunk, samples)
        rng = substream(seed, TAG_GAPFIT, ci)
        coeffs = rng.standard_normal((stop - start, nf)) * sc
        if d == 2:
            gaps[start:stop] = gap_closed_form_2x2(vec_to_matrix(coeffs, beta, d), beta)
        else:
            eigs = np.linalg.eigvalsh(vec_to_matrix(coeffs, beta, d))[..., ::-1]
            gaps[start:stop] = adjacent_gaps(eigs).min(axis=-1)
    gaps.sort()
    eps = np.geomspace(lo, hi, grid_points)
    cdf = np.searchsorted(gaps, eps, side="left") / samples
    mask = cdf > 0
    if mask.sum() < 2:
        raise ValueError("empty window: no gap mass inside [lo, hi]")
    x = np.log(eps[mask])
    y = np.log(cdf[mask])
    (slope, _), cov = np.polyfit(x, y, 1, cov=True)
    return ExponentFit(
        slope=float(slope),
        stderr=float(np.sqrt(cov[0, 0])),
        window=(lo, hi),
        samples=samples,
        eps=eps,
        cdf=cdf,
    )


def _spectrum_cardinality(A: np.ndarray, tol: float = 1e-9) -> int:
    lam = np.linalg.eigvalsh(A)
    return int(1 + np.count_nonzero(np.diff(lam) > tol))


def small_time_study(
    beta: int,
    d: int,
    A,
    T_values: Sequence[float],
    hurst: float,
    intervals: int,
    replicas: int,
    seed: int,
    kappa: float = 1.0,
    threads: int = 1,
) -> list:
    """Collision estimates on shrinking windows (0, T], meshed proportionally to T.

    Meaningful in the collision regime H < 1/(1+beta). The shift must satisfy
    the instant-collision hypothesis: A = 0 or spectrum cardinality d-1 (one
    repeated pair). The grid is t = k*T/N (k = 1..N); the origin is excluded
    because X(0) = 0 exactly.
    """
    H = float(hurst)
    if not H < 1.0 / (1.0 + beta):
        raise ValueError("small-time study requires the collision regime H < 1/(1+beta)")
    A = validate_shift(A, beta, d)
    if np.any(A != 0) and _spectrum_cardinality(A) != d - 1:
        raise ValueError(
            "shift must be 0 or have spectrum cardinality d-1 (one repeated pair)"
        )
    Ts = [float(T) for T in T_values]
    if any(T <= 0 for T in Ts) or sorted(Ts, reverse=True) != Ts:
        raise ValueError("T ladder must be positive and decreasing")
    out = []
    for ti, T in enumerate(Ts):
        step = T / intervals
        minima = np.empty((replicas, 1))

        def work(lo: int, hi: int) -> None:
            fields = _field_path_batch(
                beta, d, H, step, 1, intervals, seed, (TAG_SMALLTIME, ti), lo, hi
            )
            gaps = _gaps_from_fields(fields, beta, d, A)
            minima[lo:hi, 0] = gaps.min(axis=1)

        _run_batches(replicas, threads, work)
        delta = _threshold(kappa, step, H)
        out.append(_stats_from_minima(minima[:, 0], delta, intervals, (0.0, T)))
    return out


def oracle_vector_reduction(beta: int, config, threads: int = 1) -> float:
    """Max pathwise |eigensolver gap - closed-form gap| for d = 2 paths.

    Rebuilds the gap path straight from the retained scalar fields and
    compares with the full pipeline (pack, materialize, diagonalize). The two
    agree up to eigensolver tolerance; anything above 1e-10 indicates a
    packing or assembly bug.
    """
    if config.d != 2:
        raise ValueError("the vector-reduction oracle is a d = 2 construction")
    if config.shift is not None and np.any(np.asarray(config.shift) != 0):
        raise ValueError("oracle requires A = 0")
    H = _require_r1(config.hurst)
    a, b = config.interval
    N = config.intervals
    step = (b - a) / N
    i0 = int(round(a / step))
    if abs(a / step - i0) > 1e-9 or i0 < 1:
        raise ValueError("fast path needs a/step integral")
    A = validate_shift(None, beta, config.d)
    worst = np.zeros(int(np.ceil(config.replicas / BATCH)))

    def work(lo: int, hi: int) -> None:
        fields = _field_path_batch(
            beta, 2, H, step, i0, N + 1, config.seed, (TAG_ORACLE,), lo, hi
        )
        formula = _gaps_from_fields(fields, beta, 2, A)
        coeffs = fields.transpose(0, 2, 1) * coefficient_scale(beta, 2)
        mats = vec_to_matrix(coeffs, beta, 2)
        eigs = ordered_eigenvalues(mats)
        pipeline = eigs[..., 0] - eigs[..., 1]
        worst[lo // BATCH] = np.max(np.abs(pipeline - formula))

    _run_batches(config.replicas, threads, work)
    return float(worst.max())


def flattened_degenerate_sampler(d: int, beta: int, level_width: float = 1.0):
    """Point sampler on the flattened degenerate set, for energy integrals.

    Returns sampler(n, rng) -> (n, n_beta(beta, d)) drawing degenerate
    matrices through the chart (uniform levels of half-width level_width,
    Haar frames) and packing them. d = 2 is the line {c I} and is vectorized;
    larger d loops through the chart construction, so keep n moderate there.
    """
    nb = n_beta(beta, d)
    if d == 2:

        def sampler(n: int, rng: np.random.Generator) -> np.ndarray:
            c = rng.uniform(-level_width, level_width, n)
            out = np.zeros((n, nb))
            out[:, 0] = c
            out[:, 2] = c
            return out

        return sampler

    def sampler(n: int, rng: np.random.Generator) -> np.ndarray:
        def levels(r: np.random.Generator) -> np.ndarray:
            while True:
                ls = np.sort(r.uniform(-level_width, level_width, d - 1))[::-1]
                if np.min(-np.diff(ls)) > 1e-12:
                    return ls

        out = np.empty((n, nb))
        for i in range(n):
            M = sample_degenerate(d, beta, rng=rng, level_sampler=levels)
            out[i] = matrix_to_vec(M, beta)
        return out

    return sampler


def degenerate_point_cloud(npoints: int, d: int, beta: int, seed: int) -> np.ndarray:
    """Flattened degenerate samples (standard-normal levels) for dimension fits.

    The d = 2 cloud lies on the line {(c, 0, c)} (plus a zero imaginary
    coordinate for beta = 2); its box-counting slope estimates 1, matching
    the chart parameter count n_1(2) - 2.
    """
    rng = substream(seed, TAG_BOXDIM)
    nb = n_beta(beta, d)
    if d == 2:
        c = rng.standard_normal(npoints)
        out = np.zeros((npoints, nb))
        out[:, 0] = c
        out[:, 2] = c
        return out
    out = np.empty((npoints, nb))
    for i in range(npoints):
        out[i] = matrix_to_vec(sample_degenerate(d, beta, rng=rng), beta)
    return out
