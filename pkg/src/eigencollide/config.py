"""Experiment configuration: dataclass, JSON parsing, and emission.

Config files are JSON with a flat core (beta, d, hurst, interval, intervals,
replicas, kappa, seed, shift, mesh_ladder) plus optional per-subcommand
sections (sweep, gapfit, capacity, boxdim, smalltime) that are validated by
their consumers. parse(emit(config)) round-trips exactly: Python's float
repr is shortest-exact, so JSON serialization loses nothing.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .capacity import collision_regime, q_index

__all__ = ["ExperimentConfig", "parse_config", "emit_config", "config_to_dict"]

_SECTION_KEYS = ("sweep", "gapfit", "capacity", "boxdim", "smalltime")
_CORE_KEYS = (
    "beta",
    "d",
    "hurst",
    "interval",
    "intervals",
    "replicas",
    "kappa",
    "seed",
    "shift",
    "mesh_ladder",
)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything a collision experiment needs, validated at construction.

    intervals is the mesh cell count N on [a, b] (grid of N+1 points);
    mesh_ladder optionally lists the N values of a refinement ladder; kappa
    scales the threshold delta = kappa * mesh^H. extras holds the optional
    per-subcommand sections untouched.
    """

    beta: int = 1
    d: int = 2
    hurst: tuple = (0.3,)
    interval: tuple = (1.0, 2.0)
    intervals: int = 1024
    replicas: int = 1000
    kappa: float = 1.0
    seed: int = 20260822
    shift: Optional[np.ndarray] = None
    mesh_ladder: Optional[tuple] = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.beta not in (1, 2):
            raise ValueError(f"beta: must be 1 or 2, got {self.beta}")
        if int(self.d) < 2:
            raise ValueError(f"d: matrix dimension must be >= 2, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        hurst = tuple(float(h) for h in np.atleast_1d(self.hurst))
        for h in hurst:
            if not 0.0 < h < 1.0:
                raise ValueError(f"hurst: components must lie strictly in (0,1), got {h}")
        object.__setattr__(self, "hurst", hurst)
        a, b = (float(x) for x in self.interval)
        if not 0.0 <= a < b:
            raise ValueError(f"interval: need 0 <= a < b, got ({a}, {b})")
        object.__setattr__(self, "interval", (a, b))
        if int(self.intervals) < 1:
            raise ValueError(f"intervals: need >= 1 mesh cell, got {self.intervals}")
        object.__setattr__(self, "intervals", int(self.intervals))
        if int(self.replicas) < 1:
            raise ValueError(f"replicas: need >= 1, got {self.replicas}")
        object.__setattr__(self, "replicas", int(self.replicas))
        if not float(self.kappa) > 0.0:
            raise ValueError(f"kappa: threshold scale must be positive, got {self.kappa}")
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "seed", int(self.seed))
        if self.shift is not None:
            A = np.asarray(self.shift)
            if A.shape != (self.d, self.d):
                raise ValueError(f"shift: must be {self.d}x{self.d}, got {A.shape}")
            if np.max(np.abs(A - A.conj().T)) > 1e-12:
                raise ValueError("shift: matrix must be Hermitian")
            if self.beta == 1 and np.iscomplexobj(A) and np.max(np.abs(A.imag)) > 1e-12:
                raise ValueError("shift: beta = 1 requires a real matrix")
            object.__setattr__(self, "shift", A)
        if self.mesh_ladder is not None:
            ladder = tuple(int(N) for N in self.mesh_ladder)
            if any(N < 1 for N in ladder) or sorted(ladder) != list(ladder):
                raise ValueError(f"mesh_ladder: need increasing positive meshes, got {ladder}")
            object.__setattr__(self, "mesh_ladder", ladder)
        if collision_regime(self.beta, self.hurst) == "critical":
            warnings.warn(
                f"Q = {q_index(self.hurst):.6g} equals beta+1 = {self.beta + 1}: "
                "critical case, the collision dichotomy is undecided here",
                UserWarning,
            )

    def ladder(self) -> tuple:
        return self.mesh_ladder if self.mesh_ladder is not None else (self.intervals,)

    def with_hurst(self, hurst) -> "ExperimentConfig":
        return dataclasses.replace(self, hurst=tuple(hurst))

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        for f in dataclasses.fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if f.name == "shift":
                an = np.zeros((self.d, self.d)) if a is None else np.asarray(a)
                bn = np.zeros((other.d, other.d)) if b is None else np.asarray(b)
                if an.shape != bn.shape or not np.array_equal(an, bn):
                    return False
            elif a != b:
                return False
        return True


def _parse_shift(raw, d: int):
    if raw is None:
        return None
    if isinstance(raw, dict):
        keys = set(raw)
        if not keys <= {"real", "imag"}:
            raise ValueError(f"shift: unknown keys {sorted(keys - {'real', 'imag'})}")
        real = np.asarray(raw.get("real", np.zeros((d, d))), dtype=float)
        imag = np.asarray(raw.get("imag", np.zeros((d, d))), dtype=float)
        return real + 1j * imag
    return np.asarray(raw, dtype=float)


def parse_config(path: str) -> ExperimentConfig:
    """Load and validate a JSON experiment config; field-level error messages."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"config {path}: invalid JSON ({e})") from e
    if not isinstance(raw, dict):
        raise ValueError(f"config {path}: top level must be an object")
    unknown = set(raw) - set(_CORE_KEYS) - set(_SECTION_KEYS)
    if unknown:
        raise ValueError(f"config {path}: unknown keys {sorted(unknown)}")
    kw = {}
    for key in _CORE_KEYS:
        if key in raw:
            kw[key] = raw[key]
    if "shift" in kw:
        kw["shift"] = _parse_shift(kw["shift"], int(raw.get("d", 2)))
    if "hurst" in kw and np.isscalar(kw["hurst"]):
        kw["hurst"] = (kw["hurst"],)
    extras = {k: raw[k] for k in _SECTION_KEYS if k in raw}
    try:
        return ExperimentConfig(**kw, extras=extras)
    except ValueError as e:
        raise ValueError(f"config {path}: {e}") from e


def config_to_dict(config: ExperimentConfig) -> dict:
    """JSON-ready dict; inverse of parse_config up to defaulting."""
    out = {
        "beta": config.beta,
        "d": config.d,
        "hurst": list(config.hurst),
        "interval": list(config.interval),
        "intervals": config.intervals,
        "replicas": config.replicas,
        "kappa": config.kappa,
        "seed": config.seed,
    }
    if config.shift is not None:
        A = np.asarray(config.shift)
        if np.iscomplexobj(A):
            out["shift"] = {"real": A.real.tolist(), "imag": A.imag.tolist()}
        else:
            out["shift"] = A.tolist()
    else:
        out["shift"] = None
    out["mesh_ladder"] = list(config.mesh_ladder) if config.mesh_ladder else None
    out.update(config.extras)
    return out


def emit_config(config: ExperimentConfig, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")
