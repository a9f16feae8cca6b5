"""Per-eigenstate localization diagnostics.

IPR weighs site participation only; the cumulative Friedel sum also sees the
spatial extent of the profile, which is what separates a state hugging one
region from one smeared over the whole lattice at equal participation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolver import node_count

NORM_TOL = 1e-10


@dataclass(frozen=True)
class StateMeasures:
    """Scalar diagnostics for one normalized eigenstate."""

    ipr: float
    cfs: float
    com: float
    w_left: float
    w_right: float
    nodes: int


@dataclass(frozen=True)
class SpacingSpectrum:
    """Consecutive eigenvalue differences, clamped at zero."""

    spacings: np.ndarray

    def __post_init__(self):
        spacings = np.asarray(self.spacings, dtype=float)
        spacings.setflags(write=False)
        object.__setattr__(self, "spacings", spacings)


def _require_normalized(vector: np.ndarray) -> np.ndarray:
    v = np.asarray(vector, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
        raise ValueError("vector must be L2-normalized")
    return v


def ipr(vector: np.ndarray) -> float:
    """Inverse participation ratio: sum of |psi_i|^4, in [1/N, 1]."""
    v = _require_normalized(vector)
    return float(np.sum(v**4))


def cfs(vector: np.ndarray) -> float:
    """Cumulative Friedel sum: |sum_n (exp(2 pi i P_n) + 1)| / (2N).

    P_n is the cumulative probability up to site n. A single-site state gives 1
    (all phase factors aligned); a uniform state gives 1/2 because the phase
    factors run through all N-th roots of unity and cancel.
    """
    v = _require_normalized(vector)
    p = np.cumsum(v**2)
    total = np.sum(np.exp(2j * np.pi * p) + 1.0)
    return float(np.abs(total)) / (2 * v.size)


def center_of_mass(vector: np.ndarray) -> float:
    """Probability-weighted mean site index (1-based, fractional)."""
    v = _require_normalized(vector)
    sites = np.arange(1, v.size + 1)
    return float(np.sum(sites * v**2))


def edge_weights(vector: np.ndarray, n_b: int) -> tuple[float, float]:
    """Probability mass in the first and last n_b sites."""
    v = _require_normalized(vector)
    if not 1 <= n_b <= v.size // 2:
        raise ValueError(f"edge window {n_b} out of range for {v.size} sites")
    prob = v**2
    return float(np.sum(prob[:n_b])), float(np.sum(prob[v.size - n_b:]))


def spacing_spectrum(values: np.ndarray) -> SpacingSpectrum:
    """Differences of an ascending eigenvalue array."""
    values = np.asarray(values, dtype=float)
    diffs = np.diff(values)
    if np.any(diffs < -1e-12):
        raise ValueError("eigenvalues must be sorted ascending")
    return SpacingSpectrum(np.maximum(diffs, 0.0))


def state_measures(vector: np.ndarray, n_b: int = 2,
                   amplitude_floor: float = 1e-8) -> StateMeasures:
    """All per-state diagnostics for one eigenvector."""
    w_left, w_right = edge_weights(vector, n_b)
    return StateMeasures(
        ipr=ipr(vector),
        cfs=cfs(vector),
        com=center_of_mass(vector),
        w_left=w_left,
        w_right=w_right,
        nodes=node_count(vector, amplitude_floor),
    )
