"""Spectrum-level structure.

Band detection from spacing outliers, A/B/C subdomain classification from
edge weights, near-degeneracy multiplet grouping, and the per-state map
raster used for the grey-scale eigenstate figures.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, asdict
from typing import Any

import numpy as np

from .eigensolver import EigenSystem
from .measures import SpacingSpectrum, StateMeasures, spacing_spectrum, state_measures


@dataclass(frozen=True)
class AnalysisThresholds:
    """Tunable knobs of the spectrum analysis; defaults cover all bundled presets."""

    n_b: int = 2
    tau: float = 3e-5
    gamma: float = 20.0
    delta_rel: float = 0.05
    amplitude_floor: float = 1e-8

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AnalysisThresholds":
        return cls(**data)


@dataclass(frozen=True)
class BandPartition:
    """Disjoint index ranges over the sorted spectrum, split at outlier spacings."""

    bands: tuple[range, ...]
    gaps: tuple[tuple[float, int], ...]
    low_confidence: bool = False


@dataclass(frozen=True)
class SubdomainLabels:
    """Per-state A/B/C labels and localized flags, banded.

    Within each band the pattern is A...AB...BC...C: A and C are the maximal
    localized prefix/suffix, B spans first to last delocalized state. Localized
    states strictly inside B are diagnostics, not relabeled.
    """

    labels: np.ndarray
    localized: np.ndarray
    crossovers: tuple[tuple[int, int] | None, ...]
    interior_localized: int = 0

    def __post_init__(self):
        for name in ("labels", "localized"):
            arr = getattr(self, name)
            arr.setflags(write=False)


@dataclass(frozen=True)
class Multiplet:
    """A maximal run of consecutive states joined by near-degenerate spacings."""

    band: int
    start: int
    size: int
    node_counts: tuple[int, ...] | None = None

    @property
    def members(self) -> range:
        return range(self.start, self.start + self.size)


@dataclass(frozen=True)
class MultipletReport:
    groups: tuple[Multiplet, ...]

    def sizes(self) -> list[int]:
        return [g.size for g in self.groups]

    def group_of(self, state: int) -> Multiplet:
        for g in self.groups:
            if state in g.members:
                return g
        raise IndexError(f"state {state} not covered by any multiplet")


@dataclass(frozen=True)
class EigenstateMap:
    """Per-state |psi| rows, each renormalized to max 1, highest state on top."""

    rows: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        self.rows.setflags(write=False)
        self.indices.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape


def detect_bands(values: np.ndarray, gamma: float = 20.0) -> BandPartition:
    """Split the sorted spectrum at every spacing above gamma times the median spacing.

    If nothing qualifies, fall back to the single largest spacing, flagged low
    confidence; a strictly uniform ladder stays one band.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 4:
        raise ValueError("band detection needs at least 4 states")
    spac = np.diff(values)
    median = float(np.median(spac))
    boundaries = np.nonzero(spac > gamma * median)[0]
    low_confidence = False
    if boundaries.size == 0:
        low_confidence = True
        spread = float(spac.max() - spac.min())
        if spread <= 1e-9 * max(float(spac.max()), 1e-300):
            boundaries = np.array([], dtype=int)
        else:
            boundaries = np.array([int(np.argmax(spac))])
    edges = [0, *(int(b) + 1 for b in boundaries), values.size]
    bands = tuple(range(a, b) for a, b in zip(edges[:-1], edges[1:]))
    gaps = tuple((float(spac[int(b)]), int(b)) for b in boundaries)
    return BandPartition(bands=bands, gaps=gaps, low_confidence=low_confidence)


def classify_states(eig: EigenSystem, bands: BandPartition,
                    n_b: int = 2, tau: float = 3e-5) -> SubdomainLabels:
    """Label each state A/B/C within its band from its edge weights.

    A state is localized when it fails to reach at least one lattice edge,
    i.e. min(w_left, w_right) < tau.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    n = eig.size
    prob = eig.vectors**2
    w_left = prob[:n_b].sum(axis=0)
    w_right = prob[n - n_b:].sum(axis=0)
    localized = np.minimum(w_left, w_right) < tau

    labels = np.full(n, "A", dtype="<U1")
    crossovers: list[tuple[int, int] | None] = []
    interior = 0
    for band in bands.bands:
        deloc = [k for k in band if not localized[k]]
        if not deloc:
            crossovers.append(None)
            continue
        first, last = deloc[0], deloc[-1]
        labels[first:last + 1] = "B"
        labels[last + 1:band.stop] = "C"
        crossovers.append((first, last))
        interior += int(np.sum(localized[first:last + 1]))
    return SubdomainLabels(labels=labels, localized=localized,
                           crossovers=tuple(crossovers), interior_localized=interior)


def delocalized_fraction(labels: SubdomainLabels) -> float:
    """Share of states extending to both lattice edges."""
    return float(np.mean(~labels.localized))


def detect_multiplets(spacings: SpacingSpectrum, bands: BandPartition,
                      delta_rel: float = 0.05,
                      node_counts: np.ndarray | None = None) -> MultipletReport:
    """Group consecutive states whose spacings fall below delta_rel of the band median."""
    if delta_rel <= 0:
        raise ValueError("delta_rel must be positive")
    spac = spacings.spacings
    groups: list[Multiplet] = []
    for band_index, band in enumerate(bands.bands):
        band_spac = spac[band.start:band.stop - 1]
        threshold = delta_rel * float(np.median(band_spac)) if band_spac.size else 0.0
        start = band.start
        for k in band:
            if k + 1 < band.stop and spac[k] < threshold:
                continue
            size = k - start + 1
            nodes = tuple(int(x) for x in node_counts[start:k + 1]) if node_counts is not None else None
            groups.append(Multiplet(band=band_index, start=start, size=size, node_counts=nodes))
            start = k + 1
    return MultipletReport(groups=tuple(groups))


def eigenstate_map(eig: EigenSystem, selection: range) -> EigenstateMap:
    """Raster of |psi| rows for the selected states, renormalized per row.

    Row order is descending in state index so the highest selected state sits
    on top, matching the usual band-map orientation.
    """
    indices = np.array(sorted(selection, reverse=True), dtype=int)
    if indices.size == 0:
        raise ValueError("empty state selection")
    if indices[-1] < 0 or indices[0] >= eig.size:
        raise ValueError("selection out of bounds")
    rows = np.abs(eig.vectors[:, indices].T)
    rows = rows / rows.max(axis=1, keepdims=True)
    return EigenstateMap(rows=rows, indices=indices)


def smooth(curve: np.ndarray, window: int = 5) -> np.ndarray:
    """Centered moving average, valid region only."""
    curve = np.asarray(curve, dtype=float)
    if curve.size < window:
        return curve.copy()
    kernel = np.full(window, 1.0 / window)
    return np.convolve(curve, kernel, mode="valid")


def monotonicity_changes(curve: np.ndarray, min_swing_rel: float = 0.1) -> int:
    """Direction changes between significant monotone runs of a curve.

    The curve is split into maximal monotone runs; runs whose total swing is
    below min_swing_rel of the curve's range count as flat and contribute no
    direction. Adjacent surviving runs with the same direction merge. A
    flat-then-arc-then-steep band spacing curve therefore counts 2, however
    gently the flat segment tilts. Meant for curves already smoothed.
    """
    curve = np.asarray(curve, dtype=float)
    if curve.size < 3:
        return 0
    span = float(curve.max() - curve.min())
    if span <= 0.0:
        return 0
    floor = min_swing_rel * span

    runs: list[tuple[int, int, int]] = []
    direction, start = 0, 0
    diffs = np.diff(curve)
    for i, di in enumerate(diffs):
        s = 1 if di > 0 else (-1 if di < 0 else 0)
        if s == 0 or s == direction:
            continue
        if direction == 0:
            direction = s
            continue
        runs.append((direction, start, i))
        direction, start = s, i
    runs.append((direction, start, curve.size - 1))

    dirs = [d for d, a, b in runs
            if d != 0 and abs(curve[b] - curve[a]) >= floor]
    merged = [d for i, d in enumerate(dirs) if i == 0 or d != dirs[i - 1]]
    return max(len(merged) - 1, 0)


@dataclass(frozen=True)
class SpectralReport:
    """Everything the state table needs: measures plus band/subdomain/multiplet labels."""

    values: np.ndarray
    spacings: SpacingSpectrum
    measures: tuple[StateMeasures, ...]
    bands: BandPartition
    labels: SubdomainLabels
    multiplets: MultipletReport
    thresholds: AnalysisThresholds
    band_of: np.ndarray = field(repr=False)
    multiplet_of: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.values.size


def analyze(eig: EigenSystem, thresholds: AnalysisThresholds | None = None,
            expect_two_bands: bool = False) -> SpectralReport:
    """Run the full per-state and spectrum-level analysis on one eigensystem."""
    th = thresholds or AnalysisThresholds()
    spacings = spacing_spectrum(eig.values)
    bands = detect_bands(eig.values, gamma=th.gamma)
    if expect_two_bands and len(bands.bands) != 2:
        warnings.warn(f"expected 2 bands for a two-level cell lattice, found {len(bands.bands)}",
                      stacklevel=2)
    labels = classify_states(eig, bands, n_b=th.n_b, tau=th.tau)
    measures = tuple(state_measures(eig.vectors[:, k], n_b=th.n_b,
                                    amplitude_floor=th.amplitude_floor)
                     for k in range(eig.size))
    nodes = np.array([m.nodes for m in measures])
    multiplets = detect_multiplets(spacings, bands, delta_rel=th.delta_rel, node_counts=nodes)

    band_of = np.empty(eig.size, dtype=int)
    for i, band in enumerate(bands.bands):
        band_of[band.start:band.stop] = i
    multiplet_of = np.empty(eig.size, dtype=int)
    for gid, group in enumerate(multiplets.groups):
        multiplet_of[group.start:group.start + group.size] = gid

    return SpectralReport(values=eig.values, spacings=spacings, measures=measures,
                          bands=bands, labels=labels, multiplets=multiplets,
                          thresholds=th, band_of=band_of, multiplet_of=multiplet_of)
