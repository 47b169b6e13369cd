"""Parameter sweeps over the symmetric montage space.

This module reproduces the three placement studies (polar angle,
current ratio, pair separation), extracts focal summaries from envelope
maps, and synthesizes the machine-made counterpart of the placement
guideline tables: which xy cell and depth band each (phi, alpha, ratio)
combination stimulates.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .envelope import EmptyMap, EnvelopeMap, envelope_plane
from .geometry import (
    DEFAULT_DEPTH_BANDS,
    DepthBands,
    DepthLabel,
    Montage,
    RegionLabel,
    SphereModel,
    classify_region_xy,
    make_symmetric_montage,
)

__all__ = [
    "FocalSummary",
    "ScenarioSpec",
    "ScenarioStep",
    "GuidelineCell",
    "GuidelineEntry",
    "GuidelineTable",
    "SCENARIO_NAMES",
    "scenario_preset",
    "run_scenario",
    "extract_focal",
    "synthesize_guidelines",
    "worker_count",
    "DEFAULT_PHI_GRID",
    "DEFAULT_ALPHA_GRID",
    "DEFAULT_RATIO_GRID",
]

SCENARIO_NAMES = ("a", "b", "c")

DEFAULT_PHI_GRID = (15.0, 30.0, 45.0, 60.0, 75.0, 90.0, 105.0, 120.0, 135.0)
DEFAULT_ALPHA_GRID = (20.0, 40.0, 60.0, 80.0, 100.0, 120.0)
DEFAULT_RATIO_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)

# Two cells within this fraction of the peak make the focus ambiguous.
AMBIGUITY_MARGIN = 0.01


def worker_count() -> int:
    """Parallel worker count, capped by the TIFL_THREADS env var."""
    cap = os.environ.get("TIFL_THREADS", "")
    workers = os.cpu_count() or 1
    if cap.strip():
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"TIFL_THREADS must be an integer, got {cap!r}") from None
    return workers


def _parallel_map(fn, items):
    """Order-preserving parallel map (results sorted by input index)."""
    items = list(items)
    if len(items) <= 1 or worker_count() == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class FocalSummary:
    """Where an envelope map is strong: peak location, labels, spread.

    ``focal_mask`` marks raster nodes at or above ``tau`` times the
    peak; ``focal_extent`` is their share of all interior nodes.  The
    region label uses the point's in-plane (x, y) coordinates, so for
    an xz map it degenerates to the middle row, and the depth label
    likewise reads z, which pins xy maps at z = offset.
    """

    plane: str
    argmax_point: tuple[float, float, float]
    peak_value: float
    tau: float
    focal_mask: np.ndarray
    focal_extent: float
    region: RegionLabel
    depth: DepthLabel
    ambiguous: bool

    def to_dict(self) -> dict:
        return {
            "plane": self.plane,
            "argmax": list(self.argmax_point),
            "peak": self.peak_value,
            "tau": self.tau,
            "extent": self.focal_extent,
            "region": self.region.name,
            "depth": self.depth.name,
            "ambiguous": self.ambiguous,
        }


def _node_point(emap: EnvelopeMap, iv: int, ix: int) -> tuple[float, float, float]:
    grid = emap.grid
    x = float(grid.axis_x[ix])
    v = float(grid.axis_v[iv])
    if grid.plane == "xy":
        return (x, v, grid.offset)
    return (x, grid.offset, v)


def _label_of_point(point, model: SphereModel, bands: DepthBands):
    x, y, z = point
    region = classify_region_xy((x, y, 0.0), model)
    depth = bands.classify(z / model.radius)
    return region, depth


def extract_focal(
    emap: EnvelopeMap,
    model: SphereModel,
    tau: float = 0.75,
    bands: DepthBands = DEFAULT_DEPTH_BANDS,
) -> FocalSummary:
    """Summarize an envelope map: argmax node, focal mask, labels.

    Argmax ties resolve to the smallest row-major index.  The summary
    is flagged ambiguous when some node within 1% of the peak carries a
    different region (xy plane) or depth (xz plane) label than the
    argmax; guideline synthesis skips such cells rather than guessing.

    Raises
    ------
    EmptyMap
        If the map has no interior nodes.
    ValueError
        If ``tau`` is outside (0, 1).
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    values = emap.values
    if not emap.mask.any() or not np.isfinite(values).any():
        raise EmptyMap("cannot summarize an empty envelope map")

    flat_index = int(np.nanargmax(values))
    iv, ix = np.unravel_index(flat_index, values.shape)
    peak = float(values[iv, ix])
    argmax_point = _node_point(emap, int(iv), int(ix))
    region, depth = _label_of_point(argmax_point, model, bands)

    with np.errstate(invalid="ignore"):
        focal_mask = emap.mask & (values >= tau * peak)
    extent = float(focal_mask.sum() / emap.mask.sum())

    near = emap.mask & (values >= (1.0 - AMBIGUITY_MARGIN) * peak)
    ambiguous = False
    for jv, jx in zip(*np.nonzero(near)):
        other = _label_of_point(_node_point(emap, int(jv), int(jx)), model, bands)
        if emap.plane == "xy" and other[0] != region:
            ambiguous = True
            break
        if emap.plane == "xz" and other[1] != depth:
            ambiguous = True
            break

    return FocalSummary(
        plane=emap.plane,
        argmax_point=argmax_point,
        peak_value=peak,
        tau=tau,
        focal_mask=focal_mask,
        focal_extent=extent,
        region=region,
        depth=depth,
        ambiguous=ambiguous,
    )


@dataclass(frozen=True)
class ScenarioSpec:
    """One parameter sweep: the swept montage parameter, its values,
    and the fixed montage parameters."""

    name: str
    swept_parameter: str  # "phi" | "ratio" | "alpha"
    fixed: dict
    sweep_values: tuple

    def __post_init__(self):
        if self.swept_parameter not in ("phi", "ratio", "alpha"):
            raise ValueError(f"unknown swept parameter {self.swept_parameter!r}")
        values = tuple(float(v) for v in self.sweep_values)
        if not values:
            raise ValueError("sweep_values must be non-empty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep_values must be strictly increasing")
        object.__setattr__(self, "sweep_values", values)

    def montage(self, value: float) -> Montage:
        params = {"phi": None, "alpha": None, "psi": 0.0, "ratio": 1.0}
        params.update(self.fixed)
        params[self.swept_parameter] = value
        return make_symmetric_montage(
            phi=params["phi"],
            alpha=params["alpha"],
            psi=params["psi"],
            i_left=params["ratio"],
            i_right=1.0,
        )


def scenario_preset(name: str) -> ScenarioSpec:
    """The three built-in sweeps.

    a: electrodes slide down from near the top pole to the equator
       (phi 30/60/90, pair separation 40, equal currents); the focus
       moves deeper and spreads.
    b: fixed geometry at phi 70 with separation 20; the left/right
       current ratio 0.5/1/2 steers the focus laterally at constant
       depth.
    c: equatorial electrodes with equal currents; the pair separation
       alpha 20/60/100 moves the pattern off center.
    """
    if name == "a":
        return ScenarioSpec("a", "phi", {"alpha": 40.0, "psi": 0.0, "ratio": 1.0}, (30.0, 60.0, 90.0))
    if name == "b":
        return ScenarioSpec("b", "ratio", {"phi": 70.0, "alpha": 20.0, "psi": 0.0}, (0.5, 1.0, 2.0))
    if name == "c":
        return ScenarioSpec("c", "alpha", {"phi": 90.0, "psi": 0.0, "ratio": 1.0}, (20.0, 60.0, 100.0))
    raise ValueError(f"unknown scenario {name!r}; presets are a, b, c")


@dataclass(frozen=True)
class ScenarioStep:
    """Focal summaries on both planes for one swept value."""

    value: float
    xy: FocalSummary
    xz: FocalSummary
    montage: Montage


def run_scenario(
    spec: ScenarioSpec,
    model: SphereModel,
    resolution: int = 101,
    tau: float = 0.75,
    bands: DepthBands = DEFAULT_DEPTH_BANDS,
) -> list[ScenarioStep]:
    """Evaluate a sweep on the xy and xz planes, one step per value."""

    def step(value: float) -> ScenarioStep:
        montage = spec.montage(value)
        xy = extract_focal(
            envelope_plane(montage, model, "xy", resolution), model, tau=tau, bands=bands
        )
        xz = extract_focal(
            envelope_plane(montage, model, "xz", resolution), model, tau=tau, bands=bands
        )
        return ScenarioStep(value=value, xy=xy, xz=xz, montage=montage)

    return _parallel_map(step, spec.sweep_values)


@dataclass(frozen=True)
class GuidelineCell:
    """One sweep cell of the guideline synthesis."""

    phi: float
    alpha: float
    ratio: float
    xy: FocalSummary
    xz: FocalSummary

    @property
    def ratio_regime(self) -> str:
        if abs(self.ratio - 1.0) <= 1e-12:
            return "ratio=1"
        return "ratio>1" if self.ratio > 1.0 else "ratio<1"


def _span(values) -> tuple[float, float]:
    return (min(values), max(values))


@dataclass(frozen=True)
class GuidelineEntry:
    """Synthesized rule for one region or depth band: which parameter
    ranges and ratio regime reached it across the sweep."""

    label: str  # "R11".."R33" or "D1".."D4"
    cells: int
    phi_range: tuple[float, float] | None
    alpha_range: tuple[float, float] | None
    ratio_regimes: tuple[str, ...]

    @property
    def ratio_rule(self) -> str:
        if len(self.ratio_regimes) == 1:
            return self.ratio_regimes[0]
        return "n/a" if not self.ratio_regimes else "mixed"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "cells": self.cells,
            "phi_range": list(self.phi_range) if self.phi_range else None,
            "alpha_range": list(self.alpha_range) if self.alpha_range else None,
            "ratio_regimes": list(self.ratio_regimes),
            "ratio_rule": self.ratio_rule,
        }


def _expected_column(regime: str) -> int:
    return {"ratio<1": 1, "ratio=1": 2, "ratio>1": 3}[regime]


def _expected_depth(phi: float) -> int:
    if phi <= 45.0:
        return 1
    if phi <= 90.0:
        return 2
    if phi <= 135.0:
        return 3
    return 4


@dataclass(frozen=True)
class GuidelineTable:
    """Synthesized guidelines plus the raw cells behind them.

    ``region_residuals`` and ``depth_residuals`` list unambiguous cells
    whose focus landed outside the cell predicted by the placement
    guidelines (column by ratio regime, depth band by phi); they are
    reported rather than silently dropped, since they quantify how far
    this model's steering reaches.
    """

    cells: tuple[GuidelineCell, ...]
    region_entries: tuple[GuidelineEntry, ...]
    depth_entries: tuple[GuidelineEntry, ...]
    region_residuals: tuple[str, ...]
    depth_residuals: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "regions": [e.to_dict() for e in self.region_entries],
            "depths": [e.to_dict() for e in self.depth_entries],
            "cells": [
                {
                    "phi": c.phi,
                    "alpha": c.alpha,
                    "ratio": c.ratio,
                    "regime": c.ratio_regime,
                    "region": None if c.xy.ambiguous else c.xy.region.name,
                    "depth": None if c.xz.ambiguous else c.xz.depth.name,
                    "argmax_xy": list(c.xy.argmax_point),
                    "argmax_xz": list(c.xz.argmax_point),
                }
                for c in self.cells
            ],
            "region_residuals": list(self.region_residuals),
            "depth_residuals": list(self.depth_residuals),
        }


def synthesize_guidelines(
    model: SphereModel,
    phi_grid=DEFAULT_PHI_GRID,
    alpha_grid=DEFAULT_ALPHA_GRID,
    ratio_grid=DEFAULT_RATIO_GRID,
    resolution: int = 101,
    tau: float = 0.75,
    bands: DepthBands = DEFAULT_DEPTH_BANDS,
) -> GuidelineTable:
    """Run the full (phi, alpha, ratio) sweep and aggregate it into
    per-region and per-depth guideline entries."""
    combos = [
        (float(phi), float(alpha), float(ratio))
        for phi in phi_grid
        for alpha in alpha_grid
        for ratio in ratio_grid
    ]

    def cell(combo) -> GuidelineCell:
        phi, alpha, ratio = combo
        montage = make_symmetric_montage(phi=phi, alpha=alpha, i_left=ratio, i_right=1.0)
        xy = extract_focal(
            envelope_plane(montage, model, "xy", resolution), model, tau=tau, bands=bands
        )
        xz = extract_focal(
            envelope_plane(montage, model, "xz", resolution), model, tau=tau, bands=bands
        )
        return GuidelineCell(phi=phi, alpha=alpha, ratio=ratio, xy=xy, xz=xz)

    cells = tuple(_parallel_map(cell, combos))

    by_region: dict[str, list[GuidelineCell]] = {}
    by_depth: dict[str, list[GuidelineCell]] = {}
    region_residuals = []
    depth_residuals = []
    for c in cells:
        if not c.xy.ambiguous:
            by_region.setdefault(c.xy.region.name, []).append(c)
            if c.xy.region.col != _expected_column(c.ratio_regime):
                region_residuals.append(
                    f"phi={c.phi:g} alpha={c.alpha:g} ratio={c.ratio:g} -> {c.xy.region.name} "
                    f"(column {_expected_column(c.ratio_regime)} expected for {c.ratio_regime})"
                )
        if not c.xz.ambiguous:
            by_depth.setdefault(c.xz.depth.name, []).append(c)
            if c.xz.depth.band != _expected_depth(c.phi):
                depth_residuals.append(
                    f"phi={c.phi:g} alpha={c.alpha:g} ratio={c.ratio:g} -> {c.xz.depth.name} "
                    f"(D{_expected_depth(c.phi)} expected for phi={c.phi:g})"
                )

    region_entries = []
    for row in (1, 2, 3):
        for col in (1, 2, 3):
            name = RegionLabel(row, col).name
            group = by_region.get(name, [])
            region_entries.append(
                GuidelineEntry(
                    label=name,
                    cells=len(group),
                    phi_range=_span([c.phi for c in group]) if group else None,
                    alpha_range=_span([c.alpha for c in group]) if group else None,
                    ratio_regimes=tuple(sorted({c.ratio_regime for c in group})),
                )
            )

    depth_entries = []
    for band in (1, 2, 3, 4):
        name = DepthLabel(band).name
        group = by_depth.get(name, [])
        depth_entries.append(
            GuidelineEntry(
                label=name,
                cells=len(group),
                phi_range=_span([c.phi for c in group]) if group else None,
                alpha_range=_span([c.alpha for c in group]) if group else None,
                ratio_regimes=tuple(sorted({c.ratio_regime for c in group})),
            )
        )

    return GuidelineTable(
        cells=cells,
        region_entries=tuple(region_entries),
        depth_entries=tuple(depth_entries),
        region_residuals=tuple(region_residuals),
        depth_residuals=tuple(depth_residuals),
    )
