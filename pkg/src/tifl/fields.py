"""Quasi-static potential and electric field inside the homogeneous sphere.

A point electrode injecting current I at surface point c of an insulated
conducting ball (radius R, conductivity sigma) produces the interior
potential

    V(x) = I / (4 pi sigma R) * sum_{n>=1} (2n+1)/n (r/R)^n P_n(cos g)

with r = |x| and g the angle between x and the electrode.  The series
has the closed form

    f(t, u) = 2 (1/F - 1) + ln(2 / (1 - t u + F)),   F = sqrt(1 - 2 t u + t^2)

with t = r/R, u = cos g, which in vector form (d = |x - c|, F = d/R)
becomes

    f(x) = 2 R / d - 2 + ln(2 R^2 / (R^2 - x.c + R d))

so both the potential and its analytic gradient are smooth everywhere
inside except at the electrode itself.  A bipolar pair is the anode
term minus the cathode term; the two pairs of a montage are never
summed because their carrier frequencies differ.

The closed form is the production evaluator; the truncated series is
kept as an independent check (``pair_potential(..., terms=N)``).
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import legval

from .geometry import ElectrodePair, Montage, SphereModel, site_to_cartesian

__all__ = [
    "FieldError",
    "SurfaceSingularity",
    "Exterior",
    "EmptyGrid",
    "FieldSample",
    "PlaneGrid",
    "SINGULARITY_RADIUS_FACTOR",
    "pair_potential",
    "pair_efield",
    "field_sample",
    "pair_sites_cartesian",
    "sample_plane",
    "potential_points",
    "efield_points",
]

# Points closer than this (times R) to an electrode are treated as singular.
SINGULARITY_RADIUS_FACTOR = 1e-6


class FieldError(ValueError):
    """Base class for field evaluation errors."""


class SurfaceSingularity(FieldError):
    """Evaluation point coincides with an electrode site."""


class Exterior(FieldError):
    """Evaluation point lies on or outside the sphere surface."""


class EmptyGrid(FieldError):
    """Requested sampling plane does not intersect the sphere interior."""


@dataclass(frozen=True)
class FieldSample:
    """Potential and field of one pair at one point; J = sigma * E."""

    point: tuple[float, float, float]
    potential: float
    e_field: tuple[float, float, float]
    current_density: tuple[float, float, float]


def pair_sites_cartesian(pair: ElectrodePair, model: SphereModel) -> np.ndarray:
    """(2, 3) array of anode and cathode surface positions."""
    return np.array(
        [site_to_cartesian(pair.anode, model), site_to_cartesian(pair.cathode, model)]
    )


def _electrode_f(points: np.ndarray, elec: np.ndarray, radius: float) -> np.ndarray:
    """Closed-form single-electrode series sum f at each point (unscaled)."""
    dvec = points - elec
    d = np.linalg.norm(dvec, axis=-1)
    denom = radius * radius - points @ elec + radius * d
    return 2.0 * radius / d - 2.0 + np.log(2.0 * radius * radius / denom)


def _electrode_grad_f(points: np.ndarray, elec: np.ndarray, radius: float) -> np.ndarray:
    """Gradient of the closed-form series sum with respect to the point."""
    dvec = points - elec
    d = np.linalg.norm(dvec, axis=-1, keepdims=True)
    denom = (radius * radius - points @ elec + radius * d[..., 0])[..., None]
    return -2.0 * radius * dvec / d**3 - (radius * dvec / d - elec) / denom


def potential_points(points: np.ndarray, pair: ElectrodePair, model: SphereModel) -> np.ndarray:
    """Vectorized pair potential at (m, 3) interior points (no interior checks)."""
    anode, cathode = pair_sites_cartesian(pair, model)
    scale = pair.current / (4.0 * math.pi * model.conductivity * model.radius)
    return scale * (
        _electrode_f(points, anode, model.radius) - _electrode_f(points, cathode, model.radius)
    )


def efield_points(points: np.ndarray, pair: ElectrodePair, model: SphereModel) -> np.ndarray:
    """Vectorized pair E-field at (m, 3) interior points (no interior checks)."""
    anode, cathode = pair_sites_cartesian(pair, model)
    scale = pair.current / (4.0 * math.pi * model.conductivity * model.radius)
    return -scale * (
        _electrode_grad_f(points, anode, model.radius)
        - _electrode_grad_f(points, cathode, model.radius)
    )


def _check_point(x: np.ndarray, pair: ElectrodePair, model: SphereModel) -> None:
    r = float(np.linalg.norm(x))
    if r >= model.radius:
        raise Exterior(f"|x| = {r} is not strictly inside radius {model.radius}")
    eps = SINGULARITY_RADIUS_FACTOR * model.radius
    for elec in pair_sites_cartesian(pair, model):
        if float(np.linalg.norm(x - elec)) < eps:
            raise SurfaceSingularity(f"point {tuple(x)} coincides with an electrode")


def pair_potential(
    x,
    pair: ElectrodePair,
    model: SphereModel,
    terms: int | None = None,
) -> float:
    """Potential of one pair at an interior point, in volts.

    With ``terms=None`` the closed form is evaluated (production path).
    With an integer ``terms`` the Legendre series is truncated after
    that many terms instead; the two agree to near machine precision
    for any interior point, which the test suite verifies.
    """
    x = np.asarray(x, dtype=float)
    _check_point(x, pair, model)
    if terms is None:
        return float(potential_points(x[None, :], pair, model)[0])
    if terms < 1:
        raise ValueError(f"terms must be >= 1, got {terms}")

    r = float(np.linalg.norm(x))
    t = r / model.radius
    if r == 0.0:
        return 0.0
    scale = pair.current / (4.0 * math.pi * model.conductivity * model.radius)
    n = np.arange(1, terms + 1, dtype=float)
    coeffs = np.zeros(terms + 1)
    coeffs[1:] = (2.0 * n + 1.0) / n * t**n
    total = 0.0
    for elec, sign in zip(pair_sites_cartesian(pair, model), (1.0, -1.0)):
        u = float(x @ elec) / (r * model.radius)
        total += sign * float(legval(u, coeffs))
    return scale * total


def pair_efield(x, pair: ElectrodePair, model: SphereModel) -> np.ndarray:
    """Electric field E = -grad V of one pair at an interior point, in V/m."""
    x = np.asarray(x, dtype=float)
    _check_point(x, pair, model)
    return efield_points(x[None, :], pair, model)[0]


def field_sample(x, pair: ElectrodePair, model: SphereModel) -> FieldSample:
    """Potential, field and current density of one pair at a point."""
    x = np.asarray(x, dtype=float)
    v = pair_potential(x, pair, model)
    e = pair_efield(x, pair, model)
    j = model.conductivity * e
    return FieldSample(
        point=(float(x[0]), float(x[1]), float(x[2])),
        potential=v,
        e_field=(float(e[0]), float(e[1]), float(e[2])),
        current_density=(float(j[0]), float(j[1]), float(j[2])),
    )


@dataclass(frozen=True)
class PlaneGrid:
    """Fields of both pairs sampled on an axis-aligned plane raster.

    The raster covers [-R, R] x [-R, R] with ``resolution`` samples per
    axis.  ``plane`` is "xy" (z = offset) or "xz" (y = offset).  Arrays
    are indexed [i_row, i_col] where the column axis is always x and
    the row axis is the second plane coordinate (y or z), both
    ascending.  ``mask`` is True for points strictly inside the sphere
    and away from electrode singularities; field values outside the
    mask are NaN.
    """

    plane: str
    offset: float
    resolution: int
    axis_x: np.ndarray
    axis_v: np.ndarray
    mask: np.ndarray
    e1: np.ndarray  # (n, n, 3) field of pair_right
    e2: np.ndarray  # (n, n, 3) field of pair_left
    v1: np.ndarray  # (n, n) potential of pair_right
    v2: np.ndarray  # (n, n) potential of pair_left

    def points(self) -> np.ndarray:
        """(n, n, 3) cartesian coordinates of every raster node."""
        n = self.resolution
        cols, rows = np.meshgrid(self.axis_x, self.axis_v)
        flat = np.empty((n, n, 3))
        if self.plane == "xy":
            flat[..., 0] = cols
            flat[..., 1] = rows
            flat[..., 2] = self.offset
        else:
            flat[..., 0] = cols
            flat[..., 1] = self.offset
            flat[..., 2] = rows
        return flat


def plane_points(
    plane: str, resolution: int, model: SphereModel, offset: float = 0.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Axis vectors and (n, n, 3) node coordinates for a sampling plane."""
    if plane not in ("xy", "xz"):
        raise ValueError(f'plane must be "xy" or "xz", got {plane!r}')
    if resolution < 16:
        raise ValueError(f"resolution must be >= 16, got {resolution}")
    axis = np.linspace(-model.radius, model.radius, resolution)
    cols, rows = np.meshgrid(axis, axis)
    pts = np.empty((resolution, resolution, 3))
    if plane == "xy":
        pts[..., 0] = cols
        pts[..., 1] = rows
        pts[..., 2] = offset
    else:
        pts[..., 0] = cols
        pts[..., 1] = offset
        pts[..., 2] = rows
    return axis, axis.copy(), pts


def sample_plane(
    montage: Montage,
    model: SphereModel,
    plane: str = "xy",
    resolution: int = 101,
    offset: float = 0.0,
) -> PlaneGrid:
    """Sample E1 (right pair) and E2 (left pair) on a plane raster.

    The pairs are never summed; each point carries both vector fields.
    Raster nodes outside the sphere, or within the singularity radius
    of an electrode, are masked out rather than raising.

    Raises
    ------
    EmptyGrid
        If the plane at ``offset`` misses the sphere interior entirely.
    """
    axis_x, axis_v, pts = plane_points(plane, resolution, model, offset)
    flat = pts.reshape(-1, 3)
    inside = np.einsum("ij,ij->i", flat, flat) < model.radius**2

    eps = SINGULARITY_RADIUS_FACTOR * model.radius
    for pair in (montage.pair_right, montage.pair_left):
        for elec in pair_sites_cartesian(pair, model):
            inside &= np.linalg.norm(flat - elec, axis=1) >= eps

    if not inside.any():
        raise EmptyGrid(
            f"plane {plane} at offset {offset} has no interior sample "
            f"(radius {model.radius})"
        )

    n = resolution
    e1 = np.full((n * n, 3), np.nan)
    e2 = np.full((n * n, 3), np.nan)
    v1 = np.full(n * n, np.nan)
    v2 = np.full(n * n, np.nan)
    pin = flat[inside]
    e1[inside] = efield_points(pin, montage.pair_right, model)
    e2[inside] = efield_points(pin, montage.pair_left, model)
    v1[inside] = potential_points(pin, montage.pair_right, model)
    v2[inside] = potential_points(pin, montage.pair_left, model)
    return PlaneGrid(
        plane=plane,
        offset=float(offset),
        resolution=n,
        axis_x=axis_x,
        axis_v=axis_v,
        mask=inside.reshape(n, n),
        e1=e1.reshape(n, n, 3),
        e2=e2.reshape(n, n, 3),
        v1=v1.reshape(n, n),
        v2=v2.reshape(n, n),
    )
