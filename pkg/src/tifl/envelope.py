"""Temporal-interference modulation envelope.

Two sinusoidal fields E1 cos(2 pi f1 t) and E2 cos(2 pi f2 t) with
nearby carrier frequencies beat at |f1 - f2|.  Along a unit direction n
the peak-to-trough amplitude of the beat envelope is

    | |(E1 + E2) . n| - |(E1 - E2) . n| |  =  2 min(|E1 . n|, |E2 . n|)

and the maximum over all directions has a closed form: after relabeling
so |E1| >= |E2| and flipping the sign of E2 if the angle between them
is obtuse (the envelope is invariant to both),

    2 |E2|                              if |E2| <  |E1| cos(gamma)
    2 |E2 x (E1 - E2)| / |E1 - E2|      otherwise

where gamma is the angle between the fields.  Two independent
brute-force oracles live alongside: a direction-sampling maximum over a
Fibonacci lattice and a time-domain beat extraction; the test suite
uses them to pin the closed form down.
"""

import math
from dataclasses import dataclass

import numpy as np

from .fields import PlaneGrid, sample_plane
from .geometry import Montage, SphereModel

__all__ = [
    "EnvelopeError",
    "NonUnitDirection",
    "DegenerateFrequencies",
    "EmptyMap",
    "EnvelopePoint",
    "EnvelopeMap",
    "WIDE_ANGLE_DEGREES",
    "envelope_along",
    "envelope_max",
    "envelope_max_many",
    "fibonacci_directions",
    "envelope_max_sampled",
    "time_domain_envelope",
    "envelope_plane",
    "envelope_point",
]

# Beyond this inter-field angle the two-branch decomposition is often
# treated as out of scope; the formula itself stays exact, so map points
# are only flagged, never altered.
WIDE_ANGLE_DEGREES = 45.0


class EnvelopeError(ValueError):
    """Base class for envelope evaluation errors."""


class NonUnitDirection(EnvelopeError):
    """Direction vector is not unit length."""


class DegenerateFrequencies(EnvelopeError):
    """Carrier frequencies coincide, so there is no beat."""


class EmptyMap(EnvelopeError):
    """Envelope map has no interior samples."""


@dataclass(frozen=True)
class EnvelopePoint:
    """Envelope evaluated at one point, optionally along a direction."""

    point: tuple[float, float, float]
    e1: tuple[float, float, float]
    e2: tuple[float, float, float]
    am_max: float
    am_along: float | None = None


def envelope_along(e1, e2, n) -> float:
    """Beat-envelope amplitude along unit direction ``n``, in V/m.

    Returns | |(e1+e2).n| - |(e1-e2).n| |, which is algebraically
    2 min(|e1.n|, |e2.n|).
    """
    n = np.asarray(n, dtype=float)
    if abs(float(n @ n) - 1.0) > 2e-9:
        raise NonUnitDirection(f"|n| = {float(np.linalg.norm(n))!r} is not 1")
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    a = float((e1 + e2) @ n)
    b = float((e1 - e2) @ n)
    return abs(abs(a) - abs(b))


def _envelope_max_arrays(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """Vectorized closed-form maximal envelope for (m, 3) field arrays."""
    n1 = np.linalg.norm(e1, axis=-1)
    n2 = np.linalg.norm(e2, axis=-1)
    swap = n2 > n1
    big = np.where(swap[..., None], e2, e1)
    small = np.where(swap[..., None], e1, e2)
    nb = np.where(swap, n1, n2)
    na = np.where(swap, n2, n1)

    dot = np.einsum("...i,...i->...", big, small)
    small = np.where((dot < 0.0)[..., None], -small, small)
    dot = np.abs(dot)

    out = np.zeros(n1.shape)
    nonzero = nb > 0.0
    # cos(gamma) with both norms positive; na >= nb > 0 on this mask
    cosg = np.zeros_like(na)
    cosg[nonzero] = dot[nonzero] / (na[nonzero] * nb[nonzero])

    branch1 = nonzero & (nb < na * cosg)
    out[branch1] = 2.0 * nb[branch1]

    branch2 = nonzero & ~branch1
    if branch2.any():
        diff = big[branch2] - small[branch2]
        dn = np.linalg.norm(diff, axis=-1)
        cross = np.cross(small[branch2], diff)
        vals = np.empty(dn.shape)
        # equal fields: the difference vanishes and the envelope is 2|e2|
        degen = dn <= 1e-12 * na[branch2]
        vals[degen] = 2.0 * nb[branch2][degen]
        vals[~degen] = 2.0 * np.linalg.norm(cross[~degen], axis=-1) / dn[~degen]
        out[branch2] = vals
    return out


def envelope_max(e1, e2) -> float:
    """Maximal beat-envelope amplitude over all directions, in V/m.

    Zero vectors are allowed and give 0 (a single carrier does not
    beat).  Swapping the fields or flipping the sign of either leaves
    the result unchanged.
    """
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    return float(_envelope_max_arrays(e1[None, :], e2[None, :])[0])


def envelope_max_many(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """Closed-form maximal envelope applied along the leading axes of
    two equally shaped (..., 3) field arrays.  NaN rows give NaN."""
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    bad = ~(np.isfinite(e1).all(axis=-1) & np.isfinite(e2).all(axis=-1))
    out = _envelope_max_arrays(np.where(bad[..., None], 0.0, e1), np.where(bad[..., None], 0.0, e2))
    out[bad] = np.nan
    return out


def fibonacci_directions(count: int) -> np.ndarray:
    """(count, 3) quasi-uniform unit vectors on the golden-angle lattice."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    i = np.arange(count, dtype=float)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    z = 1.0 - 2.0 * (i + 0.5) / count
    rho = np.sqrt(1.0 - z * z)
    ang = golden * i
    return np.column_stack([rho * np.cos(ang), rho * np.sin(ang), z])


def envelope_max_sampled(e1, e2, directions: np.ndarray | int = 100_000) -> float:
    """Brute-force maximal envelope: max of ``envelope_along`` over a
    direction lattice.  ``directions`` is either a prebuilt (m, 3) array
    or a lattice size.  Used as the independent arbiter for
    :func:`envelope_max`."""
    if isinstance(directions, (int, np.integer)):
        directions = fibonacci_directions(int(directions))
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    d1 = np.abs(directions @ e1)
    d2 = np.abs(directions @ e2)
    return float(2.0 * np.minimum(d1, d2).max())


def time_domain_envelope(
    a1: float, a2: float, f1: float, f2: float, samples: int = 20_000
) -> float:
    """Beat-envelope amplitude extracted by brute force in the time domain.

    Samples the analytic-signal magnitude |a1 e^{i 2 pi f1 t} +
    a2 e^{i 2 pi f2 t}| over one beat period and returns max - min,
    which for any scalar amplitudes equals 2 min(|a1|, |a2|).
    """
    if f1 == f2:
        raise DegenerateFrequencies(f"f1 == f2 == {f1}")
    if samples < 10_000:
        raise ValueError(f"need >= 10000 samples per beat period, got {samples}")
    beat = 1.0 / abs(f1 - f2)
    t = np.linspace(0.0, beat, samples, endpoint=False)
    signal = a1 * np.exp(2j * math.pi * f1 * t) + a2 * np.exp(2j * math.pi * f2 * t)
    mag = np.abs(signal)
    return float(mag.max() - mag.min())


@dataclass(frozen=True)
class EnvelopeMap:
    """Maximal-envelope raster on a sampling plane.

    ``values`` holds the maximal envelope per node (NaN outside the
    mask) and ``wide_angle`` flags nodes where the angle between the two
    carrier fields is at least 45 degrees, outside the comfort zone of
    the two-branch decomposition (the computed envelope is still exact
    there; the flag is diagnostic only).
    """

    grid: PlaneGrid
    values: np.ndarray
    wide_angle: np.ndarray

    @property
    def plane(self) -> str:
        return self.grid.plane

    @property
    def resolution(self) -> int:
        return self.grid.resolution

    @property
    def mask(self) -> np.ndarray:
        return self.grid.mask

    def peak(self) -> float:
        if not self.mask.any():
            raise EmptyMap("envelope map has no interior samples")
        return float(np.nanmax(self.values))


def _wide_angle_mask(grid: PlaneGrid) -> np.ndarray:
    n1 = np.linalg.norm(grid.e1, axis=-1)
    n2 = np.linalg.norm(grid.e2, axis=-1)
    dot = np.abs(np.einsum("...i,...i->...", grid.e1, grid.e2))
    with np.errstate(invalid="ignore", divide="ignore"):
        cosg = np.where((n1 > 0) & (n2 > 0), dot / (n1 * n2), 1.0)
    return grid.mask & (cosg < math.cos(math.radians(WIDE_ANGLE_DEGREES)))


def envelope_plane(
    montage: Montage,
    model: SphereModel,
    plane: str = "xy",
    resolution: int = 101,
    offset: float = 0.0,
) -> EnvelopeMap:
    """Maximal envelope of a montage on a plane raster."""
    grid = sample_plane(montage, model, plane=plane, resolution=resolution, offset=offset)
    values = envelope_max_many(grid.e1, grid.e2)
    return EnvelopeMap(grid=grid, values=values, wide_angle=_wide_angle_mask(grid))


def envelope_point(x, montage: Montage, model: SphereModel, n=None) -> EnvelopePoint:
    """Envelope of a montage at a single interior point."""
    from .fields import pair_efield

    e1 = pair_efield(x, montage.pair_right, model)
    e2 = pair_efield(x, montage.pair_left, model)
    along = None if n is None else envelope_along(e1, e2, n)
    x = np.asarray(x, dtype=float)
    return EnvelopePoint(
        point=(float(x[0]), float(x[1]), float(x[2])),
        e1=tuple(float(v) for v in e1),
        e2=tuple(float(v) for v in e2),
        am_max=envelope_max(e1, e2),
        am_along=along,
    )
