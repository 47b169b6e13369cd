"""Sphere geometry, electrode placement, and target-plane segmentation.

Coordinate conventions used throughout the package:

* ``phi`` is the polar angle in degrees measured from the +z axis
  (0 = top pole, 90 = equator, 180 = bottom pole).
* ``theta`` is the azimuth in degrees measured from the +x axis in the
  xy plane, wrapped to (-180, 180].
* The stimulation area is read off the xy plane (z = 0) and the
  stimulation depth off the xz plane (y = 0).

The xy disc is split into nine cells (three equal-width bands of the
bounding square per axis) and the xz disc into four depth bands by
z thresholds.  Cell and band edges are declared conventions, see
:class:`DepthBands` for how the depth edges were calibrated.
"""

import math
from dataclasses import dataclass, field

__all__ = [
    "SphereModel",
    "ElectrodeSite",
    "ElectrodePair",
    "Montage",
    "RegionLabel",
    "DepthLabel",
    "DepthBands",
    "GeometryError",
    "PhiOffLimits",
    "DegenerateAlpha",
    "OutsideSphere",
    "PHI_PLACEMENT_MAX",
    "wrap_degrees",
    "make_symmetric_montage",
    "site_to_cartesian",
    "classify_region_xy",
    "classify_depth_xz",
    "montage_to_dict",
    "montage_from_dict",
]

# Electrodes cannot be placed below this polar angle (lower skull area).
PHI_PLACEMENT_MAX = 135.0


class GeometryError(ValueError):
    """Base class for placement and classification errors."""


class PhiOffLimits(GeometryError):
    """Polar angle in the off-limit lower cap (phi > 135 degrees)."""


class DegenerateAlpha(GeometryError):
    """Within-pair azimuthal separation outside (0, 180) degrees."""


class OutsideSphere(GeometryError):
    """Point lies outside the sphere."""


def wrap_degrees(angle: float) -> float:
    """Wrap an angle in degrees to (-180, 180]."""
    a = math.fmod(angle, 360.0)
    if a > 180.0:
        a -= 360.0
    elif a <= -180.0:
        a += 360.0
    return a


@dataclass(frozen=True)
class SphereModel:
    """Homogeneous conducting ball: radius (length units) and conductivity (S/m)."""

    radius: float = 1.0
    conductivity: float = 0.33

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not self.conductivity > 0:
            raise ValueError(f"conductivity must be positive, got {self.conductivity}")


@dataclass(frozen=True)
class ElectrodeSite:
    """Point electrode location on the sphere surface, in degrees."""

    phi: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.phi <= 180.0:
            raise GeometryError(f"phi must be in [0, 180], got {self.phi}")
        object.__setattr__(self, "theta", wrap_degrees(self.theta))

    def cartesian(self, model: SphereModel) -> tuple[float, float, float]:
        return site_to_cartesian(self, model)


@dataclass(frozen=True)
class ElectrodePair:
    """Anode/cathode pair driven with a given current at a carrier frequency.

    The frequency is a label only: fields are quasi-static, so it never
    enters the field solve.  It distinguishes the two pairs of a montage.
    """

    anode: ElectrodeSite
    cathode: ElectrodeSite
    current: float
    frequency: float

    def __post_init__(self):
        if self.anode == self.cathode:
            raise GeometryError("anode and cathode must be distinct sites")
        if not self.current > 0:
            raise GeometryError(f"pair current must be positive, got {self.current}")
        if not self.frequency > 0:
            raise GeometryError(f"frequency must be positive, got {self.frequency}")

    @property
    def alpha(self) -> float:
        """Azimuthal separation between the two members, in (0, 360) folded to [0, 180]."""
        return abs(wrap_degrees(self.anode.theta - self.cathode.theta))


@dataclass(frozen=True)
class Montage:
    """Two electrode pairs at different carrier frequencies.

    ``pair_right`` carries current I_R, ``pair_left`` carries I_L; the
    current ratio I_L / I_R steers the focus laterally.  For montages
    built by :func:`make_symmetric_montage` the generating parameters
    are kept in ``parameters`` so they can round-trip through JSON.
    """

    pair_right: ElectrodePair
    pair_left: ElectrodePair
    parameters: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.pair_right.frequency == self.pair_left.frequency:
            raise GeometryError("pair frequencies must differ")
        sites = [
            self.pair_right.anode,
            self.pair_right.cathode,
            self.pair_left.anode,
            self.pair_left.cathode,
        ]
        if len(set(sites)) != 4:
            raise GeometryError("all four electrode sites must be distinct")

    @property
    def current_ratio(self) -> float:
        """I_L / I_R."""
        return self.pair_left.current / self.pair_right.current

    @property
    def alpha_right(self) -> float:
        return self.pair_right.alpha

    @property
    def alpha_left(self) -> float:
        return self.pair_left.alpha

    def sites(self) -> list[ElectrodeSite]:
        return [
            self.pair_right.anode,
            self.pair_right.cathode,
            self.pair_left.anode,
            self.pair_left.cathode,
        ]

    def scaled(self, factor: float) -> "Montage":
        """Same geometry with both currents multiplied by ``factor``."""
        if not factor > 0:
            raise GeometryError("scale factor must be positive")
        params = dict(self.parameters) if self.parameters else None
        if params is not None:
            params["i_right"] = self.pair_right.current * factor
            params["i_left"] = self.pair_left.current * factor
        return Montage(
            pair_right=ElectrodePair(
                self.pair_right.anode,
                self.pair_right.cathode,
                self.pair_right.current * factor,
                self.pair_right.frequency,
            ),
            pair_left=ElectrodePair(
                self.pair_left.anode,
                self.pair_left.cathode,
                self.pair_left.current * factor,
                self.pair_left.frequency,
            ),
            parameters=params,
        )


@dataclass(frozen=True, order=True)
class RegionLabel:
    """One of the nine xy-plane target cells, R_11 (top left) .. R_33 (bottom right)."""

    row: int
    col: int

    def __post_init__(self):
        if self.row not in (1, 2, 3) or self.col not in (1, 2, 3):
            raise GeometryError(f"region indices must be in 1..3, got ({self.row}, {self.col})")

    @property
    def name(self) -> str:
        return f"R{self.row}{self.col}"

    @classmethod
    def from_name(cls, name: str) -> "RegionLabel":
        if len(name) != 3 or name[0] != "R" or not name[1:].isdigit():
            raise GeometryError(f"bad region name {name!r}")
        return cls(int(name[1]), int(name[2]))


@dataclass(frozen=True, order=True)
class DepthLabel:
    """One of the four xz-plane depth bands, D1 (surface) .. D4 (off-limit)."""

    band: int

    def __post_init__(self):
        if self.band not in (1, 2, 3, 4):
            raise GeometryError(f"depth band must be in 1..4, got {self.band}")

    @property
    def name(self) -> str:
        return f"D{self.band}"

    @classmethod
    def from_name(cls, name: str) -> "DepthLabel":
        if len(name) != 2 or name[0] != "D" or not name[1].isdigit():
            raise GeometryError(f"bad depth name {name!r}")
        return cls(int(name[1]))


@dataclass(frozen=True)
class DepthBands:
    """Depth band edges as fractions of the radius.

    D1 = [upper, 1], D2 = [mid, upper), D3 = [lower, mid), D4 = [-1, lower).

    The defaults are calibrated against the solver itself: with a
    symmetric montage the xz-plane envelope peak sits at z/R ~ 0.74 for
    electrodes at phi = 45 and z/R ~ -0.74 at the placement limit
    phi = 135, independent of the pair separation.  Edges at 0.71 and
    -0.80 therefore map electrode elevations (0, 45) -> D1,
    (45, 90) -> D2 and (90, 135) -> D3, which is the intended reading
    of the depth guideline.  Pass different edges to restore plain
    z-quarters or any other convention.
    """

    upper: float = 0.71
    mid: float = 0.0
    lower: float = -0.80

    def __post_init__(self):
        if not -1.0 < self.lower < self.mid < self.upper < 1.0:
            raise GeometryError(
                f"depth edges must satisfy -1 < lower < mid < upper < 1, "
                f"got ({self.lower}, {self.mid}, {self.upper})"
            )

    def classify(self, z_over_r: float) -> DepthLabel:
        if z_over_r >= self.upper:
            return DepthLabel(1)
        if z_over_r >= self.mid:
            return DepthLabel(2)
        if z_over_r >= self.lower:
            return DepthLabel(3)
        return DepthLabel(4)


DEFAULT_DEPTH_BANDS = DepthBands()


def site_to_cartesian(site: ElectrodeSite, model: SphereModel) -> tuple[float, float, float]:
    """Cartesian surface point (R sin(phi) cos(theta), R sin(phi) sin(theta), R cos(phi))."""
    p = math.radians(site.phi)
    t = math.radians(site.theta)
    r = model.radius
    return (r * math.sin(p) * math.cos(t), r * math.sin(p) * math.sin(t), r * math.cos(p))


def make_symmetric_montage(
    phi: float,
    alpha: float,
    psi: float = 0.0,
    i_left: float = 1.0,
    i_right: float = 1.0,
    f_right: float = 2000.0,
    f_left: float = 2010.0,
) -> Montage:
    """Build the symmetric two-pair montage used everywhere in this package.

    All four electrodes sit at polar angle ``phi``.  The right pair
    occupies azimuths psi +/- alpha/2, the left pair the diametrically
    opposite sector (psi + 180) -/+ alpha/2, so the montage maps onto
    itself under the mirror that swaps the two pairs.  ``alpha`` is the
    azimuthal separation within a pair.

    Raises
    ------
    PhiOffLimits
        If ``phi`` is above the 135-degree placement limit (or outside
        [0, 180] entirely).
    DegenerateAlpha
        If ``alpha`` is outside (0, 180); at 0 the pair members collide,
        at 180 the two pairs collide with each other.
    """
    if not 0.0 <= phi <= 180.0:
        raise PhiOffLimits(f"phi must be in [0, {PHI_PLACEMENT_MAX}], got {phi}")
    if phi > PHI_PLACEMENT_MAX:
        raise PhiOffLimits(
            f"phi={phi} is in the off-limit placement band ({PHI_PLACEMENT_MAX}, 180]"
        )
    if not 0.0 < alpha < 180.0:
        raise DegenerateAlpha(f"alpha must be in (0, 180), got {alpha}")
    if not (i_left > 0 and i_right > 0):
        raise GeometryError("currents must be positive")

    half = alpha / 2.0
    pair_right = ElectrodePair(
        anode=ElectrodeSite(phi, wrap_degrees(psi + half)),
        cathode=ElectrodeSite(phi, wrap_degrees(psi - half)),
        current=i_right,
        frequency=f_right,
    )
    pair_left = ElectrodePair(
        anode=ElectrodeSite(phi, wrap_degrees(psi + 180.0 - half)),
        cathode=ElectrodeSite(phi, wrap_degrees(psi + 180.0 + half)),
        current=i_left,
        frequency=f_left,
    )
    params = {
        "phi": float(phi),
        "alpha": float(alpha),
        "psi": float(psi),
        "i_left": float(i_left),
        "i_right": float(i_right),
        "f1": float(f_right),
        "f2": float(f_left),
    }
    return Montage(pair_right=pair_right, pair_left=pair_left, parameters=params)


def _check_inside(p, model: SphereModel) -> None:
    r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
    if r2 > model.radius * model.radius * (1.0 + 1e-12):
        raise OutsideSphere(f"point {tuple(p)} lies outside the sphere of radius {model.radius}")


def classify_region_xy(p, model: SphereModel) -> RegionLabel:
    """Classify an xy-plane point into one of the nine target cells.

    Rows run top to bottom (row 1: y > R/3, row 3: y < -R/3), columns
    left to right (col 1: x < -R/3, col 3: x > R/3); the middle band is
    closed on both edges, so boundary points land in row/col 2.
    """
    _check_inside(p, model)
    third = model.radius / 3.0
    x, y = p[0], p[1]
    row = 1 if y > third else (3 if y < -third else 2)
    col = 1 if x < -third else (3 if x > third else 2)
    return RegionLabel(row, col)


def classify_depth_xz(p, model: SphereModel, bands: DepthBands = DEFAULT_DEPTH_BANDS) -> DepthLabel:
    """Classify a point into a depth band by its z coordinate (see DepthBands)."""
    _check_inside(p, model)
    return bands.classify(p[2] / model.radius)


def _site_to_dict(site: ElectrodeSite) -> dict:
    return {"phi": site.phi, "theta": site.theta}


def _pair_to_dict(pair: ElectrodePair) -> dict:
    return {
        "anode": _site_to_dict(pair.anode),
        "cathode": _site_to_dict(pair.cathode),
        "current": pair.current,
        "frequency": pair.frequency,
    }


def montage_to_dict(montage: Montage) -> dict:
    """JSON-ready montage description: explicit four-site form, plus the
    symmetric parameter form when the montage was built from one."""
    out = {
        "pairs": {
            "right": _pair_to_dict(montage.pair_right),
            "left": _pair_to_dict(montage.pair_left),
        }
    }
    if montage.parameters is not None:
        out["parameters"] = dict(montage.parameters)
    return out


_SYMMETRIC_KEYS = {"phi", "alpha", "psi", "i_left", "i_right", "f1", "f2"}
_SYMMETRIC_DEFAULTS = {"psi": 0.0, "i_left": 1.0, "i_right": 1.0, "f1": 2000.0, "f2": 2010.0}


def _pair_from_dict(d: dict) -> ElectrodePair:
    for key in ("anode", "cathode", "current", "frequency"):
        if key not in d:
            raise GeometryError(f"pair description missing {key!r}")
    return ElectrodePair(
        anode=ElectrodeSite(float(d["anode"]["phi"]), float(d["anode"]["theta"])),
        cathode=ElectrodeSite(float(d["cathode"]["phi"]), float(d["cathode"]["theta"])),
        current=float(d["current"]),
        frequency=float(d["frequency"]),
    )


def montage_from_dict(data: dict) -> Montage:
    """Parse a montage from either the symmetric parameter form
    ({"phi", "alpha", "psi", "i_left", "i_right", "f1", "f2"}) or the
    explicit four-site form ({"pairs": {"right": ..., "left": ...}}).

    Unknown keys are rejected so that typos fail loudly.
    """
    if not isinstance(data, dict):
        raise GeometryError(f"montage must be a mapping, got {type(data).__name__}")
    if "pairs" in data:
        extra = set(data) - {"pairs", "parameters"}
        if extra:
            raise GeometryError(f"unknown montage keys: {sorted(extra)}")
        pairs = data["pairs"]
        if not isinstance(pairs, dict) or set(pairs) != {"right", "left"}:
            raise GeometryError('montage "pairs" must have exactly "right" and "left"')
        return Montage(
            pair_right=_pair_from_dict(pairs["right"]),
            pair_left=_pair_from_dict(pairs["left"]),
            parameters=data.get("parameters"),
        )

    extra = set(data) - _SYMMETRIC_KEYS
    if extra:
        raise GeometryError(f"unknown montage keys: {sorted(extra)}")
    if "phi" not in data or "alpha" not in data:
        raise GeometryError('symmetric montage requires at least "phi" and "alpha"')
    merged = {**_SYMMETRIC_DEFAULTS, **data}
    return make_symmetric_montage(
        phi=float(merged["phi"]),
        alpha=float(merged["alpha"]),
        psi=float(merged["psi"]),
        i_left=float(merged["i_left"]),
        i_right=float(merged["i_right"]),
        f_right=float(merged["f1"]),
        f_left=float(merged["f2"]),
    )
