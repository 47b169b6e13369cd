"""tifl: simulate and plan temporal-interference stimulation on a
homogeneous spherical head model.

Per-pair quasi-static fields come from a closed-form Legendre-series
solution (with a finite-difference solver as an independent check), the
beat-envelope math follows the two-branch maximal-envelope formula, and
on top of those sit parameter sweeps that reproduce the classic
placement guidelines plus an inverse planner with safety limits.
"""

from .envelope import (
    envelope_along,
    envelope_max,
    envelope_max_sampled,
    envelope_plane,
    fibonacci_directions,
    time_domain_envelope,
)
from .fields import pair_efield, pair_potential, sample_plane
from .geometry import (
    DepthBands,
    DepthLabel,
    ElectrodePair,
    ElectrodeSite,
    Montage,
    RegionLabel,
    SphereModel,
    classify_depth_xz,
    classify_region_xy,
    make_symmetric_montage,
    site_to_cartesian,
)
from .laplace import solve_laplace_grid

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "SphereModel",
    "ElectrodeSite",
    "ElectrodePair",
    "Montage",
    "RegionLabel",
    "DepthLabel",
    "DepthBands",
    "make_symmetric_montage",
    "site_to_cartesian",
    "classify_region_xy",
    "classify_depth_xz",
    "pair_potential",
    "pair_efield",
    "sample_plane",
    "solve_laplace_grid",
    "envelope_along",
    "envelope_max",
    "envelope_max_sampled",
    "envelope_plane",
    "fibonacci_directions",
    "time_domain_envelope",
]
