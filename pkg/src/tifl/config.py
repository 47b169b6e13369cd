"""Run configuration: one structured config file plus flag overrides.

Config files are YAML (JSON is a subset, so `.json` files parse with
the same loader).  Every section rejects unknown keys so typos fail
loudly instead of silently running defaults.
"""

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .geometry import (
    DepthLabel,
    GeometryError,
    Montage,
    RegionLabel,
    SphereModel,
    montage_from_dict,
)
from .planner import PlanRequest, SafetyLimits, SearchEffort

__all__ = ["ConfigError", "RunConfig", "load_config"]


class ConfigError(ValueError):
    """Config file is malformed or inconsistent."""


def _check_keys(mapping: dict, allowed: set, where: str) -> None:
    extra = set(mapping) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(extra)}")


def _model_from(mapping: dict) -> SphereModel:
    _check_keys(mapping, {"radius", "conductivity"}, "model")
    try:
        return SphereModel(
            radius=float(mapping.get("radius", 1.0)),
            conductivity=float(mapping.get("conductivity", 0.33)),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _limits_from(mapping: dict) -> SafetyLimits:
    _check_keys(
        mapping, {"max_field", "max_current_per_pair", "max_total_current"}, "plan.limits"
    )
    try:
        return SafetyLimits(
            max_field=float(mapping.get("max_field", SafetyLimits.max_field)),
            max_current_per_pair=float(
                mapping.get("max_current_per_pair", SafetyLimits.max_current_per_pair)
            ),
            max_total_current=float(
                mapping.get("max_total_current", SafetyLimits.max_total_current)
            ),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _effort_from(mapping: dict) -> SearchEffort:
    _check_keys(
        mapping,
        {"phi_grid", "alpha_grid", "psi_grid", "ratio_grid", "refine_evals", "raster_resolution"},
        "plan.effort",
    )
    defaults = SearchEffort()
    try:
        return SearchEffort(
            phi_grid=tuple(float(v) for v in mapping.get("phi_grid", defaults.phi_grid)),
            alpha_grid=tuple(float(v) for v in mapping.get("alpha_grid", defaults.alpha_grid)),
            psi_grid=tuple(float(v) for v in mapping.get("psi_grid", defaults.psi_grid)),
            ratio_grid=tuple(float(v) for v in mapping.get("ratio_grid", defaults.ratio_grid)),
            refine_evals=int(mapping.get("refine_evals", defaults.refine_evals)),
            raster_resolution=int(mapping.get("raster_resolution", defaults.raster_resolution)),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _target_from(value):
    if isinstance(value, (list, tuple)) and len(value) == 3:
        return tuple(float(v) for v in value)
    if isinstance(value, dict):
        _check_keys(value, {"region", "depth"}, "plan.target")
        try:
            return (
                RegionLabel.from_name(str(value["region"])),
                DepthLabel.from_name(str(value["depth"])),
            )
        except (KeyError, GeometryError) as err:
            raise ConfigError(f"bad cell target: {err}") from err
    raise ConfigError(f"plan.target must be [x, y, z] or {{region, depth}}, got {value!r}")


def _plan_from(mapping: dict) -> PlanRequest:
    _check_keys(
        mapping,
        {"target", "budget", "limits", "effort", "focality_goal", "exclusion_radius",
         "min_current"},
        "plan",
    )
    if "target" not in mapping:
        raise ConfigError("plan section requires a target")
    defaults = PlanRequest(target=(0.0, 0.0, 0.0))
    try:
        return PlanRequest(
            target=_target_from(mapping["target"]),
            total_current_budget=float(mapping.get("budget", defaults.total_current_budget)),
            safety_limits=_limits_from(mapping.get("limits", {}) or {}),
            search_effort=_effort_from(mapping.get("effort", {}) or {}),
            focality_goal=float(mapping.get("focality_goal", defaults.focality_goal)),
            exclusion_radius=float(mapping.get("exclusion_radius", defaults.exclusion_radius)),
            min_current=float(mapping.get("min_current", defaults.min_current)),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


_TOP_KEYS = {
    "model",
    "montage",
    "scenario",
    "plan",
    "resolution",
    "tau",
    "plane",
    "out",
    "formats",
    "host",
    "port",
    "phi_grid",
    "alpha_grid",
    "ratio_grid",
}


@dataclass
class RunConfig:
    """Everything a CLI command needs, parsed and validated."""

    model: SphereModel = field(default_factory=SphereModel)
    montage: Montage | None = None
    scenario: str | None = None
    plan_request: PlanRequest | None = None
    resolution: int = 101
    tau: float = 0.75
    plane: str = "both"  # xy | xz | both
    out_dir: Path = Path("out")
    formats: tuple = ("csv", "json", "pgm")
    host: str = "127.0.0.1"
    port: int = 8754
    phi_grid: tuple | None = None
    alpha_grid: tuple | None = None
    ratio_grid: tuple | None = None

    @classmethod
    def from_mapping(cls, raw: dict) -> "RunConfig":
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
        _check_keys(raw, _TOP_KEYS, "config")

        cfg = cls()
        cfg.model = _model_from(raw.get("model", {}) or {})
        if "montage" in raw:
            try:
                cfg.montage = montage_from_dict(raw["montage"])
            except GeometryError as err:
                raise ConfigError(f"bad montage: {err}") from err
        if "scenario" in raw:
            scenario = str(raw["scenario"])
            if scenario not in ("a", "b", "c"):
                raise ConfigError(f"scenario must be one of a, b, c; got {scenario!r}")
            cfg.scenario = scenario
        if "plan" in raw:
            cfg.plan_request = _plan_from(raw["plan"] or {})
        cfg.resolution = int(raw.get("resolution", cfg.resolution))
        if not 16 <= cfg.resolution <= 1025:
            raise ConfigError(f"resolution must be in [16, 1025], got {cfg.resolution}")
        cfg.tau = float(raw.get("tau", cfg.tau))
        if not 0.0 < cfg.tau < 1.0:
            raise ConfigError(f"tau must be in (0, 1), got {cfg.tau}")
        plane = str(raw.get("plane", cfg.plane))
        if plane not in ("xy", "xz", "both"):
            raise ConfigError(f'plane must be "xy", "xz" or "both", got {plane!r}')
        cfg.plane = plane
        cfg.out_dir = Path(raw.get("out", cfg.out_dir))
        formats = raw.get("formats", list(cfg.formats))
        if isinstance(formats, str):
            formats = [formats]
        for fmt in formats:
            if fmt not in ("csv", "json", "pgm"):
                raise ConfigError(f"unknown format {fmt!r}")
        cfg.formats = tuple(formats)
        cfg.host = str(raw.get("host", cfg.host))
        cfg.port = int(raw.get("port", cfg.port))
        for grid_key in ("phi_grid", "alpha_grid", "ratio_grid"):
            if grid_key in raw:
                values = tuple(float(v) for v in raw[grid_key])
                if not values:
                    raise ConfigError(f"{grid_key} must be non-empty")
                setattr(cfg, grid_key, values)
        return cfg

    @property
    def planes(self) -> tuple:
        return ("xy", "xz") if self.plane == "both" else (self.plane,)


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Load a config file (YAML or JSON) and apply flag overrides on top."""
    raw = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as err:
            raise ConfigError(f"cannot parse {path}: {err}") from err
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
    if overrides:
        raw = dict(raw)
        for key, value in overrides.items():
            if value is not None:
                raw[key] = value
    return RunConfig.from_mapping(raw)
