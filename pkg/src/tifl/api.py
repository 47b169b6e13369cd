"""HTTP JSON API for the explorer UI and scripts.

Endpoints (all under /api/v1, JSON in and out):

* POST /envelope    - montage + plane + resolution -> envelope raster
* GET  /scenarios   - the three sweep presets plus parameter bounds
* POST /plan        - plan request -> plan result (504 on timeout)
* GET  /guidelines  - synthesized guideline tables, cached per process

Handlers are pure functions of (request, immutable model); responses
are serialized with the deterministic 17-digit JSON writer, so repeated
identical requests return identical bytes.  Every payload carries a
schema_version field.  The service is a research tool: it binds
localhost by default and has no authentication.
"""

import math
from concurrent.futures import ThreadPoolExecutor, TimeoutError as FutureTimeout

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .envelope import envelope_plane
from .exports import dumps_json
from .geometry import (
    GeometryError,
    PHI_PLACEMENT_MAX,
    PhiOffLimits,
    SphereModel,
    montage_from_dict,
    montage_to_dict,
)
from .planner import (
    InfeasibleTarget,
    NoSafeMontage,
    PlannerError,
    PlanRequest,
    SafetyLimits,
    SearchEffort,
    plan,
)
from .sweep import extract_focal, scenario_preset, synthesize_guidelines

SCHEMA_VERSION = 1
MIN_RESOLUTION = 16
MAX_RESOLUTION = 257

__all__ = ["create_app", "SCHEMA_VERSION"]


def _json_response(payload: dict, status: int = 200) -> Response:
    body = dumps_json(payload) + "\n"
    return Response(content=body, media_type="application/json", status_code=status)


def _error(status: int, kind: str, message: str) -> Response:
    return _json_response(
        {"schema_version": SCHEMA_VERSION, "error": kind, "message": message}, status
    )


def _parameter_bounds() -> dict:
    """Validation bounds, served so UI sliders stay in sync with the API."""
    return {
        "phi": {"min": 0.0, "max": PHI_PLACEMENT_MAX},
        "alpha": {"min": 1.0, "max": 179.0},
        "psi": {"min": -180.0, "max": 180.0},
        "ratio": {"min": 0.25, "max": 4.0},
        "resolution": {"min": MIN_RESOLUTION, "max": MAX_RESOLUTION},
        "depth_bands": {"upper": 0.71, "mid": 0.0, "lower": -0.80},
    }


def create_app(model: SphereModel | None = None, plan_timeout: float = 120.0) -> FastAPI:
    """Build the API app around one immutable head model."""
    model = model or SphereModel()
    app = FastAPI(title="tifl", docs_url=None, redoc_url=None, openapi_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )
    cache: dict = {}
    plan_pool = ThreadPoolExecutor(max_workers=2)

    @app.post("/api/v1/envelope")
    async def envelope_endpoint(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_json", "request body is not valid JSON")
        if not isinstance(body, dict):
            return _error(400, "bad_request", "body must be a JSON object")
        unknown = set(body) - {"montage", "plane", "resolution"}
        if unknown:
            return _error(400, "bad_request", f"unknown keys: {sorted(unknown)}")
        plane = body.get("plane", "xy")
        if plane not in ("xy", "xz"):
            return _error(400, "bad_request", f'plane must be "xy" or "xz", got {plane!r}')
        try:
            resolution = int(body.get("resolution", 101))
        except (TypeError, ValueError):
            return _error(400, "bad_request", "resolution must be an integer")
        if resolution > MAX_RESOLUTION:
            return _error(413, "resolution_too_large",
                          f"resolution must be <= {MAX_RESOLUTION}")
        if resolution < MIN_RESOLUTION:
            return _error(400, "bad_request", f"resolution must be >= {MIN_RESOLUTION}")
        if "montage" not in body:
            return _error(400, "bad_request", "montage is required")
        try:
            montage = montage_from_dict(body["montage"])
        except PhiOffLimits as err:
            return _error(422, "phi_off_limits", str(err))
        except (GeometryError, TypeError, ValueError, KeyError) as err:
            return _error(400, "bad_montage", str(err))

        amp = envelope_plane(montage, model, plane, resolution)
        focal = extract_focal(amp, model)
        values = [
            [
                (float(amp.values[iv, ix]) if amp.mask[iv, ix] else None)
                for ix in range(resolution)
            ]
            for iv in range(resolution)
        ]
        payload = {
            "schema_version": SCHEMA_VERSION,
            "plane": plane,
            "resolution": resolution,
            "radius": model.radius,
            "axis_x": [float(v) for v in amp.grid.axis_x],
            "axis_v": [float(v) for v in amp.grid.axis_v],
            "values": values,
            "focal": focal.to_dict(),
        }
        return _json_response(payload)

    @app.get("/api/v1/scenarios")
    async def scenarios_endpoint() -> Response:
        if "scenarios" not in cache:
            presets = []
            for name in ("a", "b", "c"):
                spec = scenario_preset(name)
                presets.append(
                    {
                        "name": spec.name,
                        "swept_parameter": spec.swept_parameter,
                        "fixed": dict(spec.fixed),
                        "sweep_values": list(spec.sweep_values),
                    }
                )
            cache["scenarios"] = dumps_json(
                {
                    "schema_version": SCHEMA_VERSION,
                    "presets": presets,
                    "bounds": _parameter_bounds(),
                    "model": {"radius": model.radius, "conductivity": model.conductivity},
                }
            ) + "\n"
        return Response(content=cache["scenarios"], media_type="application/json")

    @app.post("/api/v1/plan")
    async def plan_endpoint(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_json", "request body is not valid JSON")
        try:
            plan_request = _plan_request_from(body)
        except (PlannerError, GeometryError, TypeError, ValueError, KeyError) as err:
            return _error(400, "bad_request", str(err))

        future = plan_pool.submit(plan, plan_request, model)
        try:
            result = future.result(timeout=plan_timeout)
        except FutureTimeout:
            future.cancel()
            return _error(504, "timeout", f"plan exceeded {plan_timeout} s")
        except InfeasibleTarget as err:
            return _error(422, "infeasible_target", str(err))
        except NoSafeMontage as err:
            return _error(422, "no_safe_montage", str(err))

        payload = {"schema_version": SCHEMA_VERSION, **result.to_dict()}
        return _json_response(payload)

    @app.get("/api/v1/guidelines")
    async def guidelines_endpoint() -> Response:
        if "guidelines" not in cache:
            table = synthesize_guidelines(model)
            cache["guidelines"] = dumps_json(
                {"schema_version": SCHEMA_VERSION, **table.to_dict()}
            ) + "\n"
        return Response(content=cache["guidelines"], media_type="application/json")

    return app


def _plan_request_from(body) -> PlanRequest:
    if not isinstance(body, dict):
        raise ValueError("body must be a JSON object")
    unknown = set(body) - {"target", "budget", "limits", "effort", "focality_goal",
                           "exclusion_radius", "min_current"}
    if unknown:
        raise ValueError(f"unknown keys: {sorted(unknown)}")
    if "target" not in body:
        raise ValueError("target is required")
    target = body["target"]
    if isinstance(target, dict):
        from .geometry import DepthLabel, RegionLabel

        target = (
            RegionLabel.from_name(str(target["region"])),
            DepthLabel.from_name(str(target["depth"])),
        )
    elif isinstance(target, (list, tuple)) and len(target) == 3:
        target = tuple(float(v) for v in target)
        if any(not math.isfinite(v) for v in target):
            raise ValueError("target coordinates must be finite")
    else:
        raise ValueError("target must be [x, y, z] or {region, depth}")

    limits_raw = body.get("limits", {}) or {}
    defaults = SafetyLimits()
    limits = SafetyLimits(
        max_field=float(limits_raw.get("max_field", defaults.max_field)),
        max_current_per_pair=float(
            limits_raw.get("max_current_per_pair", defaults.max_current_per_pair)
        ),
        max_total_current=float(
            limits_raw.get("max_total_current", defaults.max_total_current)
        ),
    )
    effort_raw = body.get("effort", {}) or {}
    effort_defaults = SearchEffort()
    effort = SearchEffort(
        phi_grid=tuple(float(v) for v in effort_raw.get("phi_grid", effort_defaults.phi_grid)),
        alpha_grid=tuple(
            float(v) for v in effort_raw.get("alpha_grid", effort_defaults.alpha_grid)
        ),
        psi_grid=tuple(float(v) for v in effort_raw.get("psi_grid", effort_defaults.psi_grid)),
        ratio_grid=tuple(
            float(v) for v in effort_raw.get("ratio_grid", effort_defaults.ratio_grid)
        ),
        refine_evals=int(effort_raw.get("refine_evals", effort_defaults.refine_evals)),
        raster_resolution=int(
            effort_raw.get("raster_resolution", effort_defaults.raster_resolution)
        ),
    )
    request_defaults = PlanRequest(target=(0.0, 0.0, 0.0))
    return PlanRequest(
        target=target,
        total_current_budget=float(
            body.get("budget", request_defaults.total_current_budget)
        ),
        safety_limits=limits,
        search_effort=effort,
        focality_goal=float(body.get("focality_goal", request_defaults.focality_goal)),
        exclusion_radius=float(
            body.get("exclusion_radius", request_defaults.exclusion_radius)
        ),
        min_current=float(body.get("min_current", request_defaults.min_current)),
    )
