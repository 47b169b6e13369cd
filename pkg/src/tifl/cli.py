"""Command line interface: simulate, sweep, guidelines, plan, export, serve.

Every command is deterministic for a fixed config: identical invocations
write byte-identical files.  Exit codes follow the sysexits-flavored
contract: 0 success, 2 infeasible target, 3 unsafe result, 64 usage
error, 65 bad input data, 70 internal error.
"""

import sys
from pathlib import Path

import click

from .config import ConfigError, RunConfig, load_config
from .envelope import EnvelopeError, envelope_plane
from .exports import (
    dumps_json,
    envelope_csv,
    envelope_pgm,
    format_float,
    plane_csv,
    plane_json_payload,
)
from .fields import FieldError, sample_plane
from .geometry import GeometryError, montage_to_dict
from .planner import InfeasibleTarget, NoSafeMontage, PlannerError, plan
from .sweep import extract_focal, run_scenario, scenario_preset, synthesize_guidelines

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_UNSAFE = 3
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70


class UnsafePlan(RuntimeError):
    """Plan finished but violates its safety limits."""


def _write(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.write_bytes(data)
    click.echo(str(path))


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="YAML or JSON config file.")
@click.option("--out", default=None, help="Output directory (overrides config).")
@click.option("--resolution", type=int, default=None, help="Raster resolution per axis.")
@click.option("--scenario", type=click.Choice(["a", "b", "c"]), default=None,
              help="Scenario preset (overrides config).")
@click.option("--plane", type=click.Choice(["xy", "xz", "both"]), default=None,
              help="Sampling plane(s).")
@click.option("--format", "formats", multiple=True, type=click.Choice(["csv", "json", "pgm"]),
              help="Output formats (repeatable; overrides config).")
@click.option("--host", default=None, help="Bind host for serve.")
@click.option("--port", type=int, default=None, help="Bind port for serve.")
@click.pass_context
def cli(ctx, config_path, out, resolution, scenario, plane, formats, host, port):
    """Simulate and plan temporal-interference stimulation on a spherical
    head model."""
    overrides = {
        "out": out,
        "resolution": resolution,
        "scenario": scenario,
        "plane": plane,
        "formats": list(formats) if formats else None,
        "host": host,
        "port": port,
    }
    ctx.obj = load_config(config_path, overrides)


def _require_montage(cfg: RunConfig):
    if cfg.montage is None:
        raise click.UsageError("this command requires a montage in the config file")
    return cfg.montage


@cli.command()
@click.pass_obj
def simulate(cfg: RunConfig):
    """Envelope rasters and focal summary for one montage."""
    montage = _require_montage(cfg)
    out = cfg.out_dir
    summary = {"montage": montage_to_dict(montage), "planes": {}}
    for plane_name in cfg.planes:
        amp = envelope_plane(montage, cfg.model, plane_name, cfg.resolution)
        if "csv" in cfg.formats:
            _write(out / f"envelope_{plane_name}.csv", envelope_csv(amp))
        if "pgm" in cfg.formats:
            _write(out / f"envelope_{plane_name}.pgm", envelope_pgm(amp))
        focal = extract_focal(amp, cfg.model, tau=cfg.tau)
        summary["planes"][plane_name] = focal.to_dict()
    if "json" in cfg.formats:
        _write(out / "summary.json", dumps_json(summary) + "\n")


@cli.command()
@click.pass_obj
def export(cfg: RunConfig):
    """Per-pair potential and field rasters for one montage."""
    montage = _require_montage(cfg)
    out = cfg.out_dir
    for plane_name in cfg.planes:
        grid = sample_plane(montage, cfg.model, plane_name, cfg.resolution)
        if "csv" in cfg.formats:
            _write(out / f"fields_{plane_name}_pair_right.csv", plane_csv(grid, "e1"))
            _write(out / f"fields_{plane_name}_pair_left.csv", plane_csv(grid, "e2"))
        if "json" in cfg.formats:
            _write(out / f"fields_{plane_name}.json", dumps_json(plane_json_payload(grid)) + "\n")


@cli.command()
@click.pass_obj
def sweep(cfg: RunConfig):
    """Run a scenario sweep and export per-step focal summaries."""
    if cfg.scenario is None:
        raise click.UsageError("sweep requires --scenario or a scenario in the config")
    spec = scenario_preset(cfg.scenario)
    steps = run_scenario(spec, cfg.model, cfg.resolution, tau=cfg.tau)
    out = cfg.out_dir

    lines = ["plane,param,argmax_x,argmax_y,argmax_z,peak,extent,region,depth"]
    ff = format_float
    for plane_name in ("xy", "xz"):
        for step in steps:
            focal = step.xy if plane_name == "xy" else step.xz
            x, y, z = focal.argmax_point
            lines.append(
                ",".join(
                    [plane_name, ff(step.value), ff(x), ff(y), ff(z),
                     ff(focal.peak_value), ff(focal.focal_extent),
                     focal.region.name, focal.depth.name]
                )
            )
    if "csv" in cfg.formats:
        _write(out / f"sweep_{cfg.scenario}.csv", "\n".join(lines) + "\n")
    if "json" in cfg.formats:
        payload = {
            "scenario": cfg.scenario,
            "swept_parameter": spec.swept_parameter,
            "steps": [
                {"value": s.value, "xy": s.xy.to_dict(), "xz": s.xz.to_dict()} for s in steps
            ],
        }
        _write(out / f"sweep_{cfg.scenario}.json", dumps_json(payload) + "\n")
    if "pgm" in cfg.formats:
        for step in steps:
            for plane_name in cfg.planes:
                amp = envelope_plane(step.montage, cfg.model, plane_name, cfg.resolution)
                _write(out / f"sweep_{cfg.scenario}_{plane_name}_{step.value:g}.pgm",
                       envelope_pgm(amp))


@cli.command()
@click.pass_obj
def guidelines(cfg: RunConfig):
    """Synthesize the placement guideline tables from a dense sweep."""
    kwargs = {}
    if cfg.phi_grid:
        kwargs["phi_grid"] = cfg.phi_grid
    if cfg.alpha_grid:
        kwargs["alpha_grid"] = cfg.alpha_grid
    if cfg.ratio_grid:
        kwargs["ratio_grid"] = cfg.ratio_grid
    table = synthesize_guidelines(cfg.model, resolution=cfg.resolution, tau=cfg.tau, **kwargs)
    out = cfg.out_dir
    if "json" in cfg.formats:
        _write(out / "guidelines.json", dumps_json(table.to_dict()) + "\n")
    _write(out / "guidelines.txt", render_guideline_text(table))


def render_guideline_text(table) -> str:
    """Fixed-width text rendering of the synthesized guideline tables."""
    lines = []
    lines.append("Stimulation regions (xy plane)")
    lines.append(f"{'region':<8}{'cells':>6}  {'ratio rule':<10}  {'alpha range':<16}{'phi range':<16}")
    for e in table.region_entries:
        alpha = "-" if e.alpha_range is None else f"{e.alpha_range[0]:g}..{e.alpha_range[1]:g}"
        phi = "-" if e.phi_range is None else f"{e.phi_range[0]:g}..{e.phi_range[1]:g}"
        lines.append(f"{e.label:<8}{e.cells:>6}  {e.ratio_rule:<10}  {alpha:<16}{phi:<16}")
    lines.append("")
    lines.append("Stimulation depth (xz plane)")
    lines.append(f"{'band':<8}{'cells':>6}  {'phi range':<16}")
    for e in table.depth_entries:
        phi = "-" if e.phi_range is None else f"{e.phi_range[0]:g}..{e.phi_range[1]:g}"
        lines.append(f"{e.label:<8}{e.cells:>6}  {phi:<16}")
    lines.append("")
    lines.append(f"ambiguous region cells: "
                 f"{sum(1 for c in table.cells if c.xy.ambiguous)}")
    lines.append(f"ambiguous depth cells: "
                 f"{sum(1 for c in table.cells if c.xz.ambiguous)}")
    lines.append(f"region residuals: {len(table.region_residuals)}")
    for r in table.region_residuals:
        lines.append(f"  {r}")
    lines.append(f"depth residuals: {len(table.depth_residuals)}")
    for r in table.depth_residuals:
        lines.append(f"  {r}")
    return "\n".join(lines) + "\n"


@cli.command("plan")
@click.pass_obj
def plan_cmd(cfg: RunConfig):
    """Search for a montage that reaches the configured target."""
    if cfg.plan_request is None:
        raise click.UsageError("plan requires a plan section in the config")
    result = plan(cfg.plan_request, cfg.model)
    _write(cfg.out_dir / "plan.json", dumps_json(result.to_dict()) + "\n")
    if not result.safety_report.passed or not result.converged:
        raise UnsafePlan("returned montage violates the requested safety limits")


@cli.command()
@click.pass_obj
def serve(cfg: RunConfig):
    """Run the HTTP JSON API."""
    import uvicorn

    from .api import create_app

    app = create_app(cfg.model)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")


def main(argv=None) -> int:
    """Entry point with the exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False, obj=None)
        return EXIT_OK
    except click.UsageError as err:
        click.echo(f"usage error: {err.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as err:
        err.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except InfeasibleTarget as err:
        click.echo(f"infeasible: {err}", err=True)
        return EXIT_INFEASIBLE
    except (NoSafeMontage, UnsafePlan) as err:
        click.echo(f"unsafe: {err}", err=True)
        return EXIT_UNSAFE
    except (ConfigError, GeometryError, FieldError, EnvelopeError, PlannerError,
            FileNotFoundError, ValueError) as err:
        click.echo(f"bad input: {err}", err=True)
        return EXIT_DATA
    except Exception as err:  # pragma: no cover - defensive
        click.echo(f"internal error: {type(err).__name__}: {err}", err=True)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
