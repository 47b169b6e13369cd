"""Acceptance suite: one test and one printed pass/fail line per criterion.

Tolerances are pinned here and nowhere else.  Two criteria pin
quantitative thresholds that this model's geometry measurably does not
reach (wide-separation center suppression to half the peak, and
moderate current ratios steering the focus past the outer column edge);
they are asserted at their stated bounds anyway and fail honestly, with
the measured values printed alongside.
"""

import json
import math
import time

import numpy as np
import pytest

from tifl.envelope import (
    envelope_along,
    envelope_max,
    envelope_max_sampled,
    envelope_plane,
    fibonacci_directions,
    time_domain_envelope,
)
from tifl.fields import pair_efield, pair_potential
from tifl.geometry import (
    DepthLabel,
    ElectrodePair,
    ElectrodeSite,
    RegionLabel,
    SphereModel,
    classify_region_xy,
    make_symmetric_montage,
)
from tifl.laplace import analytic_discrepancy, solve_laplace_grid
from tifl.planner import PlanRequest, check_safety, plan
from tifl.sweep import extract_focal, run_scenario, scenario_preset, synthesize_guidelines

MODEL = SphereModel()


def report(name: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")


def random_pair(rng):
    return ElectrodePair(
        ElectrodeSite(rng.uniform(0, 180), rng.uniform(-180, 180)),
        ElectrodeSite(rng.uniform(0, 180), rng.uniform(-180, 180)),
        1.0,
        2000.0,
    )


def test_envelope_identity():
    """envelope_along equals 2 min(|E1.n|, |E2.n|) to 1e-12 on 1e4 triples."""
    rng = np.random.default_rng(101)
    start = time.time()
    worst = 0.0
    for _ in range(10_000):
        e1 = rng.normal(size=3) * 10 ** rng.uniform(-2, 2)
        e2 = rng.normal(size=3) * 10 ** rng.uniform(-2, 2)
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        got = envelope_along(e1, e2, n)
        want = 2.0 * min(abs(e1 @ n), abs(e2 @ n))
        worst = max(worst, abs(got - want))
    elapsed = time.time() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    report("envelope-identity", ok, f"max abs err {worst:.2e}, {elapsed:.2f} s")
    assert worst <= 1e-12
    assert elapsed < 1.0


def test_envelope_max_oracle():
    """Closed-form maximal envelope vs max over 1e5 lattice directions on
    1e3 random field pairs within the 45-degree validity cone."""
    rng = np.random.default_rng(202)
    directions = fibonacci_directions(100_000)
    start = time.time()
    worst = 0.0
    count = 0
    cos45 = math.cos(math.radians(45.0))
    while count < 1000:
        e1 = rng.normal(size=3) * 10 ** rng.uniform(-1, 1)
        e2 = rng.normal(size=3) * 10 ** rng.uniform(-1, 1)
        cosg = abs(e1 @ e2) / (np.linalg.norm(e1) * np.linalg.norm(e2))
        if cosg < cos45:
            continue
        count += 1
        closed = envelope_max(e1, e2)
        sampled = envelope_max_sampled(e1, e2, directions)
        worst = max(worst, abs(closed - sampled) / closed)
    elapsed = time.time() - start
    ok = worst <= 1e-3 and elapsed < 30.0
    report("envelope-max-oracle", ok, f"max rel err {worst:.2e}, {elapsed:.1f} s")
    assert worst <= 1e-3
    assert elapsed < 30.0


def test_time_domain_oracle():
    """Beat extraction from sampled waveforms agrees with the directional
    envelope for 1e3 random draws at 2000/2010 Hz."""
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(1000):
        e1 = rng.normal(size=3)
        e2 = rng.normal(size=3)
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        along = envelope_along(e1, e2, n)
        sampled = time_domain_envelope(float(e1 @ n), float(e2 @ n), 2000.0, 2010.0, 50_000)
        if along > 1e-9:
            worst = max(worst, abs(along - sampled) / along)
    ok = worst <= 1e-6
    report("time-domain-oracle", ok, f"max rel err {worst:.2e}")
    assert worst <= 1e-6


def test_field_correctness():
    """Closed form vs series, analytic E vs finite differences, and the
    grid solver cross-check with strict refinement improvement."""
    start = time.time()
    rng = np.random.default_rng(404)

    worst_series = 0.0
    for _ in range(1000):
        pair = random_pair(rng)
        x = rng.normal(size=3)
        x *= rng.uniform(0.05, 0.85) / np.linalg.norm(x)
        closed = pair_potential(x, pair, MODEL)
        series = pair_potential(x, pair, MODEL, terms=400)
        if series != 0.0:
            worst_series = max(worst_series, abs(closed - series) / abs(series))

    worst_grad = 0.0
    step = 1e-5 * MODEL.radius
    for _ in range(100):
        pair = random_pair(rng)
        x = rng.normal(size=3)
        x *= rng.uniform(0.05, 0.8) / np.linalg.norm(x)
        e = pair_efield(x, pair, MODEL)
        fd = np.empty(3)
        for k in range(3):
            dx = np.zeros(3)
            dx[k] = step
            fd[k] = -(
                pair_potential(x + dx, pair, MODEL) - pair_potential(x - dx, pair, MODEL)
            ) / (2 * step)
        worst_grad = max(worst_grad, np.linalg.norm(e - fd) / np.linalg.norm(e))

    pair = ElectrodePair(ElectrodeSite(90, 20), ElectrodeSite(90, -20), 1.0, 2000.0)
    d65 = analytic_discrepancy(solve_laplace_grid(pair, MODEL, 65), pair, MODEL)
    d129 = analytic_discrepancy(solve_laplace_grid(pair, MODEL, 129), pair, MODEL)
    elapsed = time.time() - start

    ok = worst_series <= 1e-9 and worst_grad <= 1e-5 and d65 <= 0.05 and d129 < d65 and elapsed < 120
    report(
        "field-correctness",
        ok,
        f"series {worst_series:.2e}, grad {worst_grad:.2e}, "
        f"grid L2 {d65:.3f} -> {d129:.3f}, {elapsed:.0f} s",
    )
    assert worst_series <= 1e-9
    assert worst_grad <= 1e-5
    assert d65 <= 0.05
    assert d129 < d65
    assert elapsed < 120


@pytest.fixture(scope="module")
def scenario_steps():
    return {name: run_scenario(scenario_preset(name), MODEL, resolution=101) for name in "abc"}


def test_scenario_a_depth_and_focality(scenario_steps):
    steps = scenario_steps["a"]
    zs = [s.xz.argmax_point[2] for s in steps]  # phi = 30, 60, 90
    exts = [s.xz.focal_extent for s in steps]
    ok = zs[0] > zs[1] > zs[2] and exts[0] < exts[1] < exts[2]
    report(
        "scenario-a",
        ok,
        f"argmax z {zs[0]:+.2f} > {zs[1]:+.2f} > {zs[2]:+.2f}; "
        f"extent {exts[0]:.3f} < {exts[1]:.3f} < {exts[2]:.3f}",
    )
    assert zs[0] > zs[1] > zs[2]
    assert exts[0] < exts[1] < exts[2]


def test_scenario_b_steering_and_depth(scenario_steps):
    steps = scenario_steps["b"]
    xs = [s.xy.argmax_point[0] for s in steps]  # ratio = 0.5, 1, 2
    zs = [s.xz.argmax_point[2] for s in steps]
    spread = max(zs) - min(zs)
    ok = xs[0] < xs[1] < xs[2] and spread <= 0.05 * MODEL.radius
    report(
        "scenario-b",
        ok,
        f"argmax x {xs[0]:+.2f} < {xs[1]:+.2f} < {xs[2]:+.2f}; depth spread {spread:.3f} R",
    )
    assert xs[0] < xs[1] < xs[2]
    assert spread <= 0.05 * MODEL.radius


def test_scenario_c_center_suppression():
    """At the widest separation the center stimulation is expected to
    collapse to half the peak or less.  In this model the center keeps
    ~79% of the peak (measured, invariant to resolution and
    conductivity), so the <= 0.5 gate fails; the narrow-separation
    >= 0.9 half holds."""
    spec = scenario_preset("c")
    ratios = {}
    for alpha in (20.0, 100.0):
        amp = envelope_plane(spec.montage(alpha), MODEL, "xy", 101)
        center = float(amp.values[50, 50])
        ratios[alpha] = center / float(np.nanmax(amp.values))
    ok = ratios[100.0] <= 0.5 and ratios[20.0] >= 0.9
    report(
        "scenario-c",
        ok,
        f"center/peak at alpha=100: {ratios[100.0]:.3f} (need <= 0.5, known red); "
        f"at alpha=20: {ratios[20.0]:.3f} (need >= 0.9)",
    )
    assert ratios[20.0] >= 0.9
    assert ratios[100.0] <= 0.5  # known-unattainable under this model; see notes


@pytest.fixture(scope="module")
def guideline_table():
    return synthesize_guidelines(MODEL)


def test_table_one_reproduction(guideline_table):
    """Column assignment rates over the default sweep.  The ratio=1 half
    holds exactly; the ratio>1 half asks moderate ratios to push the
    focus past |x| = R/3, which this model's steering does not reach
    (known red; the converse direction, column purity, is 100%)."""
    cells = [c for c in guideline_table.cells if not c.xy.ambiguous]
    eq1 = [c for c in cells if c.ratio_regime == "ratio=1"]
    gt1 = [c for c in cells if c.ratio_regime == "ratio>1"]
    eq1_rate = sum(c.xy.region.col == 2 for c in eq1) / len(eq1)
    gt1_rate = sum(c.xy.region.col == 3 for c in gt1) / len(gt1)
    col3 = [c for c in cells if c.xy.region.col == 3]
    purity = sum(c.ratio_regime == "ratio>1" for c in col3) / max(len(col3), 1)
    ok = eq1_rate >= 0.95 and gt1_rate >= 0.95
    report(
        "table-one",
        ok,
        f"ratio=1 -> col2: {100 * eq1_rate:.0f}%; ratio>1 -> col3: {100 * gt1_rate:.0f}% "
        f"(known red); col3 regime purity: {100 * purity:.0f}%",
    )
    assert eq1_rate >= 0.95
    assert gt1_rate >= 0.95  # known-unattainable under this model; see notes


def test_table_two_reproduction(guideline_table):
    deep = [c for c in guideline_table.cells if 90 < c.phi < 135 and not c.xz.ambiguous]
    rate = sum(c.xz.depth.band == 3 for c in deep) / len(deep)
    ok = rate >= 0.95
    report("table-two", ok, f"phi in (90,135) -> D3: {100 * rate:.0f}% of {len(deep)} cells")
    assert rate >= 0.95


def test_planner_closed_loop():
    """Plans for the nine cell centers at the middle depth must place the
    envelope focus (on the target's depth plane) in the requested column
    in at least 8 of 9 cells, and every plan must pass its own safety
    check.  The focus location is the measurable form of the column
    rule; a twin-lobe tie may cost at most the allowed one miss."""
    hits = 0
    safety_ok = True
    details = []
    for row in (1, 2, 3):
        for col in (1, 2, 3):
            request = PlanRequest(target=(RegionLabel(row, col), DepthLabel(2)))
            result = plan(request, MODEL)
            amp = envelope_plane(result.montage, MODEL, "xy", 101, offset=result.target_point[2])
            k = int(np.nanargmax(amp.values))
            iv, ix = np.unravel_index(k, amp.values.shape)
            region = classify_region_xy(
                (float(amp.grid.axis_x[ix]), float(amp.grid.axis_v[iv]), 0.0), MODEL
            )
            hit = region.col == col
            hits += hit
            if not hit:
                details.append(f"R{row}{col}->{region.name}")
            own_check = check_safety(result.montage, MODEL, request.safety_limits)
            safety_ok = safety_ok and own_check.passed and result.safety_report.passed
    ok = hits >= 8 and safety_ok
    report(
        "planner-closed-loop",
        ok,
        f"{hits}/9 columns hit ({'; '.join(details) or 'none missed'}); "
        f"safety {'all pass' if safety_ok else 'VIOLATION'}",
    )
    assert hits >= 8
    assert safety_ok


def test_cli_determinism(tmp_path):
    """Byte-identical outputs for repeated runs of every file-writing command."""
    from tifl.cli import main

    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        "montage: {phi: 70, alpha: 20, i_left: 1.5}\n"
        "resolution: 41\n"
        "phi_grid: [30, 90]\n"
        "alpha_grid: [20, 60]\n"
        "ratio_grid: [0.25, 1.0, 4.0]\n"
        "plan:\n"
        "  target: [0.2, 0.0, 0.1]\n"
        "  effort: {phi_grid: [60, 90], alpha_grid: [40], psi_grid: [0, 90],"
        " ratio_grid: [0.5, 1, 2], refine_evals: 30, raster_resolution: 11}\n"
    )
    commands = [
        ["simulate"],
        ["export"],
        ["--scenario", "b", "sweep"],
        ["guidelines"],
        ["plan"],
    ]
    identical = True
    for idx, command in enumerate(commands):
        out_a = tmp_path / f"a{idx}"
        out_b = tmp_path / f"b{idx}"
        for out in (out_a, out_b):
            code = main(["--config", str(cfg), "--out", str(out), *command])
            assert code == 0, f"command {command} failed with {code}"
        files_a = sorted(p.name for p in out_a.iterdir())
        files_b = sorted(p.name for p in out_b.iterdir())
        assert files_a == files_b and files_a
        for name in files_a:
            if (out_a / name).read_bytes() != (out_b / name).read_bytes():
                identical = False
    report("cli-determinism", identical, f"{len(commands)} commands, all files byte-identical")
    assert identical
