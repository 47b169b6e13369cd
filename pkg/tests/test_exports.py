import json
import math

import numpy as np
import pytest

from tifl.envelope import envelope_plane
from tifl.exports import (
    dumps_json,
    envelope_csv,
    envelope_pgm,
    field_table_csv,
    format_float,
    plane_csv,
    plane_json_payload,
)
from tifl.fields import sample_plane
from tifl.geometry import SphereModel, make_symmetric_montage

MODEL = SphereModel()
MONTAGE = make_symmetric_montage(70, 20, i_left=1.5, i_right=1.0)


def test_format_float_roundtrips():
    rng = np.random.default_rng(3)
    for _ in range(2000):
        x = float(rng.normal() * 10.0 ** rng.integers(-12, 12))
        assert float(format_float(x)) == x
    assert format_float(0.1) == "0.10000000000000001"
    with pytest.raises(ValueError):
        format_float(float("nan"))


def test_dumps_json_is_valid_and_deterministic():
    payload = {"a": 1, "b": [0.1, 0.2, None, True], "c": {"nested": "text"}}
    one = dumps_json(payload)
    two = dumps_json(payload)
    assert one == two
    assert json.loads(one) == {"a": 1, "b": [0.1, 0.2, None, True], "c": {"nested": "text"}}


def test_dumps_json_rejects_unserializable():
    with pytest.raises(TypeError):
        dumps_json({"x": object()})
    with pytest.raises(TypeError):
        dumps_json({1: "non-string key"})


def test_plane_csv_header_and_rows():
    grid = sample_plane(MONTAGE, MODEL, "xy", 21)
    text = plane_csv(grid, "e1")
    lines = text.strip().split("\n")
    assert lines[0] == "x,y,z,V,Ex,Ey,Ez"
    assert len(lines) - 1 == int(grid.mask.sum())
    first = lines[1].split(",")
    assert len(first) == 7
    assert float(first[2]) == 0.0  # z = 0 on the xy plane


def test_plane_csv_row_major_order():
    grid = sample_plane(MONTAGE, MODEL, "xz", 21)
    rows = [line.split(",") for line in plane_csv(grid, "e2").strip().split("\n")[1:]]
    zs = [float(r[2]) for r in rows]
    xs = [float(r[0]) for r in rows]
    assert zs == sorted(zs)  # outer loop: plane row coordinate ascending
    for z in set(zs):  # inner loop: x ascending within each row
        in_row = [x for x, zz in zip(xs, zs) if zz == z]
        assert in_row == sorted(in_row)


def test_field_table_csv():
    pts = np.array([[0.1, 0.2, 0.3]])
    text = field_table_csv(pts, np.array([1.5]), np.array([[1.0, 2.0, 3.0]]))
    assert text.splitlines()[0] == "x,y,z,V,Ex,Ey,Ez"
    assert text.splitlines()[1].startswith("0.1")


def test_envelope_csv_matches_mask():
    amp = envelope_plane(MONTAGE, MODEL, "xy", 21)
    text = envelope_csv(amp)
    assert text.splitlines()[0] == "x,y,z,am_max"
    assert len(text.strip().splitlines()) - 1 == int(amp.mask.sum())


def test_envelope_pgm_format():
    amp = envelope_plane(MONTAGE, MODEL, "xy", 33)
    raw = envelope_pgm(amp)
    assert raw.startswith(b"P5\n33 33\n255\n")
    pixels = raw.split(b"255\n", 1)[1]
    assert len(pixels) == 33 * 33
    assert max(pixels) == 255  # max-normalized
    # corners are outside the sphere: black
    assert pixels[0] == 0 and pixels[32] == 0


def test_pgm_deterministic():
    amp = envelope_plane(MONTAGE, MODEL, "xz", 33)
    assert envelope_pgm(amp) == envelope_pgm(amp)


def test_plane_json_payload_nulls_outside():
    grid = sample_plane(MONTAGE, MODEL, "xy", 21)
    payload = plane_json_payload(grid)
    assert payload["e1"][0][0] is None  # corner outside the disc
    assert payload["v1"][0][0] is None
    mid = 10
    assert isinstance(payload["e1"][mid][mid], list)
    text = dumps_json(payload)
    parsed = json.loads(text)
    assert parsed["resolution"] == 21
    assert not any(
        isinstance(v, float) and not math.isfinite(v)
        for row in parsed["v1"] for v in row if v is not None
    )
