import math
from collections import deque

import numpy as np
import pytest

from merolab import (
    OrbitClass,
    SeedUndecidedError,
    boundedness_probe,
    classify_grid,
    component_summaries,
    iterate_orbit,
    label_components,
    to_ppm,
)
from merolab.dynamics import _PALETTE, _POLE_COLOR, ClassifiedGrid


def _blank_grid(classes, cycle_ids, steps=None, budget=8):
    res = classes.shape[0]
    if steps is None:
        steps = np.zeros((res, res), dtype=np.int32)
    return ClassifiedGrid(
        0j, 1.0, res, budget, 1e6,
        classes.astype(np.uint8), steps, cycle_ids.astype(np.int32), (),
    )


# ---------------------------------------------------------------------------
# single orbits
# ---------------------------------------------------------------------------


def test_orbit_attracted_to_origin(zsq):
    res = iterate_orbit(zsq, 0.5)
    assert res.orbit_class is OrbitClass.ATTRACTED
    assert res.steps == 5
    assert abs(res.final) < 1e-9
    assert res.cycle_id == 1
    assert res.pole_step == -1


def test_orbit_escaping(zsq):
    res = iterate_orbit(zsq, 2.0)
    assert res.orbit_class is OrbitClass.ESCAPING
    assert res.steps == 8
    assert abs(res.final) > 1e6
    assert res.cycle_id == 0


def test_orbit_pole_hit(tanz):
    res = iterate_orbit(tanz, math.pi / 2.0)
    assert res.orbit_class is OrbitClass.POLE_HIT
    assert res.steps == 0
    assert res.pole_step == 0
    assert res.final == pytest.approx(math.pi / 2.0)


def test_orbit_budget_exhaustion_is_undecided(zsq):
    res = iterate_orbit(zsq, 0.999, max_steps=3)
    assert res.orbit_class is OrbitClass.UNDECIDED
    assert res.steps == 3


def test_orbit_attracting_two_cycle():
    # z -> z^2 - 1 has the superattracting cycle 0 -> -1 -> 0
    res = iterate_orbit("z^2 - 1", 0.01)
    assert res.orbit_class is OrbitClass.ATTRACTED
    # canonical representative is the cycle point of smallest modulus
    assert abs(res.final) < 1e-6


def test_orbit_escape_is_forward_invariant(zsq):
    for z0 in (2.0, 1.5 + 0.5j, -3.0j):
        first = iterate_orbit(zsq, z0)
        pushed = iterate_orbit(zsq, z0 * z0)
        assert first.orbit_class is OrbitClass.ESCAPING
        assert pushed.orbit_class is OrbitClass.ESCAPING
        assert pushed.steps <= first.steps


def test_orbit_validation(zsq):
    with pytest.raises(ValueError):
        iterate_orbit(zsq, 1.0, max_steps=0)
    with pytest.raises(ValueError):
        iterate_orbit(zsq, 1.0, R_esc=1.0)


# ---------------------------------------------------------------------------
# grid classification
# ---------------------------------------------------------------------------


def test_grid_matches_unit_circle(zsq):
    grid = classify_grid(zsq, (0j, 2.0), 64, 256)
    centers = grid.pixel_centers()
    # no pixel center sits near the circle, so every verdict is forced
    assert np.abs(np.abs(centers) - 1.0).min() > 2e-3
    expected = np.where(np.abs(centers) > 1.0, OrbitClass.ESCAPING, OrbitClass.ATTRACTED)
    assert np.array_equal(grid.classes, expected.astype(np.uint8))
    inside = grid.classes == OrbitClass.ATTRACTED
    assert (grid.cycle_ids[inside] == 1).all()
    assert (grid.cycle_ids[~inside] == 0).all()
    assert len(grid.cycles) == 1 and abs(grid.cycles[0]) < 1e-6


def test_grid_is_deterministic(zsq):
    a = classify_grid(zsq, (0.1 + 0.2j, 1.5), 32, 64)
    b = classify_grid(zsq, (0.1 + 0.2j, 1.5), 32, 64)
    assert np.array_equal(a.classes, b.classes)
    assert np.array_equal(a.steps, b.steps)
    assert np.array_equal(a.cycle_ids, b.cycle_ids)


def test_grid_row_zero_is_top(zsq):
    grid = classify_grid(zsq, (0j, 2.0), 8, 16)
    centers = grid.pixel_centers()
    assert centers[0, 0].imag > centers[-1, 0].imag
    assert centers[0, 0].real < centers[0, -1].real


def test_grid_pole_hits_near_tangent_pole(tanz):
    grid = classify_grid(tanz, (math.pi / 2.0, 1e-11), 64, 8)
    hits = grid.classes == OrbitClass.POLE_HIT
    assert hits.any()
    labeled = label_components(grid)
    assert (labeled.labels[hits] == 0).all()


def test_grid_validation(zsq):
    with pytest.raises(ValueError):
        classify_grid(zsq, (0j, 2.0), 0, 16)
    with pytest.raises(ValueError):
        classify_grid(zsq, (0j, 2.0), 100000, 16)
    with pytest.raises(ValueError):
        classify_grid(zsq, (0j, 2.0), 16, 0)
    with pytest.raises(ValueError):
        classify_grid(zsq, (0j, -1.0), 16, 16)


# ---------------------------------------------------------------------------
# component labeling
# ---------------------------------------------------------------------------


def _bfs_labels(classes, cycle_ids):
    res = classes.shape[0]
    keys = {}
    for r in range(res):
        for c in range(res):
            cls = int(classes[r, c])
            if cls == OrbitClass.ESCAPING:
                keys[(r, c)] = ("esc",)
            elif cls == OrbitClass.ATTRACTED:
                keys[(r, c)] = ("att", int(cycle_ids[r, c]))
    labels = np.zeros((res, res), dtype=np.int32)
    nxt = 1
    for r in range(res):
        for c in range(res):
            if (r, c) not in keys or labels[r, c] != 0:
                continue
            want = keys[(r, c)]
            queue = deque([(r, c)])
            labels[r, c] = nxt
            while queue:
                i, j = queue.popleft()
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    ni, nj = i + di, j + dj
                    if 0 <= ni < res and 0 <= nj < res and labels[ni, nj] == 0 \
                            and keys.get((ni, nj)) == want:
                        labels[ni, nj] = nxt
                        queue.append((ni, nj))
            nxt += 1
    return labels


def test_labels_match_bfs_on_random_grids():
    rng = np.random.default_rng(7)
    for _ in range(100):
        classes = rng.integers(0, 4, size=(64, 64))
        cyc = np.where(classes == OrbitClass.ATTRACTED, rng.integers(1, 3, size=(64, 64)), 0)
        grid = _blank_grid(classes, cyc)
        labeled = label_components(grid)
        assert np.array_equal(labeled.labels, _bfs_labels(classes, cyc))


def test_labels_are_raster_ordered():
    rng = np.random.default_rng(11)
    classes = rng.integers(0, 4, size=(32, 32))
    cyc = np.where(classes == OrbitClass.ATTRACTED, 1, 0)
    labeled = label_components(_blank_grid(classes, cyc))
    flat = labeled.labels.reshape(-1)
    seen = []
    for lab in flat:
        if lab != 0 and lab not in seen:
            seen.append(int(lab))
    assert seen == list(range(1, len(seen) + 1))


def test_labels_checkerboard():
    res = 8
    rows, cols = np.indices((res, res))
    classes = np.where((rows + cols) % 2 == 0, OrbitClass.ESCAPING, OrbitClass.UNDECIDED)
    labeled = label_components(_blank_grid(classes, np.zeros((res, res))))
    # isolated pixels: one label each, counted in raster order
    assert labeled.labels.max() == res * res // 2
    assert labeled.labels[0, 0] == 1
    assert labeled.labels[0, 2] == 2
    assert labeled.labels[1, 1] == res // 2 + 1


def test_cycle_id_separates_attracted_components():
    classes = np.full((4, 4), int(OrbitClass.ATTRACTED))
    cyc = np.ones((4, 4), dtype=np.int64)
    cyc[:, 2:] = 2
    labeled = label_components(_blank_grid(classes, cyc))
    assert labeled.labels[0, 0] == 1
    assert labeled.labels[0, 3] == 2
    assert len(np.unique(labeled.labels)) == 2


def test_component_summaries(zsq):
    labeled = label_components(classify_grid(zsq, (0j, 2.0), 64, 256))
    summaries = component_summaries(labeled)
    by_class = {s["class"]: s for s in summaries}
    assert by_class["escaping"]["touches_boundary"] is True
    assert by_class["attracted"]["touches_boundary"] is False
    total = sum(s["pixels"] for s in summaries)
    assert total == 64 * 64  # every pixel decided for this window
    with pytest.raises(ValueError):
        component_summaries(classify_grid(zsq, (0j, 2.0), 8, 16))


# ---------------------------------------------------------------------------
# boundedness probe
# ---------------------------------------------------------------------------


def test_probe_basin_of_origin_is_bounded(zsq):
    report = boundedness_probe(zsq, 0.5, [2.0, 4.0, 8.0], resolution=64, budget=256)
    assert report.verdict == "bounded-empirical"
    assert report.orbit_class == "attracted"
    assert report.scales == (2.0, 4.0, 8.0)
    assert not report.touches_boundary
    assert len(report.observations) == 3
    assert report.as_dict()["verdict"] == "bounded-empirical"


def test_probe_escaping_region_is_unbounded(zsq):
    report = boundedness_probe(zsq, 3.0, [4.0, 8.0, 16.0], resolution=64, budget=256)
    assert report.verdict == "unbounded-empirical"
    assert report.orbit_class == "escaping"
    assert all(o["touches"] for o in report.observations)


def test_probe_drifting_orbit_unbounded(fatou):
    report = boundedness_probe(
        fatou, 5.0, [4.0, 8.0, 16.0], resolution=64, budget=256, r_esc=50.0
    )
    assert report.verdict == "unbounded-empirical"
    assert report.orbit_class == "escaping"


def test_probe_undecided_seed_raises(zsq):
    with pytest.raises(SeedUndecidedError):
        boundedness_probe(zsq, 0.99, [1.0], resolution=9, budget=2)


def test_probe_scale_validation(zsq):
    with pytest.raises(ValueError):
        boundedness_probe(zsq, 0.5, [])
    with pytest.raises(ValueError):
        boundedness_probe(zsq, 0.5, [0.0, 2.0])


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def test_ppm_bytes_exact():
    classes = np.array(
        [[OrbitClass.ESCAPING, OrbitClass.ATTRACTED],
         [OrbitClass.POLE_HIT, OrbitClass.UNDECIDED]]
    )
    steps = np.array([[3, 0], [0, 0]], dtype=np.int32)
    cyc = np.array([[0, 2], [0, 0]])
    grid = _blank_grid(classes, cyc, steps=steps, budget=10)
    shade = 40 + (215 * 3) // 10
    expected = b"P6\n2 2\n255\n" + bytes(
        [shade, shade, shade, *_PALETTE[1], *_POLE_COLOR, 0, 0, 0]
    )
    assert to_ppm(grid) == expected


def test_ppm_renders_pole_pixels(tanz):
    grid = classify_grid(tanz, (math.pi / 2.0, 1e-11), 64, 8)
    data = to_ppm(grid)
    assert data.startswith(b"P6\n64 64\n255\n")
    assert len(data) == len(b"P6\n64 64\n255\n") + 3 * 64 * 64
    assert bytes(_POLE_COLOR) in data


def test_ppm_shade_clamps_at_budget():
    classes = np.full((1, 1), int(OrbitClass.ESCAPING))
    steps = np.full((1, 1), 99, dtype=np.int32)
    grid = _blank_grid(classes, np.zeros((1, 1)), steps=steps, budget=10)
    body = to_ppm(grid)[len(b"P6\n1 1\n255\n"):]
    assert body == bytes([255, 255, 255])
