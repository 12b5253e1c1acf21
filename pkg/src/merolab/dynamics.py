"""Pixel-grid orbit classification and empirical boundedness probes.

Orbits are classified into escaping, attracted (to a finite cycle),
pole-hit, or undecided.  Cycle detection runs Floyd's tortoise-and-hare
directly on the iteration, so no orbit history is stored and the same
code path serves single points and full pixel grids.  Components of the
stable set are approximated by 4-connected patches of decided pixels of
the same class; undecided and pole-hit pixels act as barriers, which may
oversegment but never merges across possible Julia points.

Boundedness of a component is probed, not proved: windows are recentered
on a seed and rescaled, and the verdict reports whether the component
keeps reaching the window edge as the window grows.  The scale list
travels with the verdict so its epistemic status stays auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum
from functools import lru_cache

import numpy as np

from .expr import OVERFLOW_FLAG, POLE_FLAG, evaluate_many, poles_in_disk
from .nevanlinna import _as_expr

_ESCAPE_DEFAULT = 1e6
_POLE_LANDING = 1e12      # |f(z)| beyond this, for a map with poles, counts
                          # as landing within pole tolerance of some pole
_FLOYD_TOL = 1e-9
_CYCLE_MATCH_TOL = 1e-6
_PERIOD_CAP = 32
_MAX_RESOLUTION = 8192
_POLE_SCOUT_RADIUS = 256.0
_GROWTH_RUN = 3

_PALETTE = (
    (66, 135, 245),
    (245, 188, 66),
    (66, 245, 161),
    (188, 66, 245),
    (245, 66, 188),
    (66, 222, 245),
    (152, 245, 66),
    (245, 108, 66),
)
_POLE_COLOR = (200, 30, 30)


class OrbitClass(IntEnum):
    UNDECIDED = 0
    ESCAPING = 1
    ATTRACTED = 2
    POLE_HIT = 3


_CLASS_NAMES = {
    OrbitClass.UNDECIDED: "undecided",
    OrbitClass.ESCAPING: "escaping",
    OrbitClass.ATTRACTED: "attracted",
    OrbitClass.POLE_HIT: "pole-hit",
}


class SeedUndecidedError(ValueError):
    """The probe seed fell on a pixel without a usable component."""


@dataclass(frozen=True)
class OrbitResult:
    """Classification of a single orbit.

    final holds the last orbit value for escaping and undecided orbits,
    the cycle representative for attracted ones, and the point that
    mapped onto the pole for pole hits.  cycle_id is 0 unless attracted;
    pole_step is -1 unless a pole was hit.
    """

    orbit_class: OrbitClass
    steps: int
    final: complex
    cycle_id: int = 0
    pole_step: int = -1


@dataclass(frozen=True, eq=False)
class ClassifiedGrid:
    center: complex
    half_width: float
    resolution: int
    budget: int
    escape_radius: float
    classes: np.ndarray
    steps: np.ndarray
    cycle_ids: np.ndarray
    cycles: tuple
    labels: np.ndarray | None = None

    def pixel_centers(self) -> np.ndarray:
        return _pixel_centers(self.center, self.half_width, self.resolution)


@dataclass(frozen=True)
class ComponentReport:
    """Verdict on one component probed across window scales."""

    component_id: int
    orbit_class: str
    pixels: int
    touches_boundary: bool
    verdict: str
    scales: tuple
    observations: tuple

    def as_dict(self) -> dict:
        return {
            "id": self.component_id,
            "class": self.orbit_class,
            "pixels": self.pixels,
            "touches_boundary": self.touches_boundary,
            "verdict": self.verdict,
            "scales": list(self.scales),
            "observations": list(self.observations),
        }


# ---------------------------------------------------------------------------
# orbit iteration
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _has_poles(expr) -> bool:
    return bool(poles_in_disk(expr, _POLE_SCOUT_RADIUS).entries)


def _canonical_rep(points) -> complex:
    # deterministic cycle representative: smallest modulus, ties broken
    # lexicographically on rounded coordinates
    def key(w):
        return (round(abs(w), 7), round(w.real, 7), round(w.imag, 7))

    return min(points, key=key)


def _extract_cycles(expr, seeds: np.ndarray):
    """Find the period and representative of the cycle each seed sits on.

    Seeds come from a Floyd coincidence, so they are within detection
    tolerance of an attracting cycle.  Returns (ok, reps) with reps the
    canonical cycle point; seeds whose period exceeds the cap get
    ok=False.
    """
    m = seeds.size
    traj = [seeds.copy()]
    cur = seeds.copy()
    period = np.zeros(m, dtype=np.int32)
    for k in range(1, _PERIOD_CAP + 1):
        cur, fl = evaluate_many(expr, cur)
        bad = fl != 0
        if bad.any():
            cur = np.where(bad, traj[-1], cur)
        traj.append(cur.copy())
        hit = (np.abs(cur - seeds) <= _CYCLE_MATCH_TOL) & (period == 0) & ~bad
        period[hit] = k
        if (period > 0).all():
            break
    ok = period > 0
    reps = np.zeros(m, dtype=np.complex128)
    stack = np.stack(traj, axis=0)
    for i in range(m):
        if not ok[i]:
            continue
        cycle_pts = [complex(stack[j, i]) for j in range(period[i])]
        reps[i] = _canonical_rep(cycle_pts)
    return ok, reps


def _classify_points(expr, pts: np.ndarray, budget: int, r_esc: float):
    n = pts.size
    classes = np.zeros(n, dtype=np.uint8)
    steps = np.full(n, budget, dtype=np.int32)
    cyc = np.zeros(n, dtype=np.int32)
    final = pts.astype(np.complex128).copy()
    pole_steps = np.full(n, -1, dtype=np.int32)
    tort = pts.astype(np.complex128).copy()
    hare = pts.astype(np.complex128).copy()
    hmod = np.abs(hare)
    grow = np.zeros(n, dtype=np.int16)
    active = np.flatnonzero(np.ones(n, dtype=bool))
    registry: list[complex] = []
    meromorphic = _has_poles(expr)

    def decide(idx, cls, step_count, values):
        classes[idx] = cls
        steps[idx] = step_count
        final[idx] = values

    def hare_substep(act, orbit_index):
        # advances the hare by one orbit step; returns surviving indices
        w, fl = evaluate_many(expr, hare[act])
        m = np.abs(w)
        pole = fl == POLE_FLAG
        if meromorphic:
            pole = pole | (m >= _POLE_LANDING)
        if pole.any():
            hit = act[pole]
            decide(hit, OrbitClass.POLE_HIT, orbit_index, hare[hit])
            pole_steps[hit] = orbit_index
        over = (fl == OVERFLOW_FLAG) & ~pole
        if over.any():
            hit = act[over]
            decide(hit, OrbitClass.ESCAPING, orbit_index + 1, hare[hit])
        keep = ~(pole | over)
        act = act[keep]
        w, m = w[keep], m[keep]
        grew = (hmod[act] > r_esc) & (m > hmod[act])
        grow[act] = np.where(grew, grow[act] + 1, 0).astype(np.int16)
        hare[act] = w
        hmod[act] = m
        esc = grow[act] >= _GROWTH_RUN
        if esc.any():
            hit = act[esc]
            decide(hit, OrbitClass.ESCAPING, orbit_index + 1, hare[hit])
            act = act[~esc]
        return act

    for loop in range(1, budget + 1):
        if active.size == 0:
            break
        act = hare_substep(active, 2 * loop - 2)
        act = hare_substep(act, 2 * loop - 1)
        if act.size:
            w, fl = evaluate_many(expr, tort[act])
            bad = fl != 0
            if bad.any():
                # the hare has already visited this transition; a marker here
                # without a prior decision means the value sits right on the
                # detection threshold, so resolve it the same way
                hit = act[bad & (fl == POLE_FLAG)]
                if hit.size:
                    decide(hit, OrbitClass.POLE_HIT, loop - 1, tort[hit])
                    pole_steps[hit] = loop - 1
                hit = act[bad & (fl != POLE_FLAG)]
                if hit.size:
                    decide(hit, OrbitClass.ESCAPING, loop, tort[hit])
                act = act[~bad]
                w = w[~bad]
            tort[act] = w
            close = np.abs(hare[act] - tort[act]) <= _FLOYD_TOL
            if close.any():
                batch = act[close]
                ok, reps = _extract_cycles(expr, tort[batch])
                for i, idx in enumerate(batch):
                    if not ok[i]:
                        decide(np.array([idx]), OrbitClass.UNDECIDED, budget, tort[idx])
                        continue
                    rep = complex(reps[i])
                    cid = 0
                    for j, existing in enumerate(registry):
                        if abs(rep - existing) <= _CYCLE_MATCH_TOL:
                            cid = j + 1
                            break
                    if cid == 0:
                        registry.append(rep)
                        cid = len(registry)
                    decide(np.array([idx]), OrbitClass.ATTRACTED, loop, rep)
                    cyc[idx] = cid
                act = act[~close]
        active = act

    if active.size:
        final[active] = tort[active]
    return classes, steps, cyc, final, pole_steps, tuple(registry)


def iterate_orbit(f, z0: complex, max_steps: int = 1000, R_esc: float = _ESCAPE_DEFAULT) -> OrbitResult:
    """Classify the orbit of a single starting point.

    Escape requires the modulus to sit beyond R_esc and grow on three
    consecutive steps (or to overflow outright); cycles are detected by
    Floyd tortoise-and-hare with tolerance 1e-9; running out of budget
    yields undecided.  Failures never raise, they absorb into undecided.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if not R_esc >= 10.0:
        raise ValueError("escape radius must be at least 10")
    expr = _as_expr(f)
    classes, steps, cyc, final, pole_steps, _ = _classify_points(
        expr, np.array([z0], dtype=np.complex128), max_steps, float(R_esc)
    )
    return OrbitResult(
        OrbitClass(int(classes[0])),
        int(steps[0]),
        complex(final[0]),
        int(cyc[0]),
        int(pole_steps[0]),
    )


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


def _pixel_centers(center: complex, half_width: float, resolution: int) -> np.ndarray:
    frac = (np.arange(resolution) + 0.5) / resolution
    xs = center.real - half_width + 2.0 * half_width * frac
    ys = center.imag + half_width - 2.0 * half_width * frac
    return xs[None, :] + 1j * ys[:, None]


def classify_grid(f, window, resolution: int, budget: int, r_esc: float = _ESCAPE_DEFAULT) -> ClassifiedGrid:
    """Classify every pixel-center orbit in a square window.

    window is (center, half_width); row 0 is the top of the window and
    pixels are sampled at their centers.  The output is a pure function
    of (f, window, resolution, budget, r_esc).
    """
    center, half_width = window
    center = complex(center)
    half_width = float(half_width)
    resolution = int(resolution)
    if not 1 <= resolution <= _MAX_RESOLUTION:
        raise ValueError("resolution must lie in [1, %d]" % _MAX_RESOLUTION)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if not half_width > 0:
        raise ValueError("window half-width must be positive")
    if not r_esc >= 10.0:
        raise ValueError("escape radius must be at least 10")
    expr = _as_expr(f)
    pts = _pixel_centers(center, half_width, resolution).reshape(-1)
    classes, steps, cyc, _, _, registry = _classify_points(expr, pts, int(budget), float(r_esc))
    shape = (resolution, resolution)
    return ClassifiedGrid(
        center,
        half_width,
        resolution,
        int(budget),
        float(r_esc),
        classes.reshape(shape),
        steps.reshape(shape),
        cyc.reshape(shape),
        registry,
    )


def _component_keys(grid: ClassifiedGrid) -> np.ndarray:
    # one key per labelable class; 0 marks barrier pixels (undecided and
    # pole-hit alike, the latter being Julia-adjacent)
    classes = grid.classes.reshape(-1)
    cyc = grid.cycle_ids.reshape(-1).astype(np.int64)
    keys = np.zeros(classes.size, dtype=np.int64)
    keys[classes == OrbitClass.ESCAPING] = 1
    attracted = classes == OrbitClass.ATTRACTED
    keys[attracted] = 2 + cyc[attracted] * 4
    return keys


def label_components(grid: ClassifiedGrid) -> ClassifiedGrid:
    """Union-find labeling of 4-connected same-class decided pixels.

    Escaping pixels form one class; attracted pixels split by cycle id.
    Undecided and pole-hit pixels stay at label 0 and separate
    components.  Label ids count up in raster order of each component's
    first pixel.
    """
    res = grid.resolution
    keys = _component_keys(grid)
    parent = np.arange(res * res, dtype=np.int64)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for r in range(res):
        base = r * res
        for c in range(res):
            i = base + c
            k = keys[i]
            if k == 0:
                continue
            if c > 0 and keys[i - 1] == k:
                ra, rb = find(i), find(i - 1)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            if r > 0 and keys[i - res] == k:
                ra, rb = find(i), find(i - res)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    labels = np.zeros(res * res, dtype=np.int32)
    next_label = 1
    assigned: dict[int, int] = {}
    for i in range(res * res):
        if keys[i] == 0:
            continue
        root = find(i)
        lab = assigned.get(root)
        if lab is None:
            lab = next_label
            assigned[root] = lab
            next_label += 1
        labels[i] = lab
    return replace(grid, labels=labels.reshape(res, res))


def component_summaries(grid: ClassifiedGrid) -> list:
    """Per-component JSON-ready summaries of a labeled grid."""
    if grid.labels is None:
        raise ValueError("grid has no labels; run label_components first")
    labels = grid.labels
    out = []
    for lab in range(1, int(labels.max(initial=0)) + 1):
        mask = labels == lab
        rows, cols = np.nonzero(mask)
        cls = OrbitClass(int(grid.classes[rows[0], cols[0]]))
        touches = bool(
            (rows == 0).any()
            or (cols == 0).any()
            or (rows == grid.resolution - 1).any()
            or (cols == grid.resolution - 1).any()
        )
        out.append(
            {
                "id": int(lab),
                "class": _CLASS_NAMES[cls],
                "pixels": int(mask.sum()),
                "touches_boundary": touches,
            }
        )
    return out


# ---------------------------------------------------------------------------
# boundedness probe
# ---------------------------------------------------------------------------


def _seed_pixel(resolution: int) -> tuple[int, int]:
    # windows are recentered on the seed, so the seed pixel is the center one
    return resolution // 2, resolution // 2


def _component_stats(grid: ClassifiedGrid, row: int, col: int):
    labels = grid.labels
    lab = int(labels[row, col])
    if lab == 0:
        return None
    mask = labels == lab
    rows, cols = np.nonzero(mask)
    res = grid.resolution
    touches = bool(
        (rows == 0).any() or (cols == 0).any() or (rows == res - 1).any() or (cols == res - 1).any()
    )
    px = 2.0 * grid.half_width / res
    width = (cols.max() - cols.min() + 1) * px
    height = (rows.max() - rows.min() + 1) * px
    # collar: every pixel 4-adjacent to the component must be decided
    collar_ok = True
    if not touches:
        padded = np.zeros((res + 2, res + 2), dtype=bool)
        padded[1:-1, 1:-1] = mask
        neighbor = (
            np.roll(padded, 1, axis=0)
            | np.roll(padded, -1, axis=0)
            | np.roll(padded, 1, axis=1)
            | np.roll(padded, -1, axis=1)
        )[1:-1, 1:-1] & ~mask
        undecided = grid.classes == OrbitClass.UNDECIDED
        collar_ok = not bool((neighbor & undecided).any())
    return {
        "label": lab,
        "pixels": int(mask.sum()),
        "touches": touches,
        "diameter": float(math.hypot(width, height)),
        "collar_decided": collar_ok,
    }


def boundedness_probe(f, seed: complex, scales, resolution: int = 256, budget: int = 256,
                      r_esc: float = _ESCAPE_DEFAULT) -> ComponentReport:
    """Probe whether the component holding the seed stays bounded.

    Windows are centered on the seed, one per half-width in scales
    (probed in ascending order).  Verdicts:

    * unbounded-empirical: the component reaches the window edge at every
      scale and its diameter grows at least half-proportionally to the
      half-width;
    * bounded-empirical: at some scale the component stays strictly
      inside the window with every adjacent pixel decided;
    * inconclusive: anything else.

    Raises SeedUndecidedError when the seed pixel has no component at the
    smallest scale (undecided or pole-hit).
    """
    expr = _as_expr(f)
    seed = complex(seed)
    hw_list = sorted(float(s) for s in scales)
    if not hw_list:
        raise ValueError("scales must be a nonempty list of half-widths")
    if any(not s > 0 for s in hw_list):
        raise ValueError("scales must be positive half-widths")
    row, col = _seed_pixel(int(resolution))
    observations = []
    base = None
    for hw in hw_list:
        grid = label_components(classify_grid(expr, (seed, hw), resolution, budget, r_esc))
        stats = _component_stats(grid, row, col)
        if stats is None:
            if hw == hw_list[0]:
                cls = OrbitClass(int(grid.classes[row, col]))
                raise SeedUndecidedError(
                    "seed pixel is %s at the smallest scale; no component to probe"
                    % _CLASS_NAMES[cls]
                )
            observations.append({"half_width": hw, "component": None})
            continue
        if base is None:
            base = (grid, stats)
        observations.append(
            {
                "half_width": hw,
                "pixels": stats["pixels"],
                "touches": stats["touches"],
                "diameter": stats["diameter"],
                "collar_decided": stats["collar_decided"],
            }
        )
    base_grid, base_stats = base
    seed_class = OrbitClass(int(base_grid.classes[row, col]))
    full = [o for o in observations if "touches" in o]
    bounded = any((not o["touches"]) and o["collar_decided"] for o in full)
    unbounded = False
    if len(full) == len(observations) and all(o["touches"] for o in full):
        first, last = full[0], full[-1]
        ratio_needed = 0.5 * last["half_width"] / first["half_width"]
        unbounded = last["diameter"] >= first["diameter"] * ratio_needed
    if bounded:
        verdict = "bounded-empirical"
    elif unbounded:
        verdict = "unbounded-empirical"
    else:
        verdict = "inconclusive"
    return ComponentReport(
        base_stats["label"],
        _CLASS_NAMES[seed_class],
        base_stats["pixels"],
        base_stats["touches"],
        verdict,
        tuple(hw_list),
        tuple(observations),
    )


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def to_ppm(grid: ClassifiedGrid) -> bytes:
    """Render the class map as a binary PPM (P6) image.

    Fixed colormap: escaping pixels in grayscale scaled by step count,
    attracted pixels from an 8-color palette cycled by cycle id, pole
    hits in red, undecided in black.
    """
    res = grid.resolution
    rgb = np.zeros((res, res, 3), dtype=np.uint8)
    esc = grid.classes == OrbitClass.ESCAPING
    if esc.any():
        shade = 40 + (215 * np.minimum(grid.steps[esc], grid.budget)) // max(grid.budget, 1)
        rgb[esc] = shade.astype(np.uint8)[:, None]
    att = grid.classes == OrbitClass.ATTRACTED
    if att.any():
        idx = (grid.cycle_ids[att] - 1) % len(_PALETTE)
        palette = np.array(_PALETTE, dtype=np.uint8)
        rgb[att] = palette[idx]
    rgb[grid.classes == OrbitClass.POLE_HIT] = np.array(_POLE_COLOR, dtype=np.uint8)
    header = b"P6\n%d %d\n255\n" % (res, res)
    return header + rgb.tobytes()
