import math

import pytest

from merolab import parse
from merolab.expr import (
    BoundarySingularityError,
    WindingConvergenceError,
    poles_in_disk,
    winding_count,
)


def test_winding_counts_zeros_minus_poles():
    assert winding_count(parse("z^2"), (-1, 1, -1, 1)) == 2
    assert winding_count(parse("1/z"), (-1, 1, -1, 1)) == -1
    assert winding_count(parse("exp(z)"), (-1, 1, -1, 1)) == 0
    # two zeros, one pole inside the box
    f = parse("(z-0.2)*(z+0.3)/(z-0.1)")
    assert winding_count(f, (-1, 1, -1, 1)) == 1


def test_winding_rejects_boundary_singularity():
    # the pole sits on the left edge; depending on whether a sample lands
    # on it, either diagnostic is correct
    with pytest.raises((BoundarySingularityError, WindingConvergenceError)):
        winding_count(parse("1/z"), (0, 1, -1, 1))


def test_rational_pole_catalog():
    cat = poles_in_disk(parse("1/(z*(z-1)*(z-2))"), 5.0)
    locs = sorted((abs(b), m) for b, m in cat.entries)
    assert [(round(a, 9), m) for a, m in locs] == [(0.0, 1), (1.0, 1), (2.0, 1)]
    cat = poles_in_disk(parse("1/(z*(z-1)*(z-2))"), 1.5)
    assert len(cat.entries) == 2


def test_double_pole_multiplicity():
    cat = poles_in_disk(parse("1/(z^2*(z-1))"), 0.5)
    assert len(cat.entries) == 1
    loc, mult = cat.entries[0]
    assert abs(loc) < 1e-6 and mult == 2


def test_entire_functions_have_empty_catalog():
    for src in ("exp(z)", "z^2", "canprod(4)", "lacunary(2)", "z + 1 + exp(-z)"):
        assert poles_in_disk(parse(src), 100.0).entries == ()


def test_tan_poles_match_half_pi_lattice():
    cat = poles_in_disk(parse("tan(z)"), 10.0)
    expected = []
    k = 0
    while True:
        p = math.pi / 2 + k * math.pi
        if p > 10.0:
            break
        expected.extend([p, -p])
        k += 1
    got = sorted(b.real for b, _ in cat.entries)
    assert len(got) == len(expected)
    for g, e in zip(got, sorted(expected)):
        assert g == pytest.approx(e, abs=1e-6)
    assert all(abs(b.imag) < 1e-6 for b, _ in cat.entries)
    assert all(m == 1 for _, m in cat.entries)


def test_counting_radius_monotone():
    f = parse("tan(z)")
    counts = [len(poles_in_disk(f, r).entries) for r in (1.0, 2.0, 5.0, 8.0, 20.0)]
    assert counts == sorted(counts)
    # n(r) jumps by 2 each time the lattice pi/2 + k pi enters
    assert counts[0] == 0 if math.pi / 2 > 1.0 else 2
    assert counts[1] == 2
