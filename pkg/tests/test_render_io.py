import json
from fractions import Fraction

import pytest

from orbitile import jsonio
from orbitile.graph import build_orbit_graph, reduce_patch
from orbitile.orbit import build_overlay_orbit, seed_orbit
from orbitile.overlay import enumerate_alphabet
from orbitile.pq import base_of_label, collect_pattern_family
from orbitile.render import (render_tiling, tiling_cells, verify_cell_geometry,
                             verify_parent_extents)


@pytest.fixture(scope="module")
def unit_overlay(unit3, unit2):
    ov = enumerate_alphabet(unit3, unit2)
    base = seed_orbit(unit3, 6, width_hint=60)
    return build_overlay_orbit(ov, base, None, Fraction(1, 10), Fraction(1, 20))


def test_base_tiling_halving_rows(unit2):
    window = seed_orbit(unit2, 3, width_hint=12)
    rows = tiling_cells(window)
    # widths halve going down
    w0 = float(rows[0][0].width)
    w1 = float(rows[1][0].width)
    w2 = float(rows[2][0].width)
    assert abs(w0 / w1 - 2) < 1e-12
    assert abs(w1 / w2 - 2) < 1e-12
    assert verify_cell_geometry(rows) == []
    assert verify_parent_extents(window, rows) == []


def test_overlay_window_render_checks(unit_overlay):
    rows = tiling_cells(unit_overlay, Fraction(1, 10), Fraction(1, 20))
    assert verify_cell_geometry(rows) == []
    assert verify_parent_extents(unit_overlay, rows) == []


def test_figure_pair_overlay_svg(unit2, abaab):
    w1 = seed_orbit(unit2, 4, width_hint=24)
    w2 = seed_orbit(abaab, 4, width_hint=24)
    svg = render_tiling(w1, Fraction(1, 10), Fraction(0), overlay=w2)
    assert svg.startswith("<svg")
    assert svg.count("<rect") == sum(len(r.letters) for r in w1.rows) + \
        sum(len(r.letters) for r in w2.rows)
    assert 'fill="none"' in svg  # the overlaid system is stroke-only


def test_empty_window_svg(unit2):
    window = seed_orbit(unit2, 2, width_hint=4)
    window.rows = window.rows[:0]
    window.parents = []
    window.seg_lo = []
    window.seg_hi = []
    svg = render_tiling(window)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_base_window_round_trip(fib):
    window = seed_orbit(fib, 5, width_hint=40)
    text = jsonio.dumps(jsonio.window_doc(window))
    again = jsonio.window_from_doc(jsonio.loads(text))
    assert jsonio.dumps(jsonio.window_doc(again)) == text
    assert [r.letters for r in again.rows] == [r.letters for r in window.rows]


def test_overlay_window_round_trip(unit_overlay):
    text = jsonio.dumps(jsonio.window_doc(unit_overlay))
    again = jsonio.window_from_doc(jsonio.loads(text))
    assert jsonio.dumps(jsonio.window_doc(again)) == text
    assert [r.letters for r in again.rows] == \
        [r.letters for r in unit_overlay.rows]
    assert [g.nabla for g in again.geometry] == \
        [g.nabla for g in unit_overlay.geometry]


def test_patch_round_trip(unit_overlay):
    patch = reduce_patch(build_orbit_graph(unit_overlay),
                         lambda label: "Y")
    text = jsonio.dumps(jsonio.patch_doc(patch))
    again = jsonio.patch_from_doc(jsonio.loads(text))
    assert jsonio.dumps(jsonio.patch_doc(again)) == text
    assert again.up == patch.up
    assert {v: l.key() if hasattr(l, "key") else l
            for v, l in again.vertices.items()} == \
        {v: l.key() if hasattr(l, "key") else l
         for v, l in patch.vertices.items()}


def test_family_round_trip():
    family = collect_pattern_family(5, 5, heights=(5,), width=120, offsets=1,
                                    seed=3)
    text = jsonio.dumps(jsonio.family_doc(family))
    again = jsonio.family_from_doc(jsonio.loads(text))
    assert jsonio.dumps(jsonio.family_doc(again)) == text
    assert set(again.patterns) == set(family.patterns)
