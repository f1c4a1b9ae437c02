"""SVG rendering of orbit tilings in the horocyclic coordinates.

A window's cell (i, j) becomes a rectangle with upper-left corner at
(c + e^d * X(i, j), d - i log(rate)), width e^d rate^-i |letter| and height
log(rate): rows abut vertically, consecutive tiles abut horizontally, and
children span exactly their parent's horizontal extent.  Geometry is
emitted as 50-significant-digit decimal strings computed from the exact
coordinates, and the abutment checks operate on those emitted strings.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from .orbit import BaseWindow, OverlayWindow, row_coordinates
from .substitution import distribution, growth_rate

DIGITS = 50
_WORK_DPS = DIGITS + 12


@dataclass
class TileRect:
    letter: str
    x: str        # decimal strings at display precision
    y: str
    width: str
    height: str


def _mp(value) -> mpmath.mpf:
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def _fmt(value: mpmath.mpf) -> str:
    return mpmath.nstr(value, DIGITS, strip_zeros=False)


def tiling_cells(window, c=0, d=0) -> list[list[TileRect]]:
    """Display-precision rectangles for every cell of a window, row by row."""
    c, d = Fraction(c), Fraction(d)
    with mpmath.workdps(_WORK_DPS):
        if isinstance(window, OverlayWindow):
            ov = window.ov
            rate = ov.lam
            dist = ov.nu
            base = window.base
            rows = [(i, window.rows[i].base_off,
                     [ov.letters[t].alpha for t in window.rows[i].letters])
                    for i in range(window.height)]
        elif isinstance(window, BaseWindow):
            rate = growth_rate(window.system)
            dist = distribution(window.system)
            base = window
            rows = [(i, 0, list(row.letters)) for i, row in enumerate(window.rows)]
        else:
            raise TypeError(f"cannot render {type(window).__name__}")
        exp_d = mpmath.e ** _mp(d)
        log_rate = mpmath.log(_mp_from_real(rate))
        out = []
        for i, off, letters in rows:
            xs = row_coordinates(base, dist, rate, i)
            y = _fmt(_mp(d) - i * log_rate)
            height = _fmt(log_rate)
            cells = []
            for pos, letter in enumerate(letters):
                left = xs[off + pos]
                right = xs[off + pos + 1]
                x = _fmt(_mp(c) + exp_d * _mp_from_real(left))
                width = _fmt(exp_d * (_mp_from_real(right) - _mp_from_real(left)))
                cells.append(TileRect(letter, x, y, width, height))
            out.append(cells)
        return out


def _mp_from_real(value) -> mpmath.mpf:
    bits = int(_WORK_DPS * 3.4) + 16
    lo, hi = value.interval(bits)
    mid = (lo + hi) / 2
    return mpmath.mpf(mid.numerator) / mid.denominator


def verify_cell_geometry(rows: list[list[TileRect]],
                         tolerance: float = 1e-9) -> list[str]:
    """Check, on the emitted decimals, that consecutive tiles in each row
    abut within the relative tolerance."""
    problems = []
    with mpmath.workdps(_WORK_DPS):
        for i, cells in enumerate(rows):
            if not cells:
                continue
            row_width = sum(mpmath.mpf(cell.width) for cell in cells)
            for k in range(len(cells) - 1):
                right = mpmath.mpf(cells[k].x) + mpmath.mpf(cells[k].width)
                gap = abs(right - mpmath.mpf(cells[k + 1].x))
                if gap > tolerance * row_width:
                    problems.append(f"row {i}: gap {float(gap):.3e} after tile {k}")
    return problems


def verify_parent_extents(window, rows: list[list[TileRect]],
                          tolerance: float = 1e-9) -> list[str]:
    """Children of each core cell must span exactly their parent's
    horizontal extent (checked on the emitted decimals)."""
    problems = []
    with mpmath.workdps(_WORK_DPS):
        height = len(rows)
        for i in range(height - 1):
            if isinstance(window, OverlayWindow):
                parents = window.parents[i]
            else:
                parents = window.parents[i]
            core = window.core(i)
            for pos in core:
                kids = [t for t, par in enumerate(parents) if par == pos]
                if not kids or pos >= len(rows[i]) or (kids[-1] >= len(rows[i + 1])):
                    continue
                parent = rows[i][pos]
                first, last = rows[i + 1][kids[0]], rows[i + 1][kids[-1]]
                p_left = mpmath.mpf(parent.x)
                p_right = p_left + mpmath.mpf(parent.width)
                c_left = mpmath.mpf(first.x)
                c_right = mpmath.mpf(last.x) + mpmath.mpf(last.width)
                scale = max(mpmath.mpf(parent.width), mpmath.mpf("1e-30"))
                if abs(p_left - c_left) > tolerance * scale or \
                        abs(p_right - c_right) > tolerance * scale:
                    problems.append(f"row {i}: children of column {pos} misaligned")
    return problems


def _color(letter: str) -> str:
    digest = hashlib.sha256(letter.encode()).digest()
    r = 120 + digest[0] % 120
    g = 120 + digest[1] % 120
    b = 120 + digest[2] % 120
    return f"rgb({r},{g},{b})"


def render_tiling(window, c=0, d=0, style: Optional[dict] = None,
                  overlay=None, overlay_c=None, overlay_d=None) -> str:
    """SVG 1.1 document for a window; a second window may be drawn over it
    with stroke-only rectangles."""
    style = style or {}
    scale = float(style.get("scale", 120.0))
    primary = tiling_cells(window, c, d)
    layers = [(primary, False)]
    if overlay is not None:
        oc = c if overlay_c is None else overlay_c
        od = d if overlay_d is None else overlay_d
        layers.append((tiling_cells(overlay, oc, od), True))

    shapes = []
    min_x = min_y = float("inf")
    max_x = max_y = float("-inf")
    for rows, outline in layers:
        for cells in rows:
            for cell in cells:
                x, y = float(cell.x), float(cell.y)
                w, h = float(cell.width), float(cell.height)
                # svg y axis points down; rows descend as i grows
                min_x, max_x = min(min_x, x), max(max_x, x + w)
                min_y, max_y = min(min_y, -y), max(max_y, -y + h)
    if min_x == float("inf"):
        min_x = min_y = 0.0
        max_x = max_y = 1.0
    pad = 0.05 * max(max_x - min_x, max_y - min_y, 1e-9)
    for rows, outline in layers:
        for cells in rows:
            for cell in cells:
                x = (float(cell.x) - min_x + pad) * scale
                y = (-float(cell.y) - min_y + pad) * scale
                w = float(cell.width) * scale
                h = float(cell.height) * scale
                if outline:
                    paint = ('fill="none" stroke="black" '
                             'stroke-width="1.2"')
                else:
                    paint = (f'fill="{_color(cell.letter)}" stroke="white" '
                             'stroke-width="0.4"')
                shapes.append(
                    f'<rect x="{x:.4f}" y="{y:.4f}" width="{w:.4f}" '
                    f'height="{h:.4f}" {paint}><title>{cell.letter}</title></rect>')
    width = (max_x - min_x + 2 * pad) * scale
    height = (max_y - min_y + 2 * pad) * scale
    body = "\n".join(shapes)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{width:.1f}" height="{height:.1f}">\n{body}\n</svg>\n')
