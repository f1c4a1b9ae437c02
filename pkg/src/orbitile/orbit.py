"""Finite orbit windows and the explicit overlay construction.

A window materializes a finite block of an orbit: rows of letters with
global column offsets plus monotone parent maps between consecutive rows.
All postconditions are stated on row cores (columns whose full production
lies inside the window); boundaries are explicitly second-class.

Windows are anchored: global column 0 of every row is the leftmost child
of column 0 of the row above, so the left edges of the column-0 letters
share one vertical line and scaled coordinates need no per-row offsets.

The overlay construction places a window of one system against a window of
another, offset horizontally by c and vertically by d, and reads off the
composite letters row by row.  Single-letter second systems get a closed
form (their rows are uniform), which is what keeps tall windows cheap.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .config import TIE_LEFT, TIE_RAISE
from .errors import (DegenerateOffset, InvalidConstruction, NotExpansive,
                     NotPrimitive, WindowTooNarrow)
from .overlay import OverlayLetter, OverlaySystem, adjacent, verify_property3
from .precision import AdaptiveReal, compare_affine_exp
from .substitution import (Distribution, SubstitutionSystem, apply,
                           growth_rate, is_expansive, is_primitive,
                           nu_length)


@dataclass
class BaseRow:
    j_lo: int
    letters: tuple[str, ...]

    def __len__(self):
        return len(self.letters)


@dataclass
class BaseWindow:
    """Rows of a single substitution system's orbit; rows[i+1] is the full
    production of the parent segment [seg_lo[i], seg_hi[i]] of rows[i]."""

    system: SubstitutionSystem
    rows: list[BaseRow]
    parents: list[list[int]]      # parents[i][t] = position in rows[i]
    seg_lo: list[int]             # per non-final row: first produced parent
    seg_hi: list[int]
    meta: dict = field(default_factory=dict)

    @property
    def height(self):
        return len(self.rows)

    def core(self, i: int) -> range:
        if i >= self.height - 1:
            return range(0)
        return range(self.seg_lo[i], self.seg_hi[i] + 1)

    def _child_starts(self, i: int) -> list:
        """Per position of row i: index in row i+1 of its first child
        (None outside the produced segment); cached."""
        cache = getattr(self, "_starts_cache", None)
        if cache is None:
            cache = {}
            object.__setattr__(self, "_starts_cache", cache)
        if i not in cache:
            row = self.rows[i]
            starts: list[Optional[int]] = [None] * len(row)
            acc = 0
            for t in range(self.seg_lo[i], self.seg_hi[i] + 1):
                starts[t] = acc
                acc += len(self.system.rule(row.letters[t]))
            cache[i] = starts
        return cache[i]

    def children_span(self, i: int, pos: int) -> Optional[tuple[int, int]]:
        """(first, last) positions in row i+1 produced by rows[i][pos]."""
        if i >= self.height - 1 or not (self.seg_lo[i] <= pos <= self.seg_hi[i]):
            return None
        start = self._child_starts(i)[pos]
        return start, start + len(self.system.rule(self.rows[i].letters[pos])) - 1

    def label(self, i: int, pos: int):
        return self.rows[i].letters[pos]


def find_interior_occurrence(sys: SubstitutionSystem):
    """Minimal n and first letter (alphabet order) whose n-step image
    contains that letter strictly inside; returns (letter, n, positions)."""
    for n in range(1, 40):
        for letter in sys.alphabet:
            image = apply(sys, (letter,), n)
            interior = [t for t in range(1, len(image) - 1) if image[t] == letter]
            if interior:
                return letter, n, interior
    raise InvalidConstruction("no interior occurrence found within 40 steps")


def seed_orbit(sys: SubstitutionSystem, height: int,
               width_hint: Union[int, Sequence[int]] = 96,
               occurrence: int = 0) -> BaseWindow:
    """Materialize a window of a canonical orbit of a primitive expansive
    system: the orbit fixed by re-centering n-step images on a chosen
    interior occurrence (leftmost by default).

    width_hint caps letters per row (a single cap, or one per row); rows
    wider than the cap are trimmed to whole-parent segments around the
    anchor column, which keeps a cone of full productions around one
    vertical line.
    """
    if not is_primitive(sys):
        raise NotPrimitive(f"{sys.name} is not primitive")
    if not is_expansive(sys):
        raise NotExpansive(f"{sys.name} is not expansive")
    if height < 2:
        raise ValueError("height must be at least 2")
    min_cap = max(len(img) for _, img in sys.rules) + 2
    if isinstance(width_hint, int):
        caps = [max(width_hint, min_cap)] * height
    else:
        caps = [max(int(w), min_cap) for w in width_hint]
        if len(caps) < height:
            caps += [caps[-1]] * (height - len(caps))

    letter, n, interior = find_interior_occurrence(sys)
    anchor_t = interior[occurrence % len(interior)]
    # grow sigma^{kn}(letter) around the anchored occurrence until margins cover
    word = apply(sys, (letter,), n)
    anchor = anchor_t
    half = caps[0] // 2
    while (anchor < half or len(word) - anchor - 1 < half) and len(word) < 4_000_000:
        offset = len(apply(sys, word[:anchor], n))
        word = apply(sys, word, n)
        anchor = offset + anchor_t

    left = min(half, anchor)
    right = min(half, len(word) - anchor - 1)
    top = word[anchor - left: anchor + right + 1]
    rows = [BaseRow(j_lo=-left, letters=tuple(top))]
    parents: list[list[int]] = []
    seg_lo: list[int] = []
    seg_hi: list[int] = []
    for i in range(height - 1):
        row = rows[i]
        lengths = [len(sys.rule(tok)) for tok in row.letters]
        t_lo, t_hi = _trim_segment(lengths, -row.j_lo, caps[i + 1])
        produced: list[str] = []
        par: list[int] = []
        for t in range(t_lo, t_hi + 1):
            image = sys.rule(row.letters[t])
            produced.extend(image)
            par.extend([t] * len(image))
        # left edge of the new row: first child of segment start
        j_lo = _first_child_index(sys, row, t_lo)
        rows.append(BaseRow(j_lo=j_lo, letters=tuple(produced)))
        parents.append(par)
        seg_lo.append(t_lo)
        seg_hi.append(t_hi)
    meta = {"seed_letter": letter, "seed_power": n,
            "occurrence": occurrence % len(interior), "width_hint": caps[0]}
    window = BaseWindow(sys, rows, parents, seg_lo, seg_hi, meta)
    _check_anchor(window)
    return window


def _trim_segment(lengths, col0, cap):
    """Whole-parent segment containing col0 whose total production stays
    within cap letters, grown as evenly as possible around col0."""
    col0 = min(max(col0, 0), len(lengths) - 1)
    t_lo = t_hi = col0
    total = lengths[col0]
    while True:
        grew = False
        if t_hi + 1 < len(lengths) and total + lengths[t_hi + 1] <= cap:
            t_hi += 1
            total += lengths[t_hi]
            grew = True
        if t_lo - 1 >= 0 and total + lengths[t_lo - 1] <= cap:
            t_lo -= 1
            total += lengths[t_lo]
            grew = True
        if not grew:
            return t_lo, t_hi


def _first_child_index(sys, row: BaseRow, t_lo: int) -> int:
    """Global index of the first child of rows position t_lo, under the
    anchored convention (first child of global column 0 is column 0)."""
    col0 = -row.j_lo
    if not (0 <= col0 < len(row.letters)):
        raise WindowTooNarrow("anchor column left the materialized range")
    if t_lo >= col0:
        return sum(len(sys.rule(tok)) for tok in row.letters[col0:t_lo])
    return -sum(len(sys.rule(tok)) for tok in row.letters[t_lo:col0])


def _check_anchor(window: BaseWindow):
    for i, row in enumerate(window.rows):
        if not (row.j_lo <= 0 <= row.j_lo + len(row) - 1):
            raise InvalidConstruction(f"row {i} lost the anchor column")


def validate_base_window(window: BaseWindow) -> list[str]:
    """Independent re-validation: parent monotonicity, production equality
    on cores, and global index consistency.  Returns human-readable
    violation strings (empty = valid)."""
    sys = window.system
    problems = []
    for i in range(window.height - 1):
        row, nxt = window.rows[i], window.rows[i + 1]
        par = window.parents[i]
        if len(par) != len(nxt):
            problems.append(f"row {i}: parent array length mismatch")
            continue
        if any(par[t] > par[t + 1] for t in range(len(par) - 1)):
            problems.append(f"row {i}: parent map not monotone")
        covered = set(par)
        for pos in window.core(i):
            if pos not in covered:
                problems.append(f"row {i}: core column {pos} not covered")
                continue
            child_word = tuple(nxt.letters[t] for t in range(len(par)) if par[t] == pos)
            if child_word != sys.rule(row.letters[pos]):
                problems.append(f"row {i}: production mismatch at column {pos}")
        span = window.children_span(i, window.seg_lo[i])
        if span is not None and nxt.j_lo != _first_child_index(sys, row, window.seg_lo[i]):
            problems.append(f"row {i}: global index misalignment")
    return problems


# ----------------------------------------------------------------- geometry

@dataclass
class RowGeometry:
    """Integer geometry of one overlay row: which second-system row holds
    its top edge, how many rows it spans, and the tile index under each
    column's left edge."""

    Delta: int
    delta: int
    nabla: list[int]


class _UnitRows:
    """Closed-form second-system geometry for a single-letter alphabet:
    row Delta is ...bbb... with tile width gamma^-Delta, the parent of
    column t is floor(t / k), and the first child of t is k t."""

    def __init__(self, sys: SubstitutionSystem, eta: Distribution, gamma: AdaptiveReal):
        self.sys = sys
        self.letter = sys.alphabet[0]
        self.k = len(sys.rule(self.letter))
        self.gamma_frac = gamma.exact_rational()
        if self.gamma_frac is None:
            raise InvalidConstruction("unit system growth rate must be rational")
        if eta.weight(self.letter).exact_rational() != 1:
            raise InvalidConstruction("unit eta weight must normalize to 1")

    def x_edge(self, Delta: int, t: int) -> Fraction:
        return Fraction(self.gamma_frac) ** (-Delta) * t

    def letter_at(self, Delta: int, t: int) -> str:
        return self.letter

    def first_descendant(self, Delta: int, t: int, steps: int) -> int:
        return t * self.k ** steps

    def slice(self, Delta: int, lo: int, hi: int) -> tuple[str, ...]:
        return (self.letter,) * (hi - lo)

    def guess(self, Delta: int, x: float) -> int:
        return math.floor(x * float(self.gamma_frac) ** Delta)


class _ExplicitRows:
    """Second-system geometry backed by a materialized BaseWindow; row
    indices are the window's row indices."""

    def __init__(self, window: BaseWindow, eta: Distribution, gamma: AdaptiveReal):
        self.window = window
        self.eta = eta
        self.gamma = gamma
        self._xs: dict[int, list[AdaptiveReal]] = {}
        self._floats: dict[int, list[float]] = {}

    def _row(self, Delta: int) -> BaseRow:
        if not (0 <= Delta < self.window.height):
            raise WindowTooNarrow(
                f"second-system window lacks row {Delta} "
                f"(has 0..{self.window.height - 1})")
        return self.window.rows[Delta]

    def _prefix(self, Delta: int) -> list[AdaptiveReal]:
        if Delta not in self._xs:
            row = self._row(Delta)
            scale = self.gamma ** (-Delta)
            col0 = -row.j_lo
            xs = [None] * (len(row) + 1)
            xs[col0] = AdaptiveReal.from_rational(0)
            for t in range(col0, len(row)):
                xs[t + 1] = xs[t] + scale * self.eta.weight(row.letters[t])
            for t in range(col0 - 1, -1, -1):
                xs[t] = xs[t + 1] - scale * self.eta.weight(row.letters[t])
            self._xs[Delta] = xs
            self._floats[Delta] = [float(x) for x in xs]
        return self._xs[Delta]

    def x_edge(self, Delta: int, t: int) -> AdaptiveReal:
        xs = self._prefix(Delta)
        row = self._row(Delta)
        pos = t - row.j_lo
        if not (0 <= pos < len(xs)):
            raise WindowTooNarrow(f"row {Delta}: column {t} not materialized")
        return xs[pos]

    def letter_at(self, Delta: int, t: int) -> str:
        row = self._row(Delta)
        pos = t - row.j_lo
        if not (0 <= pos < len(row)):
            raise WindowTooNarrow(f"row {Delta}: column {t} not materialized")
        return row.letters[pos]

    def first_descendant(self, Delta: int, t: int, steps: int) -> int:
        for step in range(steps):
            row = self._row(Delta + step)
            pos = t - row.j_lo
            span = self.window.children_span(Delta + step, pos)
            if span is None:
                raise WindowTooNarrow(
                    f"row {Delta + step}: column {t} has no materialized children")
            t = self.window.rows[Delta + step + 1].j_lo + span[0]
        return t

    def slice(self, Delta: int, lo: int, hi: int) -> tuple[str, ...]:
        row = self._row(Delta)
        a, b = lo - row.j_lo, hi - row.j_lo
        if a < 0 or b > len(row):
            raise WindowTooNarrow(f"row {Delta}: slice [{lo},{hi}) not materialized")
        return row.letters[a:b]

    def guess(self, Delta: int, x: float) -> int:
        self._prefix(Delta)
        floats = self._floats[Delta]
        row = self._row(Delta)
        import bisect

        pos = bisect.bisect_right(floats, x) - 1
        return row.j_lo + max(0, min(pos, len(floats) - 2))


def delta_sequence(lam: AdaptiveReal, gamma: AdaptiveReal, d: Fraction,
                   i_lo: int, i_hi: int, on_tie: str = "floor",
                   K: Optional[int] = None) -> tuple[list[int], list[int]]:
    """Row correspondence: for each i in [i_lo, i_hi], the integer Delta_i
    with gamma^Delta_i <= e^d lam^i < gamma^(Delta_i + 1), plus the
    consecutive differences delta_i (asserted to be K or K-1).

    Decisions are exact; no floating logarithms are consulted.  An exact
    left-edge tie has a well-defined floor and is returned under the
    default policy; on_tie='raise' turns it into DegenerateOffset.
    """
    from .overlay import compute_K

    d = Fraction(d)
    if K is None:
        K = compute_K(lam, gamma)
    lam_f, gam_f = float(lam), float(gamma)

    def sign_at(i, Delta):
        # sign of e^d lam^i - gamma^Delta
        return compare_affine_exp(lam ** i, d, -(gamma ** Delta))

    Deltas = []
    for i in range(i_lo, i_hi + 1):
        guess = math.floor((float(d) + i * math.log(lam_f)) / math.log(gam_f))
        Delta = guess
        while sign_at(i, Delta) < 0:
            Delta -= 1
        while sign_at(i, Delta + 1) >= 0:
            Delta += 1
        if on_tie == "raise" and sign_at(i, Delta) == 0:
            raise DegenerateOffset(
                f"e^d lam^{i} equals gamma^{Delta} exactly")
        Deltas.append(Delta)
    deltas = [b - a for a, b in zip(Deltas, Deltas[1:])]
    for value in deltas:
        if value not in (K, K - 1):
            raise InvalidConstruction(
                f"row span {value} outside {{K-1, K}} = {{{K - 1}, {K}}}")
    return Deltas, deltas


def _nabla_walk(side, Delta: int, neg_target: AdaptiveReal, d: Fraction,
                c_minus, start: int, tie: str):
    """Index t with x_edge(t) <= e^-d * U + c <= x_edge(t+1); exact ties
    follow the policy (raise, or take the smaller index).

    neg_target is -U as an AdaptiveReal; c_minus subtracts c from tile
    edges (both hoisted by the caller since they are loop invariants)."""

    def sign_at(t):
        # sign of x_edge(t) - (e^-d U + c)
        return compare_affine_exp(neg_target, -d, c_minus(side.x_edge(Delta, t)))

    t = start
    s = sign_at(t)
    while s > 0:
        t -= 1
        s = sign_at(t)
    if s == 0:
        if tie == TIE_LEFT:
            return t - 1, True
        raise DegenerateOffset(f"offset lands exactly on a tile edge (row {Delta})")
    while True:
        s1 = sign_at(t + 1)
        if s1 < 0:
            t += 1
            continue
        if s1 == 0:
            if tie == TIE_LEFT:
                return t, True
            raise DegenerateOffset(f"offset lands exactly on a tile edge (row {Delta})")
        return t, False


# --------------------------------------------------------------- overlay build

@dataclass
class OverlayRow:
    j_lo: int                   # global column of the first overlay letter
    letters: list[int]          # indices into the overlay alphabet
    base_off: int               # position offset into the base window row


@dataclass
class OverlayWindow:
    ov: OverlaySystem
    base: BaseWindow
    rows: list[OverlayRow]
    parents: list[list[int]]    # overlay-relative parent positions
    geometry: list[RowGeometry]
    c: Fraction
    d: Fraction
    meta: dict = field(default_factory=dict)
    side: object = None         # second-system row accessor (set by builder)

    @property
    def height(self):
        return len(self.rows)

    def letter(self, i: int, pos: int) -> OverlayLetter:
        return self.ov.letters[self.rows[i].letters[pos]]

    def label(self, i: int, pos: int) -> int:
        return self.rows[i].letters[pos]

    def core(self, i: int) -> range:
        """Positions of row i whose full production lies in overlay row i+1."""
        if i >= self.height - 1:
            return range(0)
        counts: dict[int, int] = {}
        for p in self.parents[i]:
            counts[p] = counts.get(p, 0) + 1
        out_lo, out_hi = None, None
        for pos in range(len(self.rows[i].letters)):
            expect = len(self.ov.sysA.rule(self.letter(i, pos).alpha))
            if counts.get(pos, 0) == expect:
                if out_lo is None:
                    out_lo = pos
                out_hi = pos
        if out_lo is None:
            return range(0)
        return range(out_lo, out_hi + 1)


def build_overlay_orbit(ov: OverlaySystem, orbitA: BaseWindow,
                        orbitB: Optional[BaseWindow], c, d,
                        tie: str = TIE_RAISE) -> OverlayWindow:
    """Construct the explicit overlay window from a first-system window, a
    second-system window (or the closed form for single-letter systems),
    and rational offsets c (horizontal) and d (vertical).

    The overlay has one row fewer than orbitA: the overhang words of row i
    are read off the produced second-system row, which needs row i+1 data.
    """
    c, d = Fraction(c), Fraction(d)
    if orbitA.system is not ov.sysA and orbitA.system != ov.sysA:
        raise InvalidConstruction("first window is not over the overlay's first system")
    if len(ov.sysB.alphabet) == 1:
        side = _UnitRows(ov.sysB, ov.eta, ov.gamma)
    else:
        if orbitB is None:
            raise WindowTooNarrow("second-system window required for non-unit systems")
        side = _ExplicitRows(orbitB, ov.eta, ov.gamma)

    hA = orbitA.height
    Deltas, deltas = delta_sequence(ov.lam, ov.gamma, d, 0, hA - 1, K=ov.K)

    # scaled left-edge coordinates of every base row, anchored at column 0
    xs_rows: list[list[AdaptiveReal]] = []
    floats_rows: list[list[float]] = []
    for i in range(hA):
        xs = row_coordinates(orbitA, ov.nu, ov.lam, i)
        xs_rows.append(xs)
        floats_rows.append([float(x) for x in xs])

    # nabla arrays for every base row (len + 1 entries: one per left edge,
    # plus the right edge of the last letter)
    exp_md = math.exp(-float(d))
    c_float = float(c)
    c_rational = Fraction(c)

    def c_minus(edge):
        # edge - c, staying in plain Fractions when the edge is one
        if isinstance(edge, Fraction):
            return edge - c_rational
        return edge - AdaptiveReal.from_rational(c_rational)

    nablas: list[list[int]] = []
    had_tie = False
    for i in range(hA):
        Delta = Deltas[i]
        out = []
        prev = None
        for pos in range(len(orbitA.rows[i]) + 1):
            x_float = exp_md * floats_rows[i][pos] + c_float
            start = side.guess(Delta, x_float)
            if prev is not None:
                start = max(start, prev)
            neg_target = -xs_rows[i][pos]
            nabla, tied = _nabla_walk(side, Delta, neg_target, d, c_minus, start, tie)
            had_tie = had_tie or tied
            if prev is not None and nabla < prev:
                raise InvalidConstruction("nabla sequence must be nondecreasing")
            out.append(nabla)
            prev = nabla
        nablas.append(out)

    # children start positions per base row
    child_start: list[list[Optional[int]]] = [
        orbitA._child_starts(i) for i in range(hA - 1)]

    H = hA - 1
    rows: list[OverlayRow] = []
    geometry: list[RowGeometry] = []
    usable: list[tuple[int, int]] = []
    for i in range(H):
        u_lo, u_hi = orbitA.seg_lo[i], orbitA.seg_hi[i] - 1
        usable.append((u_lo, u_hi))
    ranges: list[tuple[int, int]] = []
    for i in range(H):
        lo, hi = usable[i]
        if i > 0:
            plo, phi = ranges[i - 1]
            span_lo = child_start[i - 1][plo]
            prev_row = orbitA.rows[i - 1]
            span_hi = (child_start[i - 1][phi]
                       + len(ov.sysA.rule(prev_row.letters[phi])) - 1)
            lo, hi = max(lo, span_lo), min(hi, span_hi)
        if lo > hi:
            raise WindowTooNarrow(f"overlay row {i} came out empty; widen the windows")
        ranges.append((lo, hi))

    for i in range(H):
        lo, hi = ranges[i]
        Delta, delta = Deltas[i], deltas[i]
        row = orbitA.rows[i]
        letters: list[int] = []

        def p_word(pos):
            nab = nablas[i][pos]
            m = side.first_descendant(Delta, nab, delta)
            n_pos = child_start[i][pos]
            n_nab = nablas[i + 1][n_pos]
            if n_nab < m:
                raise InvalidConstruction("descendant index precedes image start")
            return side.slice(Deltas[i + 1], m, n_nab)

        for pos in range(lo, hi + 1):
            alpha = row.letters[pos]
            beta = side.slice(Delta, nablas[i][pos], nablas[i][pos + 1])
            p = p_word(pos)
            s = p_word(pos + 1)
            idx = ov.find(alpha, beta, p, s, delta)
            if idx is None:
                raise InvalidConstruction(
                    f"constructed letter not in the alphabet at row {i}, col "
                    f"{row.j_lo + pos}: {(alpha, beta, p, s, delta)}")
            letters.append(idx)
        rows.append(OverlayRow(j_lo=row.j_lo + lo, letters=letters, base_off=lo))
        geometry.append(RowGeometry(Delta, delta, nablas[i][lo:hi + 2]))

    parents: list[list[int]] = []
    for i in range(H - 1):
        lo, hi = ranges[i]
        nlo, nhi = ranges[i + 1]
        par = []
        for pos in range(nlo, nhi + 1):
            base_parent = orbitA.parents[i][pos]
            par.append(base_parent - lo)
        parents.append(par)

    meta = {"c": str(c), "d": str(d), "tie": tie, "had_tie": had_tie,
            "systems": [ov.sysA.name, ov.sysB.name],
            "Delta_top": Deltas[0]}
    meta.update({f"seed_{k}": v for k, v in orbitA.meta.items()})
    window = OverlayWindow(ov, orbitA, rows, parents, geometry, c, d, meta)
    window.side = side
    return window


def nabla_indices(ov: OverlaySystem, orbitA: BaseWindow,
                  orbitB: Optional[BaseWindow], c, d, i: int,
                  tie: str = TIE_RAISE) -> list[int]:
    """The tile indices under the left edges of row i's columns (one extra
    entry for the right edge of the last column)."""
    window = build_overlay_orbit(ov, orbitA, orbitB, c, d, tie=tie)
    if i >= len(window.geometry):
        raise WindowTooNarrow(f"overlay window has {len(window.geometry)} rows")
    return list(window.geometry[i].nabla)


# ------------------------------------------------------------------ validation

def validate_overlay_window(window: OverlayWindow, samples: int = 100,
                            rng: Optional[random.Random] = None) -> list[str]:
    """Independent full re-validation of an overlay window: row adjacency,
    delta constancy, production on cores, overhang identity of row pairs,
    the two-sided tile-count inequality on sampled column ranges, alphabet
    membership of every used letter, and validity of the alpha projection.

    Returns human-readable violation strings; empty means valid.
    """
    ov = window.ov
    rng = rng or random.Random(0)
    problems: list[str] = []
    for i, row in enumerate(window.rows):
        letters = [ov.letters[t] for t in row.letters]
        geo = window.geometry[i]
        for x in letters:
            if x.delta != geo.delta:
                problems.append(f"row {i}: letter with span {x.delta} != {geo.delta}")
                break
        for t in range(len(letters) - 1):
            if not adjacent(letters[t], letters[t + 1]):
                problems.append(f"row {i}: adjacency fails at position {t}")
        # consecutive columns cover disjoint nonempty tile ranges (single-
        # tile covering words are legitimate, so indices may touch)
        for t in range(len(geo.nabla) - 1):
            if geo.nabla[t + 1] < geo.nabla[t] + 1:
                problems.append(f"row {i}: tile indices fail to increase at {t}")
                break
    # production + property-3 per row pair
    for i in range(window.height - 1):
        par = window.parents[i]
        if any(par[t] > par[t + 1] for t in range(len(par) - 1)):
            problems.append(f"row {i}: overlay parent map not monotone")
        blocks: dict[int, list[OverlayLetter]] = {}
        for t, p in enumerate(par):
            blocks.setdefault(p, []).append(window.letter(i + 1, t))
        expected = {}
        for pos in range(len(window.rows[i].letters)):
            base_pos = pos + window.rows[i].base_off
            alpha = window.letter(i, pos).alpha
            expected[pos] = len(ov.sysA.rule(alpha))
        core = [pos for pos, want in expected.items()
                if len(blocks.get(pos, [])) == want]
        for pos in core:
            x = window.letter(i, pos)
            if not ov.is_production(x, blocks[pos]):
                problems.append(f"row {i}: production fails at position {pos}")
        if core:
            seg = _longest_consecutive(core)
            w = [window.letter(i, pos) for pos in seg]
            parts = [blocks[pos] for pos in seg]
            result = verify_property3(ov, w, parts)
            if not result.ok:
                problems.append(
                    f"row {i}: overhang identity fails "
                    f"(stage {result.stage}, index {result.failing_index})")
    problems.extend(_check_equation_one(window, samples, rng))
    problems.extend(_check_nabla_chain(window, max(10, samples // 10), rng))
    # distinct letters re-verified against the defining inequalities
    used = {idx for row in window.rows for idx in row.letters}
    for idx in used:
        if not ov.letter_is_valid(ov.letters[idx]):
            problems.append(f"letter {idx} fails its membership re-check")
    problems.extend(
        f"alpha projection: {msg}" for msg in validate_base_window(window.base))
    return problems


def _check_nabla_chain(window: OverlayWindow, samples: int,
                       rng: random.Random) -> list[str]:
    """Recheck the defining chain of the tile indices on sampled cells:
    the left edge of tile nabla sits at or left of the offset-mapped column
    edge, which sits at or left of the next tile edge."""
    ov = window.ov
    problems = []
    for _ in range(samples):
        i = rng.randrange(window.height)
        row = window.rows[i]
        if not row.letters:
            continue
        pos = rng.randrange(len(row.letters) + 1)
        geo = window.geometry[i]
        xs = row_coordinates(window.base, ov.nu, ov.lam, i)
        target_coef = xs[row.base_off + pos]
        for edge, want in ((geo.nabla[pos], -1), (geo.nabla[pos] + 1, 1)):
            x_edge = window.side.x_edge(geo.Delta, edge)
            if isinstance(x_edge, Fraction):
                x_edge = AdaptiveReal.from_rational(x_edge)
            sign = compare_affine_exp(-target_coef, -window.d,
                                      x_edge - AdaptiveReal.from_rational(window.c))
            if sign * want < 0:
                problems.append(f"tile-index chain fails at row {i} edge {pos}")
                break
    return problems


def _longest_consecutive(positions: list[int]) -> list[int]:
    best, cur = [], []
    for pos in positions:
        if cur and pos == cur[-1] + 1:
            cur.append(pos)
        else:
            cur = [pos]
        if len(cur) > len(best):
            best = cur
    return best


def _check_equation_one(window: OverlayWindow, samples: int,
                        rng: random.Random) -> list[str]:
    """Sampled two-sided bound on random column ranges j <= k of random
    rows: the tiles strictly between the two edges have eta-length at most
    the covered nu-length, which in turn is strictly less than gamma times
    the eta-length including one boundary tile on each side."""
    ov = window.ov
    problems = []

    def eta_span(i, lo, hi):
        if hi <= lo:
            return AdaptiveReal.from_rational(0)
        word = window.side.slice(window.geometry[i].Delta, lo, hi)
        return nu_length(ov.eta, word)

    for _ in range(samples):
        i = rng.randrange(window.height)
        row = window.rows[i]
        if not row.letters:
            continue
        a = rng.randrange(len(row.letters))
        b = rng.randrange(a, len(row.letters))
        geo = window.geometry[i]
        nab_j, nab_k1 = geo.nabla[a], geo.nabla[b + 1]
        word = tuple(window.letter(i, t).alpha for t in range(a, b + 1))
        mid = nu_length(ov.nu, word)
        # with k = j this is exactly the alphabet's first inequality chain
        lhs = eta_span(i, nab_j + 1, nab_k1)
        rhs = eta_span(i, nab_j, nab_k1 + 1)
        if lhs.compare(mid) > 0:
            problems.append(f"tile-count lower bound fails at row {i} cols {a}..{b}")
        if mid.compare(ov.gamma * rhs) >= 0:
            problems.append(f"tile-count upper bound fails at row {i} cols {a}..{b}")
    return problems


def row_coordinates(window: BaseWindow, dist: Distribution, rate: AdaptiveReal,
                    i: int) -> list[AdaptiveReal]:
    """Scaled left-edge coordinates of row i's letters (one extra entry for
    the right edge of the last letter), anchored so global column 0 sits
    at coordinate zero."""
    row = window.rows[i]
    scale = rate ** (-i)
    col0 = -row.j_lo
    if not (0 <= col0 <= len(row)):
        raise WindowTooNarrow(f"row {i} lost the anchor column")
    xs: list = [None] * (len(row) + 1)
    xs[col0] = AdaptiveReal.from_rational(0)
    for t in range(col0, len(row)):
        xs[t + 1] = xs[t] + scale * dist.weight(row.letters[t])
    for t in range(col0 - 1, -1, -1):
        xs[t] = xs[t + 1] - scale * dist.weight(row.letters[t])
    return xs


# ---------------------------------------------------------------- period search

@dataclass
class PeriodCandidate:
    pi: int
    shifts: list[int]           # global-column shift per row pair
    overlap: int                # smallest label overlap along the chain


def period_search(window, max_pi: int) -> list[PeriodCandidate]:
    """Vertical periods visible in the window: every pi <= max_pi for which
    rows i and i+pi agree in labels (under some horizontal shift covering
    at least half the shorter row) and in parent structure, consistently
    across all row pairs.  An empty list certifies no such period fits the
    window."""
    if window.height <= max_pi + 2:
        raise WindowTooNarrow("window too shallow for the requested period bound")
    out = []
    for pi in range(1, max_pi + 1):
        chains = _period_chains(window, pi)
        if chains:
            shifts, overlap = chains
            out.append(PeriodCandidate(pi, shifts, overlap))
    return out


def _row_labels(window, i):
    if isinstance(window, OverlayWindow):
        return window.rows[i].letters, window.rows[i].j_lo
    row = window.rows[i]
    return row.letters, row.j_lo


def _parent_global(window, i, j):
    """Global parent column of global column j of row i+1."""
    row, nxt = window.rows[i], window.rows[i + 1]
    pos = j - nxt.j_lo
    if not (0 <= pos < len(window.parents[i])):
        raise IndexError(pos)
    return window.parents[i][pos] + row.j_lo


def _admissible_shifts(window, i, pi):
    """Shifts tau with labels(i, j) == labels(i+pi, j+tau) on at least half
    the shorter row."""
    a, a_lo = _row_labels(window, i)
    b, b_lo = _row_labels(window, i + pi)
    need = max(1, min(len(a), len(b)) // 2)
    shifts = {}
    for tau in range(b_lo - a_lo - len(a) + need, b_lo - a_lo + len(b) - need + 1):
        lo = max(a_lo, b_lo - tau)
        hi = min(a_lo + len(a), b_lo + len(b) - tau)
        if hi - lo < need:
            continue
        ok = True
        for j in range(lo, hi):
            if a[j - a_lo] != b[j + tau - b_lo]:
                ok = False
                break
        if ok:
            shifts[tau] = hi - lo
    return shifts


def _period_chains(window, pi):
    height = window.height
    pairs = range(0, height - pi)
    states = None
    for i in pairs:
        adm = _admissible_shifts(window, i, pi)
        if not adm:
            return None
        if states is None:
            states = {tau: ([tau], n) for tau, n in adm.items()}
            continue
        nxt = {}
        for tau, n in adm.items():
            for prev_tau, (chain, overlap) in states.items():
                if _parents_compatible(window, i - 1, pi, prev_tau, tau):
                    cand = (chain + [tau], min(overlap, n))
                    if tau not in nxt or nxt[tau][1] < cand[1]:
                        nxt[tau] = cand
        if not nxt:
            return None
        states = nxt
    best = max(states.values(), key=lambda s: s[1])
    return best


def _parents_compatible(window, i, pi, tau_parent, tau_child):
    """Parent maps must commute with the shifts on the overlapping block."""
    _, a_lo = _row_labels(window, i + 1)
    a_len = len(_row_labels(window, i + 1)[0])
    _, b_lo = _row_labels(window, i + 1 + pi)
    b_len = len(_row_labels(window, i + 1 + pi)[0])
    lo = max(a_lo, b_lo - tau_child)
    hi = min(a_lo + a_len, b_lo + b_len - tau_child)
    checked = 0
    for j in range(lo, hi):
        try:
            want = _parent_global(window, i, j) + tau_parent
            got = _parent_global(window, i + pi, j + tau_child)
        except IndexError:
            continue
        if want != got:
            return False
        checked += 1
    return checked > 0


# --------------------------------------------------------- growth diagnostics

@dataclass
class GrowthReport:
    lengths: list[int]
    beta_lengths: Optional[list[int]]
    slopes: list[float]
    beta_slopes: Optional[list[float]]
    log_lambda: float
    bound_ok: bool


def growth_exponent_check(window, pi: int = 1, Delta: Optional[int] = None
                          ) -> GrowthReport:
    """Descend from the top-center letter, collecting the lengths of its
    descendant words and (for overlay windows) of their second-system
    words; report the per-level slopes against log lambda and check the
    linear sandwich between word length and second-system word length."""
    overlay = isinstance(window, OverlayWindow)
    if overlay:
        sysA = window.ov.sysA
        lam = float(window.ov.lam)

        def alpha_of(i, pos):
            return window.letter(i, pos).alpha
    else:
        sysA = window.system
        lam = float(growth_rate(sysA))

        def alpha_of(i, pos):
            return window.rows[i].letters[pos]

    lo = hi = len(window.rows[0].letters) // 2
    lengths = [1]
    beta_lengths = [len(window.letter(0, lo).beta)] if overlay else None
    for i in range(window.height - 1):
        par = window.parents[i]
        kids = [t for t, p in enumerate(par) if lo <= p <= hi]
        expected = sum(len(sysA.rule(alpha_of(i, p))) for p in range(lo, hi + 1))
        if not kids or len(kids) != expected:
            break  # the chain hit the window boundary
        lo, hi = kids[0], kids[-1]
        lengths.append(hi - lo + 1)
        if overlay:
            beta_lengths.append(sum(len(window.letter(i + 1, t).beta)
                                    for t in range(lo, hi + 1)))
    if len(lengths) < 3:
        raise WindowTooNarrow("descendant chain too short; deepen the window")
    # slopes normalized against the chain start so the additive offset
    # (which only decays like 1/k) cancels
    slopes = [(math.log(n) - math.log(lengths[0])) / k
              for k, n in enumerate(lengths) if k > 0]
    beta_slopes = None
    bound_ok = True
    if overlay:
        beta_slopes = [(math.log(n) - math.log(beta_lengths[0])) / k
                       for k, n in enumerate(beta_lengths) if k > 0]
        cap = max(len(x.beta) for x in window.ov.letters)
        for n, bn in zip(lengths, beta_lengths):
            if not (n <= bn <= cap * n):
                bound_ok = False
    return GrowthReport(lengths, beta_lengths, slopes, beta_slopes,
                        math.log(lam), bound_ok)
