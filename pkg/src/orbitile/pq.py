"""The two-letter surface substitutions, their position-decorated variant,
and the machinery that recovers row structure from labels alone.

Letters of the decorated system are tokens "Y.3", "W.5": the base letter
plus its place within the producing image.  In a reduced orbit graph these
place labels single out, inside every p-gonal face, exactly one oriented
path running along a row (the "horizontal" one); summing the induced
up/down increments recovers rows, columns, and parents with no access to
the generating window.  On top of that sit the local pattern family and
the membership checker for labelings of the surface graph.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import (BadParameters, BoundaryEdge, InconsistentCycle,
                     InvalidConstruction)
from .graph import (GraphPatch, Pattern, build_orbit_graph, extract_pattern,
                    pattern_candidates, reduce_patch)
from .overlay import OverlayLetter, OverlaySystem, adjacent, enumerate_alphabet
from .substitution import SubstitutionSystem, make_system

Y, W = "Y", "W"


def pq_substitution(p: int, q: int) -> SubstitutionSystem:
    """Two-letter system: Y maps to (Y W^(p-3))^(q-4) Y W^(p-4) and W to
    (Y W^(p-3))^(q-3) Y W^(p-4); primitive and expansive for p, q >= 5."""
    if p < 5 or q < 5:
        raise BadParameters("p and q must both be at least 5")
    block = (Y,) + (W,) * (p - 3)
    image_y = block * (q - 4) + (Y,) + (W,) * (p - 4)
    image_w = block * (q - 3) + (Y,) + (W,) * (p - 4)
    return make_system(f"pq{p}{q}", {Y: image_y, W: image_w})


def y_positions(sys: SubstitutionSystem, letter: str) -> tuple[int, ...]:
    """1-based positions of Y within the image of `letter`."""
    return tuple(i for i, tok in enumerate(sys.rule(letter), start=1) if tok == Y)


# ----------------------------------------------------------------- decoration

def decorated_token(base: str, pos: int) -> str:
    return f"{base}.{pos}"


def decoration(label) -> tuple[str, int]:
    """(base letter, place label) of a decorated token or of the first-
    system component of an overlay letter."""
    if isinstance(label, OverlayLetter):
        label = label.alpha
    if isinstance(label, tuple):
        label = label[0]
    base, _, pos = str(label).partition(".")
    if not pos:
        raise InvalidConstruction(f"label {label!r} carries no place decoration")
    return base, int(pos)


@dataclass(frozen=True)
class DecoratedSystem:
    """The place-decorated companion of a two-letter surface system."""

    base: SubstitutionSystem
    full: SubstitutionSystem
    reachable: SubstitutionSystem
    n_positions: int


def decorate(sys: SubstitutionSystem) -> DecoratedSystem:
    """Alphabet base x {1..N} with N the longest image; images spell out the
    base image with each letter tagged by its place.  The full system keeps
    every pair even though high places of short images never occur; the
    reachable restriction (the letters that do occur) is primitive and is
    what the orbit machinery consumes."""
    n = max(len(image) for _, image in sys.rules)
    rules_full = {}
    for a in sys.alphabet:
        image = sys.rule(a)
        decorated = tuple(decorated_token(tok, i)
                          for i, tok in enumerate(image, start=1))
        for i in range(1, n + 1):
            rules_full[decorated_token(a, i)] = decorated
    full = make_system(f"{sys.name}#", rules_full)
    occurring = sorted({tok for image in rules_full.values() for tok in image},
                       key=lambda t: (decoration(t)[1], decoration(t)[0]))
    rules_reach = {tok: rules_full[tok] for tok in occurring}
    reachable = make_system(f"{sys.name}#r", rules_reach)
    return DecoratedSystem(sys, full, reachable, n)


def base_of_label(label) -> str:
    return decoration(label)[0]


def surface_letter(label) -> str:
    """Y or W for plain, decorated, or overlay letters (the reduction map
    tolerates undecorated labels)."""
    if isinstance(label, OverlayLetter):
        label = label.alpha
    return str(label).partition(".")[0]


# ------------------------------------------------------------ horizontal type

def horizontal_type(labels: Sequence[int], producer: str, p: int,
                    sys: SubstitutionSystem) -> bool:
    """Is this sequence of place labels the row direction of a p-gon?

    Either a full run of p-1 consecutive places produced by one letter,
    with both endpoints at Y-places of its image, or the last p-3 places
    of one image followed by place 1 of the next (the run crossing a
    producer boundary), which has p-2 entries.
    """
    k = len(labels)
    if k not in (p - 1, p - 2):
        return False
    s_a = y_positions(sys, producer)
    img_len = len(sys.rule(producer))
    breaks = [t for t in range(k - 1) if labels[t + 1] != labels[t] + 1]
    if not breaks:
        return (k == p - 1 and labels[0] in s_a and labels[-1] in s_a
                and labels[-1] <= img_len)
    if len(breaks) == 1 and k == p - 2:
        t = breaks[0]
        return (t == k - 2 and labels[-1] == 1 and labels[t] == img_len
                and labels[0] == img_len - (p - 4) and labels[0] in s_a)
    return False


def find_horizontal_paths(face: Sequence, labels_of: Callable, p: int,
                          sys: SubstitutionSystem) -> dict:
    """All forward arcs of an oriented cycle whose place labels are of
    horizontal type and whose flanking corners are consistent.

    The cycle must be oriented with the produced row running left to
    right.  Orientation matters: place labels around a cycle can be
    palindromic, in which case the mirrored arc reads identically; the
    forward restriction breaks exactly that tie.  For the shorter
    (boundary-crossing) arcs the two flanking corners must themselves be
    consecutive places, which removes arcs that slide over a corner.
    """
    n = len(face)
    image_lengths = {len(sys.rule(a)) for a in sys.alphabet}
    found = {}
    for k in (p - 1, p - 2):
        if k > n:
            continue
        for start in range(n):
            path = tuple(face[(start + t) % n] for t in range(k))
            labels = [decoration(labels_of(v))[1] for v in path]
            for producer in sys.alphabet:
                if not horizontal_type(labels, producer, p, sys):
                    continue
                if k == p - 2:
                    before = face[(start - 1) % n]
                    after = face[(start + k) % n]
                    pb = decoration(labels_of(before))[1]
                    pa = decoration(labels_of(after))[1]
                    corners_ok = (pa == pb + 1
                                  or (pa == 1 and pb in image_lengths))
                    if not corners_ok:
                        continue
                found[path] = producer
                break
    return found


def face_horizontal_path(face: Sequence, labels_of: Callable, p: int,
                         sys: SubstitutionSystem):
    """The unique forward horizontal-type path of an oriented p-cycle;
    raises InconsistentCycle unless exactly one exists."""
    found = find_horizontal_paths(face, labels_of, p, sys)
    if len(found) != 1:
        exc = InconsistentCycle(
            f"{len(found)} horizontal-type paths in a {len(face)}-cycle",
            face=tuple(face))
        exc.count = len(found)
        raise exc
    return next(iter(found))


def count_horizontal_paths(face: Sequence, labels_of: Callable, p: int,
                           sys: SubstitutionSystem) -> int:
    return len(find_horizontal_paths(face, labels_of, p, sys))


# --------------------------------------------------------------- dy and rows

def _oriented(face) -> tuple:
    """Window faces arrive top-first; the canonical orientation runs the
    produced row left to right."""
    return tuple(reversed(face))


def dy(patch: GraphPatch, edge: tuple, sys: SubstitutionSystem, p: int) -> int:
    """Vertical increment of an oriented edge: 0 along the horizontal path
    of either face through it, +1 when the terminal vertex lies on that
    path, -1 when the initial vertex does."""
    u, v = edge
    faces = [_oriented(f) for f in patch.faces_through(u) if v in f]
    if len(faces) != 2:
        raise BoundaryEdge(f"edge {edge} borders {len(faces)} complete faces")
    return _dy_from_faces(faces, edge, patch.label, p, sys)


def _dy_from_faces(faces, edge, labels_of, p, sys) -> int:
    u, v = edge
    votes = []
    for f in faces:
        path = face_horizontal_path(f, labels_of, p, sys)
        pset = set(path)
        if u in pset and v in pset and _consecutive_on(path, u, v):
            return 0
        if v in pset and u not in pset:
            votes.append(1)
        elif u in pset and v not in pset:
            votes.append(-1)
        else:
            votes.append(None)
    real = [x for x in votes if x is not None]
    if not real or any(a != b for a, b in zip(real, real[1:])):
        raise InconsistentCycle(
            f"edge {edge} has no consistent vertical increment")
    return real[0]


def _consecutive_on(path, u, v):
    for a, b in zip(path, path[1:]):
        if {a, b} == {u, v}:
            return True
    return False


@dataclass
class Reconstruction:
    y: dict
    x: dict
    parent: dict          # vertex -> vertex
    parent_column: dict   # vertex -> x of parent
    vertices: set


def reconstruct_rows(patch: GraphPatch, sys: SubstitutionSystem, p: int,
                     q: int) -> Reconstruction:
    """Recover rows, columns and parents of a labeled reduced patch from
    the place decorations alone.

    Works on the vertices all of whose faces are materialized: vertical
    increments come from the horizontal-type paths, heights from summing
    them (checked to vanish around every face), columns from walking each
    horizontal line, and parents either along the remaining vertical edge
    or, for vertices without one, from the producer corner of the face
    whose horizontal path contains them.
    """
    usable = set(pattern_candidates(patch, q))
    if not usable:
        raise InconsistentCycle("no vertex has a fully materialized neighborhood")
    labels_of = patch.label

    face_paths = {}

    def path_of(face):
        key = tuple(face)
        if key not in face_paths:
            face_paths[key] = face_horizontal_path(_oriented(face), labels_of, p, sys)
        return face_paths[key]

    def edge_dy(u, v):
        faces = [f for f in patch.faces_through(u) if v in f]
        if len(faces) != 2:
            raise BoundaryEdge(f"edge {(u, v)} borders {len(faces)} complete faces")
        votes = []
        for f in faces:
            path = path_of(f)
            pset = set(path)
            if u in pset and v in pset and _consecutive_on(path, u, v):
                return 0
            if v in pset and u not in pset:
                votes.append(1)
            elif u in pset and v not in pset:
                votes.append(-1)
            else:
                votes.append(None)
        real = [x for x in votes if x is not None]
        if not real or len(set(real)) != 1:
            raise InconsistentCycle(f"edge {(u, v)} has inconsistent increments")
        return real[0]

    # heights: BFS over edges between usable vertices
    base = min(usable)
    yv = {base: 0}
    stack = [base]
    while stack:
        v = stack.pop()
        for u in patch.neighbors(v):
            if u not in usable:
                continue
            step = edge_dy(v, u)
            if u in yv:
                if yv[u] != yv[v] + step:
                    raise InconsistentCycle(
                        f"height disagreement at {u}: {yv[u]} vs {yv[v] + step}")
            else:
                yv[u] = yv[v] + step
                stack.append(u)

    # faces fully inside the usable set must have vanishing increments
    seen = set()
    for v in yv:
        for f in patch.faces_through(v):
            key = tuple(f)
            if key in seen or not all(u in yv for u in f):
                continue
            seen.add(key)
            total = 0
            for a, b in zip(f, f[1:] + f[:1]):
                total += edge_dy(a, b)
            if total != 0:
                raise InconsistentCycle("face increments do not vanish", face=key)

    # columns: order each horizontal line by walking its dy = 0 edges
    xv = {}
    for v in yv:
        if v in xv:
            continue
        line = {v}
        frontier = [v]
        while frontier:
            w = frontier.pop()
            for u in patch.neighbors(w):
                if u in yv and u not in line and edge_dy(w, u) == 0:
                    line.add(u)
                    frontier.append(u)
        ordered = _order_line(patch, line, edge_dy)
        for k, u in enumerate(ordered):
            xv[u] = k

    # parents
    parent = {}
    for v in yv:
        ups = [u for u in patch.neighbors(v)
               if u in yv and edge_dy(v, u) == -1]
        cand = None
        if len(ups) == 1:
            cand = ups[0]
        elif not ups:
            cand = _producer_corner(patch, v, path_of)
        else:
            raise InconsistentCycle(f"{v} has {len(ups)} upward edges")
        if cand is not None:
            parent[v] = cand
    parent_col = {v: xv[u] for v, u in parent.items() if u in xv}
    return Reconstruction(yv, xv, parent, parent_col, set(yv))


def _order_line(patch, line, edge_dy):
    """Order the vertices of one horizontal line along its row edges."""
    neigh = {}
    for v in line:
        neigh[v] = [u for u in patch.neighbors(v)
                    if u in line and edge_dy(v, u) == 0]
        if len(neigh[v]) > 2:
            raise InconsistentCycle(f"{v} has {len(neigh[v])} horizontal edges")
    ends = [v for v in line if len(neigh[v]) <= 1]
    start = min(ends) if ends else min(line)
    ordered = [start]
    prev = None
    while True:
        nxt = [u for u in neigh[ordered[-1]] if u != prev]
        if not nxt:
            break
        prev = ordered[-1]
        ordered.append(nxt[0])
        if ordered[-1] == start:
            raise InconsistentCycle("horizontal line closes into a cycle")
    if len(ordered) != len(line):
        raise InconsistentCycle("horizontal line is not a single path")
    return ordered


def _producer_corner(patch, v, path_of):
    """Parent of a vertex with no remaining vertical edge: the producer
    corner of the face whose horizontal path contains v inside the
    produced block (the corner cyclically preceding the path)."""
    for f in patch.faces_through(v):
        path = path_of(f)
        if v not in path:
            continue
        oriented = _oriented(f)
        n = len(oriented)
        if len(path) == n - 1:
            rest = [u for u in oriented if u not in set(path)]
            return rest[0]
        if v == path[-1]:
            continue  # the trailing place-1 vertex is produced by the far corner
        idx = oriented.index(path[0])
        return oriented[(idx - 1) % n]
    return None


# ------------------------------------------------------------- pattern family

@dataclass
class PatternFamily:
    p: int
    q: int
    ov: OverlaySystem
    base: SubstitutionSystem
    patterns: dict
    meta: dict = field(default_factory=dict)

    def __contains__(self, pattern: Pattern) -> bool:
        return pattern in self.patterns

    def __len__(self):
        return len(self.patterns)


def default_second_system(k: int = 2) -> SubstitutionSystem:
    return make_system(f"unit{k}", {"0": "0" * k})


def overlay_for_surface(p: int, q: int, sysB: Optional[SubstitutionSystem] = None,
                        slack: Fraction = None) -> tuple[OverlaySystem, SubstitutionSystem]:
    """The composite alphabet over the decorated (reachable) surface
    system; returns it with the base system used for decorations."""
    from .config import DEFAULT_SCALING_SLACK

    base = pq_substitution(p, q)
    deco = decorate(base)
    sysB = sysB or default_second_system()
    ov = enumerate_alphabet(deco.reachable, sysB,
                            slack or DEFAULT_SCALING_SLACK)
    return ov, base


def collect_pattern_family(p: int, q: int,
                           sysB: Optional[SubstitutionSystem] = None,
                           heights: Sequence[int] = (7,),
                           width: int = 200,
                           offsets: int = 4,
                           seed: int = 0,
                           ov: Optional[OverlaySystem] = None,
                           base: Optional[SubstitutionSystem] = None
                           ) -> PatternFamily:
    """Materialize neighborhood patterns realized on overlay windows over a
    spread of offsets; the family is a desk-scale under-approximation of
    the full pattern collection and records its provenance."""
    from .orbit import build_overlay_orbit, seed_orbit

    if ov is None or base is None:
        ov, base = overlay_for_surface(p, q, sysB)
    rng = random.Random(seed)
    patterns: dict = {}
    windows_used = []
    for height in heights:
        for _ in range(offsets):
            # odd prime denominator: tile edges have power-like rational
            # coordinates, so these offsets never land on one exactly
            c = Fraction(rng.randint(1, 60), 61)
            d = Fraction(rng.randint(1, 60), 61)
            window_base = seed_orbit(ov.sysA, height + 1, width_hint=width)
            window = build_overlay_orbit(ov, window_base, None, c, d)
            patch = reduce_patch(build_orbit_graph(window), base_of_label)
            count = 0
            for v in pattern_candidates(patch, q):
                pattern = extract_pattern(patch, v, q)
                entry = patterns.setdefault(
                    pattern, {"count": 0, "first": (str(c), str(d), height)})
                entry["count"] += 1
                count += 1
            windows_used.append({"c": str(c), "d": str(d), "height": height,
                                 "vertices": count})
    family = PatternFamily(p, q, ov, base, patterns,
                           meta={"windows": windows_used, "seed": seed,
                                 "width": width})
    bad = [msg for pattern in patterns
           for msg in delta_pattern_violations(pattern, ov, base, p, q)]
    if bad:
        raise InvalidConstruction(f"collected pattern violates local rules: {bad[0]}")
    return family


def _pattern_cycles(pattern: Pattern, p: int) -> list[tuple[int, ...]]:
    """All p-cycles of a small pattern graph, deduplicated up to rotation
    and reflection."""
    adj = defaultdict(set)
    for a, b in pattern.edges:
        adj[a].add(b)
        adj[b].add(a)
    cycles = set()

    def dfs(path):
        if len(path) == p:
            if path[0] in adj[path[-1]]:
                best = _cycle_key(path)
                cycles.add(best)
            return
        for u in sorted(adj[path[-1]]):
            if u == path[0] and len(path) > 2:
                continue
            if u in path:
                continue
            dfs(path + [u])

    for v in range(pattern.size):
        dfs([v])
    return sorted(cycles)


def _cycle_key(path):
    n = len(path)
    rotations = []
    doubled = list(path) + list(path)
    for k in range(n):
        rotations.append(tuple(doubled[k:k + n]))
    rev = list(reversed(path))
    doubled = rev + rev
    for k in range(n):
        rotations.append(tuple(doubled[k:k + n]))
    return min(rotations)


def _orient_cycles(cycles: list[tuple[int, ...]]):
    """Assign each cycle a traversal direction so that cycles sharing an
    edge traverse it oppositely (the planar condition).  Returns one
    consistent assignment (the other is its global reversal), or None."""
    def directed_edges(cycle, flipped):
        cyc = tuple(reversed(cycle)) if flipped else cycle
        return list(zip(cyc, cyc[1:] + cyc[:1]))

    edge_users = defaultdict(list)
    for k, cycle in enumerate(cycles):
        for a, b in directed_edges(cycle, False):
            edge_users[frozenset((a, b))].append(k)

    flips = {0: False}
    queue = [0]
    while queue:
        k = queue.pop()
        mine = set(directed_edges(cycles[k], flips[k]))
        for a, b in mine:
            for other in edge_users[frozenset((a, b))]:
                if other == k:
                    continue
                # the neighbor must traverse (b, a)
                want = (b, a) in set(directed_edges(cycles[other], False))
                need_flip = not want
                if other in flips:
                    if flips[other] != need_flip:
                        return None
                else:
                    flips[other] = need_flip
                    queue.append(other)
    if len(flips) != len(cycles):
        # disconnected face sets: orient each component independently
        for k in range(len(cycles)):
            if k not in flips:
                flips[k] = False
    return [tuple(reversed(c)) if flips[k] else c
            for k, c in enumerate(cycles)]


def delta_pattern_violations(pattern: Pattern, ov: OverlaySystem,
                             base: SubstitutionSystem, p: int, q: int
                             ) -> list[str]:
    """Locally checkable conditions on a neighborhood pattern: each p-cycle
    carries exactly one horizontal-type path, and the block produced by the
    basepoint is an admissible row produced by the basepoint's letter.

    The pattern graph fixes its cycle orientations only up to one global
    reflection, so both readings are tried; the pattern passes if either
    is consistent."""
    cycles = _pattern_cycles(pattern, p)
    if not cycles:
        return [f"pattern has no {p}-cycles"]
    oriented = _orient_cycles(cycles)
    if oriented is None:
        return ["cycles admit no planar orientation"]
    first_problems = None
    for flip in (False, True):
        cyc = [tuple(reversed(c)) for c in oriented] if flip else oriented
        problems = _check_oriented_pattern(pattern, cyc, ov, base, p)
        if not problems:
            return []
        if first_problems is None:
            first_problems = problems
    return first_problems


def _check_oriented_pattern(pattern: Pattern, cycles, ov: OverlaySystem,
                            base: SubstitutionSystem, p: int) -> list[str]:
    labels = pattern.labels

    def label_of(v):
        return labels[v]

    paths = {}
    for cycle in cycles:
        try:
            paths[cycle] = face_horizontal_path(cycle, label_of, p, base)
        except InconsistentCycle as exc:
            return [f"cycle {cycle}: {exc}"]

    # vertices produced by the basepoint (vertex 0)
    children = []
    for cycle, path in paths.items():
        pset = set(path)
        n = len(cycle)
        if len(path) == n - 1:
            producer = next(u for u in cycle if u not in pset)
            produced = list(path)
        else:
            idx = cycle.index(path[0])
            producer = cycle[(idx - 1) % n]
            produced = list(path[:-1])
        if producer == 0:
            children.extend(produced)

    if not children:
        return ["basepoint produces no visible block"]

    seen = sorted(set(children), key=lambda v: decoration(labels[v])[1])
    places = [decoration(labels[v])[1] for v in seen]
    alpha_base, _ = decoration(labels[0])
    expected = len(base.rule(alpha_base))
    if places != list(range(1, expected + 1)):
        return [f"basepoint block places {places} != 1..{expected}"]
    row = [_as_overlay_letter(labels[v], ov) for v in seen]
    for a, b in zip(row, row[1:]):
        if not adjacent(a, b):
            return ["produced row violates the adjacency language"]
    bp_letter = _as_overlay_letter(labels[0], ov)
    if not ov.is_production(bp_letter, row):
        return ["basepoint production rule fails"]
    return []


def _as_overlay_letter(label, ov: OverlaySystem) -> OverlayLetter:
    if isinstance(label, OverlayLetter):
        return label
    if isinstance(label, tuple) and len(label) == 5:
        return OverlayLetter(*label)
    raise InvalidConstruction(f"label {label!r} is not an overlay letter")


PASS, FAIL, UNKNOWN = "PASS", "FAIL", "UNKNOWN"


@dataclass
class MembershipReport:
    verdicts: dict
    reasons: dict

    def counts(self):
        out = {PASS: 0, FAIL: 0, UNKNOWN: 0}
        for verdict in self.verdicts.values():
            out[verdict] += 1
        return out

    @property
    def ok(self):
        return all(v == PASS for v in self.verdicts.values())


def check_membership(patch: GraphPatch, family: PatternFamily) -> MembershipReport:
    """Per-vertex membership verdicts for a labeled patch: PASS when the
    neighborhood pattern is in the family, FAIL when it violates a locally
    checkable condition, UNKNOWN otherwise (the family under-approximates
    the full collection, so absence alone is not a violation)."""
    verdicts = {}
    reasons = {}
    for v in pattern_candidates(patch, family.q):
        try:
            pattern = extract_pattern(patch, v, family.q)
        except InconsistentCycle as exc:
            verdicts[v] = FAIL
            reasons[v] = str(exc)
            continue
        if pattern in family:
            verdicts[v] = PASS
            continue
        problems = delta_pattern_violations(pattern, family.ov, family.base,
                                            family.p, family.q)
        if problems:
            verdicts[v] = FAIL
            reasons[v] = problems[0]
        else:
            verdicts[v] = UNKNOWN
    return MembershipReport(verdicts, reasons)
