"""Orbit graphs as finite patches: vertices on a row/column grid, row
edges, production edges, faces, galleries, reduction, regularity checks,
pattern extraction, and labeled-isomorphism machinery for small patterns.

Coordinates are (i, j) with i the row index and j the global column of the
originating window.  Faces are read off between consecutive vertical edges
of a row pair; in the unreduced graph these are exactly the triangles and
quadrilaterals, and after reduction they are the merged cells (the p-gons
for the two-letter surface substitutions)."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import BoundaryVertex, InvalidConstruction

Vertex = tuple[int, int]


@dataclass
class GraphPatch:
    """Finite labeled patch of an orbit graph.

    vertices: (i, j) -> label; row_range: i -> (j_lo, j_hi) inclusive;
    up: child vertex -> parent vertex (the production edges that remain);
    reduced: whether production edges into removed children were dropped.
    """

    vertices: dict[Vertex, object]
    row_range: dict[int, tuple[int, int]]
    up: dict[Vertex, Vertex]
    complete: set = field(default_factory=set)  # vertices with all children present
    reduced: bool = False
    meta: dict = field(default_factory=dict)

    # ------------------------------------------------------------ structure

    def rows(self) -> list[int]:
        return sorted(self.row_range)

    def has(self, v: Vertex) -> bool:
        return v in self.vertices

    def label(self, v: Vertex):
        return self.vertices[v]

    def horizontal_neighbors(self, v: Vertex) -> list[Vertex]:
        i, j = v
        return [u for u in ((i, j - 1), (i, j + 1)) if u in self.vertices]

    def down_edges(self) -> dict[Vertex, list[Vertex]]:
        out = defaultdict(list)
        for child, parent in self.up.items():
            out[parent].append(child)
        for kids in out.values():
            kids.sort()
        return out

    def edges(self) -> set[tuple[Vertex, Vertex, str]]:
        """Undirected edge set with a horizontal/vertical tag."""
        out = set()
        for (i, j) in self.vertices:
            if (i, j + 1) in self.vertices:
                out.add(((i, j), (i, j + 1), "horizontal"))
        for child, parent in self.up.items():
            out.add((parent, child, "vertical"))
        return out

    def neighbors(self, v: Vertex) -> list[Vertex]:
        out = self.horizontal_neighbors(v)
        if v in self.up:
            out.append(self.up[v])
        out.extend(self._down_cache().get(v, ()))
        return out

    def _down_cache(self):
        if not hasattr(self, "_down"):
            self._down = self.down_edges()
        return self._down

    def degree(self, v: Vertex) -> int:
        return len(self.neighbors(v))

    # ---------------------------------------------------------------- faces

    def faces(self) -> list[list[Vertex]]:
        """Cycles between consecutive vertical edges of each row pair,
        ordered: top path left-to-right, bottom path right-to-left.  In an
        unreduced patch every face is a triangle or a quadrilateral."""
        if not hasattr(self, "_faces"):
            out = []
            rows = self.rows()
            for i in rows:
                if i + 1 not in self.row_range:
                    continue
                lo, hi = self.row_range[i + 1]
                anchored = [j for j in range(lo, hi + 1)
                            if (i + 1, j) in self.up]
                for a, b in zip(anchored, anchored[1:]):
                    pa, pb = self.up[(i + 1, a)], self.up[(i + 1, b)]
                    if pa[0] != i or pb[0] != i:
                        continue
                    top = [(i, j) for j in range(pa[1], pb[1] + 1)]
                    if any(v not in self.vertices for v in top):
                        continue
                    bottom = [(i + 1, j) for j in range(b, a - 1, -1)]
                    if any(v not in self.vertices for v in bottom):
                        continue
                    out.append(top + bottom)
            self._faces = out
        return self._faces

    def faces_through(self, v: Vertex) -> list[list[Vertex]]:
        if not hasattr(self, "_faces_by_vertex"):
            index = defaultdict(list)
            for face in self.faces():
                for u in face:
                    index[u].append(face)
            self._faces_by_vertex = index
        return self._faces_by_vertex.get(v, [])

    # ------------------------------------------------------------- interior

    def incomplete_vertices(self) -> set[Vertex]:
        """Vertices whose full neighborhood cannot be certified: row ends,
        top-row vertices (their parents are outside the patch), and
        vertices whose children are not all materialized."""
        out = set()
        rows = self.rows()
        top = rows[0]
        for v in self.vertices:
            i, j = v
            lo, hi = self.row_range[i]
            if j in (lo, hi) or i == top or v not in self.complete:
                out.add(v)
        return out

    def interior(self, radius: int) -> set[Vertex]:
        """Vertices at graph distance >= radius from every incomplete
        vertex (incomplete vertices are at distance 0 from themselves)."""
        from collections import deque

        seeds = self.incomplete_vertices()
        dist = {v: 0 for v in seeds}
        queue = deque(seeds)
        while queue:
            v = queue.popleft()
            if dist[v] >= radius - 1:
                continue
            for u in self.neighbors(v):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return {v for v in self.vertices if v not in dist}


def build_orbit_graph(window) -> GraphPatch:
    """Materialize the orbit graph of a window: one vertex per cell, row
    edges between consecutive columns, vertical edges from each cell to its
    parent."""
    from .orbit import BaseWindow, OverlayWindow

    vertices: dict[Vertex, object] = {}
    row_range: dict[int, tuple[int, int]] = {}
    up: dict[Vertex, Vertex] = {}
    complete: set = set()
    if isinstance(window, OverlayWindow):
        for i, row in enumerate(window.rows):
            for pos, idx in enumerate(row.letters):
                vertices[(i, row.j_lo + pos)] = window.ov.letters[idx]
            row_range[i] = (row.j_lo, row.j_lo + len(row.letters) - 1)
        for i, par in enumerate(window.parents):
            child_row = window.rows[i + 1]
            parent_row = window.rows[i]
            for pos, parent_pos in enumerate(par):
                up[(i + 1, child_row.j_lo + pos)] = (i, parent_row.j_lo + parent_pos)
        for i in range(window.height):
            for pos in window.core(i):
                complete.add((i, window.rows[i].j_lo + pos))
        meta = dict(window.meta)
    elif isinstance(window, BaseWindow):
        for i, row in enumerate(window.rows):
            for pos, letter in enumerate(row.letters):
                vertices[(i, row.j_lo + pos)] = letter
            row_range[i] = (row.j_lo, row.j_lo + len(row.letters) - 1)
        for i, par in enumerate(window.parents):
            child_row = window.rows[i + 1]
            parent_row = window.rows[i]
            for pos, parent_pos in enumerate(par):
                up[(i + 1, child_row.j_lo + pos)] = (i, parent_row.j_lo + parent_pos)
        for i in range(window.height):
            for pos in window.core(i):
                complete.add((i, window.rows[i].j_lo + pos))
        meta = dict(window.meta)
    else:
        raise TypeError(f"cannot build a patch from {type(window).__name__}")
    return GraphPatch(vertices, row_range, up, complete, reduced=False, meta=meta)


def classify_faces(patch: GraphPatch) -> dict[str, list[list[Vertex]]]:
    """Triangles and quadrilaterals of an unreduced patch."""
    if patch.reduced:
        raise InvalidConstruction("face classification applies to unreduced patches")
    out = {"triangle": [], "quadrilateral": []}
    for face in patch.faces():
        if len(face) == 3:
            out["triangle"].append(face)
        elif len(face) == 4:
            out["quadrilateral"].append(face)
        else:
            raise InvalidConstruction(
                f"unreduced face with {len(face)} vertices")
    return out


@dataclass
class Gallery:
    quads: list[list[Vertex]]

    @property
    def top_edge(self):
        face = self.quads[0]
        return (face[0], face[1])


def galleries(patch: GraphPatch) -> list[Gallery]:
    """Maximal chains of quadrilaterals glued along row edges, descending
    from either a triangle's row edge or the top of the patch."""
    if patch.reduced:
        raise InvalidConstruction("galleries are defined on unreduced patches")
    faces = classify_faces(patch)
    by_top_edge = {}
    for quad in faces["quadrilateral"]:
        # quad = [top-left, top-right, bottom-right, bottom-left]
        by_top_edge[(quad[0], quad[1])] = quad
    continued = set()
    chains = []
    for edge, quad in by_top_edge.items():
        # bottom edge of the quad, left-to-right
        bottom = (quad[3], quad[2])
        if bottom in by_top_edge:
            continued.add(bottom)
    for edge, quad in by_top_edge.items():
        if edge in continued:
            continue
        chain = [quad]
        while True:
            bottom = (chain[-1][3], chain[-1][2])
            nxt = by_top_edge.get(bottom)
            if nxt is None:
                break
            chain.append(nxt)
        chains.append(Gallery(chain))
    return chains


def triangle_gallery_incidence(patch: GraphPatch) -> list[str]:
    """Check that each interior triangle's row edge heads exactly one
    gallery; returns violation messages."""
    problems = []
    interior = patch.interior(2)
    chains = galleries(patch)
    heads = defaultdict(int)
    for chain in chains:
        heads[chain.top_edge] += 1
    for tri in classify_faces(patch)["triangle"]:
        # triangle = [apex, bottom-right, bottom-left]
        if not all(v in interior for v in tri):
            continue
        row_edge = (tri[2], tri[1])
        if heads.get(row_edge, 0) != 1:
            problems.append(
                f"triangle at {tri[0]} heads {heads.get(row_edge, 0)} galleries")
    return problems


def reduce_patch(patch: GraphPatch, mu: Callable[[object], str]) -> GraphPatch:
    """Drop every vertical edge whose child vertex maps to the second
    surface letter; vertices and row edges are untouched."""
    up = {child: parent for child, parent in patch.up.items()
          if mu(patch.label(child)) != "W"}
    return GraphPatch(dict(patch.vertices), dict(patch.row_range), up,
                      set(patch.complete), reduced=True, meta=dict(patch.meta))


@dataclass
class PQReport:
    checked_vertices: int
    checked_faces: int
    degree_violations: list
    face_violations: list

    @property
    def vacuous(self):
        return self.checked_vertices == 0 and self.checked_faces == 0

    @property
    def ok(self):
        return not self.degree_violations and not self.face_violations

    def __bool__(self):
        return self.ok


def check_pq(patch: GraphPatch, p: int, q: int) -> PQReport:
    """Every interior vertex has degree q and every face whose vertices are
    all interior is a p-cycle; violations are reported with coordinates.

    Interior at radius 1 means the vertex's full edge set is certified
    (parent, children, row neighbors all materialized), which is exactly
    what the degree count needs; emitted faces are genuine cycles of the
    underlying graph, so certifying their vertices suffices."""
    interior = patch.interior(1)
    degree_violations = []
    face_violations = []
    checked_v = 0
    for v in interior:
        checked_v += 1
        deg = patch.degree(v)
        if deg != q:
            degree_violations.append((v, deg))
    checked_f = 0
    for face in patch.faces():
        if not all(v in interior for v in face):
            continue
        checked_f += 1
        if len(face) != p:
            face_violations.append((face[0], len(face)))
    return PQReport(checked_v, checked_f, degree_violations, face_violations)


# ------------------------------------------------------------------ patterns

@dataclass(frozen=True)
class Pattern:
    """Finite labeled graph with a basepoint, in canonical form: vertices
    are 0..n-1 with 0 the basepoint, edges sorted."""

    labels: tuple
    edges: tuple[tuple[int, int], ...]

    @property
    def size(self):
        return len(self.labels)


def extract_pattern(patch: GraphPatch, v: Vertex, q: int) -> Pattern:
    """The labeled union of the cycles through v, based at v.

    The guard is structural rather than metric: v must be edge-certified
    and all q of its faces must be materialized.  Emitted faces are always
    genuine cycles of the underlying graph, so a full count certifies that
    the neighborhood pattern is complete."""
    faces = [f for f in patch.faces_through(v)]
    if v not in patch.interior(1):
        raise BoundaryVertex(f"{v} is too close to the boundary")
    if len(faces) != q:
        raise BoundaryVertex(
            f"{v} lies on {len(faces)} complete faces, expected {q}")
    verts = sorted({u for face in faces for u in face})
    edge_set = set()
    for face in faces:
        for a, b in zip(face, face[1:] + face[:1]):
            edge_set.add((min(a, b), max(a, b)))
    return canonical_pattern(verts, edge_set,
                             {u: patch.label(u) for u in verts}, v)


def pattern_candidates(patch: GraphPatch, q: int) -> list[Vertex]:
    """Vertices whose neighborhood pattern is fully materialized."""
    out = []
    for v in sorted(patch.interior(1)):
        if len(patch.faces_through(v)) == q:
            out.append(v)
    return out


def canonical_pattern(verts: Sequence[Vertex], edges: set, labels: dict,
                      basepoint: Vertex) -> Pattern:
    """Canonical form under basepoint-preserving labeled isomorphism:
    iterated neighborhood refinement from the basepoint, with deterministic
    tie-breaking searched over minimal choices."""
    adj = defaultdict(set)
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    order = _canonical_order(list(verts), adj, labels, basepoint)
    index = {u: k for k, u in enumerate(order)}
    canon_edges = tuple(sorted(
        (min(index[a], index[b]), max(index[a], index[b])) for a, b in edges))
    canon_labels = tuple(_label_key(labels[u]) for u in order)
    return Pattern(canon_labels, canon_edges)


def _label_key(label):
    # overlay letters hash by their component tuple; plain letters as-is
    key = getattr(label, "key", None)
    return key() if callable(key) else label


def _canonical_order(verts, adj, labels, basepoint):
    """BFS from the basepoint with children ordered by (label, refined
    color); ties explored exhaustively, smallest encoding wins.  Patterns
    here have at most a few dozen vertices, so the search is cheap."""
    colors = {u: (_label_key(labels[u]),) for u in verts}
    for _ in range(len(verts)):
        new = {}
        for u in verts:
            new[u] = (colors[u], tuple(sorted(colors[w] for w in adj[u])))
        if len(set(new.values())) == len(set(colors.values())):
            colors = new
            break
        colors = new

    best = None

    def encode(order):
        index = {u: k for k, u in enumerate(order)}
        edge_code = tuple(sorted(
            (min(index[a], index[b]), max(index[a], index[b]))
            for a in order for b in adj[a] if index[a] < index[b]))
        return (tuple(_label_key(labels[u]) for u in order), edge_code)

    def search(order, remaining):
        nonlocal best
        if not remaining:
            code = encode(order)
            if best is None or code < best[0]:
                best = (code, list(order))
            return
        # candidates: neighbors of the prefix first, minimal color class
        frontier = [u for u in remaining
                    if any(w in order for w in adj[u])] or list(remaining)
        key = min(colors[u] for u in frontier)
        for u in [u for u in frontier if colors[u] == key]:
            order.append(u)
            remaining.remove(u)
            search(order, remaining)
            remaining.add(u)
            order.pop()

    search([basepoint], set(u for u in verts if u != basepoint))
    return best[1]


def patterns_isomorphic(a: Pattern, b: Pattern) -> bool:
    """Basepoint-fixing labeled isomorphism; canonical forms make this an
    equality check."""
    return a == b


# ------------------------------------------------------------ patch periods

@dataclass
class PatchPeriod:
    pi: int
    shifts: dict[int, int]


def patch_periods(patch: GraphPatch, candidate_pis: Iterable[int]) -> list[PatchPeriod]:
    """Label- and edge-preserving self-maps of the form row-shift by pi
    combined with per-row horizontal shifts, tested on the overlapping
    block.  pi = 0 (the identity) is always reported if requested."""
    out = []
    rows = patch.rows()
    for pi in candidate_pis:
        if pi == 0:
            out.append(PatchPeriod(0, {i: 0 for i in rows}))
            continue
        chains = _patch_period_chain(patch, pi)
        if chains is not None:
            out.append(PatchPeriod(pi, chains))
    return out


def _patch_period_chain(patch: GraphPatch, pi: int):
    rows = patch.rows()
    usable = [i for i in rows if i + pi in patch.row_range]
    if not usable:
        return None
    states = None
    chain_rows = []
    for i in usable:
        lo_a, hi_a = patch.row_range[i]
        lo_b, hi_b = patch.row_range[i + pi]
        len_a, len_b = hi_a - lo_a + 1, hi_b - lo_b + 1
        need = max(1, min(len_a, len_b) // 2)
        adm = {}
        for tau in range(lo_b - lo_a - len_a + need, lo_b - lo_a + len_b - need + 1):
            lo = max(lo_a, lo_b - tau)
            hi = min(hi_a, hi_b - tau)
            if hi - lo + 1 < need:
                continue
            if all(_label_key(patch.label((i, j)))
                   == _label_key(patch.label((i + pi, j + tau)))
                   for j in range(lo, hi + 1)):
                adm[tau] = hi - lo + 1
        if not adm:
            return None
        chain_rows.append(i)
        if states is None:
            states = {tau: {i: tau} for tau in adm}
            continue
        nxt = {}
        for tau in adm:
            for prev_tau, chain in states.items():
                if _patch_edges_compatible(patch, i, pi, prev_tau, tau):
                    if tau not in nxt:
                        nxt[tau] = dict(chain)
                        nxt[tau][i] = tau
        if not nxt:
            return None
        states = nxt
    return next(iter(states.values()))


def _patch_edges_compatible(patch: GraphPatch, i: int, pi: int,
                            tau_parent: int, tau_child: int) -> bool:
    """Vertical edges from row i must map onto vertical edges from row
    i+pi under the two shifts."""
    lo, hi = patch.row_range[i]
    checked = 0
    for j in range(lo, hi + 1):
        child = (i, j)
        if child not in patch.up:
            continue
        image_child = (i + pi, j + tau_child)
        if image_child not in patch.vertices:
            continue
        parent = patch.up[child]
        image_parent = patch.up.get(image_child)
        if image_parent is None:
            return False
        if image_parent != (parent[0] + pi, parent[1] + tau_parent):
            return False
        checked += 1
    return checked > 0
