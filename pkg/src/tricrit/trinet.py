"""Triangular nets, developing maps into the hexagonal tiling and systoles.

A net is stored combinatorially: every triangle lists its three vertex ids
counter-clockwise, side ``s`` runs from corner ``s`` to corner ``s + 1``, and
gluings pair sides.  Geometry is implicit: every triangle is a unit
equilateral triangle, so a flat structure is fixed by the combinatorics.

Positions in the plane are integer lattice coordinates ``(i, j)`` meaning
``i * (1, 0) + j * (1/2, sqrt(3)/2)``.  In these coordinates every vertex of
a developed net is a lattice point, squared lengths are the integers
``i*i + i*j + j*j`` and orientation tests are integer cross products, so the
systole computation is exact.  The hexagonal reference net labels the point
``(i, j)`` with ``LABELS[(i + 2 j) % 3]``.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import Inconclusive, Inconsistent, InvalidPath

LABELS = ("A", "B", "C")
WHITE = "white"
BLACK = "black"
SURFACE_KINDS = ("sphere", "plane", "disc", "cylinder", "annulus-with-boundary")
_TOPOLOGY = {  # (euler characteristic, boundary components) of the finite pieces we build
    "sphere": (2, 0),
    "plane": (1, 1),
    "disc": (1, 1),
    "cylinder": (0, 2),
    "annulus-with-boundary": (0, 2),
}

Point = tuple[int, int]
Placement = tuple[Point, Point, Point]
Side = tuple[int, int]


# --- lattice arithmetic ------------------------------------------------------------


def lattice_label(p: Point) -> str:
    return LABELS[(p[0] + 2 * p[1]) % 3]


def norm2(p: Point) -> int:
    """Squared Euclidean length of a lattice vector."""
    return p[0] * p[0] + p[0] * p[1] + p[1] * p[1]


def cross(a: Point, b: Point) -> int:
    """Sign-exact cross product (true value times ``2 / sqrt(3)``)."""
    return a[0] * b[1] - a[1] * b[0]


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def _add(a: Point, b: Point) -> Point:
    return (a[0] + b[0], a[1] + b[1])


def to_cartesian(p: Point) -> complex:
    return complex(p[0] + 0.5 * p[1], p[1] * math.sqrt(3) / 2)


def exact_coordinates(p: Point) -> list[list[float]]:
    """``[[a, b], [c, d]]`` with ``x = a + b sqrt(3)`` and ``y = c + d sqrt(3)``."""
    x = Fraction(p[0]) + Fraction(p[1], 2)
    return [[float(x), 0.0], [0.0, float(Fraction(p[1], 2))]]


def is_hexagonal_translation(p: Point) -> bool:
    """Translations of the reflection group: label-preserving lattice vectors."""
    return (p[0] + 2 * p[1]) % 3 == 0


def color_of_labels(labels: Sequence[str]) -> str | None:
    """Color forced by a counter-clockwise label triple, ``None`` if a label repeats."""
    try:
        idx = [LABELS.index(x) for x in labels]
    except ValueError:
        return None
    if sorted(idx) != [0, 1, 2]:
        return None
    return WHITE if (idx[1] - idx[0]) % 3 == 1 else BLACK


# --- isometries ----------------------------------------------------------------------


@dataclass(frozen=True)
class Isometry:
    """``x -> linear @ x + translation`` in lattice coordinates."""

    linear: tuple[tuple[int, int], tuple[int, int]]
    translation: Point

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(((1, 0), (0, 1)), (0, 0))

    def apply(self, p: Point) -> Point:
        (a, b), (c, d) = self.linear
        return (a * p[0] + b * p[1] + self.translation[0], c * p[0] + d * p[1] + self.translation[1])

    def compose(self, other: "Isometry") -> "Isometry":
        """``self after other``."""
        (a, b), (c, d) = self.linear
        (e, f), (g, h) = other.linear
        lin = ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))
        t = self.apply(other.translation)
        return Isometry(lin, t)

    def inverse(self) -> "Isometry":
        (a, b), (c, d) = self.linear
        det = a * d - b * c
        lin = ((d * det, -b * det), (-c * det, a * det))  # det is +-1
        inv = Isometry(lin, (0, 0))
        t = inv.apply(self.translation)
        return Isometry(lin, (-t[0], -t[1]))

    @property
    def is_translation(self) -> bool:
        return self.linear == ((1, 0), (0, 1))

    @property
    def kind(self) -> str:
        (a, b), (c, d) = self.linear
        if self.is_translation:
            return "identity" if self.translation == (0, 0) else "translation"
        if a * d - b * c < 0:
            return "reflection"
        return "rotation"

    def translation_exact(self) -> list[list[float]]:
        return exact_coordinates(self.translation)

    @property
    def translation_length(self) -> float:
        return math.sqrt(norm2(self.translation))


def _frame(pl: Placement) -> tuple[tuple[int, int], tuple[int, int]]:
    u, v = _sub(pl[1], pl[0]), _sub(pl[2], pl[0])
    return ((u[0], v[0]), (u[1], v[1]))


def isometry_between(src: Placement, dst: Placement) -> Isometry:
    """The affine lattice map sending the corners of ``src`` to those of ``dst``."""
    m = Isometry(_frame(src), (0, 0)).inverse().linear
    md = _frame(dst)
    (a, b), (c, d) = md
    (e, f), (g, h) = m
    lin = ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))
    partial = Isometry(lin, (0, 0)).apply(src[0])
    return Isometry(lin, _sub(dst[0], partial))


# --- nets ------------------------------------------------------------------------


@dataclass(frozen=True)
class NetTriangle:
    id: int
    color: str | None
    vertices: tuple[int, int, int]  # counter-clockwise


@dataclass(frozen=True)
class TriangularNet:
    """A finite net: labelled vertices, coloured triangles and side gluings."""

    surface: str
    labels: tuple[str | None, ...]
    triangles: tuple[NetTriangle, ...]
    gluings: tuple[tuple[Side, Side], ...]
    _adj: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        adj = {}
        for a, b in self.gluings:
            adj.setdefault(tuple(a), tuple(b))
            adj.setdefault(tuple(b), tuple(a))
        object.__setattr__(self, "_adj", adj)

    # basic queries

    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def neighbor(self, t: int, s: int) -> Side | None:
        return self._adj.get((t, s))

    def side_vertices(self, t: int, s: int) -> tuple[int, int]:
        vs = self.triangles[t].vertices
        return vs[s], vs[(s + 1) % 3]

    def triangle_labels(self, t: int) -> tuple:
        return tuple(self.labels[v] for v in self.triangles[t].vertices)

    def boundary_sides(self) -> list[Side]:
        return [(t, s) for t in range(self.n_triangles) for s in range(3) if (t, s) not in self._adj]

    def n_edges(self) -> int:
        return 3 * self.n_triangles - len(self.gluings)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges() + self.n_triangles

    def corners(self, v: int) -> list[tuple[int, int]]:
        return [(t, k) for t, tri in enumerate(self.triangles) for k in range(3) if tri.vertices[k] == v]

    def valence(self, v: int) -> int:
        return len(self.corners(v))

    def is_interior(self, v: int) -> bool:
        return all(self.neighbor(t, k) is not None and self.neighbor(t, (k - 1) % 3) is not None
                   for t, k in self.corners(v))

    def boundary_components(self) -> list[list[Side]]:
        sides = self.boundary_sides()
        parent = {s: s for s in sides}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        by_vertex: dict[int, list[Side]] = {}
        for t, s in sides:
            for v in self.side_vertices(t, s):
                by_vertex.setdefault(v, []).append((t, s))
        for group in by_vertex.values():
            for other in group[1:]:
                parent[find(other)] = find(group[0])
        comps: dict[Side, list[Side]] = {}
        for s in sides:
            comps.setdefault(find(s), []).append(s)
        return sorted(comps.values())

    def is_connected(self) -> bool:
        if not self.triangles:
            return True
        seen = {0}
        stack = [0]
        while stack:
            t = stack.pop()
            for s in range(3):
                nb = self.neighbor(t, s)
                if nb is not None and nb[0] not in seen:
                    seen.add(nb[0])
                    stack.append(nb[0])
        return len(seen) == self.n_triangles

    # serialisation

    def to_dict(self) -> dict:
        return {
            "surface": self.surface,
            "vertices": [{"id": i, "label": lab} for i, lab in enumerate(self.labels)],
            "triangles": [{"id": t.id, "color": t.color, "vertices": list(t.vertices)} for t in self.triangles],
            "gluings": [[list(a), list(b)] for a, b in self.gluings],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "TriangularNet":
        verts = sorted(data["vertices"], key=lambda v: v["id"])
        if [v["id"] for v in verts] != list(range(len(verts))):
            raise ValueError("vertex ids must be 0..n-1")
        tris = sorted(data["triangles"], key=lambda t: t["id"])
        if [t["id"] for t in tris] != list(range(len(tris))):
            raise ValueError("triangle ids must be 0..n-1")
        return cls(
            surface=data["surface"],
            labels=tuple(v.get("label") for v in verts),
            triangles=tuple(NetTriangle(t["id"], t.get("color"), tuple(t["vertices"])) for t in tris),
            gluings=tuple((tuple(a), tuple(b)) for a, b in data["gluings"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "TriangularNet":
        return cls.from_dict(json.loads(text))


# --- construction helpers ---------------------------------------------------------


class _UnionFind:
    def __init__(self, items: Iterable):
        self.parent = {x: x for x in items}

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def glue_triangles(corner_labels: Sequence[Sequence[str | None]], gluings: Sequence[tuple[Side, Side]],
                   surface: str) -> TriangularNet:
    """Build a net from per-triangle corner labels and side gluings.

    Vertices are the classes of corners identified by the gluings (side ``s``
    of ``t`` glued to side ``s'`` of ``t'`` reverses direction).  Corners that
    end up in one vertex must carry the same label, else ``Inconsistent``.
    """
    n = len(corner_labels)
    uf = _UnionFind((t, k) for t in range(n) for k in range(3))
    for (t, s), (u, r) in gluings:
        uf.union((t, s), (u, (r + 1) % 3))
        uf.union((t, (s + 1) % 3), (u, r))
    ids: dict = {}
    labels: list = []
    tris = []
    for t in range(n):
        vs = []
        for k in range(3):
            root = uf.find((t, k))
            if root not in ids:
                ids[root] = len(labels)
                labels.append(corner_labels[t][k])
            vid = ids[root]
            lab = corner_labels[t][k]
            if labels[vid] != lab:
                raise Inconsistent(f"vertex {vid} receives labels {labels[vid]} and {lab}")
            vs.append(vid)
        tris.append(NetTriangle(t, color_of_labels(corner_labels[t]), tuple(vs)))
    glu = tuple((tuple(a), tuple(b)) for a, b in gluings)
    return TriangularNet(surface, tuple(labels), tuple(tris), glu)


def _lattice_net(tris: Sequence[Placement], identify: Sequence[Point], surface: str,
                 extra: Sequence[tuple[Side, Side]] = (), extra_labels: Sequence[Sequence[str]] = ()) -> TriangularNet:
    """Net from lattice triangles; sides are glued where they coincide in the
    plane or differ by one of the translations in ``identify``."""
    side_at: dict[tuple[Point, Point], Side] = {}
    for t, pl in enumerate(tris):
        if cross(_sub(pl[1], pl[0]), _sub(pl[2], pl[0])) <= 0:
            raise ValueError(f"triangle {t} is not counter-clockwise")
        for s in range(3):
            side_at[(pl[s], pl[(s + 1) % 3])] = (t, s)
    gluings = []
    done = set()
    for (p, q), side in side_at.items():
        if side in done:
            continue
        shifts = [(0, 0)] + [tau for v in identify for tau in (v, (-v[0], -v[1]))]
        for tau in shifts:
            partner = side_at.get((_add(q, tau), _add(p, tau)))
            if partner is not None and partner not in done and partner != side:
                gluings.append((side, partner))
                done.update((side, partner))
                break
    gluings.extend(extra)
    labels = [tuple(lattice_label(p) for p in pl) for pl in tris] + [tuple(x) for x in extra_labels]
    return glue_triangles(labels, gluings, surface)


# --- builders -------------------------------------------------------------------


def build_sphere_net() -> TriangularNet:
    """Two triangles glued along their whole boundaries: the net of the sphere."""
    labels = [("A", "B", "C"), ("A", "C", "B")]
    # white side s carries labels (s, s+1); the black side with the same pair is 2 - s
    gluings = [((0, s), (1, 2 - s)) for s in range(3)]
    return glue_triangles(labels, gluings, "sphere")


def build_hexagonal_patch(n: int = 3) -> TriangularNet:
    """The ``n x n`` rhombus of the hexagonal tiling with its reference labels."""
    if n < 1:
        raise ValueError("n must be at least 1")
    tris = []
    for i in range(n):
        for j in range(n):
            tris.append(((i, j), (i + 1, j), (i, j + 1)))
            tris.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))
    return _lattice_net(tris, (), "disc")


# The extremal cylinder: a unit-width strip of height sqrt(3) made of four triangles;
# bottom and top edges are identified by the translation (-1, 2) = (0, sqrt(3)).
_K0: tuple[Placement, ...] = (
    ((0, 0), (1, 0), (0, 1)),
    ((1, 0), (1, 1), (0, 1)),
    ((0, 1), (1, 1), (0, 2)),
    ((-1, 2), (0, 1), (0, 2)),
)
FIGURE1_TRANSLATION: Point = (-1, 2)


def build_figure1() -> TriangularNet:
    """The four-triangle flat cylinder of the extremal configuration."""
    return _lattice_net(_K0, (FIGURE1_TRANSLATION,), "cylinder")


def _blocks(n: int) -> list[Placement]:
    return [tuple(_add(p, (j, 0)) for p in tri) for j in range(n) for tri in _K0]


def build_block_cylinder(n: int) -> TriangularNet:
    """``n`` copies of the four-triangle block in a row, top and bottom identified."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return _lattice_net(_blocks(n), (FIGURE1_TRANSLATION,), "cylinder")


def build_patched_cylinder(n: int) -> TriangularNet:
    """Blocks in a row closed into a half-cylinder whose 2-edge hole is patched
    by a 2-gon of two triangles sharing two edges.  The result is a disc."""
    if n < 1:
        raise ValueError("n must be at least 1")
    tris = _blocks(n)
    base = len(tris)
    # the hole is the left zigzag: side 2 of the first triangle (C -> A) and
    # side 0 of the fourth (A -> C); the 2-gon is a white and a black triangle
    # glued along AB and BC, leaving one C-A side on each
    white, black = base, base + 1
    extra = [
        ((white, 0), (black, 2)),
        ((white, 1), (black, 1)),
        ((black, 0), (0, 2)),
        ((white, 2), (3, 0)),
    ]
    net = _lattice_net(tris, (FIGURE1_TRANSLATION,), "plane", extra, [("A", "B", "C"), ("A", "C", "B")])
    return net


def build_strip_cylinder(m: int) -> TriangularNet:
    """A single row of ``2m`` triangles with its two ends glued.

    The gluing is a translation by ``m``; labels survive it only for
    ``m % 3 == 0``, otherwise ``Inconsistent`` is raised.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    tris = []
    for i in range(m):
        tris.append(((i, 0), (i + 1, 0), (i, 1)))
        tris.append(((i + 1, 0), (i + 1, 1), (i, 1)))
    # glue the left side of the first triangle to the right side of the last
    extra = [((0, 2), (2 * m - 1, 0))]
    labels = [tuple(lattice_label(p) for p in pl) for pl in tris]
    inner = _lattice_net(tris, (), "cylinder")
    gluings = list(inner.gluings) + extra
    return glue_triangles(labels, gluings, "cylinder")


# --- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    axiom: str
    message: str
    witness: tuple


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    euler_characteristic: int
    boundary_components: int

    @property
    def valid(self) -> bool:
        return not self.violations

    def axioms_violated(self) -> set[str]:
        return {v.axiom for v in self.violations}


def _vertex_fans_connected(net: TriangularNet, v: int) -> bool:
    cs = net.corners(v)
    if not cs:
        return True
    cset = set(cs)
    seen = {cs[0]}
    stack = [cs[0]]
    while stack:
        t, k = stack.pop()
        for s in (k, (k - 1) % 3):
            nb = net.neighbor(t, s)
            if nb is None:
                continue
            u, r = nb
            # the corner of u at v
            for kk in range(3):
                if (u, kk) in cset and (u, kk) not in seen:
                    seen.add((u, kk))
                    stack.append((u, kk))
    return len(seen) == len(cs)


def validate_net(net: TriangularNet) -> ValidationReport:
    """Check the four net axioms and the declared topology; never raises."""
    out: list[Violation] = []
    nv = net.n_vertices
    for tri in net.triangles:
        if any(not 0 <= v < nv for v in tri.vertices):
            out.append(Violation("i", "triangle refers to a missing vertex", (tri.id,)))
        elif len(set(tri.vertices)) != 3:
            out.append(Violation("i", "triangle has repeated vertices", (tri.id, tri.vertices)))
    used: dict[Side, int] = {}
    for a, b in net.gluings:
        for t, s in (a, b):
            if not (0 <= t < net.n_triangles and 0 <= s < 3):
                out.append(Violation("ii", "gluing refers to a missing side", (a, b)))
            used[(t, s)] = used.get((t, s), 0) + 1
        if a[0] == b[0]:
            out.append(Violation("i", "triangle glued to itself", (a, b)))
            continue
        if not all(0 <= t < net.n_triangles and 0 <= s < 3 for t, s in (a, b)):
            continue
        pa, pb = net.side_vertices(*a), net.side_vertices(*b)
        if pa == pb[::-1]:
            pass
        elif pa == pb:
            out.append(Violation("ii", "gluing preserves the side direction (orientation reversing)", (a, b)))
        else:
            out.append(Violation("ii", "glued sides do not share their endpoints", (a, b)))
        ca, cb = net.triangles[a[0]].color, net.triangles[b[0]].color
        if ca is not None and ca == cb:
            out.append(Violation("iii", "triangles with a common edge have the same color", (a[0], b[0])))
    for side, count in used.items():
        if count > 1:
            out.append(Violation("ii", "side glued more than once", (side,)))
    for v in range(nv):
        if not _vertex_fans_connected(net, v):
            out.append(Violation("ii", "triangles meet at a vertex without a chain of common edges", (v,)))
    for tri in net.triangles:
        labs = tuple(net.labels[v] if 0 <= v < nv else None for v in tri.vertices)
        if any(x is None for x in labs):
            out.append(Violation("iv", "unlabelled vertex", (tri.id,)))
            continue
        col = color_of_labels(labs)
        if col is None:
            out.append(Violation("iv", "labels on a triangle are not all distinct", (tri.id, labs)))
        elif tri.color is not None and col != tri.color:
            out.append(Violation("iv", f"cyclic label order {labs} does not match color {tri.color}", (tri.id,)))
    chi = net.euler_characteristic()
    nb = len(net.boundary_components())
    if net.surface not in _TOPOLOGY:
        out.append(Violation("surface", f"unknown surface kind {net.surface!r}", ()))
    else:
        if not net.is_connected():
            out.append(Violation("surface", "net is not connected", ()))
        if (chi, nb) != _TOPOLOGY[net.surface]:
            out.append(Violation("surface", f"euler characteristic {chi} with {nb} boundary cycles "
                                 f"does not fit a {net.surface}", (chi, nb)))
    return ValidationReport(tuple(out), chi, nb)


def propagate_labels(net: TriangularNet, seed_triangle: int = 0,
                     seed_labels: Sequence[str] = ("A", "B", "C")) -> TriangularNet:
    """Label every vertex from the labels of one triangle.

    Labels spread across common edges: the far vertex of a neighbour gets
    the one remaining letter.  Colours are then read off the cyclic order.
    Raises ``Inconsistent`` when the spread contradicts itself or two
    triangles with a common edge end up with the same colour.
    """
    if sorted(seed_labels) != list(LABELS):
        raise ValueError("seed labels must be a permutation of A, B, C")
    labels: list = [None] * net.n_vertices
    for v, lab in zip(net.triangles[seed_triangle].vertices, seed_labels):
        labels[v] = lab
    seen = {seed_triangle}
    queue = deque([seed_triangle])
    while queue:
        t = queue.popleft()
        for s in range(3):
            nb = net.neighbor(t, s)
            if nb is None:
                continue
            u = nb[0]
            vs = net.triangles[u].vertices
            known = [labels[v] for v in vs if labels[v] is not None]
            if len(set(known)) != len(known):
                raise Inconsistent(f"triangle {u} receives a repeated label")
            missing = [v for v in vs if labels[v] is None]
            if len(missing) == 1:
                labels[missing[0]] = (set(LABELS) - set(known)).pop()
            if u not in seen:
                seen.add(u)
                queue.append(u)
    if len(seen) != net.n_triangles:
        raise Inconsistent("net is not connected across edges")
    tris = []
    for tri in net.triangles:
        labs = [labels[v] for v in tri.vertices]
        col = color_of_labels(labs) if None not in labs else None
        if col is None:
            raise Inconsistent(f"triangle {tri.id} does not carry three distinct labels")
        tris.append(NetTriangle(tri.id, col, tri.vertices))
    for a, b in net.gluings:
        if tris[a[0]].color == tris[b[0]].color:
            raise Inconsistent(f"triangles {a[0]} and {b[0]} share an edge but get the same color")
    return TriangularNet(net.surface, tuple(labels), tuple(tris), net.gluings)


def branching_profile(net: TriangularNet) -> dict[int, tuple[int, int]]:
    """``{vertex: (valence, local degree)}`` for interior vertices; degree is valence / 2."""
    return {v: (net.valence(v), net.valence(v) // 2) for v in range(net.n_vertices) if net.is_interior(v)}


# --- developing map ---------------------------------------------------------------


_GERM_WHITE = {"A": (0, 0), "B": (1, 0), "C": (0, 1)}
_GERM_BLACK = {"A": (0, 0), "B": (1, 0), "C": (1, -1)}


def default_germ(net: TriangularNet, t: int) -> Placement:
    """Place triangle ``t`` on the reference tiling with matching labels."""
    labs = net.triangle_labels(t)
    col = color_of_labels(labs)
    if col is None:
        raise InvalidPath(f"triangle {t} is not properly labelled")
    table = _GERM_WHITE if col == WHITE else _GERM_BLACK
    return tuple(table[x] for x in labs)


def cross_side(net: TriangularNet, t: int, placement: Placement, s: int) -> tuple[int, int, Placement]:
    """Reflect the placed triangle ``t`` across side ``s`` into its neighbour."""
    nb = net.neighbor(t, s)
    if nb is None:
        raise InvalidPath(f"side {s} of triangle {t} is on the boundary")
    u, r = nb
    p, q, apex = placement[s], placement[(s + 1) % 3], placement[(s + 2) % 3]
    new = [None, None, None]
    new[(r + 1) % 3] = p
    new[r] = q
    new[(r + 2) % 3] = _sub(_add(p, q), apex)
    return u, r, tuple(new)


@dataclass(frozen=True)
class EdgePath:
    """Triangles visited and the side through which each is left."""

    steps: tuple[tuple[int, int], ...]

    @classmethod
    def from_sides(cls, net: TriangularNet, start: int, sides: Sequence[int]) -> "EdgePath":
        steps = []
        t = start
        for s in sides:
            steps.append((t, s))
            nb = net.neighbor(t, s)
            if nb is None:
                raise InvalidPath(f"side {s} of triangle {t} is on the boundary")
            t = nb[0]
        return cls(tuple(steps))

    def end_triangle(self, net: TriangularNet) -> int:
        t, s = self.steps[-1]
        nb = net.neighbor(t, s)
        if nb is None:
            raise InvalidPath(f"side {s} of triangle {t} is on the boundary")
        return nb[0]

    def is_closed(self, net: TriangularNet) -> bool:
        return bool(self.steps) and self.end_triangle(net) == self.steps[0][0]


@dataclass(frozen=True)
class Development:
    triangles: tuple[int, ...]
    placements: tuple[Placement, ...]
    holonomy: Isometry | None


def develop(net: TriangularNet, path: EdgePath, germ: Placement | None = None) -> Development:
    """Unfold ``path`` into the plane; closed paths also return their holonomy."""
    if not path.steps:
        raise InvalidPath("empty path")
    t = path.steps[0][0]
    pl = germ if germ is not None else default_germ(net, t)
    tris, pls = [t], [pl]
    for step_t, s in path.steps:
        if step_t != t:
            raise InvalidPath(f"path expects triangle {step_t} but is in {t}")
        t, _, pl = cross_side(net, t, pl, s)
        tris.append(t)
        pls.append(pl)
    hol = isometry_between(pls[0], pls[-1]) if t == tris[0] else None
    return Development(tuple(tris), tuple(pls), hol)


# --- winding around a cylinder --------------------------------------------------------


@dataclass(frozen=True)
class WindingCocycle:
    """Signed crossing numbers with a fixed edge path joining the two boundary
    cycles.  A closed curve winds around the cylinder ``sum`` times."""

    values: dict  # (t, s) -> int for crossing triangle t through side s
    corner_potential: dict  # (t, k) -> int

    def crossing(self, t: int, s: int) -> int:
        return self.values.get((t, s), 0)

    def of_path(self, path: EdgePath) -> int:
        return sum(self.crossing(t, s) for t, s in path.steps)


def winding_cocycle(net: TriangularNet) -> WindingCocycle:
    comps = net.boundary_components()
    if len(comps) != 2:
        raise ValueError("winding numbers need exactly two boundary cycles")
    start = {v for t, s in comps[0] for v in net.side_vertices(t, s)}
    goal = {v for t, s in comps[1] for v in net.side_vertices(t, s)}
    # breadth-first search over the 1-skeleton, remembering the side used
    adj: dict[int, list[tuple[int, Side]]] = {}
    for t in range(net.n_triangles):
        for s in range(3):
            a, b = net.side_vertices(t, s)
            adj.setdefault(a, []).append((b, (t, s)))
            adj.setdefault(b, []).append((a, (t, s)))
    prev: dict[int, tuple[int, Side] | None] = {v: None for v in sorted(start)}
    queue = deque(sorted(start))
    end = None
    while queue:
        v = queue.popleft()
        if v in goal:
            end = v
            break
        for w, side in adj.get(v, []):
            if w not in prev:
                prev[w] = (v, side)
                queue.append(w)
    if end is None:
        raise ValueError("boundary cycles are not connected")
    values: dict[Side, int] = {}
    v = end
    while prev[v] is not None:
        u, (t, s) = prev[v]
        # edge traversed from u to v; triangle t lies left of its own side s
        a, _ = net.side_vertices(t, s)
        left, right = ((t, s), net.neighbor(t, s)) if a == u else (net.neighbor(t, s), (t, s))
        if left is not None and right is not None:
            values[left] = values.get(left, 0) + 1  # left -> right
            values[right] = values.get(right, 0) - 1
        v = u
    potential: dict[tuple[int, int], int] = {}
    for vtx in range(net.n_vertices):
        cs = net.corners(vtx)
        if not cs:
            continue
        cset = set(cs)
        potential[cs[0]] = 0
        stack = [cs[0]]
        while stack:
            t, k = stack.pop()
            for s in (k, (k - 1) % 3):
                nb = net.neighbor(t, s)
                if nb is None:
                    continue
                u = nb[0]
                for kk in range(3):
                    if (u, kk) in cset and net.triangles[u].vertices[kk] == vtx and (u, kk) not in potential:
                        potential[(u, kk)] = potential[(t, k)] + values.get((t, s), 0)
                        stack.append((u, kk))
    return WindingCocycle(values, potential)


# --- systole -----------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """A straight segment between vertices, in the surface."""

    start: int
    end: int
    norm: int  # squared length
    winding: int
    crossings: tuple[Side, ...]


def _segments_from(net: TriangularNet, v: int, cocycle: WindingCocycle, max_norm: int,
                   max_crossings: int) -> tuple[list[Segment], bool]:
    """All straight segments from ``v`` to vertices within ``sqrt(max_norm)``.

    Directions leaving ``v`` are swept triangle by triangle with exact open
    wedges; a wedge is split at every vertex it meets, so each recorded
    segment has no vertex in its interior.  The flag is true when the
    crossing bound cut off a wedge that was still within reach.
    """
    out: list[Segment] = []
    truncated = False
    pot = cocycle.corner_potential
    for t0, k0 in net.corners(v):
        base = default_germ(net, t0)
        shift = base[k0]
        pl = tuple(_sub(p, shift) for p in base)
        start_pot = pot[(t0, k0)]
        for kk in ((k0 + 1) % 3, (k0 + 2) % 3):
            end_v = net.triangles[t0].vertices[kk]
            out.append(Segment(v, end_v, 1, start_pot - pot[(t0, kk)], ()))
        # wedge through the side opposite v
        s = (k0 + 1) % 3
        stack = [(t0, pl, s, pl[s], pl[(s + 1) % 3], ())]
        while stack:
            t, pl, s, lo, hi, crossings = stack.pop()
            if net.neighbor(t, s) is None:
                continue
            e1, e2 = pl[s], pl[(s + 1) % 3]
            if _segment_dist2(e1, e2) > max_norm:
                continue
            if len(crossings) >= max_crossings:
                truncated = True
                continue
            u, r, npl = cross_side(net, t, pl, s)
            cr = crossings + ((t, s),)
            xk = (r + 2) % 3
            x = npl[xk]
            # in u the entry side r runs from e2 to e1; the far sides are
            # (r+1): e1 -> x and (r+2): x -> e2
            side_lo, side_hi = (r + 1) % 3, (r + 2) % 3
            c_lo, c_hi = cross(lo, x), cross(x, hi)
            if c_lo > 0 and c_hi > 0:
                nx = norm2(x)
                if nx <= max_norm:
                    wind = start_pot + sum(cocycle.crossing(a, b) for a, b in cr) - pot[(u, xk)]
                    out.append(Segment(v, net.triangles[u].vertices[xk], nx, wind, cr))
                stack.append((u, npl, side_lo, lo, x, cr))
                stack.append((u, npl, side_hi, x, hi, cr))
            elif c_lo <= 0:
                stack.append((u, npl, side_hi, lo, hi, cr))
            else:
                stack.append((u, npl, side_lo, lo, hi, cr))
    return out, truncated


def _segment_dist2(p: Point, q: Point) -> float:
    """Squared distance from the origin to the segment ``[p, q]``, slightly
    under-estimated (it is only used for pruning)."""
    d = _sub(q, p)
    dd = norm2(d)
    pd = p[0] * d[0] + 0.5 * (p[0] * d[1] + p[1] * d[0]) + p[1] * d[1]
    t = 0.0 if dd == 0 else max(0.0, min(1.0, -pd / dd))
    return norm2(p) + 2 * t * pd + t * t * dd - 1e-9


@dataclass(frozen=True)
class SystoleResult:
    min_length: float
    kind: str  # "vertex-loop" or "closed-geodesic"
    norms: tuple[int, ...]  # squared lengths of the pieces of the witness
    witness: tuple
    vertex_loop_length: float
    closed_geodesic_length: float

    @property
    def is_exactly_sqrt3(self) -> bool:
        return self.norms == (3,)


def _shortest_vertex_loop(net, cocycle, max_norm, max_crossings):
    segs: dict[int, list] = {}
    truncated = False
    for v in range(net.n_vertices):
        best: dict[tuple[int, int], Segment] = {}
        found, cut = _segments_from(net, v, cocycle, max_norm, max_crossings)
        truncated |= cut
        for sg in found:
            key = (sg.end, sg.winding)
            if key not in best or sg.norm < best[key].norm:
                best[key] = sg
        segs[v] = [(math.sqrt(sg.norm), sg.end, sg.winding, sg)
                   for sg in sorted(best.values(), key=lambda s: (s.norm, s.end, s.winding))]
    wmax = 3
    best_len, best_loop = math.inf, None
    for v0 in range(net.n_vertices):
        dist = {(v0, 0): 0.0}
        back: dict = {}
        heap = [(0.0, v0, 0)]
        while heap:
            d, v, w = heapq.heappop(heap)
            if d > dist.get((v, w), math.inf) or d >= best_len:
                continue
            if v == v0 and w != 0:
                best_len = d
                loop = []
                state = (v, w)
                while state != (v0, 0):
                    state, sg = back[state]
                    loop.append(sg)
                best_loop = tuple(reversed(loop))
                break
            for length, end, wind, sg in segs[v]:
                nd = d + length
                if nd >= best_len:
                    break  # segments are sorted by length
                nw = w + wind
                if abs(nw) > wmax:
                    continue
                key = (end, nw)
                if nd < dist.get(key, math.inf) - 1e-15:
                    dist[key] = nd
                    back[key] = ((v, w), sg)
                    heapq.heappush(heap, (nd, end, nw))
    return best_len, best_loop, truncated


def vertex_loop_systole(net: TriangularNet, max_crossings: int = 32, cocycle: WindingCocycle | None = None):
    """Shortest non-contractible closed curve through at least one vertex.

    Such a curve is a closed chain of straight vertex-to-vertex segments.
    Segments are collected up to a length bound that is raised until the
    best loop found is no longer than the bound, which makes it exact.
    """
    cocycle = cocycle or winding_cocycle(net)
    max_norm = 3
    while True:
        length, loop, truncated = _shortest_vertex_loop(net, cocycle, max_norm, max_crossings)
        if truncated:
            raise Inconclusive(f"max_crossings={max_crossings} cuts off segments shorter than {math.sqrt(max_norm):.3g}")
        if loop is not None and length * length <= max_norm + 1e-9:
            return length, loop
        if max_norm > 4 * max_crossings * max_crossings:
            raise Inconclusive("no non-contractible vertex loop within the crossing bound")
        max_norm = max(4 * max_norm, math.ceil(length * length) if loop is not None else 0)


def _clip(poly: list[tuple[float, float]], a: float, b: float, d: float, eps: float = 1e-9):
    """Keep the part of a convex polygon in ``{(c, m): a c + b m <= d}``."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = a * p[0] + b * p[1] - d
        fq = a * q[0] + b * q[1] - d
        if fp <= eps:
            out.append(p)
        if (fp < -eps and fq > eps) or (fp > eps and fq < -eps):
            s = fp / (fp - fq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return out


def closed_geodesics(net: TriangularNet, max_crossings: int = 24, max_length: float = 4.0,
                     cocycle: WindingCocycle | None = None) -> list[tuple[int, EdgePath]]:
    """Straight closed geodesics avoiding vertices, as ``(squared length, path)``.

    Every oriented interior side starts a depth-first unfolding.  A line
    ``y = c + m x`` in a frame attached to the start side must cross each
    unfolded side in order; the admissible ``(c, m)`` set is a convex polygon
    clipped as the path grows.  On return to the start side the holonomy must
    be a nonzero translation ``tau`` and the corridor in direction ``tau`` must
    be open, which is decided exactly with integer cross products.
    """
    cocycle = cocycle or winding_cocycle(net)
    found: dict[tuple[int, tuple], tuple[int, EdgePath]] = {}
    max_norm = max_length * max_length
    big = 1e3
    h = math.sqrt(3) / 2
    for t0 in range(net.n_triangles):
        if net.triangles[t0].color != WHITE:
            continue  # consecutive triangles alternate colours, so every loop leaves a white one
        for s0 in range(3):
            if net.neighbor(t0, s0) is None:
                continue
            pl0 = default_germ(net, t0)
            e1, e2 = to_cartesian(pl0[s0]), to_cartesian(pl0[(s0 + 1) % 3])
            ux, uy = (e2 - e1).real, (e2 - e1).imag  # unit vector along the start side
            ox, oy = e1.real, e1.imag

            def frame(p: Point, ux=ux, uy=uy, ox=ox, oy=oy) -> tuple[float, float]:
                # x into the neighbour (right of the side), y along the side
                px = p[0] + 0.5 * p[1] - ox
                py = h * p[1] - oy
                return (px * uy - py * ux, px * ux + py * uy)

            poly0 = [(0.0, -big), (1.0, -big), (1.0, big), (0.0, big)]
            stack = [(t0, pl0, s0, poly0, ((t0, s0),))]
            while stack:
                t, pl, s, poly, steps = stack.pop()
                u, r, npl = cross_side(net, t, pl, s)
                for ns in ((r + 1) % 3, (r + 2) % 3):
                    if net.neighbor(u, ns) is None:
                        continue
                    p, q = npl[ns], npl[(ns + 1) % 3]
                    # exit side p -> q with u on its left: q above the line, p below
                    xp, yp = frame(p)
                    xq, yq = frame(q)
                    # c + m xq < yq  and  c + m xp > yp
                    npoly = _clip(poly, 1.0, xq, yq)
                    if len(npoly) >= 3:
                        npoly = _clip(npoly, -1.0, -xp, -yp)
                    if len(npoly) < 3:
                        continue
                    nsteps = steps + ((u, ns),)
                    if (u, ns) == (t0, s0):
                        hol = isometry_between(pl0, npl)
                        tau = hol.translation
                        if not hol.is_translation or tau == (0, 0) or norm2(tau) > max_norm:
                            continue
                        path = EdgePath(nsteps[:-1])
                        if cocycle.of_path(path) == 0:
                            continue
                        if _corridor_open(net, pl0, path, tau):
                            key = (norm2(tau), tuple(sorted(path.steps)))
                            found.setdefault(key, (norm2(tau), path))
                        continue
                    if len(nsteps) > max_crossings:
                        continue
                    if min(xp, xq) > max_length or min(yp, yq) > 1 + max_length or max(yp, yq) < -max_length:
                        continue
                    stack.append((u, npl, ns, npoly, nsteps))
    return sorted(found.values(), key=lambda x: (x[0], x[1].steps))


def _corridor_open(net: TriangularNet, pl0: Placement, path: EdgePath, tau: Point) -> bool:
    lo, hi = -math.inf, math.inf
    t, pl = path.steps[0][0], pl0
    for step_t, s in path.steps:
        p, q = pl[s], pl[(s + 1) % 3]
        # a line with direction tau crosses p -> q from its left: q above, p below
        lo = max(lo, cross(tau, p))
        hi = min(hi, cross(tau, q))
        t, _, pl = cross_side(net, t, pl, s)
    return lo < hi


def systole_verify(net: TriangularNet, max_crossings: int = 32) -> SystoleResult:
    """Length of the shortest non-contractible closed curve of a flat cylinder.

    Two candidate families are searched: closed chains of straight segments
    through vertices, and straight closed geodesics avoiding vertices.  A
    geodesic of the second kind sweeps a flat cylinder of parallel copies
    whose edge carries a vertex, so the first family already attains the
    minimum; the second is computed independently as a cross-check.
    """
    report = validate_net(net)
    if report.boundary_components != 2 or report.euler_characteristic != 0:
        raise ValueError("systole_verify needs an annulus")
    cocycle = winding_cocycle(net)
    vlen, loop = vertex_loop_systole(net, max_crossings, cocycle)
    geos = closed_geodesics(net, max_crossings, max_length=vlen + 1e-9, cocycle=cocycle)
    glen = math.sqrt(geos[0][0]) if geos else math.inf
    if glen < vlen - 1e-12:
        norm, path = geos[0]
        return SystoleResult(glen, "closed-geodesic", (norm,), path.steps, vlen, glen)
    witness = tuple((sg.start, sg.end, sg.norm) for sg in loop)
    return SystoleResult(vlen, "vertex-loop", tuple(sg.norm for sg in loop), witness, vlen, glen)


def holonomy_translation_lattice(net: TriangularNet, max_crossings: int = 12, base: int = 0) -> set[Point]:
    """Translations among holonomies of non-contractible closed edge paths at ``base``."""
    cocycle = winding_cocycle(net)
    germ = default_germ(net, base)
    out: set[Point] = set()
    stack = [(base, germ, 0, 0)]
    while stack:
        t, pl, depth, wind = stack.pop()
        if depth >= max_crossings:
            continue
        for s in range(3):
            if net.neighbor(t, s) is None:
                continue
            u, _, npl = cross_side(net, t, pl, s)
            nw = wind + cocycle.crossing(t, s)
            if u == base and nw != 0:
                hol = isometry_between(germ, npl)
                if hol.is_translation:
                    out.add(hol.translation)
            stack.append((u, npl, depth + 1, nw))
    return out


def extremal_length_bound(area: float) -> float:
    """Lower bound ``3 / area`` for the extremal length of the non-contractible
    curves of a ring of the given area (shortest such curve has length ``sqrt 3``)."""
    if not area > 0:
        raise ValueError("area must be positive")
    return 3.0 / area
