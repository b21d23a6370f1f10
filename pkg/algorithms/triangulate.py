# Triangulation Builder -> layered solid tori and filled Borromean manifolds
"""
Inputs:
    - Slope m (internal lattice coordinates) or a filling slope p/q
      in meridian/longitude coordinates of a crossing-circle cusp
    - DiagonalChoice: auto | positive | negative
    - LinkVariant: plain | half_twist_1 | half_twist_2 | both

Outputs:
    - Triangulation: tetrahedra, face gluings (vertex permutations),
      edge classes, boundary faces and construction metadata

Description:
    Boundary surfaces are kept as concrete lattice triangles taken modulo a
    period lattice: Z^2 for the once-punctured torus, an index-two lattice for
    the twice-punctured one. Layering a tetrahedron on the edge (P, P+c) between
    the triangles (P, P+c, X) and (P, P+c, Y) replaces them by (P, X, Y) and
    (P+c, X, Y), which is exactly a diagonal exchange in the Farey walk.

    Every tetrahedron is positively oriented in the same model (new layers go
    underneath), so the complex is oriented exactly when every gluing
    permutation is odd.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from itertools import product
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from algorithms.farey import (
    MINUS_ONE,
    ONE,
    ZERO,
    FareyWalk,
    Slope,
    from_vector,
    reduce,
    walk_to,
)
from utils.errors import (
    CoreSlopeExcluded,
    ExcludedSlope,
    GluingMismatch,
    InvalidTriangulation,
    ParityError,
)

logger = logging.getLogger(__name__)

Perm = Tuple[int, int, int, int]
Point = Tuple[int, int]
Matrix = Tuple[Tuple[int, int], Tuple[int, int]]

EDGE_VERTICES: Tuple[Tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
IDENTITY: Matrix = ((1, 0), (0, 1))


class DiagonalChoice(str, Enum):
    AUTO = "auto"
    POSITIVE = "positive"
    NEGATIVE = "negative"

    def signs(self) -> Tuple[int, ...]:
        if self is DiagonalChoice.AUTO:
            return (-1, 1)
        return (1,) if self is DiagonalChoice.POSITIVE else (-1,)


class LinkVariant(str, Enum):
    PLAIN = "plain"
    HALF_TWIST_1 = "half_twist_1"
    HALF_TWIST_2 = "half_twist_2"
    BOTH = "both"

    def twisted(self, cusp: int) -> bool:
        if self is LinkVariant.BOTH:
            return True
        return (cusp == 0 and self is LinkVariant.HALF_TWIST_1) or (
            cusp == 1 and self is LinkVariant.HALF_TWIST_2
        )


class SlopeBasis(str, Enum):
    INTERNAL = "internal"
    MERIDIAN_LONGITUDE = "meridian-longitude"


class TorusKind(str, Enum):
    LAYERED = "lst"
    DOUBLE_COVER = "double"
    SIDE_BY_SIDE = "sbs"


# -----------------------
# Small integer helpers
# -----------------------

def _add(p: Point, q: Point) -> Point:
    return (p[0] + q[0], p[1] + q[1])


def _sub(p: Point, q: Point) -> Point:
    return (p[0] - q[0], p[1] - q[1])


def _neg(p: Point) -> Point:
    return (-p[0], -p[1])


def _cross(p: Point, q: Point) -> int:
    return p[0] * q[1] - p[1] * q[0]


def _apply(a: Matrix, v: Point) -> Point:
    return (a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1])


def _inverse(a: Matrix) -> Matrix:
    # determinant one
    return ((a[1][1], -a[0][1]), (-a[1][0], a[0][0]))


def _positive(v: Point) -> Point:
    return v if v[0] > 0 or (v[0] == 0 and v[1] > 0) else _neg(v)


def perm_inverse(perm: Sequence[int]) -> Perm:
    inv = [0, 0, 0, 0]
    for i, j in enumerate(perm):
        inv[j] = i
    return tuple(inv)


def perm_is_odd(perm: Sequence[int]) -> bool:
    inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
    return inversions % 2 == 1


def edge_index(a: int, b: int) -> int:
    return EDGE_VERTICES.index((min(a, b), max(a, b)))


# -----------------------
# Period lattices
# -----------------------

@dataclass(frozen=True)
class PeriodLattice:
    b1: Point
    b2: Point

    @property
    def index(self) -> int:
        return abs(_cross(self.b1, self.b2))

    def reduce(self, p: Point) -> Point:
        """Representative of p modulo the lattice, stable under lattice translation."""
        d = _cross(self.b1, self.b2)
        sign = 1 if d > 0 else -1
        d = abs(d)
        c1 = sign * (self.b2[1] * p[0] - self.b2[0] * p[1])
        c2 = sign * (-self.b1[1] * p[0] + self.b1[0] * p[1])
        k1, k2 = c1 // d, c2 // d
        return (p[0] - k1 * self.b1[0] - k2 * self.b2[0], p[1] - k1 * self.b1[1] - k2 * self.b2[1])

    def contains(self, p: Point) -> bool:
        return self.reduce(p) == (0, 0)

    def coset_shift(self) -> Point:
        for g in ((1, 0), (0, 1), (1, 1)):
            if not self.contains(g):
                return g
        return (0, 0)


UNIT_LATTICE = PeriodLattice((1, 0), (0, 1))
PLAIN_LATTICE = PeriodLattice((2, 0), (0, 1))
TWISTED_LATTICE = PeriodLattice((2, 0), (1, 1))


# -----------------------
# Triangulation data
# -----------------------

@dataclass(frozen=True)
class Tetrahedron:
    index: int


@dataclass(frozen=True)
class FaceGluing:
    tet: int
    face: int
    other_tet: int
    other_face: int
    perm: Perm


@dataclass(frozen=True)
class EdgeClass:
    members: Tuple[Tuple[int, int], ...]

    @property
    def valence(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class BoundaryFace:
    tet: int
    face: int
    points: Tuple[Point, Point, Point]
    vertices: Tuple[int, int, int]
    slopes: Tuple[Slope, Slope, Slope]


@dataclass(frozen=True)
class TetInfo:
    torus: int
    kind: TorusKind
    layer: int
    core: bool = False


@dataclass(frozen=True)
class TorusInfo:
    kind: TorusKind
    slope: Slope
    walk_length: int
    frame: Matrix = IDENTITY
    twisted: bool = False
    twist_sign: int = 1
    diagonal: int = 0
    filling: Optional[Slope] = None


@dataclass(frozen=True)
class ConstructionMetadata:
    tets: Tuple[TetInfo, ...]
    tori: Tuple[TorusInfo, ...]
    fold_faces: FrozenSet[Tuple[int, int]] = frozenset()
    deck: Tuple[Tuple[int, int], ...] = ()
    variant: LinkVariant = LinkVariant.PLAIN
    diagonal: int = 0


@dataclass(frozen=True)
class Triangulation:
    neighbors: Tuple[Tuple[int, int, int, int], ...]
    gluings: Tuple[Tuple[Optional[Perm], ...], ...]
    boundary: Tuple[BoundaryFace, ...] = ()
    metadata: Optional[ConstructionMetadata] = None

    @property
    def tet_count(self) -> int:
        return len(self.neighbors)

    @property
    def tetrahedra(self) -> Tuple[Tetrahedron, ...]:
        return tuple(Tetrahedron(i) for i in range(self.tet_count))

    def face_gluings(self) -> List[FaceGluing]:
        """Each glued face pair once, from the lexicographically smaller side."""
        out = []
        for t in range(self.tet_count):
            for f in range(4):
                u = self.neighbors[t][f]
                if u < 0:
                    continue
                perm = self.gluings[t][f]
                if (t, f) <= (u, perm[f]):
                    out.append(FaceGluing(t, f, u, perm[f], perm))
        return out

    def unglued_faces(self) -> List[Tuple[int, int]]:
        return [(t, f) for t in range(self.tet_count) for f in range(4) if self.neighbors[t][f] < 0]

    @cached_property
    def edge_classes(self) -> Tuple[EdgeClass, ...]:
        seen = set()
        classes = []
        for t in range(self.tet_count):
            for e, (a, b) in enumerate(EDGE_VERTICES):
                if (t, e) in seen:
                    continue
                c, d = (v for v in range(4) if v not in (a, b))
                forward, closed = self._walk_edge(t, a, b, c, d)
                members = forward
                if not closed:
                    backward, _ = self._walk_edge(t, a, b, d, c)
                    members = list(reversed(backward[1:])) + forward
                seen.update(members)
                classes.append(EdgeClass(tuple(members)))
        return tuple(classes)

    def _walk_edge(self, t: int, a: int, b: int, c: int, d: int) -> Tuple[List[Tuple[int, int]], bool]:
        start = (t, edge_index(a, b))
        members = [start]
        for _ in range(6 * self.tet_count + 1):
            u = self.neighbors[t][c]
            if u < 0:
                return members, False
            perm = self.gluings[t][c]
            t, a, b, c, d = u, perm[a], perm[b], perm[d], perm[c]
            here = (t, edge_index(a, b))
            if here == start or here in members:
                return members, True
            members.append(here)
        return members, True

    @cached_property
    def vertex_classes(self) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
        parent = {(t, v): (t, v) for t in range(self.tet_count) for v in range(4)}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for t in range(self.tet_count):
            for f in range(4):
                u = self.neighbors[t][f]
                if u < 0:
                    continue
                perm = self.gluings[t][f]
                for v in range(4):
                    if v != f:
                        parent[find((t, v))] = find((u, perm[v]))
        groups: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
        for key in sorted(parent):
            groups.setdefault(find(key), []).append(key)
        return tuple(tuple(g) for g in groups.values())

    @property
    def cusp_count(self) -> int:
        return len(self.vertex_classes)


# -----------------------
# Validation
# -----------------------

@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[str, ...]
    tet_count: int
    edge_classes: int
    vertex_classes: int

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(t: Triangulation) -> ValidationReport:
    """Check involution, orientability, edge-class partition and the edge count of a closed complex."""
    violations: List[str] = []
    declared = {(b.tet, b.face) for b in t.boundary}
    consistent = True
    for tet in range(t.tet_count):
        for f in range(4):
            u = t.neighbors[tet][f]
            perm = t.gluings[tet][f]
            if u < 0:
                if (tet, f) not in declared:
                    violations.append(f"unglued face: tet {tet} face {f}")
                continue
            if perm is None or sorted(perm) != [0, 1, 2, 3] or not 0 <= u < t.tet_count:
                violations.append(f"malformed gluing: tet {tet} face {f}")
                consistent = False
                continue
            g = perm[f]
            back = t.gluings[u][g]
            if t.neighbors[u][g] != tet or back is None or tuple(back) != perm_inverse(perm):
                violations.append(f"involution: tet {tet} face {f} -> tet {u} face {g}")
                consistent = False
            if not perm_is_odd(perm):
                violations.append(f"orientation: tet {tet} face {f} glued by an even permutation")
    if not consistent:
        return ValidationReport(tuple(violations), t.tet_count, 0, 0)

    counts: Dict[Tuple[int, int], int] = {}
    for ec in t.edge_classes:
        for member in ec.members:
            counts[member] = counts.get(member, 0) + 1
    for tet in range(t.tet_count):
        for e in range(6):
            if counts.get((tet, e), 0) != 1:
                violations.append(f"edge partition: tet {tet} edge {e} appears {counts.get((tet, e), 0)} times")

    closed = not t.unglued_faces()
    if closed and t.cusp_count == 1 and len(t.edge_classes) != t.tet_count:
        violations.append(
            f"edge count: {len(t.edge_classes)} edge classes for {t.tet_count} tetrahedra"
        )
    if closed and t.metadata is not None and len(t.metadata.tori) == 2 and t.cusp_count != 1:
        violations.append(f"cusps: expected one vertex class, found {t.cusp_count}")
    return ValidationReport(tuple(violations), t.tet_count, len(t.edge_classes), t.cusp_count)


# -----------------------
# Boundary surface engine
# -----------------------

@dataclass(frozen=True)
class _Owner:
    tet: int
    face: int
    vertices: Tuple[int, int, int]


@dataclass
class _Facet:
    points: Tuple[Point, Point, Point]
    owner: Optional[_Owner]


class _Builder:
    def __init__(self):
        self.neighbors: List[List[int]] = []
        self.gluings: List[List[Optional[Perm]]] = []
        self.info: List[TetInfo] = []
        self.boundary: List[BoundaryFace] = []
        self.fold_faces = set()
        self.deck: List[Tuple[int, int]] = []

    def add_tet(self, info: TetInfo) -> int:
        self.neighbors.append([-1, -1, -1, -1])
        self.gluings.append([None, None, None, None])
        self.info.append(info)
        return len(self.info) - 1

    def glue(self, t: int, f: int, u: int, g: int, perm: Perm) -> None:
        if self.neighbors[t][f] >= 0 or self.neighbors[u][g] >= 0:
            raise InvalidTriangulation(f"face ({t}, {f}) or ({u}, {g}) is already glued")
        if perm[f] != g:
            raise InvalidTriangulation(f"gluing of ({t}, {f}) does not send the face to face {g}")
        self.neighbors[t][f] = u
        self.gluings[t][f] = tuple(perm)
        self.neighbors[u][g] = t
        self.gluings[u][g] = perm_inverse(perm)

    def freeze(self, metadata: Optional[ConstructionMetadata]) -> Triangulation:
        return Triangulation(
            neighbors=tuple(tuple(n) for n in self.neighbors),
            gluings=tuple(tuple(g) for g in self.gluings),
            boundary=tuple(self.boundary),
            metadata=metadata,
        )


class _Surface:
    def __init__(self, lattice: PeriodLattice, frame: Matrix):
        self.lattice = lattice
        self.frame = frame
        self.facets: List[_Facet] = []

    def seed(self, vectors: Sequence[Point]) -> None:
        u, v, w = vectors
        s = _add(u, v)
        origin = (0, 0)
        if w in (s, _neg(s)):
            triangles = [(origin, u, s), (origin, s, v)]
        elif w in (_sub(u, v), _sub(v, u)):
            triangles = [(origin, u, v), (u, s, v)]
        else:
            raise InvalidTriangulation(f"vectors {vectors} do not span a Farey triangle")
        shifts = [origin] if self.lattice.index == 1 else [origin, self.lattice.coset_shift()]
        self.facets = [
            _Facet(tuple(_add(p, g) for p in tri), None) for g in shifts for tri in triangles
        ]

    def segments(self, direction: Point) -> List[Tuple[Point, Point]]:
        found: Dict[Point, Tuple[Point, Point]] = {}
        for facet in self.facets:
            for i, j in ((0, 1), (1, 2), (0, 2)):
                p, q = facet.points[i], facet.points[j]
                d = _sub(q, p)
                if d == direction:
                    start = p
                elif d == _neg(direction):
                    start = q
                else:
                    continue
                found.setdefault(self.lattice.reduce(start), (start, _add(start, direction)))
        return [found[key] for key in sorted(found)]

    def facets_on(self, a: Point, b: Point) -> List[Tuple[int, Tuple[Point, Point, Point]]]:
        d = _sub(b, a)
        found = []
        for idx, facet in enumerate(self.facets):
            for i, j in product(range(3), repeat=2):
                if i != j and _sub(facet.points[j], facet.points[i]) == d:
                    shift = _sub(a, facet.points[i])
                    if self.lattice.contains(shift):
                        found.append((idx, tuple(_add(p, shift) for p in facet.points)))
        if len(found) != 2 or found[0][0] == found[1][0]:
            raise InvalidTriangulation(f"edge {a}-{b} is not shared by two boundary triangles")
        return found

    def replace(self, indices: Sequence[int], facets: Sequence[_Facet]) -> None:
        for idx in sorted(indices, reverse=True):
            del self.facets[idx]
        self.facets.extend(facets)

    def intrinsic_slope(self, direction: Point) -> Slope:
        x, y = _apply(_inverse(self.frame), direction)
        return from_vector(x, y)


def _apex(tri: Sequence[Point], a: Point, b: Point) -> Point:
    (c,) = [p for p in tri if p != a and p != b]
    return c


def _attach(builder: _Builder, surface: _Surface, tet: int, face: int, order: Sequence[Point],
            facet: _Facet, tri: Sequence[Point]) -> None:
    if facet.owner is None:
        slopes = tuple(surface.intrinsic_slope(_sub(tri[(k + 2) % 3], tri[(k + 1) % 3])) for k in range(3))
        builder.boundary.append(
            BoundaryFace(tet, face, tuple(tri), tuple(order.index(p) for p in tri), slopes)
        )
        return
    owner = facet.owner
    perm = [0, 0, 0, 0]
    perm[face] = owner.face
    for k in range(4):
        if k != face:
            perm[k] = owner.vertices[tri.index(order[k])]
    builder.glue(tet, face, owner.tet, owner.face, tuple(perm))


def _layer(builder: _Builder, surface: _Surface, direction: Point, info: TetInfo) -> List[int]:
    created = []
    for a, b in surface.segments(direction):
        (i1, tri1), (i2, tri2) = surface.facets_on(a, b)
        x, y = _apex(tri1, a, b), _apex(tri2, a, b)
        order = (a, b, x, y) if _cross(direction, _sub(y, x)) > 0 else (a, b, y, x)
        t = builder.add_tet(info)
        _attach(builder, surface, t, order.index(y), order, surface.facets[i1], tri1)
        _attach(builder, surface, t, order.index(x), order, surface.facets[i2], tri2)
        fresh = [
            _Facet(tuple(order[k] for k in range(4) if k != f), _Owner(t, f, tuple(k for k in range(4) if k != f)))
            for f in (0, 1)
        ]
        surface.replace((i1, i2), fresh)
        created.append(t)
    return created


def _fold(builder: _Builder, surface: _Surface, direction: Point) -> None:
    for a, b in surface.segments(direction):
        (i1, tri1), (i2, tri2) = surface.facets_on(a, b)
        r1, r2 = _apex(tri1, a, b), _apex(tri2, a, b)
        if _add(r1, r2) != _add(a, b):
            raise InvalidTriangulation("fold edge is not a diagonal of its parallelogram")
        o1, o2 = surface.facets[i1].owner, surface.facets[i2].owner
        if o1 is None or o2 is None:
            raise InvalidTriangulation("cannot fold a boundary with no layers")
        image = {a: a, b: b, r1: r2}
        perm = [0, 0, 0, 0]
        perm[o1.face] = o2.face
        for i, p in enumerate(tri1):
            perm[o1.vertices[i]] = o2.vertices[tri2.index(image[p])]
        builder.glue(o1.tet, o1.face, o2.tet, o2.face, tuple(perm))
        builder.fold_faces.update({(o1.tet, o1.face), (o2.tet, o2.face)})
        surface.replace((i1, i2), [])


def _segment_key(lattice: PeriodLattice, p: Point, q: Point) -> Tuple[Point, Point]:
    d = _sub(q, p)
    if _positive(d) != d:
        p, d = q, _neg(d)
    return lattice.reduce(p), d


def _close_core(builder: _Builder, surface: _Surface, direction: Point, info: TetInfo) -> int:
    """Fill the innermost layer of a side-by-side torus with one tetrahedron."""
    facets = list(surface.facets)
    if len(facets) != 4 or any(f.owner is None for f in facets):
        raise InvalidTriangulation("core tetrahedron needs four layered boundary triangles")
    w = _positive(direction)
    edges: List[Dict[Tuple[Point, Point], int]] = []
    w_corner: List[int] = []
    sharing: Dict[Tuple[Point, Point], List[int]] = {}
    for i, facet in enumerate(facets):
        keyed = {}
        for k in range(3):
            key = _segment_key(surface.lattice, facet.points[(k + 1) % 3], facet.points[(k + 2) % 3])
            if key[1] == w:
                w_corner.append(k)
            else:
                keyed[key] = k
                sharing.setdefault(key, []).append(i)
        edges.append(keyed)
    if len(w_corner) != 4:
        raise InvalidTriangulation("every innermost triangle must carry one core-slope edge")

    adjacent: Dict[Tuple[int, int], Tuple[Point, Point]] = {}
    for key, owners in sharing.items():
        if len(owners) != 2 or owners[0] == owners[1]:
            raise InvalidTriangulation("innermost triangles do not pair along their edges")
        i, j = sorted(owners)
        if (i, j) in adjacent:
            raise InvalidTriangulation("innermost triangles share two edges")
        adjacent[(i, j)] = key
    if len(adjacent) != 4:
        raise InvalidTriangulation("innermost triangles do not form a four-cycle")

    def corner(i: int, j: int) -> int:
        key = adjacent.get((min(i, j), max(i, j)))
        return w_corner[i] if key is None else edges[i][key]

    for order in ((0, 1, 2, 3), (1, 0, 2, 3)):
        perms = []
        for i in range(4):
            owner = facets[order[i]].owner
            perm = [0, 0, 0, 0]
            perm[i] = owner.face
            for j in range(4):
                if j != i:
                    perm[j] = owner.vertices[corner(order[i], order[j])]
            perms.append((owner, tuple(perm)))
        if all(perm_is_odd(p) for _, p in perms):
            break
    else:
        raise InvalidTriangulation("core tetrahedron cannot be glued orientably")

    t = builder.add_tet(info)
    for i, (owner, perm) in enumerate(perms):
        builder.glue(t, i, owner.tet, owner.face, perm)
    surface.replace(range(4), [])
    return t


# -----------------------
# Frames
# -----------------------

def _frame_key(a: Matrix) -> Tuple:
    flat = (a[0][0], a[0][1], a[1][0], a[1][1])
    return (sum(abs(x) for x in flat), -(a[0][0] > 0) - (a[1][1] > 0), flat)


_FRAMES: Tuple[Matrix, ...] = tuple(
    sorted(
        (
            ((p, q), (r, s))
            for p, q, r, s in product(range(-2, 3), repeat=4)
            if p * s - q * r == 1
        ),
        key=_frame_key,
    )
)


def initial_vectors(sign: int) -> Tuple[Point, Point, Point]:
    return ((1, 0), (0, 1), (1, 1 if sign > 0 else -1))


def frame_fits(a: Matrix, sign: int, diagonal: int) -> bool:
    """Does a send the initial triangle's edges to the square picture's edges?"""
    images = {_positive(_apply(a, v)) for v in initial_vectors(sign)}
    return images == {(1, 0), (0, 1), (1, diagonal)}


def frames_for(sign: int, diagonal: int, direction: Point, lattice: PeriodLattice,
               inside: bool) -> List[Matrix]:
    """Frames for a torus whose key direction must (inside) or must not lie in the lattice."""
    return [
        a for a in _FRAMES
        if frame_fits(a, sign, diagonal) and lattice.contains(_apply(a, direction)) == inside
    ]


# -----------------------
# Torus plans and builders
# -----------------------

@dataclass(frozen=True)
class TorusPlan:
    kind: TorusKind
    slope: Slope
    walk: FareyWalk
    frame: Matrix = IDENTITY
    lattice: PeriodLattice = UNIT_LATTICE
    twisted: bool = False
    twist_sign: int = 1
    diagonal: int = 0

    @property
    def core(self) -> Slope:
        return self.walk.target

    def meridian(self) -> Point:
        v = _apply(self.frame, self.walk.target.vector)
        return (2 * v[0], 2 * v[1]) if self.kind is TorusKind.SIDE_BY_SIDE else v

    def filling(self) -> Slope:
        """Filling slope in the meridian/longitude basis of the cusp picture."""
        x, y = self.meridian()
        t = self.twist_sign if self.twisted else 0
        return reduce(y, (x - t * y) // 2)


def _build_torus(builder: _Builder, plan: TorusPlan, torus: int) -> List[BoundaryFace]:
    surface = _Surface(plan.lattice, plan.frame)
    surface.seed([_apply(plan.frame, v) for v in initial_vectors(plan.walk.target.sign)])
    first_boundary = len(builder.boundary)
    walk = plan.walk
    steps = walk.length if plan.kind is TorusKind.SIDE_BY_SIDE else walk.length - 1
    for i in range(steps):
        gone, _ = walk.exchange(i)
        created = _layer(builder, surface, _apply(plan.frame, gone.vector), TetInfo(torus, plan.kind, i + 1))
        if len(created) == 2:
            builder.deck.append((created[0], created[1]))
    if plan.kind is TorusKind.SIDE_BY_SIDE:
        _close_core(builder, surface, _apply(plan.frame, walk.target.vector),
                    TetInfo(torus, plan.kind, steps + 1, core=True))
    else:
        gone, _ = walk.exchange(walk.length - 1)
        _fold(builder, surface, _apply(plan.frame, gone.vector))
    logger.debug("torus %d (%s, %s): %d boundary faces", torus, plan.kind.value, plan.slope,
                 len(builder.boundary) - first_boundary)
    return builder.boundary[first_boundary:]


def _torus_info(plan: TorusPlan) -> TorusInfo:
    filling = None if plan.kind is TorusKind.LAYERED else plan.filling()
    return TorusInfo(plan.kind, plan.slope, plan.walk.length, plan.frame, plan.twisted,
                     plan.twist_sign, plan.diagonal, filling)


def _single(plan: TorusPlan) -> Triangulation:
    builder = _Builder()
    _build_torus(builder, plan, 0)
    metadata = ConstructionMetadata(
        tets=tuple(builder.info),
        tori=(_torus_info(plan),),
        fold_faces=frozenset(builder.fold_faces),
        deck=tuple(builder.deck),
        diagonal=plan.diagonal,
    )
    return builder.freeze(metadata)


def build_lst(m: Slope) -> Triangulation:
    """Layered solid torus whose meridian is m; N-1 tetrahedra."""
    walk = walk_to(m)
    return _single(TorusPlan(TorusKind.LAYERED, m, walk))


def _lattice(twisted: bool) -> PeriodLattice:
    return TWISTED_LATTICE if twisted else PLAIN_LATTICE


def plan_internal(m: Slope, diagonal: int, twisted: bool = False, twist_sign: int = 1) -> List[TorusPlan]:
    """All frame choices for internal slope m: double cover when l is odd, side-by-side otherwise."""
    if m.p % 2:
        walk = walk_to(m)
        kind, direction, inside = TorusKind.DOUBLE_COVER, m.vector, True
    else:
        core = reduce(m.p // 2, m.q)
        if core in (ZERO, ONE, MINUS_ONE):
            raise CoreSlopeExcluded(f"Core slope {core} of {m} lies in the initial triangle.")
        walk = walk_to(core, minimum_length=1)
        kind, direction, inside = TorusKind.SIDE_BY_SIDE, core.vector, False
    lattice = _lattice(twisted)
    return [
        TorusPlan(kind, m, walk, frame, lattice, twisted, twist_sign, diagonal)
        for frame in frames_for(walk.target.sign, diagonal, direction, lattice, inside)
    ]


def plan_filling(f: Slope, diagonal: int, twisted: bool = False, twist_sign: int = 1) -> List[TorusPlan]:
    """All frame choices realising filling slope f (meridian/longitude coordinates)."""
    t = twist_sign if twisted else 0
    meridian = (t * f.p + 2 * f.q, f.p)
    if f.p % 2:
        kind, target = TorusKind.DOUBLE_COVER, meridian
    else:
        kind, target = TorusKind.SIDE_BY_SIDE, (meridian[0] // 2, meridian[1] // 2)
    lattice = _lattice(twisted)
    plans = []
    for frame in _FRAMES:
        slope = from_vector(*_apply(_inverse(frame), target))
        if slope.sign == 0 or not frame_fits(frame, slope.sign, diagonal):
            continue
        try:
            if kind is TorusKind.DOUBLE_COVER:
                walk, internal = walk_to(slope), slope
            else:
                if slope in (ONE, MINUS_ONE):
                    continue
                walk, internal = walk_to(slope, minimum_length=1), reduce(2 * slope.p, slope.q)
        except ValueError:
            continue
        plans.append(TorusPlan(kind, internal, walk, frame, lattice, twisted, twist_sign, diagonal))
    plans.sort(key=lambda p: (p.walk.length, _frame_key(p.frame)))
    return plans


def build_double_cover(m: Slope, diagonal: DiagonalChoice = DiagonalChoice.AUTO) -> Triangulation:
    """Double cover of the layered solid torus of m = l/k, l odd; 2(N-1) tetrahedra."""
    if m.p % 2 == 0:
        raise ParityError(f"Double cover needs an odd numerator, got {m}.")
    for sign in diagonal.signs():
        plans = plan_internal(m, sign)
        if plans:
            return _single(plans[0])
    raise GluingMismatch(f"No boundary frame for {m} with {diagonal.value} diagonals.")


def build_side_by_side(m: Slope, diagonal: DiagonalChoice = DiagonalChoice.AUTO) -> Triangulation:
    """Side-by-side double layered solid torus for m = 2s/k; 2N+1 tetrahedra."""
    if m.p % 2:
        raise ParityError(f"Side-by-side construction needs an even numerator, got {m}.")
    for sign in diagonal.signs():
        plans = plan_internal(m, sign)
        if plans:
            return _single(plans[0])
    raise GluingMismatch(f"No boundary frame for {m} with {diagonal.value} diagonals.")


# -----------------------
# Assembly
# -----------------------

def _square_base(points: Sequence[Point], lattice: PeriodLattice) -> Tuple[str, Tuple[Point, ...]]:
    x0 = min(p[0] for p in points)
    y0 = min(p[1] for p in points)
    if any(p[0] - x0 > 1 or p[1] - y0 > 1 for p in points):
        raise GluingMismatch(f"boundary triangle {points} does not sit in a unit square")
    if lattice.contains((x0, y0)):
        side, shift = "L", (-x0, -y0)
    else:
        side, shift = "R", (1 - x0, -y0)
    return side, tuple(_add(p, shift) for p in points)


def _reflect(side: str, p: Point) -> Point:
    x, y = p
    return (1 - y, 1 - x) if side == "L" else (y + 1, x - 1)


def _glue_tori(builder: _Builder, faces1: Sequence[BoundaryFace], faces2: Sequence[BoundaryFace],
               lattice1: PeriodLattice, lattice2: PeriodLattice) -> None:
    index: Dict[Tuple[str, FrozenSet[Point]], Tuple[BoundaryFace, Tuple[Point, ...]]] = {}
    for bf in faces2:
        side, base = _square_base(bf.points, lattice2)
        index[(side, frozenset(base))] = (bf, base)
    for bf in faces1:
        side, base = _square_base(bf.points, lattice1)
        image = [_reflect(side, p) for p in base]
        hit = index.pop((side, frozenset(image)), None)
        if hit is None:
            raise GluingMismatch(f"no partner for boundary triangle {base} in the {side} square")
        other, other_base = hit
        perm = [0, 0, 0, 0]
        perm[bf.face] = other.face
        for k, p in enumerate(image):
            perm[bf.vertices[k]] = other.vertices[other_base.index(p)]
        builder.glue(bf.tet, bf.face, other.tet, other.face, tuple(perm))
    if index:
        raise GluingMismatch("boundary triangulations of the two tori do not match")


def _assemble(plan1: TorusPlan, plan2: TorusPlan, variant: LinkVariant) -> Triangulation:
    if plan1.diagonal != plan2.diagonal:
        raise GluingMismatch("both tori must use the same diagonal")
    builder = _Builder()
    faces1 = list(_build_torus(builder, plan1, 0))
    faces2 = list(_build_torus(builder, plan2, 1))
    _glue_tori(builder, faces1, faces2, plan1.lattice, plan2.lattice)
    builder.boundary = []
    metadata = ConstructionMetadata(
        tets=tuple(builder.info),
        tori=(_torus_info(plan1), _torus_info(plan2)),
        fold_faces=frozenset(builder.fold_faces),
        deck=tuple(builder.deck),
        variant=variant,
        diagonal=plan1.diagonal,
    )
    return builder.freeze(metadata)


EXCLUDED_FILLINGS = frozenset({ZERO, ONE, MINUS_ONE, reduce(2, 1), reduce(-2, 1), reduce(1, 0)})


def _plans(m: Slope, sign: int, basis: SlopeBasis, twisted: bool, twist_sign: int) -> List[TorusPlan]:
    if m in (ZERO, ONE, MINUS_ONE) or m.is_infinite():
        raise ExcludedSlope(f"Slope {m} is excluded.")
    if basis is SlopeBasis.INTERNAL:
        plans = plan_internal(m, sign, twisted, twist_sign)
    else:
        plans = plan_filling(m, sign, twisted, twist_sign)
    kept = [p for p in plans if p.filling() not in EXCLUDED_FILLINGS]
    if len(kept) < len(plans):
        logger.info("slope %s: dropped %d frames with an excluded filling", m, len(plans) - len(kept))
    return kept


def assembly_candidates(m1: Slope, m2: Slope, diag: DiagonalChoice = DiagonalChoice.AUTO,
                        link_variant: LinkVariant = LinkVariant.PLAIN,
                        basis: SlopeBasis = SlopeBasis.INTERNAL, twist_sign: int = 1,
                        per_torus: int = 3) -> Iterator[Triangulation]:
    """
    Filled triangulations in preference order: diagonal sign first, then frame choice.

    Frames whose effective filling lies in EXCLUDED_FILLINGS are never used; when no
    frame is left for a slope, ExcludedSlope is raised.
    """
    pairs = []
    starved = []
    for sign in diag.signs():
        plans1 = _plans(m1, sign, basis, link_variant.twisted(0), twist_sign)[:per_torus]
        plans2 = _plans(m2, sign, basis, link_variant.twisted(1), twist_sign)[:per_torus]
        starved.extend(m for m, plans in ((m1, plans1), (m2, plans2)) if not plans)
        pairs.extend(product(plans1, plans2))
    if not pairs:
        raise ExcludedSlope(f"Slope {starved[0]} has no frame avoiding the excluded fillings.")
    produced = False
    for plan1, plan2 in pairs:
        try:
            t = _assemble(plan1, plan2, link_variant)
        except InvalidTriangulation as exc:
            logger.info("skipping frame pair: %s", exc)
            continue
        produced = True
        yield t
    if not produced:
        raise GluingMismatch(f"No compatible boundary frames for ({m1}, {m2}) with {diag.value} diagonals.")


def assemble_filled(m1: Slope, m2: Slope, diag: DiagonalChoice = DiagonalChoice.AUTO,
                    link_variant: LinkVariant = LinkVariant.PLAIN,
                    basis: SlopeBasis = SlopeBasis.INTERNAL, twist_sign: int = 1) -> Triangulation:
    """First filled triangulation for the slope pair."""
    return next(assembly_candidates(m1, m2, diag, link_variant, basis, twist_sign))


# -----------------------
# Text format
# -----------------------

_TET_LINE = re.compile(r"^tet\s+(\d+):\s*nbr\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)\s*;\s*perm\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)\s*$")


def export_text(t: Triangulation) -> str:
    lines = [f"tets {t.tet_count} cusps {t.cusp_count}"]
    for i in range(t.tet_count):
        nbrs = " ".join(str(n) for n in t.neighbors[i])
        perms = " ".join(
            "-1" if t.neighbors[i][f] < 0 else "".join(str(x) for x in t.gluings[i][f]) for f in range(4)
        )
        lines.append(f"tet {i}: nbr {nbrs} ; perm {perms}")
    return "\n".join(lines) + "\n"


def import_text(text: str) -> Triangulation:
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    header = re.match(r"^tets\s+(\d+)\s+cusps\s+(\d+)$", rows[0]) if rows else None
    if header is None:
        raise InvalidTriangulation("missing 'tets N cusps C' header")
    count = int(header.group(1))
    neighbors: List[Tuple[int, ...]] = []
    gluings: List[Tuple[Optional[Perm], ...]] = []
    for expected, line in enumerate(rows[1:]):
        match = _TET_LINE.match(line)
        if match is None or int(match.group(1)) != expected:
            raise InvalidTriangulation(f"malformed tetrahedron line: {line!r}")
        neighbors.append(tuple(int(x) for x in match.groups()[1:5]))
        gluings.append(tuple(None if p == "-1" else tuple(int(c) for c in p) for p in match.groups()[5:9]))
    if len(neighbors) != count:
        raise InvalidTriangulation(f"header announces {count} tetrahedra, found {len(neighbors)}")
    return Triangulation(tuple(neighbors), tuple(gluings))


# -----------------------
# Main Execution
# -----------------------
if __name__ == "__main__":
    for text in ("1/3", "3/7"):
        num, den = (int(v) for v in text.split("/"))
        lst = build_lst(reduce(num, den))
        print(f"LST {text}: {lst.tet_count} tetrahedra, {len(lst.boundary)} boundary faces")
    filled = assemble_filled(reduce(1, 3), reduce(1, 3), DiagonalChoice.POSITIVE)
    report = validate(filled)
    print(f"(1/3, 1/3): {filled.tet_count} tetrahedra, {report.edge_classes} edge classes, ok = {report.ok}")
    print(export_text(filled))


"""
    Summary:
    Combinatorial ideal triangulations of layered solid tori and of Dehn fillings of the Borromean rings.
    Key features:
    - Lattice model of the boundary surface; layering, folding and the side-by-side core tetrahedron.
    - Deterministic frame search carrying each solid torus into the square picture of its cusp.
    - Assembly by the two square reflections, validation, and a plain-text export format.
    Core flow:
    - walk_to -> TorusPlan -> _build_torus (layers + fold or core) -> _glue_tori -> validate
    Dependencies:
    - algorithms.farey, utils.errors
"""
