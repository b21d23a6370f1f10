# Cusp Developer -> cusp cross-section, hexagons and horoballs
"""
Inputs:
    - Triangulation + ShapeAssignment of a filled Borromean manifold

Outputs:
    - CuspDiagram: every cusp triangle developed into C, lattice translations
    - Hexagon: the four regions cut out of the cusp by the faces shared by the
      two solid tori, normalized to vertices -1, z, z', 1, -z, -z'
    - Horoball / MobiusTransform helpers for the upper half-space model

Description:
    With the cusp at infinity and the reference horoball at height 1, each cusp
    triangle (tet, v) is a Euclidean triangle whose corner angles are the shapes
    of the edges at v. Developing along a spanning tree of the cusp triangulation
    gives one fundamental domain; the remaining adjacencies give the translations.
"""

import logging
from dataclasses import dataclass, field, replace
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from algorithms.geometry import CuspLink, ShapeAssignment, ccw_corners
from algorithms.triangulate import Triangulation
from utils.errors import AsymmetricHexagon, DegenerateShape, HexagonExtractionFailed

logger = logging.getLogger(__name__)

CuspTriangle = Tuple[int, int]
SideId = Tuple[CuspTriangle, int]


# -----------------------
# Horoballs and Mobius transformations
# -----------------------

@dataclass(frozen=True)
class Horoball:
    center: Optional[complex]
    diameter: float
    image_at_infinity: bool = False

    def __post_init__(self):
        if not self.diameter > 0:
            raise ValueError(f"Horoball diameter must be positive, got {self.diameter}.")

    @property
    def at_infinity(self) -> bool:
        return self.center is None


REFERENCE_HOROBALL = Horoball(None, 1.0)


@dataclass(frozen=True)
class MobiusTransform:
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def __post_init__(self):
        if self.det == 0:
            raise ValueError("Mobius transformation must have non-zero determinant.")

    @property
    def det(self) -> complex:
        return self.alpha * self.delta - self.beta * self.gamma

    @property
    def trace(self) -> complex:
        return self.alpha + self.delta

    def __call__(self, u: Optional[complex]) -> Optional[complex]:
        if u is None:
            return None if self.gamma == 0 else self.alpha / self.gamma
        denominator = self.gamma * u + self.delta
        if denominator == 0:
            return None
        return (self.alpha * u + self.beta) / denominator

    def compose(self, other: "MobiusTransform") -> "MobiusTransform":
        """self after other."""
        return MobiusTransform(
            self.alpha * other.alpha + self.beta * other.gamma,
            self.alpha * other.beta + self.beta * other.delta,
            self.gamma * other.alpha + self.delta * other.gamma,
            self.gamma * other.beta + self.delta * other.delta,
        )

    def inverse(self) -> "MobiusTransform":
        return MobiusTransform(self.delta, -self.beta, -self.gamma, self.alpha)


def _standard_form(h: Horoball) -> MobiusTransform:
    # sends the height-one horoball about infinity onto h
    if h.at_infinity:
        return MobiusTransform(h.diameter, 0, 0, 1)
    return MobiusTransform(h.center, -h.diameter, 1, 0)


def mobius_image_horoball(g: MobiusTransform, h: Horoball) -> Horoball:
    """Image of h under g; a finite centre sent to infinity comes back in height form."""
    m = g.compose(_standard_form(h))
    scale = max(abs(m.alpha), abs(m.beta), abs(m.gamma), abs(m.delta))
    if abs(m.gamma) <= 1e-14 * scale:
        return Horoball(None, float(abs(m.alpha / m.delta)), image_at_infinity=not h.at_infinity)
    return Horoball(complex(m.alpha / m.gamma), float(abs(m.det) / abs(m.gamma) ** 2))


# -----------------------
# Cusp development
# -----------------------

@dataclass(frozen=True)
class CuspDiagram:
    triangulation: Triangulation
    shapes: ShapeAssignment
    positions: Dict[CuspTriangle, Dict[int, complex]]
    t_mu: complex
    t_lambda: complex

    def triangle(self, tri: CuspTriangle) -> Tuple[complex, complex, complex]:
        return tuple(self.positions[tri][w] for w in ccw_corners(tri[1]))

    def area(self) -> float:
        total = 0.0
        for tri in self.positions:
            p, q, r = self.triangle(tri)
            total += 0.5 * ((q - p).conjugate() * (r - p)).imag
        return total

    def lattice_area(self) -> float:
        return abs((self.t_mu.conjugate() * self.t_lambda).imag)

    def corner_diameter(self, tet: int, v: int, w: int,
                        placed: Optional[Dict[int, complex]] = None) -> float:
        """Diameter of the horoball at corner w when vertex v of tet is at infinity."""
        y = min(x for x in range(4) if x not in (v, w))
        at_v = placed if placed is not None else self.positions[(tet, v)]
        at_w = self.positions[(tet, w)]
        return abs(at_w[y] - at_w[v]) * abs(at_v[y] - at_v[w])


def place_triangle(shapes: ShapeAssignment, tri: CuspTriangle, known: Dict[int, complex]) -> Dict[int, complex]:
    """Complete two known corners of a cusp triangle using the corner shapes."""
    tet, v = tri
    order = ccw_corners(v)
    placed = dict(known)
    for i, x in enumerate(order):
        if x in placed:
            continue
        y, y_next = order[(i + 1) % 3], order[(i + 2) % 3]
        placed[x] = placed[y] + shapes.corner_shape(tet, v, y) * (placed[y_next] - placed[y])
    return placed


def _cross(a: complex, b: complex) -> float:
    return (a.conjugate() * b).imag


def _hermite_basis(vectors: Sequence[Tuple[int, int]]) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    pivot: Optional[Tuple[int, int]] = None
    d = 0
    for v in vectors:
        if v == (0, 0):
            continue
        if pivot is None:
            pivot = v
            continue
        a, b = pivot, v
        while b[0] != 0:
            q = a[0] // b[0]
            a, b = b, (a[0] - q * b[0], a[1] - q * b[1])
        pivot = a
        d = gcd(d, abs(b[1]))
    if pivot is None or pivot[0] == 0 or d == 0:
        raise DegenerateShape("cusp translations do not span a lattice")
    if pivot[0] < 0:
        pivot = (-pivot[0], -pivot[1])
    return (pivot[0], pivot[1] % d), (0, d)


def _gauss_reduce(b1: complex, b2: complex) -> Tuple[complex, complex]:
    if abs(b1) > abs(b2):
        b1, b2 = b2, b1
    while True:
        mu = round((b2 * b1.conjugate()).real / abs(b1) ** 2)
        b2 = b2 - mu * b1
        if abs(b2) >= abs(b1) * (1 - 1e-12):
            break
        b1, b2 = b2, b1
    if _cross(b1, b2) < 0:
        b2 = -b2
    return b1, b2


def lattice_basis(translations: Sequence[complex], area: float) -> Tuple[complex, complex]:
    """Reduced basis of the lattice generated by the translations; its covolume is area."""
    eps = 1e-9 * np.sqrt(area)
    vs = [v for v in translations if abs(v) > eps]
    best = None
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            c = abs(_cross(vs[i], vs[j]))
            if c > 1e-6 * area and (best is None or c < best[0]):
                best = (c, vs[i], vs[j])
    if best is None:
        raise DegenerateShape("cusp translations are collinear")
    c, b1, b2 = best
    k = max(1, int(round(c / area)))
    frame = np.array([[b1.real, b2.real], [b1.imag, b2.imag]])
    coordinates = []
    for v in vs:
        x = np.linalg.solve(frame, [v.real, v.imag]) * k
        r = np.round(x)
        if np.max(np.abs(x - r)) > 1e-4:
            raise DegenerateShape("cusp translations are not commensurable")
        coordinates.append((int(r[0]), int(r[1])))
    (g, h), (_, d) = _hermite_basis(coordinates)
    return _gauss_reduce((g * b1 + h * b2) / k, d * b2 / k)


def develop_cusp(t: Triangulation, s: ShapeAssignment) -> CuspDiagram:
    if not s.is_geometric():
        raise DegenerateShape("cusp development needs positively oriented shapes")
    link = CuspLink(t)
    root = (0, 0)
    a, b, _ = ccw_corners(0)
    positions = {root: place_triangle(s, root, {a: 0j, b: 1 + 0j})}
    queue = [root]
    translations: List[complex] = []
    head = 0
    while head < len(queue):
        tri = queue[head]
        head += 1
        tet, v = tri
        for side in (f for f in range(4) if f != v):
            hop = link.across(tri, side)
            if hop is None:
                continue
            other, _ = hop
            perm = t.gluings[tet][side]
            w1, w2 = link.shared_corners(tri, side)
            p1, p2 = positions[tri][w1], positions[tri][w2]
            if other not in positions:
                positions[other] = place_triangle(s, other, {perm[w1]: p1, perm[w2]: p2})
                queue.append(other)
                continue
            q1, q2 = positions[other][perm[w1]], positions[other][perm[w2]]
            if abs((p2 - p1) - (q2 - q1)) > 1e-6 * abs(p2 - p1):
                raise DegenerateShape("cusp holonomy is not a translation; the structure is incomplete")
            translations.append(p1 - q1)

    area = 0.0
    for tri, corners in positions.items():
        p, q, r = (corners[w] for w in ccw_corners(tri[1]))
        signed = 0.5 * _cross(q - p, r - p)
        if signed <= 0:
            raise DegenerateShape(f"cusp triangle {tri} is not counterclockwise")
        area += signed
    t_mu, t_lambda = lattice_basis(translations, area)
    logger.debug("cusp developed: %d triangles, area %.6g", len(positions), area)
    return CuspDiagram(t, s, positions, t_mu, t_lambda)


# -----------------------
# Hexagons
# -----------------------

@dataclass(frozen=True)
class HexagonSide:
    start: complex
    end: complex
    side: SideId
    # apexes of the cusp triangles inside and outside the region across this side
    inner: complex = 0j
    outer: complex = 0j


@dataclass(frozen=True)
class Hexagon:
    zeta: complex
    zeta_prime: complex
    A: float
    B: float
    C: float
    convex: bool
    symmetry_residual: float
    degenerate: bool
    raw: Tuple[complex, ...] = ()
    anchor: int = 0
    torus: Optional[int] = None
    sides: Tuple[HexagonSide, ...] = field(default=(), repr=False)

    @property
    def vertices(self) -> Tuple[complex, ...]:
        return (-1 + 0j, self.zeta, self.zeta_prime, 1 + 0j, -self.zeta, -self.zeta_prime)

    @property
    def a_vec(self) -> complex:
        return self.zeta + 1

    @property
    def b_vec(self) -> complex:
        return self.zeta_prime - self.zeta

    @property
    def c_vec(self) -> complex:
        return 1 - self.zeta_prime

    @property
    def a(self) -> float:
        return abs(self.a_vec)

    @property
    def b(self) -> float:
        return abs(self.b_vec)

    @property
    def c(self) -> float:
        return abs(self.c_vec)

    def angles_in_range(self) -> bool:
        """0 < B < pi and B - pi < A, C < B."""
        return 0 < self.B < np.pi and self.B - np.pi < self.A < self.B and self.B - np.pi < self.C < self.B


def _polygon_convex(points: Sequence[complex]) -> bool:
    n = len(points)
    turns = [_cross(points[(i + 1) % n] - points[i], points[(i + 2) % n] - points[(i + 1) % n]) for i in range(n)]
    scale = max(abs(p - q) for p in points for q in points) ** 2
    return all(x >= -1e-12 * scale for x in turns) or all(x <= 1e-12 * scale for x in turns)


def normalize_hexagon(vertices: Sequence[complex], anchor: int = 0, strict: bool = True) -> Hexagon:
    """
    Place vertex `anchor` at -1 and its opposite at 1.

    The next two vertices become z and z'. B is the smallest non-negative
    representative of arg(z' - z) and A, C are taken in (B - pi, B + pi].
    The labeling is the standard one exactly when the triangles (-1, z, z')
    and (1, z', z) are counterclockwise, i.e. when angles_in_range() holds:
    0 < B < pi and B - pi < A, C < B.

    Args:
        vertices: six hexagon vertices in boundary order
        anchor: index of the vertex sent to -1
        strict: raise AsymmetricHexagon when the input is not centrally symmetric

    Returns:
        Hexagon
    """
    pts = np.asarray(vertices, dtype=complex)
    if pts.shape != (6,):
        raise ValueError("A hexagon needs exactly six vertices.")
    center = pts.mean()
    span = float(np.max(np.abs(pts - center)))
    residual = max(abs((pts[i] - center) + (pts[(i + 3) % 6] - center)) for i in range(6)) / span
    if strict and residual > 1e-6:
        raise AsymmetricHexagon(f"Hexagon is not centrally symmetric (residual {residual:.3e}).")
    multiplier = -1 / (pts[anchor] - center)
    zeta = complex((pts[(anchor + 1) % 6] - center) * multiplier)
    zeta_prime = complex((pts[(anchor + 2) % 6] - center) * multiplier)

    a_vec, b_vec, c_vec = zeta + 1, zeta_prime - zeta, 1 - zeta_prime
    big_b = float(np.angle(b_vec) % (2 * np.pi))

    def representative(vec: complex) -> float:
        angle = big_b + np.pi - (big_b + np.pi - float(np.angle(vec))) % (2 * np.pi)
        return 0.0 if abs(angle) < 1e-12 else angle

    big_a, big_c = representative(a_vec), representative(c_vec)
    return Hexagon(
        zeta=zeta,
        zeta_prime=zeta_prime,
        A=big_a,
        B=big_b,
        C=big_c,
        convex=_polygon_convex(list(pts)),
        symmetry_residual=float(residual),
        degenerate=abs(big_a) < 1e-9 or abs(big_c) < 1e-9,
        raw=tuple(complex(p) for p in pts),
        anchor=anchor,
    )


def horoball_diameters(h: Hexagon) -> List[Horoball]:
    """Horoballs at -1, z, z', 1, -z, -z' seen from the reference horoball."""
    ac, ab, bc = h.a * h.c, h.a * h.b, h.b * h.c
    return [Horoball(center, d) for center, d in zip(h.vertices, (ac, ab, bc, ac, ab, bc))]


def face_pairing(h: Hexagon) -> MobiusTransform:
    """u -> 1 - a c / (u + 1), sending the face (-1, z, inf) to (z', 1, inf)."""
    w = h.a_vec * h.c_vec
    return MobiusTransform(1, 1 - w, 1, 1)


def _regions(d: CuspDiagram) -> List[List[CuspTriangle]]:
    t = d.triangulation
    torus_of = [info.torus for info in t.metadata.tets]
    parent = {tri: tri for tri in d.positions}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    link = CuspLink(t)
    for tri in d.positions:
        for side in (f for f in range(4) if f != tri[1]):
            hop = link.across(tri, side)
            if hop is not None and torus_of[tri[0]] == torus_of[hop[0][0]]:
                parent[find(tri)] = find(hop[0])
    groups: Dict[CuspTriangle, List[CuspTriangle]] = {}
    for tri in sorted(d.positions):
        groups.setdefault(find(tri), []).append(tri)
    return list(groups.values())


def _region_loop(d: CuspDiagram, region: List[CuspTriangle]) -> List[HexagonSide]:
    t = d.triangulation
    torus_of = [info.torus for info in t.metadata.tets]
    link = CuspLink(t)
    members = set(region)
    root = region[0]
    local = {root: dict(d.positions[root])}
    queue = [root]
    head = 0
    sides: List[HexagonSide] = []
    while head < len(queue):
        tri = queue[head]
        head += 1
        tet, v = tri
        order = ccw_corners(v)
        for i, side in enumerate(order):
            hop = link.across(tri, side)
            x, y = order[(i + 1) % 3], order[(i + 2) % 3]
            if hop is None:
                raise HexagonExtractionFailed(f"cusp triangle {tri} has an unglued side")
            other = hop[0]
            perm = t.gluings[tet][side]
            if torus_of[other[0]] != torus_of[tet]:
                across = place_triangle(d.shapes, other, {perm[x]: local[tri][x], perm[y]: local[tri][y]})
                sides.append(HexagonSide(local[tri][x], local[tri][y], (tri, side),
                                         inner=local[tri][side], outer=across[perm[side]]))
                continue
            if other in members and other not in local:
                local[other] = place_triangle(d.shapes, other, {perm[x]: local[tri][x], perm[y]: local[tri][y]})
                queue.append(other)
    if len(sides) != 6:
        raise HexagonExtractionFailed(f"region of {len(region)} triangles has {len(sides)} boundary sides")
    tolerance = 1e-7 * np.sqrt(d.area())
    loop = [sides[0]]
    remaining = sides[1:]
    while remaining:
        nxt = [s for s in remaining if abs(s.start - loop[-1].end) < tolerance]
        if len(nxt) != 1:
            raise HexagonExtractionFailed("region boundary is not a single hexagonal loop")
        loop.append(nxt[0])
        remaining.remove(nxt[0])
    if abs(loop[-1].end - loop[0].start) > tolerance:
        raise HexagonExtractionFailed("region boundary does not close up")
    if sum(_cross(s.start, s.end) for s in loop) <= 0:
        raise HexagonExtractionFailed("region boundary is not counterclockwise")
    return loop


def _side_labeling(loop: Sequence[HexagonSide], i: int, convex: bool) -> Tuple[complex, complex, complex, complex, bool]:
    # -1 is the apex on the convex side of the face, 1 the apex across it, and
    # z -> z' runs along the face with -1 on its left
    s = loop[i]
    tolerance = 1e-7 * max(abs(t.end - t.start) for t in loop)
    if convex:
        minus_one, one, zeta, zeta_p = s.inner, s.outer, s.start, s.end
        ear = abs(loop[i - 1].start - minus_one) < tolerance
    else:
        minus_one, one, zeta, zeta_p = s.outer, s.inner, s.end, s.start
        ear = abs(loop[(i + 1) % len(loop)].end - minus_one) < tolerance
    return minus_one, zeta, zeta_p, one, ear


def label_region(loop: Sequence[HexagonSide]) -> Hexagon:
    """
    Standard labeling of a hexagonal region from one of its faces.

    The face z z' is shared with the neighbouring region. The apex on the convex
    side goes to -1 and the apex on the other side to 1, so (-1, z, z') and
    (1, z', z) are the two cusp triangles meeting along the face. Faces where
    -1 -> z is also a side of the region are preferred.
    """
    raw = [s.start for s in loop]
    shape = normalize_hexagon(raw, strict=False)
    chosen = None
    for i in range(len(loop)):
        minus_one, zeta, zeta_p, one, ear = _side_labeling(loop, i, shape.convex)
        # similarity sending minus_one -> -1 and one -> 1
        z, zp = ((2 * w - one - minus_one) / (one - minus_one) for w in (zeta, zeta_p))
        candidate = normalize_hexagon([-1, z, zp, 1, -z, -zp])
        if not candidate.angles_in_range():
            raise HexagonExtractionFailed(
                f"face {loop[i].side} gives B = {candidate.B:.6g}, A = {candidate.A:.6g}, C = {candidate.C:.6g}"
            )
        if chosen is None or (ear and not chosen[1]):
            chosen = (i, ear, candidate)
    i, _, labeled = chosen
    return replace(labeled, convex=shape.convex, symmetry_residual=shape.symmetry_residual,
                   raw=tuple(raw), anchor=i)


def extract_hexagons(d: CuspDiagram) -> List[Hexagon]:
    t = d.triangulation
    if t.metadata is None or len(t.metadata.tori) != 2 or t.unglued_faces():
        raise HexagonExtractionFailed("hexagons exist only in the cusp of a filled manifold")
    regions = _regions(d)
    if len(regions) != 4:
        raise HexagonExtractionFailed(f"expected four hexagonal regions, found {len(regions)}")
    hexagons = []
    for region in regions:
        loop = _region_loop(d, region)
        torus = t.metadata.tets[region[0][0]].torus
        hexagons.append(replace(label_region(loop), torus=torus, sides=tuple(loop)))
    logger.debug("hexagons: %s", [("convex" if h.convex else "non-convex") for h in hexagons])
    return hexagons


# -----------------------
# Main Execution
# -----------------------
if __name__ == "__main__":
    hexagon = normalize_hexagon([np.exp(1j * np.pi * k / 3) for k in (3, 4, 5, 0, 1, 2)])
    print(f"regular hexagon: a = {hexagon.a:.6f}, b = {hexagon.b:.6f}, c = {hexagon.c:.6f}")
    print(f"diameters: {[round(h.diameter, 6) for h in horoball_diameters(hexagon)]}")
    image = mobius_image_horoball(face_pairing(hexagon), REFERENCE_HOROBALL)
    print(f"face pairing sends the reference horoball to centre {image.center}, diameter {image.diameter:.6f}")


"""
    Summary:
    Developing the cusp of a filled Borromean manifold and reading off its hexagons and horoballs.
    Key features:
    - Breadth-first development of cusp triangles with lattice-translation recovery.
    - Four hexagonal regions bounded by the faces shared by the two solid tori.
    - Standard labeling of each region from a face shared with a neighbour: -1 on the convex side, 0 < B < pi.
    - Horoball diameters, face pairings and Mobius images of horoballs.
    Core flow:
    - develop_cusp -> extract_hexagons -> label_region (one face per region) -> horoball_diameters
    Dependencies:
    - numpy
"""
