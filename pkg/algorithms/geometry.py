# Hyperbolic Structure -> gluing equations, Newton solve and volume
"""
Inputs:
    - Triangulation (closed, oriented, one cusp)

Outputs:
    - GluingEquations: one log-equation per edge class, two completeness
      equations per cusp
    - ShapeAssignment: one complex shape per tetrahedron
    - volume of the solved structure

Description:
    The shape z of a tetrahedron sits on edges 01 and 23, z' = 1/(1-z) on
    02 and 13, z'' = 1 - 1/z on 03 and 12. Edge equations ask the logarithms
    around every edge class to sum to 2*pi*i. Completeness asks the holonomy
    of two independent peripheral curves to be a translation, i.e. the product
    of the corner shapes cut off along each curve equals 1.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from algorithms.triangulate import Triangulation, edge_index, perm_is_odd, validate
from utils.errors import DegenerateShape, InvalidTriangulation, NoAngleStructure, NoConvergence, SolverError
from utils.settings import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_RESTARTS,
    DEFAULT_SOLVER_TOL,
    DEGENERATE_IMAG,
)

logger = logging.getLogger(__name__)

# Shape slot (0: z, 1: z', 2: z'') for each edge index 01, 02, 03, 12, 13, 23.
SHAPE_SLOT: Tuple[int, ...] = (0, 1, 2, 2, 1, 0)

CuspTriangle = Tuple[int, int]
Crossing = Tuple[CuspTriangle, int, CuspTriangle, int]


def shape_slot(a: int, b: int) -> int:
    return SHAPE_SLOT[edge_index(a, b)]


# -----------------------
# Shapes
# -----------------------

@dataclass(frozen=True)
class ShapeAssignment:
    z: Tuple[complex, ...]
    residuals: Tuple[float, ...] = ()
    restart: int = 0
    seed: Optional[int] = None

    @classmethod
    def regular(cls, count: int) -> "ShapeAssignment":
        return cls(tuple(complex(np.exp(1j * np.pi / 3)) for _ in range(count)))

    @property
    def count(self) -> int:
        return len(self.z)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.z, dtype=complex)

    def z_prime(self) -> np.ndarray:
        return 1 / (1 - self.as_array())

    def z_double_prime(self) -> np.ndarray:
        return 1 - 1 / self.as_array()

    def slot(self, tet: int, slot: int) -> complex:
        z = self.z[tet]
        return (z, 1 / (1 - z), 1 - 1 / z)[slot]

    def corner_shape(self, tet: int, v: int, w: int) -> complex:
        """Shape of edge {v, w} of tet, seen at the corner w of the cusp triangle at v."""
        return self.slot(tet, shape_slot(v, w))

    def is_geometric(self, threshold: float = DEGENERATE_IMAG) -> bool:
        return bool(np.all(self.as_array().imag > threshold))


# -----------------------
# Cusp cross-section combinatorics
# -----------------------

def ccw_corners(v: int) -> Tuple[int, int, int]:
    """Corners of the cusp triangle at vertex v in counterclockwise order."""
    a, b, c = (w for w in range(4) if w != v)
    return (a, b, c) if not perm_is_odd((v, a, b, c)) else (a, c, b)


def _reverse(crossing: Crossing) -> Crossing:
    a, a_side, b, b_side = crossing
    return (b, b_side, a, a_side)


def without_backtracks(crossings: Sequence[Crossing]) -> List[Crossing]:
    """Cyclically reduced path: no crossing is immediately undone by the next one."""
    stack: List[Crossing] = []
    for crossing in crossings:
        if stack and stack[-1] == _reverse(crossing):
            stack.pop()
        else:
            stack.append(crossing)
    start, end = 0, len(stack)
    while end - start >= 2 and stack[end - 1] == _reverse(stack[start]):
        start += 1
        end -= 1
    return stack[start:end]


class CuspLink:
    """One triangle (tet, v) per ideal vertex of every tetrahedron; side f lies in face f."""

    def __init__(self, t: Triangulation):
        self.triangulation = t

    def across(self, tri: CuspTriangle, side: int) -> Optional[Tuple[CuspTriangle, int]]:
        tet, v = tri
        other = self.triangulation.neighbors[tet][side]
        if other < 0:
            return None
        perm = self.triangulation.gluings[tet][side]
        return (other, perm[v]), perm[side]

    def shared_corners(self, tri: CuspTriangle, side: int) -> Tuple[int, int]:
        tet, v = tri
        a, b = (w for w in range(4) if w not in (v, side))
        return a, b

    def spanning_tree(self, root: CuspTriangle) -> Tuple[List[CuspTriangle], Dict[CuspTriangle, Tuple[CuspTriangle, int, int]]]:
        order = [root]
        parent: Dict[CuspTriangle, Tuple[CuspTriangle, int, int]] = {}
        seen = {root}
        head = 0
        while head < len(order):
            tri = order[head]
            head += 1
            for side in (f for f in range(4) if f != tri[1]):
                hop = self.across(tri, side)
                if hop is None or hop[0] in seen:
                    continue
                seen.add(hop[0])
                parent[hop[0]] = (tri, side, hop[1])
                order.append(hop[0])
        return order, parent

    def fundamental_cycles(self, root: CuspTriangle) -> List[List[Crossing]]:
        order, parent = self.spanning_tree(root)
        cycles = []
        for tri in order:
            for side in (f for f in range(4) if f != tri[1]):
                hop = self.across(tri, side)
                if hop is None:
                    continue
                other, other_side = hop
                if parent.get(other) == (tri, side, other_side) or parent.get(tri) == (other, other_side, side):
                    continue
                if (other, other_side) < (tri, side):
                    continue
                down = self._path_down(parent, tri)
                up = [_reverse(c) for c in reversed(self._path_down(parent, other))]
                cycles.append(without_backtracks(down + [(tri, side, other, other_side)] + up))
        return cycles

    @staticmethod
    def _path_down(parent, tri: CuspTriangle) -> List[Crossing]:
        steps = []
        while tri in parent:
            p, p_side, c_side = parent[tri]
            steps.append((p, p_side, tri, c_side))
            tri = p
        return list(reversed(steps))

    def cycle_row(self, crossings: Sequence[Crossing]) -> np.ndarray:
        """
        Signed corner counts cut off along a closed path: +1 on the left, -1 on the right.

        The product of the corner shapes with these exponents is the derivative of the
        holonomy only for a path without U-turns, so backtracks are cancelled first.
        """
        row = np.zeros(3 * self.triangulation.tet_count, dtype=int)
        crossings = without_backtracks(crossings)
        n = len(crossings)
        for i in range(n):
            entering, leaving = crossings[i], crossings[(i + 1) % n]
            tet, v = entering[2]
            f_in, f_out = entering[3], leaving[1]
            (w,) = [x for x in range(4) if x not in (v, f_in, f_out)]
            sign = -1 if perm_is_odd((v, w, f_out, f_in)) else 1
            row[3 * tet + shape_slot(v, w)] += sign
        return row


# -----------------------
# Gluing equations
# -----------------------

@dataclass(frozen=True)
class GluingEquations:
    edge_rows: np.ndarray
    cusp_rows: np.ndarray
    tet_count: int

    @property
    def edge_count(self) -> int:
        return self.edge_rows.shape[0]

    def edge_terms(self, i: int) -> List[Tuple[int, int, int]]:
        """(tet, shape slot, exponent) triples of edge equation i."""
        row = self.edge_rows[i]
        return [(j // 3, j % 3, int(row[j])) for j in np.flatnonzero(row)]


def tet_rows(n: int) -> np.ndarray:
    """One (1, 1, 1) row per tetrahedron: the three angles of a tetrahedron sum to pi."""
    return np.kron(np.eye(n, dtype=int), np.ones(3, dtype=int))


def derive_equations(t: Triangulation) -> GluingEquations:
    report = validate(t)
    if not report.ok:
        raise InvalidTriangulation("; ".join(report.violations[:5]))
    if t.unglued_faces():
        raise InvalidTriangulation(f"{len(t.unglued_faces())} faces are unglued")
    n = t.tet_count
    edge_rows = np.zeros((len(t.edge_classes), 3 * n), dtype=int)
    for i, ec in enumerate(t.edge_classes):
        for tet, e in ec.members:
            edge_rows[i, 3 * tet + SHAPE_SLOT[e]] += 1

    link = CuspLink(t)
    # log z + log z' + log z'' = i pi, so a loop around cusp vertices differs from
    # a sum of edge rows only by whole-tetrahedron rows
    base = [edge_rows, tet_rows(n)]
    chosen: List[np.ndarray] = []
    for vertex_class in t.vertex_classes:
        picked = 0
        rank = np.linalg.matrix_rank(np.vstack(base + chosen).astype(float))
        for cycle in link.fundamental_cycles(vertex_class[0]):
            row = link.cycle_row(cycle)
            trial = np.linalg.matrix_rank(np.vstack(base + chosen + [row]).astype(float))
            if trial > rank:
                chosen.append(row)
                rank = trial
                picked += 1
                if picked == 2:
                    break
        if picked != 2:
            raise InvalidTriangulation(f"cusp at {vertex_class[0]} does not carry two independent peripheral curves")
    cusp_rows = np.vstack(chosen) if chosen else np.zeros((0, 3 * n), dtype=int)
    logger.debug("%d edge equations, %d completeness equations", edge_rows.shape[0], cusp_rows.shape[0])
    return GluingEquations(edge_rows, cusp_rows, n)


# -----------------------
# Newton iteration in log coordinates
# -----------------------

def _logs(u: np.ndarray) -> np.ndarray:
    l1 = np.log(1 - np.exp(u))
    logs = np.empty(3 * u.size, dtype=complex)
    logs[0::3] = u
    logs[1::3] = -l1
    logs[2::3] = l1 - u + 1j * np.pi
    return logs


def residuals(eqs: GluingEquations, u: np.ndarray) -> np.ndarray:
    """Edge residuals (log form) followed by completeness residuals exp(S) - 1."""
    logs = _logs(np.asarray(u, dtype=complex))
    edge = eqs.edge_rows @ logs - 2j * np.pi
    cusp = np.exp(eqs.cusp_rows @ logs) - 1
    return np.concatenate([edge, cusp])


def jacobian(eqs: GluingEquations, u: np.ndarray) -> np.ndarray:
    """Derivative of residuals with respect to u = log z."""
    u = np.asarray(u, dtype=complex)
    z = np.exp(u)
    n = u.size
    idx = np.arange(n)
    d = np.zeros((3 * n, n), dtype=complex)
    d[3 * idx, idx] = 1
    d[3 * idx + 1, idx] = z / (1 - z)
    d[3 * idx + 2, idx] = -1 / (1 - z)
    j_edge = eqs.edge_rows @ d
    holonomy = np.exp(eqs.cusp_rows @ _logs(u))
    j_cusp = holonomy[:, None] * (eqs.cusp_rows @ d)
    return np.vstack([j_edge, j_cusp])


def _inside(u: np.ndarray) -> bool:
    """Every shape in the open upper half plane, with log z on its principal branch."""
    return bool(np.all(np.isfinite(u)) and np.all(u.imag > 0) and np.all(u.imag < np.pi))


def solve(eqs: GluingEquations, init: ShapeAssignment, tol: float = DEFAULT_SOLVER_TOL,
          max_iterations: int = DEFAULT_MAX_ITERATIONS) -> ShapeAssignment:
    """
    Gauss-Newton on the gluing equations in u = log z.

    Steps are halved until the squared residual norm drops and every shape stays in
    the upper half plane, where the logarithms are continuous. The recorded history
    is the max-norm residual of each iterate.
    """
    if tol <= 0:
        raise ValueError("Tolerance must be positive.")
    z0 = init.as_array()
    if z0.shape != (eqs.tet_count,):
        raise ValueError(f"Expected {eqs.tet_count} shapes, got {z0.size}.")
    if np.any(z0.imag <= 0):
        raise ValueError("Initial shapes must lie in the upper half plane.")

    u = np.log(z0)
    r = residuals(eqs, u)
    merit = float(np.vdot(r, r).real)
    res = float(np.max(np.abs(r)))
    history: List[float] = []
    for iteration in range(max_iterations + 1):
        history.append(res)
        logger.debug("newton %d: residual %.3e", iteration, res)
        if res < tol:
            break
        if iteration == max_iterations:
            raise NoConvergence(f"No convergence after {max_iterations} iterations (residual {res:.3e}).")
        step = np.linalg.lstsq(jacobian(eqs, u), -r, rcond=None)[0]
        scale = 1.0
        while True:
            candidate = u + scale * step
            if _inside(candidate):
                with np.errstate(all="ignore"):
                    r_new = residuals(eqs, candidate)
                merit_new = float(np.vdot(r_new, r_new).real)
                if np.all(np.isfinite(r_new)) and merit_new < merit:
                    break
            scale /= 2
            if scale < 1e-6:
                raise NoConvergence(f"Newton step stalled at residual {res:.3e}.")
        u, r, merit = candidate, r_new, merit_new
        res = float(np.max(np.abs(r)))

    z = np.exp(u)
    if np.any(z.imag <= DEGENERATE_IMAG):
        bad = int(np.argmin(z.imag))
        raise DegenerateShape(f"Tetrahedron {bad} has shape {z[bad]:.6g}, not positively oriented.")
    return ShapeAssignment(tuple(complex(x) for x in z), tuple(history))


# -----------------------
# Angle structures
# -----------------------

def _angle_system(eqs: GluingEquations) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Angles nearest the regular ones solving the linear angle equations, and the free directions."""
    n = eqs.tet_count
    a = np.vstack([eqs.edge_rows, tet_rows(n)]).astype(float)
    b = np.concatenate([np.full(eqs.edge_count, 2 * np.pi), np.full(n, np.pi)])
    centre = np.full(3 * n, np.pi / 3)
    base = centre + np.linalg.lstsq(a, b - a @ centre, rcond=None)[0]
    if np.max(np.abs(a @ base - b)) > 1e-8:
        raise NoAngleStructure("The angle equations have no solution.")
    _, sv, vh = np.linalg.svd(a)
    rank = int(np.sum(sv > sv[0] * 1e-10))
    return base, vh[rank:].T, a


def angle_structure(eqs: GluingEquations, max_iterations: int = 50) -> np.ndarray:
    """
    Strictly positive angles satisfying the edge and tetrahedron sums.

    A log-barrier path pushes up the smallest angle t: maximise t + mu * sum log(angle - t)
    for decreasing mu. The triangulation carries an angle structure exactly when t ends positive.
    """
    base, free, _ = _angle_system(eqs)
    k = free.shape[1]
    m = np.hstack([free, -np.ones((base.size, 1))])
    y = np.zeros(k + 1)
    y[k] = float(np.min(base)) - 1.0

    def objective(point: np.ndarray, mu: float) -> float:
        return point[k] + mu * float(np.sum(np.log(base + m @ point)))

    for mu in (1.0, 1e-1, 1e-2, 1e-3, 1e-4):
        for _ in range(max_iterations):
            slack = base + m @ y
            grad = mu * (m.T @ (1 / slack))
            grad[k] += 1.0
            hess = mu * (m.T @ (m / slack[:, None] ** 2))
            step = np.linalg.solve(hess, grad)
            if float(grad @ step) < 1e-12:
                break
            scale, current = 1.0, objective(y, mu)
            while np.any(base + m @ (y + scale * step) <= 0) or objective(y + scale * step, mu) < current:
                scale /= 2
                if scale < 1e-12:
                    scale = 0.0
                    break
            y = y + scale * step
    angles = base + free @ y[:k]
    if y[k] <= 0 or np.min(angles) <= 0:
        raise NoAngleStructure(f"Largest smallest angle is {y[k]:.3e}; the triangulation has no angle structure.")
    logger.debug("angle structure with smallest angle %.4f", float(np.min(angles)))
    return angles


def angle_volume(angles: np.ndarray) -> float:
    return float(sum(lobachevsky(float(a)) for a in angles))


def maximize_volume(eqs: GluingEquations, angles: np.ndarray, tol: float = 1e-12,
                    max_iterations: int = DEFAULT_MAX_ITERATIONS) -> np.ndarray:
    """
    Newton ascent of the volume over the angle structures, starting from angles.

    The volume is strictly concave there and its critical point is the complete structure.
    """
    base, free, a = _angle_system(eqs)
    alpha = np.asarray(angles, dtype=float)
    if np.max(np.abs(a @ (alpha - base))) > 1e-8 or np.any(alpha <= 0):
        raise ValueError("Starting angles must be a strict angle structure.")
    for iteration in range(max_iterations):
        grad = free.T @ (-np.log(2 * np.sin(alpha)))
        hess = free.T @ (free * (-1 / np.tan(alpha))[:, None])
        step = free @ np.linalg.solve(hess, -grad)
        decrement = float(grad @ (free.T @ step))
        logger.debug("volume %d: %.12f, decrement %.3e", iteration, angle_volume(alpha), decrement)
        if decrement < tol:
            return alpha
        scale, current = 1.0, angle_volume(alpha)
        while True:
            candidate = alpha + scale * step
            if np.all(candidate > 0) and np.all(candidate < np.pi) and angle_volume(candidate) >= current:
                break
            scale /= 2
            if scale < 1e-10:
                if decrement < 1e-8:
                    return alpha
                raise DegenerateShape("Volume maximum lies on the boundary of the angle structures.")
        alpha = candidate
    raise NoConvergence(f"Volume maximisation did not settle after {max_iterations} steps.")


def shapes_from_angles(angles: np.ndarray) -> ShapeAssignment:
    """z = sin(b) / sin(c) * exp(i a) for the angles (a, b, c) at the z, z', z'' edges."""
    alpha = np.asarray(angles, dtype=float).reshape(-1, 3)
    z = np.sin(alpha[:, 1]) / np.sin(alpha[:, 2]) * np.exp(1j * alpha[:, 0])
    return ShapeAssignment(tuple(complex(x) for x in z))


def solve_with_restarts(eqs: GluingEquations, tol: float = DEFAULT_SOLVER_TOL, seed: int = 0,
                        restarts: int = DEFAULT_RESTARTS,
                        max_iterations: int = DEFAULT_MAX_ITERATIONS) -> ShapeAssignment:
    """
    Solve from the regular shape (restart 0), then from the volume-maximising angle
    structure (restart 1), then from seeded random starts (restart 2 on).
    """
    try:
        return solve(eqs, ShapeAssignment.regular(eqs.tet_count), tol, max_iterations)
    except SolverError as exc:
        last = exc
        logger.warning("regular start failed: %s", exc)
    try:
        start = shapes_from_angles(maximize_volume(eqs, angle_structure(eqs)))
        shapes = solve(eqs, start, tol, max_iterations)
        logger.info("restart 1: volume-maximising angle structure")
        return ShapeAssignment(shapes.z, shapes.residuals, 1, None)
    except SolverError as exc:
        last = exc
        logger.warning("angle structure start failed: %s", exc)
    rng = np.random.default_rng(seed)
    for attempt in range(2, restarts + 2):
        angles = rng.uniform(0.3, np.pi - 0.3, eqs.tet_count)
        radii = np.exp(rng.uniform(-0.7, 0.7, eqs.tet_count))
        init = ShapeAssignment(tuple(complex(x) for x in radii * np.exp(1j * angles)))
        logger.info("restart %d/%d (seed %d)", attempt, restarts + 1, seed)
        try:
            shapes = solve(eqs, init, tol, max_iterations)
        except SolverError as exc:
            last = exc
            continue
        return ShapeAssignment(shapes.z, shapes.residuals, attempt, seed)
    raise last


def shape_identity_residual(s: ShapeAssignment) -> float:
    """max |z z' z'' + 1|."""
    z = s.as_array()
    return float(np.max(np.abs(z * s.z_prime() * s.z_double_prime() + 1)))


# -----------------------
# Volume
# -----------------------

LOBACHEVSKY_TERMS = 30


@lru_cache(maxsize=None)
def _lobachevsky_coefficients(terms: int = LOBACHEVSKY_TERMS) -> Tuple[float, ...]:
    bernoulli = [Fraction(1)]
    for m in range(1, 2 * terms + 1):
        bernoulli.append(-sum(comb(m + 1, k) * bernoulli[k] for k in range(m)) / (m + 1))
    coefficients = []
    for n in range(1, terms + 1):
        b = abs(bernoulli[2 * n])
        factorial = 1
        for k in range(2, 2 * n + 2):
            factorial *= k
        coefficients.append(float(Fraction(2 ** (2 * n - 1)) * b / (n * factorial)))
    return tuple(coefficients)


def lobachevsky(theta: float) -> float:
    """
    Lobachevsky function by its power series on [-pi/2, pi/2).

    Truncation after 30 terms leaves an error below 1e-15 on that interval.
    """
    theta = (theta + np.pi / 2) % np.pi - np.pi / 2
    if theta == 0.0:
        return 0.0
    total = theta * (1 - np.log(abs(2 * theta)))
    power = theta ** 3
    square = theta * theta
    for c in _lobachevsky_coefficients():
        total += c * power
        power *= square
    return float(total)


def volume(s: ShapeAssignment) -> float:
    z = s.as_array()
    if np.any(z.imag < 0):
        raise ValueError("Volume needs shapes with non-negative imaginary part.")
    total = 0.0
    for w in z:
        if w.imag == 0:
            continue
        for shape in (w, 1 / (1 - w), 1 - 1 / w):
            total += lobachevsky(float(np.angle(shape)))
    return total


# -----------------------
# Main Execution
# -----------------------
if __name__ == "__main__":
    from algorithms.farey import reduce
    from algorithms.triangulate import assemble_filled

    print(f"regular ideal tetrahedron: {volume(ShapeAssignment.regular(1)):.10f}")
    filled = assemble_filled(reduce(1, 3), reduce(1, 3))
    equations = derive_equations(filled)
    shapes = solve_with_restarts(equations)
    print(f"(1/3, 1/3): {equations.edge_count} edge + {equations.cusp_rows.shape[0]} cusp equations")
    print(f"shapes: {[f'{z:.6f}' for z in shapes.z]}")
    print(f"volume: {volume(shapes):.10f}")


"""
    Summary:
    Thurston gluing and completeness equations, a damped Newton solver and the volume of the solution.
    Key features:
    - Edge equations from edge classes; peripheral curves from fundamental cycles of the cusp triangulation.
    - Gauss-Newton in log-shape coordinates with step halving on the squared residual.
    - Restart order: regular shapes, the volume-maximising angle structure, then seeded random starts.
    - Lobachevsky-function volume from an exact-Bernoulli power series.
    Core flow:
    - derive_equations -> solve_with_restarts -> volume
    Dependencies:
    - numpy
"""
