# Farey Walk -> exact slope combinatorics for layered solid tori
"""
Inputs:
    - Slope p/q (reduced, 1/0 is infinity)

Outputs:
    - FareyWalk: triangles T0..TN of the Farey triangulation from the
      initial triangle to the first triangle containing the slope,
      plus the L/R turn word of the path.

Description:
    Every slope p/q is a primitive lattice direction (q, p). Two slopes
    span a Farey edge when their intersection number |p1 q2 - q1 p2| is 1.
    The walk descends the Stern-Brocot tree: each triangle (left, mid, right)
    has mid = left (+) right, and the next triangle keeps whichever half
    still brackets the target.
"""

from dataclasses import dataclass
from math import gcd
from typing import List, Optional, Tuple

from utils.errors import SlopeTooShort, ZeroSlopePair


# -----------------------
# Slopes
# -----------------------

@dataclass(frozen=True, order=False)
class Slope:
    p: int
    q: int

    def __post_init__(self):
        if self.p == 0 and self.q == 0:
            raise ZeroSlopePair("Slope 0/0 is undefined.")
        if gcd(abs(self.p), abs(self.q)) != 1 or self.q < 0 or (self.q == 0 and self.p != 1):
            raise ValueError(f"Slope {self.p}/{self.q} is not in canonical form; use reduce().")

    @property
    def vector(self) -> Tuple[int, int]:
        """Lattice direction (x, y) = (q, p)."""
        return (self.q, self.p)

    @property
    def sign(self) -> int:
        if self.q == 0 or self.p == 0:
            return 0
        return 1 if self.p > 0 else -1

    def is_infinite(self) -> bool:
        return self.q == 0

    def __neg__(self) -> "Slope":
        return reduce(-self.p, self.q)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


def reduce(p: int, q: int) -> Slope:
    """Canonical reduced slope: q >= 0, sign on the numerator, 1/0 for infinity."""
    if p == 0 and q == 0:
        raise ZeroSlopePair("Slope 0/0 is undefined.")
    g = gcd(abs(p), abs(q))
    p, q = p // g, q // g
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return Slope(p, q)


def from_vector(x: int, y: int) -> Slope:
    """Slope of the lattice direction (x, y); (x, y) and (-x, -y) agree."""
    return reduce(y, x)


def intersection_number(s1: Slope, s2: Slope) -> int:
    return abs(s1.p * s2.q - s1.q * s2.p)


ZERO = Slope(0, 1)
INFINITY = Slope(1, 0)
ONE = Slope(1, 1)
MINUS_ONE = Slope(-1, 1)


# -----------------------
# Farey triangles and walks
# -----------------------

@dataclass(frozen=True)
class FareyTriangle:
    slopes: Tuple[Slope, Slope, Slope]

    def __post_init__(self):
        a, b, c = self.slopes
        if not (intersection_number(a, b) == intersection_number(b, c) == intersection_number(a, c) == 1):
            raise ValueError(f"{self} is not a Farey triangle.")

    def contains(self, s: Slope) -> bool:
        return s in self.slopes

    def shared(self, other: "FareyTriangle") -> Tuple[Slope, ...]:
        return tuple(s for s in self.slopes if other.contains(s))

    def exchanged(self, other: "FareyTriangle") -> Tuple[Slope, Slope]:
        """(slope leaving, slope entering) when stepping from self to other."""
        (gone,) = [s for s in self.slopes if not other.contains(s)]
        (new,) = [s for s in other.slopes if not self.contains(s)]
        return gone, new

    def same_as(self, other: "FareyTriangle") -> bool:
        return set(self.slopes) == set(other.slopes)

    def __str__(self) -> str:
        return "{" + ", ".join(str(s) for s in self.slopes) + "}"


@dataclass(frozen=True)
class FareyWalk:
    triangles: Tuple[FareyTriangle, ...]
    turns: str
    target: Slope

    @property
    def length(self) -> int:
        """N, the index of the final triangle."""
        return len(self.triangles) - 1

    def exchange(self, i: int) -> Tuple[Slope, Slope]:
        """Slopes swapped by the diagonal exchange T_i -> T_{i+1}."""
        return self.triangles[i].exchanged(self.triangles[i + 1])

    def initial_triangle(self) -> FareyTriangle:
        return self.triangles[0]


def initial_triangle(sign: int) -> FareyTriangle:
    """T0 = {0/1, 1/0, 1/1} for positive slopes, {0/1, 1/0, -1/1} otherwise."""
    return FareyTriangle((ZERO, INFINITY, ONE if sign > 0 else MINUS_ONE))


def _descend(p: int, q: int) -> Tuple[List[Tuple[Tuple[int, int], ...]], str]:
    # Stern-Brocot descent on the positive side; slopes as (p, q) pairs.
    left, right = (0, 1), (1, 0)
    mid = (1, 1)
    path = [(left, mid, right)]
    turns = []
    while mid != (p, q) and left != (p, q) and right != (p, q):
        if p * mid[1] < mid[0] * q:
            right = mid
            turns.append("R")
        else:
            left = mid
            turns.append("L")
        mid = (left[0] + right[0], left[1] + right[1])
        path.append((left, mid, right))
    return path, "".join(turns[1:])


def walk_to(m: Slope, minimum_length: int = 2) -> FareyWalk:
    """
    Geodesic walk in the dual tree of the Farey triangulation.

    Args:
        m: target slope
        minimum_length: smallest acceptable N (layered solid tori need 2)

    Returns:
        FareyWalk ending at the first triangle that contains m.
    """
    if m.p == 0 or m.q == 0:
        raise SlopeTooShort(f"Slope {m} lies in the initial triangle.")
    sign = 1 if m.p > 0 else -1
    path, turns = _descend(abs(m.p), m.q)
    if sign < 0:
        # mirror image: reflection swaps left and right
        turns = turns.translate(str.maketrans("LR", "RL"))
    triangles = tuple(
        FareyTriangle(tuple(reduce(sign * a, b) for a, b in tri)) for tri in path
    )
    walk = FareyWalk(triangles=triangles, turns=turns, target=m)
    if walk.length < minimum_length:
        raise SlopeTooShort(
            f"Slope {m} is reached after {walk.length} step(s); at least {minimum_length} are needed."
        )
    return walk


def slope_between(walk: FareyWalk, i: int) -> Optional[Slope]:
    """Slope shared by T_{i-1}, T_i and T_{i+1} (the pivot), None at the ends."""
    if i <= 0 or i >= walk.length:
        return None
    common = set(walk.triangles[i - 1].slopes) & set(walk.triangles[i].slopes) & set(walk.triangles[i + 1].slopes)
    return common.pop() if common else None


# -----------------------
# Main Execution
# -----------------------
if __name__ == "__main__":
    for text in ("1/3", "3/7", "-1/3", "3/1"):
        num, den = (int(v) for v in text.split("/"))
        w = walk_to(reduce(num, den))
        print(f"{text}: N = {w.length}, turns = {w.turns or '-'}")
        for tri in w.triangles:
            print("   ", tri)


"""
    Summary:
    Farey-graph combinatorics used to build layered solid tori.
    Key features:
    - Exact integer slopes with canonical sign and infinity handling.
    - Intersection numbers and Farey triangles.
    - Stern-Brocot walk from the sign-dependent initial triangle with an L/R turn word.
    Core flow:
    - reduce -> walk_to -> FareyWalk.exchange(i) drives each layering step.
    Dependencies:
    - none
"""
