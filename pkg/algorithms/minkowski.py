# Minkowski Convexity -> isotropic vectors and the local convexity test
"""
Inputs:
    - Horoballs in the upper half-space model
    - A face (three or more horoball vectors) and the two opposite apex vectors P, Q

Outputs:
    - IsotropicVector for each horoball
    - ConvexityCertificate: rho, lambdas, margin sum(lambda) - 1, residual, verdict

Description:
    Horoballs become light-like vectors of R^{3,1}. A face is locally convex when
    the segment from P to Q meets the plane spanned by the face vectors beyond
    their affine hull, i.e. rho P + (1 - rho) Q = sum lambda_i A_i with
    rho in (0, 1) and sum lambda_i > 1.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from algorithms.cusp import Hexagon, Horoball, MobiusTransform
from utils.errors import DegenerateHexagon, NoCrossing, SingularSystem
from utils.settings import DEFAULT_CONVEXITY_TOL

logger = logging.getLogger(__name__)

CONVEX = "convex"
FLAT = "flat"
NON_CONVEX = "non-convex"


# -----------------------
# Isotropic vectors
# -----------------------

@dataclass(frozen=True)
class IsotropicVector:
    x1: float
    x2: float
    x3: float
    x4: float

    def __post_init__(self):
        if not self.x4 > 0:
            raise ValueError(f"Isotropic vector must have x4 > 0, got {self.x4}.")
        norm = self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2 - self.x4 ** 2
        if abs(norm) > 1e-9 * self.x4 ** 2:
            raise ValueError(f"Vector is not light-like (<v, v> = {norm:.3e}).")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3, self.x4], dtype=float)


def minkowski_inner(u: IsotropicVector, v: IsotropicVector) -> float:
    a, b = u.as_array(), v.as_array()
    return float(a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3])


def horoball_to_vector(h: Horoball) -> IsotropicVector:
    if h.at_infinity:
        return IsotropicVector(0.0, 0.0, -h.diameter, h.diameter)
    zeta = complex(h.center)
    r2 = abs(zeta) ** 2
    return IsotropicVector(
        2 * zeta.real / h.diameter, 2 * zeta.imag / h.diameter, (1 - r2) / h.diameter, (1 + r2) / h.diameter
    )


def vector_to_horoball(v: IsotropicVector) -> Horoball:
    total = v.x3 + v.x4
    if abs(total) <= 1e-12 * v.x4:
        return Horoball(None, v.x4)
    d = 2 / total
    return Horoball(complex(v.x1 * d / 2, v.x2 * d / 2), d)


# -----------------------
# Local convexity
# -----------------------

@dataclass(frozen=True)
class ConvexityCertificate:
    rho: float
    lambdas: Tuple[float, ...]
    margin: float
    residual: float
    condition: float
    verdict: str
    face_id: Optional[Tuple[int, int]] = None
    face_class: Optional[str] = None
    z_diagnostic: Optional[float] = None

    @property
    def convex(self) -> bool:
        return self.verdict == CONVEX


def classify_margin(margin: float, tol: float = DEFAULT_CONVEXITY_TOL) -> str:
    if margin > tol:
        return CONVEX
    if margin >= -tol:
        return FLAT
    return NON_CONVEX


def local_convexity(face_vertices: Sequence[IsotropicVector], P: IsotropicVector, Q: IsotropicVector,
                    tol: float = DEFAULT_CONVEXITY_TOL) -> ConvexityCertificate:
    """
    Solve rho P + (1 - rho) Q = sum lambda_i A_i by least squares.

    Args:
        face_vertices: vectors A_1..A_sigma of the face, sigma >= 3
        P, Q: apex vectors of the two cells meeting at the face
        tol: margins within +-tol are reported as flat

    Returns:
        ConvexityCertificate with lambdas in the order of face_vertices
    """
    sigma = len(face_vertices)
    if sigma < 3:
        raise ValueError("A face needs at least three vertices.")
    p, q = P.as_array(), Q.as_array()
    system = np.column_stack([v.as_array() for v in face_vertices] + [q - p])
    if np.linalg.matrix_rank(system, tol=1e-10 * max(1.0, np.abs(system).max())) < sigma + 1:
        raise SingularSystem("face vectors and apex segment do not determine a unique crossing")
    solution, *_ = np.linalg.lstsq(system, q, rcond=None)
    lambdas, rho = solution[:sigma], float(solution[sigma])
    residual = float(np.linalg.norm(system @ solution - q))
    if not 0 < rho < 1:
        raise NoCrossing(f"segment between apexes meets the face plane at rho = {rho:.6g}")
    margin = float(np.sum(lambdas) - 1)
    logger.debug("crossing at rho = %.6g, margin %.6g, residual %.2e", rho, margin, residual)
    return ConvexityCertificate(
        rho=rho,
        lambdas=tuple(float(x) for x in lambdas),
        margin=margin,
        residual=residual,
        condition=float(np.linalg.cond(system)),
        verdict=classify_margin(margin, tol),
    )


# -----------------------
# Closed forms
# -----------------------

def _vector(center: Optional[complex], diameter: float) -> IsotropicVector:
    return horoball_to_vector(Horoball(center, diameter))


def hexagon_configuration(h: Hexagon) -> Tuple[Tuple[IsotropicVector, ...], IsotropicVector, IsotropicVector]:
    """Face (z, z', inf) with apexes at 1 and -1."""
    face = (
        _vector(h.zeta, h.a * h.b),
        _vector(h.zeta_prime, h.b * h.c),
        _vector(None, 1.0),
    )
    return face, _vector(1 + 0j, h.a * h.c), _vector(-1 + 0j, h.a * h.c)


def angle_criterion(A: float, C: float) -> bool:
    return -np.pi < (A + C) / 2 < 0


def hexagon_face_criterion(h: Hexagon, tol: float = DEFAULT_CONVEXITY_TOL) -> ConvexityCertificate:
    eta, eta_p = h.zeta.imag, h.zeta_prime.imag
    spread = eta_p - eta
    if abs(spread) < 1e-12:
        raise DegenerateHexagon("hexagon has Im z = Im z'; the face system is singular")
    a, b, c = h.a, h.b, h.c
    lam = b * eta_p / (c * spread)
    mu = -b * eta / (a * spread)
    nu = (eta_p * (1 - abs(h.zeta) ** 2) - eta * (1 - abs(h.zeta_prime) ** 2)) / (a * c * spread)
    z_value = (a * b * eta_p - b * c * eta + eta_p * (1 - abs(h.zeta) ** 2)
               - eta * (1 - abs(h.zeta_prime) ** 2) - a * c * spread)
    margin = lam + mu + nu - 1
    return ConvexityCertificate(
        rho=float("nan"),
        lambdas=(lam, mu, nu),
        margin=margin,
        residual=0.0,
        condition=float("nan"),
        verdict=classify_margin(margin, tol),
        z_diagnostic=z_value,
    )


def lst_core_configuration(zeta: complex) -> Tuple[Tuple[IsotropicVector, ...], IsotropicVector, IsotropicVector]:
    """Face (inf, 1, -1) at the fold of a layered solid torus, apexes at z and -z."""
    s = abs(zeta + 1)
    face = (_vector(None, 1.0), _vector(1 + 0j, 2 * s), _vector(-1 + 0j, 2 * s))
    return face, _vector(zeta, s ** 2), _vector(-zeta, s ** 2)


def lst_core_criterion(zeta: complex, tol: float = DEFAULT_CONVEXITY_TOL, face_diameter: Optional[float] = None,
                       apex_diameter: Optional[float] = None) -> ConvexityCertificate:
    """
    Margin at a fold face (inf, 1, -1) whose apexes sit at z and -z.

    The diameters default to the layered-torus values 2|z + 1| at +-1 and |z + 1|^2 at +-z;
    by the symmetry the crossing is always at rho = 1/2.
    """
    s = abs(zeta + 1)
    f = 2 * s if face_diameter is None else face_diameter
    g = s ** 2 if apex_diameter is None else apex_diameter
    lam = (abs(zeta) ** 2 - 1) / g
    mu = f / (2 * g)
    margin = lam + 2 * mu - 1
    return ConvexityCertificate(0.5, (lam, mu, mu), margin, 0.0, float("nan"), classify_margin(margin, tol))


def sbs_core_configuration(zeta: complex) -> Tuple[Tuple[IsotropicVector, ...], IsotropicVector, IsotropicVector]:
    """Face (inf, 0, z) at the core of a side-by-side torus, apexes at 1 and -1."""
    r, s = abs(zeta), abs(zeta - 1)
    face = (_vector(None, 1.0), _vector(0j, r), _vector(zeta, r * s))
    return face, _vector(1 + 0j, s), _vector(-1 + 0j, s)


def sbs_core_criterion(zeta: complex, tol: float = DEFAULT_CONVEXITY_TOL, core_diameter: Optional[float] = None,
                       apex_diameter: Optional[float] = None) -> ConvexityCertificate:
    """
    Margin at a core face (inf, 0, z) whose apexes sit at 1 and -1.

    Defaults: diameter |z| at 0 and |z - 1| at +-1. The crossing lies on the edge (0, inf).
    """
    r = abs(zeta) if core_diameter is None else core_diameter
    s = abs(zeta - 1) if apex_diameter is None else apex_diameter
    margin = (r + 1) / s - 1
    return ConvexityCertificate(0.5, (1 / s, r / s, 0.0), margin, 0.0, float("nan"),
                                classify_margin(margin, tol))


def handedness(g: MobiusTransform) -> complex:
    """(tr g)^2 / det g; left-handed when the imaginary part is positive."""
    return g.trace ** 2 / g.det


# -----------------------
# Main Execution
# -----------------------
if __name__ == "__main__":
    zeta = 2j
    face, P, Q = lst_core_configuration(zeta)
    numeric = local_convexity(face, P, Q)
    print(f"LST core at z = {zeta}: rho = {numeric.rho:.6f}, margin = {numeric.margin:.6f} "
          f"(closed form {lst_core_criterion(zeta).margin:.6f})")
    zeta = 1 + 1j
    face, P, Q = sbs_core_configuration(zeta)
    numeric = local_convexity(face, P, Q)
    print(f"side-by-side core at z = {zeta}: margin = {numeric.margin:.6f} "
          f"(closed form {sbs_core_criterion(zeta).margin:.6f})")


"""
    Summary:
    Minkowski-space form of the local convexity test for ideal triangulations with horoballs.
    Key features:
    - Horoball <-> light-like vector conversion and the Minkowski inner product.
    - Generic least-squares crossing test with rank check, residual and condition number.
    - Closed-form margins for hexagon faces, fold faces and side-by-side core faces.
    Core flow:
    - horoball_to_vector -> local_convexity -> ConvexityCertificate
    Dependencies:
    - numpy
"""
