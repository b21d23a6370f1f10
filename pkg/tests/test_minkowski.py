import numpy as np
import pytest
from numpy.testing import assert_allclose

from algorithms.cusp import Horoball, MobiusTransform, mobius_image_horoball, normalize_hexagon
from algorithms.minkowski import (CONVEX, FLAT, NON_CONVEX, IsotropicVector, angle_criterion, classify_margin,
                                  handedness, hexagon_configuration, hexagon_face_criterion, horoball_to_vector,
                                  local_convexity, lst_core_configuration, lst_core_criterion, minkowski_inner,
                                  sbs_core_configuration, sbs_core_criterion, vector_to_horoball)
from utils.errors import DegenerateHexagon, NoCrossing, SingularSystem


def _hexagon_from_angles(A, B, C, b):
    # solve a e^{iA} + c e^{iC} = 2 - b e^{iB} for positive a, c
    target = 2 - b * np.exp(1j * B)
    m = np.array([[np.cos(A), np.cos(C)], [np.sin(A), np.sin(C)]])
    a, c = np.linalg.solve(m, [target.real, target.imag])
    if a <= 0.05 or c <= 0.05:
        return None
    zeta = a * np.exp(1j * A) - 1
    zeta_p = 1 - c * np.exp(1j * C)
    return normalize_hexagon([-1, zeta, zeta_p, 1, -zeta, -zeta_p])


def _random_hexagons(count, seed=3):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        B = rng.uniform(0.2, np.pi - 0.2)
        A, C = rng.uniform(B - np.pi + 0.1, B - 0.1, 2)
        if abs(A - C) < 0.1:
            continue
        h = _hexagon_from_angles(A, B, C, rng.uniform(0.2, 1.5))
        if h is not None and abs(h.zeta_prime.imag - h.zeta.imag) > 1e-3:
            out.append(h)
    return out


# -----------------------
# Isotropic vectors
# -----------------------

def test_horoball_to_vector_examples():
    assert_allclose(horoball_to_vector(Horoball(None, 1.0)).as_array(), [0, 0, -1, 1])
    assert_allclose(horoball_to_vector(Horoball(0j, 1.0)).as_array(), [0, 0, 1, 1])
    ac = 0.37
    assert_allclose(horoball_to_vector(Horoball(1 + 0j, ac)).as_array(), np.array([2, 0, 0, 2]) / ac)


def test_isotropic_vector_validation():
    with pytest.raises(ValueError):
        IsotropicVector(1.0, 0.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        IsotropicVector(0.0, 0.0, 1.0, -1.0)


def test_vector_round_trip():
    for h in (Horoball(0.3 - 1.2j, 0.45), Horoball(None, 2.5), Horoball(-4 + 0j, 3.0)):
        back = vector_to_horoball(horoball_to_vector(h))
        assert back.at_infinity == h.at_infinity
        assert back.diameter == pytest.approx(h.diameter, rel=1e-12)
        if not h.at_infinity:
            assert back.center == pytest.approx(h.center, abs=1e-12)


def test_inner_product_is_mobius_invariant():
    rng = np.random.default_rng(11)
    for _ in range(100):
        entries = rng.normal(size=4) + 1j * rng.normal(size=4)
        g = MobiusTransform(*entries)
        g = MobiusTransform(*(entries / np.sqrt(g.det)))
        h1 = Horoball(complex(rng.normal(), rng.normal()), rng.uniform(0.2, 2))
        h2 = Horoball(complex(rng.normal(), rng.normal()), rng.uniform(0.2, 2))
        before = minkowski_inner(horoball_to_vector(h1), horoball_to_vector(h2))
        after = minkowski_inner(horoball_to_vector(mobius_image_horoball(g, h1)),
                                horoball_to_vector(mobius_image_horoball(g, h2)))
        assert after == pytest.approx(before, rel=1e-9)


# -----------------------
# Local convexity
# -----------------------

def test_lst_core_example():
    face, P, Q = lst_core_configuration(2j)
    cert = local_convexity(face, P, Q)
    assert cert.rho == pytest.approx(0.5)
    assert cert.lambdas == pytest.approx((3 / 5, 1 / np.sqrt(5), 1 / np.sqrt(5)))
    assert cert.margin + 1 == pytest.approx(1.49443, abs=1e-5)
    assert cert.verdict == CONVEX
    assert cert.residual < 1e-12


def test_sbs_core_example():
    face, P, Q = sbs_core_configuration(1 + 1j)
    cert = local_convexity(face, P, Q)
    assert cert.margin + 1 == pytest.approx(np.sqrt(2) + 1)
    assert abs(cert.lambdas[2]) < 1e-9
    assert sbs_core_criterion(1 + 1j).lambdas[2] == 0.0


def test_coincident_vectors_are_singular():
    v = horoball_to_vector(Horoball(0.5j, 1.0))
    with pytest.raises(SingularSystem):
        local_convexity([v, v, v], v, v)


def test_no_crossing_is_reported():
    face = [horoball_to_vector(Horoball(None, 1.0)),
            horoball_to_vector(Horoball(0j, 1.0)),
            horoball_to_vector(Horoball(1 + 0j, 1.0))]
    # both apexes on the same side of the face
    P = horoball_to_vector(Horoball(0.3 + 0.4j, 0.5))
    Q = horoball_to_vector(Horoball(0.4 + 0.9j, 0.2))
    with pytest.raises(NoCrossing):
        local_convexity(face, P, Q)


def test_face_needs_three_vertices():
    v = horoball_to_vector(Horoball(None, 1.0))
    with pytest.raises(ValueError):
        local_convexity([v, v], v, v)


def test_margin_classification():
    assert classify_margin(1e-3) == CONVEX
    assert classify_margin(5e-9) == FLAT
    assert classify_margin(-5e-9) == FLAT
    assert classify_margin(-1e-3) == NON_CONVEX


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_lst_core_closed_form_matches_solve(seed):
    rng = np.random.default_rng(seed)
    for _ in range(34):
        zeta = complex(rng.uniform(-3, 3), rng.uniform(0.05, 3))
        face, P, Q = lst_core_configuration(zeta)
        numeric = local_convexity(face, P, Q)
        closed = lst_core_criterion(zeta)
        assert numeric.margin == pytest.approx(closed.margin, abs=1e-9)
        assert closed.margin > 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_sbs_core_closed_form_matches_solve(seed):
    rng = np.random.default_rng(seed)
    for _ in range(34):
        zeta = complex(rng.uniform(-3, 3), rng.uniform(0.05, 3))
        face, P, Q = sbs_core_configuration(zeta)
        numeric = local_convexity(face, P, Q)
        assert numeric.margin == pytest.approx(sbs_core_criterion(zeta).margin, abs=1e-9)
        assert abs(numeric.lambdas[2]) < 1e-9


@pytest.mark.parametrize("seed", [0, 1])
def test_fold_closed_form_with_arbitrary_diameters(seed):
    rng = np.random.default_rng(seed)
    for _ in range(40):
        zeta = complex(rng.uniform(-3, 3), rng.uniform(0.05, 3))
        f, g = rng.uniform(0.1, 4, 2)
        face = [horoball_to_vector(Horoball(None, 1.0)), horoball_to_vector(Horoball(1 + 0j, f)),
                horoball_to_vector(Horoball(-1 + 0j, f))]
        P, Q = horoball_to_vector(Horoball(zeta, g)), horoball_to_vector(Horoball(-zeta, g))
        numeric = local_convexity(face, P, Q)
        closed = lst_core_criterion(zeta, face_diameter=f, apex_diameter=g)
        assert numeric.rho == pytest.approx(0.5)
        assert numeric.lambdas == pytest.approx(closed.lambdas, abs=1e-9)
        assert numeric.margin == pytest.approx(closed.margin, abs=1e-9)


@pytest.mark.parametrize("seed", [0, 1])
def test_core_closed_form_with_arbitrary_diameters(seed):
    rng = np.random.default_rng(seed)
    for _ in range(40):
        zeta = complex(rng.uniform(-3, 3), rng.uniform(0.05, 3))
        d0, e, s = rng.uniform(0.1, 4, 3)
        face = [horoball_to_vector(Horoball(None, 1.0)), horoball_to_vector(Horoball(0j, d0)),
                horoball_to_vector(Horoball(zeta, e))]
        P, Q = horoball_to_vector(Horoball(1 + 0j, s)), horoball_to_vector(Horoball(-1 + 0j, s))
        numeric = local_convexity(face, P, Q)
        closed = sbs_core_criterion(zeta, core_diameter=d0, apex_diameter=s)
        assert numeric.rho == pytest.approx(0.5)
        assert numeric.lambdas == pytest.approx(closed.lambdas, abs=1e-9)
        assert numeric.margin == pytest.approx(closed.margin, abs=1e-9)


# -----------------------
# Hexagon faces
# -----------------------

def test_hexagon_with_equal_negative_angles_is_convex():
    # A = C = -pi/4, B = pi/4 forces b = sqrt(2) and a + c = sqrt(2)
    a, c = 0.6, np.sqrt(2) - 0.6
    zeta = a * np.exp(-1j * np.pi / 4) - 1
    zeta_p = 1 - c * np.exp(-1j * np.pi / 4)
    h = normalize_hexagon([-1, zeta, zeta_p, 1, -zeta, -zeta_p])
    assert (h.A, h.B, h.C) == pytest.approx((-np.pi / 4, np.pi / 4, -np.pi / 4))
    assert h.angles_in_range()
    cert = hexagon_face_criterion(h)
    assert cert.lambdas == pytest.approx((1.0, 1.0, 1.0))
    assert cert.verdict == CONVEX
    face, P, Q = hexagon_configuration(h)
    assert local_convexity(face, P, Q).margin == pytest.approx(cert.margin, abs=1e-9)


def test_angle_criterion():
    assert angle_criterion(-np.pi / 4, -np.pi / 4)
    assert not angle_criterion(np.pi / 2, np.pi / 2)
    assert angle_criterion(-2 * np.pi, 0.5)
    assert not angle_criterion(0.5, 0.5)
    assert not angle_criterion(-3.5, -3.5)


def test_hexagon_closed_form_matches_solve_on_random_hexagons():
    checked = 0
    for h in _random_hexagons(100):
        closed = hexagon_face_criterion(h)
        try:
            numeric = local_convexity(*hexagon_configuration(h))
        except NoCrossing:
            continue
        checked += 1
        assert numeric.margin == pytest.approx(closed.margin, abs=1e-9 * max(1.0, abs(closed.margin)))
        assert (closed.margin > 0) == angle_criterion(h.A, h.C)
    assert checked >= 10


def test_degenerate_hexagon_is_rejected():
    h = normalize_hexagon([-1, -0.5 + 0.2j, 0.5 + 0.2j, 1, 0.5 - 0.2j, -0.5 - 0.2j])
    with pytest.raises(DegenerateHexagon):
        hexagon_face_criterion(h)


# -----------------------
# Handedness
# -----------------------

def test_handedness_examples():
    assert handedness(MobiusTransform(1, 0, 0, 1)) == pytest.approx(4)
    assert handedness(MobiusTransform(2, 0, 0, 1)) == pytest.approx(4.5)
    w = 0.8 - 0.3j
    assert handedness(MobiusTransform(1, 1 - w, 1, 1)) == pytest.approx(4 / w)
