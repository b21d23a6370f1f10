import numpy as np
import pytest
from numpy.testing import assert_allclose

from algorithms.cusp import (REFERENCE_HOROBALL, CuspDiagram, Horoball, MobiusTransform, develop_cusp,
                             HexagonSide, extract_hexagons, face_pairing, horoball_diameters,
                             label_region, lattice_basis, mobius_image_horoball, normalize_hexagon)
from algorithms.farey import reduce
from algorithms.geometry import CuspLink, ShapeAssignment, derive_equations, solve_with_restarts
from algorithms.triangulate import assemble_filled, build_double_cover
from utils.errors import AsymmetricHexagon, DegenerateShape, HexagonExtractionFailed


@pytest.fixture(scope="module")
def diagram():
    t = assemble_filled(reduce(1, 3), reduce(1, 3))
    return develop_cusp(t, solve_with_restarts(derive_equations(t)))


def _lattice_coordinates(d, v):
    frame = np.array([[d.t_mu.real, d.t_lambda.real], [d.t_mu.imag, d.t_lambda.imag]])
    return np.linalg.solve(frame, [v.real, v.imag])


# -----------------------
# Horoballs and Mobius maps
# -----------------------

def test_horoball_needs_positive_diameter():
    with pytest.raises(ValueError):
        Horoball(0j, 0.0)


def test_mobius_composition_and_inverse():
    f = MobiusTransform(2, 1, 1, 1)
    g = MobiusTransform(1, 3, 0, 1)
    u = 0.3 + 0.7j
    assert f.compose(g)(u) == pytest.approx(f(g(u)))
    assert f.compose(f.inverse())(u) == pytest.approx(u)
    assert f(None) == 2
    assert f(-1) is None
    with pytest.raises(ValueError):
        MobiusTransform(1, 2, 2, 4)


def test_face_pairing_sends_reference_horoball_to_one():
    w = (0.6 - 0.2j) * (0.7 - 0.3j)
    f = MobiusTransform(1, 1 - w, 1, 1)
    image = mobius_image_horoball(f, REFERENCE_HOROBALL)
    assert image.center == pytest.approx(1)
    assert image.diameter == pytest.approx(abs(w))


def test_identity_and_parabolic_fix_horoballs():
    identity = MobiusTransform(1, 0, 0, 1)
    h = Horoball(0.2 + 0.5j, 0.3)
    assert mobius_image_horoball(identity, h).center == pytest.approx(h.center)
    assert mobius_image_horoball(identity, h).diameter == pytest.approx(0.3)
    image = mobius_image_horoball(MobiusTransform(1, 5, 0, 1), REFERENCE_HOROBALL)
    assert image.at_infinity and image.diameter == pytest.approx(1.0)
    assert not image.image_at_infinity


def test_finite_horoball_images():
    h = Horoball(0.2 + 0.5j, 0.3)
    moved = mobius_image_horoball(MobiusTransform(1, 5, 0, 1), h)
    assert moved.center == pytest.approx(5.2 + 0.5j) and moved.diameter == pytest.approx(0.3)
    scaled = mobius_image_horoball(MobiusTransform(2, 0, 0, 1), h)
    assert scaled.center == pytest.approx(0.4 + 1.0j) and scaled.diameter == pytest.approx(0.6)
    flipped = mobius_image_horoball(MobiusTransform(0, -1, 1, 0), Horoball(0j, 0.25))
    assert flipped.at_infinity and flipped.image_at_infinity
    assert flipped.diameter == pytest.approx(4.0)


# -----------------------
# Hexagons
# -----------------------

def test_regular_hexagon():
    h = normalize_hexagon([np.exp(1j * np.pi * k / 3) for k in (3, 4, 5, 0, 1, 2)])
    assert (h.a, h.b, h.c) == pytest.approx((1.0, 1.0, 1.0))
    assert h.a_vec + h.b_vec + h.c_vec == pytest.approx(2)
    assert h.convex
    assert h.symmetry_residual < 1e-12
    assert h.vertices[0] == -1 and h.vertices[3] == 1


def test_normalization_is_similarity_invariant():
    raw = [-1, -0.4 - 0.6j, 0.5 - 0.3j, 1, 0.4 + 0.6j, -0.5 + 0.3j]
    moved = [(2 - 1j) * p + (3 + 4j) for p in raw]
    a, b = normalize_hexagon(raw), normalize_hexagon(moved)
    assert b.zeta == pytest.approx(a.zeta)
    assert b.zeta_prime == pytest.approx(a.zeta_prime)
    rotated = normalize_hexagon(raw[1:] + raw[:1], anchor=5)
    assert rotated.zeta == pytest.approx(a.zeta)


def test_diamond_hexagon_is_flagged():
    h = normalize_hexagon([-1, -0.5, 0.5j, 1, 0.5, -0.5j])
    assert h.A == 0.0
    assert h.degenerate


def test_asymmetric_hexagon_is_rejected():
    raw = [-1, -0.4 - 0.6j, 0.5 - 0.3j, 1, 0.4 + 0.6j, -0.7 + 0.3j]
    with pytest.raises(AsymmetricHexagon):
        normalize_hexagon(raw)
    assert normalize_hexagon(raw, strict=False).symmetry_residual > 1e-3


def _regular_loop(outer_side=1.0):
    v = [np.exp(1j * np.pi * k / 3) for k in range(6)]
    loop = []
    for i in range(6):
        inner, start, end = v[i - 1], v[i], v[(i + 1) % 6]
        across = start + end - inner
        mid = (start + end) / 2
        outer = across if outer_side > 0 else mid + 0.3 * (inner - mid)
        loop.append(HexagonSide(start, end, ((0, i), 0), inner, outer))
    return loop


def test_region_labeling_puts_the_face_apexes_at_plus_minus_one():
    h = label_region(_regular_loop())
    assert h.angles_in_range()
    assert h.convex
    assert h.anchor == 0
    assert h.symmetry_residual < 1e-12


def test_region_labeling_rejects_apexes_on_one_side():
    with pytest.raises(HexagonExtractionFailed):
        label_region(_regular_loop(outer_side=-1.0))


def test_horoball_diameters():
    flat = normalize_hexagon([-1, -1 / 3, 1 / 3, 1, 1 / 3, -1 / 3])
    assert [h.diameter for h in horoball_diameters(flat)] == pytest.approx([4 / 9] * 6)
    h = normalize_hexagon([-1, -0.4 - 0.6j, 0.5 - 0.3j, 1, 0.4 + 0.6j, -0.5 + 0.3j])
    ac, ab, bc = h.a * h.c, h.a * h.b, h.b * h.c
    assert [x.diameter for x in horoball_diameters(h)] == pytest.approx([ac, ab, bc, ac, ab, bc])


def test_face_pairing_matches_hexagon_sides():
    h = normalize_hexagon([-1, -0.4 - 0.6j, 0.5 - 0.3j, 1, 0.4 + 0.6j, -0.5 + 0.3j])
    f = face_pairing(h)
    assert f(-1) is None
    assert f(None) == pytest.approx(1)
    assert f(h.zeta) == pytest.approx(h.zeta_prime)


# -----------------------
# Cusp development
# -----------------------

def test_lattice_basis_recovers_generators():
    translations = [2 + 0j, 3 + 0j, 0.6 + 2.2j, 1.3 + 1.1j]
    t_mu, t_lambda = lattice_basis(translations, 1.1)
    assert abs((t_mu.conjugate() * t_lambda).imag) == pytest.approx(1.1)
    assert t_mu == pytest.approx(1)
    assert t_lambda == pytest.approx(0.3 + 1.1j)


def test_lattice_basis_rejects_collinear_translations():
    with pytest.raises(DegenerateShape):
        lattice_basis([1 + 0j, 2 + 0j, -3 + 0j], 1.0)


def test_development_covers_every_cusp_triangle(diagram):
    t = diagram.triangulation
    assert len(diagram.positions) == 4 * t.tet_count
    assert diagram.area() == pytest.approx(diagram.lattice_area(), rel=1e-6)


def test_development_is_consistent_across_gluings(diagram):
    t = diagram.triangulation
    link = CuspLink(t)
    scale = np.sqrt(diagram.area())
    for (tet, v), here in diagram.positions.items():
        for side in (f for f in range(4) if f != v):
            (other, _), _ = link.across((tet, v), side)
            perm = t.gluings[tet][side]
            w1, w2 = link.shared_corners((tet, v), side)
            there = diagram.positions[(other, perm[v])]
            shift = here[w1] - there[perm[w1]]
            assert here[w2] - there[perm[w2]] == pytest.approx(shift, abs=1e-8 * scale)
            assert_allclose(_lattice_coordinates(diagram, shift), np.round(_lattice_coordinates(diagram, shift)),
                            atol=1e-6)


def test_corner_diameters_are_positive(diagram):
    for tet, v in diagram.positions:
        for w in range(4):
            if w != v:
                assert diagram.corner_diameter(tet, v, w) > 0


def test_development_needs_geometric_shapes(diagram):
    t = diagram.triangulation
    with pytest.raises(DegenerateShape):
        develop_cusp(t, ShapeAssignment(tuple([0.5 - 0.1j] * t.tet_count)))


def test_four_centrally_symmetric_hexagons(diagram):
    hexagons = extract_hexagons(diagram)
    assert len(hexagons) == 4
    assert sorted(h.torus for h in hexagons) == [0, 0, 1, 1]
    for h in hexagons:
        assert len(h.sides) == 6
        assert h.symmetry_residual < 1e-6


def test_matched_hexagon_sides_agree(diagram):
    hexagons = extract_hexagons(diagram)
    link = CuspLink(diagram.triangulation)
    scale = np.sqrt(diagram.area())
    sides = {s.side: (i, s.end - s.start) for i, h in enumerate(hexagons) for s in h.sides}
    assert len(sides) == 24
    for (tri, face), (i, vector) in sides.items():
        partner, partner_face = link.across(tri, face)
        j, other = sides[(partner, partner_face)]
        assert hexagons[i].torus != hexagons[j].torus
        assert abs(vector + other) < 1e-8 * scale


def test_hexagons_need_a_closed_filled_cusp():
    dc = build_double_cover(reduce(1, 3))
    empty = CuspDiagram(dc, ShapeAssignment.regular(dc.tet_count), {}, 1 + 0j, 1j)
    with pytest.raises(HexagonExtractionFailed):
        extract_hexagons(empty)
