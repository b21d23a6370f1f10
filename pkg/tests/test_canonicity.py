import numpy as np
import pytest

from algorithms.canonicity import (CANONICAL, NOT_CANONICAL, NOT_STRICT, CanonicityReport, CaseId, FaceCheck,
                                   FaceClass, boundary_case, check_all, classify_faces)
from algorithms.farey import reduce
from algorithms.geometry import derive_equations, solve_with_restarts
from algorithms.minkowski import CONVEX, FLAT, NON_CONVEX, ConvexityCertificate
from algorithms.triangulate import DiagonalChoice, assemble_filled, export_text, import_text
from utils.errors import ExcludedSlope, MissingMetadata


@pytest.fixture(scope="module")
def thirds():
    return assemble_filled(reduce(1, 3), reduce(1, 3))


@pytest.fixture(scope="module")
def thirds_report(thirds):
    return check_all(thirds, solve_with_restarts(derive_equations(thirds)))


def _check(margin, verdict, face=(0, 0)):
    cert = ConvexityCertificate(0.5, (1.0, 1.0, 1.0), margin, 0.0, 1.0, verdict)
    return FaceCheck(face, (1, 0), FaceClass.BOUNDARY_BR, cert, (margin, margin, margin))


# -----------------------
# Classification
# -----------------------

@pytest.mark.parametrize(
    "m1, m2, expected",
    [
        ((1, 3), (-1, 3), CaseId.MIXED),
        ((-1, 3), (-4, 3), CaseId.NEGATIVE),
        ((1, 3), (4, 3), CaseId.POSITIVE),
    ],
)
def test_boundary_case(m1, m2, expected):
    assert boundary_case(reduce(*m1), reduce(*m2)) is expected
    assert boundary_case(reduce(*m2), reduce(*m1)) is expected


def test_every_face_pair_gets_one_class(thirds):
    classes = classify_faces(thirds)
    assert len(classes) == 2 * thirds.tet_count
    assert FaceClass.BOUNDARY_BR in classes.values()
    assert FaceClass.CORE_DOUBLE in classes.values()
    assert not {FaceClass.INTERIOR_SBS, FaceClass.CORE_SBS} & set(classes.values())


def test_side_by_side_torus_classes():
    t = assemble_filled(reduce(1, 3), reduce(4, 3), DiagonalChoice.POSITIVE)
    values = set(classify_faces(t).values())
    assert {FaceClass.BOUNDARY_BR, FaceClass.CORE_SBS, FaceClass.INTERIOR_SBS} <= values


def test_classification_needs_metadata(thirds):
    with pytest.raises(MissingMetadata):
        classify_faces(import_text(export_text(thirds)))


# -----------------------
# Verdict aggregation
# -----------------------

def test_verdict_aggregation():
    convex = _check(0.3, CONVEX)
    flat = _check(0.0, FLAT, (0, 1))
    bad = _check(-0.2, NON_CONVEX, (0, 2))
    assert CanonicityReport((convex,), CaseId.MIXED).verdict == CANONICAL
    assert CanonicityReport((convex, flat), CaseId.MIXED).verdict == NOT_STRICT
    report = CanonicityReport((convex, flat, bad), CaseId.MIXED)
    assert report.verdict == NOT_CANONICAL
    assert report.min_margin == pytest.approx(-0.2)
    assert [c.face for c in report.offending()] == [(0, 1), (0, 2)]
    assert report.class_counts == {"BoundaryBR": 3}


def test_corner_spread():
    cert = ConvexityCertificate(0.5, (1.0,), 0.1, 0.0, 1.0, CONVEX)
    check = FaceCheck((0, 0), (1, 0), FaceClass.CORE_SBS, cert, (0.1, 0.1 + 1e-9, 0.1 - 2e-9))
    assert check.corner_spread == pytest.approx(3e-9)


# -----------------------
# Full check
# -----------------------

def test_thirds_filling_is_canonical(thirds, thirds_report):
    assert thirds_report.verdict == CANONICAL
    assert len(thirds_report.checks) == 2 * thirds.tet_count
    assert thirds_report.min_margin > 0
    assert all(c.certificate.convex for c in thirds_report.checks)
    assert not thirds_report.offending()


def test_margins_agree_between_corners(thirds_report):
    for c in thirds_report.checks:
        assert c.corner_spread < 1e-6 * max(1.0, abs(c.certificate.margin))
        assert 0 < c.certificate.rho < 1
        assert c.certificate.face_id == c.face


def test_closed_forms_agree_with_linear_solve(thirds_report):
    for c in thirds_report.checks:
        if c.closed_form is not None:
            assert c.closed_form_margin == pytest.approx(c.certificate.margin, rel=1e-6, abs=1e-9)


def test_report_carries_case_and_hexagons(thirds, thirds_report):
    fillings = [info.filling or info.slope for info in thirds.metadata.tori]
    assert thirds_report.boundary_case is boundary_case(*fillings)
    assert sum(thirds_report.class_counts.values()) == len(thirds_report.checks)
    assert len(thirds_report.hexagons) == 4
    for h in thirds_report.hexagons:
        assert 0 < h.B < np.pi
        assert h.B - np.pi < h.A < h.B and h.B - np.pi < h.C < h.B
        assert h.left_handed
        assert h.symmetry_residual < 1e-6
        assert np.isfinite(h.handedness.real) and np.isfinite(h.handedness.imag)
    assert np.isfinite(thirds_report.lift_spread)


@pytest.mark.parametrize("m1, m2", [((1, 3), (3, 5)), ((-1, 3), (-1, 3)), ((3, 5), (3, 7)), ((1, 5), (3, 7))])
def test_other_fillings_are_canonical(m1, m2):
    t = assemble_filled(reduce(*m1), reduce(*m2))
    report = check_all(t, solve_with_restarts(derive_equations(t)))
    assert report.verdict == CANONICAL
    assert report.min_margin > 1e-8


def test_opposite_thirds_realise_an_excluded_filling():
    with pytest.raises(ExcludedSlope):
        assemble_filled(reduce(1, 3), reduce(-1, 3))


def test_lifts_and_corners_agree_closely(thirds_report):
    assert thirds_report.lift_spread < 1e-9
    for c in thirds_report.checks:
        assert c.corner_spread < 1e-9 * max(1.0, abs(c.certificate.margin))


# -----------------------
# Core closed forms and hexagon cases
# -----------------------

@pytest.fixture(scope="module")
def both_positive():
    t = assemble_filled(reduce(1, 3), reduce(4, 3), DiagonalChoice.POSITIVE)
    return check_all(t, solve_with_restarts(derive_equations(t)))


@pytest.fixture(scope="module")
def both_negative():
    t = assemble_filled(reduce(-1, 3), reduce(-4, 3), DiagonalChoice.NEGATIVE)
    return check_all(t, solve_with_restarts(derive_equations(t)))


def test_fold_faces_use_the_fold_closed_form(thirds_report):
    folds = [c for c in thirds_report.checks if c.face_class is FaceClass.CORE_DOUBLE]
    assert folds
    for c in folds:
        assert c.closed_form == "lst-core"
        assert c.closed_form_margin == pytest.approx(c.certificate.margin, abs=1e-9)


def test_core_faces_use_the_core_closed_form(both_positive):
    cores = [c for c in both_positive.checks if c.face_class is FaceClass.CORE_SBS]
    assert cores
    for c in cores:
        assert c.closed_form == "sbs-core"
        assert c.closed_form_margin == pytest.approx(c.certificate.margin, abs=1e-9)


def test_both_negative_hexagons_have_negative_side_angles(both_negative):
    assert both_negative.boundary_case is CaseId.NEGATIVE
    assert both_negative.verdict == CANONICAL
    assert len(both_negative.hexagons) == 4
    for h in both_negative.hexagons:
        assert h.A < 0 and h.C < 0


def test_both_positive_hexagons_have_a_flat_first_side(both_positive):
    assert both_positive.boundary_case is CaseId.POSITIVE
    assert len(both_positive.hexagons) == 4
    for h in both_positive.hexagons:
        assert abs(h.A) < 1e-7
        assert h.C < 0


def _convex_count(hexagons):
    return sum(h.convex for h in hexagons)


@pytest.mark.parametrize("m1, m2", [((1, 3), (3, 5)), ((-1, 3), (-4, 3))])
def test_two_convex_and_two_non_convex_hexagons(m1, m2):
    t = assemble_filled(reduce(*m1), reduce(*m2))
    report = check_all(t, solve_with_restarts(derive_equations(t)))
    assert len(report.hexagons) == 4
    assert _convex_count(report.hexagons) == 2
    for h in report.hexagons:
        assert 0 < h.B < np.pi
        assert h.left_handed
