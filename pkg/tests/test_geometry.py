import numpy as np
import pytest
from numpy.testing import assert_allclose

from algorithms.farey import reduce
from algorithms.geometry import (GluingEquations, ShapeAssignment, angle_structure, angle_volume, ccw_corners,
                                 derive_equations, jacobian, lobachevsky, maximize_volume, residuals,
                                 shape_identity_residual, shape_slot, shapes_from_angles, solve, solve_with_restarts,
                                 tet_rows, volume, without_backtracks)
from algorithms.triangulate import DiagonalChoice, assemble_filled, build_double_cover
from utils.errors import ConstructionError, InvalidTriangulation, NoConvergence, SolverError
from utils.settings import UNFILLED_VOLUME


@pytest.fixture(scope="module")
def thirds():
    return assemble_filled(reduce(1, 3), reduce(1, 3))


@pytest.fixture(scope="module")
def thirds_shapes(thirds):
    return solve_with_restarts(derive_equations(thirds))


def test_shape_slots_pair_opposite_edges():
    assert shape_slot(0, 1) == shape_slot(2, 3) == 0
    assert shape_slot(0, 2) == shape_slot(1, 3) == 1
    assert shape_slot(0, 3) == shape_slot(1, 2) == 2


def test_ccw_corners_cover_the_other_vertices():
    for v in range(4):
        assert sorted(ccw_corners(v)) == [w for w in range(4) if w != v]
    assert ccw_corners(0) == (1, 2, 3)
    assert ccw_corners(1) == (0, 3, 2)


def test_equation_counts(thirds):
    eqs = derive_equations(thirds)
    assert eqs.edge_count == 4
    assert eqs.cusp_rows.shape == (2, 12)
    # every tetrahedron contributes each shape parameter twice
    assert_allclose(eqs.edge_rows.sum(axis=0), 2)


def test_equation_counts_mixed_tori():
    t = assemble_filled(reduce(1, 3), reduce(4, 3), DiagonalChoice.POSITIVE)
    eqs = derive_equations(t)
    assert eqs.edge_count == 7
    assert eqs.cusp_rows.shape[0] == 2


def test_equations_need_a_closed_complex():
    with pytest.raises(InvalidTriangulation):
        derive_equations(build_double_cover(reduce(1, 3)))


def test_solver_finds_geometric_shapes(thirds, thirds_shapes):
    eqs = derive_equations(thirds)
    assert thirds_shapes.is_geometric()
    assert thirds_shapes.count == thirds.tet_count
    assert np.max(np.abs(residuals(eqs, np.log(thirds_shapes.as_array())))) < 1e-9
    assert shape_identity_residual(thirds_shapes) < 1e-12
    assert thirds_shapes.residuals[-1] < 1e-10


def test_volume_drops_below_the_unfilled_link(thirds_shapes):
    vol = volume(thirds_shapes)
    assert 0 < vol < UNFILLED_VOLUME
    assert vol <= thirds_shapes.count * volume(ShapeAssignment.regular(1)) + 1e-9


def test_jacobian_matches_finite_differences(thirds):
    eqs = derive_equations(thirds)
    u = np.log(ShapeAssignment.regular(thirds.tet_count).as_array()) + 0.05j * np.arange(thirds.tet_count)
    j = jacobian(eqs, u)
    h = 1e-7
    for k in range(thirds.tet_count):
        step = np.zeros_like(u)
        step[k] = h
        numeric = (residuals(eqs, u + step) - residuals(eqs, u - step)) / (2 * h)
        assert_allclose(j[:, k], numeric, atol=1e-6)


def test_solver_rejects_bad_arguments(thirds):
    eqs = derive_equations(thirds)
    start = ShapeAssignment.regular(thirds.tet_count)
    with pytest.raises(ValueError):
        solve(eqs, start, tol=0)
    with pytest.raises(ValueError):
        solve(eqs, ShapeAssignment(tuple([0.5 - 0.5j] * thirds.tet_count)))


def test_inconsistent_equations_do_not_converge():
    # log z + log z' + log z'' is always i pi, never 2 pi i
    eqs = GluingEquations(np.array([[1, 1, 1]]), np.zeros((0, 3), dtype=int), 1)
    with pytest.raises(NoConvergence):
        solve(eqs, ShapeAssignment.regular(1))


def test_restarts_are_reproducible(thirds):
    eqs = derive_equations(thirds)
    a = solve_with_restarts(eqs, seed=7)
    b = solve_with_restarts(eqs, seed=7)
    assert a.z == b.z
    assert a.restart == b.restart


def test_volume_examples():
    assert volume(ShapeAssignment.regular(1)) == pytest.approx(1.0149416064096536, abs=1e-12)
    assert volume(ShapeAssignment((1j,))) == pytest.approx(0.9159655941772190, abs=1e-12)
    assert volume(ShapeAssignment((2.5 + 0j,))) == 0.0
    with pytest.raises(ValueError):
        volume(ShapeAssignment((1 - 1j,)))


def test_lobachevsky_is_odd_and_pi_periodic():
    for theta in (0.1, 0.7, 1.3):
        assert lobachevsky(-theta) == pytest.approx(-lobachevsky(theta), abs=1e-14)
        assert lobachevsky(theta + np.pi) == pytest.approx(lobachevsky(theta), abs=1e-12)
    assert lobachevsky(np.pi / 2) == pytest.approx(0.0, abs=1e-14)


def test_backtracks_are_cancelled_cyclically():
    there, back = ("a", 0, "b", 1), ("b", 1, "a", 0)
    on, off = ("b", 2, "c", 0), ("c", 0, "b", 2)
    other = ("b", 0, "d", 1)
    assert without_backtracks([there, on, off, back]) == []
    assert without_backtracks([there, on, other, back]) == [on, other]
    assert without_backtracks([other, there, back]) == [other]


def test_angle_structure_satisfies_the_linear_equations(thirds):
    eqs = derive_equations(thirds)
    angles = angle_structure(eqs)
    assert np.all(angles > 0)
    assert_allclose(eqs.edge_rows @ angles, 2 * np.pi, atol=1e-9)
    assert_allclose(tet_rows(eqs.tet_count) @ angles, np.pi, atol=1e-9)


def test_volume_maximum_is_the_hyperbolic_volume(thirds, thirds_shapes):
    eqs = derive_equations(thirds)
    best = maximize_volume(eqs, angle_structure(eqs))
    assert angle_volume(best) == pytest.approx(volume(thirds_shapes), abs=1e-8)
    start = shapes_from_angles(best)
    assert np.max(np.abs(np.array(start.z) - np.array(thirds_shapes.z))) < 1e-5


_PAIRS = [
    ((1, 3), (1, 3)), ((1, 3), (3, 5)), ((3, 5), (3, 5)), ((1, 5), (1, 5)), ((3, 7), (3, 7)),
    ((1, 3), (3, 7)), ((4, 3), (4, 3)), ((1, 3), (4, 3)), ((5, 7), (1, 5)), ((-1, 3), (-1, 3)),
    ((1, 7), (1, 7)), ((3, 5), (-3, 7)), ((-3, 5), (-1, 5)), ((5, 3), (7, 5)),
]


def test_many_fillings_solve_to_geometric_shapes():
    solved = []
    for (a, b), (c, d) in _PAIRS:
        try:
            t = assemble_filled(reduce(a, b), reduce(c, d))
            shapes = solve_with_restarts(derive_equations(t))
        except (ConstructionError, SolverError):
            continue
        assert shapes.is_geometric()
        assert 0 < volume(shapes) < UNFILLED_VOLUME
        solved.append((a, b, c, d))
    assert len(solved) >= 10, solved


def test_volume_grows_with_the_filling():
    volumes = []
    for q in range(3, 9):
        t = assemble_filled(reduce(1, q), reduce(1, q))
        volumes.append(volume(solve_with_restarts(derive_equations(t))))
    assert all(a < b for a, b in zip(volumes, volumes[1:])), volumes
    assert volumes[-1] < UNFILLED_VOLUME


def test_newton_converges_quadratically(thirds, thirds_shapes):
    eqs = derive_equations(thirds)
    rng = np.random.default_rng(3)
    noise = 1e-3 * (rng.standard_normal(thirds.tet_count) + 1j * rng.standard_normal(thirds.tet_count))
    start = ShapeAssignment(tuple(complex(z) for z in np.array(thirds_shapes.z) * np.exp(noise)))
    history = solve(eqs, start, tol=1e-13).residuals
    assert len(history) <= 7
    for before, after in zip(history, history[1:]):
        if after > 1e-13:
            assert after <= 1e3 * before ** 2, history
