import numpy as np
import pytest

from singlink.invariants import (
    ComponentInvariants,
    InvariantReport,
    ParityError,
    candidate_poles,
    gauss_linking,
    gauss_linking_integral,
    linking_matrix,
    normal_degree_branched,
    normal_degree_immersed,
    normal_degree_thm1,
    pushoff_crossing_number,
    singularity_E,
    smoothing_double_points,
    stereographic_projection,
    tangent_degree,
)
from singlink.braid import algebraic_crossing_number, stable_diagram
from singlink.diskspec import parse_config
from singlink.tracer import TAU, SampledLoop, trace_link


def circle_loop(points_of_t, label, n=1024, epsilon=1.0):
    t = TAU * np.arange(n) / n
    points = points_of_t(t)
    tangents = np.gradient(points, axis=0)
    return SampledLoop(epsilon, t, np.full(n, epsilon), points, tangents, label)


def coordinate_circles():
    zero = lambda t: 0 * t
    first = circle_loop(lambda t: np.stack([np.cos(t), np.sin(t), zero(t), zero(t)], axis=1), "first")
    second = circle_loop(lambda t: np.stack([zero(t), zero(t), np.cos(t), np.sin(t)], axis=1), "second")
    return first, second


def test_candidate_poles_are_unit_vectors():
    poles = candidate_poles()
    assert poles.shape == (24, 4)
    assert np.allclose(np.linalg.norm(poles, axis=1), 1.0)
    assert len({tuple(p) for p in poles}) == 24


def test_stereographic_projection_sends_the_antipode_to_the_origin():
    pole = np.array([0.0, 0.0, 0.0, 1.0])
    image = stereographic_projection(np.array([[0.0, 0.0, 0.0, -2.0], [2.0, 0.0, 0.0, 0.0]]), pole, 2.0)
    assert np.allclose(image[0], 0.0)
    assert np.linalg.norm(image[1]) == pytest.approx(2.0)


def test_complex_coordinate_circles_link_positively():
    first, second = coordinate_circles()
    assert gauss_linking(first, second) == 1
    assert gauss_linking(second, first) == 1


def test_reversing_one_circle_negates_the_linking_number():
    first, second = coordinate_circles()
    reversed_second = SampledLoop(
        1.0, second.t, second.r, second.points[::-1].copy(), -second.tangents[::-1].copy(), "reversed"
    )
    assert gauss_linking(first, reversed_second) == -1


def test_linking_number_does_not_depend_on_the_pole():
    first, second = coordinate_circles()
    values = set()
    for pole in candidate_poles():
        clearance = min(np.linalg.norm(first.points - pole, axis=1).min(), np.linalg.norm(second.points - pole, axis=1).min())
        if clearance > 0.3:
            values.add(gauss_linking(first, second, pole))
    assert values == {1}


def test_gauss_integral_in_r3():
    t = TAU * np.arange(2000) / 2000
    ring = np.stack([np.cos(t), np.sin(t), 0 * t], axis=1)
    hooked = np.stack([1 + np.cos(t), 0 * t, np.sin(t)], axis=1)
    far = ring + np.array([10.0, 0.0, 0.0])
    assert abs(gauss_linking_integral(ring, hooked)) == pytest.approx(1.0, abs=0.01)
    assert gauss_linking_integral(ring, hooked) == pytest.approx(gauss_linking_integral(hooked, ring), abs=1e-9)
    assert gauss_linking_integral(ring, far) == pytest.approx(0.0, abs=0.01)


def test_hopf_configuration_links_once(diagrams):
    loops, _ = diagrams["hopf"]
    lk = linking_matrix(loops)
    assert lk == [[0, 1], [1, 0]]


def test_mirrored_hopf_configuration_links_negatively(configs):
    mirrored = configs["hopf"].mirrored()
    loops = [trace_link(d, 1e-2, 1024) for d in mirrored]
    assert linking_matrix(loops) == [[0, -1], [-1, 0]]


@pytest.mark.parametrize("name, e", [("trefoil", 3), ("mirror", -3), ("regular", 0), ("iterated", 19)])
def test_pushoff_crossing_number(loops, name, e):
    assert pushoff_crossing_number(loops[name]) == e


def test_pushoff_is_epsilon_invariant(configs):
    d = configs["trefoil"].disks[0]
    assert pushoff_crossing_number(trace_link(d, 5e-3, 2048)) == 3


@pytest.mark.parametrize(
    "chi, orders, expected",
    [(2, [2], 4), (2, [], 2), (0, [1, 1], 2)],
)
def test_tangent_degree(chi, orders, expected):
    assert tangent_degree(chi, orders) == expected


@pytest.mark.parametrize("selfint, dbl, expected", [(0, 0, 0), (4, 1, 2), (-1, -2, 3)])
def test_normal_degree_immersed(selfint, dbl, expected):
    assert normal_degree_immersed(selfint, dbl) == expected


@pytest.mark.parametrize("selfint, E, expected", [(2, [2], 0), (9, [3], 6), (0, [], 0)])
def test_normal_degree_thm1(selfint, E, expected):
    assert normal_degree_thm1(selfint, E) == expected


def test_normal_degree_branched():
    assert normal_degree_branched(9, 0, [3]) == 6
    assert normal_degree_branched(9, 1, [3, -3]) == 7


@pytest.mark.parametrize("e, N, expected", [(3, 2, 1), (-3, 2, -2), (19, 4, 8), (0, 1, 0)])
def test_smoothing_double_points(e, N, expected):
    assert smoothing_double_points(e, N) == expected


def test_smoothing_double_points_parity():
    with pytest.raises(ParityError):
        smoothing_double_points(2, 2)


@pytest.mark.parametrize(
    "e_list, lk, E",
    [([3], [[0]], 3), ([-3], [[0]], -3), ([0, 0], [[0, 1], [1, 0]], 2), ([3, 0, 1], [[0, 1, 0], [1, 0, -2], [0, -2, 0]], 0)],
)
def test_singularity_E(e_list, lk, E):
    assert singularity_E(e_list, lk) == E


def test_report_recomputes_E_and_both_self_linking_conventions():
    component = ComponentInvariants("cusp", 2, 2, 1, 3, 3, (1, 1, 1))
    assert component.sl_paper == -1
    assert component.sl_std == 1
    report = InvariantReport(1e-2, [component], [[0]], 3)
    assert report.recomputed_E() == report.E
    assert report.passed
    assert report.integers() == {"components": [(2, 2, 1, 3, 3, (1, 1, 1))], "lk": [[0]], "E": 3}


@pytest.mark.slow
@pytest.mark.parametrize("w1, w2, e", [("z^3", "z^4", 8), ("z^3", "zbar^4", -8), ("z^2", "zbar^5", -5)])
def test_pushoff_matches_the_diagram_for_normal_forms(w1, w2, e):
    d = parse_config(f"disk d {{ w1 = {w1}; w2 = {w2}; }}").disks[0]
    loops, diagram = stable_diagram([d], 1e-2)
    assert algebraic_crossing_number(diagram, 0) == e
    assert pushoff_crossing_number(loops[0]) == e
