import math

import numpy as np
import pytest

from polypath.algebra import Rng, random_unit_complex, vec_inf_norm
from polypath.errors import DimensionMismatch, StartPointInvalid
from polypath.parser import parse_polynomial
from polypath.polysys import PolySystem
from polypath.tracker import (
    ParameterPathHomotopy,
    PathStatus,
    TrackerConfig,
    _predict,
    homotopy_eval,
    straight_line_homotopy,
    track_path,
)
from polypath.zerodim import total_degree_start


def _sys(texts, variables, params=()):
    return PolySystem(variables,
                      [parse_polynomial(t, variables, params) for t in texts],
                      params)


GAMMA = 0.6 + 0.8j


def test_homotopy_endpoint_identities(circles):
    start = total_degree_start(circles).start_system
    h = straight_line_homotopy(circles, start, GAMMA)
    rng = Rng(2)
    for _ in range(100):
        z = np.asarray(rng.unit_complex(2)) * 1.5
        v1, _, _ = homotopy_eval(h, z, 1.0)
        expect1 = GAMMA * start.evaluate(z)
        assert vec_inf_norm(v1 - expect1) <= 1e-12 * (1.0 + vec_inf_norm(expect1))
        v0, _, _ = homotopy_eval(h, z, 0.0)
        expect0 = circles.evaluate(z)
        assert vec_inf_norm(v0 - expect0) <= 1e-12 * (1.0 + vec_inf_norm(expect0))


def test_homotopy_t_derivative_formula(circles):
    start = total_degree_start(circles).start_system
    h = straight_line_homotopy(circles, start, GAMMA)
    rng = Rng(3)
    z = np.asarray(rng.unit_complex(2))
    _, _, dt = homotopy_eval(h, z, 0.37)
    assert vec_inf_norm(dt - (GAMMA * start.evaluate(z) - circles.evaluate(z))) <= 1e-14


def test_homotopy_t_derivative_finite_difference(circles):
    start = total_degree_start(circles).start_system
    h = straight_line_homotopy(circles, start, GAMMA)
    rng = Rng(4)
    eps = 1e-6
    for _ in range(10):
        z = np.asarray(rng.unit_complex(2))
        t = float(rng.uniform(0.1, 0.9))
        _, _, dt = homotopy_eval(h, z, t)
        fd = (h.eval(z, t + eps)[0] - h.eval(z, t - eps)[0]) / (2 * eps)
        assert vec_inf_norm(fd - dt) <= 1e-6 * (1.0 + vec_inf_norm(dt))


def test_homotopy_requires_matching_shapes(circles):
    other = _sys(["x^2 - 1"], ["x"])
    with pytest.raises(DimensionMismatch):
        straight_line_homotopy(circles, other, GAMMA)


def test_parameter_path_endpoints(family):
    p0 = np.array([1.0 + 0.5j, -0.3 + 1.0j, 0.9 - 0.2j])
    p1 = np.array([1.0, 1.0, 1.0], dtype=complex)
    h = ParameterPathHomotopy(family, p0, p1)
    z = np.array([0.3 - 0.1j, 0.7 + 0.2j])
    v0, _, _ = homotopy_eval(h, z, 0.0)
    assert vec_inf_norm(v0 - family.specialize(p1).evaluate(z)) <= 1e-14
    v1, _, _ = homotopy_eval(h, z, 1.0)
    assert vec_inf_norm(v1 - family.specialize(p0).evaluate(z)) <= 1e-14


def test_rk4_predictor_exact_on_linear_path():
    # H = (1-t)(x-1) + t(x-2) has the exact path x(t) = 1 + t
    f = _sys(["x - 1"], ["x"])
    g = _sys(["x - 2"], ["x"])
    h = straight_line_homotopy(f, g, 1.0)
    z = np.array([2.0 + 0.0j])
    predicted = _predict(h, z, 1.0, -0.5, "rk4")
    assert abs(predicted[0] - 1.5) <= 1e-12


def test_identity_homotopy_is_stationary():
    f = _sys(["x^2 - 1", "y^3 - 1"], ["x", "y"])
    h = straight_line_homotopy(f, f, GAMMA)
    res = track_path(h, np.array([1.0, 1.0], dtype=complex))
    assert res.status is PathStatus.SUCCESS
    assert vec_inf_norm(res.endpoint - np.array([1.0, 1.0])) <= 1e-10


def test_univariate_square_root_paths():
    # identity target/start pair with a twist: endpoints stay +-1
    f = _sys(["x^2 - 1"], ["x"])
    h = straight_line_homotopy(f, f, random_unit_complex(Rng(6)))
    for s in (1.0, -1.0):
        res = track_path(h, np.array([s], dtype=complex))
        assert res.status is PathStatus.SUCCESS
        assert abs(res.endpoint[0] - s) <= 1e-10


def test_circle_pair_paths(circles):
    start = total_degree_start(circles)
    h = straight_line_homotopy(circles, start.start_system, random_unit_complex(Rng(7)))
    results = [track_path(h, p) for p in start.start_points]
    assert len(results) == 4
    finite = [r for r in results if r.status is PathStatus.SUCCESS]
    expected = [np.array([0.5, math.sqrt(3) / 2]), np.array([0.5, -math.sqrt(3) / 2])]
    found = set()
    for r in finite:
        for i, e in enumerate(expected):
            if vec_inf_norm(r.endpoint - e) <= 1e-5:
                found.add(i)
    assert found == {0, 1}
    # every one of the four paths is accounted for
    assert all(isinstance(r.status, PathStatus) for r in results)


def test_success_invariants(circles):
    start = total_degree_start(circles)
    h = straight_line_homotopy(circles, start.start_system, random_unit_complex(Rng(8)))
    for p in start.start_points:
        r = track_path(h, p)
        if r.status is PathStatus.SUCCESS:
            fres = vec_inf_norm(circles.evaluate(r.endpoint))
            assert fres <= 1e-8 * (1.0 + vec_inf_norm(r.endpoint))
            assert r.last_t <= 1e-3
            # the endgame schedule leaves lastT = 0.1 * 2^-k
            k = math.log2(0.1 / r.last_t)
            assert abs(k - round(k)) <= 1e-9
            assert r.max_precision_bits == 53


def test_double_root_endgame_cycle_two():
    # H(x,t) = x^2 - t, the closed-form path x = sqrt(t)
    f = _sys(["x^2"], ["x"])
    g = _sys(["x^2 - 1"], ["x"])
    h = straight_line_homotopy(f, g, 1.0)
    for s in (1.0, -1.0):
        res = track_path(h, np.array([s], dtype=complex))
        assert res.status is PathStatus.SUCCESS
        assert abs(res.endpoint[0]) <= 1e-6
        assert res.cycle_number == 2


def test_start_point_must_solve_start_system(circles):
    start = total_degree_start(circles)
    h = straight_line_homotopy(circles, start.start_system, GAMMA)
    with pytest.raises(StartPointInvalid):
        track_path(h, np.array([2.0, 2.0], dtype=complex))


def test_determinism_bitwise(circles):
    start = total_degree_start(circles)
    h = straight_line_homotopy(circles, start.start_system, GAMMA)
    a = track_path(h, start.start_points[0])
    b = track_path(h, start.start_points[0])
    assert a.status == b.status
    assert np.array_equal(a.endpoint, b.endpoint)
    assert a.last_t == b.last_t
    assert a.newton_residual == b.newton_residual
    assert a.function_residual == b.function_residual
    assert a.steps_taken == b.steps_taken


def test_euler_predictor_option(circles):
    start = total_degree_start(circles)
    h = straight_line_homotopy(circles, start.start_system, random_unit_complex(Rng(7)))
    cfg = TrackerConfig(predictor="euler")
    finite = [track_path(h, p, cfg) for p in start.start_points]
    endpoints = [r.endpoint for r in finite if r.status is PathStatus.SUCCESS]
    expected = [np.array([0.5, math.sqrt(3) / 2]), np.array([0.5, -math.sqrt(3) / 2])]
    hits = {i for z in endpoints for i, e in enumerate(expected)
            if vec_inf_norm(z - e) <= 1e-6}
    assert hits == {0, 1}


def test_config_validation():
    with pytest.raises(ValueError):
        TrackerConfig(min_step=0.5, max_step=0.1)
    with pytest.raises(ValueError):
        TrackerConfig(predictor="leapfrog")


def test_max_steps_is_reported(circles):
    start = total_degree_start(circles)
    h = straight_line_homotopy(circles, start.start_system, GAMMA)
    cfg = TrackerConfig(max_steps=3)
    res = track_path(h, start.start_points[0], cfg)
    assert res.status is PathStatus.MAX_STEPS


def test_all_paths_diverge_for_infeasible_system():
    # x = 0 contradicts x*y = 1, so both Bezout paths leave every compact set
    f = _sys(["x*y - 1", "x"], ["x", "y"])
    start = total_degree_start(f)
    h = straight_line_homotopy(f, start.start_system, random_unit_complex(Rng(10)))
    cfg = TrackerConfig(infinity_threshold=1e3)
    statuses = {track_path(h, p, cfg).status for p in start.start_points}
    assert PathStatus.SUCCESS not in statuses
    assert statuses <= {PathStatus.AT_INFINITY, PathStatus.STEP_FAILURE}


def test_gamma_trick_over_many_seeds(circles):
    # no unit-modulus gamma in 100 seeded draws hits the bad measure-zero set
    start = total_degree_start(circles)
    expected = [np.array([0.5, math.sqrt(3) / 2]), np.array([0.5, -math.sqrt(3) / 2])]
    for seed in range(100):
        gamma = random_unit_complex(Rng(seed))
        h = straight_line_homotopy(circles, start.start_system, gamma)
        finite = []
        for p in start.start_points:
            r = track_path(h, p)
            if r.status is PathStatus.SUCCESS:
                finite.append(r.endpoint)
        hits = {i for z in finite for i, e in enumerate(expected)
                if vec_inf_norm(z - e) <= 1e-6}
        assert hits == {0, 1}, f"seed {seed} lost a root"
