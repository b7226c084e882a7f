import math

import numpy as np
import pytest

import lightcone_bohm.lightcone as lc
from lightcone_bohm.errors import (
    DegenerateConfigurationError,
    DomainError,
    NodeError,
    NumericalIntegrityError,
    RetardationError,
)
from lightcone_bohm.lightcone import (
    FinalData,
    Velocity,
    WorldLine,
    future_crossing,
    hyperplane_velocity,
    integrate_backward,
    integrate_hyperplane,
    lightcone_velocity,
    max_deviation,
    self_consistent_final_velocities,
    worldline_at,
)
from lightcone_bohm.multitime import MultiTimeWavefunction, PlaneWaveFactor, gaussian_packet_modes
from lightcone_bohm.spinor_algebra import minkowski_dot
from scipy.optimize import brentq


def straight_line(x0, v, t0=0.0, t1=1.0, n=11, n_particles=2):
    ts = np.linspace(t0, t1, n)
    u = np.array([1.0, v]) / math.sqrt(1 - v * v)
    pos = np.column_stack([ts, x0 + v * (ts - t0)])
    return WorldLine.from_samples(pos, np.tile(u, (n, 1)), delays=np.full((n, n_particles), np.nan))


def ray_only(q, u, n_particles=2):
    line = WorldLine(len(q), n_particles)
    line.prepend(q, u)
    line.set_ray(q, u)
    return line


def plane(p, mass=1.0):
    return PlaneWaveFactor.from_modes([(1.0, [p])], mass, "1+1")


def packet(center, p0, width, mass=1.0):
    return PlaneWaveFactor.from_modes(gaussian_packet_modes([center], [p0], width), mass, "1+1")


def single(f):
    return MultiTimeWavefunction.build([(1.0, [f])], "1+1")


# world lines

def test_worldline_sample_identity():
    line = straight_line(1.0, 0.3)
    q, u = worldline_at(line, 0.4)
    np.testing.assert_array_equal(q, line.positions[4])
    np.testing.assert_array_equal(u, line.velocities[4])


def test_worldline_reproduces_lines_and_cubics():
    line = straight_line(-2.0, -0.6, n=5)
    for t in (0.01, 0.33, 0.999):
        q, u = worldline_at(line, t)
        assert q[1] == pytest.approx(-2.0 - 0.6 * t, abs=1e-14)
        np.testing.assert_allclose(u, np.array([1.0, -0.6]) / 0.8, atol=1e-13)
    ts = np.linspace(0.0, 3.0, 7)
    xs = 0.01 * ts ** 3
    vs = 0.03 * ts ** 2
    us = np.column_stack([np.ones_like(vs), vs]) / np.sqrt(1 - vs ** 2)[:, None]
    cubic = WorldLine.from_samples(np.column_stack([ts, xs]), us)
    for t in (0.2, 1.7, 2.95):
        assert cubic.spatial_at(t)[0] == pytest.approx(0.01 * t ** 3, abs=1e-14)


def test_worldline_ray_and_domain():
    line = straight_line(0.0, 0.0, t1=1.0)
    line.set_ray([1.0, 0.0], np.array([1.0, 0.5]) / math.sqrt(0.75))
    q, u = worldline_at(line, 3.0)
    np.testing.assert_allclose(q, [3.0, 1.0])
    np.testing.assert_allclose(u, np.array([1.0, 0.5]) / math.sqrt(0.75))
    with pytest.raises(DomainError):
        worldline_at(line, -0.1)


def test_worldline_prepend_order():
    line = ray_only(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    line.prepend([0.5, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        line.prepend([0.7, 0.0], [1.0, 0.0])
    for k in range(100):
        line.prepend([0.4 - 0.01 * k, 0.0], [1.0, 0.0])
    assert len(line) == 102
    assert line.first_time == pytest.approx(0.4 - 0.99)
    assert np.all(np.diff(line.times) > 0)


# crossings

def test_crossing_of_resting_line():
    line = ray_only(np.array([0.0, 2.0]), np.array([1.0, 0.0]))
    c = future_crossing(line, [0.0, 0.0])
    np.testing.assert_allclose(c.point, [2.0, 2.0], atol=1e-14)
    np.testing.assert_allclose(c.velocity, [1.0, 0.0])
    assert c.delay == pytest.approx(2.0)


@pytest.mark.parametrize("sampled", [False, True])
def test_crossing_of_moving_line(sampled):
    u = np.array([1.0, -0.5]) / math.sqrt(0.75)
    line = straight_line(3.0, -0.5, t0=0.0, t1=5.0, n=51) if sampled else ray_only(np.array([0.0, 3.0]), u)
    c = future_crossing(line, [0.0, 0.0])
    np.testing.assert_allclose(c.point, [2.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(c.velocity, u, atol=1e-12)
    d = c.point - np.array([0.0, 0.0])
    assert abs(minkowski_dot(d, d)) < 1e-12 * 2.0 ** 2


def test_crossing_through_query_point_is_degenerate():
    line = straight_line(0.0, 0.2)
    with pytest.raises(DegenerateConfigurationError):
        future_crossing(line, line.positions[3])


def test_crossing_before_known_data_is_refused():
    line = straight_line(5.0, 0.0, t0=10.0, t1=11.0)
    # the light cone of (0, 0) meets x = 5 at t = 5, before the first sample at t = 10
    with pytest.raises(RetardationError):
        future_crossing(line, [0.0, 0.0])


def test_crossing_on_curved_samples():
    ts = np.linspace(0.0, 6.0, 61)
    xs = 4.0 + 0.3 * np.sin(ts)
    vs = 0.3 * np.cos(ts)
    us = np.column_stack([np.ones_like(vs), vs]) / np.sqrt(1 - vs ** 2)[:, None]
    line = WorldLine.from_samples(np.column_stack([ts, xs]), us)
    q = np.array([0.5, 0.2])
    c = future_crossing(line, q, step_scale=0.1)
    d = c.point - q
    assert c.point[0] > q[0]
    assert abs(minkowski_dot(d, d)) < 1e-12 * max(0.1, c.delay) ** 2
    # compare with a dense root of the exact curve
    t_exact = brentq(lambda t: (t - q[0]) - abs(4.0 + 0.3 * math.sin(t) - q[1]), q[0], 6.0, xtol=1e-14)
    assert c.point[0] == pytest.approx(t_exact, abs=1e-5)


# laws of motion

@pytest.mark.parametrize("p", [0.0, 0.5, -1.3])
def test_lightcone_velocity_single_plane_wave(p):
    psi = single(plane(p))
    res = lightcone_velocity(0, [0.3, 1.0], [None], psi)
    e = math.sqrt(p * p + 1)
    np.testing.assert_allclose(res.u, [e, p], atol=1e-14)
    assert res.kind == "timelike"
    hyp = hyperplane_velocity(0, [0.3, 1.0], [[1.0]], psi)
    np.testing.assert_allclose(hyp.u, res.u, atol=1e-15)


def test_product_rest_state_velocity():
    rest = plane(0.0)
    psi = MultiTimeWavefunction.build([(1.0, [rest, rest])], "1+1")
    lines = [None, ray_only(np.array([0.0, 3.0]), np.array([1.0, 0.0]))]
    res = lightcone_velocity(0, [0.0, 0.0], lines, psi)
    np.testing.assert_allclose(res.u, [1.0, 0.0], atol=1e-15)
    assert res.delays[1] == pytest.approx(3.0)
    hyp = hyperplane_velocity(0, [0.0, 0.0], [[0.0], [3.0]], psi)
    np.testing.assert_allclose(hyp.u, [1.0, 0.0], atol=1e-15)


def test_product_state_velocity_ignores_companion():
    a, b = packet(-2.0, 0.3, 1.0), packet(2.0, -0.2, 1.5)
    psi = MultiTimeWavefunction.build([(1.0, [a, b])], "1+1")
    own = lightcone_velocity(0, [0.4, -1.7], [None], single(a)).u
    for x2, v2 in ((2.0, 0.0), (5.0, 0.7), (-0.5, -0.9)):
        u2 = np.array([1.0, v2]) / math.sqrt(1 - v2 * v2)
        lines = [None, ray_only(np.array([0.4, x2]), u2)]
        np.testing.assert_allclose(lightcone_velocity(0, [0.4, -1.7], lines, psi).u, own, atol=1e-13)


def test_node_is_reported():
    f = plane(0.4)
    psi = MultiTimeWavefunction.build([(1.0, [f, f]), (-1.0, [f, f])], "1+1")
    lines = [None, ray_only(np.array([0.0, 3.0]), np.array([1.0, 0.0]))]
    with pytest.raises(NodeError) as info:
        lightcone_velocity(0, [0.0, 0.0], lines, psi)
    assert len(info.value.configuration) == 2


def test_self_consistent_final_velocities_are_fixed_points():
    a, b = packet(-2.0, 0.3, 1.0), packet(2.0, -0.2, 1.5)
    psi = MultiTimeWavefunction.build([(1.0, [a, b]), (0.7j, [b, a])], "1+1")
    events = np.array([[5.0, -1.0], [5.0, 1.5]])
    u = self_consistent_final_velocities(psi, events)
    lines = [ray_only(e, v) for e, v in zip(events, u)]
    for i in range(2):
        np.testing.assert_allclose(lightcone_velocity(i, events[i], lines, psi).u, u[i], atol=1e-12)


def test_final_data_validation():
    with pytest.raises(ValueError):
        FinalData([[1.0, 0.0]], [[1.0, 2.0]])
    with pytest.raises(ValueError):
        FinalData([[1.0, 0.0]], [[-1.0, 0.0]])
    with pytest.raises(ValueError):
        FinalData([[1.0, 0.0], [1.0, 2.0]], [[1.0, 0.0]])


# integrators

def test_zero_steps_keep_final_data():
    psi = single(plane(0.5))
    run = integrate_backward(psi, FinalData([[10.0, 1.0]]), 0.01, n_steps=0)
    assert len(run.lines[0]) == 1
    np.testing.assert_array_equal(run.lines[0].positions[0], [10.0, 1.0])
    lines = integrate_hyperplane(psi, 2.0, [[0.0]], 2.0, 0.1)
    assert len(lines[0]) == 1


def test_single_plane_wave_straight_line():
    p = 0.5
    e = math.sqrt(p * p + 1)
    psi = single(plane(p))
    run = integrate_backward(psi, FinalData([[10.0, 1.0]]), 0.01)
    line = run.lines[0]
    assert len(line) == 1001
    assert line.first_time == pytest.approx(0.0, abs=1e-12)
    exact = 1.0 + (p / e) * (line.times - 10.0)
    assert np.max(np.abs(line.spatial[:, 0] - exact)) < 1e-8
    hyp = integrate_hyperplane(psi, 10.0, [[1.0]], 0.0, 0.01)
    assert max_deviation(run.lines, hyp) < 1e-10


def test_rest_product_state_is_static():
    rest = plane(0.0)
    psi = MultiTimeWavefunction.build([(1.0, [rest, rest])], "1+1")
    lines = integrate_hyperplane(psi, 0.0, [[-1.0], [2.0]], 3.0, 0.1)
    for line, x0 in zip(lines, (-1.0, 2.0)):
        np.testing.assert_allclose(line.spatial[:, 0], x0, atol=1e-15)
        np.testing.assert_allclose(line.velocities, np.tile([1.0, 0.0], (len(line), 1)), atol=1e-15)
    run = integrate_backward(psi, FinalData([[3.0, -1.0], [3.0, 2.0]]), 0.1)
    for line, x0 in zip(run.lines, (-1.0, 2.0)):
        np.testing.assert_allclose(line.spatial[:, 0], x0, atol=1e-15)


def test_n1_lightcone_equals_hyperplane_for_packet():
    psi = single(packet(0.0, 0.4, 1.0))
    run = integrate_backward(psi, FinalData([[4.0, 1.2]]), 0.01)
    hyp = integrate_hyperplane(psi, 4.0, [[1.2]], 0.0, 0.01)
    assert max_deviation(run.lines, hyp) < 1e-10


def test_product_state_matches_single_particle_runs():
    a, b = packet(-3.0, 0.3, 1.0), packet(3.0, -0.2, 1.5)
    psi = MultiTimeWavefunction.build([(1.0, [a, b])], "1+1")
    final = np.array([[6.0, -1.2], [6.0, 2.1]])
    run = integrate_backward(psi, FinalData(final), 0.02)
    for i, f in enumerate((a, b)):
        one = integrate_backward(single(f), FinalData(final[i:i + 1]), 0.02)
        assert max_deviation([run.lines[i]], one.lines) < 1e-8


def test_rk4_convergence_order():
    psi = single(packet(0.0, 0.4, 1.0))
    final = FinalData([[4.0, 1.2]])
    h = 0.2
    ref = integrate_backward(psi, final, h / 4).lines
    times = np.linspace(0.0, 4.0, 5)
    e1 = max_deviation(integrate_backward(psi, final, h).lines, ref, times)
    e2 = max_deviation(integrate_backward(psi, final, h / 2).lines, ref, times)
    # with a quarter-step reference the ideal ratio is 16 * (255/256) / (15/16) = 17
    assert 12.0 < e1 / e2 < 20.0


def test_entangled_run_is_retarded_and_causal():
    a, b = packet(-3.0, 0.35, 2.0), packet(3.0, -0.3, 2.0)
    c, d = packet(-3.0, -0.25, 2.0), packet(3.0, 0.2, 2.0)
    psi = MultiTimeWavefunction.build([(1.0, [a, b]), (1j, [c, d])], "1+1")
    run = integrate_backward(psi, FinalData([[5.0, -2.5], [5.0, 2.0]]), 0.05)
    assert run.min_lookahead >= 0
    for line in run.lines:
        assert set(line.classes) <= {"timelike", "null"}
        assert np.all(np.abs(np.diff(line.spatial[:, 0])) <= np.diff(line.times) + 1e-9)
        assert np.nanmin(line.delays) > 0
    assert run.evaluations == 2 * (4 * 100 + 1)


def test_per_particle_final_times():
    a, b = packet(-3.0, 0.3, 1.0), packet(3.0, -0.2, 1.5)
    psi = MultiTimeWavefunction.build([(1.0, [a, b])], "1+1")
    run = integrate_backward(psi, FinalData([[6.0, -1.2], [5.93, 2.1]]), 0.05, t_end=1.0)
    assert run.lines[0].last_time == 6.0
    assert run.lines[1].last_time == 5.93
    # after the partial first step both particles share the grid 6 - k h
    np.testing.assert_allclose(run.lines[1].times[:-1], run.lines[0].times[:-2], atol=1e-12)
    for i, f in enumerate((a, b)):
        one = integrate_backward(single(f), FinalData([run.lines[i].positions[-1]]), 0.05, t_end=1.0)
        assert max_deviation([run.lines[i]], one.lines) < 1e-5


def test_superluminal_chord_aborts(monkeypatch):
    psi = single(plane(0.0))

    def fake(i, q, lines, psi, step_scale=None):
        u = np.array([1.0, 2.0])
        return Velocity(u, -3.0, "timelike", np.full(1, np.nan), [q], 1.0, [])

    monkeypatch.setattr(lc, "lightcone_velocity", fake)
    with pytest.raises(NumericalIntegrityError, match="superluminal"):
        integrate_backward(psi, FinalData([[1.0, 0.0]], [[1.0, 0.0]]), 0.1)


def test_integrators_reject_bad_step():
    psi = single(plane(0.0))
    with pytest.raises(ValueError):
        integrate_backward(psi, FinalData([[1.0, 0.0]]), 0.0)
    with pytest.raises(ValueError):
        integrate_hyperplane(psi, 0.0, [[0.0]], 1.0, -0.1)
