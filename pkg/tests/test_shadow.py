import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypshadow.cocycle import lyapunov_exponents
from hypshadow.errors import EpsilonTooLarge, InvalidConstants, OffsetTooLarge
from hypshadow.mapmodel import builtin_map, torus_dist
from hypshadow.shadow import (
    PseudoOrbit,
    SequenceProblem,
    chart_padding,
    chart_pseudo_orbit,
    check_uniqueness_conditions,
    concatenate_segments,
    jump_pseudo_orbit,
    period_multipliers,
    polish_periodic,
    shadow_periodic,
    shadow_pseudo_orbit,
    shadowing_constants,
    solve_sequence,
    true_orbit_pseudo,
)

from oracles import direct_solve, random_problem


def test_constants_oracle():
    c = shadowing_constants(2, 0.5, 0.1, 0.3)
    assert (c.N1, c.L, c.d0) == (6.0, 15.0, 0.02)


def test_constants_invalid():
    with pytest.raises(InvalidConstants):
        shadowing_constants(2, 0.5, 0.2, 0.3)
    with pytest.raises(ValueError):
        shadowing_constants(2, 1.0, 0.1, 0.3)


@settings(max_examples=50)
@given(st.floats(1, 5), st.floats(0.05, 0.95), st.floats(0, 0.5), st.floats(0.01, 1))
def test_constants_identities(N, lam, kappa, Delta):
    try:
        c = shadowing_constants(N, lam, kappa, Delta)
    except InvalidConstants:
        assert kappa * N * (1 + lam) / (1 - lam) >= 1 - 1e-12
        return
    assert c.N1 == pytest.approx(N * (1 + lam) / (1 - lam))
    assert c.L == pytest.approx(c.N1 / (1 - kappa * c.N1))
    assert c.d0 * c.L == pytest.approx(Delta)
    assert c.L >= c.N1


def test_uniqueness_report():
    assert check_uniqueness_conditions(0.5, 1.0, 0.05).ok
    assert not check_uniqueness_conditions(0.5, 1.0, 0.3).ok


@pytest.mark.parametrize("cyclic", [False, True])
@pytest.mark.parametrize("dims", [(2, 1), (3, 1), (3, 2)])
def test_linear_solver_matches_direct(cyclic, dims):
    d, du = dims
    rng = np.random.default_rng(7)
    prob = random_problem(rng, 300, cyclic=cyclic, du=du, d=d)
    res = solve_sequence(prob)
    ref = direct_solve(prob)
    assert np.max(np.abs(res.points - ref)) < 1e-12
    assert res.iterations <= 2
    assert res.max_residual < 1e-13


def test_offset_too_large():
    rng = np.random.default_rng(1)
    prob = random_problem(rng, 20)
    prob.offsets *= 10
    with pytest.raises(OffsetTooLarge):
        solve_sequence(prob)


def test_block_diagonal_required():
    c = shadowing_constants(1, 0.5, 0, 0.3)
    with pytest.raises(ValueError):
        SequenceProblem(np.ones((3, 2, 2)), np.zeros((3, 2)), 1, c)


def test_uniqueness_random_initializations():
    rng = np.random.default_rng(2024)
    kappa0 = 0.05
    assert check_uniqueness_conditions(0.5, 1.0, kappa0).ok
    for trial in range(100):
        prob = random_problem(rng, 60, kappa0=kappa0, cyclic=bool(trial % 2))
        d = float(np.max(np.linalg.norm(prob.offsets, axis=1)))
        r = prob.constants.L * d
        a = solve_sequence(prob, initial=rng.uniform(-r, r, (prob.n_nodes, 2)))
        b = solve_sequence(prob, initial=rng.uniform(-r, r, (prob.n_nodes, 2)))
        assert np.max(np.abs(a.points - b.points)) < 1e-9


def test_pseudo_orbit_text_roundtrip(det2p):
    p = jump_pseudo_orbit(det2p, [0.1, 0.2], 50, [10, 30], 1e-4)
    q = PseudoOrbit.from_text(p.to_text())
    assert np.array_equal(p.points, q.points)
    assert list(q.starts) == [0, 10, 30]
    assert q.jump_indices().tolist() == [9, 29]
    assert p.epsilon(det2p) == pytest.approx(1e-4, rel=1e-6)
    c = concatenate_segments(det2p, [[0.1, 0.2], [0.3, 0.4]], [5, 5])
    c2 = PseudoOrbit.from_text(c.to_text())
    assert c2.cyclic and list(c2.starts) == [0, 5]


def test_chart_padding_grows_as_eta_shrinks():
    assert chart_padding(0.05) > chart_padding(0.1) > chart_padding(0.2)
    assert chart_padding(0.1) >= math.log(1e8) / 0.2


def test_shadow_true_orbit_is_itself(det2p):
    spec = lyapunov_exponents(det2p, [0.1, 0.2], 10_000)
    p = true_orbit_pseudo(det2p, [0.3, 0.7], 300)
    res = shadow_pseudo_orbit(det2p, p, chart_pseudo_orbit(det2p, p, spec, 0.1), certify=False)
    assert res.distances.max() < 1e-12


def test_shadow_perturbed_jumps(det2p):
    spec = lyapunov_exponents(det2p, [0.1, 0.2], 10_000)
    p = jump_pseudo_orbit(det2p, [0.1, 0.2], 2000, [500, 1200], 1e-6, seed=1)
    res = shadow_pseudo_orbit(det2p, p, chart_pseudo_orbit(det2p, p, spec, 0.1))
    assert res.certified
    assert res.distances.max() <= res.C * res.epsilon
    assert res.max_residual < 1e-10
    # the correction is localised around the jumps
    assert res.distances[1000] < 1e-9


def test_large_jumps_not_certified(det2p):
    spec = lyapunov_exponents(det2p, [0.1, 0.2], 10_000)
    p = jump_pseudo_orbit(det2p, [0.1, 0.2], 600, [300], 0.05, seed=3)
    charts = chart_pseudo_orbit(det2p, p, spec, 0.1)
    with pytest.raises(EpsilonTooLarge):
        shadow_pseudo_orbit(det2p, p, charts)
    res = shadow_pseudo_orbit(det2p, p, charts, certify=False)
    assert not res.certified
    assert res.max_residual < 1e-10


def test_fixed_point_multipliers(det2p):
    y, nr, _ = polish_periodic(det2p, np.array([[0.01, -0.01]]))
    assert torus_dist(y[0], np.zeros(2)) < 1e-12
    mult = np.abs(period_multipliers(det2p, y))
    assert mult == pytest.approx([2.05 + math.sqrt(2), 2.05 - math.sqrt(2)], rel=1e-10)


def test_shadow_periodic_two_segments(det2p):
    spec = lyapunov_exponents(det2p, [0.1, 0.2], 10_000)
    # period-2 orbit of the linear map, perturbed pieces of length 1
    cyc = concatenate_segments(det2p, [[0.2, 0.4], [0.2, 0.6]], [1, 1])
    orb = shadow_periodic(det2p, cyc, chart_pseudo_orbit(det2p, cyc, spec, 0.1), certify=False)
    assert orb.period == 2
    assert orb.residual < 1e-12
    assert np.all(np.abs(np.abs(orb.multipliers) - 1) > 0.1)
