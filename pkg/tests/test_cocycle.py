import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypshadow.cocycle import (
    chart_norms_batch,
    chart_orbit,
    chart_radius,
    cocycle_product,
    cocycle_window,
    coordinate_change,
    estimate_holder,
    in_block,
    lyapunov_exponents,
    lyapunov_inner_product,
    oseledec_splitting,
    pesin_block,
    spectrum_from_values,
)
from hypshadow.errors import DivergentSeries, EmptyBlock, SingularFactor
from hypshadow.mapmodel import MapModel, OrbitWindow, builtin_map, window_from_orbit

ORACLE = (math.log(2 + math.sqrt(2)), math.log(2 - math.sqrt(2)))
PERTURBED = builtin_map("det2-perturbed")
PSPEC = lyapunov_exponents(PERTURBED, [0.1, 0.2], 10_000)


def test_exponents_oracle_linear(det2):
    spec = lyapunov_exponents(det2, [0.1, 0.2], 10_000)
    assert spec.raw == pytest.approx(ORACLE, abs=1e-6)
    assert spec.hyperbolic and spec.unstable_dim == 1
    assert spec.lam == pytest.approx(-ORACLE[1], abs=1e-6)


def test_exponents_cat():
    spec = lyapunov_exponents(builtin_map("cat"), [0.3, 0.1], 5000)
    g = (3 + math.sqrt(5)) / 2
    assert spec.raw == pytest.approx([math.log(g), -math.log(g)], abs=1e-6)


def test_exponents_perturbed_sum_close_to_log_det(det2p):
    spec = lyapunov_exponents(det2p, [0.1, 0.2], 20_000)
    assert spec.hyperbolic
    assert abs(spec.raw.sum() - math.log(2)) < 0.01


def test_identity_not_hyperbolic(identity):
    spec = lyapunov_exponents(identity, [0.3, 0.4], 1000)
    assert not spec.hyperbolic
    assert spec.lam is None
    assert spec.multiplicities.tolist() == [2]


def test_spectrum_clustering_and_roundtrip():
    spec = spectrum_from_values([1.0, 1.01, -0.5])
    assert spec.multiplicities.tolist() == [2, 1]
    back = type(spec).from_dict(spec.to_dict())
    assert back.lam == pytest.approx(spec.lam)


@pytest.fixture(scope="module")
def perturbed_window(det2p):
    orb = det2p.iterate([0.21, 0.37], 700)
    return cocycle_window(det2p, window_from_orbit(orb, 350, 300))


@settings(max_examples=40, deadline=None)
@given(st.integers(-100, 50), st.integers(0, 25), st.integers(0, 25))
def test_cocycle_composition_law(perturbed_window, start, k, m):
    cw = perturbed_window
    whole = cocycle_product(cw, start, m + k)
    split = cocycle_product(cw, start + k, m) @ cocycle_product(cw, start, k)
    assert np.allclose(whole, split, rtol=1e-9, atol=1e-9 * np.abs(whole).max())


@settings(max_examples=20, deadline=None)
@given(st.integers(-50, 50), st.integers(1, 8))
def test_cocycle_inverse(perturbed_window, start, m):
    cw = perturbed_window
    prod = cocycle_product(cw, start - m, m) @ cocycle_product(cw, start, -m)
    assert np.allclose(prod, np.eye(2), atol=1e-8)


def test_singular_factor():
    f = MapModel(np.array([[1, 1], [1, 1]]))
    cw = cocycle_window(f, OrbitWindow(np.zeros((5, 2))))
    with pytest.raises(SingularFactor):
        cocycle_product(cw, 1, -1)


def test_splitting_invariance(perturbed_window):
    frame = oseledec_splitting(perturbed_window)
    assert frame.du == 1
    assert frame.residual < 1e-10
    assert frame.angles.min() > 0.3


def test_forms_recursive_match_truncated(perturbed_window, det2p):
    cw = perturbed_window
    frame = oseledec_splitting(cw)
    spec = PSPEC
    rec = lyapunov_inner_product(cw, frame, spec.lam, 0.1)
    tr = lyapunov_inner_product(cw, frame, spec.lam, 0.1, horizon=150)
    ok = tr.valid & rec.valid
    assert ok.sum() > 100
    rel = np.abs(rec.Gs[ok] - tr.Gs[ok]) / np.abs(rec.Gs[ok])
    assert rel.max() < 1e-7


def test_short_window_diverges(det2p):
    orb = det2p.iterate([0.1, 0.2], 80)
    cw = cocycle_window(det2p, window_from_orbit(orb, 40, 30))
    spec = PSPEC
    with pytest.raises(DivergentSeries):
        lyapunov_inner_product(cw, oseledec_splitting(cw), spec.lam, 0.1, horizon=30)


def test_linear_chart_is_constant(det2):
    spec = lyapunov_exponents(det2, [0.1, 0.2], 2000)
    chart = chart_orbit(det2, det2.iterate([0.3, 0.1], 400), spec, 0.1)
    assert np.ptp(chart.norms) < 1e-6 * chart.K
    # blocks are diagonal with the eigenvalues
    assert np.allclose(np.abs(np.diagonal(chart.blocks[0])), [2 + math.sqrt(2), 2 - math.sqrt(2)])


def _typical_orbit(seed, n):
    # random start plus burn-in; exact periodic points are not typical
    x0 = np.random.default_rng(seed).random(2)
    return PERTURBED.iterate(x0, n + 100)[100:]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.05, 0.1, 0.2]))
def test_chart_block_bounds(seed, eta):
    f, spec = PERTURBED, PSPEC
    chart = chart_orbit(f, _typical_orbit(seed, 600), spec, eta)
    co, nr = chart.block_bounds()
    lam = spec.lam
    assert np.all(co >= math.exp(lam - eta) * (1 - 1e-9))
    assert np.all(nr <= math.exp(-lam + eta) * (1 + 1e-9))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.05, 0.1, 0.2]))
def test_tempered_radius_ratio(seed, eta):
    f, spec = PERTURBED, PSPEC
    chart = chart_orbit(f, _typical_orbit(seed, 600), spec, eta)
    xi = chart.xi
    ratio = xi[1:] / xi[:-1]
    assert np.all(ratio <= math.exp(eta) * (1 + 1e-12))
    assert np.all(ratio >= math.exp(-eta) * (1 - 1e-12))
    assert np.all(xi <= 0.5)


def test_chart_radius_linear_is_capped(det2):
    spec = lyapunov_exponents(det2, [0.1, 0.2], 2000)
    chart = chart_orbit(det2, det2.iterate([0.3, 0.1], 300), spec, 0.1)
    assert np.all(chart_radius(chart, det2.holder) == 0.5)


def test_coordinate_change_offset(perturbed_window, det2p):
    cw = perturbed_window
    frame = oseledec_splitting(cw)
    spec = PSPEC
    chart = coordinate_change(lyapunov_inner_product(cw, frame, spec.lam, 0.1), frame, cw)
    assert chart.offset <= 0 < chart.offset + len(chart)


def test_batch_norms_match_chart_orbit(det2p):
    spec = PSPEC
    orb = det2p.iterate([0.4, 0.7], 500)
    chart = chart_orbit(det2p, orb, spec, 0.1)
    norms, valid = chart_norms_batch(det2p, orb[None], spec, 0.1)
    sl = slice(chart.offset, chart.offset + len(chart))
    assert valid[0, sl].all()
    assert np.allclose(norms[0, sl], chart.norms, rtol=1e-10)


def test_in_block():
    norms = np.array([3.0, 2.0, 1.5, 2.0, 3.0])
    assert in_block(norms, 2, 1.5, math.log(2))
    assert not in_block(norms, 2, 1.4, math.log(2))


def test_pesin_block(det2p, identity):
    spec = PSPEC
    orb = det2p.iterate([0.3, 0.6], 3000)
    windows = [window_from_orbit(orb, c, 250) for c in range(300, 2700, 200)]
    kept = pesin_block(det2p, windows, 0.1, 10.0, spec)
    assert len(kept) == len(windows)
    with pytest.raises(EmptyBlock):
        pesin_block(det2p, windows, 0.1, 1.01, spec)
    with pytest.raises(EmptyBlock):
        pesin_block(identity, [OrbitWindow(np.zeros((401, 2)) + 0.1)], 0.1, 10.0)


def test_estimate_holder_close_to_analytic(det2p):
    alpha, L = estimate_holder(det2p)
    assert alpha == 1.0
    assert det2p.holder[1] <= L <= 2.1 * det2p.holder[1]
