import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import jv

from endpoint_strichartz.errors import (
    AliasingError, DomainError, GridMismatchError, ResolutionError,
)
from endpoint_strichartz.hankel import (
    FrequencyGrid, HankelOperator, RadialGrid, RadialProfile, apply_a_nu,
    band_tail_fraction, build_hankel, involution_error, plancherel_error,
    regular_gaussian_sum, regular_gaussian_sum_transform, transform,
)

ORDERS = [0.0, 0.5, 1.0, 2.5, 5.0, math.sqrt(4 + 9)]


def grids(n=512, r_max=20.0, s_max=20.0):
    return RadialGrid.uniform(n, r_max), FrequencyGrid.uniform(n, s_max)


def random_regular(rng, nu, r, terms=4):
    amps = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    widths = rng.uniform(0.5, 2.0, size=terms)
    return amps, widths, regular_gaussian_sum(r, nu, amps, widths)


def test_grid_invariants():
    g = RadialGrid.uniform(100, 10.0)
    assert g.nodes[-1] < g.r_max and np.all(np.diff(g.nodes) > 0) and np.all(g.weights > 0)
    # int exp(-r^2) r dr = 1/2
    assert abs(g.integrate(np.exp(-g.nodes**2)) - 0.5) < 1e-8
    gl = RadialGrid.gauss_legendre(200, 10.0)
    assert abs(gl.integrate(np.exp(-gl.nodes**2)) - 0.5) < 1e-12
    with pytest.raises(DomainError):
        RadialGrid.uniform(0, 1.0)


def test_resolution_error():
    r, _ = grids(64, 20.0)
    with pytest.raises(ResolutionError):
        build_hankel(0, r, FrequencyGrid.uniform(64, 20.0))


def test_gaussian_involution_order_zero():
    r, s = grids()
    op = build_hankel(0, r, s)
    f = np.exp(-r.nodes**2 / 2)
    assert involution_error(op, f) < 1e-6


def test_gaussian_self_reciprocal_against_quadrature():
    r, s = grids()
    op = build_hankel(0, r, s)
    F = op.forward(np.exp(-r.nodes**2 / 2)).real
    idx = [0, 20, 60, 120, 200]
    for j in idx:
        sj = s.nodes[j]
        ref = quad(lambda x: jv(0, sj * x) * math.exp(-x * x / 2) * x, 0, 40, limit=400)[0]
        assert abs(F[j] - ref) < 1e-7
    assert np.max(np.abs(F - np.exp(-s.nodes**2 / 2))) < 1e-7


def test_zero_and_delta():
    r, s = grids(128, 10.0, 10.0)
    op = build_hankel(1.5, r, s)
    assert np.all(op.forward(np.zeros(128)) == 0)
    e = np.zeros(128)
    e[40] = 1.0
    col = op.forward(e)
    assert np.allclose(col, op.forward_weights[40] * jv(1.5, s.nodes * r.nodes[40]), atol=1e-14)


@pytest.mark.parametrize("nu", ORDERS)
def test_involution_and_plancherel(nu):
    rng = np.random.default_rng(int(100 * nu))
    r, s = grids()
    op = build_hankel(nu, r, s)
    for _ in range(5):
        amps, widths, f = random_regular(rng, nu, r.nodes)
        assert band_tail_fraction(op, op.forward(f)) < 1e-8
        assert involution_error(op, f) < 1e-6
        assert plancherel_error(op, f) < 1e-6
        exact = regular_gaussian_sum_transform(s.nodes, nu, amps, widths)
        assert np.max(np.abs(op.forward(f) - exact)) < 1e-6 * np.max(np.abs(exact))


@settings(max_examples=25, deadline=None)
@given(nu=st.floats(0, 12), seed=st.integers(0, 2**31))
def test_involution_property(nu, seed):
    rng = np.random.default_rng(seed)
    r, s = grids(384, 18.0, 18.0)
    op = build_hankel(nu, r, s)
    _, _, f = random_regular(rng, nu, r.nodes, terms=3)
    assert involution_error(op, f) < 1e-6


def test_transform_profiles_and_mismatch():
    r, s = grids(256, 16.0, 16.0)
    op = build_hankel(2.0, r, s)
    p = RadialProfile(regular_gaussian_sum(r.nodes, 2.0, [1.0], [1.0]), r)
    spec = transform(op, p, "forward", check_band=True)
    back = transform(op, spec, "inverse")
    assert spec.grid is op.fgrid and back.grid is op.rgrid
    assert np.max(np.abs(back.values - p.values)) < 1e-6
    with pytest.raises(GridMismatchError):
        transform(op, spec, "forward")
    with pytest.raises(GridMismatchError):
        RadialProfile(np.zeros(3), r)
    wide = RadialProfile(regular_gaussian_sum(r.nodes, 2.0, [1.0], [0.15]), r)
    with pytest.raises(AliasingError):
        transform(op, wide, "forward", check_band=True)


def test_kernel_shared_under_scaling():
    r1, s1 = grids(256, 16.0, 16.0)
    r2, s2 = RadialGrid.uniform(256, 32.0), FrequencyGrid.uniform(256, 8.0)
    assert build_hankel(3.0, r1, s1).kernel is build_hankel(3.0, r2, s2).kernel


def test_serialization_roundtrip(tmp_path):
    r, s = grids(128, 12.0, 12.0)
    op = build_hankel(math.sqrt(13), r, s)
    path = tmp_path / "op.bin"
    op.save(path)
    back = HankelOperator.load(path)
    assert back.order == op.order and back.rgrid.same_as(op.rgrid) and back.fgrid.same_as(op.fgrid)
    assert np.array_equal(back.kernel, op.kernel)
    path.write_bytes(b"garbage")
    with pytest.raises(GridMismatchError):
        HankelOperator.load(path)


def _diag_error(nu, n):
    r, s = grids(n)
    op = build_hankel(nu, r, s)
    f = regular_gaussian_sum(r.nodes, nu, [1.0, 0.5], [1.0, 0.7])
    lhs = op.forward(apply_a_nu(RadialProfile(f, r), nu).values)
    rhs = s.nodes**2 * op.forward(f)
    w = s.weights
    return math.sqrt(np.sum(w * np.abs(lhs - rhs) ** 2) / np.sum(w * np.abs(rhs) ** 2))


@pytest.mark.parametrize("nu", [0.0, 0.25, 0.5, 1.0, 2.5, 5.0, math.sqrt(13)])
def test_diagonalization(nu):
    e1, e2 = _diag_error(nu, 512), _diag_error(nu, 1024)
    assert e2 < 1e-3
    assert math.log2(e1 / e2) >= 1.8


def test_a_nu_eigenrelation_and_trivia():
    r = RadialGrid.uniform(2000, 60.0)
    nu, s0 = 2.0, 3.0
    cut = np.exp(-((r.nodes - 30) / 10) ** 8)
    phi = jv(nu, s0 * r.nodes) * cut
    out = apply_a_nu(RadialProfile(phi, r), nu).values
    mid = (r.nodes > 25) & (r.nodes < 35)
    assert np.max(np.abs(out[mid] - s0**2 * phi[mid])) < 1e-3 * s0**2
    assert np.all(apply_a_nu(np.zeros(10), 1.0, RadialGrid.uniform(10, 1.0)).values == 0)
    with pytest.raises(DomainError):
        apply_a_nu(np.zeros(4), 1.0, RadialGrid.uniform(4, 1.0))
