import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import jv

from endpoint_strichartz.errors import DomainError
from endpoint_strichartz.hankel import (
    FrequencyGrid, RadialGrid, RadialProfile, build_hankel, regular_gaussian_sum,
)
from endpoint_strichartz.harmonics import ModeField, decompose, recombine
from endpoint_strichartz.propagator import (
    OperatorCache, Trajectory, evolve_field, evolve_mode, export_csv,
    gaussian_closed_form, mass, pde_residual, regular_closed_form,
)

R, S = RadialGrid.uniform(512, 20.0), FrequencyGrid.uniform(512, 20.0)


def test_hankel_gaussian_pair_by_quadrature():
    # int J0(rs) exp(-alpha s^2) s ds = exp(-r^2/(4 alpha)) / (2 alpha), alpha = 1/2 - i
    alpha = 0.5 - 1j
    for r in (0.0, 0.7, 2.0, 4.5):
        re = quad(lambda s: jv(0, r * s) * (np.exp(-alpha * s * s) * s).real, 0, 12, limit=800)[0]
        im = quad(lambda s: jv(0, r * s) * (np.exp(-alpha * s * s) * s).imag, 0, 12, limit=800)[0]
        assert abs(re + 1j * im - np.exp(-r * r / (4 * alpha)) / (2 * alpha)) < 1e-9


def test_t0_identity_and_gaussian_closed_form():
    op = build_hankel(0.0, R, S)
    f = RadialProfile(np.exp(-R.nodes**2 / 2), R)
    tr = evolve_mode(f, 0.0, op, [0.0, 1.0])
    assert np.max(np.abs(tr.values[0] - f.values)) < 1e-6
    assert np.max(np.abs(tr.values[1] - gaussian_closed_form(R.nodes, 1.0))) < 1e-5


@pytest.mark.parametrize("nu", [0.5, 1.0, math.sqrt(13)])
def test_regular_closed_form(nu):
    op = build_hankel(nu, R, S)
    f = RadialProfile(regular_gaussian_sum(R.nodes, nu, [1.0], [1.0]), R)
    tr = evolve_mode(f, nu, op, [0.3, 1.7])
    for p, t in enumerate(tr.times):
        assert np.max(np.abs(tr.values[p] - regular_closed_form(R.nodes, t, nu))) < 1e-6


@settings(max_examples=15, deadline=None)
@given(nu=st.floats(0, 8), seed=st.integers(0, 2**31))
def test_unitarity_and_group_property(nu, seed):
    rng = np.random.default_rng(seed)
    op = build_hankel(nu, R, S)
    f = RadialProfile(regular_gaussian_sum(R.nodes, nu, rng.normal(size=3), rng.uniform(0.8, 1.5, 3)), R)
    t1, t2 = rng.uniform(0, 0.6, 2)
    tr = evolve_mode(f, nu, op, sorted({0.0, t1, t1 + t2}))
    m0 = mass(f, nu)
    assert all(abs(mass(tr.state(i), nu) - m0) <= 1e-8 * max(m0, 1e-300) for i in range(len(tr.times)))
    mid = evolve_mode(tr.state(list(tr.times).index(t1)), nu, op, [t2])
    assert np.max(np.abs(mid.values[0] - tr.values[-1])) <= 2e-6 * np.max(np.abs(f.values))


def test_mass_examples():
    fine = RadialGrid.uniform(4000, 20.0)
    assert mass(RadialProfile(np.zeros(fine.size), fine)) == 0.0
    assert abs(mass(RadialProfile(np.exp(-fine.nodes**2 / 2), fine)) - 0.5) < 1e-8
    lam = 2.0
    scaled = mass(RadialProfile(np.exp(-(lam * fine.nodes) ** 2 / 2), fine))
    assert abs(scaled - 0.5 / lam**2) < 1e-8


def test_field_decoupling_and_mass():
    a = 0.0
    cache = OperatorCache(R, S)
    g = regular_gaussian_sum(R.nodes, 1.0, [1.0], [1.0])
    mf = ModeField(a, {-1: RadialProfile(g, R), 1: RadialProfile(0.5j * g, R)}, 4)
    times = [0.0, 0.4, 1.1]
    tr = evolve_field(mf, cache, times)
    single = evolve_mode(mf.modes[1], 1.0, cache.get(1.0), times)
    assert np.array_equal(tr.values[1], single.values)
    m0 = sum(mass(p, 1.0) for p in mf.modes.values())
    for i in range(3):
        st_ = tr.state(i)
        assert abs(sum(mass(p, 1.0) for p in st_.modes.values()) - m0) < 1e-8
    # evolve then decompose == decompose then evolve
    field = recombine(mf, 16)
    tr2 = evolve_field(decompose(field, a, 4), cache, times)
    for k in (-1, 1):
        assert np.max(np.abs(tr2.values[k] - tr.values[k])) < 1e-12
    back = decompose(recombine(tr.state(2), 16), a, 4)
    assert np.max(np.abs(back.values(1) - tr.values[1][2])) < 1e-12


def test_pde_residual_convergence():
    nu = 1.0
    res = []
    for n, dt in ((512, 2e-3), (1024, 1e-3)):
        r, s = RadialGrid.uniform(n, 20.0), FrequencyGrid.uniform(n, 20.0)
        f = RadialProfile(regular_gaussian_sum(r.nodes, nu, [1.0], [1.0]), r)
        tr = evolve_mode(f, nu, build_hankel(nu, r, s), 0.5 + dt * np.arange(5))
        res.append(pde_residual(tr)[0])
    assert res[1] < 5e-3
    assert res[0] / res[1] >= 3.5


def test_pde_residual_trivia():
    z = Trajectory(np.arange(4) * 0.1, R, np.zeros((4, R.size), dtype=complex), 1.0, 0)
    assert pde_residual(z) == {0: 0.0}
    with pytest.raises(DomainError):
        pde_residual(Trajectory([0, 0.1, 0.3], R, np.zeros((3, R.size)), 1.0, 0))
    with pytest.raises(DomainError):
        pde_residual(Trajectory([0, 0.1], R, np.zeros((2, R.size)), 1.0, 0))


def test_export_csv(tmp_path):
    r, s = RadialGrid.uniform(8, 4.0), FrequencyGrid.uniform(8, 4.0)
    f = RadialProfile(np.exp(-r.nodes**2), r)
    tr = evolve_mode(f, 0.0, build_hankel(0.0, r, s), [0.0, 0.5])
    path = tmp_path / "t.csv"
    export_csv(tr, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,r,k,re,im" and len(lines) == 1 + 2 * 8
    assert float(lines[-1].split(",")[0]) == 0.5
