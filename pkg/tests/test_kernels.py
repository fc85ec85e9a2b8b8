import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import jv

from endpoint_strichartz.errors import CoverageError, DomainError
from endpoint_strichartz.kernels import (
    TimeSignal, apply_t_operator, build_cutoffs, dyadic_project, dyadic_psi,
    kernel_product, kernel_sample, log2_slope, m_piece, middle_uniformity_scan,
    operator_norm_scan, phi0_bound, phi0_l1, phi_j_bound, phi_j_l1, smoothstep,
    verify_mj_amplitude,
)


def total_theta(fam, eta):
    return sum(fam.theta(p, eta) for p in fam.pieces)


@pytest.mark.parametrize("nu", [0.25, 0.5, 1.0, 1.1, 2.5, math.sqrt(13), 8.0, 30.0])
def test_partition_and_supports(nu):
    fam = build_cutoffs(nu, 14)
    rng = np.random.default_rng(1)
    eta = rng.uniform(0, 2.0**fam.j_max, 1000)
    assert np.max(np.abs(total_theta(fam, eta) - 1.0)) < 1e-12
    grid = np.linspace(0, 2.0 ** (fam.j_max + 1), 200001)
    for p in fam.pieces:
        th = fam.theta(p, grid)
        assert th.min() >= 0 and th.max() <= 1
        lo, hi = fam.support(p)
        assert np.all(th[(grid >= hi) | ((grid <= lo) & (lo > 0))] == 0)
        if isinstance(p, int) and p > fam.j_first:
            assert (lo, hi) == (2.0 ** (p - 1), 2.0 ** (p + 1))
    assert fam.support("mid") == (nu / 2, 2 * nu)
    assert fam.support("low")[1] == nu / math.sqrt(2)
    assert 2.0 ** (fam.j_min - 1) >= 2 * max(nu, 1.0) - 1e-12


def test_cutoff_examples():
    fam = build_cutoffs(3.0, 10)
    nu = 3.0
    assert fam.theta("low", nu / math.sqrt(2) + 0.01 * nu) == 0
    assert fam.theta("mid", nu / 4) == 0 and fam.theta("mid", 3 * nu) == 0
    eta = np.linspace(0, 2.0**10, 3000)
    assert np.max(np.abs(sum(m_piece(fam, p, eta) for p in fam.pieces) - jv(nu, eta))) < 1e-10
    assert m_piece(fam, "low", 2.5) == 0.0
    assert m_piece(fam, 7, 3 * 2**7) == 0.0
    with pytest.raises(DomainError):
        build_cutoffs(3.0, 2)
    with pytest.raises(DomainError):
        build_cutoffs(0.0, 5)
    assert smoothstep(0.5) == 0.5


def test_kernel_scaling_evenness_and_quadrature_oracle():
    fam = build_cutoffs(1.0, 8)
    eta = np.linspace(0.0, 40.0, 81)
    base = kernel_sample(fam, "low", 1.0, eta).values.real
    for r in (0.5, 2.0):
        scaled = kernel_sample(fam, "low", r, eta).values.real
        ref = kernel_sample(fam, "low", 1.0, eta / r**2).values.real / r**2
        assert np.max(np.abs(scaled - ref)) <= 1e-6 * np.max(np.abs(ref))
    ks = kernel_sample(fam, "low", 1.0, np.concatenate([-eta, eta]))
    assert np.max(np.abs(ks.values[:81] - ks.values[81:])) < 1e-10 and ks.imag_residue < 1e-10
    # independent oracle: adaptive quadrature of the y-integral
    y1 = (1 / math.sqrt(2)) ** 2
    f = lambda y, e: m_piece(fam, "low", math.sqrt(y)) * math.cos(e * y)
    for e in (0.0, 3.0, 17.5):
        ref = quad(f, 0, y1, args=(e,), limit=400, epsabs=1e-13)[0]
        assert abs(kernel_sample(fam, "low", 1.0, [e]).values[0].real - ref) < 1e-8


def test_shell_kernel_scaling():
    fam = build_cutoffs(2.0, 9)
    eta = np.linspace(0.0, 0.2, 41)
    r = 2.0
    scaled = kernel_sample(fam, 6, r, eta).values.real
    ref = kernel_sample(fam, 6, 1.0, eta / r**2).values.real / r**2
    assert np.max(np.abs(scaled - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_phi0_examples():
    assert abs(phi0_bound(1.0, 1.0, 1.0) - 2**-1.5) < 1e-15
    assert phi0_bound(5.0, 0.0, 1.0, 1.0) == 1.0 and phi0_bound(0.5, 0.0) == 1.0
    l1 = quad(lambda e: phi0_bound(1.0, e), -np.inf, np.inf)[0]
    assert abs(l1 - 4.0) < 1e-8 and phi0_l1(1.0) == 4.0
    with pytest.raises(DomainError):
        phi0_bound(0.0, 1.0)


def test_phi0_domination_small_range():
    # ratio |K0|/phi0 stays bounded on a short eta range for a few orders
    for nu in (0.5, 2.0, 5.0):
        fam = build_cutoffs(nu, math.ceil(math.log2(4 * max(nu, 1))))
        eta = np.linspace(0, 50, 101)
        k = np.abs(kernel_sample(fam, "low", 1.0, eta).values)
        assert np.max(k / phi0_bound(nu, eta)) < 2.0


def test_phi_j_examples():
    assert phi_j_bound(3, 2.0**-6) == 8.0
    assert phi_j_bound(3, 2.0**-4) == 4.0
    js = list(range(4, 13))
    l1 = [phi_j_l1(j) for j in js]
    num = [2 * quad(lambda s: phi_j_bound(j, s), 0, 100, points=[2.0 ** (-2 * j), 40 * 2.0**-j], limit=200)[0]
           for j in (4, 8)]
    assert abs(num[0] - l1[0]) < 1e-6 * l1[0] and abs(num[1] - l1[4]) < 1e-6 * l1[4]
    consts = [v * 2 ** (j / 2) for v, j in zip(l1, js)]
    assert max(consts) / min(consts) < 1.1
    assert abs(log2_slope(js, l1) + 0.5) < 0.15


def test_kernel_product_support_and_scaling():
    fam = build_cutoffs(2.0, 9)
    s = np.linspace(0, 0.05, 11)
    assert np.all(kernel_product(fam, 6, 1.0, 4.5, s) == 0)
    assert np.all(kernel_product(fam, 6, 1.0, 0.2, s) == 0)
    a, alpha = 1.5, 1.3
    lhs = kernel_product(fam, 6, a, alpha * a, s).real
    rhs = kernel_product(fam, 6, 1.0, alpha, s / a**2).real / a**2
    assert np.max(np.abs(lhs - rhs)) <= 1e-6 * np.max(np.abs(rhs))


def test_mj_amplitude():
    fam = build_cutoffs(2.0, 12)
    vals = [verify_mj_amplitude(fam, j)["sup_scaled"] for j in range(6, 13)]
    assert max(vals) / min(vals) < 1.5
    other = verify_mj_amplitude(build_cutoffs(10.0, 12), 8)["sup_scaled"]
    assert 0.5 < other / vals[2] < 2.0


def make_signal(seed, p=1024, dt=0.25):
    rng = np.random.default_rng(seed)
    xi = 2 * np.pi * np.fft.fftfreq(p, dt)
    spec = (rng.normal(size=p) + 1j * rng.normal(size=p)) * np.exp(-((np.abs(xi) - 3) ** 2)) * (np.abs(xi) < 6)
    return TimeSignal.from_spectrum(spec, dt)


def test_time_signal_parseval():
    g = make_signal(0)
    assert abs(g.energy() - g.spectral_energy()) < 1e-12 * g.energy()
    g2 = TimeSignal(g.values, g.dt, t0=3.7)
    assert np.allclose(TimeSignal.from_spectrum(g2.spectrum, g2.dt, g2.t0).values, g.values, atol=1e-12)


def test_t_operator_support_partition_and_convolution():
    fam = build_cutoffs(2.0, 8)
    g = make_signal(1)
    r = 3.0
    # disjoint support: shell 8 needs r sqrt|xi| > 128, impossible below Nyquist
    # spectra round-trip through the FFT, so 'zero' means rounding level
    assert np.max(np.abs(apply_t_operator(fam, 8, 40.0, g, check_coverage=False).values)) < 1e-15 * np.max(np.abs(g.values))
    total = sum(apply_t_operator(fam, p, r, g, check_coverage=False).values for p in fam.pieces)
    full = TimeSignal.from_spectrum(jv(2.0, r * np.sqrt(np.abs(g.xi))) * g.spectrum, g.dt).values
    assert np.max(np.abs(total - full)) < 1e-8 * np.max(np.abs(full))
    # convolution form T g = (1/pi) K * g on a periodic grid
    p = g.size
    eta = g.dt * np.arange(-p // 2, p // 2)
    k = kernel_sample(fam, "mid", r, eta).values.real
    kper = np.roll(k, -(p // 2))  # index m <-> lag m dt (mod p)
    conv = g.dt / np.pi * np.fft.ifft(np.fft.fft(kper) * np.fft.fft(g.values))
    direct = apply_t_operator(fam, "mid", r, g).values
    assert np.max(np.abs(conv - direct)) < 1e-4 * np.max(np.abs(direct))
    with pytest.raises(CoverageError):
        apply_t_operator(fam, "low", 0.05, g)


def test_dyadic_projection():
    g = make_signal(2, p=4096, dt=0.05)
    ns = range(-4, 5)
    parts = sum(dyadic_project(g, n).spectrum for n in ns)
    band = (np.abs(g.xi) > 2.0 ** (ns[0])) & (np.abs(g.xi) < 2.0 ** ns[-1])
    assert np.max(np.abs(parts - g.spectrum)[band]) < 1e-10 * np.max(np.abs(g.spectrum))
    xi = g.xi
    assert np.all(dyadic_psi(1, xi) * dyadic_psi(3, xi) == 0)
    # psi_n is 1 only at |xi| = 2^n; a spectrum inside shell 1 is reproduced by shells 0..2
    one = TimeSignal.from_spectrum(g.spectrum * (np.abs(xi) >= 1.9) * (np.abs(xi) <= 2.1), g.dt)
    near = sum(dyadic_project(one, n).values for n in (0, 1, 2))
    assert np.allclose(near, one.values, atol=1e-12)
    assert np.max(np.abs(dyadic_project(one, 3).values)) < 1e-15 and dyadic_psi(1, 2.0) == 1.0
    with pytest.raises(CoverageError):
        dyadic_project(g, 7)


@settings(max_examples=30, deadline=None)
@given(nu=st.floats(0.2, 40), x=st.floats(0, 1e4))
def test_partition_property(nu, x):
    fam = build_cutoffs(nu, 14)
    assert abs(total_theta(fam, min(x, 2.0**14)) - 1.0) < 1e-12


def test_small_scans_run():
    scan = operator_norm_scan(2.0, [4, 5], seed=3, n_random=4, per_octave=16)
    assert [r["j"] for r in scan["rows"]] == [4, 5] and all(r["R"] > 0 for r in scan["rows"])
    mid = middle_uniformity_scan(2.5, ns=[-1, 0, 1], seed=3, n_random=4, p=512, per_octave=16)
    assert mid["spread"] < 2.0
