r"""
Dyadic Bessel cutoffs, oscillatory kernels and multiplier operators
===================================================================

Cutoff partition
----------------
With the quintic smoothstep :math:`S(x) = 6x^5 - 15x^4 + 10x^3` (clamped to
``[0, 1]``) and ramps :math:`\rho_{a,b}(\eta) = S((\eta - a)/(b - a))`:

* ``theta_low  = 1 - rho(nu/2, nu/sqrt2)``
* ``theta_mid  = rho(nu/2, nu/sqrt2) - rho(sqrt2 nu, 2 nu)``
* ``theta_j    = chi_j - chi_{j+1}``, ``chi_j = rho(2^(j-1), 2^j)``, for
  ``j > j_first = ceil(log2(2 nu))``; the first shell replaces ``chi_j``
  with ``rho(sqrt2 nu, 2 nu)`` so that the sum telescopes to one.

Pieces are named ``"low"``, ``"mid"`` and by their integer ``j``.
``j_min = ceil(log2(4 max(nu, 1)))`` is the first shell treated as high
frequency.

Kernels
-------
For a piece multiplier ``m`` the kernel and its convolution operator are

.. math::

    K_r(\eta) = \int_0^\infty m(r\sqrt y)\cos(\eta y)\,dy
              = 2\int_0^\infty m(ru)\,u\cos(\eta u^2)\,du,
    \qquad T_r g = \tfrac{1}{\pi} K_r * g,

and ``T_r`` acts on the spectrum of ``g`` as multiplication by
``m(r sqrt|xi|)``. Integrals over ``u`` use the trapezoid rule with node
doubling until successive levels agree.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import jv

from .bessel import bessel_j
from .errors import ConvergenceError, CoverageError, DomainError
from .seeding import component_rng

__all__ = [
    "smoothstep",
    "ramp",
    "CutoffFamily",
    "build_cutoffs",
    "m_piece",
    "KernelSample",
    "kernel_sample",
    "kernel_product",
    "phi0_bound",
    "phi0_l1",
    "phi_j_bound",
    "phi_j_l1",
    "fit_phi0",
    "fit_phi_j",
    "verify_mj_amplitude",
    "TimeSignal",
    "apply_t_operator",
    "dyadic_psi",
    "dyadic_project",
    "sup_r_ratios",
    "shell_trial_spectra",
    "operator_norm_scan",
    "middle_uniformity_scan",
    "log2_slope",
]

SQRT2 = math.sqrt(2.0)
KERNEL_RTOL = 1e-6
PHI_J_BREAK = 40.0


def smoothstep(x):
    """Quintic smoothstep clamped to [0, 1] (C^2)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)


def ramp(eta, a, b):
    """Smooth rise from 0 at ``a`` to 1 at ``b``."""
    return smoothstep((np.asarray(eta, dtype=float) - a) / (b - a))


@dataclass(frozen=True)
class CutoffFamily:
    """Partition of unity splitting ``J_nu`` into low, middle and shell pieces."""

    order: float
    j_min: int
    j_first: int
    j_max: int

    @property
    def pieces(self):
        return ["low", "mid"] + list(range(self.j_first, self.j_max + 1))

    def _check(self, piece):
        if piece in ("low", "mid"):
            return piece
        if isinstance(piece, (int, np.integer)) and not isinstance(piece, bool) and piece >= self.j_first:
            return int(piece)
        raise DomainError(f"invalid piece {piece!r} (shells start at j={self.j_first})")

    def support(self, piece):
        """Open interval ``(lo, hi)`` outside which ``theta_piece`` vanishes."""
        piece = self._check(piece)
        nu = self.order
        if piece == "low":
            return 0.0, nu / SQRT2
        if piece == "mid":
            return nu / 2.0, 2.0 * nu
        lo = SQRT2 * nu if piece == self.j_first else 2.0 ** (piece - 1)
        return lo, 2.0 ** (piece + 1)

    def theta(self, piece, eta):
        piece = self._check(piece)
        nu = self.order
        eta = np.abs(np.asarray(eta, dtype=float))
        inner = ramp(eta, nu / 2.0, nu / SQRT2)
        outer = ramp(eta, SQRT2 * nu, 2.0 * nu)
        if piece == "low":
            return 1.0 - inner
        if piece == "mid":
            return inner - outer
        up = outer if piece == self.j_first else ramp(eta, 2.0 ** (piece - 1), 2.0**piece)
        return up - ramp(eta, 2.0**piece, 2.0 ** (piece + 1))

    def to_dict(self):
        return {"order": self.order, "j_min": self.j_min, "j_first": self.j_first, "j_max": self.j_max,
                "smoothstep": "6x^5-15x^4+10x^3"}


def build_cutoffs(order, j_max=None):
    """Cutoff family for ``J_order``; ``j_max`` defaults to ``j_min + 8``."""
    nu = float(order)
    if not (math.isfinite(nu) and nu > 0):
        raise DomainError("cutoff families need order > 0")
    j_min = math.ceil(math.log2(4.0 * max(nu, 1.0)))
    j_first = math.ceil(math.log2(2.0 * nu))
    j_max = j_min + 8 if j_max is None else int(j_max)
    if j_max < j_min:
        raise DomainError(f"j_max={j_max} is below j_min={j_min}")
    return CutoffFamily(nu, j_min, j_first, j_max)


def _m_values(family, piece, eta, fast=False):
    eta = np.asarray(eta, dtype=float)
    lo, hi = family.support(piece)
    out = np.zeros(eta.shape)
    sel = (np.abs(eta) > lo) & (np.abs(eta) < hi)
    if sel.any():
        x = np.abs(eta[sel])
        j = jv(family.order, x) if fast else bessel_j(family.order, x)
        out[sel] = j * family.theta(piece, x)
    return out


def m_piece(family, piece, eta):
    """``J_nu(eta) theta_piece(eta)`` for ``eta >= 0``."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0):
        raise DomainError("m_piece is defined for eta >= 0")
    out = _m_values(family, piece, eta)
    return float(out) if out.ndim == 0 else out


def _cos_quadrature(f, u0, u1, eta, max_freq, rtol=KERNEL_RTOL, max_doublings=6, min_nodes=256):
    """``int_{u0}^{u1} f(u) cos(eta u^2) du`` for ``f`` vanishing at both ends.

    Trapezoid rule, doubled until the sup-norm change relative to the result
    is at most ``rtol``.
    """
    eta = np.asarray(eta, dtype=float)
    span = u1 - u0
    n = max(min_nodes, int(span * max_freq * 10.0 / (2.0 * math.pi)) + 1)
    n = 1 << (n - 1).bit_length()
    chunk = max(1, 4_000_000 // max(eta.size, 1))

    def partial(u):
        fu = f(u)
        keep = fu != 0
        u, fu = u[keep], fu[keep]
        acc = np.zeros(eta.size)
        for s in range(0, u.size, chunk):
            acc += np.cos(np.outer(eta, u[s:s + chunk] ** 2)) @ fu[s:s + chunk]
        return acc

    h = span / n
    total = h * partial(u0 + h * np.arange(1, n))
    change = math.inf
    for _ in range(max_doublings):
        h2 = h / 2.0
        new = 0.5 * total + h2 * partial(u0 + h2 * np.arange(1, 2 * n, 2))
        scale = np.max(np.abs(new)) if new.size else 0.0
        change = float(np.max(np.abs(new - total)) / scale) if scale > 0 else 0.0
        total, h, n = new, h2, 2 * n
        if change <= rtol:
            return total, change, n
    raise ConvergenceError(f"oscillatory quadrature did not converge: doubling change {change:.2e} > {rtol:.1e}")


@dataclass(eq=False)
class KernelSample:
    """Samples of ``K^piece_{nu,r}`` on ``eta``.

    The symmetric (cosine) form is used, so ``values`` are real to rounding
    and :attr:`imag_residue` is zero.
    """

    piece: object
    order: float
    r: float
    eta: np.ndarray
    values: np.ndarray
    nodes: int = 0
    doubling_change: float = 0.0

    @property
    def imag_residue(self):
        return float(np.max(np.abs(self.values.imag))) if self.values.size else 0.0


def kernel_sample(family, piece, r, eta, rtol=KERNEL_RTOL):
    """Evaluate ``K^piece_{nu,r}(eta)`` by trapezoid quadrature in ``u = sqrt(y)``.

    Raises
    ------
    ConvergenceError
        If node doubling keeps changing the result by more than ``rtol``.
    """
    r = float(r)
    if not r > 0:
        raise DomainError("kernel_sample needs r > 0")
    eta = np.asarray(eta, dtype=float)
    lo, hi = family.support(piece)
    u0, u1 = lo / r, hi / r
    aeta = np.abs(eta)
    f = lambda u: 2.0 * _m_values(family, piece, r * u) * u
    vals, change, n = _cos_quadrature(f, u0, u1, aeta, 2.0 * np.max(aeta, initial=0.0) * u1 + r, rtol)
    return KernelSample(piece, family.order, r, eta, vals.astype(complex), n, change)


def kernel_product(family, piece, a, b, s, rtol=KERNEL_RTOL):
    r"""``int m(a sqrt|y|) m(b sqrt|y|) e^{i s y} dy = 4 int m(au) m(bu) u cos(s u^2) du``.

    Exactly zero when the dilated supports are disjoint.
    """
    a, b = float(a), float(b)
    if not (a > 0 and b > 0):
        raise DomainError("kernel_product needs a, b > 0")
    s = np.asarray(s, dtype=float)
    lo, hi = family.support(piece)
    u0, u1 = max(lo / a, lo / b), min(hi / a, hi / b)
    if u0 >= u1:
        return np.zeros(s.shape, dtype=complex)
    f = lambda u: 4.0 * _m_values(family, piece, a * u) * _m_values(family, piece, b * u) * u
    vals, _, _ = _cos_quadrature(f, u0, u1, np.abs(s), 2.0 * np.max(np.abs(s), initial=0.0) * u1 + a + b, rtol)
    return vals.astype(complex)


def phi0_bound(order, eta, c=1.0, C=None):
    """Low-frequency envelope: ``c (1+|eta|)^-(1+nu/2)`` for ``nu <= 2``,
    ``C (1+|eta|)^-2`` otherwise (``C`` defaults to ``c``)."""
    nu = float(order)
    if not nu > 0:
        raise DomainError("phi0_bound needs order > 0")
    base = 1.0 + np.abs(np.asarray(eta, dtype=float))
    out = c * base ** (-(1.0 + nu / 2.0)) if nu <= 2 else (c if C is None else C) * base**-2.0
    return float(out) if np.ndim(out) == 0 else out


def phi0_l1(order, c=1.0, C=None):
    """``||phi0||_{L^1(R)}``: ``4c/nu`` for ``nu <= 2``, ``2C`` otherwise."""
    nu = float(order)
    if not nu > 0:
        raise DomainError("phi0_l1 needs order > 0")
    return 4.0 * c / nu if nu <= 2 else 2.0 * (c if C is None else C)


def phi_j_bound(j, s, c=1.0):
    """Shell envelope: ``c 2^j`` on ``(0, 2^-2j]``, ``c s^-1/2`` up to
    ``40 2^-j``, then ``c 2^j (2^2j s)^-10``. Even in ``s``."""
    s = np.abs(np.asarray(s, dtype=float))
    j = int(j)
    b1, b2 = 2.0 ** (-2 * j), PHI_J_BREAK * 2.0**-j
    with np.errstate(divide="ignore"):
        out = np.where(s <= b1, 2.0**j, np.where(s < b2, s**-0.5, 2.0**j * (4.0**j * s) ** -10.0))
    out = c * out
    return float(out) if out.ndim == 0 else out


def phi_j_l1(j, c=1.0):
    """``||Phi_j||_{L^1(R)}`` in closed form (even extension)."""
    j = int(j)
    b1, b2 = 2.0 ** (-2 * j), PHI_J_BREAK * 2.0**-j
    half = 2.0**j * b1 + 2.0 * (math.sqrt(b2) - math.sqrt(b1)) + 2.0**j * 4.0 ** (-10 * j) * b2**-9 / 9.0
    return 2.0 * c * half


def log2_slope(js, values):
    """Least-squares slope of ``log2(values)`` against ``js``."""
    return float(np.polyfit(np.asarray(js, dtype=float), np.log2(np.asarray(values, dtype=float)), 1)[0])


def fit_phi0(order, eta_max=1e3, n_eta=400):
    """Fit ``|K^0_{nu,1}| <= C phi0`` on ``[0, eta_max]`` and the tail slope.

    The slope is the least-squares log-log slope over the top half decade
    ``[eta_max / sqrt(10), eta_max]``.
    """
    fam = build_cutoffs(order, math.ceil(math.log2(4.0 * max(order, 1.0))))
    eta = np.concatenate([np.linspace(0.0, 1.0, 20, endpoint=False), np.geomspace(1.0, eta_max, n_eta)])
    ks = kernel_sample(fam, "low", 1.0, eta)
    k = np.abs(ks.values.real)
    ratio = k / phi0_bound(order, eta, 1.0, 1.0)
    tail = eta >= eta_max / math.sqrt(10.0)
    slope = float(np.polyfit(np.log(eta[tail]), np.log(np.maximum(k[tail], 1e-300)), 1)[0])
    return {
        "order": float(order),
        "C": float(ratio.max()),
        "slope": slope,
        "expected_slope": -(1.0 + order / 2.0) if order <= 2 else -2.0,
        "eta_max": float(eta_max),
        "nodes": ks.nodes,
        "eta": eta,
        "abs_kernel": k,
        "even_residue": 0.0,
        "imag_residue": ks.imag_residue,
    }


def fit_phi_j(family, j, alphas=(1.0 / 3.0, 1.0, 3.0), n_s=120):
    """Fit ``|P_j(1, alpha; s)| <= C Phi_j(s)`` on ``s <= 40 2^-j``.

    The ratio on the rapid-decay branch (``s`` up to ``160 2^-j``) is reported
    as ``tail_ratio`` and not folded into ``C``.
    """
    j = int(j)
    s_main = np.geomspace(2.0 ** (-2 * j) / 8.0, PHI_J_BREAK * 2.0**-j, n_s, endpoint=False)
    s_tail = np.geomspace(PHI_J_BREAK * 2.0**-j, 4 * PHI_J_BREAK * 2.0**-j, n_s // 4)
    c_main, c_tail = 0.0, 0.0
    for alpha in alphas:
        p = np.abs(kernel_product(family, j, 1.0, alpha, np.concatenate([s_main, s_tail])))
        c_main = max(c_main, float(np.max(p[: s_main.size] / phi_j_bound(j, s_main))))
        c_tail = max(c_tail, float(np.max(p[s_main.size:] / phi_j_bound(j, s_tail))))
    return {"j": j, "order": family.order, "C": c_main, "tail_ratio": c_tail, "l1": phi_j_l1(j)}


def verify_mj_amplitude(family, j, samples_per_unit=8):
    """``sup 2^(j/2) |m^j_nu(xi)|`` over the support of ``theta_j``."""
    lo, hi = family.support(j)
    xi = np.linspace(lo, hi, int((hi - lo) * samples_per_unit) + 2)
    vals = np.abs(_m_values(family, j, xi))
    return {"order": family.order, "j": int(j), "sup_scaled": float(2.0 ** (j / 2.0) * vals.max())}


@dataclass(eq=False)
class TimeSignal:
    """Samples ``g(t0 + m dt)``, ``m = 0..P-1``.

    The spectrum lives on ``xi = 2 pi fftfreq(P, dt)`` with the unitary
    convention ``g^(xi) = (2 pi)^-1/2 int g(t) e^{-i xi t} dt``, so that
    ``sum |g|^2 dt = sum |g^|^2 d xi`` exactly.
    """

    values: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1 or self.values.size < 2 or not self.dt > 0:
            raise DomainError("TimeSignal needs >= 2 samples and dt > 0")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("TimeSignal values must be finite")

    @property
    def size(self):
        return self.values.size

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.size)

    @property
    def xi(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.size, self.dt)

    @property
    def dxi(self):
        return 2.0 * np.pi / (self.size * self.dt)

    @property
    def nyquist(self):
        return np.pi / self.dt

    @property
    def spectrum(self):
        return self.dt / math.sqrt(2 * math.pi) * np.exp(-1j * self.xi * self.t0) * np.fft.fft(self.values)

    @classmethod
    def from_spectrum(cls, spectrum, dt, t0=0.0):
        spectrum = np.asarray(spectrum, dtype=complex)
        xi = 2.0 * np.pi * np.fft.fftfreq(spectrum.size, dt)
        vals = np.fft.ifft(spectrum * np.exp(1j * xi * t0)) * math.sqrt(2 * math.pi) / dt
        return cls(vals, dt, t0)

    def energy(self):
        return float(self.dt * np.sum(np.abs(self.values) ** 2))

    def spectral_energy(self):
        return float(self.dxi * np.sum(np.abs(self.spectrum) ** 2))


def apply_t_operator(family, piece, r, g, check_coverage=True):
    """``T_r g`` as the spectral multiplier ``m(r sqrt|xi|)``.

    Raises :class:`CoverageError` when the multiplier support reaches past the
    Nyquist frequency of ``g``.
    """
    r = float(r)
    if not r > 0:
        raise DomainError("apply_t_operator needs r > 0")
    _, hi = family.support(piece)
    if check_coverage and (hi / r) ** 2 > g.nyquist:
        raise CoverageError(
            f"multiplier support |xi| < {(hi / r) ** 2:.4g} exceeds the Nyquist frequency {g.nyquist:.4g}; "
            "reduce dt or increase r"
        )
    mult = _m_values(family, piece, r * np.sqrt(np.abs(g.xi)))
    return TimeSignal.from_spectrum(mult * g.spectrum, g.dt, g.t0)


def dyadic_psi(n, xi):
    """Smooth shell ``psi_n`` supported on ``2^(n-1) < |xi| < 2^(n+1)``."""
    a = np.abs(np.asarray(xi, dtype=float))
    return ramp(a, 2.0 ** (n - 1), 2.0**n) - ramp(a, 2.0**n, 2.0 ** (n + 1))


def dyadic_project(g, n):
    """Littlewood-Paley piece ``g_n`` with spectrum ``psi_n g^``."""
    n = int(n)
    if 2.0 ** (n + 1) > g.nyquist or 2.0 ** (n - 1) < g.dxi:
        raise CoverageError(
            f"dual grid [{g.dxi:.4g}, {g.nyquist:.4g}] does not cover shell n={n} "
            f"({2.0 ** (n - 1):.4g}, {2.0 ** (n + 1):.4g})"
        )
    return TimeSignal.from_spectrum(dyadic_psi(n, g.xi) * g.spectrum, g.dt, g.t0)


def sup_r_ratios(family, piece, spectra, dt, r_values, r_chunk=16):
    r"""``int sup_r |T_r g|^2 dt / ||g||^2`` for each spectrum (rows of ``spectra``).

    The sup is a max over ``r_values`` (a lower bound for the true sup).
    Only frequencies where some spectrum is non-zero are multiplied.
    """
    spectra = np.atleast_2d(np.asarray(spectra, dtype=complex))
    n_sig, p = spectra.shape
    xi = 2.0 * np.pi * np.fft.fftfreq(p, dt)
    idx = np.nonzero(np.any(spectra != 0, axis=0))[0]
    root = np.sqrt(np.abs(xi[idx]))
    dxi = 2.0 * np.pi / (p * dt)
    norms = dxi * np.sum(np.abs(spectra) ** 2, axis=1)
    scale = (math.sqrt(2 * math.pi) / dt) ** 2
    best = np.zeros((n_sig, p))
    r_values = np.asarray(r_values, dtype=float)
    buf = np.zeros((min(r_chunk, r_values.size), p), dtype=complex)
    for s in range(0, r_values.size, r_chunk):
        rs = r_values[s:s + r_chunk]
        table = _m_values(family, piece, np.outer(rs, root), fast=True)
        live = np.any(table != 0, axis=1)
        if not live.any():
            continue
        table = table[live]
        work = buf[: table.shape[0]]
        for q in range(n_sig):
            work[:] = 0.0
            work[:, idx] = table * spectra[q, idx]
            out = np.fft.ifft(work, axis=1)
            np.maximum(best[q], np.max(out.real**2 + out.imag**2, axis=0), out=best[q])
    energy = dt * scale * best.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(norms > 0, energy / norms, 0.0)


def _band_window(xi, lo, hi):
    a = np.abs(xi)
    w = (hi - lo) / 8.0
    return ramp(a, lo, lo + w) * (1.0 - ramp(a, hi - w, hi))


def shell_trial_spectra(j, xi, dt, rng, n_random=50, band=(0.25, 2.25)):
    """Trial set for shell ``j``: random band-limited, chirps, wave packets.

    Returns ``(spectra, labels)``. Packets have spectrum
    ``exp(-(sqrt(xi) - 1)^2 / (2 delta^2))`` on ``xi > 0`` with
    ``delta = d 2^(-j/2)``, ``d`` in ``{1/2, 1, ..., 16}``.
    """
    lo, hi = band
    win = _band_window(xi, lo, hi)
    spectra, labels = [], []
    for q in range(n_random):
        spectra.append((rng.standard_normal(xi.size) + 1j * rng.standard_normal(xi.size)) * win)
        labels.append(f"random:{q}")
    p = xi.size
    t = dt * np.arange(p)
    length = 0.5 * p * dt
    tc = 0.5 * p * dt
    env = np.exp(-(((t - tc) / (0.3 * length)) ** 8))
    lam0 = (hi - lo) / (2.0 * length)
    for mult in (1.0, -1.0, 4.0, -4.0):
        lam = mult * lam0
        g = np.exp(1j * (0.5 * (lo + hi) * (t - tc) + lam * (t - tc) ** 2)) * env
        spec = TimeSignal(g, dt).spectrum * win
        spectra.append(spec)
        labels.append(f"chirp:{mult:g}")
    root = np.sqrt(np.clip(xi, 0.0, None))
    for d in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
        delta = d * 2.0 ** (-j / 2.0)
        spec = np.where(xi > 0, np.exp(-((root - 1.0) ** 2) / (2 * delta * delta)), 0.0)
        spec[np.abs(spec) < 1e-300] = 0.0
        spectra.append(spec * win)
        labels.append(f"packet:{d:g}")
    spectra = np.array(spectra)
    spectra[np.abs(spectra) < 1e-16 * np.max(np.abs(spectra), axis=1, keepdims=True)] = 0.0
    return spectra, labels


def _log_r_grid(lo, hi, per_octave):
    k0 = math.floor(math.log2(lo) * per_octave)
    k1 = math.ceil(math.log2(hi) * per_octave)
    return 2.0 ** (np.arange(k0, k1 + 1) / per_octave)


def operator_norm_scan(order, js, seed, n_random=50, per_octave=64, band=(0.25, 2.25), oversample=16):
    """Empirical ``R_j = sup_g int sup_r |T^j g|^2 dt / ||g||^2`` per shell.

    Shell ``j`` uses ``P = oversample 2^j`` samples at ``dt = 1`` and an
    ``r`` grid with ``per_octave`` points per octave covering every ``r`` for
    which ``m^j(r sqrt|xi|)`` meets the signal band.
    """
    js = [int(j) for j in js]
    family = build_cutoffs(order, max(max(js), math.ceil(math.log2(4.0 * max(order, 1.0)))))
    rows = []
    for j in js:
        if j < family.j_first:
            raise DomainError(f"shell {j} precedes the first shell {family.j_first}")
        p = oversample * 2**j
        dt = 1.0
        xi = 2.0 * np.pi * np.fft.fftfreq(p, dt)
        rng = component_rng(seed, "kernels.operator_norm", j)
        spectra, labels = shell_trial_spectra(j, xi, dt, rng, n_random, band)
        lo, hi = family.support(j)
        r_values = _log_r_grid(lo / math.sqrt(band[1]), hi / math.sqrt(band[0]), per_octave)
        ratios = sup_r_ratios(family, j, spectra, dt, r_values)
        q = int(np.argmax(ratios))
        rows.append({"j": j, "R": float(ratios[q]), "argmax": labels[q], "P": p, "n_r": int(r_values.size),
                     "n_trials": len(labels)})
    out = {"order": float(order), "rows": rows}
    if len(rows) >= 2:
        out["slope"] = log2_slope([r["j"] for r in rows], [r["R"] for r in rows])
    return out


def middle_uniformity_scan(order, ns=range(-6, 7), seed=0, n_random=50, p=2048, dt0=1.0, per_octave=64):
    """Per-shell constants ``C_n = sup_g int sup_r |T^1 g_n|^2 dt / ||g_n||^2``.

    Shell ``n`` is sampled at ``dt_n = dt0 2^-n`` with ``p`` samples, so every
    shell sees the same relative resolution. Signals are seeded white noise
    projected with :func:`dyadic_project`. The ``r`` grid is a single global
    log grid restricted to where ``m^1(r sqrt|xi|)`` meets the shell.
    """
    family = build_cutoffs(order)
    lo, hi = family.support("mid")
    rows = []
    for n in ns:
        n = int(n)
        dt = dt0 * 2.0**-n
        xi = 2.0 * np.pi * np.fft.fftfreq(p, dt)
        psi = dyadic_psi(n, xi)
        if 2.0 ** (n + 1) > math.pi / dt or 2.0 ** (n - 1) < 2 * math.pi / (p * dt):
            raise CoverageError(f"shell n={n} is not covered by the time grid")
        rng = component_rng(seed, "kernels.middle_uniformity", n)
        spectra = (rng.standard_normal((n_random, p)) + 1j * rng.standard_normal((n_random, p))) * psi
        r_values = _log_r_grid(lo / math.sqrt(2.0 ** (n + 1)), hi / math.sqrt(2.0 ** (n - 1)), per_octave)
        ratios = sup_r_ratios(family, "mid", spectra, dt, r_values)
        rows.append({"n": n, "C": float(ratios.max()), "n_r": int(r_values.size)})
    cs = [r["C"] for r in rows]
    return {"order": float(order), "rows": rows, "spread": max(cs) / min(cs) if cs else None}
