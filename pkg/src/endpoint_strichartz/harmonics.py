"""
Angular mode analysis and synthesis
===================================

A field on a polar grid ``f(r_i, theta_m)``, ``theta_m = 2 pi m / N_theta``,
is split into modes ``f(r, theta) = sum_k f_k(r) exp(i k theta)`` with
``|k| <= K`` by an FFT along ``theta``. With a dyadic angular grid and
``K < N_theta / 2`` analysis and synthesis are exact inverses.
"""

import csv
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import AliasingError, ConfigError, DomainError, GridMismatchError
from .hankel import RadialGrid, RadialProfile

__all__ = [
    "AngularField",
    "ModeField",
    "mode_order",
    "decompose",
    "recombine",
    "l_theta_norm",
    "field_energy",
    "profile_from_spec",
    "initial_data_from_spec",
    "read_grid_file",
]

ALIAS_TOL = 1e-8


def mode_order(a, k):
    """nu(k) = sqrt(a^2 + k^2)."""
    return math.sqrt(float(a) ** 2 + float(k) ** 2)


def _check_n_theta(n):
    n = int(n)
    if n < 4 or n & (n - 1):
        raise DomainError(f"N_theta must be a power of two >= 4, got {n}")
    return n


@dataclass(eq=False)
class AngularField:
    """Samples ``values[i, m] = f(r_i, 2 pi m / N_theta)``."""

    values: np.ndarray
    rgrid: RadialGrid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 or self.values.shape[0] != self.rgrid.size:
            raise GridMismatchError("angular field must have shape (N_r, N_theta)")
        _check_n_theta(self.values.shape[1])
        if not np.all(np.isfinite(self.values)):
            raise DomainError("angular field contains non-finite values")

    @property
    def n_theta(self):
        return self.values.shape[1]

    @property
    def thetas(self):
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta


@dataclass(eq=False)
class ModeField:
    """Modes ``k -> f_k`` for ``|k| <= K`` with potential strength ``a``.

    Missing modes are treated as zero. ``discarded_energy`` records the
    relative energy dropped by :func:`decompose`.
    """

    a: float
    modes: dict
    K: int
    discarded_energy: float = 0.0
    rgrid: RadialGrid = field(default=None)

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a >= 0):
            raise DomainError("potential strength a must be finite and >= 0")
        self.K = int(self.K)
        grids = [p.grid for p in self.modes.values()]
        if self.rgrid is None:
            if not grids:
                raise GridMismatchError("an empty ModeField needs an explicit rgrid")
            self.rgrid = grids[0]
        for k, p in self.modes.items():
            if abs(int(k)) > self.K:
                raise DomainError(f"mode {k} exceeds K={self.K}")
            if not p.grid.same_as(self.rgrid):
                raise GridMismatchError(f"mode {k} lives on a different grid")
        self.modes = {int(k): self.modes[k] for k in sorted(self.modes)}

    def order(self, k):
        return mode_order(self.a, k)

    def ks(self):
        return list(self.modes)

    def values(self, k):
        p = self.modes.get(int(k))
        return np.zeros(self.rgrid.size, dtype=complex) if p is None else p.values

    def matrix(self):
        """``(2K+1, N_r)`` array of mode samples ordered ``k = -K..K``."""
        return np.stack([self.values(k) for k in range(-self.K, self.K + 1)])


def decompose(fld, a, K=None, tol=ALIAS_TOL):
    """Fourier analysis in theta, keeping ``|k| <= K`` (default ``N_theta / 4``).

    Raises
    ------
    AliasingError
        If the discarded modes carry more than ``tol`` of the total energy.
    """
    n = fld.n_theta
    K = n // 4 if K is None else int(K)
    if K < 0 or K >= n // 2:
        raise DomainError(f"K must satisfy 0 <= K < N_theta/2 = {n // 2}")
    coef = np.fft.fft(fld.values, axis=1) / n
    w = fld.rgrid.weights
    energy = np.abs(coef) ** 2 * w[:, None]
    ks = np.fft.fftfreq(n, 1.0 / n).astype(int)
    keep = np.abs(ks) <= K
    total = energy.sum()
    dropped = float(energy[:, ~keep].sum() / total) if total > 0 else 0.0
    if dropped > tol:
        raise AliasingError(f"discarded angular tail carries {dropped:.3e} of the energy")
    modes = {int(k): RadialProfile(coef[:, j].copy(), fld.rgrid) for j, k in enumerate(ks) if abs(k) <= K}
    return ModeField(float(a), modes, K, dropped, fld.rgrid)


def recombine(mf, n_theta):
    """Synthesis ``f(r_i, theta_m) = sum_k f_k(r_i) exp(i k theta_m)``."""
    n = _check_n_theta(n_theta)
    if n <= 2 * mf.K:
        raise DomainError(f"N_theta={n} must exceed 2K={2 * mf.K}")
    coef = np.zeros((mf.rgrid.size, n), dtype=complex)
    for k, p in mf.modes.items():
        coef[:, k % n] = p.values
    return AngularField(np.fft.ifft(coef, axis=1) * n, mf.rgrid)


def l_theta_norm(obj, r_index):
    """``((1/2pi) int |f(r, theta)|^2 d theta)^(1/2)`` at one radial node.

    Accepts an :class:`AngularField` (angular quadrature), a
    :class:`ModeField` or a plain ``{k: value}`` mapping (mode sum).
    """
    if isinstance(obj, AngularField):
        row = obj.values[r_index]
        return float(np.sqrt(np.mean(np.abs(row) ** 2)))
    if isinstance(obj, ModeField):
        vals = [p.values[r_index] for p in obj.modes.values()]
    else:
        vals = [np.asarray(v).reshape(-1)[0] if np.ndim(v) == 0 or np.size(v) == 1
                else np.asarray(v)[r_index] for v in obj.values()]
    return float(math.sqrt(sum(abs(v) ** 2 for v in vals)))


def field_energy(obj):
    """``int int |f|^2 r dr d theta`` with the plain grid weights."""
    if isinstance(obj, AngularField):
        return float(2 * np.pi * obj.rgrid.weights @ np.mean(np.abs(obj.values) ** 2, axis=1))
    w = obj.rgrid.weights
    return float(2 * np.pi * sum(w @ np.abs(p.values) ** 2 for p in obj.modes.values()))


def _radial_profile(kind, params, r, nu):
    p = dict(params or {})
    amp = complex(p.pop("amplitude", 1.0))
    try:
        if kind == "gaussian":
            r0, sig = float(p.pop("r0", 0.0)), float(p.pop("sigma"))
            out = np.exp(-((r - r0) ** 2) / (2 * sig * sig))
        elif kind == "bump":
            c, wd = float(p.pop("center")), float(p.pop("width"))
            x = (r - c) / wd
            out = np.zeros_like(r)
            inside = np.abs(x) < 1
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
        elif kind == "regular":
            sig = float(p.pop("sigma"))
            out = r**nu * np.exp(-(r * r) / (2 * sig * sig))
        else:
            raise ConfigError(f"unknown profile type {kind!r}", "profile")
    except KeyError as exc:
        raise ConfigError(f"missing parameter {exc.args[0]!r}", f"params.{exc.args[0]}") from None
    if p:
        raise ConfigError(f"unknown parameters {sorted(p)}", "params")
    return amp * out


def profile_from_spec(kind, params, rgrid, nu):
    """Radial profile of type ``gaussian``, ``bump`` or ``regular``.

    ``regular`` is ``r^nu exp(-r^2 / (2 sigma^2))``, smooth in the sense
    of the order-``nu`` transform.
    """
    return RadialProfile(_radial_profile(kind, params, rgrid.nodes, nu), rgrid)


def read_grid_file(path, rgrid):
    """Read CSV rows ``r,theta_index,re,im`` into an :class:`AngularField`."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(rec[0]), int(rec[1]), float(rec[2]), float(rec[3])))
            except (ValueError, IndexError):
                if rows:
                    raise ConfigError(f"malformed grid_file row {rec!r}", "initial_data.path")
                continue  # header line
    if not rows:
        raise ConfigError("grid_file is empty", "initial_data.path")
    arr = np.array(rows)
    n_theta = int(arr[:, 1].max()) + 1
    ridx = np.searchsorted(rgrid.nodes, arr[:, 0])
    ridx = np.clip(ridx, 0, rgrid.size - 1)
    left = np.clip(ridx - 1, 0, rgrid.size - 1)
    ridx = np.where(np.abs(rgrid.nodes[left] - arr[:, 0]) < np.abs(rgrid.nodes[ridx] - arr[:, 0]), left, ridx)
    if np.any(np.abs(rgrid.nodes[ridx] - arr[:, 0]) > 1e-9 * max(1.0, rgrid.extent)):
        raise GridMismatchError("grid_file radii do not match the radial grid")
    vals = np.zeros((rgrid.size, n_theta), dtype=complex)
    seen = np.zeros_like(vals, dtype=bool)
    vals[ridx, arr[:, 1].astype(int)] = arr[:, 2] + 1j * arr[:, 3]
    seen[ridx, arr[:, 1].astype(int)] = True
    if not seen.all():
        raise ConfigError("grid_file does not cover every (r, theta) node", "initial_data.path")
    return AngularField(vals, rgrid)


def initial_data_from_spec(spec, rgrid, a, K, n_theta=None):
    """Build a :class:`ModeField` from an initial-data mapping.

    Accepted forms::

        {"type": "gaussian", "r0": .., "sigma": .., "k": ..}
        {"type": "mode_mixture", "terms": [{"k": .., "profile": .., "params": {..}}]}
        {"type": "grid_file", "path": ..}
    """
    spec = dict(spec)
    kind = spec.pop("type", None)
    if kind == "gaussian":
        k = int(spec.pop("k", 0))
        params = {"r0": spec.pop("r0", 0.0), "sigma": spec.pop("sigma", 1.0)}
        if spec:
            raise ConfigError(f"unknown keys {sorted(spec)}", "initial_data")
        if abs(k) > K:
            raise ConfigError(f"mode {k} exceeds K={K}", "initial_data.k")
        prof = profile_from_spec("gaussian", params, rgrid, mode_order(a, k))
        return ModeField(a, {k: prof}, K, 0.0, rgrid)
    if kind == "mode_mixture":
        terms = spec.pop("terms", None)
        if not terms or spec:
            raise ConfigError("mode_mixture needs a non-empty 'terms' list and nothing else", "initial_data")
        modes = {}
        for i, term in enumerate(terms):
            term = dict(term)
            k = int(term.pop("k"))
            if abs(k) > K:
                raise ConfigError(f"mode {k} exceeds K={K}", f"initial_data.terms[{i}].k")
            prof = _radial_profile(term.pop("profile", "gaussian"), term.pop("params", {}), rgrid.nodes,
                                   mode_order(a, k))
            if term:
                raise ConfigError(f"unknown keys {sorted(term)}", f"initial_data.terms[{i}]")
            modes[k] = RadialProfile(modes[k].values + prof if k in modes else prof, rgrid)
        return ModeField(a, modes, K, 0.0, rgrid)
    if kind == "grid_file":
        path = spec.pop("path", None)
        if path is None or spec:
            raise ConfigError("grid_file needs exactly a 'path'", "initial_data")
        return decompose(read_grid_file(path, rgrid), a, K)
    raise ConfigError(f"unknown initial data type {kind!r}", "initial_data.type")
