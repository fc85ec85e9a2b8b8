r"""
Spectral time evolution
=======================

Each mode solves :math:`i\partial_t v_k = -A_{\nu(k)} v_k` with
:math:`\nu(k)^2 = a^2 + k^2`, so in the Hankel domain the evolution is the
unimodular multiplier :math:`e^{i s^2 t}`:

.. math::

    v_k(\cdot, t) = H_\nu^{-1}\left[e^{i s^2 t}\, H_\nu f_k\right].

One forward transform per mode, one inverse transform per time; there is no
time-stepping error.
"""

import csv
from dataclasses import dataclass
import math
import threading

import numpy as np

from .errors import DomainError, GridMismatchError, StrichartzError
from .hankel import RadialProfile, apply_a_nu, build_hankel
from .harmonics import ModeField, mode_order

__all__ = [
    "Trajectory",
    "OperatorCache",
    "evolve_mode",
    "evolve_field",
    "mass",
    "pde_residual",
    "regular_closed_form",
    "gaussian_closed_form",
    "export_csv",
]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Solution samples at increasing times.

    Mode-wise trajectories (from :func:`evolve_mode`) hold ``values`` of shape
    ``(P, N_r)`` for one mode; field trajectories hold
    ``{k: (P, N_r) array}``. :meth:`state` returns a :class:`RadialProfile`
    or a :class:`ModeField` for one time index.
    """

    times: np.ndarray
    rgrid: object
    values: object
    a: float = 0.0
    k: int = None
    K: int = None
    s_max: float = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or (t.size > 1 and np.any(np.diff(t) <= 0)):
            raise DomainError("trajectory times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @property
    def is_field(self):
        return isinstance(self.values, dict)

    def mode_values(self, k=None):
        if self.is_field:
            return self.values[int(k)]
        if k is not None and self.k is not None and int(k) != self.k:
            raise KeyError(k)
        return self.values

    def modes(self):
        return list(self.values) if self.is_field else [self.k]

    def order(self, k=None):
        return mode_order(self.a, self.k if k is None else k)

    def state(self, index):
        if not self.is_field:
            return RadialProfile(self.values[index], self.rgrid)
        modes = {k: RadialProfile(v[index], self.rgrid) for k, v in self.values.items()}
        return ModeField(self.a, modes, self.K, 0.0, self.rgrid)


class OperatorCache:
    """Hankel operators for one grid pair, keyed by order."""

    def __init__(self, rgrid, fgrid):
        self.rgrid = rgrid
        self.fgrid = fgrid
        self._ops = {}
        self._lock = threading.Lock()

    def get(self, nu):
        key = float(nu)
        with self._lock:
            op = self._ops.get(key)
        if op is None:
            op = build_hankel(key, self.rgrid, self.fgrid)
            with self._lock:
                op = self._ops.setdefault(key, op)
        return op


def _propagate(op, f, times):
    spec = op.forward(np.asarray(f, dtype=complex))
    s2 = op.fgrid.nodes ** 2
    phases = np.exp(1j * np.outer(np.asarray(times, dtype=float), s2))
    # (P, M) spectral states -> (P, N) physical states
    return (phases * spec[None, :] * op.inverse_weights[None, :]) @ op.kernel


def evolve_mode(f_k, order, op, times, a=None, k=None):
    """Evolve one radial mode; returns a mode-wise :class:`Trajectory`.

    ``a``/``k`` only label the result; when omitted the order is stored as
    ``a`` with ``k = 0``.
    """
    if abs(float(order) - op.order) > 1e-12:
        raise DomainError(f"operator order {op.order} does not match mode order {order}")
    if not f_k.grid.same_as(op.rgrid):
        raise GridMismatchError("mode profile is not on the operator's radial grid")
    vals = _propagate(op, f_k.values, times)
    if a is None:
        a, k = float(order), 0
    return Trajectory(np.asarray(times, dtype=float), op.rgrid, vals, float(a), k, None, op.fgrid.extent)


def evolve_field(mf, op_cache, times):
    """Evolve every mode of ``mf`` independently."""
    if not mf.rgrid.same_as(op_cache.rgrid):
        raise GridMismatchError("mode field is not on the cache's radial grid")
    out = {}
    for k, prof in mf.modes.items():
        try:
            op = op_cache.get(mf.order(k))
            out[k] = _propagate(op, prof.values, times)
        except StrichartzError as exc:
            raise type(exc)(f"mode k={k}: {exc}") from exc
    return Trajectory(np.asarray(times, dtype=float), mf.rgrid, out, mf.a, None, mf.K, op_cache.fgrid.extent)


def mass(profile, order=0.0):
    """``int |f|^2 r dr``; ``order`` selects the endpoint-corrected weights."""
    vals = profile.values if isinstance(profile, RadialProfile) else np.asarray(profile)
    return float(profile.grid.weights_for(order) @ (np.abs(vals) ** 2))


def pde_residual(traj, a=None):
    r"""Relative residual of :math:`i\partial_t v + A_\nu v = 0` per mode.

    Central differences in time on interior time samples and
    :func:`apply_a_nu` in space, measured in :math:`L^2(r\,dr)` over interior
    radial nodes and summed over interior times.
    """
    t = traj.times
    if t.size < 3:
        raise DomainError("pde_residual needs at least 3 time samples")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * abs(dt[0]):
        raise DomainError("pde_residual needs a uniform time step")
    a = traj.a if a is None else float(a)
    w = traj.rgrid.weights[1:-1]
    out = {}
    for k in traj.modes():
        v = traj.mode_values(k)
        nu = mode_order(a, k if k is not None else 0)
        dv = (v[2:] - v[:-2]) / (2 * dt[0])
        av = np.stack([apply_a_nu(v[p], nu, traj.rgrid).values for p in range(1, len(t) - 1)])
        res = (1j * dv + av)[:, 1:-1]
        den = np.sum(w * np.abs(av[:, 1:-1]) ** 2)
        num = np.sum(w * np.abs(res) ** 2)
        out[k] = 0.0 if den == 0 else float(math.sqrt(num / den))
    return out


def regular_closed_form(r, t, nu):
    r"""Exact solution for ``f = r^nu exp(-r^2/2)``:
    :math:`v = r^\nu (2\beta)^{-\nu-1} e^{-r^2/(4\beta)}`, :math:`\beta = 1/2 - it`."""
    r = np.asarray(r, dtype=float)
    beta = 0.5 - 1j * float(t)
    return r**nu * (2 * beta) ** (-nu - 1) * np.exp(-(r * r) / (4 * beta))


def gaussian_closed_form(r, t):
    """Order-zero case: ``exp(-r^2/(2 - 4it)) / (1 - 2it)``."""
    return regular_closed_form(r, t, 0.0)


def export_csv(traj, path):
    """Write rows ``t,r,k,re,im`` in time, mode, radius order."""
    r = traj.rgrid.nodes
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "r", "k", "re", "im"])
        for p, t in enumerate(traj.times):
            for k in traj.modes():
                v = traj.mode_values(k)[p]
                kk = 0 if k is None else k
                for ri, vi in zip(r, v):
                    wr.writerow([repr(float(t)), repr(float(ri)), kk, repr(float(vi.real)), repr(float(vi.imag))])
