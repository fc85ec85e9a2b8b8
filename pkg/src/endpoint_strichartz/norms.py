r"""
Spacetime norms and the maximal operator
========================================

The endpoint norm is

.. math::

    \|v\|_{L^2_t L^\infty_r L_\theta}
      = \Big(\int_0^T \sup_{r \le R} \sum_k |v_k(r, t)|^2 \, dt\Big)^{1/2},

measured on the window ``t <= T_safe``, ``r <= R_safe = 0.6 r_max``. The
window keeps waves from reaching the truncated boundary: a band-limited
solution moves at most ``2 s_max`` per unit time, so containment requires
``2 s_max T_safe <= r_max - R_safe``. The sup over ``r`` is a grid max and
therefore a lower bound.
"""

from dataclasses import asdict, dataclass
import json
import math

import numpy as np

from .errors import DomainError, WavefrontError
from .kernels import TimeSignal
from .propagator import evolve_mode, mass

__all__ = [
    "R_SAFE_FRACTION",
    "NormReport",
    "safe_window",
    "check_containment",
    "spacetime_norm",
    "mode_sup_integrals",
    "strichartz_ratio",
    "maximal_function",
    "maximal_function_at",
    "maximal_inequality_check",
]

R_SAFE_FRACTION = 0.6
FORMAT_VERSION = 1


def safe_window(r_max, s_max, r_fraction=R_SAFE_FRACTION):
    """``(T_safe, R_safe)`` for a grid pair."""
    r_safe = r_fraction * r_max
    return (r_max - r_safe) / (2.0 * s_max), r_safe


def check_containment(t_max, r_max, s_max, r_fraction=R_SAFE_FRACTION):
    """Raise :class:`WavefrontError` if ``t_max`` exceeds ``T_safe``."""
    t_safe, r_safe = safe_window(r_max, s_max, r_fraction)
    if t_max > t_safe * (1 + 1e-12):
        raise WavefrontError(
            f"t_max={t_max:.6g} exceeds T_safe={t_safe:.6g} (front 2*s_max*t must stay below "
            f"r_max - R_safe = {r_max - r_safe:.6g}); increase r_max or reduce t_max"
        )
    return t_safe, r_safe


@dataclass
class NormReport:
    """Measured endpoint norm with its window and grid description."""

    value: float
    t_window: tuple
    r_window: tuple
    grid: dict
    captured_fraction: float = None
    format_version: int = FORMAT_VERSION

    def to_dict(self):
        d = asdict(self)
        d["t_window"] = list(self.t_window)
        d["r_window"] = list(self.r_window)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _trapezoid(y, t):
    if len(t) < 2:
        return 0.0
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def _sup_profile(traj, r_safe, r_stride):
    idx = np.nonzero(traj.rgrid.nodes <= r_safe)[0][::r_stride]
    acc = np.zeros((traj.times.size, idx.size))
    for k in traj.modes():
        v = traj.mode_values(k)[:, idx]
        acc += v.real**2 + v.imag**2
    return acc.max(axis=1) if idx.size else np.zeros(traj.times.size)


def _report(sup2, t, r_max, s_max, r_safe, n_r, r_stride, n_sup):
    total = _trapezoid(sup2, t)
    half = t <= t[0] + 0.5 * (t[-1] - t[0])
    # share of the squared norm collected in the first half of the window
    captured = _trapezoid(sup2[half], t[half]) / total if total > 0 else None
    grid = {"n_r": n_r, "r_max": r_max, "s_max": s_max, "n_t": int(t.size), "r_stride": int(r_stride),
            "n_sup": int(n_sup)}
    return NormReport(math.sqrt(total), (float(t[0]), float(t[-1])), (0.0, r_safe), grid, captured)


def spacetime_norm(traj, s_max=None, r_fraction=R_SAFE_FRACTION, r_stride=1):
    """Endpoint norm of a trajectory over ``[t_0, t_P] x (0, R_safe]``.

    ``s_max`` (for the containment check) defaults to ``traj.s_max``.
    ``r_stride > 1`` thins the sup grid (for lower-bound checks).

    Raises
    ------
    WavefrontError
        If the final time leaves the containment window.
    """
    r_max = traj.rgrid.extent
    s_max = traj.s_max if s_max is None else s_max
    if s_max is None:
        raise DomainError("spacetime_norm needs s_max for the containment check")
    t = traj.times
    _, r_safe = check_containment(float(t[-1]), r_max, s_max, r_fraction)
    sup2 = _sup_profile(traj, r_safe, int(r_stride))
    n_sup = np.count_nonzero(traj.rgrid.nodes <= r_safe)
    return _report(sup2, t, r_max, s_max, r_safe, traj.rgrid.size, r_stride, n_sup)


def mode_sup_integrals(traj, r_fraction=R_SAFE_FRACTION):
    """``int sup_{r <= R_safe} |v_k|^2 dt`` for every mode."""
    r_safe = r_fraction * traj.rgrid.extent
    idx = traj.rgrid.nodes <= r_safe
    out = {}
    for k in traj.modes():
        v = traj.mode_values(k)[:, idx]
        out[k] = _trapezoid(np.max(v.real**2 + v.imag**2, axis=1), traj.times)
    return out


def _times(times_config):
    if isinstance(times_config, dict):
        t_max, n_t = float(times_config["t_max"]), int(times_config["n_t"])
        if n_t < 2 or not t_max > 0:
            raise DomainError("time configuration needs n_t >= 2 and t_max > 0")
        return np.linspace(0.0, t_max, n_t)
    return np.asarray(times_config, dtype=float)


def strichartz_ratio(u0, times_config, op_cache, r_fraction=R_SAFE_FRACTION):
    """Endpoint norm of the evolution divided by ``||u0||_{L^2(R^2)}``.

    Per-mode ratios are ``(int sup_r |v_k|^2 dt / int |f_k|^2 r dr)^(1/2)``.
    Mode masses use the weights corrected for order ``nu(k)``. Modes are
    evolved one at a time, so memory stays at one mode's trajectory.

    Returns
    -------
    dict
        ``ratio``, ``per_mode`` (``{k: ratio_k}``), ``norm`` (a
        :class:`NormReport`), ``l2`` (``||u0||``) and ``mode_sum_bound``
        (``(sum_k int sup_r |v_k|^2 dt)^(1/2)``).
    """
    times = _times(times_config)
    masses = {k: mass(p, u0.order(k)) for k, p in u0.modes.items()}
    l2 = math.sqrt(2 * math.pi * sum(masses.values()))
    if l2 == 0:
        raise DomainError("strichartz_ratio needs non-zero initial data")
    rgrid, s_max = op_cache.rgrid, op_cache.fgrid.extent
    _, r_safe = check_containment(float(times[-1]), rgrid.extent, s_max, r_fraction)
    idx = rgrid.nodes <= r_safe
    acc = np.zeros((times.size, int(np.count_nonzero(idx))))
    sups = {}
    for k, prof in u0.modes.items():
        nu = u0.order(k)
        v = evolve_mode(prof, nu, op_cache.get(nu), times, u0.a, k).values[:, idx]
        a2 = v.real**2 + v.imag**2
        acc += a2
        sups[k] = _trapezoid(a2.max(axis=1), times)
    sup2 = acc.max(axis=1) if acc.shape[1] else np.zeros(times.size)
    rep = _report(sup2, times, rgrid.extent, s_max, r_safe, rgrid.size, 1, acc.shape[1])
    per_mode = {k: math.sqrt(sups[k] / masses[k]) for k in sups if masses[k] > 0}
    return {"ratio": rep.value / l2, "per_mode": per_mode, "norm": rep, "l2": l2,
            "mode_sum_bound": math.sqrt(sum(sups.values()))}


def _abs_prefix(g):
    a = np.abs(g.values) if isinstance(g, TimeSignal) else np.abs(np.asarray(g))
    return a, np.concatenate([[0.0], np.cumsum(a)])


def maximal_function(g, method="exact", exact_radius=16):
    """Hardy-Littlewood maximal function at the nodes of ``g``.

    ``g`` is read as piecewise constant on cells of width ``dt`` centred at
    the nodes and zero outside. For a symmetric window around a node the
    average is monotone between radii where both edges cross cell
    boundaries, so the sup over all radii equals the max over windows of
    ``2q + 1`` whole cells.

    ``method="exact"`` scans every ``q`` (``O(P^2)``); ``method="dyadic"``
    scans ``q <= exact_radius`` and dyadic ``q`` beyond (``O(P log P)``),
    a lower bound within a factor of 2.
    """
    a, cs = _abs_prefix(g)
    p = a.size
    m = np.arange(p)
    best = a.copy()
    if method == "exact":
        qs = range(1, p)
    elif method == "dyadic":
        qs = sorted(set(range(1, min(exact_radius, p - 1) + 1)) |
                    {1 << i for i in range(int(math.log2(max(p, 2))) + 1) if (1 << i) < p})
    else:
        raise ValueError(f"unknown method {method!r}")
    for q in qs:
        lo = np.clip(m - q, 0, p)
        hi = np.clip(m + q + 1, 0, p)
        np.maximum(best, (cs[hi] - cs[lo]) / (2 * q + 1), out=best)
    dt = g.dt if isinstance(g, TimeSignal) else 1.0
    t0 = g.t0 if isinstance(g, TimeSignal) else 0.0
    return TimeSignal(best.astype(complex), dt, t0)


def maximal_function_at(g, t):
    """Exact maximal function of the cell-wise constant ``|g|`` at time ``t``."""
    a, cs = _abs_prefix(g)
    dt, t0 = g.dt, g.t0
    edges = t0 - 0.5 * dt + dt * np.arange(a.size + 1)

    def integral(x):
        # int_{-inf}^{x} |g|
        pos = np.clip((np.asarray(x) - edges[0]) / dt, 0, a.size)
        whole = np.floor(pos).astype(int)
        frac = pos - whole
        part = np.where(whole < a.size, a[np.minimum(whole, a.size - 1)] * frac, 0.0)
        return dt * (cs[whole] + part)

    radii = np.unique(np.abs(edges - float(t)))
    radii = radii[radii > 0]
    if radii.size == 0:
        return 0.0
    avg = (integral(t + radii) - integral(t - radii)) / (2 * radii)
    inside = np.abs(edges[:-1] + 0.5 * dt - t) < 0.5 * dt
    point = float(a[np.argmax(inside)]) if inside.any() else 0.0
    return float(max(avg.max(), point))


def maximal_inequality_check(signals, p, method="exact"):
    """``max ||M g||_p / ||g||_p`` over the signals (norms on the node grid)."""
    p = float(p)
    if not (1 < p < math.inf):
        raise DomainError("the maximal inequality needs 1 < p < inf")
    ratios = []
    for g in signals:
        a = np.abs(g.values)
        den = np.sum(a**p) ** (1 / p)
        if den == 0:
            continue
        mg = maximal_function(g, method).values.real
        ratios.append(float(np.sum(mg**p) ** (1 / p) / den))
    return {"empirical_c": max(ratios) if ratios else 0.0, "ratios": ratios, "p": p}
