"""The six experiments.

Each experiment takes a validated config and an :class:`OutputDir`, writes
its tables, and returns ``(checks, fitted)``. Random draws come from
per-component streams of the run seed (see :mod:`endpoint_strichartz.seeding`).
"""

import math

import numpy as np
from scipy.special import jv

from ..errors import ConfigError
from ..bessel import bessel_j, bessel_j_prime, bessel_split, verify_uniform_bounds
from ..hankel import (
    FrequencyGrid, RadialGrid, RadialProfile, apply_a_nu, build_hankel,
    involution_error, plancherel_error, regular_gaussian_sum,
)
from ..harmonics import ModeField, initial_data_from_spec, mode_order
from ..kernels import (
    TimeSignal, build_cutoffs, fit_phi0, fit_phi_j, log2_slope, middle_uniformity_scan,
    operator_norm_scan, verify_mj_amplitude,
)
from ..norms import (
    maximal_function, maximal_function_at, maximal_inequality_check, safe_window,
    spacetime_norm, strichartz_ratio,
)
from ..propagator import (
    OperatorCache, evolve_field, evolve_mode, export_csv, gaussian_closed_form, pde_residual,
)
from ..seeding import component_rng
from .records import Check

LAMBDAS = [2.0**e for e in range(-3, 4)]


def _grids(cfg, lam=1.0):
    g = cfg.grid
    return RadialGrid.uniform(g.n_r, g.r_max / lam), FrequencyGrid.uniform(g.n_s, g.s_max * lam)


def _times(cfg, scale=1.0):
    return np.linspace(0.0, cfg.time.t_max * scale, cfg.time.n_t)


def _sup_curve(traj, r_safe):
    idx = traj.rgrid.nodes <= r_safe
    acc = sum(np.abs(traj.mode_values(k)[:, idx]) ** 2 for k in traj.modes())
    return acc.max(axis=1)


def _suites(cfg, default):
    chosen = cfg.scan.suites or default
    unknown = sorted(set(chosen) - set(default))
    if unknown:
        raise ConfigError(f"unknown suites {unknown}; choose from {default}", "scan.suites")
    return [s for s in default if s in chosen]


# -- propagate ---------------------------------------------------------------

def _residual_pair(nu, cfg, f_kind):
    """PDE residual on (N, dt) and (N/2, 2 dt) for the same profile."""
    g = cfg.grid
    dt = min(1e-3, cfg.time.t_max / 8)
    t0 = 0.5 * cfg.time.t_max
    res = []
    for n_r, n_s, step in ((g.n_r // 2, g.n_s // 2, 2 * dt), (g.n_r, g.n_s, dt)):
        r, s = RadialGrid.uniform(n_r, g.r_max), FrequencyGrid.uniform(n_s, g.s_max)
        f = RadialProfile(f_kind(r), r)
        tr = evolve_mode(f, nu, build_hankel(nu, r, s), t0 + step * np.arange(5))
        res.append(pde_residual(tr)[0])
    return res


def propagate(cfg, out):
    r, s = _grids(cfg)
    u0 = initial_data_from_spec(cfg.initial_data, r, cfg.a, cfg.k_max, n_theta=None)
    cache = OperatorCache(r, s)
    times = _times(cfg)
    traj = evolve_field(u0, cache, times)
    export_csv(traj, out.file("trajectory.csv"))

    rows, worst = [], 0.0
    for k in traj.modes():
        w = r.weights_for(traj.order(k))
        m = np.abs(traj.mode_values(k)) ** 2 @ w
        dev = np.abs(m - m[0]) / m[0] if m[0] > 0 else np.zeros_like(m)
        worst = max(worst, float(dev.max()))
        rows += [(float(t), k, float(mk), float(d)) for t, mk, d in zip(times, m, dev)]
    out.csv("mass.csv", ["t", "k", "mass", "rel_dev"], rows)
    checks = [Check("mass conservation (max relative deviation)", worst, 1e-8)]

    rep = spacetime_norm(traj)
    r_safe = rep.r_window[1]
    out.csv("plotdata_sup.csv", ["t", "sup_r_sum_k_abs2"], zip(times, _sup_curve(traj, r_safe)))

    spec = cfg.initial_data
    if spec.get("type") == "gaussian" and cfg.a == 0 and int(spec.get("k", 0)) == 0 and \
            float(spec.get("r0", 0.0)) == 0.0:
        sig = float(spec.get("sigma", 1.0))
        idx = r.nodes <= r_safe
        exact = np.stack([gaussian_closed_form(r.nodes[idx] / sig, t / sig**2) for t in times])
        err = float(np.max(np.abs(traj.mode_values(0)[:, idx] - exact)))
        checks.append(Check("closed-form Gaussian (max pointwise error, r <= R_safe)", err, 1e-5))

    k_main = max(traj.modes(), key=lambda k: float(np.abs(u0.values(k)) @ np.abs(u0.values(k))))
    nu = u0.order(k_main)
    res = _residual_pair(nu, cfg, lambda rr: regular_gaussian_sum(rr.nodes, nu, [1.0], [1.0]))
    checks.append(Check("PDE residual (fine grid)", res[1], 5e-3))
    checks.append(Check("PDE residual reduction per halving", res[0] / res[1], 3.5, ">="))
    return checks, {"norm": rep.to_dict(), "pde_residual": res, "residual_order": nu}


# -- strichartz-scan ---------------------------------------------------------

def strichartz_scan(cfg, out):
    checks, fitted = [], {}
    suites = _suites(cfg, ["scaling", "modes", "gaussian"])
    t_safe, _ = safe_window(cfg.grid.r_max, cfg.grid.s_max)

    if "scaling" in suites:
        lams = cfg.scan.lam or LAMBDAS
        base_r, _ = _grids(cfg)
        u0 = initial_data_from_spec(cfg.initial_data, base_r, cfg.a, cfg.k_max)
        rows, ratios = [], []
        for lam in lams:
            # nodes scale as r_i / lam, so u0(lam r) has the same samples
            r, s = _grids(cfg, lam)
            modes = {k: RadialProfile(p.values, r) for k, p in u0.modes.items()}
            res = strichartz_ratio(ModeField(cfg.a, modes, u0.K, 0.0, r), _times(cfg, lam**-2),
                                   OperatorCache(r, s))
            ratios.append(res["ratio"])
            rows.append((float(lam), res["ratio"], res["norm"].value, res["l2"], res["norm"].captured_fraction))
            if lam == 1.0:
                traj_times = _times(cfg)
                tr = evolve_field(ModeField(cfg.a, modes, u0.K, 0.0, r), OperatorCache(r, s), traj_times)
                out.csv("plotdata_sup.csv", ["t", "sup_r_sum_k_abs2"],
                        zip(traj_times, _sup_curve(tr, res["norm"].r_window[1])))
        out.csv("scaling.csv", ["lambda", "ratio", "norm", "l2", "captured_fraction"], rows)
        spread = max(ratios) / min(ratios) - 1.0
        checks.append(Check("scale invariance of the ratio (relative spread)", spread, 0.01))
        fitted["scaling_ratio"] = ratios[len(ratios) // 2]

    if "modes" in suites:
        r, s = _grids(cfg)
        rows = []
        fitted["per_mode_max"] = {}
        for a in cfg.scan.a or [0.5, 1.0, 2.0]:
            cache = OperatorCache(r, s)
            modes = {k: RadialProfile(regular_gaussian_sum(r.nodes, mode_order(a, k), [1.0], [1.0]), r)
                     for k in range(cfg.k_max + 1)}
            res = strichartz_ratio(ModeField(a, modes, cfg.k_max), _times(cfg), cache)
            pm = res["per_mode"]
            rows += [(float(a), k, mode_order(a, k), pm[k]) for k in sorted(pm)]
            low = max(pm[k] for k in sorted(pm)[:5])
            rel = max(pm.values()) / low
            checks.append(Check(f"per-mode uniformity a={a:g} (max_k / max_(k<=4))", rel, 1.05, "<=", a > 0))
            fitted["per_mode_max"][repr(float(a))] = max(pm.values())
        out.csv("plotdata_per_mode.csv", ["a", "k", "nu", "ratio"], rows)

    if "gaussian" in suites:
        r, s = _grids(cfg)
        u0 = ModeField(0.0, {0: RadialProfile(np.exp(-r.nodes**2 / 2), r)}, 0)
        res = strichartz_ratio(u0, _times(cfg), OperatorCache(r, s))
        exact = math.sqrt(math.atan(2 * cfg.time.t_max) / (2 * math.pi))
        fitted["gaussian_ratio"] = res["ratio"]
        checks.append(Check("free Gaussian ratio vs closed form (relative error)",
                            abs(res["ratio"] / exact - 1.0), 0.02, "<", False))
        out.csv("gaussian.csv", ["t_max", "ratio", "closed_form"], [(cfg.time.t_max, res["ratio"], exact)])
    fitted["t_safe"] = t_safe
    return checks, fitted


# -- verify-bessel -----------------------------------------------------------

def verify_bessel(cfg, out):
    rng = component_rng(cfg.seed, "runner.verify_bessel")
    n = cfg.scan.samples
    nus = rng.uniform(0.5, 20.0, n)
    rs = nus * rng.uniform(0.5, 2.0, n)
    rows, split_err, j_err = [], 0.0, 0.0
    for nu, x in zip(nus, rs):
        a, b = bessel_split(nu, x)
        ref = float(jv(nu, x))
        e = abs(a - b - ref)
        split_err = max(split_err, e)
        j_err = max(j_err, abs(bessel_j(nu, x) - ref))
        rows.append((float(nu), float(x), a, b, ref, e))
    out.csv("bessel_split.csv", ["nu", "r", "A", "B", "J_ref", "abs_error"], rows)

    orders = cfg.scan.nu or [5.0, 10.0, 20.0, 40.0, 80.0]
    rep = verify_uniform_bounds(orders, cfg.scan.samples)
    per = rep["per_order"]
    out.csv("bessel_bounds.csv", ["nu", "c1", "c2"], [(nu, v["c1"], v["c2"]) for nu, v in per.items()])
    c1 = [v["c1"] for v in per.values()]
    c2 = [v["c2"] for v in per.values()]

    h = 1e-5
    fd_err = 0.0
    for nu, x in zip(nus[:50], rs[:50]):
        fd = (bessel_j(nu, x + h) - bessel_j(nu, x - h)) / (2 * h)
        d = bessel_j_prime(nu, x)
        fd_err = max(fd_err, abs(d - fd) / (1 + abs(d)))
    checks = [
        Check("split identity A - B = J (max abs error)", split_err, 1e-8),
        Check("bessel_j vs reference (max abs error)", j_err, 1e-8),
        Check("derivative vs finite difference", fd_err, 1e-6),
        Check("c1 variation across orders (max/min)", max(c1) / min(c1), 2.0) if c1 else None,
        Check("c2 variation across orders (max/min)", max(c2) / min(c2), 2.0) if c2 else None,
    ]
    return [c for c in checks if c is not None], {"c1": rep["c1"], "c2": rep["c2"]}


# -- verify-hankel -----------------------------------------------------------

def _diag_error(nu, n, cfg):
    g = cfg.grid
    r, s = RadialGrid.uniform(n, g.r_max), FrequencyGrid.uniform(n, g.s_max)
    op = build_hankel(nu, r, s)
    f = regular_gaussian_sum(r.nodes, nu, [1.0, 0.5], [1.0, 0.7])
    lhs = op.forward(apply_a_nu(RadialProfile(f, r), nu).values)
    rhs = s.nodes**2 * op.forward(f)
    return math.sqrt(np.sum(s.weights * np.abs(lhs - rhs) ** 2) / np.sum(s.weights * np.abs(rhs) ** 2))


def verify_hankel(cfg, out):
    r, s = _grids(cfg)
    checks, rows = [], []
    for nu in cfg.scan.nu or [0.0, 0.5, 1.0, 2.5, 5.0]:
        op = build_hankel(nu, r, s)
        rng = component_rng(cfg.seed, "runner.verify_hankel", int(round(1000 * nu)))
        inv, pl = 0.0, 0.0
        for _ in range(5):
            amps = rng.normal(size=4) + 1j * rng.normal(size=4)
            widths = rng.uniform(0.5, 2.0, size=4)
            f = regular_gaussian_sum(r.nodes, nu, amps, widths)
            inv = max(inv, involution_error(op, f))
            pl = max(pl, plancherel_error(op, f))
        n = min(cfg.grid.n_r, cfg.grid.n_s)
        e_coarse, e_fine = _diag_error(nu, n // 2, cfg), _diag_error(nu, n, cfg)
        order = math.log2(e_coarse / e_fine)
        rows.append((float(nu), inv, pl, e_coarse, e_fine, order))
        checks += [
            Check(f"involution nu={nu:g}", inv, 1e-6),
            Check(f"Plancherel nu={nu:g}", pl, 1e-6),
            Check(f"diagonalization error nu={nu:g}", e_fine, 1e-3),
            Check(f"diagonalization order nu={nu:g}", order, 1.8, ">="),
        ]
    out.csv("hankel.csv", ["nu", "involution", "plancherel", "diag_error_coarse", "diag_error_fine",
                           "diag_order"], rows)
    return checks, {}


# -- verify-kernels ----------------------------------------------------------

KERNEL_HEADER = ["piece", "nu", "j", "param", "value", "fitted_constant"]


def verify_kernels(cfg, out):
    suites = _suites(cfg, ["phi0", "tj", "phi_j", "amplitude", "middle"])
    checks, fitted, rows = [], {"series": {}, "cutoffs": []}, []

    if "phi0" in suites:
        curve = []
        fits = [fit_phi0(nu) for nu in (cfg.scan.nu or [0.5, 1.0, 2.0, 3.0, 5.0, 8.0])]
        c_all = max(f["C"] for f in fits)
        for f in fits:
            rows += [("low", f["order"], None, "slope", f["slope"], f["C"]),
                     ("low", f["order"], None, "expected_slope", f["expected_slope"], f["C"])]
            curve += [(f["order"], e, k) for e, k in zip(f["eta"], f["abs_kernel"])]
            checks.append(Check(f"phi0 tail slope nu={f['order']:g} (|slope - expected|)",
                                abs(f["slope"] - f["expected_slope"]), 0.1, "<="))
        checks.append(Check("phi0 single fitted constant C", c_all, math.inf))
        fitted["phi0_C"] = c_all
        out.csv("plotdata_phi0.csv", ["nu", "eta", "abs_kernel"], curve)

    if "tj" in suites:
        curve = []
        for nu in cfg.scan.tj_orders or [8.0]:
            js = cfg.scan.j or list(range(6, 12))
            scan = operator_norm_scan(nu, js, cfg.seed, cfg.scan.n_random)
            fitted["cutoffs"].append(build_cutoffs(nu, max(js)).to_dict())
            for row in scan["rows"]:
                rows.append((row["j"], float(nu), row["j"], "R", row["R"], None))
                curve.append((float(nu), row["j"], row["R"], row["argmax"]))
            checks.append(Check(f"T^j log2-slope nu={nu:g} (|slope + 1/2|)", abs(scan["slope"] + 0.5), 0.15, "<="))
            fitted["series"][f"R_j nu={nu:g}"] = {"x": [r["j"] for r in scan["rows"]],
                                                   "y": [r["R"] for r in scan["rows"]]}
        out.csv("plotdata_tj.csv", ["nu", "j", "R", "argmax"], curve)

    if "phi_j" in suites:
        nu = cfg.scan.phi_j_order
        fam = build_cutoffs(nu)
        js = cfg.scan.phi_j or list(range(fam.j_min, fam.j_min + 6))
        fam = build_cutoffs(nu, max(max(js), fam.j_min))
        fits = [fit_phi_j(fam, j) for j in js]
        fitted["cutoffs"].append(fam.to_dict())
        for f in fits:
            rows += [(f["j"], float(nu), f["j"], "C", f["C"], f["C"]),
                     (f["j"], float(nu), f["j"], "tail_ratio", f["tail_ratio"], None),
                     (f["j"], float(nu), f["j"], "l1", f["l1"], None)]
        cs = [f["C"] for f in fits]
        slope = log2_slope(js, [f["l1"] for f in fits])
        checks.append(Check("Phi_j fitted constant spread (max/min)", max(cs) / min(cs), 2.0))
        checks.append(Check("||Phi_j||_1 log2-slope (|slope + 1/2|)", abs(slope + 0.5), 0.15, "<="))
        checks.append(Check("Phi_j rapid-decay branch ratio", max(f["tail_ratio"] for f in fits), 10.0, "<",
                            False))
        fitted["phi_j_C"] = max(cs)
        fitted["series"][f"phi_j_l1 nu={nu:g}"] = {"x": list(js), "y": [f["l1"] for f in fits]}

    if "amplitude" in suites:
        nu = cfg.scan.phi_j_order
        js = list(range(6, 13))
        fam = build_cutoffs(nu, max(js))
        fitted["cutoffs"].append(fam.to_dict())
        amps = [verify_mj_amplitude(fam, j)["sup_scaled"] for j in js]
        rows += [(j, float(nu), j, "sup_scaled", v, None) for j, v in zip(js, amps)]
        checks.append(Check("2^(j/2) |m^j| flat in j (max/min)", max(amps) / min(amps), 1.5))

    if "middle" in suites:
        for nu in cfg.scan.middle_orders or [1.0, 2.5, 8.0]:
            ns = cfg.scan.n or list(range(-6, 7))
            scan = middle_uniformity_scan(nu, ns, cfg.seed, cfg.scan.n_random)
            rows += [("mid", float(nu), None, f"C_n={row['n']}", row["C"], None) for row in scan["rows"]]
            checks.append(Check(f"middle shells nu={nu:g} (max/min)", scan["spread"], 2.0))

    out.csv("kernels.csv", KERNEL_HEADER, rows)
    return checks, fitted


# -- verify-maximal ----------------------------------------------------------

def _trial_signals(seed, n_signals):
    rng = component_rng(seed, "runner.verify_maximal")
    out = []
    for i in range(n_signals):
        p = 512
        v = np.zeros(p)
        for lo, hi in np.sort(rng.integers(0, p, 2 * rng.integers(1, 20))).reshape(-1, 2):
            v[lo:hi + 1] += rng.standard_normal()
        out.append(("step", TimeSignal(v.astype(complex), 1.0, 0.0)))
    for i in range(10):
        v = rng.standard_normal(256) + 1j * rng.standard_normal(256)
        out.append(("noise", TimeSignal(v, 0.5, -64.0)))
    spike = np.zeros(1025, dtype=complex)
    spike[512] = 1.0
    out.append(("spike", TimeSignal(spike, 1.0, 0.0)))
    out.append(("constant", TimeSignal(np.full(64, 3.0 + 0j), 1.0, 0.0)))
    return out


def verify_maximal(cfg, out):
    signals = _trial_signals(cfg.seed, cfg.scan.n_signals)
    dominated = True
    rows = []
    for i, (kind, g) in enumerate(signals):
        mg = maximal_function(g).values.real
        dominated &= bool(np.all(mg >= np.abs(g.values) * (1 - 1e-12)))
        c = maximal_inequality_check([g], 2)["empirical_c"]
        rows.append((i, kind, c))
    out.csv("maximal.csv", ["signal", "kind", "ratio_p2"], rows)
    emp = max(r[2] for r in rows)

    # sublinearity on consecutive pairs of equal length
    sub = True
    for (_, g), (_, h) in zip(signals[:-1], signals[1:]):
        if g.size == h.size:
            mgh = maximal_function(TimeSignal(g.values + h.values, g.dt, g.t0)).values.real
            sub &= bool(np.all(mgh <= (maximal_function(g).values.real + maximal_function(h).values.real)
                               * (1 + 1e-12)))

    dt = 2.0**-8
    centres = (np.arange(3 << 8) + 0.5) * dt
    ind = TimeSignal((centres < 1.0).astype(complex), dt, 0.5 * dt)
    spot = maximal_function_at(ind, 2.0)

    spike = signals[-2][1]
    m = maximal_function(spike).values.real
    d = np.arange(m.size) - 512
    out.csv("plotdata_maximal_spike.csv", ["offset", "M"], [(int(x), y) for x, y in zip(d[512:], m[512:])])

    checks = [
        Check("M(g) >= |g| at every node (violations)", 0.0 if dominated else 1.0, 0.0, "<="),
        Check("sublinearity M(g+h) <= M(g)+M(h) (violations)", 0.0 if sub else 1.0, 0.0, "<="),
        Check("empirical ||M||_(2->2)", emp, 4.0, "<="),
        Check("indicator of [0,1] at t=2 (|M - 1/4|)", abs(spot - 0.25), 1e-12, "<="),
    ]
    return checks, {"empirical_c": emp, "indicator_spot": spot}


EXPERIMENT_FUNCS = {
    "propagate": propagate,
    "strichartz-scan": strichartz_scan,
    "verify-bessel": verify_bessel,
    "verify-hankel": verify_hankel,
    "verify-kernels": verify_kernels,
    "verify-maximal": verify_maximal,
}
