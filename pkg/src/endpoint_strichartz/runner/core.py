"""Run orchestration and cross-run reports."""

import csv
from dataclasses import asdict
import io
import math
import os
import time

import numpy as np
from scipy import stats

from .. import __version__
from ..errors import VersionMismatchError
from .experiments import EXPERIMENT_FUNCS
from .records import FORMAT_VERSION, OutputDir, RunRecord, fmt


def run(config, output_dir=None):
    """Execute ``config.experiment`` and write ``run.json`` plus its tables.

    Returns the :class:`RunRecord`; ``record.passed`` is true iff every
    asserted check passed.
    """
    out = OutputDir(output_dir or config.output_dir)
    start = time.perf_counter()
    checks, fitted = EXPERIMENT_FUNCS[config.experiment](config, out)
    elapsed = time.perf_counter() - start
    checks_csv = [(c.name, c.value, c.relation, c.limit, c.asserted, c.passed) for c in checks]
    out.csv("checks.csv", ["check", "value", "relation", "limit", "asserted", "passed"], checks_csv)
    record = RunRecord(
        experiment=config.experiment,
        config=config.snapshot(),
        version=__version__,
        seed=config.seed,
        checks=[asdict(c) for c in checks],
        fitted=_jsonable(fitted),
        files=list(out.files) + ["run.json"],
        timing={"wall_seconds": elapsed},
    )
    with open(os.path.join(out.path, "run.json"), "w") as fh:
        fh.write(record.to_json())
    return record, checks


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _as_record(r):
    if isinstance(r, RunRecord):
        return r
    if isinstance(r, dict):
        return RunRecord.from_dict(r)
    return RunRecord.load(r)


def fit_log2_slope(x, y, level=0.95):
    """Slope of ``log2 y`` against ``x`` with a ``level`` confidence band."""
    x = np.asarray(x, dtype=float)
    ly = np.log2(np.asarray(y, dtype=float))
    if x.size < 2:
        return None
    fit = stats.linregress(x, ly)
    if x.size > 2:
        half = stats.t.ppf(0.5 + level / 2, x.size - 2) * fit.stderr
    else:
        half = math.inf
    return {"slope": float(fit.slope), "lo": float(fit.slope - half), "hi": float(fit.slope + half),
            "n": int(x.size)}


def report(records):
    """Aggregate run records into markdown and CSV text.

    Series stored under ``fitted["series"]`` (for instance ``R_j`` against
    ``j``) are pooled across records by name and fitted with a log2 slope
    and 95% confidence band.

    Raises
    ------
    VersionMismatchError
        If the records carry different format versions.
    """
    recs = [_as_record(r) for r in records]
    versions = {r.format_version for r in recs}
    if len(versions) > 1:
        raise VersionMismatchError(f"records mix format versions {sorted(versions)}")
    if versions and versions != {FORMAT_VERSION}:
        raise VersionMismatchError(f"records use format version {versions.pop()}, expected {FORMAT_VERSION}")

    pooled = {}
    for r in recs:
        for name, ser in (r.fitted.get("series") or {}).items():
            xs, ys = pooled.setdefault(name, ([], []))
            xs += ser["x"]
            ys += ser["y"]
    slopes = {}
    for name in sorted(pooled):
        xs, ys = pooled[name]
        order = np.argsort(xs, kind="stable")
        fit = fit_log2_slope(np.asarray(xs)[order], np.asarray(ys)[order])
        if fit is not None:
            slopes[name] = fit

    rows = []
    for i, r in enumerate(recs):
        for c in r.checks:
            rows.append(("check", i, r.experiment, c["name"], c["value"], c["passed"] if c["asserted"] else None))
        for key, val in sorted(r.fitted.items()):
            if isinstance(val, (int, float)) and not isinstance(val, bool):
                rows.append(("fitted", i, r.experiment, key, float(val), None))
    for name, fit in slopes.items():
        rows.append(("slope", None, None, name, fit["slope"], None))

    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["kind", "run", "experiment", "name", "value", "passed"])
    for row in rows:
        wr.writerow([fmt(v) for v in row])

    md = ["# Run summary", ""]
    if recs:
        md += ["| run | experiment | version | passed |", "|---|---|---|---|"]
        md += [f"| {i} | {r.experiment} | {r.version} | {'yes' if r.passed else 'no'} |" for i, r in enumerate(recs)]
        md.append("")
        for i, r in enumerate(recs):
            md += [f"## Run {i}: {r.experiment}", ""]
            md += [f"- {'PASS' if c['passed'] else 'FAIL' if c['asserted'] else 'INFO'} {c['name']}: "
                   f"{fmt(c['value'])} {c['relation']} {fmt(c['limit'])}" for c in r.checks]
            md.append("")
        if slopes:
            md += ["## Fitted log2 slopes", "", "| series | points | slope | 95% band |", "|---|---|---|---|"]
            md += [f"| {n} | {f['n']} | {f['slope']:.4f} | [{f['lo']:.4f}, {f['hi']:.4f}] |"
                   for n, f in slopes.items()]
            md.append("")
    else:
        md += ["No runs.", ""]
    return {"markdown": "\n".join(md), "csv": buf.getvalue(), "slopes": slopes}


def write_report(summary, output_dir):
    os.makedirs(output_dir, exist_ok=True)
    paths = {}
    for key, name in (("markdown", "summary.md"), ("csv", "summary.csv")):
        paths[key] = os.path.join(output_dir, name)
        with open(paths[key], "w") as fh:
            fh.write(summary[key])
    return paths
