"""Run records, checks and deterministic CSV output."""

import csv
from dataclasses import asdict, dataclass, field
import json
import math
import os

FORMAT_VERSION = 1


def fmt(x):
    """Shortest round-trip text for one CSV cell."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float) or hasattr(x, "dtype"):
        v = x.item() if hasattr(x, "item") else x
        return str(v) if isinstance(v, int) else repr(float(v))
    return str(x)


class OutputDir:
    """One run directory; every file written through it is recorded."""

    def __init__(self, path):
        self.path = os.fspath(path)
        os.makedirs(self.path, exist_ok=True)
        self.files = []

    def file(self, name):
        self.files.append(name)
        return os.path.join(self.path, name)

    def csv(self, name, header, rows):
        with open(self.file(name), "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(header)
            for row in rows:
                wr.writerow([fmt(v) for v in row])


@dataclass
class Check:
    """One verified (``asserted``) or reported quantity."""

    name: str
    value: float
    limit: float
    relation: str = "<"
    asserted: bool = True
    passed: bool = field(init=False)

    def __post_init__(self):
        v, lim = float(self.value), float(self.limit)
        ops = {"<": v < lim, "<=": v <= lim, ">": v > lim, ">=": v >= lim}
        if self.relation not in ops:
            raise ValueError(f"unknown relation {self.relation!r}")
        self.passed = bool(ops[self.relation]) and math.isfinite(v)

    def line(self):
        tag = ("PASS" if self.passed else "FAIL") if self.asserted else "INFO"
        return f"{tag} {self.name}: {self.value:.6g} {self.relation} {self.limit:.6g}"


@dataclass
class RunRecord:
    """Everything needed to audit or repeat one run."""

    experiment: str
    config: dict
    version: str
    seed: int
    checks: list
    fitted: dict
    files: list
    timing: dict
    format_version: int = FORMAT_VERSION

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks if c["asserted"])

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True)

    @classmethod
    def from_dict(cls, d):
        d = {k: v for k, v in d.items() if k != "passed"}
        return cls(**d)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
