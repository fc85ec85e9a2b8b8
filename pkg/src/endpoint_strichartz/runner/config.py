"""Experiment configuration: JSON with strict field checking."""

import json
import math
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ConfigError, WavefrontError
from ..norms import check_containment

EXPERIMENTS = (
    "propagate",
    "strichartz-scan",
    "verify-bessel",
    "verify-hankel",
    "verify-kernels",
    "verify-maximal",
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridConfig(_Strict):
    n_r: int = Field(1024, gt=0)
    r_max: float = Field(20.0, gt=0)
    n_s: int = Field(1024, gt=0)
    s_max: float = Field(20.0, gt=0)


class TimeConfig(_Strict):
    t_max: float = Field(0.2, gt=0)
    n_t: int = Field(21, ge=2)


class ScanConfig(_Strict):
    """Optional scan lists; ``None`` means the experiment's default."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    a: Optional[List[float]] = None
    lam: Optional[List[float]] = Field(None, alias="lambda")
    j: Optional[List[int]] = None
    nu: Optional[List[float]] = None
    n: Optional[List[int]] = None
    suites: Optional[List[str]] = None
    tj_orders: Optional[List[float]] = None
    phi_j_order: float = Field(2.0, gt=0)
    phi_j: Optional[List[int]] = None
    middle_orders: Optional[List[float]] = None
    n_random: int = Field(50, gt=0)
    samples: int = Field(200, gt=0)
    n_signals: int = Field(100, gt=0)


class ExperimentConfig(_Strict):
    experiment: Literal[EXPERIMENTS]
    a: float = Field(0.0, ge=0)
    k_max: int = Field(4, ge=0)
    grid: GridConfig = GridConfig()
    time: TimeConfig = TimeConfig()
    initial_data: dict = Field(default_factory=lambda: {"type": "gaussian", "r0": 0.0, "sigma": 1.0, "k": 0})
    scan: ScanConfig = ScanConfig()
    seed: int = Field(0, ge=0, lt=2**64)
    output_dir: str = "runs/latest"

    @model_validator(mode="after")
    def _check_grid_and_window(self):
        g = self.grid
        limit = math.pi * (min(g.n_r, g.n_s) + 1)
        if g.r_max * g.s_max > limit:
            raise ValueError(f"r_max*s_max = {g.r_max * g.s_max:.6g} exceeds pi*(min(n_r, n_s)+1) = "
                             f"{limit:.6g}; reduce s_max or add nodes")
        try:
            check_containment(self.time.t_max, g.r_max, g.s_max)
        except WavefrontError as exc:
            raise ValueError(str(exc)) from None
        return self

    def snapshot(self):
        return self.model_dump(mode="json", by_alias=True)


def _path(loc):
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def parse_config(data, **overrides):
    """Validate a mapping; ``overrides`` replace top-level fields first.

    Raises
    ------
    ConfigError
        With the dotted path of the first offending field.
    """
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    data = dict(data)
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "experiment" and data.get("experiment", value) != value:
            raise ConfigError(f"config is for {data['experiment']!r}, not {value!r}", "experiment")
        data[key] = value
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigError(err["msg"], _path(err["loc"]) or "config") from None


def load_config(path, **overrides):
    """Read and validate a JSON configuration file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}", str(path)) from None
    return parse_config(data, **overrides)
