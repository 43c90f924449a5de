"""Line-oriented experiment description files.

One ``key: value`` directive per line, ``#`` starts a comment::

    # delay scan of one hyper-entangled state
    state: psi- x mu+
    unit: bs
    filter_fwhm_nm: 3
    delay_range_ps: -0.6 0.6
    points: 41
    pairs_per_point: 2000
    floor: 0.05
    seed: 7
    output: psi-_mu+.csv psi-_mu+.json

Lengths and delays are written in nm and ps and converted to SI on parsing.
Poisson noise is enabled by giving ``pairs_per_point``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .bell import HyperLabel, OamBell, PolBell, parse_label
from .hom import ScanConfig, SpectralModel
from .optics import CircuitError, ElementSetting

Label = Union[HyperLabel, PolBell, OamBell]

KEYS = (
    "state",
    "unit",
    "filter_fwhm_nm",
    "center_wavelength_nm",
    "delay_range_ps",
    "points",
    "pairs_per_point",
    "accidentals",
    "floor",
    "seed",
    "theta_points",
    "output",
    "prep",
)
REQUIRED = ("state",)
UNITS = {"bs": "bs", "bs_interference": "bs", "pbs": "pbs", "pbs_exchangephase": "pbs"}
DEFAULT_PAIRS = 1e4


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "Error"  # or "Warning"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity.lower()}: {self.message}"


class ExperimentParseError(ValueError):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class ExperimentSpec:
    source: Label
    unit: str = "bs"
    spectral: SpectralModel = field(default_factory=SpectralModel)
    delay_range: Optional[tuple[float, float]] = None  # seconds; None = +-3 tau_c
    points: int = 41
    pairs_per_point: Optional[float] = None  # None = noiseless
    accidentals: float = 0.0
    seed: int = 0
    theta_points: int = 32
    outputs: tuple[str, ...] = ()
    prep: Optional[tuple[ElementSetting, ...]] = None

    @property
    def noisy(self) -> bool:
        return self.pairs_per_point is not None

    def scan_config(self) -> ScanConfig:
        lo, hi = self.delay_range or (-3 * self.spectral.tau_c, 3 * self.spectral.tau_c)
        return ScanConfig(
            lo,
            hi,
            n_points=self.points,
            pairs_per_point=DEFAULT_PAIRS if self.pairs_per_point is None else self.pairs_per_point,
            accidental_rate=self.accidentals,
            rng_seed=self.seed,
            poisson=self.noisy,
        )

    def thetas(self) -> np.ndarray:
        return np.linspace(0.0, 2 * math.pi, self.theta_points, endpoint=False)


def _shortest(x: float, per_unit: float) -> str:
    """Shortest decimal d with float(d) / per_unit == x, so files round-trip."""
    for digits in range(1, 18):
        s = f"{x * per_unit:.{digits}g}"
        if float(s) / per_unit == x:
            return s
    return repr(x * per_unit)


def format_experiment(spec: ExperimentSpec) -> str:
    sp = spec.spectral
    lines = [
        f"state: {spec.source}",
        f"unit: {spec.unit}",
        f"filter_fwhm_nm: {_shortest(sp.filter_fwhm, 1e9)}",
        f"center_wavelength_nm: {_shortest(sp.center_wavelength, 1e9)}",
        f"floor: {sp.distinguishability_floor!r}",
        f"points: {spec.points}",
        f"theta_points: {spec.theta_points}",
        f"accidentals: {spec.accidentals!r}",
        f"seed: {spec.seed}",
    ]
    if spec.delay_range is not None:
        lo, hi = spec.delay_range
        lines.append(f"delay_range_ps: {_shortest(lo, 1e12)} {_shortest(hi, 1e12)}")
    if spec.pairs_per_point is not None:
        lines.append(f"pairs_per_point: {spec.pairs_per_point!r}")
    if spec.outputs:
        lines.append("output: " + " ".join(spec.outputs))
    if spec.prep is not None:
        lines.append("prep: " + "; ".join(el.to_text() for el in spec.prep))
    return "\n".join(lines) + "\n"


_LINE = re.compile(r"(\s*)([^:#\s][^:#]*?)\s*:(\s*)(.*?)\s*$")


def _number(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("not a finite number")
    return x


def _integer(v: str) -> int:
    if not re.fullmatch(r"[+-]?\d+", v):
        raise ValueError("not an integer")
    return int(v)


def parse_experiment(text: str) -> tuple[Optional[ExperimentSpec], list[ParseDiagnostic]]:
    """Parse an experiment description.

    Returns ``(spec, diagnostics)``; ``spec`` is None whenever any diagnostic
    has severity Error.
    """
    diags: list[ParseDiagnostic] = []
    seen: dict[str, tuple[int, int, str]] = {}  # key -> (line, value column, raw value)

    def err(line, col, msg):
        diags.append(ParseDiagnostic(line, col, msg, "Error"))

    def warn(line, col, msg):
        diags.append(ParseDiagnostic(line, col, msg, "Warning"))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        mt = _LINE.match(body)
        if not mt:
            col = len(body) - len(body.lstrip()) + 1
            err(lineno, col, "expected 'key: value'")
            continue
        lead, key, gap, value = mt.groups()
        key_col = len(lead) + 1
        val_col = mt.start(4) + 1
        key = key.lower()
        if key not in KEYS:
            err(lineno, key_col, f"unknown key {key!r}")
            continue
        if key in seen:
            err(lineno, key_col, f"duplicate key {key!r} (first given on line {seen[key][0]})")
            continue
        if not value:
            err(lineno, val_col, f"missing value for {key!r}")
            seen[key] = (lineno, val_col, None)
            continue
        seen[key] = (lineno, val_col, value)

    lines_of = {k: v[0] for k, v in seen.items()}
    for key in REQUIRED:
        if key not in seen:
            err(1, 1, f"missing required key: {key}")

    values: dict = {}

    def field_value(key, conv, check=None, msg=None):
        if key not in seen or seen[key][2] is None:
            return
        line, col, raw = seen[key]
        try:
            v = conv(raw)
        except (ValueError, CircuitError) as exc:
            err(line, col, f"invalid {key}: {exc}")
            return
        if check is not None and not check(v):
            err(line, col, f"invalid {key}: {msg}")
            return
        values[key] = v

    def delay_range(raw: str):
        parts = raw.replace(",", " ").split()
        nums = [_number(p) / 1e12 for p in parts]
        if len(nums) == 1:
            if nums[0] <= 0:
                raise ValueError("a single half-range must be > 0")
            return (-nums[0], nums[0])
        if len(nums) != 2:
            raise ValueError("expected 'min max' or a single half-range")
        if not nums[0] < nums[1]:
            raise ValueError("min must be < max")
        return (nums[0], nums[1])

    def outputs(raw: str):
        paths = tuple(p for p in re.split(r"[\s,]+", raw) if p)
        for p in paths:
            if not p.lower().endswith((".csv", ".json")):
                raise ValueError(f"{p!r} must end in .csv or .json")
        return paths

    def prep(raw: str):
        return tuple(ElementSetting.from_text(s) for s in raw.split(";") if s.strip())

    def unit(raw: str):
        u = raw.strip().lower()
        if u not in UNITS:
            raise ValueError("expected 'bs' or 'pbs'")
        return UNITS[u]

    field_value("state", parse_label)
    field_value("unit", unit)
    field_value("filter_fwhm_nm", lambda v: _number(v) / 1e9, lambda x: x > 0, "must be > 0")
    field_value("center_wavelength_nm", lambda v: _number(v) / 1e9, lambda x: x > 0, "must be > 0")
    field_value("delay_range_ps", delay_range)
    field_value("points", _integer, lambda x: x >= 7, "need at least 7 points")
    field_value("pairs_per_point", _number, lambda x: x > 0, "must be > 0")
    field_value("accidentals", _number, lambda x: x >= 0, "must be >= 0")
    field_value("floor", _number, lambda x: 0 <= x <= 1, "must lie in [0, 1]")
    field_value("seed", _integer, lambda x: 0 <= x < 2**64, "must be in [0, 2^64)")
    field_value("theta_points", _integer, lambda x: x >= 8, "need at least 8 theta points")
    field_value("output", outputs)
    field_value("prep", prep)

    u = values.get("unit", "bs")
    src = values.get("state")
    if u == "pbs":
        if src is not None and not isinstance(src, OamBell):
            line = lines_of.get("unit", 1)
            err(line, seen["unit"][1] if "unit" in seen else 1,
                f"PBS unit requires a pure OAM Bell label (mu+, mu-, nu+, nu-), got {src}")
        for k in ("delay_range_ps", "points", "prep"):
            if k in seen:
                warn(lines_of[k], 1, f"{k} is ignored by the pbs unit")
    else:
        if "theta_points" in seen:
            warn(lines_of["theta_points"], 1, "theta_points is ignored by the bs unit")
        if "prep" in values and src is not None and not isinstance(src, HyperLabel):
            err(lines_of["prep"], seen["prep"][1], "prep needs a hyper-entangled state label")

    if any(d.severity == "Error" for d in diags):
        return None, sorted(diags, key=lambda d: (d.line, d.column))

    spectral = SpectralModel(
        center_wavelength=values.get("center_wavelength_nm", SpectralModel.center_wavelength),
        filter_fwhm=values.get("filter_fwhm_nm", SpectralModel.filter_fwhm),
        distinguishability_floor=values.get("floor", 0.0),
    )
    spec = ExperimentSpec(
        source=src,
        unit=u,
        spectral=spectral,
        delay_range=values.get("delay_range_ps"),
        points=values.get("points", 41),
        pairs_per_point=values.get("pairs_per_point"),
        accidentals=values.get("accidentals", 0.0),
        seed=values.get("seed", 0),
        theta_points=values.get("theta_points", 32),
        outputs=values.get("output", ()),
        prep=values.get("prep"),
    )
    return spec, sorted(diags, key=lambda d: (d.line, d.column))


def load_experiment(text: str) -> ExperimentSpec:
    """Parse or raise ``ExperimentParseError`` carrying the diagnostics."""
    spec, diags = parse_experiment(text)
    if spec is None:
        raise ExperimentParseError(diags)
    return spec


__all__ = [
    "ExperimentSpec",
    "ExperimentParseError",
    "ParseDiagnostic",
    "format_experiment",
    "load_experiment",
    "parse_experiment",
]
