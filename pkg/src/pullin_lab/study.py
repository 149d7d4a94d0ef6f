"""Parametric studies over geometry, with CSV, SVG and JSON outputs.

A study varies one geometric parameter over a list of values, traces the tip
deflection versus voltage curve for each, brackets each pull-in voltage, and
can capture a deflection profile. Per-value jobs are independent, so they run
concurrently; the merged result is an immutable value that serializes to JSON
and reloads identically.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ._version import __version__ as _pkg_version
from .errors import NoPullInError, SchemaVersionError
from .model import BeamParams
from .pullin import CurvePoint, DeflectionCurve, PullInResult, find_pullin, sweep_voltage
from .static_solver import SolverOptions, build_grid, solve_static

SCHEMA_VERSION = 1
AUTO_GRID = "auto-to-pull-in"
_AUTO_POINTS = 40
_AUTO_RATIO = 0.9
_PROFILE_FRACTION = 0.8

_FIELD_FOR_VARY = {
    "length": "length_L",
    "thickness": "thickness_h",
    "gap": "gap_G",
    "width": "width_b",
}


@dataclass(frozen=True)
class StudySpec:
    """What to vary, over which values, and what to record.

    Attributes:
        base: beam all values start from.
        vary: one of "length", "thickness", "gap", "width".
        values: parameter values in meters, ascending and positive.
        voltage_grid: explicit probe voltages, or "auto-to-pull-in" to place
            40 points from zero to just under each value's own pull-in,
            spaced geometrically denser toward the fold.
        outputs: subset of {"curves", "pullin", "profile"}.
        grid_n: physical node count for every solve.
        rel_tolerance / max_iterations: static iteration controls.
        pullin_tol_V: bracket width for pull-in searches, V.
    """

    base: BeamParams
    vary: str
    values: tuple[float, ...]
    voltage_grid: Union[tuple[float, ...], str] = AUTO_GRID
    outputs: frozenset[str] = frozenset({"curves", "pullin"})
    grid_n: int = 201
    rel_tolerance: float = 1e-3
    max_iterations: int = 500
    pullin_tol_V: float = 0.01

    def __post_init__(self) -> None:
        if self.vary not in _FIELD_FOR_VARY:
            raise ValueError(f"vary must be one of {sorted(_FIELD_FOR_VARY)}, got {self.vary!r}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("values must be non-empty")
        if any(v <= 0 for v in values):
            raise ValueError("values must be positive")
        if list(values) != sorted(values):
            raise ValueError("values must be sorted ascending")
        object.__setattr__(self, "values", values)
        if isinstance(self.voltage_grid, str):
            if self.voltage_grid != AUTO_GRID:
                raise ValueError(f"voltage_grid string must be {AUTO_GRID!r}")
        else:
            vg = tuple(float(v) for v in self.voltage_grid)
            if any(v < 0 for v in vg):
                raise ValueError("voltage grid entries must be non-negative")
            object.__setattr__(self, "voltage_grid", vg)
        outputs = frozenset(self.outputs)
        unknown = outputs - {"curves", "pullin", "profile"}
        if unknown:
            raise ValueError(f"unknown outputs: {sorted(unknown)}")
        if not outputs:
            raise ValueError("outputs must not be empty")
        object.__setattr__(self, "outputs", outputs)


@dataclass(frozen=True)
class ValueRecord:
    """Everything computed for a single parameter value."""

    param_value_m: float
    gap_G: float
    curve: Optional[DeflectionCurve]
    pullin: Optional[PullInResult]
    pullin_error: Optional[str]
    profile_x: Optional[tuple[float, ...]]
    profile_y: Optional[tuple[float, ...]]
    profile_voltage_V: Optional[float]


@dataclass(frozen=True)
class StudyResult:
    """Merged study output plus the metadata needed to reproduce it."""

    spec: StudySpec
    records: tuple[ValueRecord, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def stability_limits(self) -> tuple[tuple[float, float], ...]:
        """(parameter value, G/3) per record; the one-DOF travel limit."""
        return tuple((r.param_value_m, r.gap_G / 3.0) for r in self.records)


def _auto_voltages(v_lower: float) -> tuple[float, ...]:
    """Probe grid from 0 to v_lower, geometrically denser near the fold."""
    gaps = _AUTO_RATIO ** np.arange(_AUTO_POINTS - 1)
    points = np.concatenate(([0.0], np.cumsum(gaps)))
    points *= v_lower / points[-1]
    points[-1] = v_lower
    return tuple(float(v) for v in points)


def _thread_count(n_jobs: int) -> int:
    raw = os.environ.get("PULLIN_LAB_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap < 1:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_jobs))


def _run_one(spec: StudySpec, value: float) -> ValueRecord:
    params = spec.base.with_(**{_FIELD_FOR_VARY[spec.vary]: value})
    grid = build_grid(spec.grid_n, params)
    opts = SolverOptions(
        rel_tolerance=spec.rel_tolerance, max_iterations=spec.max_iterations
    )

    need_pullin = "pullin" in spec.outputs or spec.voltage_grid == AUTO_GRID
    pullin_result: Optional[PullInResult] = None
    pullin_error: Optional[str] = None
    if need_pullin:
        try:
            pullin_result = find_pullin(params, tol=spec.pullin_tol_V, grid=grid, opts=opts)
        except NoPullInError as exc:
            pullin_error = str(exc)

    curve: Optional[DeflectionCurve] = None
    if "curves" in spec.outputs:
        if spec.voltage_grid == AUTO_GRID:
            if pullin_result is not None:
                curve = sweep_voltage(params, _auto_voltages(pullin_result.v_lower), grid, opts)
        else:
            curve = sweep_voltage(params, spec.voltage_grid, grid, opts)

    profile_x = profile_y = None
    profile_v: Optional[float] = None
    if "profile" in spec.outputs:
        anchor = None
        if pullin_result is not None:
            anchor = pullin_result.v_lower
        elif curve is not None:
            converged = curve.converged_points()
            if converged:
                anchor = max(p.voltage_V for p in converged)
        if anchor is not None and anchor > 0:
            profile_v = _PROFILE_FRACTION * anchor
            sol = solve_static(params, profile_v, grid, opts)
            if sol.converged:
                x = np.arange(grid.n_interior) * grid.spacing_h
                profile_x = tuple(float(v) for v in x)
                profile_y = tuple(float(v) for v in sol.deflection)
            else:
                profile_v = None

    return ValueRecord(
        param_value_m=value,
        gap_G=params.gap_G,
        curve=curve,
        pullin=pullin_result,
        pullin_error=pullin_error,
        profile_x=profile_x,
        profile_y=profile_y,
        profile_voltage_V=profile_v,
    )


def run_study(spec: StudySpec) -> StudyResult:
    """Execute every per-value job and merge the records in value order.

    Jobs are independent; they run on a thread pool sized by the
    PULLIN_LAB_THREADS environment variable (default: CPU count, capped by
    the number of values). A value whose pull-in search fails is recorded
    with the error message and the remaining values still complete.
    """
    workers = _thread_count(len(spec.values))
    if workers == 1:
        records = [_run_one(spec, v) for v in spec.values]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda v: _run_one(spec, v), spec.values))
    metadata = {
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "package_version": _pkg_version,
        "grid_n": spec.grid_n,
        "rel_tolerance": spec.rel_tolerance,
        "max_iterations": spec.max_iterations,
        "pullin_tol_V": spec.pullin_tol_V,
    }
    return StudyResult(spec=spec, records=tuple(records), metadata=metadata)


# ---------------------------------------------------------------------------
# serialization

def _num(x: float) -> str:
    """Shortest decimal that round-trips the float."""
    return repr(float(x))


def _spec_to_dict(spec: StudySpec) -> dict:
    return {
        "base": vars(spec.base).copy(),
        "vary": spec.vary,
        "values": list(spec.values),
        "voltage_grid": (
            spec.voltage_grid if isinstance(spec.voltage_grid, str) else list(spec.voltage_grid)
        ),
        "outputs": sorted(spec.outputs),
        "grid_n": spec.grid_n,
        "rel_tolerance": spec.rel_tolerance,
        "max_iterations": spec.max_iterations,
        "pullin_tol_V": spec.pullin_tol_V,
    }


def _spec_from_dict(d: dict) -> StudySpec:
    return StudySpec(
        base=BeamParams(**d["base"]),
        vary=d["vary"],
        values=tuple(d["values"]),
        voltage_grid=(
            d["voltage_grid"] if isinstance(d["voltage_grid"], str) else tuple(d["voltage_grid"])
        ),
        outputs=frozenset(d["outputs"]),
        grid_n=d["grid_n"],
        rel_tolerance=d["rel_tolerance"],
        max_iterations=d["max_iterations"],
        pullin_tol_V=d["pullin_tol_V"],
    )


def _record_to_dict(r: ValueRecord) -> dict:
    return {
        "param_value_m": r.param_value_m,
        "gap_G": r.gap_G,
        "curve": None if r.curve is None else [list(p) for p in r.curve.points],
        "pullin": None if r.pullin is None else vars(r.pullin).copy(),
        "pullin_error": r.pullin_error,
        "profile_x": None if r.profile_x is None else list(r.profile_x),
        "profile_y": None if r.profile_y is None else list(r.profile_y),
        "profile_voltage_V": r.profile_voltage_V,
    }


def _record_from_dict(d: dict) -> ValueRecord:
    curve = None
    if d["curve"] is not None:
        curve = DeflectionCurve(
            points=tuple(CurvePoint(p[0], p[1], bool(p[2])) for p in d["curve"])
        )
    pullin = None if d["pullin"] is None else PullInResult(**d["pullin"])
    return ValueRecord(
        param_value_m=d["param_value_m"],
        gap_G=d["gap_G"],
        curve=curve,
        pullin=pullin,
        pullin_error=d["pullin_error"],
        profile_x=None if d["profile_x"] is None else tuple(d["profile_x"]),
        profile_y=None if d["profile_y"] is None else tuple(d["profile_y"]),
        profile_voltage_V=d["profile_voltage_V"],
    )


def _result_to_dict(result: StudyResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "spec": _spec_to_dict(result.spec),
        "records": [_record_to_dict(r) for r in result.records],
        "metadata": result.metadata,
    }


def _result_from_dict(d: dict) -> StudyResult:
    return StudyResult(
        spec=_spec_from_dict(d["spec"]),
        records=tuple(_record_from_dict(r) for r in d["records"]),
        metadata=d["metadata"],
    )


# ---------------------------------------------------------------------------
# export and load

def _write_curves_csv(result: StudyResult, target: Path) -> None:
    with open(target, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["param_name", "param_value_m", "voltage_V", "tip_deflection_m", "converged"]
        )
        for rec in result.records:
            if rec.curve is None:
                continue
            for p in rec.curve.points:
                writer.writerow(
                    [
                        result.spec.vary,
                        _num(rec.param_value_m),
                        _num(p.voltage_V),
                        _num(p.tip_deflection_m),
                        "true" if p.converged else "false",
                    ]
                )


def _write_pullin_csv(result: StudyResult, target: Path) -> None:
    with open(target, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["param_name", "param_value_m", "v_lower_V", "v_upper_V", "tip_at_lower_m", "tip_over_gap"]
        )
        for rec in result.records:
            if rec.pullin is None:
                continue
            writer.writerow(
                [
                    result.spec.vary,
                    _num(rec.param_value_m),
                    _num(rec.pullin.v_lower),
                    _num(rec.pullin.v_upper),
                    _num(rec.pullin.tip_at_lower),
                    _num(rec.pullin.tip_at_lower / rec.gap_G),
                ]
            )


def _write_profile_csv(result: StudyResult, target: Path) -> None:
    with open(target, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["param_name", "param_value_m", "voltage_V", "x_m", "deflection_m"])
        for rec in result.records:
            if rec.profile_x is None or rec.profile_y is None:
                continue
            for x, y in zip(rec.profile_x, rec.profile_y):
                writer.writerow(
                    [
                        result.spec.vary,
                        _num(rec.param_value_m),
                        _num(rec.profile_voltage_V),
                        _num(x),
                        _num(y),
                    ]
                )


_PALETTE = ("#1b6ca8", "#c0392b", "#1e8449", "#8e44ad", "#d68910", "#17828a", "#5d6d7e")


def _svg_chart(result: StudyResult) -> str:
    """Tip deflection vs voltage: one solid polyline per value, dashed G/3."""
    width, height = 640.0, 480.0
    ml, mr, mt, mb = 70.0, 20.0, 20.0, 55.0

    curves = []
    for rec in result.records:
        if rec.curve is None:
            continue
        pts = sorted(rec.curve.converged_points(), key=lambda p: p.voltage_V)
        if pts:
            curves.append((rec, pts))
    v_max = max((p.voltage_V for _, pts in curves for p in pts), default=1.0) or 1.0
    limits = {rec.gap_G / 3.0 for rec in result.records}
    y_max = max(
        max((p.tip_deflection_m for _, pts in curves for p in pts), default=0.0),
        max(limits, default=0.0),
    ) * 1.05 or 1.0

    def sx(v: float) -> float:
        return ml + (width - ml - mr) * v / v_max

    def sy(y: float) -> float:
        return height - mb - (height - mt - mb) * y / y_max

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:g} {height:g}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width:g}" height="{height:g}" fill="white"/>',
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>',
    ]
    for i in range(6):
        v = v_max * i / 5.0
        y = y_max * i / 5.0
        parts.append(
            f'<text x="{sx(v):.1f}" y="{height - mb + 18:.1f}" text-anchor="middle">{v:.3g}</text>'
        )
        parts.append(
            f'<text x="{ml - 8:.1f}" y="{sy(y) + 4:.1f}" text-anchor="end">{y * 1e6:.3g}</text>'
        )
    parts.append(
        f'<text x="{(ml + width - mr) / 2:.1f}" y="{height - 12:.1f}" text-anchor="middle">'
        "applied voltage, V</text>"
    )
    parts.append(
        f'<text x="16" y="{(mt + height - mb) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(mt + height - mb) / 2:.1f})">tip deflection, um</text>'
    )

    for limit in sorted(limits):
        parts.append(
            f'<line x1="{ml}" y1="{sy(limit):.2f}" x2="{width - mr}" y2="{sy(limit):.2f}" '
            f'stroke="#555555" stroke-dasharray="6 4"/>'
        )
    for i, (rec, pts) in enumerate(curves):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{sx(p.voltage_V):.2f},{sy(p.tip_deflection_m):.2f}" for p in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{width - mr - 140:.1f}" y="{mt + 16 + 16 * i:.1f}" fill="{color}">'
            f"{result.spec.vary} = {rec.param_value_m * 1e6:.4g} um</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts)


def export(result: StudyResult, format: str, path: Union[str, Path]) -> list[Path]:
    """Write the study to disk; returns the files written.

    Args:
        result: study to serialize.
        format: "csv" (one file per requested output), "svg" (curve chart
            with the dashed stability limit), or "json" (lossless snapshot).
        path: target directory, created if needed.
    """
    out_dir = Path(path)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if format == "csv":
        outputs = result.spec.outputs
        if "curves" in outputs:
            target = out_dir / "curves.csv"
            _write_curves_csv(result, target)
            written.append(target)
        if "pullin" in outputs:
            target = out_dir / "pullin.csv"
            _write_pullin_csv(result, target)
            written.append(target)
        if "profile" in outputs:
            target = out_dir / "profile.csv"
            _write_profile_csv(result, target)
            written.append(target)
    elif format == "svg":
        target = out_dir / "curves.svg"
        target.write_text(_svg_chart(result))
        written.append(target)
    elif format == "json":
        target = out_dir / "study.json"
        with open(target, "w") as fh:
            json.dump(_result_to_dict(result), fh, indent=1)
            fh.write("\n")
        written.append(target)
    else:
        raise ValueError(f"unknown export format {format!r}")
    return written


def load(path: Union[str, Path]) -> StudyResult:
    """Reload a study written by export(..., "json", ...).

    Args:
        path: the study.json file, or a directory containing one.

    Raises:
        SchemaVersionError: the file's schema_version is unsupported.
    """
    p = Path(path)
    if p.is_dir():
        p = p / "study.json"
    with open(p) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "schema_version" not in data:
        raise SchemaVersionError(f"{p} is not a study file")
    if data["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"unsupported schema version {data['schema_version']!r}, expected {SCHEMA_VERSION}"
        )
    return _result_from_dict(data)
