"""Command line interface.

Every subcommand builds the same request models the HTTP service consumes
and runs them through the in-process handlers, or POSTs them to a running
service when --server is given. Machine-readable results go to files under
--out; stdout carries exactly one human summary line.

Value precedence: built-in defaults (the reference device), then the
--config JSON file, then explicit flags.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Any, Optional

from .errors import PullinLabError
from .service import handlers
from .service import schemas as s
from . import study as study_mod

_LENGTH_UNITS = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9}

#: Error codes that mean "the physics said no", not "you called it wrong".
_DOMAIN_CODES = {
    "NoPullInError",
    "PastPullInError",
    "GapClosedError",
    "NotConvergedError",
    "SchemaVersionError",
}


def parse_length(text: str) -> float:
    """Parse a length in meters, accepting unit suffixes like 300um or 2.5nm."""
    raw = str(text).strip()
    for suffix in sorted(_LENGTH_UNITS, key=len, reverse=True):
        if raw.endswith(suffix):
            number = raw[: -len(suffix)].strip()
            if number:
                try:
                    return float(number) * _LENGTH_UNITS[suffix]
                except ValueError:
                    break
            break
    try:
        return float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a length: {text!r}") from None


def _parse_length_list(text: str) -> list[float]:
    return [parse_length(part) for part in str(text).split(",") if part.strip()]


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}") from None


_LENGTH_KEYS = {"length", "width", "thickness", "gap"}
_FLOAT_KEYS = {
    "youngs", "density", "tip_mass", "voltage", "tol", "dc", "ac_amplitude",
    "ac_frequency", "duration", "dt", "vmax", "km", "area", "gamma", "permittivity",
}
_INT_KEYS = {"grid_n", "modes"}
_LIST_LENGTH_KEYS = {"values"}
_LIST_FLOAT_KEYS = {"voltages"}
_STR_KEYS = {"vary", "outputs"}
_KNOWN_CONFIG_KEYS = (
    _LENGTH_KEYS | _FLOAT_KEYS | _INT_KEYS | _LIST_LENGTH_KEYS | _LIST_FLOAT_KEYS | _STR_KEYS
)


class _ConfigError(Exception):
    pass


def _load_config(path: Optional[str]) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise _ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise _ConfigError(f"config {path} must hold a JSON object")
    unknown = set(data) - _KNOWN_CONFIG_KEYS
    if unknown:
        raise _ConfigError(f"config {path} has unknown keys: {sorted(unknown)}")
    return data


def _cast_config(key: str, value: Any) -> Any:
    try:
        if key in _LENGTH_KEYS:
            return parse_length(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
        if key in _LIST_LENGTH_KEYS:
            if isinstance(value, str):
                return _parse_length_list(value)
            return [parse_length(v) for v in value]
        if key in _LIST_FLOAT_KEYS:
            if isinstance(value, str):
                return _parse_float_list(value)
            return [float(v) for v in value]
        return value
    except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
        raise _ConfigError(f"config key {key!r}: {exc}") from exc


class _Settings:
    """Flag-over-config-over-default resolution."""

    def __init__(self, args: argparse.Namespace, config: dict[str, Any]):
        self._args = args
        self._config = config

    def get(self, key: str, default: Any = None) -> Any:
        flag = getattr(self._args, key, None)
        if flag is not None:
            return flag
        if key in self._config:
            return _cast_config(key, self._config[key])
        return default


def _beam_in(st: _Settings) -> s.BeamIn:
    overrides = {}
    for key, field in (
        ("length", "length_L"),
        ("width", "width_b"),
        ("thickness", "thickness_h"),
        ("gap", "gap_G"),
        ("youngs", "youngs_E"),
        ("density", "density_rho"),
        ("permittivity", "permittivity_eps"),
        ("tip_mass", "tip_mass_M"),
    ):
        value = st.get(key)
        if value is not None:
            overrides[field] = value
    return s.BeamIn(**overrides)


def _solver_in(st: _Settings, tol_is_solver: bool) -> s.SolverIn:
    kwargs: dict[str, Any] = {}
    grid_n = st.get("grid_n")
    if grid_n is not None:
        kwargs["grid_n"] = grid_n
    if tol_is_solver:
        tol = st.get("tol")
        if tol is not None:
            kwargs["rel_tolerance"] = tol
    return s.SolverIn(**kwargs)


def _post(server: str, path: str, payload: dict) -> dict:
    import httpx

    try:
        response = httpx.post(server.rstrip("/") + path, json=payload, timeout=600.0)
    except httpx.HTTPError as exc:
        raise _RemoteError("network", f"cannot reach {server}: {exc}") from exc
    if response.status_code >= 400:
        try:
            body = response.json()
        except ValueError:
            body = {}
        code = body.get("code", f"http {response.status_code}")
        message = body.get("message") or body.get("detail") or response.text
        raise _RemoteError(code, f"{code}: {message}")
    return response.json()


class _RemoteError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _dispatch(args: argparse.Namespace, path: str, request: Any, response_cls: Any) -> Any:
    if args.server:
        data = _post(args.server, path, request.model_dump(mode="json"))
        return response_cls.model_validate(data)
    handler = {
        "/static": handlers.handle_static,
        "/sweep": handlers.handle_sweep,
        "/pullin": handlers.handle_pullin,
        "/modal": handlers.handle_modal,
        "/dynamic": handlers.handle_dynamic,
        "/lumped": handlers.handle_lumped,
        "/study": handlers.handle_study,
    }[path]
    return handler(request)


def _out_dir(args: argparse.Namespace) -> Optional[Path]:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(out: Path, name: str, model: Any) -> None:
    with open(out / name, "w") as fh:
        json.dump(model.model_dump(mode="json"), fh, indent=1)
        fh.write("\n")


def _write_csv(out: Path, name: str, header: list[str], rows: list[list[Any]]) -> None:
    with open(out / name, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_static(args: argparse.Namespace, st: _Settings) -> int:
    req = s.StaticRequest(
        beam=_beam_in(st),
        voltage_V=st.get("voltage", 0.0),
        solver=_solver_in(st, tol_is_solver=True),
    )
    resp = _dispatch(args, "/static", req, s.StaticResponse)
    out = _out_dir(args)
    if out:
        _write_json(out, "static.json", resp)
        _write_csv(
            out, "static.csv", ["x_m", "deflection_m"],
            [[repr(x), repr(y)] for x, y in zip(resp.x_m, resp.deflection_m)],
        )
    print(
        f"tip deflection {resp.tip_deflection_m:.6g} m at {resp.voltage_V:g} V "
        f"({resp.iterations} iterations, converged {str(resp.converged).lower()})"
    )
    return 0


def _cmd_sweep(args: argparse.Namespace, st: _Settings) -> int:
    voltages = st.get("voltages")
    if not voltages:
        print("sweep needs --voltages (or a voltages list in the config)", file=sys.stderr)
        return 2
    req = s.SweepRequest(
        beam=_beam_in(st),
        voltages_V=list(voltages),
        solver=_solver_in(st, tol_is_solver=True),
    )
    resp = _dispatch(args, "/sweep", req, s.SweepResponse)
    out = _out_dir(args)
    if out:
        _write_json(out, "sweep.json", resp)
        _write_csv(
            out, "sweep.csv", ["voltage_V", "tip_deflection_m", "converged"],
            [
                [repr(p.voltage_V), repr(p.tip_deflection_m), "true" if p.converged else "false"]
                for p in resp.points
            ],
        )
    n_conv = sum(1 for p in resp.points if p.converged)
    tips = [p.tip_deflection_m for p in resp.points if p.converged]
    span = f", tip up to {max(tips):.6g} m" if tips else ""
    print(f"swept {len(resp.points)} voltages, {n_conv} converged{span}")
    return 0


def _cmd_pullin(args: argparse.Namespace, st: _Settings) -> int:
    req = s.PullInRequest(
        beam=_beam_in(st),
        tol_V=st.get("tol", 0.01),
        v_max_hint=st.get("vmax"),
        solver=_solver_in(st, tol_is_solver=False),
    )
    resp = _dispatch(args, "/pullin", req, s.PullInResponse)
    out = _out_dir(args)
    if out:
        _write_json(out, "pullin.json", resp)
    print(
        f"pull-in between {resp.v_lower_V:.6g} V and {resp.v_upper_V:.6g} V "
        f"(bracket {resp.bracket_width_V:.3g} V), tip_over_gap {resp.tip_over_gap:.4f}"
    )
    return 0


def _cmd_modal(args: argparse.Namespace, st: _Settings) -> int:
    req = s.ModalRequest(
        beam=_beam_in(st),
        bias_voltage_V=st.get("voltage", 0.0),
        n_modes=st.get("modes", 3),
        include_shapes=bool(getattr(args, "shapes", False)),
        solver=_solver_in(st, tol_is_solver=True),
    )
    resp = _dispatch(args, "/modal", req, s.ModalResponse)
    out = _out_dir(args)
    if out:
        _write_json(out, "modal.json", resp)
        _write_csv(
            out, "modal.csv", ["mode", "frequency_rad_s", "frequency_hz"],
            [
                [i + 1, repr(w), repr(f)]
                for i, (w, f) in enumerate(zip(resp.frequencies_rad_s, resp.frequencies_hz))
            ],
        )
    freqs = ", ".join(f"{f:.6g}" for f in resp.frequencies_rad_s)
    print(f"modes at {resp.bias_voltage_V:g} V bias: {freqs} rad/s")
    return 0


def _cmd_dynamic(args: argparse.Namespace, st: _Settings) -> int:
    duration = st.get("duration")
    if duration is None:
        print("dynamic needs --duration (seconds)", file=sys.stderr)
        return 2
    req = s.DynamicRequest(
        beam=_beam_in(st),
        dc_Vp=st.get("dc", 0.0),
        ac_amplitude=st.get("ac_amplitude", 0.0),
        ac_frequency=st.get("ac_frequency", 0.0),
        duration_s=duration,
        dt_s=st.get("dt"),
        solver=_solver_in(st, tol_is_solver=True),
    )
    resp = _dispatch(args, "/dynamic", req, s.DynamicResponse)
    out = _out_dir(args)
    if out:
        _write_json(out, "dynamic.json", resp)
        _write_csv(
            out, "trace.csv", ["time_s", "tip_m"],
            [[repr(t), repr(y)] for t, y in zip(resp.times_s, resp.tip_m)],
        )
    tail = f", pulled in at step {resp.diverged_at}" if resp.diverged_at is not None else ""
    print(
        f"{len(resp.times_s)} steps of {resp.step_dt_s:.4g} s, "
        f"final tip {resp.tip_m[-1]:.6g} m{tail}"
    )
    return 0


def _cmd_lumped(args: argparse.Namespace, st: _Settings) -> int:
    km = st.get("km")
    area = st.get("area")
    if km is None or area is None:
        print("lumped needs --km and --area", file=sys.stderr)
        return 2
    kwargs: dict[str, Any] = {"spring_Km": km, "area_A": area}
    gap = st.get("gap")
    if gap is not None:
        kwargs["gap_G"] = gap
    else:
        kwargs["gap_G"] = s.BeamIn().gap_G
    permittivity = st.get("permittivity")
    if permittivity is not None:
        kwargs["permittivity_eps"] = permittivity
    gamma = st.get("gamma")
    if gamma is not None:
        kwargs["gamma"] = gamma
    voltage = st.get("voltage")
    if voltage is not None:
        kwargs["voltage_V"] = voltage
    req = s.LumpedRequest(**kwargs)
    resp = _dispatch(args, "/lumped", req, s.LumpedResponse)
    out = _out_dir(args)
    if out:
        _write_json(out, "lumped.json", resp)
    extra = ""
    if resp.equilibrium_m is not None:
        extra = f", equilibrium {resp.equilibrium_m:.6g} m at {voltage:g} V"
    print(
        f"pull-in voltage {resp.pullin_voltage_V:.4f} V, "
        f"pull-in position {resp.pullin_position_m:.6g} m{extra}"
    )
    return 0


def _cmd_study(args: argparse.Namespace, st: _Settings) -> int:
    vary = st.get("vary")
    values = st.get("values")
    if not vary or not values:
        print("study needs --vary and --values", file=sys.stderr)
        return 2
    outputs_raw = st.get("outputs", "curves,pullin")
    outputs = [part.strip() for part in str(outputs_raw).split(",") if part.strip()]
    req = s.StudyRequest(
        beam=_beam_in(st),
        vary=vary,
        values_m=sorted(values),
        voltage_grid_V=st.get("voltages"),
        outputs=outputs,
        pullin_tol_V=st.get("tol", 0.01),
        solver=_solver_in(st, tol_is_solver=False),
    )
    resp = _dispatch(args, "/study", req, s.StudyResponse)
    result = study_mod._result_from_dict(resp.study)
    out = _out_dir(args) or Path(".")
    written = []
    for fmt in ("csv", "svg", "json"):
        written.extend(study_mod.export(result, fmt, out))
    names = ", ".join(p.name for p in written)
    print(f"study of {vary} over {len(values)} values: wrote {names} in {out}")
    return 0


_COMMANDS = {
    "static": _cmd_static,
    "sweep": _cmd_sweep,
    "pullin": _cmd_pullin,
    "modal": _cmd_modal,
    "dynamic": _cmd_dynamic,
    "lumped": _cmd_lumped,
    "study": _cmd_study,
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--out", help="directory for machine-readable outputs")
    common.add_argument("--server", help="base URL of a running service; default in-process")

    beam = argparse.ArgumentParser(add_help=False)
    beam.add_argument("--length", type=parse_length, help="beam length (m; um suffix ok)")
    beam.add_argument("--width", type=parse_length, help="beam width (m; um suffix ok)")
    beam.add_argument("--thickness", type=parse_length, help="beam thickness (m; um suffix ok)")
    beam.add_argument("--gap", type=parse_length, help="electrode gap (m; um suffix ok)")
    beam.add_argument("--youngs", type=float, help="Young's modulus, Pa")
    beam.add_argument("--density", type=float, help="density, kg/m^3")
    beam.add_argument("--tip-mass", dest="tip_mass", type=float, help="tip proof mass, kg")
    beam.add_argument("--grid-n", dest="grid_n", type=int, help="physical node count")

    parser = argparse.ArgumentParser(
        prog="pullin-lab",
        description="Electrostatic micro-cantilever solvers: statics, pull-in, modes, transients.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("static", parents=[common, beam], help="static deflection at a DC voltage")
    p.add_argument("--voltage", type=float, help="DC voltage, V (default 0)")
    p.add_argument("--tol", type=float, help="iteration relative tolerance (default 1e-3)")

    p = sub.add_parser("sweep", parents=[common, beam], help="tip deflection over a voltage list")
    p.add_argument("--voltages", type=_parse_float_list, help="comma-separated voltages, V")
    p.add_argument("--tol", type=float, help="iteration relative tolerance")

    p = sub.add_parser("pullin", parents=[common, beam], help="bracket the pull-in voltage")
    p.add_argument("--tol", type=float, help="bracket width target, V (default 0.01)")
    p.add_argument("--vmax", type=float, help="initial search ceiling, V")

    p = sub.add_parser("modal", parents=[common, beam], help="natural frequencies at a DC bias")
    p.add_argument("--voltage", type=float, help="bias voltage, V (default 0)")
    p.add_argument("--modes", type=int, help="mode count, 1 to 5 (default 3)")
    p.add_argument("--shapes", action="store_true", help="include mode shapes in the JSON output")
    p.add_argument("--tol", type=float, help="static iteration tolerance")

    p = sub.add_parser("dynamic", parents=[common, beam], help="transient response under DC+AC drive")
    p.add_argument("--dc", type=float, help="DC bias, V (default 0)")
    p.add_argument("--ac-amplitude", dest="ac_amplitude", type=float, help="AC amplitude, V")
    p.add_argument("--ac-frequency", dest="ac_frequency", type=float, help="AC angular frequency, rad/s")
    p.add_argument("--duration", type=float, help="simulated time, s")
    p.add_argument("--dt", type=float, help="time step, s (default t_star/2000)")
    p.add_argument("--tol", type=float, help="per-step iteration tolerance")

    p = sub.add_parser("lumped", parents=[common], help="one-DOF spring-capacitor pull-in model")
    p.add_argument("--km", type=float, help="spring constant, N/m")
    p.add_argument("--area", type=float, help="plate area, m^2")
    p.add_argument("--gap", type=parse_length, help="rest gap (m; um suffix ok)")
    p.add_argument("--permittivity", type=float, help="permittivity, F/m")
    p.add_argument("--gamma", type=float, help="elasticity nonlinearity factor (must be 1)")
    p.add_argument("--voltage", type=float, help="also report the equilibrium at this voltage")

    p = sub.add_parser("study", parents=[common, beam], help="parametric study with CSV/SVG/JSON export")
    p.add_argument("--vary", choices=["length", "thickness", "gap", "width"], help="parameter to vary")
    p.add_argument("--values", type=_parse_length_list, help="comma-separated values (m; um suffix ok)")
    p.add_argument("--voltages", type=_parse_float_list,
                   help="explicit probe voltages, V (default: auto up to each pull-in)")
    p.add_argument("--outputs", help="comma subset of curves,pullin,profile (default curves,pullin)")
    p.add_argument("--tol", type=float, help="pull-in bracket width, V (default 0.01)")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _load_config(args.config)
    except _ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    settings = _Settings(args, config)
    try:
        return _COMMANDS[args.command](args, settings)
    except PullinLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _RemoteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if exc.code in _DOMAIN_CODES else 2
    except (ValueError, NotImplementedError) as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


run = main

if __name__ == "__main__":
    entrypoint()
