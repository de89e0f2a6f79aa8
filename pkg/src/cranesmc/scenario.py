"""Scenario files: INI-style key-value documents driving the simulator.

Sections are [plant], [nominal], [gains], [fuzzy], [trajectory],
[obstacle], [sim]. Unknown sections or keys are hard errors, as are
missing required keys; optional keys take the documented defaults. All
numbers are SI units in decimal notation. ``resolve`` produces a fully
concrete string-valued document (every default filled in), which is what
``meta.txt`` echoes back, so an echoed configuration re-parses to an
identical run.
"""

from __future__ import annotations

import configparser
import io
import math
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .dynamics import CraneParams, CraneState
from .engine import ScenarioConfig
from .errors import ScenarioError
from .fuzzy import FuzzyAxis
from .smc import ControllerGains
from .trajectory import ObstacleSpec, make_semicircle, make_setpoint

Resolved = Dict[str, Dict[str, str]]

_REQUIRED = "__required__"
_AUTO = "auto"
_FROM_PLANT = "__from_plant__"

# Section -> key -> default (or a sentinel). Trajectory keys depend on the
# generator type and are handled separately.
_SCHEMA: Dict[str, Dict[str, str]] = {
    "plant": {
        "M": _REQUIRED,
        "m": _REQUIRED,
        "g": "9.81",
        "friction_viscous_x": "0.0",
        "friction_viscous_l": "0.0",
        "disturbance_x_const": "0.0",
        "disturbance_x_sin_amp": "0.0",
        "disturbance_x_sin_freq_hz": "0.0",
        "disturbance_l_const": "0.0",
        "disturbance_l_sin_amp": "0.0",
        "disturbance_l_sin_freq_hz": "0.0",
    },
    "nominal": {
        "M": _FROM_PLANT,
        "m": _FROM_PLANT,
        "g": _FROM_PLANT,
    },
    "gains": {
        "alpha_x": _REQUIRED,
        "alpha_l": _REQUIRED,
        "alpha_theta": _REQUIRED,
        "lambda_x": _REQUIRED,
        "lambda_l": _REQUIRED,
        "lambda_theta": _REQUIRED,
        "K_x": _REQUIRED,
        "K_l": _REQUIRED,
        "phi_x": _REQUIRED,
        "phi_l": _REQUIRED,
        "switching": "smooth",
        "det_tol": "1e-8",
    },
    "fuzzy": {
        "enabled": "false",
        "rule_count": "7",
        "span_x": _AUTO,   # auto: 2 * phi_x
        "span_l": _AUTO,   # auto: 2 * phi_l
        "phi_adapt_x": "10.0",
        "phi_adapt_l": "10.0",
        "d_hat_cap_x": "1000.0",
        "d_hat_cap_l": "1000.0",
    },
    "obstacle": {
        "x_center": _REQUIRED,
        "top_depth": _REQUIRED,
        "width": _REQUIRED,
        "height": _REQUIRED,
        "top_clearance": _REQUIRED,
    },
    "sim": {
        "t_end": _REQUIRED,
        "dt_plant": "0.001",
        "dt_control": "0.01",
        "initial_x": "0.0",
        "initial_l": _REQUIRED,
        "initial_theta": "0.0",
        "initial_x_dot": "0.0",
        "initial_l_dot": "0.0",
        "initial_theta_dot": "0.0",
        "rng_seed": "0",
        "noise_std_x": "0.0",
        "noise_std_l": "0.0",
        "noise_std_theta": "0.0",
        "noise_std_x_dot": "0.0",
        "noise_std_l_dot": "0.0",
        "noise_std_theta_dot": "0.0",
        "u_max": "none",
        "validate_gains": "true",
        "check_sliding_consistency": "false",
    },
}

_TRAJECTORY_KEYS = {
    "setpoint": {"x_target": _REQUIRED, "l_target": _REQUIRED},
    "semicircle": {
        "x_start": _REQUIRED,
        "l_start": _REQUIRED,
        "x_end": _REQUIRED,
        "l_end": _AUTO,  # auto: l_start
        "duration": _REQUIRED,
    },
}

_REQUIRED_SECTIONS = ("plant", "gains", "trajectory", "sim")
_SECTION_ORDER = ("plant", "nominal", "gains", "fuzzy", "trajectory",
                  "obstacle", "sim")


def _float(section: str, key: str, value: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ScenarioError(
            f"[{section}] {key}: expected a number, got {value!r}"
        ) from None
    if not math.isfinite(out):
        raise ScenarioError(f"[{section}] {key}: value must be finite")
    return out


def _int(section: str, key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ScenarioError(
            f"[{section}] {key}: expected an integer, got {value!r}"
        ) from None


def _bool(section: str, key: str, value: str) -> bool:
    low = value.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    raise ScenarioError(
        f"[{section}] {key}: expected true or false, got {value!r}"
    )


def _parse_ini(text: str, source: str) -> Dict[str, Dict[str, str]]:
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), comment_prefixes=("#", ";")
    )
    parser.optionxform = str  # keep key case (K_x, M, ...)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"cannot parse {source}: {exc}") from None
    return {name: dict(parser.items(name)) for name in parser.sections()}


def apply_overrides(raw: Dict[str, Dict[str, str]],
                    overrides: Iterable[str]) -> None:
    """Apply ``section.key=value`` strings onto the raw document in place."""
    for item in overrides:
        head, sep, value = item.partition("=")
        if not sep:
            raise ScenarioError(f"override {item!r} is not section.key=value")
        section, dot, key = head.partition(".")
        if not dot or not section or not key:
            raise ScenarioError(f"override {item!r} is not section.key=value")
        raw.setdefault(section.strip(), {})[key.strip()] = value.strip()


def resolve(raw: Mapping[str, Mapping[str, str]]) -> Resolved:
    """Validate the raw document and fill every default.

    Returns a fully concrete document: floats are normalized to their
    round-trip repr so an echoed copy parses to the same values.
    """
    unknown_sections = set(raw) - set(_SECTION_ORDER)
    if unknown_sections:
        raise ScenarioError(
            f"unknown section(s): {', '.join(sorted(unknown_sections))}"
        )
    for section in _REQUIRED_SECTIONS:
        if section not in raw:
            raise ScenarioError(f"missing required section [{section}]")

    resolved: Resolved = {}
    for section in _SECTION_ORDER:
        if section == "trajectory":
            resolved[section] = _resolve_trajectory(dict(raw[section]))
            continue
        present = section in raw
        if not present and section in ("nominal", "fuzzy"):
            given: Dict[str, str] = {}
        elif not present and section == "obstacle":
            continue  # no obstacle configured
        elif not present:
            raise ScenarioError(f"missing required section [{section}]")
        else:
            given = dict(raw[section])
        schema = _SCHEMA[section]
        unknown = set(given) - set(schema)
        if unknown:
            raise ScenarioError(
                f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}"
            )
        out: Dict[str, str] = {}
        for key, default in schema.items():
            if key in given:
                out[key] = given[key].strip()
            elif default == _REQUIRED:
                raise ScenarioError(f"missing required key {key} in [{section}]")
            else:
                out[key] = default
        resolved[section] = out

    # late defaults that reference other sections
    nominal = resolved["nominal"]
    for key in ("M", "m", "g"):
        if nominal[key] == _FROM_PLANT:
            nominal[key] = resolved["plant"][key]
    fuzzy = resolved["fuzzy"]
    if fuzzy["span_x"] == _AUTO:
        fuzzy["span_x"] = repr(2.0 * _float("gains", "phi_x",
                                            resolved["gains"]["phi_x"]))
    if fuzzy["span_l"] == _AUTO:
        fuzzy["span_l"] = repr(2.0 * _float("gains", "phi_l",
                                            resolved["gains"]["phi_l"]))

    _normalize_numbers(resolved)
    return resolved


def _resolve_trajectory(given: Dict[str, str]) -> Dict[str, str]:
    if "type" not in given:
        raise ScenarioError("missing required key type in [trajectory]")
    kind = given.pop("type").strip()
    if kind not in _TRAJECTORY_KEYS:
        raise ScenarioError(
            f"[trajectory] type must be one of "
            f"{sorted(_TRAJECTORY_KEYS)}, got {kind!r}"
        )
    schema = _TRAJECTORY_KEYS[kind]
    unknown = set(given) - set(schema)
    if unknown:
        raise ScenarioError(
            f"unknown key(s) in [trajectory] for type={kind}: "
            f"{', '.join(sorted(unknown))}"
        )
    out = {"type": kind}
    for key, default in schema.items():
        if key in given:
            out[key] = given[key].strip()
        elif default == _REQUIRED:
            raise ScenarioError(f"missing required key {key} in [trajectory]")
        else:
            out[key] = default
    if kind == "semicircle" and out["l_end"] == _AUTO:
        out["l_end"] = out["l_start"]
    return out


_NON_NUMERIC_KEYS = {
    ("gains", "switching"), ("fuzzy", "enabled"), ("trajectory", "type"),
    ("sim", "u_max"), ("sim", "validate_gains"),
    ("sim", "check_sliding_consistency"),
}
_INT_KEYS = {("fuzzy", "rule_count"), ("sim", "rng_seed")}


def _normalize_numbers(resolved: Resolved) -> None:
    """Round-trip every numeric value through float/int for a stable echo."""
    for section, keys in resolved.items():
        for key, value in keys.items():
            if (section, key) in _NON_NUMERIC_KEYS:
                if key == "u_max" and value.lower() != "none":
                    keys[key] = repr(_float(section, key, value))
                continue
            if (section, key) in _INT_KEYS:
                keys[key] = str(_int(section, key, value))
            else:
                keys[key] = repr(_float(section, key, value))


def render(resolved: Resolved) -> str:
    """Serialize a resolved document back to scenario-file text."""
    buf = io.StringIO()
    for section in _SECTION_ORDER:
        if section not in resolved:
            continue
        buf.write(f"[{section}]\n")
        for key, value in resolved[section].items():
            buf.write(f"{key} = {value}\n")
        buf.write("\n")
    return buf.getvalue()


def load_scenario(path: str, overrides: Iterable[str] = ()) -> Resolved:
    """Read, override, and resolve a scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from None
    raw = _parse_ini(text, source=path)
    apply_overrides(raw, overrides)
    return resolve(raw)


def _disturbance(section: Mapping[str, str], axis: str, source: str):
    const = _float(source, f"disturbance_{axis}_const",
                   section[f"disturbance_{axis}_const"])
    amp = _float(source, f"disturbance_{axis}_sin_amp",
                 section[f"disturbance_{axis}_sin_amp"])
    freq = _float(source, f"disturbance_{axis}_sin_freq_hz",
                  section[f"disturbance_{axis}_sin_freq_hz"])
    if const == 0.0 and amp == 0.0:
        return None
    omega = 2.0 * math.pi * freq
    return lambda t: const + amp * math.sin(omega * t)


def build_config(resolved: Resolved) -> ScenarioConfig:
    """Construct the typed simulation configuration from a resolved document."""
    p = resolved["plant"]
    plant = CraneParams(
        M=_float("plant", "M", p["M"]),
        m=_float("plant", "m", p["m"]),
        g=_float("plant", "g", p["g"]),
        friction_viscous_x=_float("plant", "friction_viscous_x",
                                  p["friction_viscous_x"]),
        friction_viscous_l=_float("plant", "friction_viscous_l",
                                  p["friction_viscous_l"]),
        disturbance_x=_disturbance(p, "x", "plant"),
        disturbance_l=_disturbance(p, "l", "plant"),
    )
    n = resolved["nominal"]
    nominal = CraneParams(
        M=_float("nominal", "M", n["M"]),
        m=_float("nominal", "m", n["m"]),
        g=_float("nominal", "g", n["g"]),
    )
    g = resolved["gains"]
    gains = ControllerGains(
        alpha_x=_float("gains", "alpha_x", g["alpha_x"]),
        alpha_l=_float("gains", "alpha_l", g["alpha_l"]),
        alpha_theta=_float("gains", "alpha_theta", g["alpha_theta"]),
        lambda_x=_float("gains", "lambda_x", g["lambda_x"]),
        lambda_l=_float("gains", "lambda_l", g["lambda_l"]),
        lambda_theta=_float("gains", "lambda_theta", g["lambda_theta"]),
        K_x=_float("gains", "K_x", g["K_x"]),
        K_l=_float("gains", "K_l", g["K_l"]),
        phi_x=_float("gains", "phi_x", g["phi_x"]),
        phi_l=_float("gains", "phi_l", g["phi_l"]),
        switching=g["switching"],
        det_tol=_float("gains", "det_tol", g["det_tol"]),
    )
    f = resolved["fuzzy"]
    rule_count = _int("fuzzy", "rule_count", f["rule_count"])
    fuzzy_x = FuzzyAxis.uniform_grid(
        rule_count, _float("fuzzy", "span_x", f["span_x"]),
        _float("fuzzy", "phi_adapt_x", f["phi_adapt_x"]),
        _float("fuzzy", "d_hat_cap_x", f["d_hat_cap_x"]),
    )
    fuzzy_l = FuzzyAxis.uniform_grid(
        rule_count, _float("fuzzy", "span_l", f["span_l"]),
        _float("fuzzy", "phi_adapt_l", f["phi_adapt_l"]),
        _float("fuzzy", "d_hat_cap_l", f["d_hat_cap_l"]),
    )
    t = resolved["trajectory"]
    if t["type"] == "setpoint":
        reference = make_setpoint(
            _float("trajectory", "x_target", t["x_target"]),
            _float("trajectory", "l_target", t["l_target"]),
        )
    else:
        reference = make_semicircle(
            (_float("trajectory", "x_start", t["x_start"]),
             _float("trajectory", "l_start", t["l_start"])),
            (_float("trajectory", "x_end", t["x_end"]),
             _float("trajectory", "l_end", t["l_end"])),
            _float("trajectory", "duration", t["duration"]),
        )
    obstacle: Optional[ObstacleSpec] = None
    if "obstacle" in resolved:
        o = resolved["obstacle"]
        obstacle = ObstacleSpec(
            x_center=_float("obstacle", "x_center", o["x_center"]),
            top_depth=_float("obstacle", "top_depth", o["top_depth"]),
            width=_float("obstacle", "width", o["width"]),
            height=_float("obstacle", "height", o["height"]),
            top_clearance=_float("obstacle", "top_clearance",
                                 o["top_clearance"]),
        )
    s = resolved["sim"]
    initial_state = CraneState(
        x=_float("sim", "initial_x", s["initial_x"]),
        l=_float("sim", "initial_l", s["initial_l"]),
        theta=_float("sim", "initial_theta", s["initial_theta"]),
        x_dot=_float("sim", "initial_x_dot", s["initial_x_dot"]),
        l_dot=_float("sim", "initial_l_dot", s["initial_l_dot"]),
        theta_dot=_float("sim", "initial_theta_dot", s["initial_theta_dot"]),
        t=0.0,
    )
    noise: Optional[Tuple[float, ...]] = tuple(
        _float("sim", f"noise_std_{name}", s[f"noise_std_{name}"])
        for name in ("x", "l", "theta", "x_dot", "l_dot", "theta_dot")
    )
    if all(v == 0.0 for v in noise):
        noise = None
    u_max = None if s["u_max"].lower() == "none" else _float("sim", "u_max",
                                                             s["u_max"])
    return ScenarioConfig(
        plant=plant,
        nominal=nominal,
        gains=gains,
        fuzzy_enabled=_bool("fuzzy", "enabled", f["enabled"]),
        fuzzy_x=fuzzy_x,
        fuzzy_l=fuzzy_l,
        reference=reference,
        initial_state=initial_state,
        t_end=_float("sim", "t_end", s["t_end"]),
        dt_plant=_float("sim", "dt_plant", s["dt_plant"]),
        dt_control=_float("sim", "dt_control", s["dt_control"]),
        obstacle=obstacle,
        noise_std=noise,
        rng_seed=_int("sim", "rng_seed", s["rng_seed"]),
        u_max=u_max,
        validate_gains=_bool("sim", "validate_gains", s["validate_gains"]),
        check_sliding_consistency=_bool(
            "sim", "check_sliding_consistency", s["check_sliding_consistency"]
        ),
    )
