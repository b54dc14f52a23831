"""JSON run configuration: parsing, defaults and object construction.

A configuration is a JSON object. Every command resolves it into a fully
defaulted form, which is what gets embedded in output headers; resolving an
already-resolved configuration returns it unchanged, so a header can be fed
back through ``--config`` to regenerate the same file.

Top-level keys
--------------
``units``
    ``"normalized"`` (ω_p = 1, times in 1/ω_p, delays in optical cycles at
    ω_p/2) or ``"SI"`` (rad/s, seconds, metres).
``source``
    ``{"type": "counterprop", "pump": {...}, "model": <model>}`` or
    ``{"type": "collinear", "pump": {...}, "length": L, "poling_period": Λ |
    "solve", "pump_model": <model>, "signal_model": <model>,
    "idler_model": <model>}``. The pump block holds ``omega_p`` (normalized) or
    ``wavelength`` (SI), one of ``tau`` / ``bandwidth`` (intensity FWHM in
    rad/s), and for counterprop ``width_w``. ``"inf"`` flags a limit.
``grid``
    ``{"n_points": 257, "half_span": h | null, "span_sigmas": 5}``; a null
    span is set from the estimated marginal bandwidth.
``analysis``
    ``{"type": "map" | "visibility" | "sweep" | "classify", ...}``.
``dispersion``
    ``{"model": <model>, "wavelength_range": [lo, hi], "n_points": n}`` for
    the dispersion table.

Model blocks: ``{"kind": "taylor", "omega0": w, "betas": [...]}``,
``{"kind": "sellmeier", "material": "GaAs"}`` (or inline ``form_id``,
``coefficients`` and ``range_um`` as in the shipped data files),
``{"kind": "constant", "n": 1.5}`` and ``{"kind": "slab", "core": <model>,
"n_clad": 1.0, "thickness": 3e-6, "mode_order": 0}``.

The figure commands read an optional ``fig3`` or ``fig4`` block instead; see
:data:`FIG3_DEFAULTS` and :data:`FIG4_DEFAULTS`.
"""
from __future__ import annotations

import copy
import json
import math
from pathlib import Path

from . import csvio
from .dispersion import (
    C,
    MATERIALS,
    QpmCollinearSource,
    SellmeierModel,
    SlabWaveguideTE,
    TaylorDispersion,
    beta_derivatives,
    load_material,
    sellmeier_from_dict,
    solve_poling_period,
    wavelength_to_omega,
)
from .errors import AutophaseError
from .franson import CollinearFamily, CounterpropFamily
from .jsa import FrequencyGrid, PumpPulse, counterprop_bandwidth_estimate

UNITS = ("normalized", "SI")
ANALYSES = ("map", "visibility", "sweep", "classify")
DIRECTIONS = ("auto", "diagonal", "antidiagonal")


class ConfigError(AutophaseError):
    """The configuration is malformed or inconsistent."""


def load_config(path) -> dict:
    """Read a JSON config, or the ``# config:`` header of an emitted CSV."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if text.lstrip().startswith("#"):
        header = csvio.read_header(path)
        if "config" not in header:
            raise ConfigError(f"{path} has no embedded config header")
        return header["config"]
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError("the configuration must be a JSON object")
    return data


# -- scalar helpers ---------------------------------------------------------

def _number(value, name: str, allow_inf: bool = False, positive: bool = True) -> float:
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        value = math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    value = float(value)
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ConfigError(f"{name} must be finite")
    if positive and not value > 0:
        raise ConfigError(f"{name} must be positive")
    return value


def _int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}")
    return value


def _choice(value, name: str, options) -> str:
    if value not in options:
        raise ConfigError(f"{name} must be one of {', '.join(options)}; got {value!r}")
    return value


def _encode(x: float):
    """JSON-safe form of a possibly infinite float."""
    return "inf" if math.isinf(x) else x


def _block(cfg: dict, key: str) -> dict:
    value = cfg.get(key)
    if not isinstance(value, dict):
        raise ConfigError(f"missing or invalid '{key}' block")
    return value


def _reject_unknown(block: dict, allowed, where: str) -> None:
    extra = sorted(set(block) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


# -- models -----------------------------------------------------------------

def resolve_model(block, where: str = "model") -> dict:
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    kind = _choice(block.get("kind"), f"{where}.kind", ("taylor", "sellmeier", "constant", "slab"))
    if kind == "taylor":
        _reject_unknown(block, ("kind", "omega0", "betas"), where)
        betas = block.get("betas")
        if not isinstance(betas, list) or not betas:
            raise ConfigError(f"{where}.betas must be a non-empty list")
        return {
            "kind": kind,
            "omega0": _number(block.get("omega0"), f"{where}.omega0"),
            "betas": [_number(b, f"{where}.betas", positive=False) for b in betas],
        }
    if kind == "constant":
        _reject_unknown(block, ("kind", "n"), where)
        n = _number(block.get("n"), f"{where}.n")
        if n <= 1:
            raise ConfigError(f"{where}.n must exceed 1")
        return {"kind": kind, "n": n}
    if kind == "sellmeier":
        if "material" in block:
            _reject_unknown(block, ("kind", "material"), where)
            name = block["material"]
            if name not in MATERIALS and not Path(str(name)).is_file():
                raise ConfigError(f"unknown material {name!r}; known: {', '.join(MATERIALS)}")
            return {"kind": kind, "material": name}
        _reject_unknown(block, ("kind", "name", "form_id", "coefficients", "range_um"), where)
        out = {
            "kind": kind,
            "name": str(block.get("name", "inline")),
            "form_id": block.get("form_id"),
            "coefficients": block.get("coefficients"),
            "range_um": block.get("range_um"),
        }
        try:
            sellmeier_from_dict(out)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        return out
    _reject_unknown(block, ("kind", "core", "n_clad", "thickness", "mode_order"), where)
    return {
        "kind": kind,
        "core": resolve_model(block.get("core"), f"{where}.core"),
        "n_clad": _number(block.get("n_clad", 1.0), f"{where}.n_clad"),
        "thickness": _number(block.get("thickness", 3e-6), f"{where}.thickness"),
        "mode_order": _int(block.get("mode_order", 0), f"{where}.mode_order", 0),
    }


def build_model(block: dict):
    kind = block["kind"]
    if kind == "taylor":
        return TaylorDispersion(block["omega0"], tuple(block["betas"]))
    if kind == "constant":
        return SellmeierModel.constant(block["n"])
    if kind == "sellmeier":
        if "material" in block:
            return load_material(block["material"])
        return sellmeier_from_dict(block)
    core = build_model(block["core"])
    if not isinstance(core, SellmeierModel):
        raise ConfigError("a slab core must be a sellmeier or constant model")
    return SlabWaveguideTE(core, block["n_clad"], block["thickness"], block["mode_order"])


# -- source, grid, analysis -------------------------------------------------

def _resolve_pump(block, units: str, counterprop: bool) -> dict:
    if not isinstance(block, dict):
        raise ConfigError("source.pump must be an object")
    keys = ["tau", "bandwidth", "width_w", "omega_p", "wavelength"]
    _reject_unknown(block, keys, "source.pump")
    out = {}
    if units == "normalized":
        if "wavelength" in block:
            raise ConfigError("normalized units fix omega_p = 1; wavelength is SI only")
        if _number(block.get("omega_p", 1.0), "source.pump.omega_p") != 1.0:
            raise ConfigError("normalized units fix omega_p = 1")
        out["omega_p"] = 1.0
    else:
        if "omega_p" in block:
            raise ConfigError("SI pump is given by 'wavelength' in metres")
        out["wavelength"] = _number(block.get("wavelength"), "source.pump.wavelength")
    if ("tau" in block) == ("bandwidth" in block):
        raise ConfigError("source.pump needs exactly one of 'tau' or 'bandwidth'")
    if "tau" in block:
        out["tau"] = _encode(_number(block["tau"], "source.pump.tau", allow_inf=counterprop))
    else:
        bw = _number(block["bandwidth"], "source.pump.bandwidth")
        out["tau"] = 2 * math.sqrt(math.log(2)) / bw
    if counterprop:
        out["width_w"] = _encode(_number(block.get("width_w"), "source.pump.width_w", allow_inf=True))
        if out["tau"] == "inf" and out["width_w"] == "inf":
            raise ConfigError("tau and width_w cannot both be infinite")
    elif "width_w" in block:
        raise ConfigError("width_w applies to the counterprop source only")
    return out


def _resolve_source(block, units: str) -> dict:
    kind = _choice(block.get("type"), "source.type", ("counterprop", "collinear"))
    if kind == "counterprop":
        _reject_unknown(block, ("type", "pump", "model"), "source")
        return {
            "type": kind,
            "pump": _resolve_pump(block.get("pump"), units, True),
            "model": resolve_model(block.get("model"), "source.model"),
        }
    _reject_unknown(
        block,
        ("type", "pump", "length", "poling_period", "pump_model", "signal_model", "idler_model"),
        "source",
    )
    period = block.get("poling_period", "solve")
    if period != "solve":
        period = _encode(_number(period, "source.poling_period", allow_inf=True))
    return {
        "type": kind,
        "pump": _resolve_pump(block.get("pump"), units, False),
        "length": _number(block.get("length"), "source.length"),
        "poling_period": period,
        "pump_model": resolve_model(block.get("pump_model"), "source.pump_model"),
        "signal_model": resolve_model(block.get("signal_model"), "source.signal_model"),
        "idler_model": resolve_model(block.get("idler_model"), "source.idler_model"),
    }


def _resolve_grid(block) -> dict:
    block = {} if block is None else block
    if not isinstance(block, dict):
        raise ConfigError("grid must be an object")
    _reject_unknown(block, ("n_points", "half_span", "span_sigmas"), "grid")
    n = _int(block.get("n_points", 257), "grid.n_points", 3)
    if n % 2 == 0:
        raise ConfigError("grid.n_points must be odd so the center lies on the grid")
    half = block.get("half_span")
    return {
        "n_points": n,
        "half_span": None if half is None else _number(half, "grid.half_span"),
        "span_sigmas": _number(block.get("span_sigmas", 5.0), "grid.span_sigmas"),
    }


def _resolve_lengths(value) -> dict | list:
    if isinstance(value, list):
        lengths = [_number(x, "analysis.lengths") for x in value]
        if not lengths or any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ConfigError("analysis.lengths must be strictly increasing")
        return lengths
    if not isinstance(value, dict):
        raise ConfigError("analysis.lengths must be a list or {start, stop, count}")
    _reject_unknown(value, ("start", "stop", "count"), "analysis.lengths")
    start = _number(value.get("start"), "analysis.lengths.start")
    stop = _number(value.get("stop"), "analysis.lengths.stop")
    if stop <= start:
        raise ConfigError("analysis.lengths.stop must exceed start")
    return {"start": start, "stop": stop, "count": _int(value.get("count", 12), "analysis.lengths.count", 2)}


def _resolve_analysis(block) -> dict:
    if not isinstance(block, dict):
        raise ConfigError("missing or invalid 'analysis' block")
    kind = _choice(block.get("type"), "analysis.type", ANALYSES)
    if kind == "map":
        _reject_unknown(block, ("type", "tau_range", "n_samples"), "analysis")
        rng = block.get("tau_range", [0.0, 50.0])
        if not (isinstance(rng, list) and len(rng) == 2):
            raise ConfigError("analysis.tau_range must be [min, max] in optical cycles")
        lo = _number(rng[0], "analysis.tau_range", positive=False)
        hi = _number(rng[1], "analysis.tau_range", positive=False)
        if hi <= lo:
            raise ConfigError("analysis.tau_range must be increasing")
        return {"type": kind, "tau_range": [lo, hi],
                "n_samples": _int(block.get("n_samples", 101), "analysis.n_samples", 2)}
    offset = _number(block.get("offset_in_sigma", 4.0), "analysis.offset_in_sigma")
    if kind == "classify":
        _reject_unknown(block, ("type", "offset_in_sigma"), "analysis")
        return {"type": kind, "offset_in_sigma": offset}
    if kind == "visibility":
        _reject_unknown(block, ("type", "offset_in_sigma", "direction"), "analysis")
        return {"type": kind, "offset_in_sigma": offset,
                "direction": _choice(block.get("direction", "auto"), "analysis.direction", DIRECTIONS)}
    _reject_unknown(block, ("type", "offset_in_sigma", "direction", "lengths"), "analysis")
    return {
        "type": kind,
        "offset_in_sigma": offset,
        "direction": _choice(block.get("direction", "antidiagonal"), "analysis.direction",
                             DIRECTIONS[1:]),
        "lengths": _resolve_lengths(block.get("lengths")),
    }


def _resolve_dispersion(block) -> dict:
    if not isinstance(block, dict):
        raise ConfigError("missing or invalid 'dispersion' block")
    _reject_unknown(block, ("model", "wavelength_range", "n_points"), "dispersion")
    rng = block.get("wavelength_range")
    if not (isinstance(rng, list) and len(rng) == 2):
        raise ConfigError("dispersion.wavelength_range must be [lo, hi] in metres")
    lo = _number(rng[0], "dispersion.wavelength_range")
    hi = _number(rng[1], "dispersion.wavelength_range")
    if hi <= lo:
        raise ConfigError("dispersion.wavelength_range must be increasing")
    return {
        "model": resolve_model(block.get("model"), "dispersion.model"),
        "wavelength_range": [lo, hi],
        "n_points": _int(block.get("n_points", 31), "dispersion.n_points", 2),
    }


FIG3_DEFAULTS = {
    "bandwidth_fraction": 0.1,
    "n_points": 1001,
    "span_sigmas": 5.0,
    "tau_range": [0.0, 50.0],
    "n_samples": 501,
    "offset_in_sigma": 4.0,
}

FIG4_DEFAULTS = {
    "pump_wavelength": 790e-9,
    "pump_bandwidth": 2 * math.pi * 3e12,
    "slab_material": "GaAs",
    "slab_thickness": 3e-6,
    "ktp_y": "KTP_ny",
    "ktp_z": "KTP_nz",
    "poling_period": "solve",
    "lengths": {"start": 1e-6, "stop": 1e-1, "count": 12},
    "n_points": 257,
    "offset_in_sigma": 4.0,
}


def _with_defaults(block, defaults: dict, where: str) -> dict:
    block = {} if block is None else block
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    _reject_unknown(block, defaults, where)
    return {**copy.deepcopy(defaults), **block}


def _resolve_fig3(block) -> dict:
    out = _with_defaults(block, FIG3_DEFAULTS, "fig3")
    frac = _number(out["bandwidth_fraction"], "fig3.bandwidth_fraction")
    if frac >= 0.5:
        raise ConfigError("fig3.bandwidth_fraction must be below 0.5")
    n = _int(out["n_points"], "fig3.n_points", 3)
    if n % 2 == 0:
        raise ConfigError("fig3.n_points must be odd")
    rng = out["tau_range"]
    if not (isinstance(rng, list) and len(rng) == 2):
        raise ConfigError("fig3.tau_range must be [min, max] in optical cycles")
    lo = _number(rng[0], "fig3.tau_range", positive=False)
    hi = _number(rng[1], "fig3.tau_range", positive=False)
    if hi <= lo:
        raise ConfigError("fig3.tau_range must be increasing")
    return {
        "bandwidth_fraction": frac,
        "n_points": n,
        "span_sigmas": _number(out["span_sigmas"], "fig3.span_sigmas"),
        "tau_range": [lo, hi],
        "n_samples": _int(out["n_samples"], "fig3.n_samples", 2),
        "offset_in_sigma": _number(out["offset_in_sigma"], "fig3.offset_in_sigma"),
    }


def _resolve_fig4(block) -> dict:
    out = _with_defaults(block, FIG4_DEFAULTS, "fig4")
    for key in ("slab_material", "ktp_y", "ktp_z"):
        resolve_model({"kind": "sellmeier", "material": out[key]}, f"fig4.{key}")
    period = out["poling_period"]
    if period != "solve":
        period = _number(period, "fig4.poling_period")
    n = _int(out["n_points"], "fig4.n_points", 3)
    if n % 2 == 0:
        raise ConfigError("fig4.n_points must be odd")
    return {
        "pump_wavelength": _number(out["pump_wavelength"], "fig4.pump_wavelength"),
        "pump_bandwidth": _number(out["pump_bandwidth"], "fig4.pump_bandwidth"),
        "slab_material": out["slab_material"],
        "slab_thickness": _number(out["slab_thickness"], "fig4.slab_thickness"),
        "ktp_y": out["ktp_y"],
        "ktp_z": out["ktp_z"],
        "poling_period": period,
        "lengths": _resolve_lengths(out["lengths"]),
        "n_points": n,
        "offset_in_sigma": _number(out["offset_in_sigma"], "fig4.offset_in_sigma"),
    }


def resolve(cfg: dict, need=("source", "grid", "analysis")) -> dict:
    """Validate ``cfg`` and fill defaults for the blocks named in ``need``."""
    if not isinstance(cfg, dict):
        raise ConfigError("the configuration must be a JSON object")
    cfg = copy.deepcopy(cfg)
    allowed = {"units", "source", "grid", "analysis", "dispersion", "fig3", "fig4"}
    _reject_unknown(cfg, allowed, "config")
    default_units = "SI" if "fig4" in need else "normalized"
    units = _choice(cfg.get("units", default_units), "units", UNITS)
    out = {"units": units}
    if "fig3" in need:
        if units != "normalized":
            raise ConfigError("fig3 runs in normalized units")
        out["fig3"] = _resolve_fig3(cfg.get("fig3"))
        return out
    if "fig4" in need:
        if units != "SI":
            raise ConfigError("fig4 runs in SI units")
        out["fig4"] = _resolve_fig4(cfg.get("fig4"))
        return out
    if "dispersion" in need:
        out["dispersion"] = _resolve_dispersion(cfg.get("dispersion"))
    if "source" in need:
        out["source"] = _resolve_source(_block(cfg, "source"), units)
    if "grid" in need:
        out["grid"] = _resolve_grid(cfg.get("grid"))
    if "analysis" in need:
        out["analysis"] = _resolve_analysis(cfg.get("analysis"))
        if out["analysis"]["type"] == "sweep" and out["source"]["pump"]["tau"] == "inf":
            raise ConfigError("a length sweep needs a finite pump bandwidth")
    return out


# -- object construction ----------------------------------------------------

def _inf(x) -> float:
    return math.inf if x == "inf" else float(x)


def pump_omega(pump: dict) -> float:
    return pump["omega_p"] if "omega_p" in pump else float(wavelength_to_omega(pump["wavelength"]))


def build_source(source: dict):
    """A :class:`CounterpropFamily`-ready pump and model, or a QPM source."""
    pump = source["pump"]
    wp = pump_omega(pump)
    if source["type"] == "counterprop":
        return PumpPulse(wp, _inf(pump["tau"]), _inf(pump["width_w"])), build_model(source["model"])
    tau = _inf(pump["tau"])
    src = QpmCollinearSource(
        build_model(source["pump_model"]),
        build_model(source["signal_model"]),
        build_model(source["idler_model"]),
        math.inf,
        source["length"],
        2 * math.pi * C / wp,
        2 * math.sqrt(math.log(2)) / tau,
    )
    period = source["poling_period"]
    return src.replace(poling_period=solve_poling_period(src) if period == "solve" else _inf(period))


def build_family(source: dict):
    if source["type"] == "counterprop":
        pump, model = build_source(source)
        return CounterpropFamily(pump, model)
    return CollinearFamily(build_source(source))


def build_grid(cfg: dict) -> FrequencyGrid:
    """Degenerate grid; a null span is ``span_sigmas`` estimated marginal widths."""
    grid, source = cfg["grid"], cfg["source"]
    wp = pump_omega(source["pump"])
    half = grid["half_span"]
    if half is None:
        if source["type"] == "counterprop":
            pump, model = build_source(source)
            b1 = beta_derivatives(model, wp / 2, 1)[0]
            sigma = counterprop_bandwidth_estimate(pump, b1)
            half = min(grid["span_sigmas"] * sigma, 0.9 * wp / 2)
        else:
            family = build_family(source)
            half = min(grid["span_sigmas"] * family.bandwidth_estimate(source["length"]),
                       family.max_half_span())
    return FrequencyGrid.degenerate(wp, half, grid["n_points"])


def length_ladder(spec) -> list:
    if isinstance(spec, list):
        return list(spec)
    ratio = (spec["stop"] / spec["start"]) ** (1 / (spec["count"] - 1))
    return [spec["start"] * ratio ** k for k in range(spec["count"] - 1)] + [spec["stop"]]
