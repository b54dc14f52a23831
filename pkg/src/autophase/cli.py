"""Command-line front end.

Subcommands
-----------
``dispersion``  index / propagation-constant table for one model
``jsa``         build a source, write its JSA and joint temporal intensity
``franson``     Franson analysis (map, visibility, sweep or classify)
``fig3``        coincidence maps of the two limiting sources
``fig4``        visibility versus interaction length for both source families
``run``         dispatch on the config: a dispersion table or an analysis

Every command takes ``--config``, ``--out``, ``--threads`` and ``--validate``.
Exit codes: 0 success, 2 configuration error, 3 domain error, 4 alias guard.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import csvio, figures, plotting
from .config import ConfigError
from .dispersion import (
    beta,
    beta_derivatives,
    solve_poling_period,
    wavelength_to_omega,
)
from .errors import AliasRisk, AutophaseError
from .franson import (
    CollinearFamily,
    classify_correlation,
    coincidence_probability,
    franson_map,
    fourth_order_visibility,
    visibility_vs_length,
    write_curve_csv,
    write_map_csv,
    write_scan_csv,
)
from .jsa import (
    build_collinear_jsa,
    build_counterprop_jsa,
    frequency_correlation,
    joint_temporal_intensity,
    marginal_spectrum,
    temporal_correlation,
    write_jsa_csv,
    write_jti_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_ALIAS = 0, 2, 3, 4

COUNTERPROP_COLOR = (0, 0, 0)
COLLINEAR_COLOR = (200, 30, 30)


def _header(command: str, resolved: dict) -> dict:
    return {"command": command, "config": resolved}


def _report(line: str) -> None:
    print(line, flush=True)


# -- commands ---------------------------------------------------------------

def cmd_dispersion(resolved: dict, out: Path, threads: int) -> list:
    block = resolved["dispersion"]
    model = cfgmod.build_model(block["model"])
    lo, hi = block["wavelength_range"]
    lams = np.linspace(lo, hi, block["n_points"])
    rows = []
    for lam in lams:
        w = float(wavelength_to_omega(lam))
        b = float(beta(model, w))
        b1, b2 = beta_derivatives(model, w, 2)
        rows.append((lam, b * lam / (2 * math.pi), b, b1, b2))
    path = csvio.write_table(
        out / "dispersion.csv",
        {"kind": "dispersion", **_header("dispersion", resolved)},
        ["wavelength", "n", "beta", "beta1", "beta2"],
        rows,
    )
    return [path]


def _build_jsa(resolved: dict):
    source = resolved["source"]
    grid = cfgmod.build_grid(resolved)
    if source["type"] == "counterprop":
        pump, model = cfgmod.build_source(source)
        return build_counterprop_jsa(pump, model, grid)
    return build_collinear_jsa(cfgmod.build_source(source), grid)


def cmd_jsa(resolved: dict, out: Path, threads: int) -> list:
    jsa = _build_jsa(resolved)
    head = _header("jsa", resolved)
    jti = joint_temporal_intensity(jsa)
    paths = [write_jsa_csv(out / "jsa.csv", jsa, head), write_jti_csv(out / "jti.csv", jti, head)]
    rho_nu = frequency_correlation(jsa)
    _report(f"rho_nu: {rho_nu!r}")
    _report(f"rho_t: {temporal_correlation(jti)!r}")
    _report(f"rms_bandwidth: {marginal_spectrum(jsa).rms_bandwidth!r}")
    return paths


def cmd_analysis(resolved: dict, out: Path, threads: int, command: str = "franson") -> list:
    analysis = resolved["analysis"]
    head = _header(command, resolved)
    kind = analysis["type"]
    if kind == "sweep":
        family = cfgmod.build_family(resolved["source"])
        lengths = cfgmod.length_ladder(analysis["lengths"])
        curve = visibility_vs_length(
            family, lengths, offset_in_sigma=analysis["offset_in_sigma"],
            direction=analysis["direction"], threads=threads,
            n_points=resolved["grid"]["n_points"], span_sigmas=resolved["grid"]["span_sigmas"],
        )
        _report(f"visibility at largest length: {float(curve.visibility[-1])!r}")
        return [write_curve_csv(out / "visibility_curve.csv", curve, head)]
    jsa = _build_jsa(resolved)
    if kind == "map":
        fmap = franson_map(jsa, analysis["tau_range"], analysis["n_samples"], threads)
        _report(f"P(first delay pair): {fmap.probability[0, 0]!r}")
        return [
            write_map_csv(out / "franson_map.csv", fmap, head),
            csvio.write_pgm(out / "franson_map.pgm", fmap.probability, 0.0, 1.0),
        ]
    if kind == "visibility":
        scan = fourth_order_visibility(jsa, analysis["offset_in_sigma"], analysis["direction"])
        _report(f"direction: {scan.direction}")
        _report(f"raw_visibility: {scan.raw_visibility!r}")
        _report(f"scaled_visibility: {scan.scaled_visibility!r}")
        return [write_scan_csv(out / "fringe_scan.csv", scan, head)]
    result = classify_correlation(jsa, analysis["offset_in_sigma"])
    _report(result.label)
    path = csvio.write_table(
        out / "classification.csv",
        {"kind": "classification", "label": result.label, **head},
        ["diagonal", "antidiagonal"],
        [(result.diagonal, result.antidiagonal)],
    )
    return [path]


def cmd_fig3(resolved: dict, out: Path, threads: int) -> list:
    block = resolved["fig3"]
    sources = figures.fig3_sources(1.0, block["bandwidth_fraction"], block["n_points"],
                                   block["span_sigmas"])
    head = _header("fig3", resolved)
    paths, rows = [], []
    for tag, jsa in (("a", sources.anti), ("b", sources.corr)):
        fmap = franson_map(jsa, block["tau_range"], block["n_samples"], threads)
        scan = fourth_order_visibility(jsa, block["offset_in_sigma"], sigma=sources.sigma)
        label = classify_correlation(jsa, block["offset_in_sigma"]).label
        p00 = coincidence_probability(jsa, (0.0, 0.0))
        extra = {"panel": tag, "label": label, "raw_visibility": scan.raw_visibility}
        paths.append(write_map_csv(out / f"fig3{tag}_map.csv", fmap, {**extra, **head}))
        paths.append(csvio.write_pgm(out / f"fig3{tag}_map.pgm", fmap.probability, 0.0, 1.0))
        rows.append((0 if tag == "a" else 1, p00, scan.raw_visibility, scan.scaled_visibility,
                     frequency_correlation(jsa)))
        _report(f"fig3{tag}: {label}, P(0,0) = {p00:.9f}, raw visibility = "
                f"{scan.raw_visibility:.5f} ({scan.direction})")
    paths.append(csvio.write_table(
        out / "fig3_summary.csv",
        {"kind": "fig3_summary", "panels": ["a: anti-correlated", "b: correlated"],
         "width_w": sources.width_w, "tau": sources.tau, "sigma": sources.sigma, **head},
        ["panel", "P00", "raw_visibility", "scaled_visibility", "rho_nu"],
        rows,
    ))
    return paths


def cmd_fig4(resolved: dict, out: Path, threads: int) -> list:
    block = resolved["fig4"]
    period = None if block["poling_period"] == "solve" else block["poling_period"]
    src = figures.ppktp_source(1e-2, period, block["ktp_y"], block["ktp_z"],
                               block["pump_wavelength"], block["pump_bandwidth"])
    solved = solve_poling_period(src)
    dev = solved / figures.PAPER_POLING_PERIOD - 1
    _report(f"solved poling period: {solved * 1e6:.4f} um ({dev:+.2%} vs 47.7 um); "
            f"using {src.poling_period * 1e6:.4f} um")
    families = [
        figures.gaas_counterprop_family(block["pump_wavelength"], block["pump_bandwidth"],
                                        block["slab_thickness"], block["slab_material"]),
        CollinearFamily(src),
    ]
    lengths = cfgmod.length_ladder(block["lengths"])
    head = _header("fig4", resolved)
    paths, plot = [], []
    for family, color, width in zip(families, (COUNTERPROP_COLOR, COLLINEAR_COLOR), (3, 1)):
        curve = visibility_vs_length(family, lengths, offset_in_sigma=block["offset_in_sigma"],
                                     threads=threads, n_points=block["n_points"])
        extra = {"solved_poling_period": solved, "poling_period": src.poling_period}
        paths.append(write_curve_csv(out / f"fig4_{family.label}.csv", curve, {**extra, **head}))
        plot.append((curve.lengths, curve.visibility, color, width))
        _report(f"{family.label}: {curve.visibility[0]:.4f} -> {curve.visibility[-1]:.4f}")
    paths.append(csvio.write_ppm(out / "fig4_overlay.ppm", plotting.render_curves(plot)))
    return paths


COMMANDS = {
    "dispersion": (cmd_dispersion, ("dispersion",)),
    "jsa": (cmd_jsa, ("source", "grid")),
    "franson": (cmd_analysis, ("source", "grid", "analysis")),
    "fig3": (cmd_fig3, ("fig3",)),
    "fig4": (cmd_fig4, ("fig4",)),
    "run": (None, None),
}


def _dispatch_run(raw: dict):
    if "dispersion" in raw and "source" not in raw:
        return cmd_dispersion, ("dispersion",)
    return (lambda r, o, t: cmd_analysis(r, o, t, "run")), ("source", "grid", "analysis")


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autophase",
        description="Counter-propagating SPDC: JSA, Franson interferometry and figure runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        required = name not in ("fig3", "fig4")
        p.add_argument("--config", required=required,
                       help="JSON config, or a CSV emitted by this tool (its header config)")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
        p.add_argument("--validate", action="store_true",
                       help="resolve and print the config, then exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = cfgmod.load_config(args.config) if args.config else {}
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        func, need = COMMANDS[args.command]
        if func is None:
            func, need = _dispatch_run(raw)
        resolved = cfgmod.resolve(raw, need)
        if args.validate:
            print(json.dumps(resolved, indent=2, sort_keys=True))
            return EXIT_OK
        out = Path(args.out)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            paths = func(resolved, out, args.threads)
        for path in paths:
            _report(f"wrote {path}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AliasRisk as exc:
        print(f"alias guard: {exc}", file=sys.stderr)
        return EXIT_ALIAS
    except (AutophaseError, ValueError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
