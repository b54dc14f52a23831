"""Source set-ups for the coincidence maps and the visibility-vs-length curves."""
from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .dispersion import (
    QpmCollinearSource,
    SlabWaveguideTE,
    TaylorDispersion,
    load_material,
    solve_poling_period,
    wavelength_to_omega,
)
from .franson import CollinearFamily, CounterpropFamily
from .jsa import (
    FrequencyGrid,
    JointSpectralAmplitude,
    PumpPulse,
    build_counterprop_jsa,
    marginal_spectrum,
)

PAPER_POLING_PERIOD = 47.7e-6
PUMP_WAVELENGTH = 790e-9
PUMP_BANDWIDTH = 2 * math.pi * 3e12  # intensity FWHM, rad/s
SLAB_THICKNESS = 3e-6


def bisect_monotone(f: Callable[[float], float], target: float, lo: float, hi: float,
                    rel_tol: float = 1e-13, max_iter: int = 400) -> float:
    """Solve f(x) = target for decreasing f on [lo, hi], bisecting in log x."""
    f_lo, f_hi = f(lo) - target, f(hi) - target
    for _ in range(60):
        if f_lo > 0:
            break
        lo /= 2
        f_lo = f(lo) - target
    for _ in range(60):
        if f_hi < 0:
            break
        hi *= 2
        f_hi = f(hi) - target
    if not (f_lo > 0 > f_hi):
        raise ValueError("could not bracket the target")
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1 < rel_tol:
            break
    return math.sqrt(lo * hi)


class Fig3Sources(NamedTuple):
    anti: JointSpectralAmplitude
    corr: JointSpectralAmplitude
    width_w: float
    tau: float
    sigma: float


def fig3_sources(omega_p: float = 1.0, bandwidth_fraction: float = 0.1,
                 n_points: int = 1001, span_sigmas: float = 5.0) -> Fig3Sources:
    """The two limiting sources, each calibrated to RMS bandwidth ``fraction·ω_p``.

    Anti-correlated: monochromatic pump, W solved. Correlated: plane-wave
    pump, τ solved. Both use a unit-group-delay first-order waveguide.
    """
    sigma = bandwidth_fraction * omega_p
    grid = FrequencyGrid.degenerate(omega_p, span_sigmas * sigma, n_points)
    model = TaylorDispersion(omega_p / 2, (0.0, 1.0))
    guess = 1 / (2 * math.sqrt(2) * sigma)

    def rms_w(w):
        jsa = build_counterprop_jsa(PumpPulse(omega_p, math.inf, w), model, grid)
        return marginal_spectrum(jsa).rms_bandwidth

    def rms_tau(t):
        jsa = build_counterprop_jsa(PumpPulse(omega_p, t, math.inf), model, grid)
        return marginal_spectrum(jsa).rms_bandwidth

    width = bisect_monotone(rms_w, sigma, guess / 4, guess * 4)
    tau = bisect_monotone(rms_tau, sigma, guess / 4, guess * 4)
    anti = build_counterprop_jsa(PumpPulse(omega_p, math.inf, width), model, grid)
    corr = build_counterprop_jsa(PumpPulse(omega_p, tau, math.inf), model, grid)
    return Fig3Sources(anti, corr, width, tau, sigma)


def ppktp_source(length: float = 1e-2, poling_period: float | None = None,
                 pump_ny: str = "KTP_ny", signal_nz: str = "KTP_nz",
                 pump_wavelength: float = PUMP_WAVELENGTH,
                 pump_bandwidth: float = PUMP_BANDWIDTH) -> QpmCollinearSource:
    """Type-II PPKTP: pump and idler y-polarised, signal z-polarised.

    ``poling_period=None`` solves the period for degenerate phase matching.
    """
    ny, nz = load_material(pump_ny), load_material(signal_nz)
    src = QpmCollinearSource(ny, nz, ny, math.inf, length, pump_wavelength, pump_bandwidth)
    period = solve_poling_period(src) if poling_period is None else poling_period
    return src.replace(poling_period=period)


def gaas_slab(thickness: float = SLAB_THICKNESS, material: str = "GaAs") -> SlabWaveguideTE:
    return SlabWaveguideTE(load_material(material), 1.0, thickness, 0)


def gaas_counterprop_family(pump_wavelength: float = PUMP_WAVELENGTH,
                            pump_bandwidth: float = PUMP_BANDWIDTH,
                            thickness: float = SLAB_THICKNESS,
                            material: str = "GaAs") -> CounterpropFamily:
    """Counter-propagating GaAs slab source; the sweep sets the pump width W."""
    omega_p = float(wavelength_to_omega(pump_wavelength))
    tau = 2 * math.sqrt(math.log(2)) / pump_bandwidth
    return CounterpropFamily(PumpPulse(omega_p, tau, 1e-6), gaas_slab(thickness, material))


def default_lengths(count: int = 12, lo: float = 1e-6, hi: float = 1e-1) -> np.ndarray:
    return np.geomspace(lo, hi, count)
