"""Joint spectral amplitudes of photon pairs.

Two sources are modelled on a square detuning grid (ν = ω − ω_p/2 per photon):

* transverse-pumped counter-propagating SPDC in a waveguide,
  ``A(ν_l, ν_r) = E_t(ν_l + ν_r) · f_z[β(ω_l) − β(ω_r)]`` with Gaussian pump
  factors ``exp(−½(ν τ)²)`` and ``exp(−½(Δβ W)²)``;
* a collinear quasi-phase-matched crystal,
  ``A(ν_s, ν_i) = E_t(ν_s + ν_i) · sinc(Δk L / 2)``.

Every builder returns an L2-normalised :class:`JointSpectralAmplitude`,
``Σ|A|² step² = 1``.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import csvio
from .dispersion import DispersionModel, QpmCollinearSource, qpm_mismatch
from .errors import AliasRiskWarning, DegenerateKernel, ZeroVariance

__all__ = [
    "PumpPulse",
    "FrequencyGrid",
    "JointSpectralAmplitude",
    "JointTemporalIntensity",
    "Marginal",
    "pump_spectral_amplitude",
    "pump_spatial_transform",
    "build_counterprop_jsa",
    "build_collinear_jsa",
    "marginal_spectrum",
    "frequency_correlation",
    "joint_temporal_intensity",
    "temporal_correlation",
    "counterprop_bandwidth_estimate",
    "write_jsa_csv",
    "read_jsa_csv",
    "write_jti_csv",
]

EDGE_DECAY = 1e-6


@dataclass(frozen=True)
class PumpPulse:
    """Gaussian pump with center ``omega_p``, duration ``tau`` and width ``width_w``.

    ``tau = inf`` is the monochromatic limit and ``width_w = inf`` the
    plane-wave limit; at most one may be infinite.
    """

    omega_p: float
    tau: float = math.inf
    width_w: float = math.inf

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError("omega_p must be positive")
        if not self.tau > 0 or not self.width_w > 0:
            raise ValueError("tau and width_w must be positive")
        if math.isinf(self.tau) and math.isinf(self.width_w):
            raise ValueError("tau and width_w cannot both be infinite")

    @property
    def monochromatic(self) -> bool:
        return math.isinf(self.tau)

    @property
    def plane_wave(self) -> bool:
        return math.isinf(self.width_w)

    def replace(self, **changes) -> "PumpPulse":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform odd-sized grid of detunings, symmetric about each center."""

    center_l: float
    center_r: float
    half_span: float
    n_points: int = 257

    def __post_init__(self):
        if self.n_points < 3 or self.n_points % 2 != 1:
            raise ValueError("n_points must be an odd integer >= 3")
        if not self.half_span > 0:
            raise ValueError("half_span must be positive")

    @classmethod
    def degenerate(cls, omega_p: float, half_span: float, n_points: int = 257):
        return cls(omega_p / 2, omega_p / 2, half_span, n_points)

    @property
    def step(self) -> float:
        return 2 * self.half_span / (self.n_points - 1)

    @cached_property
    def nu(self) -> np.ndarray:
        # integer multiples of the step: the center is exactly zero and ±k pair up exactly
        k = np.arange(self.n_points) - (self.n_points - 1) // 2
        nu = k * self.step
        nu.flags.writeable = False
        return nu

    @property
    def omega_l(self) -> np.ndarray:
        return self.center_l + self.nu

    @property
    def omega_r(self) -> np.ndarray:
        return self.center_r + self.nu

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class JointSpectralAmplitude:
    """``amplitude[i, j] = A(ω_l[i], ω_r[j])`` on ``grid``."""

    grid: FrequencyGrid
    amplitude: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        amp = np.array(self.amplitude, dtype=complex)
        n = self.grid.n_points
        if amp.shape != (n, n):
            raise ValueError(f"amplitude shape {amp.shape} does not match grid ({n}, {n})")
        if not np.all(np.isfinite(amp)):
            raise ValueError("amplitude contains NaN or Inf")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitude", amp)

    @property
    def omega_p(self) -> float:
        return self.grid.center_l + self.grid.center_r

    @cached_property
    def probabilities(self) -> np.ndarray:
        """|A|² normalised to unit sum (discrete joint distribution)."""
        p = np.abs(self.amplitude) ** 2
        p = p / p.sum()
        p.flags.writeable = False
        return p

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.grid.step ** 2)


def _normalized(grid: FrequencyGrid, kernel: np.ndarray, metadata: dict):
    total = float(np.sum(np.abs(kernel) ** 2)) * grid.step ** 2
    if not total > 0 or not math.isfinite(total):
        raise DegenerateKernel(f"kernel vanishes on the grid ({metadata.get('source')})")
    return JointSpectralAmplitude(grid, kernel / math.sqrt(total), metadata)


def pump_spectral_amplitude(pump: PumpPulse, nu_sum):
    """exp(−½(ν_sum τ)²) for the detuning of ω_l + ω_r from ω_p."""
    if pump.monochromatic:
        raise ValueError("monochromatic pump has no finite spectral profile")
    return np.exp(-0.5 * (np.asarray(nu_sum, dtype=float) * pump.tau) ** 2)


def pump_spatial_transform(pump: PumpPulse, d_beta):
    """exp(−½(Δβ W)²)."""
    if pump.plane_wave:
        raise ValueError("plane-wave pump has no finite spatial profile")
    return np.exp(-0.5 * (np.asarray(d_beta, dtype=float) * pump.width_w) ** 2)


def _sum_detuning(grid: FrequencyGrid, omega_p: float) -> np.ndarray:
    offset = grid.center_l + grid.center_r - omega_p
    return offset + grid.nu[:, None] + grid.nu[None, :]


def build_counterprop_jsa(
    pump: PumpPulse, model: DispersionModel, grid: FrequencyGrid
) -> JointSpectralAmplitude:
    """Counter-propagating pair amplitude for a transverse Gaussian pump.

    In the monochromatic limit the temporal factor is the indicator of the
    grid line ν_l + ν_r = 0; in the plane-wave limit the spatial factor is the
    indicator of cells where |Δβ| is below half a grid step of β'(ω).
    """
    step = grid.step
    nu_sum = _sum_detuning(grid, pump.omega_p)
    if pump.monochromatic:
        temporal = (np.abs(nu_sum) <= step / 2).astype(float)
    else:
        temporal = pump_spectral_amplitude(pump, nu_sum)

    beta_l = np.asarray(model.beta(grid.omega_l), dtype=float)
    beta_r = np.asarray(model.beta(grid.omega_r), dtype=float)
    d_beta = beta_l[:, None] - beta_r[None, :]
    if pump.plane_wave:
        slope_l = np.abs(np.gradient(beta_l, step))
        slope_r = np.abs(np.gradient(beta_r, step))
        tol = 0.5 * step * np.minimum(slope_l[:, None], slope_r[None, :])
        spatial = (np.abs(d_beta) <= tol).astype(float)
    else:
        spatial = pump_spatial_transform(pump, d_beta)

    meta = {
        "source": "counterprop",
        "omega_p": pump.omega_p,
        "tau": pump.tau,
        "width_w": pump.width_w,
    }
    return _normalized(grid, temporal * spatial, meta)


def build_collinear_jsa(src: QpmCollinearSource, grid: FrequencyGrid) -> JointSpectralAmplitude:
    """Collinear QPM pair amplitude, Gaussian pump times sinc(Δk L / 2)."""
    wp = src.omega_p
    temporal = np.exp(-0.5 * (_sum_detuning(grid, wp) * src.pump_duration) ** 2)
    nu_s = grid.omega_l - wp / 2
    nu_i = grid.omega_r - wp / 2
    dk = qpm_mismatch(src, nu_s[:, None], nu_i[None, :])
    phase_matching = np.sinc(dk * src.length / (2 * np.pi))
    meta = {
        "source": "collinear",
        "omega_p": wp,
        "length": src.length,
        "poling_period": src.poling_period,
        "pump_bandwidth": src.pump_bandwidth,
    }
    return _normalized(grid, temporal * phase_matching, meta)


class Marginal(NamedTuple):
    nu: np.ndarray
    intensity: np.ndarray
    rms_bandwidth: float
    mean: float


def marginal_spectrum(jsa: JointSpectralAmplitude, side: str = "left") -> Marginal:
    """Single-photon spectrum (sums to one) and its RMS width in rad/s."""
    axis = {"left": 1, "right": 0}.get(side)
    if axis is None:
        raise ValueError("side must be 'left' or 'right'")
    p = jsa.probabilities.sum(axis=axis)
    nu = jsa.grid.nu
    mean = float(np.dot(p, nu))
    var = float(np.dot(p, (nu - mean) ** 2))
    return Marginal(nu, p, math.sqrt(var), mean)


def _pearson(p: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    px, py = p.sum(axis=1), p.sum(axis=0)
    dx = x - np.dot(px, x)
    dy = y - np.dot(py, y)
    var_x = float(np.dot(px, dx * dx))
    var_y = float(np.dot(py, dy * dy))
    if var_x <= 0 or var_y <= 0:
        raise ZeroVariance("a marginal is concentrated on a single grid point")
    cov = float(dx @ p @ dy)
    return cov / math.sqrt(var_x * var_y)


def frequency_correlation(jsa: JointSpectralAmplitude) -> float:
    """Pearson correlation of (ν_l, ν_r) under |A|²."""
    return _pearson(jsa.probabilities, jsa.grid.nu, jsa.grid.nu)


def counterprop_bandwidth_estimate(pump: PumpPulse, beta1: float) -> float:
    """RMS single-photon bandwidth of the counter-propagating source.

    Exact for a first-order dispersion model with group delay ``beta1``:
    σ² = (1/(2τ²) + 1/(2β1²W²)) / 4.
    """
    var_sum = 0.0 if pump.monochromatic else 1 / (2 * pump.tau ** 2)
    var_diff = 0.0 if pump.plane_wave else 1 / (2 * (beta1 * pump.width_w) ** 2)
    return math.sqrt((var_sum + var_diff) / 4)


@dataclass(frozen=True)
class JointTemporalIntensity:
    """|Ã(t1, t2)|² on a symmetric time grid, normalised to unit sum."""

    times: np.ndarray
    intensity: np.ndarray

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])


def joint_temporal_intensity(jsa: JointSpectralAmplitude) -> JointTemporalIntensity:
    """Two-dimensional DFT of the amplitude (detuning → time), squared.

    Warns with :class:`AliasRiskWarning` when |A|² at the grid edge exceeds
    1e-6 of its peak, since the periodic transform then wraps.
    """
    amp = np.asarray(jsa.amplitude)
    power = np.abs(amp) ** 2
    edge = max(power[0].max(), power[-1].max(), power[:, 0].max(), power[:, -1].max())
    if edge > EDGE_DECAY * power.max():
        warnings.warn(
            f"spectral kernel at grid edge is {edge / power.max():.2e} of peak",
            AliasRiskWarning,
            stacklevel=2,
        )
    n = jsa.grid.n_points
    spectrum = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(amp)))
    times = np.fft.fftshift(np.fft.fftfreq(n, d=jsa.grid.step / (2 * np.pi)))
    intensity = np.abs(spectrum) ** 2
    return JointTemporalIntensity(times, intensity / intensity.sum())


def temporal_correlation(jti: JointTemporalIntensity) -> float:
    """Pearson correlation of (t1, t2) under the joint temporal intensity."""
    return _pearson(jti.intensity, jti.times, jti.times)


def write_jsa_csv(path, jsa: JointSpectralAmplitude, header: dict | None = None):
    n = jsa.grid.n_points
    amp = jsa.amplitude
    meta = {"kind": "jsa", **jsa.grid.as_dict(), "metadata": jsa.metadata}
    meta.update(header or {})
    rows = (
        (i, j, amp[i, j].real, amp[i, j].imag) for i in range(n) for j in range(n)
    )
    return csvio.write_table(path, meta, ["i", "j", "re", "im"], rows)


def read_jsa_csv(path) -> JointSpectralAmplitude:
    head = csvio.read_header(path)
    if head.get("kind") != "jsa":
        raise ValueError(f"{path} is not a JSA export")
    grid = FrequencyGrid(
        head["center_l"], head["center_r"], head["half_span"], head["n_points"]
    )
    data = csvio.read_table(path)
    n = grid.n_points
    amp = np.zeros((n, n), dtype=complex)
    amp[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2] + 1j * data[:, 3]
    return JointSpectralAmplitude(grid, amp, head.get("metadata", {}))


def write_jti_csv(path, jti: JointTemporalIntensity, header: dict | None = None):
    n = len(jti.times)
    meta = {"kind": "jti", "n_points": n, "t_step": jti.step, "t_min": float(jti.times[0])}
    meta.update(header or {})
    inten = jti.intensity
    rows = ((i, j, inten[i, j]) for i in range(n) for j in range(n))
    return csvio.write_table(path, meta, ["i", "j", "intensity"], rows)
