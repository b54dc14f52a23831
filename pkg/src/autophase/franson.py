"""Franson-interferometer analysis of a joint spectral amplitude.

Each photon passes an unbalanced interferometer (delay τ1 on the left arm,
τ2 on the right). With balanced lossless splitters and broadband detectors
without time gating, the coincidence probability is the frequency-integrated
rate

    P(τ1, τ2) = Σ |A|² |(1 + e^{iω_l τ1})(1 + e^{iω_r τ2})|² / 16

with absolute frequencies ω. Expanding the product,

    P = ¼ [1 + Re S_l + Re S_r + ½ Re F₊ + ½ Re F₋]

where S are single-photon (second-order) phasors and
F± = Σ |A|² e^{i(ω_l τ1 ± ω_r τ2)} are the two fourth-order fringe phasors.
F₊ is modulated along δ·(1, 1) (frequency anti-correlation), F₋ along
δ·(1, −1) (frequency correlation).
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import csvio
from .dispersion import C, DispersionModel, QpmCollinearSource, beta_derivatives
from .jsa import (
    FrequencyGrid,
    JointSpectralAmplitude,
    PumpPulse,
    build_collinear_jsa,
    build_counterprop_jsa,
    marginal_spectrum,
)
from .errors import AliasRisk, AliasRiskWarning, FlatFringeWarning, VisibilityClampWarning

__all__ = [
    "DelayPair",
    "FringePhasors",
    "FransonMap",
    "FringeScan",
    "VisibilityCurve",
    "Classification",
    "CounterpropFamily",
    "CollinearFamily",
    "sweep_grid",
    "ALIAS_GUARD",
    "IDEAL_RAW_VISIBILITY",
    "check_alias",
    "coincidence_probability",
    "probability_matrix",
    "fringe_phasors",
    "franson_map",
    "fringe_scan",
    "fringe_modulation",
    "fourth_order_visibility",
    "visibility_vs_length",
    "classify_correlation",
    "write_map_csv",
    "write_scan_csv",
    "write_curve_csv",
]

ALIAS_GUARD = math.pi / 4
IDEAL_RAW_VISIBILITY = 0.5
FLAT_DEPTH = 1e-6
CLASSIFY_MARGIN = 0.2
DIRECTIONS = {"diagonal": (1.0, 1.0), "antidiagonal": (1.0, -1.0)}
_CHUNK = 64


@dataclass(frozen=True)
class DelayPair:
    tau1: float
    tau2: float

    def __post_init__(self):
        if not (math.isfinite(self.tau1) and math.isfinite(self.tau2)):
            raise ValueError("delays must be finite")

    def __iter__(self):
        return iter((self.tau1, self.tau2))


def check_alias(jsa: JointSpectralAmplitude, max_delay: float) -> None:
    """Raise :class:`AliasRisk` unless step·|τ| < π/4."""
    if jsa.grid.step * abs(max_delay) >= ALIAS_GUARD:
        raise AliasRisk(
            f"delay {max_delay:.4g} undersampled: step·τ = "
            f"{jsa.grid.step * abs(max_delay):.3f} >= π/4"
        )


def probability_matrix(jsa: JointSpectralAmplitude, tau1, tau2) -> np.ndarray:
    """P on the outer product of two delay vectors, shape (len(tau1), len(tau2))."""
    tau1 = np.atleast_1d(np.asarray(tau1, dtype=float))
    tau2 = np.atleast_1d(np.asarray(tau2, dtype=float))
    check_alias(jsa, max(np.abs(tau1).max(), np.abs(tau2).max()))
    u = 1 + np.cos(tau1[:, None] * jsa.grid.omega_l[None, :])
    v = 1 + np.cos(tau2[:, None] * jsa.grid.omega_r[None, :])
    return 0.25 * (u @ jsa.probabilities @ v.T)


def coincidence_probability(jsa: JointSpectralAmplitude, delays) -> float:
    tau1, tau2 = delays
    return float(probability_matrix(jsa, [tau1], [tau2])[0, 0])


class FringePhasors(NamedTuple):
    single_l: complex
    single_r: complex
    sum: complex
    diff: complex

    @property
    def probability(self) -> float:
        return 0.25 * (
            1 + self.single_l.real + self.single_r.real
            + 0.5 * self.sum.real + 0.5 * self.diff.real
        )

    def raw_visibility(self, direction: str) -> float:
        """Contrast of the fourth-order fringe modulated along ``direction``.

        The fringe phase is swept with the other fourth-order term held at
        its value here; second-order (single-photon) terms are excluded:
        ½|F|/(1 + ½ Re F_other).
        """
        mod, other = (self.sum, self.diff) if direction == "diagonal" else (self.diff, self.sum)
        return 0.5 * abs(mod) / (1 + 0.5 * other.real)


def fringe_phasors(jsa: JointSpectralAmplitude, delays) -> FringePhasors:
    tau1, tau2 = delays
    check_alias(jsa, max(abs(tau1), abs(tau2)))
    p = jsa.probabilities
    el = np.exp(1j * jsa.grid.omega_l * tau1)
    er = np.exp(1j * jsa.grid.omega_r * tau2)
    pl = p.sum(axis=1)
    pr = p.sum(axis=0)
    return FringePhasors(
        complex(pl @ el),
        complex(pr @ er),
        complex(el @ p @ er),
        complex(el @ p @ er.conj()),
    )


@dataclass(frozen=True)
class FransonMap:
    """Coincidence probability over delay pairs, delays in optical cycles at ω_p/2."""

    tau1_cycles: np.ndarray
    tau2_cycles: np.ndarray
    probability: np.ndarray  # [i, j] = P(tau1[i], tau2[j])
    cycle: float  # one optical cycle 2π/(ω_p/2), in the JSA's time unit


def franson_map(
    jsa: JointSpectralAmplitude,
    tau_range: Sequence[float] = (0.0, 50.0),
    n_samples: int = 101,
    threads: int | None = None,
) -> FransonMap:
    """Dense map of P over [τ_min, τ_max]² (bounds in optical cycles at ω_p/2)."""
    cycle = 2 * math.pi / (jsa.omega_p / 2)
    cycles = np.linspace(tau_range[0], tau_range[1], n_samples)
    taus = cycles * cycle
    check_alias(jsa, np.abs(taus).max())
    # fixed chunking keeps results bit-identical for any thread count
    chunks = [taus[i:i + _CHUNK] for i in range(0, len(taus), _CHUNK)]
    with ThreadPoolExecutor(max_workers=threads or 1) as pool:
        rows = list(pool.map(lambda t: probability_matrix(jsa, t, taus), chunks))
    return FransonMap(cycles, cycles.copy(), np.vstack(rows), cycle)


@dataclass(frozen=True)
class FringeScan:
    """P sampled along ``center + δ·direction``.

    ``raw_visibility`` is the fourth-order fringe contrast at the center (see
    :meth:`FringePhasors.raw_visibility`); ``sampled_visibility`` is
    (max − min)/(max + min) over the samples; ``scaled_visibility`` is
    ``raw_visibility / 0.5`` clamped to [0, 1].
    """

    center: DelayPair
    direction: str
    deltas: np.ndarray
    probabilities: np.ndarray
    raw_visibility: float
    sampled_visibility: float
    scaled_visibility: float
    sigma: float | None = None
    offset_in_sigma: float | None = None


def _scan_delays(center: DelayPair, direction: str, deltas: np.ndarray):
    d1, d2 = DIRECTIONS[direction]
    return center.tau1 + d1 * deltas, center.tau2 + d2 * deltas


def _scan_probabilities(jsa, center, direction, deltas):
    t1, t2 = _scan_delays(center, direction, deltas)
    check_alias(jsa, max(np.abs(t1).max(), np.abs(t2).max()))
    u = 1 + np.cos(t1[:, None] * jsa.grid.omega_l[None, :])
    v = 1 + np.cos(t2[:, None] * jsa.grid.omega_r[None, :])
    return 0.25 * np.einsum("ki,ij,kj->k", u, jsa.probabilities, v)


def _scale(raw: float) -> float:
    scaled = raw / IDEAL_RAW_VISIBILITY
    if scaled > 1.0:
        warnings.warn(f"scaled visibility {scaled:.6f} clamped to 1", VisibilityClampWarning)
    return min(max(scaled, 0.0), 1.0)


def fringe_scan(
    jsa: JointSpectralAmplitude,
    center: DelayPair,
    direction: str,
    periods: float = 3,
    samples_per_period: int = 64,
) -> FringeScan:
    """Scan ``periods`` fourth-order fringe periods (2π/ω_p) centered on ``center``."""
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {sorted(DIRECTIONS)}")
    if samples_per_period < 64:
        raise ValueError("need at least 64 samples per period")
    period = 2 * math.pi / jsa.omega_p
    n = int(round(periods * samples_per_period)) + 1
    deltas = np.linspace(-periods * period / 2, periods * period / 2, n)
    probs = _scan_probabilities(jsa, center, direction, deltas)
    raw = fringe_phasors(jsa, center).raw_visibility(direction)
    hi, lo = probs.max(), probs.min()
    return FringeScan(
        center, direction, deltas, probs, raw, float((hi - lo) / (hi + lo)), _scale(raw)
    )


def fringe_modulation(
    jsa: JointSpectralAmplitude,
    center: DelayPair,
    direction: str,
    periods: int = 20,
    samples_per_period: int = 64,
) -> float:
    """Amplitude of the Fourier component of P at the fringe frequency ω_p.

    P is sampled along ``direction`` over an integer number of periods
    2π/ω_p (endpoint excluded), and the lock-in amplitude
    2|mean(P e^{−iω_p δ})| is returned. Slowly varying envelopes contribute
    little; an ideal fringe ¼·½cos(ω_p δ + φ) gives ⅛.
    """
    wp = jsa.omega_p
    period = 2 * math.pi / wp
    n = periods * samples_per_period
    deltas = (np.arange(n) - n // 2) * (period / samples_per_period)
    probs = _scan_probabilities(jsa, center, direction, deltas)
    return float(2 * abs(np.mean(probs * np.exp(-1j * wp * deltas))))


def fourth_order_visibility(
    jsa: JointSpectralAmplitude,
    offset_in_sigma: float = 4.0,
    direction: str = "auto",
    sigma: float | None = None,
    periods: float = 3,
    samples_per_period: int = 64,
) -> FringeScan:
    """Fourth-order fringe visibility at the delay offset (k/σ, k/σ).

    ``sigma`` defaults to the mean RMS marginal bandwidth of ``jsa``. With
    ``direction="auto"`` the direction with the larger fourth-order
    modulation depth (|F₊| vs |F₋|) is scanned. If both depths are below
    1e-6 a :class:`FlatFringeWarning` is raised and zero visibility returned.
    """
    if sigma is None:
        sigma = 0.5 * (
            marginal_spectrum(jsa, "left").rms_bandwidth
            + marginal_spectrum(jsa, "right").rms_bandwidth
        )
    tau0 = offset_in_sigma / sigma
    center = DelayPair(tau0, tau0)
    ph = fringe_phasors(jsa, center)
    if direction == "auto":
        direction = "diagonal" if abs(ph.sum) >= abs(ph.diff) else "antidiagonal"
    scan = fringe_scan(jsa, center, direction, periods, samples_per_period)
    if max(abs(ph.sum), abs(ph.diff)) < FLAT_DEPTH:
        warnings.warn("no fourth-order modulation in either direction", FlatFringeWarning)
        return FringeScan(
            center, direction, scan.deltas, scan.probabilities, 0.0, 0.0, 0.0,
            sigma, offset_in_sigma,
        )
    return FringeScan(
        center, direction, scan.deltas, scan.probabilities, scan.raw_visibility,
        scan.sampled_visibility, scan.scaled_visibility, sigma, offset_in_sigma,
    )


def _omega_window(model) -> tuple:
    """Angular-frequency validity window of a dispersion model."""
    core = getattr(model, "core", model)
    rng = getattr(core, "valid_range", None)
    if rng is None:
        return 0.0, math.inf
    return 2 * math.pi * C / (rng[1] * 1e-6), 2 * math.pi * C / (rng[0] * 1e-6)


def _half_room(window, center, scale=1.0) -> float:
    lo, hi = window
    return min(center - lo, hi - center) / scale


def _marginal_from_precision(q: np.ndarray) -> float:
    det = q[0, 0] * q[1, 1] - q[0, 1] * q[1, 0]
    if not det > 1e-12 * (q[0, 0] * q[1, 1]):
        return math.inf
    return math.sqrt(q[1, 1] / det)


@dataclass(frozen=True)
class CounterpropFamily:
    """Counter-propagating source with the pump width W as interaction length."""

    pump: PumpPulse
    model: DispersionModel
    label: str = "counterprop"

    def __post_init__(self):
        if self.pump.monochromatic:
            raise ValueError("the pump bandwidth must be finite for a length sweep")

    @property
    def omega_p(self) -> float:
        return self.pump.omega_p

    @property
    def tau(self) -> float:
        return self.pump.tau

    def build(self, length: float, grid: FrequencyGrid) -> JointSpectralAmplitude:
        return build_counterprop_jsa(self.pump.replace(width_w=length), self.model, grid)

    def bandwidth_estimate(self, length: float) -> float:
        """RMS marginal of the Gaussian approximation with Δβ ≈ β1 (ν_l − ν_r)."""
        b1 = beta_derivatives(self.model, self.omega_p / 2, 1)[0]
        a, b = 2 * self.tau ** 2, 2 * (length * b1) ** 2
        return _marginal_from_precision(np.array([[a + b, a - b], [a - b, a + b]]))

    def delay_extent(self, length: float, half_span: float) -> float:
        """Both arms share one model, so the Δβ = 0 ridge is the grid diagonal
        and an unresolved ridge collapses onto grid points without aliasing."""
        return 0.0

    def max_half_span(self) -> float:
        wc = self.omega_p / 2
        return min(0.9 * wc, 0.999 * _half_room(_omega_window(self.model), wc))


@dataclass(frozen=True)
class CollinearFamily:
    """Collinear QPM source with the crystal length L as interaction length."""

    src: QpmCollinearSource
    label: str = "collinear"

    @property
    def omega_p(self) -> float:
        return self.src.omega_p

    @property
    def tau(self) -> float:
        return self.src.pump_duration

    def build(self, length: float, grid: FrequencyGrid) -> JointSpectralAmplitude:
        return build_collinear_jsa(self.src.replace(length=length), grid)

    def bandwidth_estimate(self, length: float) -> float:
        """RMS marginal with sinc²(x) ≈ exp(−x²/3) and a linearised Δk."""
        wp = self.omega_p
        b1p = beta_derivatives(self.src.pump_dispersion, wp, 1)[0]
        g_s = b1p - beta_derivatives(self.src.signal_dispersion, wp / 2, 1)[0]
        g_i = b1p - beta_derivatives(self.src.idler_dispersion, wp / 2, 1)[0]
        g = np.array([g_s, g_i])
        q = 2 * self.tau ** 2 * np.ones((2, 2)) + (length ** 2 / 6) * np.outer(g, g)
        return _marginal_from_precision(q)

    def delay_extent(self, length: float, half_span: float) -> float:
        """Largest group-delay walk-off L/2·|∂Δk/∂ν| over the grid corners."""
        wp, wc = self.omega_p, self.omega_p / 2
        src = self.src
        worst = 0.0
        for nu_s in (-half_span, 0.0, half_span):
            for nu_i in (-half_span, 0.0, half_span):
                b1p = beta_derivatives(src.pump_dispersion, wp + nu_s + nu_i, 1)[0]
                g_s = b1p - beta_derivatives(src.signal_dispersion, wc + nu_s, 1)[0]
                g_i = b1p - beta_derivatives(src.idler_dispersion, wc + nu_i, 1)[0]
                worst = max(worst, abs(g_s), abs(g_i))
        return 0.5 * length * worst

    def max_half_span(self) -> float:
        wp, wc = self.omega_p, self.omega_p / 2
        room = min(
            _half_room(_omega_window(self.src.signal_dispersion), wc),
            _half_room(_omega_window(self.src.idler_dispersion), wc),
            _half_room(_omega_window(self.src.pump_dispersion), wp, scale=2.0),
        )
        return min(0.9 * wc, 0.999 * room)


def sweep_grid(family, length: float, n_points: int = 257, span_sigmas: float = 5.0,
               offset_in_sigma: float = 4.0, max_points: int = 4097) -> FrequencyGrid:
    """Grid for one sweep point: ``span_sigmas`` estimated marginal widths.

    The span is capped by the models' validity windows (and 0.9·ω_p/2), in
    which case the spectrum is truncated by the grid. ``n_points`` is raised
    (up to ``max_points``) until the alias-free delay window π/step covers the
    source's walk-off plus the fringe offset with a 25% margin.
    """
    sigma = family.bandwidth_estimate(length)
    half = min(span_sigmas * sigma, family.max_half_span())
    window = 1.25 * (family.delay_extent(length, half) + offset_in_sigma / min(sigma, half))
    needed = int(math.ceil(2 * half * window / math.pi)) + 1
    n = max(n_points, needed + (needed + 1) % 2)
    if n > max_points:
        warnings.warn(
            f"length {length:.4g}: {n} grid points needed, capped at {max_points}",
            AliasRiskWarning,
        )
        n = max_points - (max_points + 1) % 2
    return FrequencyGrid.degenerate(family.omega_p, half, n)


@dataclass(frozen=True)
class VisibilityCurve:
    lengths: np.ndarray
    visibility: np.ndarray
    label: str
    raw_visibility: np.ndarray = field(default_factory=lambda: np.array([]))


def visibility_vs_length(
    family,
    lengths: Sequence[float],
    grid: FrequencyGrid | None = None,
    offset_in_sigma: float = 4.0,
    direction: str = "antidiagonal",
    threads: int | None = None,
    n_points: int = 257,
    span_sigmas: float = 5.0,
) -> VisibilityCurve:
    """Scaled fourth-order visibility of the rebuilt source at each length.

    The pump bandwidth stays fixed across the sweep. Without an explicit
    ``grid`` each length gets its own :func:`sweep_grid`. The default
    direction reads the frequency-correlated fringe (δ·(1, −1)).
    """
    lengths = np.asarray(lengths, dtype=float)
    if lengths.ndim != 1 or len(lengths) == 0 or np.any(lengths <= 0):
        raise ValueError("lengths must be a non-empty list of positive values")
    if np.any(np.diff(lengths) <= 0):
        raise ValueError("lengths must be strictly increasing")

    def one(length):
        g = grid or sweep_grid(family, length, n_points, span_sigmas, offset_in_sigma)
        scan = fourth_order_visibility(
            family.build(length, g), offset_in_sigma, direction=direction
        )
        return scan.scaled_visibility, scan.raw_visibility

    with ThreadPoolExecutor(max_workers=threads or 1) as pool:
        results = list(pool.map(one, lengths))
    vis = np.array([r[0] for r in results])
    raw = np.array([r[1] for r in results])
    return VisibilityCurve(lengths, vis, family.label, raw)


class Classification(NamedTuple):
    label: str
    diagonal: float
    antidiagonal: float


def classify_correlation(
    jsa: JointSpectralAmplitude, offset_in_sigma: float = 4.0
) -> Classification:
    """Label a source by comparing its two scaled fourth-order visibilities."""
    sigma = 0.5 * (
        marginal_spectrum(jsa, "left").rms_bandwidth
        + marginal_spectrum(jsa, "right").rms_bandwidth
    )
    tau0 = offset_in_sigma / sigma
    ph = fringe_phasors(jsa, DelayPair(tau0, tau0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", VisibilityClampWarning)
        diag = _scale(ph.raw_visibility("diagonal"))
        anti = _scale(ph.raw_visibility("antidiagonal"))
    if diag - anti >= CLASSIFY_MARGIN:
        label = "anti_correlated"
    elif anti - diag >= CLASSIFY_MARGIN:
        label = "correlated"
    else:
        label = "intermediate"
    return Classification(label, diag, anti)


def write_map_csv(path, fmap: FransonMap, header: dict | None = None):
    meta = {"kind": "franson_map", "delay_unit": "optical cycles at omega_p/2",
            "cycle": fmap.cycle, "n_tau1": len(fmap.tau1_cycles),
            "n_tau2": len(fmap.tau2_cycles)}
    meta.update(header or {})
    p = fmap.probability
    rows = (
        (t1, t2, p[i, j])
        for i, t1 in enumerate(fmap.tau1_cycles)
        for j, t2 in enumerate(fmap.tau2_cycles)
    )
    return csvio.write_table(path, meta, ["tau1", "tau2", "P"], rows)


def write_scan_csv(path, scan: FringeScan, header: dict | None = None):
    meta = {"kind": "fringe_scan", "center": [scan.center.tau1, scan.center.tau2],
            "direction": scan.direction, "raw_visibility": scan.raw_visibility,
            "sampled_visibility": scan.sampled_visibility,
            "scaled_visibility": scan.scaled_visibility, "sigma": scan.sigma,
            "offset_in_sigma": scan.offset_in_sigma}
    meta.update(header or {})
    rows = zip(scan.deltas, scan.probabilities)
    return csvio.write_table(path, meta, ["delta", "P"], rows)


def write_curve_csv(path, curve: VisibilityCurve, header: dict | None = None):
    meta = {"kind": "visibility_curve", "label": curve.label}
    meta.update(header or {})
    rows = zip(curve.lengths, curve.visibility)
    return csvio.write_table(path, meta, ["length", "scaled_visibility"], rows)
