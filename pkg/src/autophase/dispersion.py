"""Propagation constants, their frequency derivatives, and phase mismatch.

Three dispersion models share one small interface (``beta(omega)``):

* :class:`SellmeierModel` -- bulk material, ``beta = n(omega) * omega / c``
* :class:`TaylorDispersion` -- polynomial expansion about ``omega0``
* :class:`SlabWaveguideTE` -- fundamental or higher TE mode of a symmetric slab

Frequencies are angular (rad/s), lengths in meters, Sellmeier wavelengths in
micrometers. All objects are immutable.
"""
from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.constants import c as C

from .errors import DegenerateMismatch, ModeCutoff, OutOfRange

__all__ = [
    "C",
    "SellmeierModel",
    "TaylorDispersion",
    "SlabWaveguideTE",
    "QpmCollinearSource",
    "DispersionModel",
    "MATERIALS",
    "load_material",
    "sellmeier_from_dict",
    "refractive_index",
    "beta",
    "beta_derivatives",
    "slab_te_effective_index",
    "delta_beta",
    "unpoled_mismatch",
    "qpm_mismatch",
    "solve_poling_period",
    "wavelength_to_omega",
    "omega_to_wavelength",
]

# central-difference steps, relative to the expansion frequency
FD_RELATIVE_STEP = 1e-5
# third differences lose too many digits at 1e-5 even in extended precision
FD_RELATIVE_STEP_ORDER3 = 3e-4

_LD = np.longdouble
_TWO_PI_LD = _LD(2) * _LD("3.141592653589793238462643383279502884")
_C_LD = _LD(C)

SELLMEIER_FORMS = ("sellmeier", "pole")

MATERIALS = {
    "GaAs": "GaAs_Skauli2003.json",
    "KTP_ny": "KTP_ny_Fan1987.json",
    "KTP_nz": "KTP_nz_Fan1987.json",
    "KTP_ny_Kato2002": "KTP_ny_Kato2002.json",
    "KTP_nz_Kato2002": "KTP_nz_Kato2002.json",
}


def wavelength_to_omega(wavelength):
    return 2 * np.pi * C / np.asarray(wavelength, dtype=float)


def omega_to_wavelength(omega):
    return 2 * np.pi * C / np.asarray(omega, dtype=float)


@dataclass(frozen=True)
class SellmeierModel:
    """Bulk refractive index n(λ) from a closed-form fit.

    ``form_id`` selects the closed form (λ in µm):

    ``"sellmeier"``
        coefficients ``[A, B1, L1, B2, L2, ...]``,
        ``n² = A + Σ Bk λ²/(λ² − Lk²)``
    ``"pole"``
        coefficients ``[A, D, B1, C1, B2, C2, ...]``,
        ``n² = A − D λ² + Σ Bk/(λ² − Ck)``

    A ``"sellmeier"`` model with coefficients ``[A]`` is the nondispersive
    medium ``n = √A``.
    """

    name: str
    form_id: str
    coefficients: tuple
    valid_range: tuple  # (λ_min, λ_max) in µm

    def __post_init__(self):
        coeffs = tuple(float(k) for k in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        lo, hi = (float(x) for x in self.valid_range)
        object.__setattr__(self, "valid_range", (lo, hi))
        if self.form_id not in SELLMEIER_FORMS:
            raise ValueError(f"unknown Sellmeier form {self.form_id!r}")
        if self.form_id == "sellmeier" and len(coeffs) % 2 != 1:
            raise ValueError("sellmeier form needs [A, B1, L1, ...]")
        if self.form_id == "pole" and (len(coeffs) < 2 or len(coeffs) % 2 != 0):
            raise ValueError("pole form needs [A, D, B1, C1, ...]")
        if not 0 < lo < hi:
            raise ValueError(f"invalid range {self.valid_range}")
        n2 = self._n2(np.linspace(lo, hi, 2001))
        if not np.all(np.isfinite(n2)) or np.any(n2 <= 1.0):
            raise ValueError(f"{self.name}: n is not real and > 1 over {self.valid_range} µm")

    @property
    def nondispersive(self) -> bool:
        return self.form_id == "sellmeier" and len(self.coefficients) == 1

    @classmethod
    def constant(cls, n: float, valid_range=(0.1, 100.0), name: str = "constant"):
        return cls(name, "sellmeier", (n * n,), valid_range)

    def _n2(self, lam_um):
        # dtype-agnostic so the extended-precision path can reuse it
        lam2 = lam_um * lam_um
        k = self.coefficients
        if self.form_id == "sellmeier":
            out = k[0] + 0 * lam2
            for b, res in zip(k[1::2], k[2::2]):
                out = out + b * lam2 / (lam2 - res * res)
        else:
            out = k[0] - k[1] * lam2
            for b, pole in zip(k[2::2], k[3::2]):
                out = out + b / (lam2 - pole)
        return out

    def _check_um(self, lam_um):
        lo, hi = self.valid_range
        lam = np.asarray(lam_um)
        if np.any(~(lam >= lo)) or np.any(~(lam <= hi)):
            bad = lam[(~(lam >= lo)) | (~(lam <= hi))].ravel()[0]
            raise OutOfRange(
                f"{self.name}: λ = {float(bad):.6g} µm outside [{lo}, {hi}] µm"
            )

    def index(self, wavelength):
        """Refractive index at vacuum wavelength(s) in meters."""
        lam_um = np.asarray(wavelength, dtype=float) * 1e6
        self._check_um(lam_um)
        return np.sqrt(self._n2(lam_um))

    def beta(self, omega):
        omega = np.asarray(omega, dtype=float)
        _check_positive(omega)
        return self.index(2 * np.pi * C / omega) * omega / C

    def _beta_ext(self, omega):
        omega = np.asarray(omega, dtype=_LD)
        _check_positive(omega)
        lam_um = _TWO_PI_LD * _C_LD / omega * _LD(1e6)
        self._check_um(lam_um)
        return np.sqrt(self._n2(lam_um)) * omega / _C_LD


@dataclass(frozen=True)
class TaylorDispersion:
    """β(ω) = Σ βk (ω − ω0)^k / k!, with ``betas = (β0, β1, β2, ...)``."""

    omega0: float
    betas: tuple

    def __post_init__(self):
        object.__setattr__(self, "omega0", float(self.omega0))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not self.betas:
            raise ValueError("TaylorDispersion needs at least β0")

    def _poly(self, x, betas):
        out = 0 * x
        for k in range(len(betas) - 1, -1, -1):
            out = out * x / (k + 1) + betas[k]
        return out

    def beta(self, omega):
        x = np.asarray(omega, dtype=float) - self.omega0
        return self._poly(x, self.betas)

    def _beta_ext(self, omega):
        x = np.asarray(omega, dtype=_LD) - _LD(self.omega0)
        return self._poly(x, self.betas)

    def derivative(self, order: int, omega):
        """Exact ``order``-th derivative of β at ``omega``."""
        shifted = self.betas[order:]
        if not shifted:
            return 0.0 * np.asarray(omega, dtype=float)
        return self._poly(np.asarray(omega, dtype=float) - self.omega0, shifted)


@dataclass(frozen=True)
class SlabWaveguideTE:
    """Symmetric dielectric slab, TE modes, cladding on both sides."""

    core: SellmeierModel
    n_clad: float = 1.0
    thickness: float = 3e-6
    mode_order: int = 0

    def __post_init__(self):
        if self.thickness <= 0:
            raise ValueError("thickness must be positive")
        if self.mode_order < 0 or int(self.mode_order) != self.mode_order:
            raise ValueError("mode_order must be a non-negative integer")
        if self.n_clad < 1.0:
            raise ValueError("cladding index must be >= 1")

    def effective_index(self, wavelength):
        lam = np.asarray(wavelength, dtype=float)
        n_core = self.core.index(lam)
        return _slab_te_neff(n_core, self.n_clad, self.thickness, lam, self.mode_order)

    def beta(self, omega):
        omega = np.asarray(omega, dtype=float)
        _check_positive(omega)
        return self.effective_index(2 * np.pi * C / omega) * omega / C

    def _beta_ext(self, omega):
        omega = np.asarray(omega, dtype=_LD)
        _check_positive(omega)
        lam = _TWO_PI_LD * _C_LD / omega
        lam_um = lam * _LD(1e6)
        self.core._check_um(lam_um)
        n_core = np.sqrt(self.core._n2(lam_um))
        neff = _slab_te_neff(
            n_core, _LD(self.n_clad), _LD(self.thickness), lam, self.mode_order
        )
        return neff * omega / _C_LD


DispersionModel = Union[SellmeierModel, TaylorDispersion, SlabWaveguideTE]


def _check_positive(omega):
    if np.any(~(np.asarray(omega) > 0)):
        raise OutOfRange("angular frequency must be positive")


def _slab_te_neff(n_core, n_clad, d, lam, m, iterations=90):
    """Bisection on u = κd/2 for the symmetric-slab TE dispersion relation.

    With V = (k0 d / 2)√(n_core² − n_clad²) and w = √(V² − u²), mode ``m``
    solves tan(u − mπ/2) = w/u for u in (mπ/2, min((m+1)π/2, V)). The
    bracket uses the pole-free form u·sin(u − mπ/2) − w·cos(u − mπ/2).
    """
    n_core, lam = np.broadcast_arrays(n_core, lam)
    dtype = np.result_type(n_core, lam, n_clad, d)
    one = dtype.type(1)
    pi = _TWO_PI_LD.astype(dtype) / 2
    n_core = n_core.astype(dtype)
    lam = lam.astype(dtype)
    if np.any(n_core <= n_clad):
        raise ModeCutoff("core index does not exceed cladding index")
    k0 = 2 * pi / lam
    v = k0 * d / 2 * np.sqrt(n_core * n_core - n_clad * n_clad)
    shift = m * pi / 2
    if np.any(v <= shift):
        raise ModeCutoff(
            f"TE{m} not guided: V = {float(np.min(v)):.4g} <= {float(shift):.4g}"
        )
    lo = np.full(v.shape, shift, dtype=dtype)
    hi = np.minimum(shift + pi / 2, v)
    for _ in range(iterations):
        mid = (lo + hi) / 2
        w = np.sqrt(np.maximum(v * v - mid * mid, 0 * one))
        g = mid * np.sin(mid - shift) - w * np.cos(mid - shift)
        neg = g < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    u = (lo + hi) / 2
    kt = 2 * u / (k0 * d)
    neff = np.sqrt(n_core * n_core - kt * kt)
    return neff[()] if neff.ndim == 0 else neff


def sellmeier_from_dict(data: dict) -> SellmeierModel:
    return SellmeierModel(
        name=data.get("name", "unnamed"),
        form_id=data["form_id"],
        coefficients=tuple(data["coefficients"]),
        valid_range=tuple(data["range_um"]),
    )


def load_material(name_or_path: Union[str, Path]) -> SellmeierModel:
    """Load a Sellmeier model by shipped name (see ``MATERIALS``) or JSON path."""
    key = str(name_or_path)
    if key in MATERIALS:
        text = resources.files("autophase").joinpath("data", MATERIALS[key]).read_text()
    else:
        path = Path(key)
        if not path.is_file():
            raise FileNotFoundError(f"no material named or at {key!r}")
        text = path.read_text()
    return sellmeier_from_dict(json.loads(text))


def refractive_index(model: SellmeierModel, wavelength):
    return model.index(wavelength)


def beta(model: DispersionModel, omega):
    return model.beta(omega)


def slab_te_effective_index(wg: SlabWaveguideTE, wavelength):
    return wg.effective_index(wavelength)


def delta_beta(model: DispersionModel, omega_l, omega_r):
    """β(ω_l) − β(ω_r); zero whenever the two frequencies coincide."""
    return model.beta(omega_l) - model.beta(omega_r)


def _central_differences(f, w, h, h3, max_order):
    out = []
    b0, bp, bm = f(w), f(w + h), f(w - h)
    out.append((bp - bm) / (2 * h))
    if max_order >= 2:
        out.append((bp - 2 * b0 + bm) / (h * h))
    if max_order >= 3:
        p1, p2, m1, m2 = f(w + h3), f(w + 2 * h3), f(w - h3), f(w - 2 * h3)
        out.append((p2 - 2 * p1 + 2 * m1 - m2) / (2 * h3 ** 3))
    return out


def beta_derivatives(
    model: DispersionModel,
    omega: float,
    max_order: int = 2,
    rel_step: float = FD_RELATIVE_STEP,
    richardson: bool = False,
) -> list:
    """[β1, ..., β_max_order] at ``omega`` (units s^k/m).

    Taylor models and nondispersive media are differentiated exactly.
    Other models use central
    differences evaluated in extended precision with step ``rel_step·ω``
    (``FD_RELATIVE_STEP_ORDER3`` for the third derivative). With
    ``richardson=True`` the step is halved and the two estimates are
    Richardson-extrapolated; a warning is raised if they disagree by more
    than 1e-6 relative.
    """
    if not 1 <= max_order <= 3:
        raise ValueError("max_order must be 1, 2 or 3")
    if isinstance(model, TaylorDispersion):
        return [float(model.derivative(k, omega)) for k in range(1, max_order + 1)]
    if isinstance(model, SellmeierModel) and model.nondispersive:
        _check_positive(omega)
        model._check_um(2 * np.pi * C / omega * 1e6)
        return [math.sqrt(model.coefficients[0]) / C] + [0.0] * (max_order - 1)
    w = _LD(omega)
    h = _LD(rel_step) * w
    h3 = _LD(FD_RELATIVE_STEP_ORDER3 * rel_step / FD_RELATIVE_STEP) * w
    coarse = _central_differences(model._beta_ext, w, h, h3, max_order)
    if not richardson:
        return [float(x) for x in coarse]
    fine = _central_differences(model._beta_ext, w, h / 2, h3 / 2, max_order)
    extrapolated = [(4 * f - c) / 3 for f, c in zip(fine, coarse)]
    for k, (c, e) in enumerate(zip(coarse, extrapolated), start=1):
        if e != 0 and abs((c - e) / e) > 1e-6:
            warnings.warn(
                f"β{k} finite difference not converged: {float(c):.8e} vs {float(e):.8e}",
                RuntimeWarning,
            )
    return [float(x) for x in extrapolated]


@dataclass(frozen=True)
class QpmCollinearSource:
    """Collinear quasi-phase-matched crystal pumped at ``pump_center_wavelength``.

    ``pump_bandwidth`` is the full width at half maximum of the pump intensity
    spectrum in rad/s. ``poling_period`` may be ``math.inf`` (unpoled).
    Signal and idler are centred at the degenerate frequency ω_p/2.
    """

    pump_dispersion: DispersionModel
    signal_dispersion: DispersionModel
    idler_dispersion: DispersionModel
    poling_period: float
    length: float
    pump_center_wavelength: float
    pump_bandwidth: float

    def __post_init__(self):
        if not self.poling_period > 0:
            raise ValueError("poling_period must be positive")
        if not self.length > 0:
            raise ValueError("length must be positive")
        if not self.pump_center_wavelength > 0:
            raise ValueError("pump_center_wavelength must be positive")
        if not self.pump_bandwidth > 0:
            raise ValueError("pump_bandwidth must be positive")

    @property
    def omega_p(self) -> float:
        return 2 * math.pi * C / self.pump_center_wavelength

    @property
    def pump_duration(self) -> float:
        """Gaussian τ with |E(ν)|² = exp(−(ντ)²) matching ``pump_bandwidth``."""
        return 2 * math.sqrt(math.log(2)) / self.pump_bandwidth

    def replace(self, **changes) -> "QpmCollinearSource":
        return dataclasses.replace(self, **changes)


def unpoled_mismatch(src: QpmCollinearSource, nu_s, nu_i):
    """β_p(ω_p + ν_s + ν_i) − β_s(ω_p/2 + ν_s) − β_i(ω_p/2 + ν_i)."""
    wp = src.omega_p
    nu_s = np.asarray(nu_s, dtype=float)
    nu_i = np.asarray(nu_i, dtype=float)
    return (
        src.pump_dispersion.beta(wp + nu_s + nu_i)
        - src.signal_dispersion.beta(wp / 2 + nu_s)
        - src.idler_dispersion.beta(wp / 2 + nu_i)
    )


def qpm_mismatch(src: QpmCollinearSource, nu_s, nu_i):
    """Δk = Δk_unpoled − K, K = 2π/Λ.

    The grating vector is oriented against the degenerate unpoled mismatch,
    so a solved period nulls Δk(0, 0) whatever its sign.
    """
    dk = unpoled_mismatch(src, nu_s, nu_i)
    if math.isinf(src.poling_period):
        return dk
    sign = 1.0 if float(unpoled_mismatch(src, 0.0, 0.0)) >= 0 else -1.0
    return dk - sign * 2 * math.pi / src.poling_period


def solve_poling_period(src: QpmCollinearSource) -> float:
    """Λ = 2π/|Δk_unpoled(0, 0)|."""
    dk0 = float(unpoled_mismatch(src, 0.0, 0.0))
    if dk0 == 0.0:
        raise DegenerateMismatch("unpoled mismatch is zero at degeneracy")
    return 2 * math.pi / abs(dk0)
