"""
Dispersion models and quasi-phase matching
==========================================

Material indices, the GaAs slab waveguide used by the counter-propagating
source, and the PPKTP poling period for the collinear baseline.
"""

import numpy as np

from autophase.dispersion import (
    beta_derivatives,
    load_material,
    refractive_index,
    slab_te_effective_index,
    wavelength_to_omega,
)
from autophase.figures import PAPER_POLING_PERIOD, gaas_slab, ppktp_source

# %% Bulk GaAs index across the telecom band
gaas = load_material("GaAs")
lams = np.linspace(1.4e-6, 1.7e-6, 7)
for lam, n in zip(lams, refractive_index(gaas, lams)):
    print(f"lambda = {lam * 1e9:6.1f} nm   n_GaAs = {n:.5f}")

# %% A 3 um GaAs slab in air guides with a lower effective index
slab = gaas_slab()
lam = 1.58e-6
print(f"\nslab n_eff at 1580 nm: {slab_te_effective_index(slab, lam):.5f}"
      f" (bulk {refractive_index(gaas, lam):.5f})")

# %% Group delay and group-velocity dispersion at the degenerate frequency
w = float(wavelength_to_omega(lam))
b1, b2 = beta_derivatives(slab, w, 2)
print(f"beta1 = {b1:.4e} s/m   beta2 = {b2:.4e} s^2/m")

# %% PPKTP poling period for degenerate type-II down-conversion of 790 nm
src = ppktp_source()
dev = src.poling_period / PAPER_POLING_PERIOD - 1
print(f"\nsolved poling period {src.poling_period * 1e6:.3f} um ({dev:+.2%} vs 47.7 um)")
