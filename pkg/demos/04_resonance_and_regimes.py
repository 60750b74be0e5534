# Parameter maps: dressed resonance, line broadening, and damping regimes.
#
# A grid of order-1 effective Hamiltonians is scanned over (omega, I0), the
# four matrix entries are interpolated bicubically, and the intensity-
# dependent resonance is located by maximizing the peak excited population.
# The same grid classifies each node as overdamped or underdamped through
# the damping ratio and yields the growth of the CR span with intensity.

import pathlib

import numpy as np
from scipy.optimize import brentq

from crfloquet import bundled_model
from crfloquet.scan import (
    ParamGrid,
    dressed_resonance,
    effective_point,
    regime_map,
    resonance_width,
    scan_heff,
    write_resonance_csv,
    write_surface_csv,
)
from crfloquet.svgplot import heatmap, line_plot

out = pathlib.Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

atom = bundled_model("ladder5")


def balance(intensity):
    def imbalance(omega):
        m = effective_point(atom, omega, intensity_wcm2=intensity).heff1.matrix
        return (m[0, 0] - m[1, 1]).real

    return brentq(imbalance, 0.40, 0.45, xtol=1e-12)


center = balance(1e14)
grid = ParamGrid(
    np.linspace(center - 0.006, center + 0.006, 10),
    np.geomspace(2e12, 1.5e14, 10),
)
hgrid = scan_heff(atom, grid, workers=4)
print(f"scanned {grid.shape[0]}x{grid.shape[1]} grid, all nodes ok: {hgrid.all_ok}")

# --- resonance curve omega_max(I0) and its width ---------------------------
rows = []
for intensity in grid.intensities[3:]:
    om = dressed_resonance(hgrid, intensity)
    rows.append((float(intensity), om, resonance_width(hgrid, intensity, om)))
write_resonance_csv(out / "resonance.csv", rows)
print("\nintensity (W/cm^2)   omega_max (a.u.)   FWHM (a.u.)")
for it, om, w in rows:
    print(f"{it:>18.3e} {om:>18.8f} {w:>13.5f}")
line_plot(
    out / "resonance.svg",
    [r[0] for r in rows], {"omega_max": [r[1] for r in rows]},
    title="intensity-dependent dressed resonance",
    xlabel="intensity (W/cm^2)", ylabel="omega_max (a.u.)",
)

# --- damping-regime and population maps -------------------------------------
surfaces = regime_map(hgrid)
write_surface_csv(out / "surfaces.csv", surfaces)
under = surfaces.zeta < 1.0
print(f"\nunderdamped nodes: {under.sum()}/{under.size} "
      f"(high-intensity side oscillates, low-intensity side is overdamped)")
heatmap(
    out / "zeta.svg", grid.omegas, grid.intensities, np.log10(surfaces.zeta),
    title="log10 damping ratio", xlabel="omega (a.u.)", ylabel="intensity (W/cm^2)",
)
heatmap(
    out / "max_pop.svg", grid.omegas, grid.intensities, surfaces.max_pop_excited,
    title="peak excited population", xlabel="omega (a.u.)", ylabel="intensity (W/cm^2)",
)

# CR span against intensity along the resonance ridge
i_mid = grid.shape[0] // 2
line_plot(
    out / "m_max.svg", grid.intensities, {"M_max": surfaces.m_max[i_mid, :]},
    title="maximum CR span vs intensity",
    xlabel="intensity (W/cm^2)", ylabel="M_max",
)
print(f"wrote {out / 'surfaces.csv'}, resonance.csv and three SVG maps")
