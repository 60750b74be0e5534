# Build a one-dimensional soft-core model atom with an absorbing boundary.
#
# The grid Hamiltonian is p^2/2 - 1/sqrt(x^2 + a^2) - i W(x), with W a
# quadratic ramp switched on beyond cap_start.  Bound states come out with
# essentially real energies; the near-threshold states acquire finite widths
# from the absorber.  Dipoles use the c-product (no conjugation), so the
# matrix is complex-symmetric rather than Hermitian.

import pathlib

from crfloquet import build_softcore_model, save_atom_model
from crfloquet.atom_model import GridSpec

out = pathlib.Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

grid = GridSpec(extent=400.0, points=2048, softening=2.0, cap_start=300.0, cap_strength=0.005)
model = build_softcore_model(grid, n_keep=24)

print("softcore model levels (first 12):")
print(f"{'label':>6} {'Re E (a.u.)':>14} {'Gamma (a.u.)':>14} {'parity':>7}")
for lv in model.levels[:12]:
    print(f"{lv.label:>6} {lv.energy.real:>14.8f} {-2 * lv.energy.imag:>14.3e} {lv.sym:>7}")

# neighbouring-state dipoles grow up the Rydberg-like ladder
d = model.dipole
print("\n|<n|x|n+1>| ladder:", ", ".join(f"{abs(d[k, k + 1]):.2f}" for k in range(8)))

# parity selection rule: equal-parity matrix elements vanish
syms = [lv.sym for lv in model.levels]
worst = max(
    abs(d[i, j]) for i in range(len(syms)) for j in range(len(syms)) if syms[i] == syms[j]
)
print(f"worst equal-parity dipole: {worst:.1e}  (selection rule)")

path = out / "softcore24.json"
save_atom_model(model, path)
print(f"\nwrote {path}")
