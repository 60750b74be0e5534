"""Model atoms and laser fields.

An :class:`AtomModel` is the sole physics input of the package: a list of
levels with complex energies (Im E = -Gamma/2, the half-width supplied by an
absorbing boundary or set phenomenologically) and a complex-symmetric dipole
matrix.  Symmetry rather than Hermiticity is the invariant because all inner
products involving absorber-perturbed eigenvectors use the c-product, i.e. no
complex conjugation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.linalg

from . import units
from .errors import EigensolverError, ModelFormatError

DIPOLE_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Level:
    """One field-free level: complex energy in a.u. and a parity/channel tag."""

    label: str
    energy: complex
    sym: int = 0


@dataclass(frozen=True)
class AtomModel:
    levels: tuple
    dipole: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        dip = np.array(self.dipole, dtype=complex)
        dip.setflags(write=False)
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "dipole", dip)
        _validate_model(self.levels, dip)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels], dtype=complex)

    @property
    def labels(self) -> tuple:
        return tuple(lv.label for lv in self.levels)

    def index(self, label: str) -> int:
        for i, lv in enumerate(self.levels):
            if lv.label == label:
                return i
        raise KeyError(f"no level labelled {label!r}")

    @property
    def is_widthless(self) -> bool:
        return bool(np.all(np.abs(self.energies.imag) == 0.0))

    def widthless(self) -> "AtomModel":
        """Copy with all level widths removed (Hermitian limit)."""
        levels = [Level(lv.label, complex(lv.energy.real, 0.0), lv.sym) for lv in self.levels]
        return AtomModel(levels, self.dipole, dict(self.meta))


def _validate_model(levels, dipole):
    if len(levels) == 0:
        raise ModelFormatError("model has no levels")
    labels = [lv.label for lv in levels]
    if len(set(labels)) != len(labels):
        dup = sorted({x for x in labels if labels.count(x) > 1})
        raise ModelFormatError(f"duplicate level labels: {dup}")
    for lv in levels:
        if lv.energy.imag > 0.0:
            raise ModelFormatError(
                f"level {lv.label!r}: Im(energy) = {lv.energy.imag} > 0 (widths must be non-positive)"
            )
    n = len(levels)
    if dipole.shape != (n, n):
        raise ModelFormatError(
            f"dipole matrix shape {dipole.shape} does not match level count {n}"
        )
    asym = np.max(np.abs(dipole - dipole.T)) if n else 0.0
    if asym > DIPOLE_SYMMETRY_TOL:
        raise ModelFormatError(
            f"dipole matrix is not complex-symmetric: max |d - d^T| = {asym:.3e}"
        )
    diag = np.max(np.abs(np.diag(dipole)))
    if diag > DIPOLE_SYMMETRY_TOL:
        raise ModelFormatError(
            f"diagonal dipole entries must vanish for parity-eigenstate models (max {diag:.3e})"
        )


@dataclass(frozen=True)
class LaserField:
    """Monochromatic carrier with a rectangular or Gaussian intensity envelope.

    ``omega`` and ``e0`` are the photon energy and peak field amplitude in
    atomic units.  For the Gaussian case the intensity profile is
    I(t) = I0 * exp(-ln2 * (2 t / fwhm)^2), peaked at t = 0, so the field
    envelope carries half that exponent.
    """

    omega: float
    e0: float
    envelope: str = "rect"
    fwhm: float | None = None
    phase: float = 0.0

    def __post_init__(self):
        if self.omega <= 0.0:
            raise ModelFormatError(f"omega must be positive, got {self.omega}")
        if self.e0 < 0.0:
            raise ModelFormatError(f"e0 must be non-negative, got {self.e0}")
        if self.envelope not in ("rect", "gaussian"):
            raise ModelFormatError(f"unknown envelope {self.envelope!r}")
        if self.envelope == "gaussian" and (self.fwhm is None or self.fwhm <= 0.0):
            raise ModelFormatError("gaussian envelope requires fwhm > 0")

    @property
    def intensity_wcm2(self) -> float:
        return field_to_intensity(self.e0)

    @property
    def cycle(self) -> float:
        return 2.0 * math.pi / self.omega

    def envelope_at(self, t):
        """Field-amplitude envelope (dimensionless, peak 1)."""
        if self.envelope == "rect":
            return np.ones_like(np.asarray(t, dtype=float))
        return np.exp(-0.5 * math.log(2.0) * (2.0 * np.asarray(t, dtype=float) / self.fwhm) ** 2)

    def field_at(self, t):
        """Instantaneous electric field E(t) in a.u."""
        t = np.asarray(t, dtype=float)
        return self.e0 * self.envelope_at(t) * np.cos(self.omega * t + self.phase)


@dataclass(frozen=True)
class GridSpec:
    """Uniform 1D grid with a soft-core potential and a quadratic absorbing ramp."""

    extent: float
    points: int
    softening: float
    cap_start: float
    cap_strength: float

    def __post_init__(self):
        if self.points < 64:
            raise ModelFormatError(f"points must be >= 64, got {self.points}")
        if self.softening <= 0.0:
            raise ModelFormatError("softening a^2 must be positive")
        if not (0.0 < self.cap_start < self.extent):
            raise ModelFormatError(
                f"cap_start must satisfy 0 < cap_start < extent, got {self.cap_start}"
            )
        if self.cap_strength < 0.0:
            raise ModelFormatError("cap_strength must be non-negative")


def intensity_to_field(intensity_wcm2: float) -> float:
    """Peak field amplitude in a.u. from intensity in W/cm^2."""
    if intensity_wcm2 < 0.0:
        raise ModelFormatError(f"intensity must be non-negative, got {intensity_wcm2}")
    return math.sqrt(intensity_wcm2 / units.INTENSITY_AU)


def field_to_intensity(e0_au: float) -> float:
    return e0_au**2 * units.INTENSITY_AU


# ---------------------------------------------------------------------------
# JSON I/O
#
# Atom model schema:
#   {"levels": [{"label": str, "re": float, "im": float, "sym": int}, ...],
#    "dipole": [{"i": int, "j": int, "re": float, "im": float}, ...],
#    "meta": {...}}
# Omitted dipole entries are zero; (i,j) and (j,i) may both appear but must
# agree.
# ---------------------------------------------------------------------------


def atom_model_from_dict(data: dict) -> AtomModel:
    if not isinstance(data, dict):
        raise ModelFormatError("model file must contain a JSON object")
    for key in data:
        if key not in ("levels", "dipole", "meta"):
            raise ModelFormatError(f"unknown top-level field {key!r}")
    if "levels" not in data:
        raise ModelFormatError("missing required field 'levels'")
    raw_levels = data["levels"]
    if not isinstance(raw_levels, list) or not raw_levels:
        raise ModelFormatError("'levels' must be a non-empty list")

    levels = []
    for k, entry in enumerate(raw_levels):
        if not isinstance(entry, dict):
            raise ModelFormatError(f"levels[{k}] is not an object")
        for key in entry:
            if key not in ("label", "re", "im", "sym"):
                raise ModelFormatError(f"levels[{k}]: unknown field {key!r}")
        for key in ("label", "re"):
            if key not in entry:
                raise ModelFormatError(f"levels[{k}]: missing field {key!r}")
        levels.append(
            Level(
                label=str(entry["label"]),
                energy=complex(float(entry["re"]), float(entry.get("im", 0.0))),
                sym=int(entry.get("sym", 0)),
            )
        )

    n = len(levels)
    dipole = np.zeros((n, n), dtype=complex)
    seen = {}
    for k, entry in enumerate(data.get("dipole", [])):
        if not isinstance(entry, dict):
            raise ModelFormatError(f"dipole[{k}] is not an object")
        for key in entry:
            if key not in ("i", "j", "re", "im"):
                raise ModelFormatError(f"dipole[{k}]: unknown field {key!r}")
        try:
            i, j = int(entry["i"]), int(entry["j"])
        except KeyError as exc:
            raise ModelFormatError(f"dipole[{k}]: missing field {exc.args[0]!r}") from None
        if not (0 <= i < n and 0 <= j < n):
            raise ModelFormatError(f"dipole[{k}]: index ({i},{j}) outside 0..{n - 1}")
        val = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
        if (j, i) in seen and abs(seen[(j, i)] - val) > DIPOLE_SYMMETRY_TOL:
            raise ModelFormatError(
                f"dipole entries ({i},{j}) and ({j},{i}) disagree: {val} vs {seen[(j, i)]}"
            )
        if (i, j) in seen and abs(seen[(i, j)] - val) > DIPOLE_SYMMETRY_TOL:
            raise ModelFormatError(f"dipole entry ({i},{j}) given twice with different values")
        seen[(i, j)] = val
        dipole[i, j] = val
        dipole[j, i] = val

    meta = data.get("meta", {})
    if not isinstance(meta, dict):
        raise ModelFormatError("'meta' must be an object")
    return AtomModel(levels, dipole, dict(meta))


def atom_model_to_dict(model: AtomModel) -> dict:
    entries = []
    n = model.n_levels
    for i in range(n):
        for j in range(i + 1, n):
            d = model.dipole[i, j]
            if d != 0.0:
                entries.append({"i": i, "j": j, "re": d.real, "im": d.imag})
    return {
        "levels": [
            {"label": lv.label, "re": lv.energy.real, "im": lv.energy.imag, "sym": lv.sym}
            for lv in model.levels
        ],
        "dipole": entries,
        "meta": dict(model.meta),
    }


def load_atom_model(path) -> AtomModel:
    """Read and validate an atom-model JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: invalid JSON ({exc})") from None
    return atom_model_from_dict(data)


def save_atom_model(model: AtomModel, path) -> None:
    Path(path).write_text(json.dumps(atom_model_to_dict(model), indent=1) + "\n", encoding="utf-8")


def bundled_model(name: str) -> AtomModel:
    """Load one of the fixtures shipped with the package (e.g. 'ladder5')."""
    ref = resources.files("crfloquet") / "fixtures" / f"{name}.json"
    with resources.as_file(ref) as path:
        if not path.exists():
            raise ModelFormatError(f"no bundled model named {name!r}")
        return load_atom_model(path)


def laser_field_from_dict(data: dict) -> LaserField:
    """Build a LaserField from the pulse JSON schema.

    Accepts either "omega_ev" or "omega_au", either "intensity_wcm2" or
    "e0_au", an "envelope" of "rect" or {"gaussian": {"fwhm_fs": ...}}, and an
    optional carrier "phase" in radians.
    """
    if not isinstance(data, dict):
        raise ModelFormatError("field spec must be a JSON object")
    if ("omega_ev" in data) == ("omega_au" in data):
        raise ModelFormatError("exactly one of 'omega_ev' / 'omega_au' required")
    omega = float(data["omega_au"]) if "omega_au" in data else units.ev_to_au(float(data["omega_ev"]))
    if ("intensity_wcm2" in data) == ("e0_au" in data):
        raise ModelFormatError("exactly one of 'intensity_wcm2' / 'e0_au' required")
    e0 = float(data["e0_au"]) if "e0_au" in data else intensity_to_field(float(data["intensity_wcm2"]))
    env = data.get("envelope", "rect")
    if env == "rect":
        return LaserField(omega, e0, "rect", phase=float(data.get("phase", 0.0)))
    if isinstance(env, dict) and set(env) == {"gaussian"}:
        g = env["gaussian"]
        if not isinstance(g, dict) or "fwhm_fs" not in g:
            raise ModelFormatError("gaussian envelope requires 'fwhm_fs'")
        return LaserField(
            omega, e0, "gaussian", fwhm=units.fs_to_au(float(g["fwhm_fs"])),
            phase=float(data.get("phase", 0.0)),
        )
    raise ModelFormatError(f"unknown envelope spec {env!r}")


# ---------------------------------------------------------------------------
# Soft-core model builder
# ---------------------------------------------------------------------------


def _sinc_dvr_kinetic(n: int, dx: float) -> np.ndarray:
    """Sinc-DVR second-derivative kinetic matrix on a uniform grid (mass 1)."""
    i = np.arange(n)
    dij = i[:, None] - i[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = 2.0 / dij.astype(float) ** 2
    t[np.eye(n, dtype=bool)] = math.pi**2 / 3.0
    signs = np.where((dij % 2) == 0, 1.0, -1.0)
    return t * signs / (2.0 * dx**2)


def absorber_profile(x, grid: GridSpec):
    """Quadratic absorbing ramp W(x): zero inside cap_start, rising to cap_strength."""
    x = np.asarray(x, dtype=float)
    ramp = (np.abs(x) - grid.cap_start) / (grid.extent - grid.cap_start)
    return grid.cap_strength * np.clip(ramp, 0.0, None) ** 2


def build_softcore_model(grid: GridSpec, n_keep: int) -> AtomModel:
    """Diagonalize p^2/2 - 1/sqrt(x^2 + a^2) - i W(x) and package the lowest states.

    The real part of the Hamiltonian is diagonalized on the full grid;
    the absorber -iW is then folded in within the subspace of the lowest
    real eigenstates (generous compared to n_keep), which keeps the dense
    complex solve small while leaving bound-state energies and dipoles
    untouched at the accuracy the grid supports.

    Returns an AtomModel whose eigenvectors are c-product-normalized, with
    dipole d_nm = sum_x psi_n(x) x psi_m(x) (no conjugation).
    """
    if n_keep < 1:
        raise ModelFormatError("n_keep must be at least 1")
    if n_keep > grid.points:
        raise ModelFormatError(f"n_keep = {n_keep} exceeds grid size {grid.points}")

    n = grid.points
    x = np.linspace(-grid.extent, grid.extent, n)
    dx = x[1] - x[0]
    v = -1.0 / np.sqrt(x**2 + grid.softening)
    h_real = _sinc_dvr_kinetic(n, dx) + np.diag(v)

    try:
        evals, evecs = scipy.linalg.eigh(h_real)
    except scipy.linalg.LinAlgError as exc:
        raise EigensolverError(f"grid eigensolve failed: {exc}") from None

    m_sub = min(n, max(4 * n_keep, n_keep + 60))
    if n_keep > m_sub:
        raise ModelFormatError(f"n_keep = {n_keep} exceeds available subspace {m_sub}")
    phi = evecs[:, :m_sub]

    w = absorber_profile(x, grid)
    if grid.cap_strength > 0.0:
        h_sub = np.diag(evals[:m_sub].astype(complex)) - 1j * (phi.T * w) @ phi
        try:
            eps, u = scipy.linalg.eig(h_sub)
        except scipy.linalg.LinAlgError as exc:
            raise EigensolverError(f"absorber eigensolve failed: {exc}") from None
        order = np.argsort(eps.real)
        eps, u = eps[order], u[:, order]
    else:
        eps = evals[:m_sub].astype(complex)
        u = np.eye(m_sub, dtype=complex)

    psi = phi @ u[:, :n_keep]
    eps = eps[:n_keep]
    # eigensolver round-off can leave widths at +1e-18; genuinely positive ones are a bug
    if np.any(eps.imag > 1e-12):
        raise EigensolverError(
            f"positive width from the absorber solve: max Im(E) = {eps.imag.max():.3e}"
        )
    eps = eps.real + 1j * np.minimum(eps.imag, 0.0)

    # The potential and absorber are even, so parity is exact; project each
    # state onto its dominant parity (high box states come in near-degenerate
    # +- pairs that the eigensolver may mix), c-normalize, and pin the sign at
    # the largest-magnitude grid point.
    parity = np.empty(n_keep, dtype=int)
    for k in range(n_keep):
        col = psi[:, k]
        overlap = np.real(col @ col[::-1])
        parity[k] = 0 if overlap > 0 else 1
        sign = 1.0 if parity[k] == 0 else -1.0
        col = 0.5 * (col + sign * col[::-1])
        cnorm = col @ col
        if abs(cnorm) < 1e-14:
            raise EigensolverError(f"self-orthogonal eigenvector at E = {eps[k]}")
        col = col / np.sqrt(cnorm)
        anchor = col[np.argmax(np.abs(col))]
        if anchor.real < 0.0 or (anchor.real == 0.0 and anchor.imag < 0.0):
            col = -col
        psi[:, k] = col

    dipole = psi.T @ (x[:, None] * psi)
    dipole = 0.5 * (dipole + dipole.T)  # symmetrize round-off
    np.fill_diagonal(dipole, 0.0)

    levels = [
        Level(label=f"n{k:02d}", energy=complex(eps[k]), sym=int(parity[k]))
        for k in range(n_keep)
    ]
    meta = {
        "source": "softcore",
        "extent": grid.extent,
        "points": grid.points,
        "softening": grid.softening,
        "cap_start": grid.cap_start,
        "cap_strength": grid.cap_strength,
        "ground": "n00",
        "excited": "n02",
    }
    return AtomModel(levels, dipole, meta)
