"""Parameter-space driver: effective Hamiltonians over (omega, intensity) grids.

Nodes are computed independently (and therefore deterministically regardless
of the worker count), the four matrix entries are interpolated bicubically in
their real and imaginary parts, and the dressed resonance is located by a
golden-section search with a parabolic polish on the interpolated surface.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .atom_model import AtomModel, LaserField, field_to_intensity, intensity_to_field
from .dynamics import (
    CRAmplitudes,
    cr_amplitudes,
    damping_ratio,
    dressed_diagonalize,
    m_max,
    max_excited_population,
)
from .effham import (
    EffectiveBundle,
    EffectiveHamiltonian,
    Partition,
    effective_operators,
    make_partition,
)
from .errors import (
    CRFloquetError,
    ModelFormatError,
    ResonanceBoundaryError,
    ScanPartialFailure,
)
from .floquet import FloquetIndex, FloquetMatrix, assemble_floquet, photon_window

_VALID_PIVOT = 1e-10
_VALID_COND = 1e8


def resolve_level(atom: AtomModel, which, default_meta_key: str, fallback: int | None = None) -> int:
    """Turn a level selector (index, label, or None) into an index."""
    if which is None:
        if default_meta_key in atom.meta:
            return atom.index(str(atom.meta[default_meta_key]))
        if fallback is not None:
            return fallback
        raise ModelFormatError(
            f"no {default_meta_key!r} level given and none recorded in the model metadata"
        )
    if isinstance(which, str):
        return atom.index(which)
    return int(which)


@dataclass(frozen=True)
class PointResult:
    """Single (omega, intensity) analysis: matrix, partition and all operators."""

    omega: float
    intensity_wcm2: float
    e0: float
    fm: FloquetMatrix
    partition: Partition
    bundle: EffectiveBundle
    cr: CRAmplitudes

    @property
    def heff1(self) -> EffectiveHamiltonian:
        return self.bundle.h1

    @property
    def heff0(self) -> EffectiveHamiltonian:
        return self.bundle.h0


def effective_point(
    atom: AtomModel,
    omega: float,
    intensity_wcm2: float | None = None,
    e0: float | None = None,
    ground=None,
    excited=None,
    photon_order: int = 2,
    guard: int = 4,
) -> PointResult:
    """Assemble, partition and reduce at one field point."""
    if (intensity_wcm2 is None) == (e0 is None):
        raise ModelFormatError("give exactly one of intensity_wcm2 / e0")
    if e0 is None:
        e0 = intensity_to_field(intensity_wcm2)
    else:
        intensity_wcm2 = field_to_intensity(e0)
    g = resolve_level(atom, ground, "ground", fallback=0)
    x = resolve_level(atom, excited, "excited")
    k_min, k_max = photon_window(photon_order, guard)
    fm = assemble_floquet(atom, LaserField(omega, e0), k_min, k_max)
    part = make_partition(fm, FloquetIndex(g, 0), FloquetIndex(x, -photon_order))
    bundle = effective_operators(fm, part)
    cr = cr_amplitudes(bundle.chi, part)
    return PointResult(omega, intensity_wcm2, e0, fm, part, bundle, cr)


@dataclass(frozen=True)
class ParamGrid:
    """Sorted axes of the (omega, intensity) parameter space."""

    omegas: np.ndarray
    intensities: np.ndarray

    def __post_init__(self):
        om = np.unique(np.asarray(self.omegas, dtype=float))
        it = np.unique(np.asarray(self.intensities, dtype=float))
        if om.size < 1 or it.size < 1:
            raise ModelFormatError("grid axes must be non-empty")
        om.setflags(write=False)
        it.setflags(write=False)
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "intensities", it)

    @property
    def shape(self) -> tuple:
        return (self.omegas.size, self.intensities.size)


@dataclass
class HeffGrid:
    """Per-node order-1 effective Hamiltonians plus CR amplitudes over a grid."""

    grid: ParamGrid
    entries: np.ndarray        # (n_omega, n_intensity, 2, 2) complex
    lambda_0: np.ndarray       # (n_omega, n_intensity) complex
    lambda_m4: np.ndarray
    e_ref: np.ndarray
    pivot_ratio: np.ndarray
    cond_pc: np.ndarray
    chi_ground_norm: np.ndarray
    ok: np.ndarray
    failures: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    _splines: list | None = None

    @property
    def all_ok(self) -> bool:
        return bool(np.all(self.ok))

    def _values_stack(self) -> np.ndarray:
        flat = self.entries.reshape(*self.grid.shape, 4)
        parts = [flat.real, flat.imag]
        for arr in (self.lambda_0, self.lambda_m4, self.e_ref):
            parts.append(arr.real[..., None])
            parts.append(arr.imag[..., None])
        return np.concatenate(parts, axis=-1)  # (..., 14)

    def _ensure_splines(self):
        if self._splines is not None:
            return
        if not self.all_ok:
            raise ScanPartialFailure(
                "grid has failed nodes; interpolation unavailable", self.failures
            )
        if self.grid.omegas.size < 4 or self.grid.intensities.size < 4:
            raise ModelFormatError("cubic interpolation needs at least 4 nodes per axis")
        vals = self._values_stack()
        self._splines = [
            RectBivariateSpline(self.grid.omegas, self.grid.intensities, vals[..., m], kx=3, ky=3, s=0)
            for m in range(vals.shape[-1])
        ]

    def interpolate_raw(self, omega: float, intensity: float) -> np.ndarray:
        om0, om1 = self.grid.omegas[0], self.grid.omegas[-1]
        it0, it1 = self.grid.intensities[0], self.grid.intensities[-1]
        if not (om0 <= omega <= om1 and it0 <= intensity <= it1):
            raise ModelFormatError(
                f"query ({omega}, {intensity}) outside the grid hull "
                f"[{om0}, {om1}] x [{it0}, {it1}]; no extrapolation"
            )
        self._ensure_splines()
        return np.array([s(omega, intensity)[0, 0] for s in self._splines])


def scan_heff(
    atom: AtomModel,
    grid: ParamGrid,
    ground=None,
    excited=None,
    photon_order: int = 2,
    guard: int = 4,
    workers: int = 1,
) -> HeffGrid:
    """One order-1 effective Hamiltonian per grid node.

    Nodes are independent; failures are collected per node instead of
    aborting the scan.
    """
    g = resolve_level(atom, ground, "ground", fallback=0)
    x = resolve_level(atom, excited, "excited")
    nw, ni = grid.shape
    jobs = [(i, j) for i in range(nw) for j in range(ni)]

    def run(job):
        i, j = job
        try:
            pt = effective_point(
                atom,
                grid.omegas[i],
                intensity_wcm2=grid.intensities[j],
                ground=g,
                excited=x,
                photon_order=photon_order,
                guard=guard,
            )
            return (i, j, pt, None)
        except CRFloquetError as exc:
            return (i, j, None, f"{type(exc).__name__}: {exc}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    entries = np.full((nw, ni, 2, 2), np.nan, dtype=complex)
    lam0 = np.full((nw, ni), np.nan, dtype=complex)
    lam4 = np.full((nw, ni), np.nan, dtype=complex)
    e_ref = np.full((nw, ni), np.nan, dtype=complex)
    pivot = np.zeros((nw, ni))
    cond = np.full((nw, ni), np.inf)
    chig = np.zeros((nw, ni))
    ok = np.zeros((nw, ni), dtype=bool)
    failures = []
    for i, j, pt, err in results:
        if pt is None:
            failures.append((i, j, err))
            continue
        entries[i, j] = pt.bundle.h1.matrix
        lam0[i, j] = pt.cr.lambda_0
        lam4[i, j] = pt.cr.lambda_m4
        e_ref[i, j] = pt.bundle.e_ref
        pivot[i, j] = pt.bundle.diagnostics["pivot_ratio"]
        cond[i, j] = pt.bundle.diagnostics["cond_pc"]
        chig[i, j] = pt.bundle.diagnostics["chi_ground_norm"]
        ok[i, j] = True

    return HeffGrid(
        grid=grid,
        entries=entries,
        lambda_0=lam0,
        lambda_m4=lam4,
        e_ref=e_ref,
        pivot_ratio=pivot,
        cond_pc=cond,
        chi_ground_norm=chig,
        ok=ok,
        failures=failures,
        config={
            "ground": g,
            "excited": x,
            "photon_order": photon_order,
            "guard": guard,
        },
    )


def interpolate_heff(hgrid: HeffGrid, omega: float, intensity: float) -> EffectiveHamiltonian:
    """Bicubic interpolation of the order-1 matrix entries (real and imaginary
    parts element-wise); exact at grid nodes."""
    v = hgrid.interpolate_raw(omega, intensity)
    m = (v[0:4] + 1j * v[4:8]).reshape(2, 2)
    e_ref = complex(v[12], v[13])
    return EffectiveHamiltonian(m, 1, e_ref, None)


def interpolate_cr(hgrid: HeffGrid, omega: float, intensity: float) -> CRAmplitudes:
    v = hgrid.interpolate_raw(omega, intensity)
    return CRAmplitudes(complex(v[8], v[9]), complex(v[10], v[11]))


def _auto_t_max(dressed) -> float:
    scale = abs(dressed.lambda_plus - dressed.lambda_minus)
    return 8.0 * math.pi / max(scale, 1e-12)


def peak_excited_population(heff_matrix: np.ndarray, t_max: float | None = None) -> float:
    dressed = dressed_diagonalize(heff_matrix)
    if t_max is None:
        t_max = _auto_t_max(dressed)
    return max_excited_population(dressed, t_max)[1]


def dressed_resonance(hgrid: HeffGrid, intensity: float, t_max: float | None = None) -> float:
    """Drive frequency maximizing the peak excited population at fixed intensity.

    Golden-section over the interpolated effective Hamiltonian, seeded by the
    best grid node, followed by two parabolic refinements so that the returned
    point is stationary to well below the finite-difference tolerance.
    Raises ResonanceBoundaryError when the optimum sits on the grid edge.
    """
    omegas = hgrid.grid.omegas
    if not (hgrid.grid.intensities[0] <= intensity <= hgrid.grid.intensities[-1]):
        raise ModelFormatError(f"intensity {intensity} outside the grid")

    def objective(om: float) -> float:
        return peak_excited_population(interpolate_heff(hgrid, om, intensity).matrix, t_max)

    # coarse pass over nodes and midpoints
    coarse = np.unique(np.concatenate([omegas, 0.5 * (omegas[:-1] + omegas[1:])]))
    vals = np.array([objective(om) for om in coarse])
    best = int(np.argmax(vals))
    if best == 0 or best == coarse.size - 1:
        raise ResonanceBoundaryError(
            f"resonance search maximized at the grid boundary (omega = {coarse[best]}); "
            "widen the omega range"
        )
    lo, hi = coarse[best - 1], coarse[best + 1]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > 1e-11 * max(abs(a), 1.0):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    om = 0.5 * (a + b)

    # parabolic polish; the final rounds use the same step a stationarity
    # check would, so the returned point is flat at that resolution
    for h in (1e-5, 1e-6, 1e-6):
        f0, fp, fm_ = objective(om), objective(om + h), objective(om - h)
        denom = fp - 2.0 * f0 + fm_
        if denom < 0.0:
            shift = 0.5 * h * (fm_ - fp) / denom
            if abs(shift) < 2.0 * h:
                om = om + shift
    if not (omegas[0] < om < omegas[-1]):
        raise ResonanceBoundaryError(f"refined resonance {om} left the grid")
    return float(om)


def resonance_width(hgrid: HeffGrid, intensity: float, omega_max: float) -> float:
    """FWHM (in omega) of the peak-population resonance curve; NaN when the
    half-maximum points are not bracketed inside the grid."""
    omegas = hgrid.grid.omegas

    def objective(om: float) -> float:
        return peak_excited_population(interpolate_heff(hgrid, om, intensity).matrix)

    peak = objective(omega_max)
    half = 0.5 * peak

    def bisect(lo, hi, increasing):
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if (objective(mid) > half) == increasing:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    left = right = float("nan")
    if objective(omegas[0]) < half:
        left = bisect(omegas[0], omega_max, increasing=True)
    if objective(omegas[-1]) < half:
        right = bisect(omega_max, omegas[-1], increasing=False)
    return right - left


@dataclass(frozen=True)
class RegimeSurfaces:
    """Per-node damping ratio, peak population and CR span over the grid."""

    grid: ParamGrid
    zeta: np.ndarray
    max_pop_excited: np.ndarray
    m_max: np.ndarray
    valid: np.ndarray


def regime_map(hgrid: HeffGrid, t_max: float | None = None) -> RegimeSurfaces:
    """Damping-ratio / peak-population / CR-span surfaces from a scanned grid.

    Cells where the reduction is untrustworthy (failed node, unhealthy LU
    pivot, ill-conditioned P + C) are masked out via ``valid``.
    """
    nw, ni = hgrid.grid.shape
    zeta = np.full((nw, ni), np.nan)
    pop = np.full((nw, ni), np.nan)
    span = np.full((nw, ni), np.nan)
    valid = np.zeros((nw, ni), dtype=bool)
    for i in range(nw):
        for j in range(ni):
            if not hgrid.ok[i, j]:
                continue
            healthy = (
                hgrid.pivot_ratio[i, j] > _VALID_PIVOT and hgrid.cond_pc[i, j] < _VALID_COND
            )
            try:
                dressed = dressed_diagonalize(hgrid.entries[i, j])
                tm = t_max if t_max is not None else _auto_t_max(dressed)
                zeta[i, j] = damping_ratio(hgrid.entries[i, j], require_resonance=False)
                pop[i, j] = max_excited_population(dressed, tm)[1]
                cr = CRAmplitudes(hgrid.lambda_0[i, j], hgrid.lambda_m4[i, j])
                span[i, j] = m_max(cr, dressed, tm)
            except CRFloquetError:
                healthy = False
            valid[i, j] = healthy and np.isfinite(zeta[i, j])
    return RegimeSurfaces(hgrid.grid, zeta, pop, span, valid)


def resonance_ridge(hgrid: HeffGrid, n_times: int = 600):
    """Fig-style ridge table: |b(t)|^2 against time at the dressed resonance of
    each grid intensity.  Returns (intensities, list of (omega_max, times, pops))."""
    from .dynamics import cycle_averaged_amplitudes

    rows = []
    for intensity in hgrid.grid.intensities:
        om = dressed_resonance(hgrid, intensity)
        dressed = dressed_diagonalize(interpolate_heff(hgrid, om, intensity).matrix)
        tm = _auto_t_max(dressed) / 2.0
        ts = np.linspace(0.0, tm, n_times)
        _, b = cycle_averaged_amplitudes(dressed, ts)
        rows.append((float(intensity), om, ts, np.abs(b) ** 2))
    return rows


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

_SURFACE_HEADER = ["omega_au", "intensity_wcm2", "zeta", "max_pop_excited", "m_max", "valid"]
_RESONANCE_HEADER = ["intensity_wcm2", "omega_max_au", "width_au"]


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_surface_csv(path, surfaces: RegimeSurfaces) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SURFACE_HEADER)
        for i, om in enumerate(surfaces.grid.omegas):
            for j, it in enumerate(surfaces.grid.intensities):
                writer.writerow(
                    [
                        _fmt(om),
                        _fmt(it),
                        _fmt(surfaces.zeta[i, j]),
                        _fmt(surfaces.max_pop_excited[i, j]),
                        _fmt(surfaces.m_max[i, j]),
                        "1" if surfaces.valid[i, j] else "0",
                    ]
                )


def read_surface_csv(path) -> RegimeSurfaces:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _SURFACE_HEADER:
            raise ModelFormatError(f"unexpected surface header {header}")
        rows = list(reader)
    omegas = np.unique([float(r[0]) for r in rows])
    intens = np.unique([float(r[1]) for r in rows])
    grid = ParamGrid(omegas, intens)
    nw, ni = grid.shape
    zeta = np.full((nw, ni), np.nan)
    pop = np.full((nw, ni), np.nan)
    span = np.full((nw, ni), np.nan)
    valid = np.zeros((nw, ni), dtype=bool)
    for r in rows:
        i = int(np.searchsorted(grid.omegas, float(r[0])))
        j = int(np.searchsorted(grid.intensities, float(r[1])))
        zeta[i, j] = float(r[2])
        pop[i, j] = float(r[3])
        span[i, j] = float(r[4])
        valid[i, j] = r[5] == "1"
    return RegimeSurfaces(grid, zeta, pop, span, valid)


def write_resonance_csv(path, rows) -> None:
    """rows: iterable of (intensity_wcm2, omega_max, width)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_RESONANCE_HEADER)
        for intensity, om, width in rows:
            writer.writerow([_fmt(intensity), _fmt(om), _fmt(width)])


def read_resonance_csv(path) -> list:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _RESONANCE_HEADER:
            raise ModelFormatError(f"unexpected resonance header {header}")
        return [(float(r[0]), float(r[1]), float(r[2])) for r in reader]


_RIDGE_HEADER = ["intensity_wcm2", "omega_max_au", "t_au", "pop_excited"]


def write_ridge_csv(path, ridge_rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_RIDGE_HEADER)
        for intensity, om, ts, pops in ridge_rows:
            for t, p in zip(ts, pops):
                writer.writerow([_fmt(intensity), _fmt(om), _fmt(t), _fmt(p)])


def read_ridge_csv(path) -> list:
    """Read a ridge table back into (intensity, omega_max, times, pops) rows."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _RIDGE_HEADER:
            raise ModelFormatError(f"unexpected ridge header {header}")
        raw = [(float(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in reader]
    rows = []
    for intensity, om, t, p in raw:
        if not rows or rows[-1][0] != intensity:
            rows.append((intensity, om, [], []))
        rows[-1][2].append(t)
        rows[-1][3].append(p)
    return [(i, o, np.array(t), np.array(p)) for i, o, t, p in rows]
