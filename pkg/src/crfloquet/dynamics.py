"""Analytic dressed-state dynamics of the effective two-level system.

All time evolution starts from the ground essential state with amplitude one.
The cycle-averaged amplitudes a(t), b(t) come from the bi-orthonormal
eigendecomposition of the 2x2 effective Hamiltonian; sub-cycle structure is
restored through the reduced wave operator, which supplies the
counter-rotating amplitudes Lambda^(0) and Lambda^(-4) of the excited state.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import units
from .effham import EffectiveHamiltonian, Partition, ReducedWaveOp
from .errors import ExceptionalPointError, ModelFormatError, OffResonanceError
from .floquet import FloquetIndex


@dataclass(frozen=True)
class DressedStates:
    """Bi-orthonormal eigensystem of a 2x2 effective Hamiltonian.

    ``lambda_plus`` carries the larger real part.  ``right`` columns are the
    eigenvectors |+>, |->, ``left`` rows are the partners <~+|, <~-| with
    <~i|j> = delta_ij.
    """

    lambda_plus: complex
    lambda_minus: complex
    right: np.ndarray
    left: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([self.lambda_plus, self.lambda_minus])

    @property
    def rabi_splitting(self) -> float:
        return abs((self.lambda_plus - self.lambda_minus).real)


@dataclass(frozen=True)
class CRAmplitudes:
    """Counter-rotating amplitudes of the excited state at photon offsets 0 and -4."""

    lambda_0: complex
    lambda_m4: complex

    @property
    def lambda_sum(self) -> complex:
        return self.lambda_0 + self.lambda_m4


@dataclass(frozen=True)
class PopulationSeries:
    """Time-stamped ground/excited populations with optional sub-cycle envelopes."""

    times: np.ndarray
    pop_ground: np.ndarray
    pop_excited: np.ndarray
    norm: np.ndarray
    envelope_lo: np.ndarray | None = None
    envelope_hi: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ModelFormatError("times must be a 1D array")
        if np.any(np.diff(t) <= 0.0):
            raise ModelFormatError("times must be strictly increasing")
        for name in ("pop_ground", "pop_excited", "norm", "envelope_lo", "envelope_hi"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=float)
            if arr.shape != t.shape:
                raise ModelFormatError(f"{name} must match times in shape")
            object.__setattr__(self, name, arr)
        if np.any(self.pop_ground < -1e-9) or np.any(self.pop_excited < -1e-9):
            raise ModelFormatError("populations must be non-negative")
        object.__setattr__(self, "times", t)

    def window(self, t0: float, t1: float) -> np.ndarray:
        """Boolean mask selecting samples with t0 <= t <= t1."""
        return (self.times >= t0) & (self.times <= t1)


def dressed_diagonalize(heff: EffectiveHamiltonian | np.ndarray, gap_tol: float = 1e-14) -> DressedStates:
    """Right/left eigendecomposition of a 2x2 effective Hamiltonian.

    Raises ExceptionalPointError when the eigenvalues are degenerate within
    ``gap_tol`` (no bi-orthonormal basis exists there).
    """
    m = heff.matrix if isinstance(heff, EffectiveHamiltonian) else np.asarray(heff, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    evals, right = np.linalg.eig(m)
    if abs(evals[0] - evals[1]) < gap_tol:
        raise ExceptionalPointError(
            f"degenerate dressed states at {evals[0]}", eigenvalues=evals
        )
    order = np.argsort(evals.real)[::-1]
    evals, right = evals[order], right[:, order]
    left = np.linalg.inv(right)
    return DressedStates(complex(evals[0]), complex(evals[1]), right, left)


def cycle_averaged_amplitudes(dressed: DressedStates, t):
    """Essential-state amplitudes (a(t), b(t)) for the |ground, 0> initial state."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0.0):
        raise ValueError("amplitudes are defined for t >= 0")
    weights = dressed.left[:, 0]                       # <~j|a,0>
    phases = np.exp(-1j * np.outer(dressed.eigenvalues, t_arr)) * weights[:, None]
    a = dressed.right[0, :] @ phases
    b = dressed.right[1, :] @ phases
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return complex(a[0]), complex(b[0])
    return a, b


def cr_amplitudes(chi: ReducedWaveOp, partition: Partition) -> CRAmplitudes:
    """Read Lambda^(0) and Lambda^(-4) from the excited column of chi.

    Requires the counter-rotating partners |b, 0> and |b, -2m-2> of the
    excited essential state |b, -m> to sit inside the photon window.
    """
    exc = partition.excited
    m = -exc.photons
    upper = FloquetIndex(exc.level, 0)
    lower = FloquetIndex(exc.level, -2 * m)
    try:
        lam0 = chi.entry(upper, 1)
        lam4 = chi.entry(lower, 1)
    except IndexError as exc_info:
        raise ModelFormatError(
            f"counter-rotating state outside the photon window: {exc_info}; "
            "enlarge [k_min, k_max]"
        ) from None
    return CRAmplitudes(lam0, lam4)


def cr_transition_amplitude(
    dressed: DressedStates,
    chi: ReducedWaveOp,
    partition: Partition,
    omega: float,
    t,
):
    """Sub-cycle transition amplitude built from the dressed states and chi.

    U(t) = sum_{k in {0,-m,-2m}} sum_{j in +-} <b,k|(P + chi)|j>
           e^{-i lambda_j t} <~j|a,0> e^{i k omega t},
    where m is the photon order of the transition (the essential excited
    state sits at photon index -m, usually -2).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0.0):
        raise ValueError("amplitude requires t >= 0")
    exc = partition.excited
    m = -exc.photons
    ks = (0, -m, -2 * m)

    # <b,k|(P+chi)|j> as rows of a (3, 2) coefficient matrix
    coeffs = np.zeros((3, 2), dtype=complex)
    for row, k in enumerate(ks):
        idx = FloquetIndex(exc.level, k)
        if k == exc.photons:
            coeffs[row, :] = dressed.right[1, :]
        else:
            try:
                qrow = partition.q_position(idx)
            except IndexError:
                raise ModelFormatError(
                    f"counter-rotating state {idx} outside the photon window"
                ) from None
            coeffs[row, :] = chi.matrix[qrow, :] @ dressed.right

    weights = dressed.left[:, 0]
    phases = np.exp(-1j * np.outer(dressed.eigenvalues, t_arr)) * weights[:, None]
    per_k = coeffs @ phases                                  # (3, n_t)
    fourier = np.exp(1j * np.outer(np.array(ks, dtype=float), omega * t_arr))
    amp = np.sum(per_k * fourier, axis=0)
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return complex(amp[0])
    return amp


def cr_population_compact(dressed: DressedStates, cr: CRAmplitudes, omega: float, t):
    """Compact sub-cycle excited population.

    |b(t)|^2 [1 + |L0|^2 + |L-4|^2 + 2 Re(L0 + L-4) cos(2 omega t)], i.e. the
    cycle-averaged population dressed with the dominant counter-rotating beat.
    """
    _, b = cycle_averaged_amplitudes(dressed, t)
    t_arr = np.asarray(t, dtype=float)
    stat = 1.0 + abs(cr.lambda_0) ** 2 + abs(cr.lambda_m4) ** 2
    return np.abs(b) ** 2 * (stat + 2.0 * cr.lambda_sum.real * np.cos(2.0 * omega * t_arr))


def cr_envelopes(dressed: DressedStates, cr: CRAmplitudes, t):
    """Outlines of the counter-rotating oscillations (cosine replaced by +-1)."""
    _, b = cycle_averaged_amplitudes(dressed, t)
    pop = np.abs(b) ** 2
    stat = 1.0 + abs(cr.lambda_0) ** 2 + abs(cr.lambda_m4) ** 2
    swing = 2.0 * abs(cr.lambda_sum.real)
    return pop * (stat - swing), pop * (stat + swing)


def interference_bound(dressed: DressedStates, cr: CRAmplitudes, t_max: float) -> float:
    """Bound on the neglected inter-CR-state interference:
    4 |L0| |L-4| max_t |b(t)|^2."""
    peak = max_excited_population(dressed, t_max)[1]
    return 4.0 * abs(cr.lambda_0) * abs(cr.lambda_m4) * peak


def max_excited_population(
    dressed: DressedStates, t_max: float, samples_per_period: int = 400
) -> tuple:
    """Locate max_t |b(t)|^2 on [0, t_max]: dense sampling plus golden-section
    refinement.  Returns (t_star, value)."""
    if t_max <= 0.0:
        raise ValueError("t_max must be positive")
    split = dressed.rabi_splitting
    if split > 0.0:
        period = 2.0 * math.pi / split
        n = int(max(samples_per_period * t_max / period, 400))
    else:
        n = 4000
    n = min(n, 2_000_000)
    ts = np.linspace(0.0, t_max, n + 1)
    _, b = cycle_averaged_amplitudes(dressed, ts)
    pops = np.abs(b) ** 2
    i = int(np.argmax(pops))
    lo = ts[max(i - 1, 0)]
    hi = ts[min(i + 1, n)]

    def f(t):
        _, bt = cycle_averaged_amplitudes(dressed, float(t))
        return abs(bt) ** 2

    t_star, val = _golden_max(f, lo, hi)
    return t_star, val


def _golden_max(f, lo, hi, tol=1e-12, max_iter=200):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol * max(abs(a), abs(b), 1.0):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    t = 0.5 * (a + b)
    return t, f(t)


def m_max(cr: CRAmplitudes, dressed: DressedStates, t_max: float) -> float:
    """Maximum span of the counter-rotating oscillations:
    4 |Re(L0 + L-4)| max_t |b(t)|^2."""
    peak = max_excited_population(dressed, t_max)[1]
    return 4.0 * abs(cr.lambda_sum.real) * peak


def damping_ratio(
    heff: EffectiveHamiltonian | np.ndarray,
    require_resonance: bool = True,
    resonance_tol: float = 0.25,
) -> float:
    """Classical damping-ratio analogue of the lossy two-level dynamics.

    zeta = |Gamma_b - Gamma_a| / (2 Omega) with Gamma_i = -2 Im(H_ii) and
    Omega = 2 |H_12 H_21|^{1/2}.  zeta > 1 means overdamped (no revival of
    the excited population), zeta < 1 oscillatory.  Defined at the dressed
    resonance; by default the real diagonal detuning is checked against
    ``resonance_tol`` * Omega.
    """
    m = heff.matrix if isinstance(heff, EffectiveHamiltonian) else np.asarray(heff, dtype=complex)
    omega_eff = 2.0 * math.sqrt(abs(m[0, 1] * m[1, 0]))
    if omega_eff < 1e-16:
        raise ModelFormatError("effective coupling below 1e-16; damping ratio undefined")
    if require_resonance:
        detuning = abs((m[0, 0] - m[1, 1]).real)
        if detuning > resonance_tol * omega_eff:
            raise OffResonanceError(
                f"diagonal detuning {detuning:.3e} exceeds {resonance_tol} * Omega_eff "
                f"({omega_eff:.3e}); evaluate at the dressed resonance"
            )
    gamma_a = -2.0 * m[0, 0].imag
    gamma_b = -2.0 * m[1, 1].imag
    return abs(gamma_b - gamma_a) / (2.0 * omega_eff)


def population_series(
    dressed: DressedStates,
    cr: CRAmplitudes | None,
    chi: ReducedWaveOp | None,
    partition: Partition | None,
    omega: float,
    times,
    source: str = "effective",
) -> PopulationSeries:
    """Assemble the analytic PopulationSeries on a given time grid.

    The excited column is the sub-cycle population |U(t)|^2 when chi is
    available, otherwise the cycle-averaged |b(t)|^2.  Envelopes come from the
    compact form when ``cr`` is given.
    """
    t = np.asarray(times, dtype=float)
    a, b = cycle_averaged_amplitudes(dressed, t)
    if chi is not None and partition is not None:
        amp = cr_transition_amplitude(dressed, chi, partition, omega, t)
        pop_exc = np.abs(amp) ** 2
    else:
        pop_exc = np.abs(b) ** 2
    env_lo = env_hi = None
    if cr is not None:
        env_lo, env_hi = cr_envelopes(dressed, cr, t)
    pop_gnd = np.abs(a) ** 2
    return PopulationSeries(
        times=t,
        pop_ground=pop_gnd,
        pop_excited=pop_exc,
        norm=pop_gnd + np.abs(b) ** 2,
        envelope_lo=env_lo,
        envelope_hi=env_hi,
        meta={"source": source, "omega": omega},
    )


# ---------------------------------------------------------------------------
# CSV interchange: t_au, t_fs, pop_ground, pop_excited, env_lo, env_hi, norm
# plus a trailing source column when several series are merged.
# ---------------------------------------------------------------------------

_CSV_HEADER = ["t_au", "t_fs", "pop_ground", "pop_excited", "env_lo", "env_hi", "norm", "source"]


def _fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def write_series_csv(path, series_list) -> None:
    """Write one or more PopulationSeries into the shared CSV layout."""
    if isinstance(series_list, PopulationSeries):
        series_list = [series_list]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for series in series_list:
            src = series.meta.get("source", "")
            for i, t in enumerate(series.times):
                writer.writerow(
                    [
                        _fmt(t),
                        _fmt(units.au_to_fs(t)),
                        _fmt(series.pop_ground[i]),
                        _fmt(series.pop_excited[i]),
                        _fmt(series.envelope_lo[i]) if series.envelope_lo is not None else "",
                        _fmt(series.envelope_hi[i]) if series.envelope_hi is not None else "",
                        _fmt(series.norm[i]),
                        src,
                    ]
                )


def read_series_csv(path) -> dict:
    """Read a series CSV back into {source: PopulationSeries}."""
    groups: dict = {}
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _CSV_HEADER:
            raise ModelFormatError(f"unexpected CSV header {header}")
        for row in reader:
            src = row[7]
            groups.setdefault(src, []).append(row)
    out = {}
    for src, rows in groups.items():
        t = np.array([float(r[0]) for r in rows])
        has_env = all(r[4] != "" for r in rows)
        out[src] = PopulationSeries(
            times=t,
            pop_ground=np.array([float(r[2]) for r in rows]),
            pop_excited=np.array([float(r[3]) for r in rows]),
            norm=np.array([float(r[6]) for r in rows]),
            envelope_lo=np.array([float(r[4]) for r in rows]) if has_env else None,
            envelope_hi=np.array([float(r[5]) for r in rows]) if has_env else None,
            meta={"source": src},
        )
    return out
