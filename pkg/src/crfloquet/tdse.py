"""Time-domain oracle: exact propagation of the model atom in its own eigenbasis.

The state is advanced with the classical fourth-order Runge-Kutta scheme
(midpoint field evaluations) in the rotating frame of the real level
energies: c_n(t) = exp(-i Re(E_n) (t - t0)) u_n(t).  The frame change is
exact, so with a zero field and a widthless atom the coefficients u do not
move at all, and the absorber (the imaginary energy parts) is the only
diagonal term the integrator has to handle.  Populations are
|c_n|^2 = |u_n|^2 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atom_model import AtomModel, LaserField
from .dynamics import PopulationSeries
from .errors import ModelFormatError, StepSizeError


@dataclass(frozen=True)
class PropagatorConfig:
    """Fixed-step RK4 settings.

    ``dt`` defaults to exactly ``2 pi / (omega * steps_per_cycle_min)`` and may
    only be set smaller.  ``t_start`` defaults to 0 for rectangular pulses and
    to ``-t_max`` for Gaussian pulses (whose intensity peak sits at t = 0).
    Every ``error_check_stride`` steps a step-doubling estimate of the local
    error is compared against ``error_tol``.
    """

    t_max: float
    dt: float | None = None
    steps_per_cycle_min: int = 400
    method_order: int = 4
    t_start: float | None = None
    error_check_stride: int = 64
    error_tol: float = 1e-8
    soft_start: bool = False
    record_stride: int = 1

    def __post_init__(self):
        if self.method_order != 4:
            raise ModelFormatError("only the fourth-order scheme is implemented")
        if self.t_max <= 0.0:
            raise ModelFormatError("t_max must be positive")
        if self.steps_per_cycle_min < 1:
            raise ModelFormatError("steps_per_cycle_min must be positive")
        if self.record_stride < 1:
            raise ModelFormatError("record_stride must be positive")

    def resolve_dt(self, omega: float) -> float:
        bound = 2.0 * math.pi / (omega * self.steps_per_cycle_min)
        if self.dt is None:
            return bound
        if self.dt > bound * (1.0 + 1e-12):
            raise ModelFormatError(
                f"dt = {self.dt} violates dt <= 2 pi / (omega * steps_per_cycle_min) = {bound}"
            )
        return self.dt


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over the model levels at one instant."""

    amplitudes: np.ndarray
    time: float


def _field_factory(field: LaserField, config: PropagatorConfig):
    e0, omega, phase = field.e0, field.omega, field.phase
    if field.envelope == "gaussian":
        alpha = 0.5 * math.log(2.0) * (2.0 / field.fwhm) ** 2

        def efield(t: float) -> float:
            return e0 * math.exp(-alpha * t * t) * math.cos(omega * t + phase)

        return efield

    if config.soft_start:
        ramp_end = math.pi / omega  # half optical cycle

        def efield(t: float) -> float:
            if t < 0.0:
                return 0.0
            ramp = math.sin(0.5 * math.pi * t / ramp_end) ** 2 if t < ramp_end else 1.0
            return e0 * ramp * math.cos(omega * t + phase)

        return efield

    def efield(t: float) -> float:
        return e0 * math.cos(omega * t + phase) if t >= 0.0 else 0.0

    return efield


def propagate(
    atom: AtomModel,
    field: LaserField,
    config: PropagatorConfig,
    initial_level: int = 0,
    excited_level: int | None = None,
    keep_full: bool = False,
    initial_state: np.ndarray | None = None,
) -> PopulationSeries:
    """Propagate i dc/dt = (H0 + E(t) D) c from a single initial level.

    Parameters
    ----------
    atom, field : the model and the drive.
    config : PropagatorConfig
    initial_level : index of the level holding amplitude 1 at t_start.
    excited_level : index reported in the ``pop_excited`` column; defaults to
        the model's "excited" metadata, else the last level.
    keep_full : stash the full (n_times, n_levels) population matrix in
        ``meta["populations"]``.
    initial_state : optional amplitude vector overriding ``initial_level``.

    The final step is always recorded regardless of ``record_stride``.
    """
    n = atom.n_levels
    if not (0 <= initial_level < n):
        raise ModelFormatError(f"initial_level {initial_level} outside 0..{n - 1}")
    if excited_level is None:
        excited_level = atom.index(atom.meta["excited"]) if "excited" in atom.meta else n - 1
    if not (0 <= excited_level < n):
        raise ModelFormatError(f"excited_level {excited_level} outside 0..{n - 1}")

    dt = config.resolve_dt(field.omega)
    t0 = config.t_start
    if t0 is None:
        t0 = -config.t_max if field.envelope == "gaussian" else 0.0
    span = config.t_max - t0
    if span <= 0.0:
        raise ModelFormatError("t_max must exceed t_start")
    n_steps = max(int(math.ceil(span / dt - 1e-12)), 1)
    dt = span / n_steps

    re_e = atom.energies.real
    im_e = atom.energies.imag
    dip = atom.dipole
    efield = _field_factory(field, config)

    def rhs(t: float, u: np.ndarray) -> np.ndarray:
        ph = np.exp(1j * (re_e * (t - t0)))
        coup = efield(t) * (ph * (dip @ (np.conj(ph) * u)))
        return im_e * u - 1j * coup

    def rk4_step(t: float, u: np.ndarray, h: float) -> np.ndarray:
        k1 = rhs(t, u)
        k2 = rhs(t + 0.5 * h, u + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, u + 0.5 * h * k2)
        k4 = rhs(t + h, u + h * k3)
        return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    if initial_state is not None:
        u = np.asarray(initial_state, dtype=complex).copy()
        if u.shape != (n,):
            raise ModelFormatError(f"initial_state must have shape ({n},)")
    else:
        u = np.zeros(n, dtype=complex)
        u[initial_level] = 1.0

    n_rec = n_steps // config.record_stride + 2
    times = np.empty(n_rec)
    pops = np.empty((n_rec, n))
    times[0] = t0
    pops[0] = np.abs(u) ** 2
    rec = 1

    t = t0
    for step in range(1, n_steps + 1):
        u_next = rk4_step(t, u, dt)
        if config.error_check_stride and step % config.error_check_stride == 0:
            half = rk4_step(t + 0.5 * dt, rk4_step(t, u, 0.5 * dt), 0.5 * dt)
            est = float(np.max(np.abs(u_next - half))) / 15.0
            if est > config.error_tol:
                raise StepSizeError(
                    f"step-doubling error estimate {est:.3e} exceeds {config.error_tol:g} "
                    f"at t = {t:.6g}; reduce dt"
                )
        u = u_next
        t = t0 + step * dt
        if step % config.record_stride == 0 or step == n_steps:
            if not np.all(np.isfinite(u)):
                raise StepSizeError(f"non-finite amplitude at t = {t:.6g}")
            times[rec] = t
            pops[rec] = np.abs(u) ** 2
            rec += 1

    times = times[:rec]
    pops = pops[:rec]
    c_final = np.exp(-1j * (re_e * (t - t0))) * u  # back to the lab frame
    meta = {
        "source": "tdse",
        "omega": field.omega,
        "e0": field.e0,
        "envelope": field.envelope,
        "dt": dt,
        "initial_level": initial_level,
        "excited_level": excited_level,
        "final_state": StateVector(c_final, t),
    }
    if keep_full:
        meta["populations"] = pops.copy()
    return PopulationSeries(
        times=times,
        pop_ground=pops[:, initial_level],
        pop_excited=pops[:, excited_level],
        norm=pops.sum(axis=1),
        meta=meta,
    )


def _refined_extremum(t: np.ndarray, y: np.ndarray, idx: int, mode: str) -> float:
    """3-point parabolic refinement of a sampled extremum; falls back to the
    raw sample on the window edge."""
    if idx <= 0 or idx >= y.size - 1:
        return float(y[idx])
    y0, y1, y2 = y[idx - 1], y[idx], y[idx + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(y1)
    delta = 0.5 * (y0 - y2) / denom
    if abs(delta) > 1.0:
        return float(y1)
    val = y1 - 0.25 * (y0 - y2) * delta
    return float(max(val, y1) if mode == "max" else min(val, y1))


def modulation_depth(
    series: PopulationSeries,
    level: str = "excited",
    window: tuple | None = None,
    omega: float | None = None,
) -> float:
    """Largest per-cycle (max - min) of a population column inside a window.

    The window must contain at least two optical cycles.  Sampled extrema are
    sharpened with a parabolic fit before taking the spread.
    """
    if omega is None:
        omega = series.meta.get("omega")
    if omega is None:
        raise ModelFormatError("omega not given and not present in series metadata")
    if level not in ("ground", "excited"):
        raise ModelFormatError(f"unknown level selector {level!r}")
    y_all = series.pop_ground if level == "ground" else series.pop_excited
    t_all = series.times
    if window is None:
        window = (t_all[0], t_all[-1])
    t0, t1 = window
    cycle = 2.0 * math.pi / omega
    if t1 - t0 < 2.0 * cycle:
        raise ModelFormatError("window must span at least two optical cycles")
    mask = (t_all >= t0) & (t_all <= t1)
    if not np.any(mask):
        raise ModelFormatError("window contains no samples")
    t = t_all[mask]
    y = y_all[mask]

    depth = 0.0
    n_cycles = int(math.floor((t[-1] - t[0]) / cycle))
    for j in range(n_cycles):
        sel = (t >= t[0] + j * cycle) & (t < t[0] + (j + 1) * cycle)
        if np.count_nonzero(sel) < 4:
            continue
        yj = y[sel]
        tj = t[sel]
        hi = _refined_extremum(tj, yj, int(np.argmax(yj)), "max")
        lo = _refined_extremum(tj, yj, int(np.argmin(yj)), "min")
        depth = max(depth, hi - lo)
    return depth
