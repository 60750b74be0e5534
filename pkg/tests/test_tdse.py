import numpy as np
import pytest

from crfloquet import LaserField, intensity_to_field
from crfloquet.dynamics import PopulationSeries
from crfloquet.errors import ModelFormatError, StepSizeError
from crfloquet.tdse import PropagatorConfig, modulation_depth, propagate
from conftest import find_resonance


def test_config_validation():
    with pytest.raises(ModelFormatError):
        PropagatorConfig(t_max=10.0, method_order=2)
    with pytest.raises(ModelFormatError):
        PropagatorConfig(t_max=-1.0)
    cfg = PropagatorConfig(t_max=10.0, dt=1.0)
    with pytest.raises(ModelFormatError):
        cfg.resolve_dt(omega=0.5)  # bound is 2 pi / (0.5 * 400) ~ 0.031


def test_zero_field_stationary(ladder5):
    atom = ladder5.widthless()
    omega = 0.4256
    cyc = 2.0 * np.pi / omega
    series = propagate(atom, LaserField(omega, 0.0), PropagatorConfig(t_max=100 * cyc), 0, 1)
    assert np.max(np.abs(series.pop_ground - 1.0)) < 1e-12
    assert np.max(np.abs(series.pop_excited)) < 1e-12


def test_two_level_rwa(two_level):
    omega0 = 0.5
    ratio = 0.01
    e0 = ratio * omega0
    rabi = e0
    series = propagate(
        two_level,
        LaserField(omega0, e0),
        PropagatorConfig(t_max=2.0 * np.pi / rabi),
        0,
        1,
    )
    ref = np.sin(0.5 * rabi * series.times) ** 2
    assert np.max(np.abs(series.pop_excited - ref)) < 2.0 * ratio


def test_dt_halving_self_convergence(ladder5):
    omega = find_resonance(ladder5, 1e14)
    cyc = 2.0 * np.pi / omega
    field = LaserField(omega, intensity_to_field(1e14))
    runs = []
    for spc in (400, 800):
        runs.append(
            propagate(
                ladder5, field,
                PropagatorConfig(t_max=10 * cyc, steps_per_cycle_min=spc, record_stride=10**9),
                0, 1,
            )
        )
    assert runs[0].times[-1] == runs[1].times[-1]
    diff = max(
        abs(runs[0].pop_ground[-1] - runs[1].pop_ground[-1]),
        abs(runs[0].pop_excited[-1] - runs[1].pop_excited[-1]),
    )
    assert diff < 1e-9


def test_norm_monotone_with_absorber(ladder5):
    omega = 0.4256
    cyc = 2.0 * np.pi / omega
    series = propagate(
        ladder5, LaserField(omega, intensity_to_field(1e14)),
        PropagatorConfig(t_max=30 * cyc), 0, 1,
    )
    assert np.all(np.diff(series.norm) <= 1e-10)


def test_carrier_phase_pi_flip(ladder5):
    omega = 0.4256
    cyc = 2.0 * np.pi / omega
    cfg = PropagatorConfig(t_max=6 * cyc)
    e0 = intensity_to_field(1e14)
    s0 = propagate(ladder5, LaserField(omega, e0, phase=0.0), cfg, 0, 1, keep_full=True)
    s1 = propagate(ladder5, LaserField(omega, e0, phase=np.pi), cfg, 0, 1, keep_full=True)
    assert np.max(np.abs(s0.meta["populations"] - s1.meta["populations"])) < 1e-10


def test_time_reversal_lossless(ladder5):
    atom = ladder5.widthless()
    omega = find_resonance(ladder5, 1e14)
    cyc = 2.0 * np.pi / omega
    t_end = 12 * cyc  # integer cycles, cosine carrier: the mirrored field is the field itself
    field = LaserField(omega, intensity_to_field(1e14))
    fwd = propagate(atom, field, PropagatorConfig(t_max=t_end), 0, 1)
    c_end = fwd.meta["final_state"].amplitudes
    back = propagate(
        atom, field, PropagatorConfig(t_max=t_end), 0, 1, initial_state=np.conj(c_end)
    )
    recovered = np.conj(back.meta["final_state"].amplitudes)
    start = np.zeros(atom.n_levels, dtype=complex)
    start[0] = 1.0
    assert np.linalg.norm(recovered - start) < 1e-8


def test_subcycle_content_at_twice_drive(ladder5, resonant_point, resonant_dressed):
    pt, ds = resonant_point, resonant_dressed
    omega = pt.omega
    cyc = 2.0 * np.pi / omega
    t_pi = np.pi / ds.rabi_splitting
    series = propagate(
        ladder5, LaserField(omega, pt.e0), PropagatorConfig(t_max=t_pi + 8 * cyc), 0, 1
    )
    mask = (series.times > t_pi - 8 * cyc) & (series.times <= t_pi + 8 * cyc)
    t = series.times[mask]
    y = series.pop_excited[mask]
    y = y - np.polyval(np.polyfit(t, y, 2), t)  # remove the slow Rabi envelope
    spec = np.abs(np.fft.rfft(y))
    freqs = np.fft.rfftfreq(y.size, d=t[1] - t[0]) * 2.0 * np.pi
    peak = freqs[np.argmax(spec[1:]) + 1]
    assert peak == pytest.approx(2.0 * omega, rel=0.02)


def test_gaussian_envelope_centered(ladder5):
    omega = 0.4256
    fwhm = 40.0
    field = LaserField(omega, 0.02, "gaussian", fwhm=fwhm)
    cfg = PropagatorConfig(t_max=2 * fwhm)
    series = propagate(ladder5, field, cfg, 0, 1)
    assert series.times[0] == pytest.approx(-2 * fwhm)
    # intensity envelope halves at +-fwhm/2
    assert field.envelope_at(0.0) == 1.0
    assert field.envelope_at(fwhm / 2.0) ** 2 == pytest.approx(0.5, rel=1e-12)


def test_step_rejection_triggers(ladder5):
    omega = 0.4256
    cyc = 2.0 * np.pi / omega
    cfg = PropagatorConfig(
        t_max=2 * cyc, error_check_stride=1, error_tol=1e-18
    )
    with pytest.raises(StepSizeError):
        propagate(ladder5, LaserField(omega, intensity_to_field(1e14)), cfg, 0, 1)


def test_final_step_always_recorded(ladder5):
    omega = 0.4256
    cyc = 2.0 * np.pi / omega
    series = propagate(
        ladder5, LaserField(omega, 0.01),
        PropagatorConfig(t_max=3 * cyc, record_stride=7777), 0, 1,
    )
    assert series.times[-1] == pytest.approx(3 * cyc)


# ---------------------------------------------------------------------------
# modulation depth
# ---------------------------------------------------------------------------


def _synthetic_series(omega, amp, n_cycles=6, samples_per_cycle=400):
    cyc = 2.0 * np.pi / omega
    t = np.linspace(0.0, n_cycles * cyc, n_cycles * samples_per_cycle + 1)
    pop = 0.5 + amp * np.cos(2.0 * omega * t)
    return PopulationSeries(
        times=t, pop_ground=1.0 - pop, pop_excited=pop, norm=np.ones_like(t),
        meta={"omega": omega},
    )


def test_modulation_depth_constant():
    omega = 0.4
    t = np.linspace(0.0, 10 * 2 * np.pi / omega, 2001)
    series = PopulationSeries(
        times=t, pop_ground=np.full_like(t, 0.7), pop_excited=np.full_like(t, 0.3),
        norm=np.ones_like(t), meta={"omega": omega},
    )
    assert modulation_depth(series, "excited") == 0.0


def test_modulation_depth_synthetic_cosine():
    series = _synthetic_series(omega=0.45, amp=0.1)
    depth = modulation_depth(series, "excited")
    assert depth == pytest.approx(0.2, abs=1e-6)


def test_modulation_depth_window_validation():
    series = _synthetic_series(omega=0.45, amp=0.1)
    with pytest.raises(ModelFormatError):
        modulation_depth(series, "excited", window=(0.0, 2.0))
