"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
report.  All tolerances are fixed here; nothing is calibrated at run time.
"""

import time

import numpy as np
import pytest

from crfloquet import (
    LaserField,
    assemble_floquet,
    cr_envelopes,
    cr_transition_amplitude,
    cycle_averaged_amplitudes,
    damping_ratio,
    diagonalize_floquet,
    dressed_diagonalize,
    heff1_complex_symmetric,
    heff_energy_dependent,
    intensity_to_field,
    m_max,
    make_partition,
    p_dominant_eigenpairs,
)
from crfloquet.effham import _split
from crfloquet.floquet import FloquetIndex
from crfloquet.scan import (
    ParamGrid,
    dressed_resonance,
    effective_point,
    interpolate_heff,
    peak_excited_population,
    scan_heff,
)
from crfloquet.tdse import PropagatorConfig, modulation_depth, propagate
from conftest import find_resonance


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture(scope="module")
def intensity_series(ladder5):
    """TDSE runs to just past the population peak at five intensities."""
    runs = {}
    for intensity in (5e13, 7.5e13, 1e14, 1.25e14, 1.5e14):
        omega = find_resonance(ladder5, intensity)
        pt = effective_point(ladder5, omega, intensity_wcm2=intensity)
        ds = dressed_diagonalize(pt.heff1)
        t_pi = np.pi / ds.rabi_splitting
        series = propagate(
            ladder5,
            LaserField(omega, intensity_to_field(intensity)),
            PropagatorConfig(t_max=1.25 * t_pi),
            initial_level=0,
            excited_level=1,
        )
        runs[intensity] = (omega, pt, ds, series)
    return runs


def test_criterion_1_effective_vs_full_eigenvalues(ladder5):
    """Both H^(1) eigenvalues within 1e-4 relative of the P-dominant
    quasienergies; H^(1) never worse than H^(0)."""
    start = time.perf_counter()
    worst_rel = 0.0
    ordering_ok = True
    for intensity in (2.5e13, 5e13, 7.5e13, 1e14):
        omega = find_resonance(ladder5, intensity)
        pt = effective_point(ladder5, omega, intensity_wcm2=intensity)
        es = diagonalize_floquet(pt.fm)
        h1e = np.sort_complex(np.linalg.eigvals(pt.heff1.matrix))
        h0e = np.sort_complex(np.linalg.eigvals(pt.heff0.matrix))
        full, _, _ = p_dominant_eigenpairs(es, pt.partition, heff_eigs=h1e)
        full = np.sort_complex(full)
        rel1 = np.max(np.abs(h1e - full) / np.abs(full))
        rel0 = np.max(np.abs(h0e - full) / np.abs(full))
        worst_rel = max(worst_rel, rel1)
        ordering_ok = ordering_ok and rel1 <= rel0
    elapsed = time.perf_counter() - start
    ok = worst_rel < 1e-4 and ordering_ok and elapsed < 30.0
    _report(
        "criterion 1 (effective vs full eigenvalues)",
        ok,
        f"max rel err H1 = {worst_rel:.2e} (< 1e-4), H1 <= H0 everywhere: "
        f"{ordering_ok}, runtime {elapsed:.1f}s (< 30s)",
    )
    assert worst_rel < 1e-4
    assert ordering_ok
    assert elapsed < 30.0


def test_criterion_2_subcycle_oracle_agreement(ladder5):
    """Sub-cycle amplitude matches the time-domain oracle within 10% of the
    modulation amplitude over the first five optical cycles; the analytic
    envelopes bound the oracle curve up to the interference slack."""
    start = time.perf_counter()
    omega = find_resonance(ladder5, 1e14)
    pt = effective_point(ladder5, omega, intensity_wcm2=1e14)
    ds = dressed_diagonalize(pt.heff1)
    cycle = 2.0 * np.pi / omega
    series = propagate(
        ladder5, LaserField(omega, pt.e0), PropagatorConfig(t_max=5 * cycle), 0, 1
    )
    ts = series.times
    analytic = np.abs(cr_transition_amplitude(ds, pt.bundle.chi, pt.partition, omega, ts)) ** 2
    depth = modulation_depth(series, "excited", omega=omega)
    max_dev = float(np.max(np.abs(analytic - series.pop_excited)))

    lo, hi = cr_envelopes(ds, pt.cr, ts)
    _, b = cycle_averaged_amplitudes(ds, ts)
    slack = 4.0 * abs(pt.cr.lambda_0) * abs(pt.cr.lambda_m4) * float(np.max(np.abs(b) ** 2))
    viol = float(
        max(np.max(series.pop_excited - hi), np.max(lo - series.pop_excited), 0.0)
    )
    elapsed = time.perf_counter() - start
    ok = max_dev < 0.10 * depth and viol <= slack and elapsed < 120.0
    _report(
        "criterion 2 (sub-cycle oracle agreement)",
        ok,
        f"point-wise dev = {max_dev:.2e} = {max_dev / depth:.1%} of modulation "
        f"(< 10%), envelope violation {viol:.2e} <= slack {slack:.2e}, "
        f"runtime {elapsed:.1f}s (< 120s)",
    )
    assert max_dev < 0.10 * depth
    assert viol <= slack
    assert elapsed < 120.0


def test_criterion_3_m_max_consistency(intensity_series):
    """Analytic CR span within 15% of the measured per-cycle span; both
    monotone across five intensities."""
    spans_eq = []
    spans_td = []
    rels = []
    for intensity in sorted(intensity_series):
        omega, pt, ds, series = intensity_series[intensity]
        t_pi = np.pi / ds.rabi_splitting
        span_eq = m_max(pt.cr, ds, 1.5 * t_pi)
        span_td = modulation_depth(series, "excited", omega=omega)
        spans_eq.append(span_eq)
        spans_td.append(span_td)
        rels.append(abs(span_eq - span_td) / span_eq)
    mono = bool(np.all(np.diff(spans_eq) > 0) and np.all(np.diff(spans_td) > 0))
    worst = max(rels)
    ok = worst < 0.15 and mono
    _report(
        "criterion 3 (M_max consistency)",
        ok,
        f"worst analytic-vs-oracle span mismatch {worst:.1%} (< 15%), "
        f"monotone in intensity: {mono}; spans {['%.3f' % s for s in spans_eq]}",
    )
    assert worst < 0.15
    assert mono


def test_criterion_4_non_reciprocality(intensity_series):
    """Ground-state sub-cycle modulation below 5% of the excited-state one,
    measured from the time-domain oracle alone."""
    omega, _, _, series = intensity_series[1e14]
    depth_exc = modulation_depth(series, "excited", omega=omega)
    depth_gnd = modulation_depth(series, "ground", omega=omega)
    ratio = depth_gnd / depth_exc
    ok = ratio < 0.05
    _report(
        "criterion 4 (non-reciprocality)",
        ok,
        f"ground/excited modulation depth = {ratio:.2%} (< 5%)",
    )
    assert ratio < 0.05


def test_criterion_5_damping_classification():
    """zeta < 1 iff oscillatory population, over 20 random lossy systems."""
    rng = np.random.default_rng(2024)
    tested = 0
    agree = 0
    while tested < 20:
        gamma_a = 10.0 ** rng.uniform(-5.0, -2.0)
        gamma_b = 10.0 ** rng.uniform(-5.0, -2.0)
        coupling = 10.0 ** rng.uniform(-4.0, -2.0)
        h = np.array(
            [[-0.5j * gamma_a, coupling / 2.0], [coupling / 2.0, -0.5j * gamma_b]],
            dtype=complex,
        )
        zeta = damping_ratio(h)
        if 0.95 < zeta < 1.05:
            continue
        ds = dressed_diagonalize(h)
        ts = np.linspace(0.0, 16.0 * np.pi / coupling, 16000)
        _, b = cycle_averaged_amplitudes(ds, ts)
        p = np.abs(b) ** 2
        n_max = int(np.sum((p[1:-1] > p[:-2]) & (p[1:-1] > p[2:]) & (p[1:-1] > 1e-200)))
        agree += (zeta < 1.0) == (n_max >= 2)
        tested += 1
    ok = agree == tested == 20
    _report(
        "criterion 5 (damping classification)",
        ok,
        f"{agree}/{tested} random systems classified consistently",
    )
    assert agree == tested == 20


def test_criterion_6_bloch_siegert(two_level):
    """Two-level crossing shift against the leading-order value at
    coupling/frequency = 0.02."""
    start = time.perf_counter()
    omega0 = 0.5
    e0 = 0.02 * omega0  # one-photon Rabi frequency for unit dipole

    def gap(omega):
        fm = assemble_floquet(two_level, LaserField(omega, e0), -8, 8)
        es = diagonalize_floquet(fm)
        part = make_partition(fm, FloquetIndex(0, 0), FloquetIndex(1, -1))
        vals, _, _ = p_dominant_eigenpairs(es, part)
        return abs(vals[0] - vals[1])

    from scipy.optimize import minimize_scalar

    res = minimize_scalar(
        gap, bounds=(omega0 * 0.999, omega0 * 1.002), method="bounded",
        options={"xatol": 1e-12},
    )
    shift = res.x - omega0
    predicted = e0**2 / (4.0 * omega0)
    rel = abs(shift - predicted) / predicted
    elapsed = time.perf_counter() - start
    ok = rel < 0.05 and elapsed < 5.0
    _report(
        "criterion 6 (Bloch-Siegert regression)",
        ok,
        f"shift {shift:.3e} vs {predicted:.3e}, rel err {rel:.2%} (< 5%), "
        f"runtime {elapsed:.1f}s (< 5s)",
    )
    assert rel < 0.05
    assert elapsed < 5.0


def test_criterion_7_algebraic_identities(resonant_point, resonant_dressed):
    pt, ds = resonant_point, resonant_dressed

    closure = float(np.max(np.abs(ds.right @ ds.left - np.eye(2))))

    php, pvq, _, _ = _split(pt.fm, pt.partition)
    chi_identity = float(
        np.max(np.abs(pvq @ pt.bundle.chi.matrix - (pt.heff0.matrix - php)))
    )

    h = 1e-5
    fd = (
        heff_energy_dependent(pt.fm, pt.partition, pt.bundle.e_ref + h)
        - heff_energy_dependent(pt.fm, pt.partition, pt.bundle.e_ref - h)
    ) / (2.0 * h)
    fd_resid = float(np.max(np.abs(fd + pt.bundle.corr.matrix)))
    fd_bound = 100.0 * h**2

    hcs = heff1_complex_symmetric(pt.heff1, pt.bundle.corr)
    eig_h1 = np.sort_complex(np.linalg.eigvals(pt.heff1.matrix))
    eig_cs = np.sort_complex(np.linalg.eigvals(hcs))
    similarity = float(np.max(np.abs(eig_h1 - eig_cs)))

    h0_sym = float(np.max(np.abs(pt.heff0.matrix - pt.heff0.matrix.T)))

    checks = {
        "closure": (closure, 1e-10),
        "PVQ.chi": (chi_identity, 1e-11),
        "C vs dH/dE": (fd_resid, fd_bound),
        "similarity": (similarity, 1e-12),
        "H0 symmetry": (h0_sym, 1e-12),
    }
    ok = all(val < tol for val, tol in checks.values())
    detail = ", ".join(f"{k} {v:.1e} (< {tol:.0e})" for k, (v, tol) in checks.items())
    _report("criterion 7 (algebraic identities)", ok, detail)
    for name, (val, tol) in checks.items():
        assert val < tol, name


def test_criterion_8_scan_infrastructure(ladder5, tmp_path):
    omega = find_resonance(ladder5, 1e14)
    grid = ParamGrid(
        np.linspace(omega - 0.008, omega + 0.008, 10), np.linspace(3e13, 1.5e14, 10)
    )
    full = scan_heff(ladder5, grid, workers=1)

    # held-out interior row/column of a 10x10 grid
    keep = [k for k in range(10) if k != 4]
    sub = scan_heff(ladder5, ParamGrid(grid.omegas[keep], grid.intensities[keep]))
    errs = []
    for i in range(1, 9):
        for j in range(1, 9):
            if i != 4 and j != 4:
                continue
            h_int = interpolate_heff(sub, grid.omegas[i], grid.intensities[j]).matrix
            h_ref = full.entries[i, j]
            errs.append(np.max(np.abs(h_int - h_ref) / np.abs(h_ref)))
    held_out = max(errs)

    parallel = scan_heff(ladder5, grid, workers=4)
    identical = bool(
        np.array_equal(full.entries, parallel.entries)
        and np.array_equal(full.lambda_0, parallel.lambda_0)
    )

    om_star = dressed_resonance(full, 1e14)
    h = 1e-6
    fp = peak_excited_population(interpolate_heff(full, om_star + h, 1e14).matrix)
    fm_ = peak_excited_population(interpolate_heff(full, om_star - h, 1e14).matrix)
    stationarity = abs(fp - fm_) / (2.0 * h)

    ok = held_out < 1e-3 and identical and stationarity < 1e-6
    _report(
        "criterion 8 (scan infrastructure)",
        ok,
        f"held-out rel err {held_out:.2e} (< 1e-3), workers bit-identical: "
        f"{identical}, resonance stationarity {stationarity:.2e} (< 1e-6)",
    )
    assert held_out < 1e-3
    assert identical
    assert stationarity < 1e-6


def test_criterion_9_propagator_self_consistency(ladder5):
    omega = find_resonance(ladder5, 1e14)
    cycle = 2.0 * np.pi / omega
    field = LaserField(omega, intensity_to_field(1e14))

    runs = [
        propagate(
            ladder5, field,
            PropagatorConfig(t_max=10 * cycle, steps_per_cycle_min=spc, record_stride=10**9),
            0, 1,
        )
        for spc in (400, 800)
    ]
    halving = max(
        abs(runs[0].pop_ground[-1] - runs[1].pop_ground[-1]),
        abs(runs[0].pop_excited[-1] - runs[1].pop_excited[-1]),
    )

    absorbed = propagate(ladder5, field, PropagatorConfig(t_max=30 * cycle), 0, 1)
    norm_ok = bool(np.all(np.diff(absorbed.norm) <= 1e-10))

    stationary = propagate(
        ladder5.widthless(), LaserField(omega, 0.0), PropagatorConfig(t_max=100 * cycle), 0, 1
    )
    drift = max(
        float(np.max(np.abs(stationary.pop_ground - 1.0))),
        float(np.max(np.abs(stationary.pop_excited))),
    )

    ok = halving < 1e-9 and norm_ok and drift < 1e-12
    _report(
        "criterion 9 (propagator self-consistency)",
        ok,
        f"dt-halving {halving:.2e} (< 1e-9), norm monotone: {norm_ok}, "
        f"zero-field drift {drift:.2e} (< 1e-12)",
    )
    assert halving < 1e-9
    assert norm_ok
    assert drift < 1e-12
