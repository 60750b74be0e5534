import numpy as np
import pytest

from crfloquet import (
    LaserField,
    assemble_floquet,
    diagonalize_floquet,
    floquet_transition_amplitude,
    intensity_to_field,
    p_dominant_eigenpairs,
    photon_window,
)
from crfloquet.atom_model import GridSpec, build_softcore_model
from crfloquet.errors import DimensionCapError, ModelFormatError
from crfloquet.floquet import FloquetIndex
from crfloquet.scan import effective_point
from crfloquet.tdse import PropagatorConfig, propagate
from conftest import find_resonance


def test_free_atom_block_diagonal(two_level):
    field = LaserField(0.4, 0.0)
    fm = assemble_floquet(two_level, field, -2, 2)
    w = np.sort(np.linalg.eigvals(fm.matrix).real)
    expected = np.sort([e + k * 0.4 for e in (0.0, 0.5) for k in range(-2, 3)])
    np.testing.assert_allclose(w, expected, atol=1e-12)


def test_structure_counts(two_level):
    fm = assemble_floquet(two_level, LaserField(0.5, 0.02), -1, 1)
    assert fm.dimension == 6
    h = fm.matrix
    # each photon interface carries the 2x2 coupling block twice (upper+lower)
    n_coupling = np.count_nonzero(h) - np.count_nonzero(np.diag(h))
    assert n_coupling == 2 * 2 * 2  # two interfaces, two entries per block, both triangles


def test_flat_index_layout(two_level):
    fm = assemble_floquet(two_level, LaserField(0.5, 0.0), -1, 1)
    assert fm.flat(FloquetIndex(0, -1)) == 0
    assert fm.flat(FloquetIndex(1, 1)) == 5
    with pytest.raises(IndexError):
        fm.flat(FloquetIndex(0, 2))


def test_dimension_cap(two_level):
    with pytest.raises(DimensionCapError):
        assemble_floquet(two_level, LaserField(0.5, 0.0), -10000, 10000)


def test_rect_envelope_required(two_level):
    field = LaserField(0.5, 0.01, "gaussian", fwhm=100.0)
    with pytest.raises(ModelFormatError):
        assemble_floquet(two_level, field, -1, 1)


def test_heliumlike_dimension_range():
    # many-level absorber model assembled over the default two-photon window
    model = build_softcore_model(GridSpec(300.0, 1500, 2.0, 220.0, 0.01), n_keep=100)
    k_min, k_max = photon_window(order=2, guard=4)
    fm = assemble_floquet(model, LaserField(0.43371, intensity_to_field(1e14)), k_min, k_max)
    assert 1000 <= fm.dimension <= 5000


def test_diagonalize_free_atom(two_level):
    fm = assemble_floquet(two_level, LaserField(0.4, 0.0), -2, 2)
    es = diagonalize_floquet(fm)
    w = np.sort(es.quasienergies.real)
    expected = np.sort([e + k * 0.4 for e in (0.0, 0.5) for k in range(-2, 3)])
    np.testing.assert_allclose(w, expected, atol=1e-12)
    assert np.max(np.abs(es.quasienergies.imag)) < 1e-12


def test_biorthonormality_contract(ladder5):
    fm = assemble_floquet(ladder5, LaserField(0.4256, intensity_to_field(1e14)), -6, 4)
    es = diagonalize_floquet(fm)
    defect = np.max(np.abs(es.left @ es.right - np.eye(fm.dimension)))
    assert defect < 1e-10


def test_hermitian_limit_real_quasienergies(ladder5):
    fm = assemble_floquet(ladder5.widthless(), LaserField(0.4256, intensity_to_field(1e14)), -6, 4)
    es = diagonalize_floquet(fm)
    assert np.max(np.abs(es.quasienergies.imag)) < 1e-10


def test_quasienergy_ladder_partners(ladder5):
    omega = find_resonance(ladder5, 5e13)
    fm = assemble_floquet(ladder5, LaserField(omega, intensity_to_field(5e13)), -7, 5)
    es = diagonalize_floquet(fm)
    # pick an interior eigenstate (dominant on (e, -2)) and find its +omega partner
    row = fm.flat(FloquetIndex(1, -2))
    j = int(np.argmax(np.abs(es.right[row, :])))
    lam = es.quasienergies[j]
    others = np.delete(es.quasienergies, j)
    assert np.min(np.abs(others - (lam + omega))) < 1e-8


def test_truncation_convergence(ladder5):
    omega = find_resonance(ladder5, 2e13)
    vals = []
    for guard in (4, 5):
        pt = effective_point(ladder5, omega, intensity_wcm2=2e13, guard=guard)
        es = diagonalize_floquet(pt.fm)
        v, _, _ = p_dominant_eigenpairs(
            es, pt.partition, heff_eigs=np.linalg.eigvals(pt.heff1.matrix)
        )
        vals.append(np.sort_complex(v))
    assert np.max(np.abs(vals[1] - vals[0])) < 1e-9


# ---------------------------------------------------------------------------
# transition amplitude
# ---------------------------------------------------------------------------


def test_amplitude_identity_at_t0(ladder5):
    fm = assemble_floquet(ladder5, LaserField(0.4256, intensity_to_field(1e14)), -6, 4)
    es = diagonalize_floquet(fm)
    for lvl, expected in ((0, 1.0), (1, 0.0), (2, 0.0)):
        amp = floquet_transition_amplitude(es, FloquetIndex(0, 0), lvl, 0.0)
        assert abs(amp - expected) < 1e-10


def test_amplitude_free_atom_stays_zero(two_level):
    fm = assemble_floquet(two_level, LaserField(0.5, 0.0), -2, 2)
    es = diagonalize_floquet(fm)
    ts = np.linspace(0.0, 200.0, 64)
    amp = floquet_transition_amplitude(es, FloquetIndex(0, 0), 1, ts)
    assert np.max(np.abs(amp)) < 1e-12


def test_amplitude_two_level_rwa(two_level):
    # resonant weak drive: |U|^2 follows the textbook Rabi flop
    omega0 = 0.5
    ratio = 0.01
    e0 = ratio * omega0  # Rabi frequency = e0 * d with d = 1
    fm = assemble_floquet(two_level, LaserField(omega0, e0), -6, 6)
    es = diagonalize_floquet(fm)
    rabi = e0
    ts = np.linspace(0.0, 2.0 * np.pi / rabi, 400)
    amp = floquet_transition_amplitude(es, FloquetIndex(0, 0), 1, ts)
    ref = np.sin(0.5 * rabi * ts) ** 2
    assert np.max(np.abs(np.abs(amp) ** 2 - ref)) < 2.0 * ratio


def test_amplitude_matches_tdse(ladder5):
    """The spectral amplitude and the time-domain propagator must agree."""
    omega = find_resonance(ladder5, 5e13)
    e0 = intensity_to_field(5e13)
    pt = effective_point(ladder5, omega, intensity_wcm2=5e13, guard=6)
    es = diagonalize_floquet(pt.fm)
    cycle = 2.0 * np.pi / omega
    series = propagate(
        ladder5, LaserField(omega, e0),
        PropagatorConfig(t_max=3 * cycle, steps_per_cycle_min=1200, record_stride=10),
        initial_level=0, excited_level=1,
    )
    ts = series.times[1:]
    amp = floquet_transition_amplitude(es, FloquetIndex(0, 0), 1, ts)
    assert np.max(np.abs(np.abs(amp) ** 2 - series.pop_excited[1:])) < 2e-6


def test_exceptional_point_reported():
    """A self-orthogonal eigenvector pair must be reported, not regularized."""
    from crfloquet.errors import ExceptionalPointError
    from crfloquet.floquet import FloquetBasis, FloquetMatrix

    # complex-symmetric 2x2 with (a - d)^2 + 4 b^2 = 0: a genuine exceptional point
    basis = FloquetBasis(n_levels=1, k_min=0, k_max=1, omega=1.0, e0=0.0)
    fm = FloquetMatrix(basis, np.array([[0.0, 1.0], [1.0, 2.0j]], dtype=complex))
    with pytest.raises(ExceptionalPointError) as err:
        diagonalize_floquet(fm)
    assert len(err.value.eigenvalues) >= 1


def test_matrix_triplet_dump_roundtrip(tmp_path, ladder5):
    from crfloquet import read_matrix_triplets, write_matrix_triplets

    fm = assemble_floquet(ladder5, LaserField(0.4256, intensity_to_field(5e13)), -3, 2)
    path = tmp_path / "floquet_matrix.txt"
    write_matrix_triplets(path, fm)
    back = read_matrix_triplets(path)
    np.testing.assert_array_equal(back, fm.matrix)


def test_single_fourier_block_is_cycle_smooth(ladder5, resonant_point):
    """The demodulated k = -2 amplitude carried by the two essential dressed
    states alone is smooth on the cycle scale: all the 2-omega content lives
    in the counter-rotating eigenvector families."""
    pt = resonant_point
    es = diagonalize_floquet(pt.fm)
    omega = pt.omega
    basis = es.basis
    row = basis.flat(FloquetIndex(1, -2))
    src = basis.flat(FloquetIndex(0, 0))
    vals, vecs, lefts = p_dominant_eigenpairs(
        es, pt.partition, heff_eigs=np.linalg.eigvals(pt.heff1.matrix)
    )
    n_cyc = 64
    ts = np.linspace(0.0, n_cyc * 2.0 * np.pi / omega, n_cyc * 64, endpoint=False)
    lam_bar = vals.real.mean()
    demod = np.exp(1j * lam_bar * ts)  # remove the common dressed carrier
    window = np.hanning(ts.size)
    freqs = np.fft.fftfreq(ts.size, d=ts[1] - ts[0]) * 2.0 * np.pi
    band = np.abs(np.abs(freqs) - 2.0 * omega) < 0.2 * omega
    low = np.abs(freqs) < 0.5 * omega

    def band_ratio(amp):
        spec = np.abs(np.fft.fft(window * amp))
        return np.max(spec[band]) / np.max(spec[low])

    phases = np.exp(-1j * np.outer(vals, ts)) * lefts[:, src][:, None]
    ratio_essential = band_ratio((vecs[row, :] @ phases) * demod)
    phases_all = np.exp(-1j * np.outer(es.quasienergies, ts)) * es.left[:, src][:, None]
    ratio_full = band_ratio((es.right[row, :] @ phases_all) * demod)

    # essential pair: only window leakage; full sum: genuine 2-omega sidebands
    assert ratio_essential < 1e-6
    assert ratio_full > 100.0 * ratio_essential
