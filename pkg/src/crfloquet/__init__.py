"""crfloquet: counter-rotating Rabi dynamics of lossy few-level atoms.

The pipeline: an :mod:`atom_model` (complex energies, c-product dipoles)
feeds a block-tridiagonal Floquet matrix (:mod:`floquet`), which is reduced
to a non-Hermitian 2x2 effective Hamiltonian plus a reduced wave operator
(:mod:`effham`).  :mod:`dynamics` turns those into cycle-averaged and
sub-cycle populations with analytic counter-rotating envelopes, :mod:`tdse`
provides the independent time-domain oracle, and :mod:`scan` drives
(omega, intensity) parameter maps with cubic interpolation and resonance
searches.
"""

from .atom_model import (
    AtomModel,
    GridSpec,
    LaserField,
    Level,
    build_softcore_model,
    bundled_model,
    field_to_intensity,
    intensity_to_field,
    laser_field_from_dict,
    load_atom_model,
    save_atom_model,
)
from .dynamics import (
    CRAmplitudes,
    DressedStates,
    PopulationSeries,
    cr_amplitudes,
    cr_envelopes,
    cr_population_compact,
    cr_transition_amplitude,
    cycle_averaged_amplitudes,
    damping_ratio,
    dressed_diagonalize,
    m_max,
    max_excited_population,
    population_series,
    read_series_csv,
    write_series_csv,
)
from .effham import (
    CorrectionC,
    EffectiveBundle,
    EffectiveHamiltonian,
    Partition,
    ReducedWaveOp,
    correction_c,
    default_e_ref,
    effective_hamiltonian_from_dict,
    effective_hamiltonian_to_dict,
    effective_operators,
    heff0,
    heff1,
    heff1_complex_symmetric,
    heff_energy_dependent,
    make_partition,
    p_dominant_eigenpairs,
    reduced_wave_operator,
)
from .errors import (
    CRFloquetError,
    DimensionCapError,
    EigensolverError,
    ExceptionalPointError,
    ModelFormatError,
    OffResonanceError,
    ResonanceBoundaryError,
    ScanPartialFailure,
    SingularShiftError,
    StepSizeError,
)
from .floquet import (
    FloquetBasis,
    FloquetEigensystem,
    FloquetIndex,
    FloquetMatrix,
    assemble_floquet,
    diagonalize_floquet,
    floquet_transition_amplitude,
    photon_window,
    read_matrix_triplets,
    write_matrix_triplets,
)
from .scan import (
    HeffGrid,
    ParamGrid,
    PointResult,
    RegimeSurfaces,
    dressed_resonance,
    effective_point,
    interpolate_cr,
    interpolate_heff,
    regime_map,
    resonance_width,
    scan_heff,
)
from .tdse import PropagatorConfig, StateVector, modulation_depth, propagate

__version__ = "0.1.0"
