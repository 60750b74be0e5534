"""Complex-scaled Floquet matrices over the (level, photon-index) product basis.

The matrix is block tridiagonal: diagonal block k holds diag(E_n) + k*omega,
and blocks between adjacent photon indices hold (E0/2) * d in the length
gauge.  Everything stays complex-symmetric, so left eigenvectors are the
unconjugated transposes of c-normalized right eigenvectors away from
exceptional points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .atom_model import AtomModel, LaserField
from .errors import DimensionCapError, EigensolverError, ExceptionalPointError, ModelFormatError

DEFAULT_DIMENSION_CAP = 20000


@dataclass(frozen=True)
class FloquetIndex:
    """One atom-photon basis state: an atomic level and a photon index k."""

    level: int
    photons: int


@dataclass(frozen=True)
class FloquetBasis:
    """Layout of the product basis: flat index = (k - k_min) * n_levels + level."""

    n_levels: int
    k_min: int
    k_max: int
    omega: float
    e0: float

    @property
    def dimension(self) -> int:
        return self.n_levels * (self.k_max - self.k_min + 1)

    def contains(self, idx: FloquetIndex) -> bool:
        return 0 <= idx.level < self.n_levels and self.k_min <= idx.photons <= self.k_max

    def flat(self, idx: FloquetIndex) -> int:
        if not self.contains(idx):
            raise IndexError(f"{idx} outside basis (k in [{self.k_min}, {self.k_max}])")
        return (idx.photons - self.k_min) * self.n_levels + idx.level

    def index(self, flat: int) -> FloquetIndex:
        k, level = divmod(int(flat), self.n_levels)
        return FloquetIndex(level=level, photons=k + self.k_min)


@dataclass(frozen=True)
class FloquetMatrix:
    basis: FloquetBasis
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def omega(self) -> float:
        return self.basis.omega

    def flat(self, idx: FloquetIndex) -> int:
        return self.basis.flat(idx)


@dataclass(frozen=True)
class FloquetEigensystem:
    """Complete bi-orthonormal eigensystem: left @ right = identity."""

    basis: FloquetBasis
    quasienergies: np.ndarray
    right: np.ndarray   # columns are right eigenvectors
    left: np.ndarray    # rows are left eigenvectors

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def flat(self, idx: FloquetIndex) -> int:
        return self.basis.flat(idx)


def photon_window(order: int = 2, guard: int = 4) -> tuple:
    """Default k-range for an m-photon target: covers the essential block at
    -order, its counter-rotating partners at 0 and -2*order, plus guard blocks."""
    return (-order - guard, guard)


def assemble_floquet(
    atom: AtomModel,
    field: LaserField,
    k_min: int,
    k_max: int,
    dimension_cap: int = DEFAULT_DIMENSION_CAP,
) -> FloquetMatrix:
    """Build the dense block-tridiagonal Floquet matrix for a monochromatic field.

    Parameters
    ----------
    atom : AtomModel
    field : LaserField
        Must carry a rectangular envelope; time-dependent envelopes do not fit
        in a time-independent Floquet matrix.
    k_min, k_max : int
        Photon-index window, k_min < k_max.
    dimension_cap : int
        Guard against runaway basis sizes.
    """
    if field.envelope != "rect":
        raise ModelFormatError("Floquet assembly requires a rectangular envelope")
    if k_min >= k_max:
        raise ModelFormatError(f"need k_min < k_max, got [{k_min}, {k_max}]")
    basis = FloquetBasis(atom.n_levels, k_min, k_max, field.omega, field.e0)
    dim = basis.dimension
    if dim > dimension_cap:
        raise DimensionCapError(
            f"Floquet dimension {dim} exceeds cap {dimension_cap}; "
            "this usually signals a runaway photon window"
        )

    n = atom.n_levels
    h = np.zeros((dim, dim), dtype=complex)
    energies = atom.energies
    coupling = 0.5 * field.e0 * atom.dipole
    for kb, k in enumerate(range(k_min, k_max + 1)):
        sl = slice(kb * n, (kb + 1) * n)
        h[sl, sl] = np.diag(energies + k * field.omega)
        if k < k_max:
            sl_up = slice((kb + 1) * n, (kb + 2) * n)
            h[sl, sl_up] = coupling
            h[sl_up, sl] = coupling
    return FloquetMatrix(basis, h)


def _is_complex_symmetric(m: np.ndarray, tol: float = 1e-12) -> bool:
    scale = max(np.max(np.abs(m)), 1.0)
    return np.max(np.abs(m - m.T)) <= tol * scale


def diagonalize_floquet(
    fm: FloquetMatrix,
    biorth_tol: float = 1e-10,
    cnorm_tol: float = 1e-12,
    residual_tol: float = 1e-9,
) -> FloquetEigensystem:
    """Full dense eigendecomposition with bi-orthonormal left/right vectors.

    For complex-symmetric input the left vectors are taken as the unconjugated
    transposes of the c-normalized right vectors; if that pairing fails the
    bi-orthonormality tolerance (near-degenerate clusters), the left set is
    recomputed by inversion.  A c-norm below ``cnorm_tol`` signals a
    self-orthogonal eigenvector (exceptional point) and is reported rather
    than regularized.
    """
    h = fm.matrix
    try:
        w, v = scipy.linalg.eig(h)
    except scipy.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver did not converge: {exc}") from None

    order = np.argsort(w.real, kind="stable")
    w, v = w[order], v[:, order]

    left = None
    cnorms = np.einsum("ij,ij->j", v, v)
    if _is_complex_symmetric(h):
        bad = np.abs(cnorms) < cnorm_tol
        if np.any(bad):
            raise ExceptionalPointError(
                "self-orthogonal eigenvector(s): c-norm below "
                f"{cnorm_tol:g} at eigenvalue(s) {w[bad][:4]}",
                eigenvalues=w[bad],
            )
        v = v / np.sqrt(cnorms)[None, :]
        left = v.T
        if np.max(np.abs(left @ v - np.eye(fm.dimension))) > biorth_tol:
            left = None  # fall through to inversion
    if left is None:
        try:
            left = scipy.linalg.inv(v)
        except scipy.linalg.LinAlgError as exc:
            raise EigensolverError(f"left-eigenvector inversion failed: {exc}") from None

    defect = np.max(np.abs(left @ v - np.eye(fm.dimension)))
    if defect > biorth_tol:
        # a floating-point-perturbed exceptional point shows up as nearly
        # self-orthogonal vectors (healthy unit-norm columns have c-norms
        # of order one, a perturbed degenerate pair ~sqrt(eps))
        near = np.abs(cnorms) < 1e-6
        if np.any(near):
            raise ExceptionalPointError(
                f"bi-orthonormality defect {defect:.3e}: nearly self-orthogonal "
                f"pair(s) at eigenvalue(s) {w[near][:4]} "
                f"(c-norm {np.min(np.abs(cnorms)):.2e})",
                eigenvalues=w[near],
            )
        raise EigensolverError(f"bi-orthonormality defect {defect:.3e} exceeds {biorth_tol:g}")

    scale = max(np.max(np.abs(h)), 1.0)
    residual = np.max(np.abs(h @ v - v * w[None, :])) / scale
    if residual > residual_tol:
        raise EigensolverError(f"eigenpair residual {residual:.3e} exceeds {residual_tol:g}")

    return FloquetEigensystem(fm.basis, w, v, left)


def write_matrix_triplets(path, fm: FloquetMatrix) -> None:
    """Dump the nonzero matrix entries as textual (row, col, re, im) triplets."""
    h = fm.matrix
    rows, cols = np.nonzero(h)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dimension {fm.dimension} n_levels {fm.basis.n_levels} "
                 f"k_min {fm.basis.k_min} k_max {fm.basis.k_max} "
                 f"omega {float(fm.basis.omega):.17g} e0 {float(fm.basis.e0):.17g}\n")
        for r, c in zip(rows, cols):
            v = h[r, c]
            fh.write(f"{r} {c} {float(v.real):.17g} {float(v.imag):.17g}\n")


def read_matrix_triplets(path) -> np.ndarray:
    """Read a triplet dump back into a dense complex matrix."""
    entries = []
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                parts = line.split()
                dim = int(parts[parts.index("dimension") + 1])
                continue
            r, c, re, im = line.split()
            entries.append((int(r), int(c), float(re), float(im)))
    if dim is None:
        dim = 1 + max(max(r, c) for r, c, _, _ in entries)
    m = np.zeros((dim, dim), dtype=complex)
    for r, c, re, im in entries:
        m[r, c] = complex(re, im)
    return m


def floquet_transition_amplitude(
    es: FloquetEigensystem,
    from_index: FloquetIndex,
    to_level: int,
    t,
):
    """Exact transition amplitude U(t) between atomic states via the spectral sum.

    U(t) = sum_k <to,k| exp(-i H t) |from> e^{i k omega t}, evaluated with the
    bi-orthonormal eigensystem.  ``t`` may be a scalar or an array; times must
    be non-negative.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0.0):
        raise ValueError("transition amplitude requires t >= 0")
    basis = es.basis
    src = basis.flat(from_index)
    if not (0 <= to_level < basis.n_levels):
        raise IndexError(f"to_level {to_level} outside 0..{basis.n_levels - 1}")

    weights = es.left[:, src]                       # <~j|from>
    phases = np.exp(-1j * np.outer(es.quasienergies, t_arr)) * weights[:, None]
    ks = np.arange(basis.k_min, basis.k_max + 1)
    rows = np.array([basis.flat(FloquetIndex(to_level, int(k))) for k in ks])
    block = es.right[rows, :] @ phases              # (n_k, n_t)
    fourier = np.exp(1j * np.outer(ks, basis.omega * t_arr))
    amp = np.sum(block * fourier, axis=0)
    return amp[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else amp
