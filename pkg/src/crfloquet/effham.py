"""Effective two-level reduction of a Floquet matrix.

P-space holds exactly two essential atom-photon states; everything else is
Q-space, folded in through the resolvent (E - QHQ)^{-1}.  All inverses go
through LU factorizations (banded when the Q ordering keeps the matrix
banded, dense otherwise), never through explicit matrix inversion.

The exposed objects:

* ``heff_energy_dependent`` -- PHP + PVQ (E - QHQ)^{-1} QVP, the exact
  nonlinear reduction.
* ``heff0`` -- the pole approximation at a fixed reference energy.
* ``correction_c`` -- the linear-expansion correction PVQ (E0 - QHQ)^{-2} QVP.
* ``heff1`` -- the energy-independent first-order operator
  (P + C)^{-1} (H0 + E0 C); generally non-symmetric.
* ``heff1_complex_symmetric`` -- its complex-symmetric similarity twin.
* ``reduced_wave_operator`` -- chi = (E0 - QHQ)^{-1} QVP, the map from
  essential amplitudes to Q-space amplitudes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import get_lapack_funcs

from .errors import EigensolverError, SingularShiftError
from .floquet import FloquetEigensystem, FloquetIndex, FloquetMatrix

PIVOT_RATIO_TOL = 1e-12
_DET_TOL = 1e-14


@dataclass(frozen=True)
class Partition:
    """P/Q split of a Floquet basis around two essential states."""

    basis: object
    ground: FloquetIndex
    excited: FloquetIndex
    p_flat: tuple
    q_flat: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q_flat, dtype=int)
        q.setflags(write=False)
        object.__setattr__(self, "q_flat", q)

    @property
    def q_size(self) -> int:
        return self.q_flat.size

    def q_position(self, idx: FloquetIndex) -> int:
        """Row of chi (position inside Q) for a given atom-photon state."""
        flat = self.basis.flat(idx)
        pos = int(np.searchsorted(self.q_flat, flat))
        if pos >= self.q_flat.size or self.q_flat[pos] != flat:
            raise IndexError(f"{idx} is not a Q-space state of this partition")
        return pos


@dataclass(frozen=True)
class EffectiveHamiltonian:
    matrix: np.ndarray
    order: int
    e_ref: complex
    partition: Partition

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class CorrectionC:
    matrix: np.ndarray
    e_ref: complex

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class ReducedWaveOp:
    """|Q| x 2 matrix chi; column 0 responds to the ground essential state,
    column 1 to the excited one."""

    matrix: np.ndarray
    e_ref: complex
    partition: Partition

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def entry(self, idx: FloquetIndex, column: int) -> complex:
        return complex(self.matrix[self.partition.q_position(idx), column])

    @property
    def ground_column_norm(self) -> float:
        """Norm of the ground column; small when the ground state decouples from Q."""
        return float(np.linalg.norm(self.matrix[:, 0]))


def make_partition(fm: FloquetMatrix, ground: FloquetIndex, excited: FloquetIndex) -> Partition:
    basis = fm.basis
    if ground == excited:
        raise ValueError("essential states must be distinct")
    g, e = basis.flat(ground), basis.flat(excited)  # raises IndexError if outside
    mask = np.ones(basis.dimension, dtype=bool)
    mask[[g, e]] = False
    return Partition(basis, ground, excited, (g, e), np.nonzero(mask)[0])


def default_e_ref(fm: FloquetMatrix, partition: Partition) -> complex:
    """Mean of the two unperturbed essential diagonal entries."""
    g, e = partition.p_flat
    return complex(0.5 * (fm.matrix[g, g] + fm.matrix[e, e]))


class _ShiftedQSolver:
    """LU factorization of (E - QHQ) with pivot-health checks.

    Uses LAPACK's banded factorization when the Q block is genuinely banded
    (the usual case: deleting the two essential rows/columns of a block
    tridiagonal matrix only shrinks bandwidths), otherwise a dense LU with
    partial pivoting.
    """

    def __init__(self, qhq: np.ndarray, e: complex, pivot_tol: float = PIVOT_RATIO_TOL):
        self.e = complex(e)
        self.qhq = qhq
        n = qhq.shape[0]
        a = -qhq.copy()
        a[np.diag_indices(n)] += self.e

        rows, cols = np.nonzero(a)
        band = int(np.max(np.abs(rows - cols))) if rows.size else 0
        self._banded = 0 < band and (3 * band + 1) < n
        if self._banded:
            kl = ku = band
            ab = np.zeros((2 * kl + ku + 1, n), dtype=complex)
            for offset in range(-kl, ku + 1):
                diag = np.diagonal(a, offset)
                ab[kl + ku - offset, max(offset, 0): max(offset, 0) + diag.size] = diag
            gbtrf, gbtrs = get_lapack_funcs(("gbtrf", "gbtrs"), (ab,))
            lu, ipiv, info = gbtrf(ab, kl, ku)
            self._fact = (lu, ipiv, kl, ku, gbtrs)
            udiag = np.abs(lu[kl + ku, :])
            self._info = info
        else:
            lu, piv = None, None
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
                info = 0
            except scipy.linalg.LinAlgError:
                info = 1
            self._fact = (lu, piv)
            udiag = np.abs(np.diag(lu)) if lu is not None else np.zeros(n)
            self._info = info

        umax = float(np.max(udiag)) if udiag.size else 0.0
        self.pivot_ratio = float(np.min(udiag) / umax) if umax > 0.0 else 0.0
        if self._info > 0 or self.pivot_ratio < pivot_tol:
            raise SingularShiftError(
                f"(E - QHQ) is singular or near-singular at E = {self.e} "
                f"(pivot ratio {self.pivot_ratio:.3e}); nearest Q-space eigenvalue "
                f"is approximately {self._nearest_estimate()}",
                nearest_eigenvalue=self._nearest_estimate(),
            )

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._banded:
            lu, ipiv, kl, ku, gbtrs = self._fact
            x, info = gbtrs(lu, kl, ku, rhs, ipiv)
            if info != 0:
                raise SingularShiftError(f"banded solve failed with info = {info}")
            return x
        lu, piv = self._fact
        return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)

    def _nearest_estimate(self):
        """Inverse-iteration estimate of the Q eigenvalue closest to E.

        Falls back to E itself when the factorization is too singular to
        iterate (then E already coincides with a Q eigenvalue)."""
        if self._info > 0:
            return self.e
        n = self.qhq.shape[0]
        y = np.full(n, 1.0 / np.sqrt(n), dtype=complex)
        try:
            for _ in range(3):
                y = self.solve(y)
                if not np.all(np.isfinite(y)):
                    return self.e
                y = y / np.linalg.norm(y)
        except (SingularShiftError, FloatingPointError):
            return self.e
        num = np.vdot(y, self.qhq @ y)
        den = np.vdot(y, y)
        if den == 0.0 or not np.isfinite(num) or not np.isfinite(den):
            return self.e
        return complex(num / den)


def _split(fm: FloquetMatrix, partition: Partition):
    h = fm.matrix
    p = list(partition.p_flat)
    q = partition.q_flat
    php = h[np.ix_(p, p)]
    pvq = h[np.ix_(p, q)]
    qvp = h[np.ix_(q, p)]
    qhq = h[np.ix_(q, q)]
    return php, pvq, qvp, qhq


def heff_energy_dependent(fm: FloquetMatrix, partition: Partition, e: complex) -> np.ndarray:
    """Exact energy-dependent reduction PHP + PVQ (E - QHQ)^{-1} QVP."""
    php, pvq, qvp, qhq = _split(fm, partition)
    solver = _ShiftedQSolver(qhq, e)
    return php + pvq @ solver.solve(qvp)


@dataclass(frozen=True)
class EffectiveBundle:
    """Everything the pole-approximation solve produces in one pass."""

    e_ref: complex
    h0: EffectiveHamiltonian
    h1: EffectiveHamiltonian
    corr: CorrectionC
    chi: ReducedWaveOp
    diagnostics: dict = field(default_factory=dict)


def effective_operators(
    fm: FloquetMatrix, partition: Partition, e_ref: complex | None = None
) -> EffectiveBundle:
    """Compute chi, H^(0), C and H^(1) from a single LU factorization."""
    if e_ref is None:
        e_ref = default_e_ref(fm, partition)
    php, pvq, qvp, qhq = _split(fm, partition)
    solver = _ShiftedQSolver(qhq, e_ref)

    chi_m = solver.solve(qvp)            # (E0 - QHQ)^{-1} QVP
    h0_m = php + pvq @ chi_m
    c_m = pvq @ solver.solve(chi_m)      # PVQ (E0 - QHQ)^{-2} QVP

    m = np.eye(2, dtype=complex) + c_m
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) < _DET_TOL:
        raise SingularShiftError(
            f"(P + C) nearly singular (|det| = {abs(det):.3e}); "
            "the linear energy expansion is invalid here"
        )
    h1_m = np.linalg.solve(m, h0_m + e_ref * c_m)

    chi = ReducedWaveOp(chi_m, e_ref, partition)
    diagnostics = {
        "pivot_ratio": solver.pivot_ratio,
        "cond_pc": float(np.linalg.cond(m)),
        "chi_ground_norm": chi.ground_column_norm,
    }
    return EffectiveBundle(
        e_ref=complex(e_ref),
        h0=EffectiveHamiltonian(h0_m, 0, complex(e_ref), partition),
        h1=EffectiveHamiltonian(h1_m, 1, complex(e_ref), partition),
        corr=CorrectionC(c_m, complex(e_ref)),
        chi=chi,
        diagnostics=diagnostics,
    )


def heff0(fm: FloquetMatrix, partition: Partition, e_ref: complex | None = None) -> EffectiveHamiltonian:
    """Pole approximation: the energy-dependent operator frozen at e_ref."""
    if e_ref is None:
        e_ref = default_e_ref(fm, partition)
    return EffectiveHamiltonian(
        heff_energy_dependent(fm, partition, e_ref), 0, complex(e_ref), partition
    )


def correction_c(fm: FloquetMatrix, partition: Partition, e_ref: complex | None = None) -> CorrectionC:
    """Linear-expansion correction PVQ (e_ref - QHQ)^{-2} QVP via two sequential solves."""
    if e_ref is None:
        e_ref = default_e_ref(fm, partition)
    _, pvq, qvp, qhq = _split(fm, partition)
    solver = _ShiftedQSolver(qhq, e_ref)
    return CorrectionC(pvq @ solver.solve(solver.solve(qvp)), complex(e_ref))


def heff1(fm: FloquetMatrix, partition: Partition, e_ref: complex | None = None) -> EffectiveHamiltonian:
    """First-order energy-independent effective Hamiltonian (generally non-symmetric)."""
    return effective_operators(fm, partition, e_ref).h1


def reduced_wave_operator(
    fm: FloquetMatrix, partition: Partition, e_ref: complex | None = None
) -> ReducedWaveOp:
    if e_ref is None:
        e_ref = default_e_ref(fm, partition)
    _, _, qvp, qhq = _split(fm, partition)
    solver = _ShiftedQSolver(qhq, e_ref)
    return ReducedWaveOp(solver.solve(qvp), complex(e_ref), partition)


def _sqrtm_2x2(s: np.ndarray) -> np.ndarray:
    """Principal square root of a 2x2 matrix.

    Eigendecomposition when well conditioned; otherwise the closed-form
    (S + sqrt(det) I) / sqrt(tr + 2 sqrt(det)), which remains valid in the
    degenerate (defective) limit.
    """
    evals, vecs = np.linalg.eig(s)
    for lam in evals:
        if lam.real < 0.0 and abs(lam.imag) < 1e-14 * max(abs(lam), 1.0):
            raise EigensolverError(
                f"(P + C) has an eigenvalue on the negative real axis ({lam}); "
                "no principal square root"
            )
    if np.linalg.cond(vecs) < 1e8:
        root = vecs @ np.diag(np.sqrt(evals)) @ np.linalg.inv(vecs)
    else:
        sdet = np.sqrt(s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0])
        tau = np.sqrt(s[0, 0] + s[1, 1] + 2.0 * sdet)
        if abs(tau) < 1e-14:
            raise EigensolverError("degenerate (P + C) with vanishing trace branch")
        root = (s + sdet * np.eye(2)) / tau
    if np.max(np.abs(root @ root - s)) > 1e-10 * max(np.max(np.abs(s)), 1.0):
        raise EigensolverError("2x2 square root failed its self-check (branch cut)")
    return root


def heff1_complex_symmetric(h1: EffectiveHamiltonian, corr: CorrectionC) -> np.ndarray:
    """Similarity transform of H^(1) by (P + C)^{1/2}: same eigenvalues,
    complex-symmetric matrix."""
    if h1.order != 1:
        raise ValueError("expected an order-1 effective Hamiltonian")
    s = np.eye(2, dtype=complex) + corr.matrix
    root = _sqrtm_2x2(s)
    return root @ h1.matrix @ np.linalg.inv(root)


def effective_hamiltonian_to_dict(heff: EffectiveHamiltonian, labels=("ground", "excited")) -> dict:
    """JSON-ready dump: order, reference energy, four complex entries, labels."""
    m = heff.matrix
    return {
        "order": heff.order,
        "e_ref": {"re": heff.e_ref.real, "im": heff.e_ref.imag},
        "matrix": [
            {"row": i, "col": j, "re": m[i, j].real, "im": m[i, j].imag}
            for i in range(2)
            for j in range(2)
        ],
        "partition": list(labels),
    }


def effective_hamiltonian_from_dict(data: dict) -> EffectiveHamiltonian:
    m = np.zeros((2, 2), dtype=complex)
    for entry in data["matrix"]:
        m[int(entry["row"]), int(entry["col"])] = complex(entry["re"], entry["im"])
    e_ref = complex(data["e_ref"]["re"], data["e_ref"]["im"])
    return EffectiveHamiltonian(m, int(data["order"]), e_ref, None)


def p_dominant_eigenpairs(es: FloquetEigensystem, partition: Partition, heff_eigs=None):
    """Pick the two full eigenvectors with largest summed squared c-overlap on
    the essential basis states.

    Near-ties are broken by eigenvalue proximity to ``heff_eigs`` when given.
    Returns (values, right_columns, left_rows) with the pair sorted by
    descending real part.
    """
    g, e = partition.p_flat
    score = np.abs(es.right[g, :]) ** 2 + np.abs(es.right[e, :]) ** 2
    cand = np.argsort(score)[::-1][:4]
    if heff_eigs is not None and len(cand) > 2 and score[cand[2]] > 0.5 * score[cand[1]]:
        picked = []
        for lam in np.asarray(heff_eigs):
            j = min((c for c in cand if c not in picked), key=lambda c: abs(es.quasienergies[c] - lam))
            picked.append(j)
        idx = np.array(picked)
    else:
        idx = cand[:2]
    order = np.argsort(es.quasienergies[idx].real)[::-1]
    idx = idx[order]
    return es.quasienergies[idx], es.right[:, idx], es.left[idx, :]
