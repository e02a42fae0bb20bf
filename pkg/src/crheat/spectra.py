"""Ground-state structure of the composite Hamiltonians.

The interesting statics live here: with only the rotating coupling the
ground state is the bare product vacuum ``|0, 0>``, while any amount of
counter-rotating coupling pushes the true ground state away from the
product state.  Two numbers quantify that shift and both vanish iff the
counter-rotating coupling does:

* the decorrelation energy, the price of forcing the system into the
  product ground state, and
* the entanglement entropy of the qubit in the true ground state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonHermitianError, StateInvariantError
from .hilbert import Ket, LinOp, SpaceSpec, basis_ket, expect
from .models import RabiParams, SidebandParams

__all__ = [
    "EigenPair",
    "ground_state",
    "product_ground",
    "decorrelation_energy",
    "entanglement_entropy",
]

#: Gap below which the two lowest eigenvalues count as degenerate.
DEGENERACY_TOL = 1e-10

#: Eigenvalues of a reduced state below this are treated as exact zeros
#: when evaluating ``-p ln p``.
ENTROPY_EIG_TOL = 1e-14

_PHASE_TOL = 1e-10
_NORM_TOL = 1e-10


@dataclass(frozen=True)
class EigenPair:
    """Lowest eigenvalue and eigenvector of a Hermitian operator.

    The eigenvector's first amplitude of magnitude above ``1e-10`` is
    rotated to be real and positive, which pins the global phase.
    ``degenerate`` flags a gap to the next level below ``1e-10``; the
    reported state is then the eigenvector of the degenerate block whose
    support starts at the lowest basis index.
    """

    energy: float
    state: Ket
    degenerate: bool = False


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    mags = np.abs(vec)
    idx = np.argmax(mags > _PHASE_TOL)
    if mags[idx] <= _PHASE_TOL:
        # All amplitudes tiny: nothing sensible to pin, leave as is.
        return vec
    phase = vec[idx] / mags[idx]
    out = vec / phase
    # Stamp out the residual imaginary dust on the pivot entry.
    out[idx] = out[idx].real
    return out


def ground_state(h: LinOp) -> EigenPair:
    """Lowest eigenpair of a Hermitian operator.

    Parameters
    ----------
    h : LinOp
        Operator to diagonalise.  Must be Hermitian: the entrywise
        defect ``max |H - H^dagger|`` is checked against
        ``1e-12 * max(1, max |H|)`` and a violation raises
        :class:`~crheat.errors.NonHermitianError`.

    Returns
    -------
    EigenPair
        Ground energy, phase-fixed normalised ground vector, and a
        degeneracy flag (see :class:`EigenPair`).
    """
    scale = float(np.abs(h.vals).max()) if h.nnz else 0.0
    defect = h.hermiticity_defect()
    if defect > 1e-12 * max(1.0, scale):
        raise NonHermitianError(
            f"operator is not Hermitian: defect {defect:.3e}"
        )
    dense = h.to_dense()
    evals, evecs = np.linalg.eigh(dense)
    gap = float(evals[1] - evals[0]) if h.dim > 1 else np.inf
    degenerate = gap <= DEGENERACY_TOL
    if degenerate:
        block = np.flatnonzero(evals - evals[0] <= DEGENERACY_TOL)
        # Deterministic representative: the block vector whose support
        # starts at the lowest basis index (ties broken by block order).
        starts = [
            int(np.argmax(np.abs(evecs[:, j]) > _PHASE_TOL)) for j in block
        ]
        vec = evecs[:, block[int(np.argmin(starts))]]
    else:
        vec = evecs[:, 0]
    vec = _fix_phase(vec / np.linalg.norm(vec))
    return EigenPair(float(evals[0]), Ket(h.dim, vec), degenerate)


def product_ground(params: RabiParams | SidebandParams) -> Ket:
    """Ground state of the uncoupled (product) model: ``|0, 0>``.

    For the dipole model both local frequencies are positive, so the
    bare vacuum is the unique uncoupled ground state.  For the sideband
    model this additionally requires ``delta <= 0`` (qubit level not
    inverted in the rotating frame); other detunings have no natural
    product reference and raise ``ValueError``.
    """
    if isinstance(params, SidebandParams) and params.delta > 0:
        raise ValueError(
            "product ground state undefined for delta > 0 (inverted qubit level)"
        )
    return basis_ket(params.space().total_dim, 0)


def decorrelation_energy(h: LinOp, product: Ket, ground: EigenPair) -> float:
    """Energy cost of the product state relative to the true ground state.

    ``delta_E = <product| H |product> - E_ground``; non-negative by the
    variational principle whenever ``ground`` really is the lowest
    eigenpair of ``h``.  A negative value beyond rounding slack means the
    inputs are inconsistent and raises ``ValueError``.
    """
    if abs(product.norm() - 1.0) > _NORM_TOL:
        raise StateInvariantError("product state must be normalised")
    e_prod = expect(h, product).real
    delta = e_prod - ground.energy
    scale = max(1.0, abs(e_prod), abs(ground.energy))
    if delta < -1e-10 * scale:
        raise ValueError(
            f"product-state energy {e_prod!r} lies below the claimed ground "
            f"energy {ground.energy!r}; inconsistent inputs"
        )
    return max(delta, 0.0)


def entanglement_entropy(psi: Ket, space: SpaceSpec) -> float:
    """Von Neumann entropy (natural log) of the qubit in a pure state.

    The reduced state of the qubit is a 2x2 matrix, so the entropy is
    computed from its two eigenvalues; values below ``1e-14`` are
    treated as exact zeros.  The result lies in ``[0, ln 2]`` and is
    zero iff ``psi`` is a product state across the qubit-boson split.
    """
    if psi.dim != space.total_dim:
        raise StateInvariantError(
            f"state dim {psi.dim} != space dim {space.total_dim}"
        )
    if abs(psi.norm() - 1.0) > _NORM_TOL:
        raise StateInvariantError("entropy requires a normalised state")
    # rho_A[q, q'] = sum_n psi[q, n] conj(psi[q', n])
    v = psi.amplitudes.reshape(2, space.fock_cutoff)
    rho_a = v @ v.conj().T
    probs = np.linalg.eigvalsh(rho_a)
    probs = probs[probs > ENTROPY_EIG_TOL]
    s = float(-np.sum(probs * np.log(probs)))
    return max(s, 0.0) + 0.0  # + 0.0 turns -0.0 into +0.0
