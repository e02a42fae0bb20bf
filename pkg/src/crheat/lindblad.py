"""Deterministic master-equation backend.

The density matrix evolves under

    d rho / dt = -i [H, rho]
                 + sum_k gamma_k ( L_k rho L_k^dag
                                   - 1/2 {L_k^dag L_k, rho} )

Three entry points:

* :func:`lindblad_rhs` evaluates the right-hand side once,
* :func:`evolve` integrates it with an embedded Dormand-Prince 5(4)
  pair (adaptive step, step statistics reported),
* :func:`steady_state` solves ``M vec(rho) = 0`` with the trace pinned,
  where ``M`` is the vectorised generator from :func:`build_liouvillian`.

Vectorisation is column-stacking: ``vec`` concatenates matrix columns
(Fortran order), under which ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as _sp

from .errors import (
    DimensionMismatchError,
    NumericalError,
    StateInvariantError,
    SteadyStateError,
    StepUnderflowError,
)
from .hilbert import DensityOp, LinOp
from .models import JumpChannel

__all__ = [
    "EvolutionResult",
    "LiouvillianMatrix",
    "lindblad_rhs",
    "evolve",
    "build_liouvillian",
    "steady_state",
]

#: Allowed range for the relative integration tolerance.
REL_TOL_RANGE = (1e-12, 1e-4)

#: Monitored bound on |Tr rho - 1| over a full evolution.
TRACE_DRIFT_TOL = 1e-8

#: Residual bound ||M vec(rho)||_inf for an accepted steady state.
STEADY_RESIDUAL_TOL = 1e-8


def _check_dims(h: LinOp, channels: Sequence[JumpChannel]) -> int:
    d = h.dim
    for k, ch in enumerate(channels):
        if ch.operator.dim != d:
            raise DimensionMismatchError(
                f"channel {k} operator dim {ch.operator.dim} != Hamiltonian dim {d}"
            )
    return d


class _Rhs:
    """Dense right-hand side with the channel algebra precomputed.

    Channels with zero rate contribute nothing and are skipped.
    """

    def __init__(self, h: LinOp, channels: Sequence[JumpChannel]):
        self.dim = _check_dims(h, channels)
        self.h = h.to_dense()
        self.terms = []
        for ch in channels:
            if ch.rate == 0.0:
                continue
            l = ch.operator.to_dense()
            ld = l.conj().T
            self.terms.append((ch.rate, l, ld, ld @ l))

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = -1j * (self.h @ rho - rho @ self.h)
        for rate, l, ld, ldl in self.terms:
            out += rate * (l @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl))
        return out


def lindblad_rhs(
    h: LinOp, channels: Sequence[JumpChannel], rho: DensityOp | np.ndarray
) -> np.ndarray:
    """One evaluation of the master-equation right-hand side.

    ``rho`` may be a :class:`~crheat.hilbert.DensityOp` or a raw square
    array (the generator is linear, so it acts on any matrix, Hermitian
    or not).  Returns a dense complex matrix; for a Hermitian input it
    is traceless and Hermitian up to rounding.
    """
    rhs = _Rhs(h, channels)
    mat = rho.matrix if isinstance(rho, DensityOp) else np.asarray(rho, dtype=complex)
    if mat.shape != (rhs.dim, rhs.dim):
        raise DimensionMismatchError(
            f"state shape {mat.shape} incompatible with dimension {rhs.dim}"
        )
    return rhs(mat)


@dataclass(frozen=True)
class EvolutionResult:
    """Sampled trajectory of a master-equation integration.

    ``states[i]`` is the (validated) density operator at ``times[i]``.
    ``steps_accepted`` / ``steps_rejected`` count the adaptive
    integrator's step-size controller decisions over the whole run.
    """

    times: np.ndarray
    states: tuple[DensityOp, ...]
    steps_accepted: int
    steps_rejected: int

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) != len(self.states):
            raise DimensionMismatchError("times and states must align")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("sample times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", tuple(self.states))


# Dormand-Prince 5(4) tableau (FSAL: the 7th stage is the next step's first).
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def evolve(
    h: LinOp,
    channels: Sequence[JumpChannel],
    rho0: DensityOp,
    t_final: float,
    *,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    sample_times: Sequence[float] | None = None,
) -> EvolutionResult:
    """Integrate the master equation from ``rho0`` over ``[0, t_final]``.

    Parameters
    ----------
    h, channels : LinOp, sequence of JumpChannel
        Generator pieces; dimensions must agree with ``rho0``.
    t_final : float
        End time, positive.
    rel_tol, abs_tol : float
        Local error control of the embedded 5(4) pair.  ``rel_tol`` must
        lie in ``[1e-12, 1e-4]``; the error estimate of component ``y_i``
        is weighted by ``abs_tol + rel_tol * |y_i|``.
    sample_times : sequence of float, optional
        Strictly increasing instants in ``[0, t_final]`` at which the
        state is recorded (the integrator lands on them exactly).  By
        default every accepted step is recorded, including ``t = 0``.

    Returns
    -------
    EvolutionResult

    Raises
    ------
    StepUnderflowError
        If the controller drives the step below resolvable size.
    NumericalError
        If a monitored invariant (trace within ``1e-8``, Hermiticity,
        positivity of recorded states) fails along the way.
    """
    if not (t_final > 0 and np.isfinite(t_final)):
        raise ValueError(f"t_final must be positive and finite, got {t_final!r}")
    if not (REL_TOL_RANGE[0] <= rel_tol <= REL_TOL_RANGE[1]):
        raise ValueError(
            f"rel_tol must lie in [{REL_TOL_RANGE[0]:g}, {REL_TOL_RANGE[1]:g}]"
        )
    if not (abs_tol > 0 and np.isfinite(abs_tol)):
        raise ValueError("abs_tol must be positive and finite")
    rhs = _Rhs(h, channels)
    d = rhs.dim
    if rho0.dim != d:
        raise DimensionMismatchError(f"state dim {rho0.dim} != generator dim {d}")

    samples = None
    if sample_times is not None:
        samples = np.asarray(list(sample_times), dtype=float)
        if samples.size == 0:
            raise ValueError("sample_times must not be empty")
        if samples.size > 1 and not np.all(np.diff(samples) > 0):
            raise ValueError("sample_times must be strictly increasing")
        if samples[0] < 0 or samples[-1] > t_final * (1 + 1e-12):
            raise ValueError("sample_times must lie within [0, t_final]")

    def f(y: np.ndarray) -> np.ndarray:
        return rhs(y.reshape(d, d)).ravel()

    y = rho0.matrix.astype(np.complex128).ravel()
    t = 0.0
    times: list[float] = []
    states: list[DensityOp] = []

    def record(at: float, vec: np.ndarray) -> None:
        mat = vec.reshape(d, d)
        tr_err = abs(np.trace(mat) - 1.0)
        if tr_err > TRACE_DRIFT_TOL:
            raise NumericalError(
                f"trace drifted by {tr_err:.3e} > {TRACE_DRIFT_TOL} at t = {at:g}"
            )
        try:
            state = DensityOp(d, mat)
        except StateInvariantError as exc:
            raise NumericalError(
                f"state invariant violated at t = {at:g}: {exc}"
            ) from exc
        times.append(at)
        states.append(state)

    ptr = 0
    if samples is None:
        record(0.0, y)
    else:
        while ptr < samples.size and samples[ptr] <= 0.0:
            record(float(samples[ptr]), y)
            ptr += 1

    # Initial step from the generator's scale (operator inf-norms), and a
    # stability cap: the commutator spreads eigenvalues over roughly
    # +/- 2 ||H|| on the imaginary axis and the dissipator adds about
    # 2 sum gamma ||L^dag L|| on the real axis.  Without the cap the
    # controller pushes the step far beyond the stability region when the
    # solution goes quiescent, and roundoff in the fast modes is amplified
    # for a dozen steps before rejections rein it back in.
    h_norm = float(np.abs(rhs.h).sum(axis=1).max()) if d else 0.0
    diss_norm = 0.0
    for rate, _l, _ld, ldl in rhs.terms:
        diss_norm += rate * float(np.abs(ldl).sum(axis=1).max())
    scale = h_norm + diss_norm
    spectral = 2.0 * h_norm + 2.0 * diss_norm
    h_max = 3.0 / spectral if spectral > 0 else t_final
    h_step = 1e-3 / scale if scale > 0 else t_final
    h_step = min(h_step, h_max, t_final)

    n_acc = 0
    n_rej = 0
    k1 = f(y)
    tiny = 1e-12 * max(1.0, t_final)
    k = [np.empty_like(y) for _ in range(7)]

    while t < t_final - tiny:
        # Do not step past the end or the next pending sample.
        limit = t_final - t
        target = None
        if samples is not None and ptr < samples.size:
            gap = samples[ptr] - t
            if gap < limit:
                limit = gap
                target = float(samples[ptr])
        hs = min(h_step, limit)
        if hs < 1e-14 * max(1.0, abs(t)):
            raise StepUnderflowError(
                f"step size underflow at t = {t:g}", t_reached=t
            )

        k[0] = k1
        for i in range(1, 7):
            yi = y.copy()
            for j, aij in enumerate(_DP_A[i]):
                if aij != 0.0:
                    yi += (hs * aij) * k[j]
            k[i] = f(yi)
        y_new = y.copy()
        for i, bi in enumerate(_DP_B):
            if bi != 0.0:
                y_new += (hs * bi) * k[i]
        err_vec = np.zeros_like(y)
        for i, ei in enumerate(_DP_E):
            if ei != 0.0:
                err_vec += (hs * ei) * k[i]
        sc = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean(np.abs(err_vec / sc) ** 2)))

        if np.isfinite(err) and err <= 1.0:
            n_acc += 1
            t_new = t + hs
            if target is not None and abs(t_new - target) <= 4e-16 * max(1.0, target):
                t_new = target
            y = y_new
            # Stage 7 was evaluated at (t + hs, y_new): reuse as next k1.
            k1 = k[6]
            t = t_new
            if samples is None:
                record(t, y)
            else:
                while ptr < samples.size and samples[ptr] <= t + tiny:
                    record(float(samples[ptr]), y)
                    ptr += 1
            grow = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h_step = min(hs * grow, h_max)
        else:
            n_rej += 1
            shrink = 0.2 if not np.isfinite(err) else max(0.2, 0.9 * err ** -0.2)
            h_step = hs * min(shrink, 0.9)

    if samples is not None:
        while ptr < samples.size:
            # Samples at (numerically) t_final that the loop left pending.
            record(float(samples[ptr]), y)
            ptr += 1

    return EvolutionResult(
        times=np.array(times), states=tuple(states),
        steps_accepted=n_acc, steps_rejected=n_rej,
    )


@dataclass(frozen=True)
class LiouvillianMatrix:
    """Dense vectorised generator under column stacking.

    ``matrix`` has shape ``(d*d, d*d)`` where ``d`` is the Hilbert-space
    dimension; ``matrix @ rho.ravel(order="F")`` is the vectorised
    right-hand side.
    """

    hilbert_dim: int
    matrix: np.ndarray

    def __post_init__(self):
        d = self.hilbert_dim
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (d * d, d * d):
            raise DimensionMismatchError(
                f"expected shape {(d * d, d * d)}, got {m.shape}"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.hilbert_dim ** 2

    def apply(self, rho_matrix: np.ndarray) -> np.ndarray:
        """Action on a density matrix, returned in matrix form."""
        d = self.hilbert_dim
        vec = np.asarray(rho_matrix, dtype=complex).reshape(d * d, order="F")
        return (self.matrix @ vec).reshape(d, d, order="F")


def build_liouvillian(
    h: LinOp, channels: Sequence[JumpChannel]
) -> LiouvillianMatrix:
    """Assemble the dense vectorised generator.

    Under column stacking ``vec(A rho B) = (B^T kron A) vec(rho)``, so

    ``M = -i (I kron H - H^T kron I)
    + sum_k gamma_k ( conj(L_k) kron L_k
    - 1/2 I kron L_k^dag L_k - 1/2 (L_k^dag L_k)^T kron I )``.
    """
    d = _check_dims(h, channels)
    eye = _sp.identity(d, dtype=complex, format="csr")
    hk = h.to_csr()
    m = -1j * (_sp.kron(eye, hk) - _sp.kron(hk.T, eye))
    for ch in channels:
        if ch.rate == 0.0:
            continue
        lk = ch.operator.to_csr()
        ldl = (lk.conj().T @ lk).tocsr()
        m = m + ch.rate * (
            _sp.kron(lk.conj(), lk)
            - 0.5 * _sp.kron(eye, ldl)
            - 0.5 * _sp.kron(ldl.T, eye)
        )
    return LiouvillianMatrix(d, m.toarray())


def steady_state(h: LinOp, channels: Sequence[JumpChannel]) -> DensityOp:
    """Stationary density operator of the generator.

    Solves the bordered linear system: the last row of ``M`` is replaced
    by the trace functional and the right-hand side by the unit vector
    selecting it, which removes the trace freedom of the nullspace.
    The candidate must satisfy ``||M vec(rho)||_inf <= 1e-8``.

    Raises
    ------
    ValueError
        If every channel rate is zero (no relaxation, no unique steady
        state).
    SteadyStateError
        If the bordered system is singular (nullspace dimension above
        one, i.e. multiple steady states), the residual check fails, or
        the candidate violates density-operator invariants.
    """
    if not any(ch.rate > 0 for ch in channels):
        raise ValueError("steady_state requires at least one positive rate")
    liou = build_liouvillian(h, channels)
    d = liou.hilbert_dim
    m = liou.matrix
    bordered = m.copy()
    bordered[-1, :] = 0.0
    bordered[-1, np.arange(d) * (d + 1)] = 1.0  # Tr rho in column stacking
    rhs_vec = np.zeros(d * d, dtype=complex)
    rhs_vec[-1] = 1.0
    try:
        vec = np.linalg.solve(bordered, rhs_vec)
    except np.linalg.LinAlgError as exc:
        raise SteadyStateError(
            "bordered steady-state system is singular; the generator admits "
            "multiple steady states"
        ) from exc
    if not np.all(np.isfinite(vec)):
        raise SteadyStateError("steady-state solve produced non-finite values")
    residual = float(np.abs(m @ vec).max())
    if residual > STEADY_RESIDUAL_TOL:
        raise SteadyStateError(
            f"steady-state residual {residual:.3e} > {STEADY_RESIDUAL_TOL}; "
            "the generator is ill-conditioned or has multiple steady states"
        )
    mat = vec.reshape(d, d, order="F")
    try:
        return DensityOp(d, mat)
    except StateInvariantError as exc:
        raise SteadyStateError(f"steady-state candidate invalid: {exc}") from exc
