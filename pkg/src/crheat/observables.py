"""Readouts shared by the master-equation and trajectory backends.

The physically interesting signal is emission without external driving:
each damping channel radiates at ``gamma_k <L_k^dag L_k>``, and for the
local channels used here that reduces to the qubit excited population
and the mean phonon number.  All functions accept either a pure state
or a density operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError
from .hilbert import DensityOp, Ket, SpaceSpec
from .models import JumpChannel

__all__ = [
    "EmissionReport",
    "mean_phonon",
    "excited_population",
    "emission_rates",
    "cumulative_emission",
]

#: Negative rates beyond this magnitude indicate a broken state rather
#: than rounding noise and are reported instead of clamped.
_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class EmissionReport:
    """Per-channel emission rates ``gamma_k <L_k^dag L_k>``.

    ``clamped`` records whether any rate came out slightly negative
    (rounding on an almost-pure state) and was clipped to zero; rates
    below ``-1e-12`` are never clamped silently but raise instead.
    """

    channel_rates: tuple[float, ...]
    total: float
    clamped: bool


def _diagonal(state: Ket | DensityOp, space: SpaceSpec) -> np.ndarray:
    if state.dim != space.total_dim:
        raise DimensionMismatchError(
            f"state dim {state.dim} != space dim {space.total_dim}"
        )
    if isinstance(state, Ket):
        return np.abs(state.amplitudes) ** 2
    if isinstance(state, DensityOp):
        return np.real(np.diag(state.matrix))
    raise TypeError(f"expected Ket or DensityOp, got {type(state).__name__}")


def mean_phonon(state: Ket | DensityOp, space: SpaceSpec) -> float:
    """Mean boson occupation ``<I (x) b^dag b>``."""
    diag = _diagonal(state, space).reshape(2, space.fock_cutoff)
    weights = np.arange(space.fock_cutoff, dtype=float)
    return float(np.sum(diag * weights))


def excited_population(state: Ket | DensityOp, space: SpaceSpec) -> float:
    """Qubit excited-state population ``<sigma+ sigma- (x) I>``.

    Lies in ``[0, 1]`` up to rounding for any valid state; the raw value
    is returned unclipped.
    """
    diag = _diagonal(state, space).reshape(2, space.fock_cutoff)
    return float(diag[1].sum())


def emission_rates(
    state: Ket | DensityOp, channels: Sequence[JumpChannel]
) -> EmissionReport:
    """Instantaneous emission rate of every channel.

    For channel ``k`` the rate is ``gamma_k <L_k^dag L_k>``, the mean
    number of quanta the channel carries away per unit time.  Tiny
    negative expectation values (above ``-1e-12``) from rounding are
    clamped to zero and flagged.
    """
    rates = []
    clamped = False
    for k, ch in enumerate(channels):
        if ch.operator.dim != state.dim:
            raise DimensionMismatchError(
                f"channel {k} operator dim {ch.operator.dim} != state dim {state.dim}"
            )
        csr = ch.operator.to_csr()
        if isinstance(state, Ket):
            lp = csr @ state.amplitudes
            val = float(np.vdot(lp, lp).real)
        elif isinstance(state, DensityOp):
            ldl = (csr.conj().T @ csr).toarray()
            val = float(np.trace(ldl @ state.matrix).real)
        else:
            raise TypeError(f"expected Ket or DensityOp, got {type(state).__name__}")
        rate = ch.rate * val
        if rate < 0:
            if rate < -_CLAMP_TOL:
                raise ValueError(
                    f"channel {k} emission rate {rate:.3e} is negative beyond "
                    "rounding; the state is not a valid density operator"
                )
            rate = 0.0
            clamped = True
        rates.append(rate)
    total = float(sum(rates))
    return EmissionReport(tuple(rates), total, clamped)


def cumulative_emission(times: Sequence[float], totals: Sequence[float]) -> float:
    """Trapezoidal integral of a sampled total emission rate.

    ``times`` must be strictly increasing and aligned with ``totals``;
    the result is the expected number of quanta emitted over the window.
    """
    t = np.asarray(times, dtype=float)
    r = np.asarray(totals, dtype=float)
    if t.ndim != 1 or t.shape != r.shape:
        raise DimensionMismatchError("times and totals must be 1-D and aligned")
    if t.size < 2:
        raise ValueError("need at least two samples to integrate")
    if not np.all(np.diff(t) > 0):
        raise ValueError("times must be strictly increasing")
    return float(np.trapezoid(r, t))
