"""Quantum-jump (Monte Carlo wave function) unraveling.

Each trajectory marches a pure state with a fixed first-order step: per
step the jump probabilities ``dp_k = dt * gamma_k * ||L_k psi||^2`` are
computed, a single uniform draw decides between a jump (channel chosen
by cumulative probability in channel order) and the non-Hermitian drift

    psi -> (1 - i dt H_eff) psi / ||...||,
    H_eff = H - (i/2) sum_k gamma_k L_k^dag L_k.

The scheme is only first-order accurate, so steps with total jump
probability >= 0.1 are refused outright rather than silently biased.

Randomness is counter-based and fully deterministic: trajectory ``i`` of
a run with ``master_seed`` uses a Philox stream keyed by a splitmix64
hash of ``(master_seed, i)``.  Results are therefore independent of
worker count and scheduling, and ensembles reduce in trajectory order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .errors import (
    DimensionMismatchError,
    StateInvariantError,
    StepTooLargeError,
)
from .hilbert import Ket, LinOp
from .models import JumpChannel

__all__ = [
    "JumpEvent",
    "TrajectoryRecord",
    "EnsembleResult",
    "GENERATOR",
    "derive_seed",
    "mcwf_step",
    "run_trajectory",
    "ensemble_mean",
]

#: Identifier of the random stream scheme, recorded in every result.
GENERATOR = "philox4x64/splitmix64"

#: Refuse steps whose total jump probability reaches this value.
MAX_STEP_PROBABILITY = 0.1

_NORM_TOL = 1e-10
_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, index: int) -> int:
    """Per-trajectory Philox key: splitmix64 hash of (seed, index).

    Pure integer arithmetic, so the mapping is reproducible across
    platforms and independent of any global random state.
    """
    if not 0 <= master_seed < 2 ** 64:
        raise ValueError("master_seed must fit in an unsigned 64-bit integer")
    if index < 0:
        raise ValueError("trajectory index must be non-negative")
    z = (master_seed + 0x9E3779B97F4A7C15 * (index + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class JumpEvent:
    """A recorded quantum jump: absolute time and channel index."""

    time: float
    channel: int


@dataclass(frozen=True)
class TrajectoryRecord:
    """One trajectory: sampled observable values plus the jump log.

    ``values[m, i]`` is observable ``m`` at ``times[i]``.
    """

    seed: int
    times: np.ndarray
    values: np.ndarray
    jumps: tuple[JumpEvent, ...]
    generator: str = GENERATOR


@dataclass(frozen=True)
class EnsembleResult:
    """Trajectory-averaged observables.

    ``means[m, i]`` and ``standard_errors[m, i]`` refer to observable
    ``m`` at ``times[i]``; the standard error is the sample standard
    deviation (ddof=1) divided by ``sqrt(n_trajectories)``.
    """

    n_trajectories: int
    times: np.ndarray
    means: np.ndarray
    standard_errors: np.ndarray
    generator: str = GENERATOR


@njit(cache=True, nogil=True)
def _march(
    heff_indptr, heff_indices, heff_data,
    ch_indptr, ch_indices, ch_data, ch_rates,
    obs_mats, psi, dt, draws, sample_steps,
    out_values, jump_steps, jump_channels,
):  # pragma: no cover - exercised via run_trajectory
    d = psi.shape[0]
    n_ch = ch_rates.shape[0]
    n_steps = draws.shape[0]
    n_obs = obs_mats.shape[0]
    n_samples = sample_steps.shape[0]
    tmp = np.empty(d, np.complex128)
    lpsi = np.empty((n_ch, d), np.complex128)
    dp = np.empty(n_ch, np.float64)
    cap = jump_steps.shape[0]
    n_jumps = 0
    s_ptr = 0

    while s_ptr < n_samples and sample_steps[s_ptr] == 0:
        for m in range(n_obs):
            acc = 0.0
            for i in range(d):
                row = 0.0 + 0.0j
                for j in range(d):
                    row += obs_mats[m, i, j] * psi[j]
                acc += (np.conj(psi[i]) * row).real
            out_values[m, s_ptr] = acc
        s_ptr += 1

    for step in range(n_steps):
        tot = 0.0
        for c in range(n_ch):
            nrm2 = 0.0
            for i in range(d):
                val = 0.0 + 0.0j
                for p in range(ch_indptr[c, i], ch_indptr[c, i + 1]):
                    val += ch_data[c, p] * psi[ch_indices[c, p]]
                lpsi[c, i] = val
                nrm2 += (np.conj(val) * val).real
            dp[c] = dt * ch_rates[c] * nrm2
            tot += dp[c]
        if tot >= 0.1:
            return 1, step, n_jumps
        r = draws[step]
        if r < tot:
            acc = 0.0
            chosen = n_ch - 1
            for c in range(n_ch):
                acc += dp[c]
                if r < acc:
                    chosen = c
                    break
            nrm2 = 0.0
            for i in range(d):
                nrm2 += (np.conj(lpsi[chosen, i]) * lpsi[chosen, i]).real
            inv = 1.0 / np.sqrt(nrm2)
            for i in range(d):
                psi[i] = lpsi[chosen, i] * inv
            if n_jumps >= cap:
                return 2, step, n_jumps
            jump_steps[n_jumps] = step + 1
            jump_channels[n_jumps] = chosen
            n_jumps += 1
        else:
            nrm2 = 0.0
            for i in range(d):
                val = 0.0 + 0.0j
                for p in range(heff_indptr[i], heff_indptr[i + 1]):
                    val += heff_data[p] * psi[heff_indices[p]]
                val = psi[i] - 1j * dt * val
                tmp[i] = val
                nrm2 += (np.conj(val) * val).real
            inv = 1.0 / np.sqrt(nrm2)
            for i in range(d):
                psi[i] = tmp[i] * inv
        while s_ptr < n_samples and sample_steps[s_ptr] == step + 1:
            for m in range(n_obs):
                acc2 = 0.0
                for i in range(d):
                    row = 0.0 + 0.0j
                    for j in range(d):
                        row += obs_mats[m, i, j] * psi[j]
                    acc2 += (np.conj(psi[i]) * row).real
                out_values[m, s_ptr] = acc2
            s_ptr += 1

    return 0, n_steps, n_jumps


class _Prepared:
    """Sparse kernel inputs shared by every trajectory of a run."""

    def __init__(
        self,
        h: LinOp,
        channels: Sequence[JumpChannel],
        observables: Sequence[LinOp],
    ):
        d = h.dim
        for k, ch in enumerate(channels):
            if ch.operator.dim != d:
                raise DimensionMismatchError(
                    f"channel {k} operator dim {ch.operator.dim} != Hamiltonian dim {d}"
                )
        for k, ob in enumerate(observables):
            if ob.dim != d:
                raise DimensionMismatchError(
                    f"observable {k} dim {ob.dim} != Hamiltonian dim {d}"
                )
        self.dim = d
        self.channels = list(channels)
        heff = h
        for ch in channels:
            if ch.rate > 0:
                heff = heff + (-0.5j * ch.rate) * (ch.operator.dag() @ ch.operator)
        hc = heff.to_csr()
        self.heff_indptr = hc.indptr.astype(np.int64)
        self.heff_indices = hc.indices.astype(np.int64)
        self.heff_data = hc.data.astype(np.complex128)

        # Channels live in padded 2D CSR arrays so the kernel takes plain
        # ndarrays; a zero-rate row keeps channel indices stable.
        n_rows = max(len(channels), 1)
        csrs = [ch.operator.to_csr() for ch in channels]
        width = max((c.nnz for c in csrs), default=0) or 1
        self.ch_indptr = np.zeros((n_rows, d + 1), dtype=np.int64)
        self.ch_indices = np.zeros((n_rows, width), dtype=np.int64)
        self.ch_data = np.zeros((n_rows, width), dtype=np.complex128)
        self.rates = np.zeros(n_rows, dtype=np.float64)
        for c, (ch, mat) in enumerate(zip(channels, csrs)):
            self.ch_indptr[c] = mat.indptr
            self.ch_indices[c, : mat.nnz] = mat.indices
            self.ch_data[c, : mat.nnz] = mat.data
            self.rates[c] = ch.rate
        self.obs = np.zeros((len(observables), d, d), dtype=np.complex128)
        for m, ob in enumerate(observables):
            self.obs[m] = ob.to_dense()


def _check_ket(psi: Ket, dim: int) -> np.ndarray:
    if psi.dim != dim:
        raise DimensionMismatchError(f"state dim {psi.dim} != generator dim {dim}")
    if abs(psi.norm() - 1.0) > _NORM_TOL:
        raise StateInvariantError("trajectory states must be normalised")
    return psi.amplitudes.astype(np.complex128).copy()


def mcwf_step(
    psi: Ket,
    h: LinOp,
    channels: Sequence[JumpChannel],
    dt: float,
    draw: float,
    t: float = 0.0,
) -> tuple[Ket, JumpEvent | None]:
    """Advance a normalised pure state by one stochastic step.

    ``draw`` is the single uniform variate in ``[0, 1)`` consumed by the
    step; ``t`` is the time at the start of the step and only stamps the
    returned :class:`JumpEvent`.  Returns the new state and the jump
    event, or ``None`` when the no-jump drift was taken.

    Raises
    ------
    StepTooLargeError
        If the total jump probability ``sum_k dt gamma_k ||L_k psi||^2``
        reaches 0.1, beyond which the first-order splitting is invalid.
    """
    if not (dt > 0 and np.isfinite(dt)):
        raise ValueError(f"dt must be positive and finite, got {dt!r}")
    if not 0.0 <= draw < 1.0:
        raise ValueError(f"draw must lie in [0, 1), got {draw!r}")
    for k, ch in enumerate(channels):
        if ch.operator.dim != h.dim:
            raise DimensionMismatchError(
                f"channel {k} operator dim {ch.operator.dim} != Hamiltonian dim {h.dim}"
            )
    amps = _check_ket(psi, h.dim)

    lpsis = []
    dps = []
    tot = 0.0
    for ch in channels:
        lp = ch.operator.to_csr() @ amps
        p = dt * ch.rate * float(np.vdot(lp, lp).real)
        lpsis.append(lp)
        dps.append(p)
        tot += p
    if tot >= MAX_STEP_PROBABILITY:
        raise StepTooLargeError(
            f"total jump probability {tot:.3g} >= {MAX_STEP_PROBABILITY}; "
            "reduce dt",
        )
    if draw < tot:
        acc = 0.0
        chosen = len(channels) - 1
        for c, p in enumerate(dps):
            acc += p
            if draw < acc:
                chosen = c
                break
        new = lpsis[chosen]
        new = new / np.linalg.norm(new)
        return Ket(h.dim, new), JumpEvent(time=t + dt, channel=chosen)
    heff = _sparse_heff(h, channels)
    new = amps - 1j * dt * (heff @ amps)
    new = new / np.linalg.norm(new)
    return Ket(h.dim, new), None


def _sparse_heff(h: LinOp, channels: Sequence[JumpChannel]):
    heff = h
    for ch in channels:
        if ch.rate > 0:
            heff = heff + (-0.5j * ch.rate) * (ch.operator.dag() @ ch.operator)
    return heff.to_csr()


def _steps_for(t_final: float, dt: float) -> int:
    if not (dt > 0 and np.isfinite(dt)):
        raise ValueError(f"dt must be positive and finite, got {dt!r}")
    if not (t_final > 0 and np.isfinite(t_final)):
        raise ValueError(f"t_final must be positive and finite, got {t_final!r}")
    n = int(round(t_final / dt))
    if n < 1 or abs(n * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError("t_final must be a positive integer multiple of dt")
    return n


def _sample_steps(
    sample_times: Sequence[float] | None, t_final: float, dt: float, n_steps: int
) -> tuple[np.ndarray, np.ndarray]:
    if sample_times is None:
        times = np.array([0.0, t_final])
    else:
        times = np.asarray(list(sample_times), dtype=float)
        if times.size == 0:
            raise ValueError("sample_times must not be empty")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("sample_times must be strictly increasing")
    steps = np.rint(times / dt).astype(np.int64)
    if np.any(np.abs(steps * dt - times) > 1e-9 * max(1.0, t_final)):
        raise ValueError("sample_times must be integer multiples of dt")
    if steps[0] < 0 or steps[-1] > n_steps:
        raise ValueError("sample_times must lie within [0, t_final]")
    return times, steps


def _run_prepared(
    prep: _Prepared,
    amps: np.ndarray,
    dt: float,
    n_steps: int,
    seed: int,
    times: np.ndarray,
    steps: np.ndarray,
) -> tuple[np.ndarray, tuple[JumpEvent, ...]]:
    draws = np.random.Generator(np.random.Philox(key=seed)).random(n_steps)
    values = np.zeros((prep.obs.shape[0], steps.size), dtype=np.float64)
    cap = 1024
    while True:
        jump_steps = np.zeros(cap, dtype=np.int64)
        jump_channels = np.zeros(cap, dtype=np.int64)
        status, at, n_jumps = _march(
            prep.heff_indptr, prep.heff_indices, prep.heff_data,
            prep.ch_indptr, prep.ch_indices, prep.ch_data, prep.rates,
            prep.obs, amps.copy(), dt, draws, steps,
            values, jump_steps, jump_channels,
        )
        if status == 2 and cap < n_steps:
            cap = n_steps  # at most one jump per step
            continue
        break
    if status == 2:
        raise RuntimeError("jump buffer overflow despite full-size buffer")
    if status == 1:
        raise StepTooLargeError(
            f"total jump probability reached {MAX_STEP_PROBABILITY} at "
            f"t = {at * dt:g}; reduce dt",
            step=int(at),
        )
    jumps = tuple(
        JumpEvent(time=float(jump_steps[i] * dt), channel=int(jump_channels[i]))
        for i in range(n_jumps)
    )
    return values, jumps


def run_trajectory(
    h: LinOp,
    channels: Sequence[JumpChannel],
    psi0: Ket,
    t_final: float,
    dt: float,
    seed: int,
    observables: Sequence[LinOp] = (),
    sample_times: Sequence[float] | None = None,
) -> TrajectoryRecord:
    """Run one quantum-jump trajectory with a fixed step ``dt``.

    ``t_final`` must be an integer multiple of ``dt``, and every entry
    of ``sample_times`` (default: ``[0, t_final]``) must land on a step
    boundary, so sampled values never involve interpolation.  ``seed``
    keys the trajectory's private Philox stream directly; use
    :func:`derive_seed` to map an ensemble's master seed and trajectory
    index to this value.
    """
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    n_steps = _steps_for(t_final, dt)
    times, steps = _sample_steps(sample_times, t_final, dt, n_steps)
    prep = _Prepared(h, channels, observables)
    amps = _check_ket(psi0, prep.dim)
    values, jumps = _run_prepared(prep, amps, dt, n_steps, seed, times, steps)
    t_arr = times.copy()
    t_arr.setflags(write=False)
    values.setflags(write=False)
    return TrajectoryRecord(
        seed=seed, times=t_arr, values=values, jumps=jumps, generator=GENERATOR
    )


def ensemble_mean(
    h: LinOp,
    channels: Sequence[JumpChannel],
    psi0: Ket,
    t_final: float,
    dt: float,
    n_trajectories: int,
    master_seed: int,
    observables: Sequence[LinOp] = (),
    sample_times: Sequence[float] | None = None,
    n_workers: int = 1,
) -> EnsembleResult:
    """Average ``n_trajectories`` independent trajectories.

    Trajectory ``i`` uses the Philox key ``derive_seed(master_seed, i)``;
    the reduction runs in trajectory order whatever ``n_workers`` is, so
    two runs with the same arguments produce bit-identical results
    regardless of scheduling.
    """
    if not isinstance(n_trajectories, (int, np.integer)) or n_trajectories < 2:
        raise ValueError("n_trajectories must be an integer >= 2")
    if n_workers < 1:
        raise ValueError("n_workers must be >= 1")
    if not 0 <= master_seed < 2 ** 64:
        raise ValueError("master_seed must fit in an unsigned 64-bit integer")
    n_steps = _steps_for(t_final, dt)
    times, steps = _sample_steps(sample_times, t_final, dt, n_steps)
    prep = _Prepared(h, channels, observables)
    amps = _check_ket(psi0, prep.dim)

    def one(index: int) -> np.ndarray:
        seed = derive_seed(master_seed, index)
        values, _jumps = _run_prepared(prep, amps, dt, n_steps, seed, times, steps)
        return values

    if n_workers == 1:
        stack = np.stack([one(i) for i in range(n_trajectories)])
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            stack = np.stack(list(pool.map(one, range(n_trajectories))))

    means = stack.mean(axis=0)
    ses = stack.std(axis=0, ddof=1) / np.sqrt(n_trajectories)
    t_arr = times.copy()
    for arr in (t_arr, means, ses):
        arr.setflags(write=False)
    return EnsembleResult(
        n_trajectories=int(n_trajectories),
        times=t_arr,
        means=means,
        standard_errors=ses,
        generator=GENERATOR,
    )
