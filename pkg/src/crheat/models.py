"""Hamiltonians and dissipation channels for the composite system.

Two families are covered:

* the qubit-boson dipole model, with the rotating (excitation-conserving)
  and counter-rotating (pair creation/annihilation) coupling strengths
  controlled independently, and
* a laser-driven sideband model in the frame rotating at the drive
  frequency, expanded to first order in the Lamb-Dicke parameter, with an
  optional counter-rotating (blue-sideband) term.

All builders return exactly Hermitian :class:`~crheat.hilbert.LinOp`
instances: mirrored entries are produced as ``X + dag(X)`` with real
prefactors, so ``H[i, j] == conj(H[j, i])`` holds entrywise without
rounding slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .hilbert import LinOp, SpaceSpec, dag, destroy, identity, kron, sigma_minus

__all__ = [
    "RabiParams",
    "SidebandParams",
    "DissipationSpec",
    "JumpChannel",
    "build_rabi",
    "build_sideband",
    "jump_channels",
]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def _finite_number(value, name: str) -> float:
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        f"{name} must be a real number",
    )
    _require(math.isfinite(value), f"{name} must be finite")
    return float(value)


@dataclass(frozen=True)
class RabiParams:
    """Parameters of the dipole-coupled qubit-boson model.

    ``g_rot`` scales the excitation-conserving coupling
    ``sigma+ b + sigma- b^dag``; ``g_cr`` scales the counter-rotating
    part ``sigma+ b^dag + sigma- b``.  Setting ``g_cr = 0`` recovers the
    excitation-number-conserving model whose ground state is the bare
    vacuum; any ``g_cr > 0`` entangles the ground state and opens a
    steady emission channel.
    """

    omega_a: float
    omega_b: float
    g_rot: float
    g_cr: float
    fock_cutoff: int

    def __post_init__(self):
        for name in ("omega_a", "omega_b"):
            v = _finite_number(getattr(self, name), name)
            _require(v > 0, f"{name} must be positive")
            object.__setattr__(self, name, v)
        for name in ("g_rot", "g_cr"):
            v = _finite_number(getattr(self, name), name)
            _require(v >= 0, f"{name} must be non-negative")
            object.__setattr__(self, name, v)
        # SpaceSpec re-validates, but fail here with the field name.
        _require(
            isinstance(self.fock_cutoff, int) and not isinstance(self.fock_cutoff, bool)
            and self.fock_cutoff >= 2,
            "fock_cutoff must be an integer >= 2",
        )

    def space(self) -> SpaceSpec:
        return SpaceSpec(self.fock_cutoff)


@dataclass(frozen=True)
class SidebandParams:
    """Parameters of the driven sideband model (rotating frame).

    Attributes
    ----------
    delta : float
        Drive detuning from the qubit transition; ``delta = -nu`` places
        the drive on the red sideband.
    nu : float
        Boson (trap) frequency, positive.
    omega_rabi : float
        Carrier Rabi frequency of the drive, non-negative.
    eta : float
        Lamb-Dicke parameter, in ``(0, 1)``; the expansion of the drive
        in the boson displacement is truncated at first order.
    include_cr : bool
        Whether the blue-sideband (counter-rotating) term
        ``sigma+ b^dag + sigma- b`` is kept.  Dropping it is exactly the
        approximation under which sideband cooling reaches a vanishing
        phonon floor; keeping it produces the finite floor.
    fock_cutoff : int
        Retained Fock dimension.
    """

    delta: float
    nu: float
    omega_rabi: float
    eta: float
    include_cr: bool
    fock_cutoff: int

    def __post_init__(self):
        object.__setattr__(self, "delta", _finite_number(self.delta, "delta"))
        v = _finite_number(self.nu, "nu")
        _require(v > 0, "nu must be positive")
        object.__setattr__(self, "nu", v)
        v = _finite_number(self.omega_rabi, "omega_rabi")
        _require(v >= 0, "omega_rabi must be non-negative")
        object.__setattr__(self, "omega_rabi", v)
        v = _finite_number(self.eta, "eta")
        _require(0 < v < 1, "eta must lie strictly between 0 and 1")
        object.__setattr__(self, "eta", v)
        _require(isinstance(self.include_cr, bool), "include_cr must be a boolean")
        _require(
            isinstance(self.fock_cutoff, int) and not isinstance(self.fock_cutoff, bool)
            and self.fock_cutoff >= 2,
            "fock_cutoff must be an integer >= 2",
        )

    def space(self) -> SpaceSpec:
        return SpaceSpec(self.fock_cutoff)


@dataclass(frozen=True)
class DissipationSpec:
    """Decay rates of the two local damping channels.

    ``gamma_a`` damps the qubit (operator ``sigma- (x) I``), ``kappa_b``
    damps the boson mode (operator ``I (x) b``).  Rates must be
    non-negative and at least one must be positive, otherwise there is
    no dissipation to speak of and steady states are not unique.
    """

    gamma_a: float
    kappa_b: float

    def __post_init__(self):
        for name in ("gamma_a", "kappa_b"):
            v = _finite_number(getattr(self, name), name)
            _require(v >= 0, f"{name} must be non-negative")
            object.__setattr__(self, name, v)
        _require(
            self.gamma_a > 0 or self.kappa_b > 0,
            "at least one of gamma_a, kappa_b must be positive",
        )


@dataclass(frozen=True)
class JumpChannel:
    """A Lindblad channel: jump operator plus non-negative rate."""

    operator: LinOp
    rate: float

    def __post_init__(self):
        v = _finite_number(self.rate, "rate")
        _require(v >= 0, "rate must be non-negative")
        object.__setattr__(self, "rate", v)


def build_rabi(params: RabiParams) -> LinOp:
    """Hamiltonian of the dipole model on the truncated composite space.

    ``H = omega_a n_A (x) I + omega_b I (x) n_B
    + g_rot (sigma+ (x) b + h.c.) + g_cr (sigma+ (x) b^dag + h.c.)``

    With ``g_cr = 0`` the total excitation number commutes with ``H``
    exactly, truncation included, because the rotating coupling never
    reaches the cutoff edge.
    """
    n = params.fock_cutoff
    sm = sigma_minus()
    sp = dag(sm)
    b = destroy(n)
    i2, i_n = identity(2), identity(n)

    h = params.omega_a * kron(sp @ sm, i_n) + params.omega_b * kron(i2, dag(b) @ b)
    rot = kron(sp, b)
    h = h + params.g_rot * (rot + dag(rot))
    cr = kron(sp, dag(b))
    h = h + params.g_cr * (cr + dag(cr))
    return h


def build_sideband(params: SidebandParams) -> LinOp:
    """Hamiltonian of the driven sideband model.

    ``H = -delta n_A (x) I + nu I (x) n_B + (Omega/2)(sigma+ + sigma-) (x) I
    + (eta Omega / 2)(sigma+ (x) b + h.c.)
    [+ (eta Omega / 2)(sigma+ (x) b^dag + h.c.)  if include_cr]``
    """
    n = params.fock_cutoff
    sm = sigma_minus()
    sp = dag(sm)
    b = destroy(n)
    i2, i_n = identity(2), identity(n)

    h = (-params.delta) * kron(sp @ sm, i_n) + params.nu * kron(i2, dag(b) @ b)
    h = h + (params.omega_rabi / 2.0) * (kron(sp, i_n) + kron(sm, i_n))
    g = params.eta * params.omega_rabi / 2.0
    rot = kron(sp, b)
    h = h + g * (rot + dag(rot))
    if params.include_cr:
        cr = kron(sp, dag(b))
        h = h + g * (cr + dag(cr))
    return h


def jump_channels(dissipation: DissipationSpec, space: SpaceSpec) -> list[JumpChannel]:
    """The two local damping channels on the composite space.

    Returns ``[(sigma- (x) I, gamma_a), (I (x) b, kappa_b)]`` in that
    order.  Channels with zero rate are kept in the list (with rate 0)
    so channel indices are stable across parameter choices.
    """
    n = space.fock_cutoff
    return [
        JumpChannel(kron(sigma_minus(), identity(n)), dissipation.gamma_a),
        JumpChannel(kron(identity(2), destroy(n)), dissipation.kappa_b),
    ]
