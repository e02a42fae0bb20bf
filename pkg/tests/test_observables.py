import numpy as np
import pytest

from crheat import (
    DensityOp,
    DissipationSpec,
    Ket,
    RabiParams,
    SpaceSpec,
    basis_ket,
    build_rabi,
    cumulative_emission,
    emission_rates,
    excited_population,
    jump_channels,
    lindblad_rhs,
    mean_phonon,
)
from crheat.errors import DimensionMismatchError

import oracles


def _channels(gamma=0.5, kappa=0.25, cutoff=3):
    space = SpaceSpec(fock_cutoff=cutoff)
    return space, jump_channels(
        DissipationSpec(gamma_a=gamma, kappa_b=kappa), space
    )


def test_mean_phonon_number_state():
    space = SpaceSpec(fock_cutoff=5)
    psi = basis_ket(space.total_dim, space.index(0, 3))
    assert mean_phonon(psi, space) == 3.0


def test_excited_population_basis_states():
    space = SpaceSpec(fock_cutoff=3)
    assert excited_population(basis_ket(6, space.index(1, 2)), space) == 1.0
    assert excited_population(basis_ket(6, space.index(0, 2)), space) == 0.0


def test_observables_on_mixed_state():
    space = SpaceSpec(fock_cutoff=2)
    diag = np.array([0.1, 0.2, 0.3, 0.4])  # |00>, |01>, |10>, |11>
    rho = DensityOp(4, np.diag(diag).astype(complex))
    assert excited_population(rho, space) == pytest.approx(0.7, abs=1e-15)
    assert mean_phonon(rho, space) == pytest.approx(0.6, abs=1e-15)


def test_observables_bounds_on_random_states():
    space = SpaceSpec(fock_cutoff=4)
    rng = np.random.default_rng(13)
    for _ in range(20):
        rho = DensityOp(8, oracles.random_density(rng, 8))
        pe = excited_population(rho, space)
        assert -1e-12 <= pe <= 1 + 1e-12
        assert mean_phonon(rho, space) >= -1e-12


def test_observables_ket_density_agreement():
    space = SpaceSpec(fock_cutoff=4)
    rng = np.random.default_rng(29)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    amps /= np.linalg.norm(amps)
    psi = Ket(8, amps)
    assert mean_phonon(psi, space) == pytest.approx(
        mean_phonon(psi.to_density(), space), abs=1e-12
    )
    assert excited_population(psi, space) == pytest.approx(
        excited_population(psi.to_density(), space), abs=1e-12
    )


def test_observables_dimension_check():
    space = SpaceSpec(fock_cutoff=4)
    with pytest.raises(DimensionMismatchError):
        mean_phonon(basis_ket(6, 0), space)


def test_emission_rates_vacuum_is_dark():
    space, channels = _channels()
    report = emission_rates(basis_ket(space.total_dim, 0), channels)
    assert report.channel_rates == (0.0, 0.0)
    assert report.total == 0.0
    assert not report.clamped


def test_emission_rates_excited_qubit():
    space, channels = _channels(gamma=0.5, kappa=0.25)
    psi = basis_ket(space.total_dim, space.index(1, 0))
    report = emission_rates(psi, channels)
    assert report.channel_rates[0] == pytest.approx(0.5, abs=1e-15)
    assert report.channel_rates[1] == 0.0
    assert report.total == pytest.approx(0.5, abs=1e-15)


def test_emission_rates_scale_with_occupation():
    space, channels = _channels(gamma=0.5, kappa=0.25)
    psi = basis_ket(space.total_dim, space.index(1, 2))
    report = emission_rates(psi, channels)
    assert report.channel_rates == pytest.approx((0.5, 0.5), abs=1e-15)


def test_emission_rates_ket_density_agreement():
    space, channels = _channels()
    rng = np.random.default_rng(37)
    amps = rng.normal(size=space.total_dim) + 1j * rng.normal(size=space.total_dim)
    amps /= np.linalg.norm(amps)
    psi = Ket(space.total_dim, amps)
    from_ket = emission_rates(psi, channels)
    from_rho = emission_rates(psi.to_density(), channels)
    assert from_ket.channel_rates == pytest.approx(from_rho.channel_rates,
                                                   abs=1e-12)


def test_emission_rates_clamp_tiny_negatives():
    # a state that is valid within tolerance can put an expectation a
    # hair below zero; that gets clamped and flagged, never passed on
    space, channels = _channels(gamma=1.0, kappa=0.0, cutoff=2)
    eps = 5e-13
    diag = np.array([1.0 + eps, 0.0, -eps, 0.0], dtype=complex)
    rho = DensityOp(4, np.diag(diag))
    report = emission_rates(rho, channels)
    assert report.clamped
    assert report.channel_rates[0] == 0.0
    assert report.total == 0.0


def test_emission_rates_reject_large_negatives():
    space, channels = _channels(gamma=1.0, kappa=0.0, cutoff=2)
    diag = np.array([1.0 + 5e-10, 0.0, -5e-10, 0.0], dtype=complex)
    rho = DensityOp(4, np.diag(diag))
    with pytest.raises(ValueError):
        emission_rates(rho, channels)


def test_energy_balance_of_dissipator():
    # d<H>/dt computed from the generator equals the channel-resolved
    # sink formula: an independent bookkeeping identity
    params = RabiParams(omega_a=1.0, omega_b=1.0, g_rot=0.15, g_cr=0.2,
                        fock_cutoff=4)
    h = build_rabi(params)
    space, channels = _channels(gamma=0.3, kappa=0.6, cutoff=4)
    rng = np.random.default_rng(43)
    h_dense = h.to_dense()
    for _ in range(4):
        rho = oracles.random_density(rng, h.dim)
        lhs = np.trace(h_dense @ lindblad_rhs(h, channels, rho)).real
        rhs = 0.0
        for ch in channels:
            l = ch.operator.to_dense()
            sink = l.conj().T @ h_dense @ l - 0.5 * (
                l.conj().T @ l @ h_dense + h_dense @ l.conj().T @ l
            )
            rhs += ch.rate * np.trace(sink @ rho).real
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_cumulative_emission_constant_rate():
    times = np.linspace(0.0, 2.0, 21)
    totals = np.full_like(times, 0.25)
    assert cumulative_emission(times, totals) == pytest.approx(0.5, abs=1e-12)


def test_cumulative_emission_pure_decay():
    # integral of gamma e^(-gamma t) over [0, T] = 1 - e^(-gamma T)
    times = np.linspace(0.0, 8.0, 4001)
    totals = np.exp(-times)
    expected = 1.0 - np.exp(-8.0)
    assert cumulative_emission(times, totals) == pytest.approx(expected,
                                                               abs=1e-5)


def test_cumulative_emission_validates_input():
    with pytest.raises(ValueError):
        cumulative_emission([0.0, 0.0, 1.0], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        cumulative_emission([0.0], [1.0])
    with pytest.raises(ValueError):
        cumulative_emission([0.0, 1.0], [1.0, 1.0, 1.0])
