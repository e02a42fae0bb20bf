import numpy as np
import numpy.testing as npt
import pytest

from crheat import (
    DensityOp,
    DissipationSpec,
    JumpChannel,
    LinOp,
    RabiParams,
    basis_ket,
    build_liouvillian,
    build_rabi,
    evolve,
    jump_channels,
    lindblad_rhs,
    sigma_minus,
    steady_state,
)
from crheat.errors import SteadyStateError

import oracles


def _model(g_cr=0.1, g_rot=0.1, cutoff=10, gamma=0.1, kappa=0.1):
    params = RabiParams(omega_a=1.0, omega_b=1.0, g_rot=g_rot, g_cr=g_cr,
                        fock_cutoff=cutoff)
    channels = jump_channels(
        DissipationSpec(gamma_a=gamma, kappa_b=kappa), params.space()
    )
    return params, build_rabi(params), channels


def _dense_model(params, gamma, kappa):
    h = oracles.dense_rabi(params.omega_a, params.omega_b, params.g_rot,
                           params.g_cr, params.fock_cutoff)
    return h, oracles.dense_channels(gamma, kappa, params.fock_cutoff)


def test_rhs_vanishes_on_dark_vacuum():
    _, h, channels = _model(g_cr=0.0)
    rho = basis_ket(h.dim, 0).to_density()
    out = lindblad_rhs(h, channels, rho)
    assert np.all(out == 0.0)


def test_rhs_pure_decay_closed_form():
    # H = 0, single decay channel: d rho / dt = |g><g| - |e><e| at rho = |e><e|
    h = LinOp.from_entries(2, [])
    channels = [JumpChannel(operator=sigma_minus(), rate=1.0)]
    rho = basis_ket(2, 1).to_density()
    out = lindblad_rhs(h, channels, rho)
    npt.assert_array_equal(out, np.diag([1.0, -1.0]).astype(complex))


def test_rhs_coherent_element():
    # the counter-rotating term feeds |1,1><0,0| coherence out of vacuum
    params, h, channels = _model(g_cr=0.1, g_rot=0.0)
    rho = basis_ket(h.dim, 0).to_density()
    out = lindblad_rhs(h, channels, rho)
    idx = params.space().index(1, 1)
    assert out[idx, 0] == -0.1j
    assert out[0, idx] == 0.1j


def test_rhs_preserves_trace_and_hermiticity():
    params, h, channels = _model()
    rng = np.random.default_rng(17)
    for _ in range(5):
        rho = oracles.random_hermitian(rng, h.dim)
        out = lindblad_rhs(h, channels, rho)
        scale = np.abs(out).max()
        assert abs(np.trace(out)) <= 1e-12 * max(1.0, scale)
        assert np.abs(out - out.conj().T).max() <= 1e-12 * max(1.0, scale)


def test_rhs_is_linear():
    _, h, channels = _model()
    rng = np.random.default_rng(23)
    r1 = oracles.random_hermitian(rng, h.dim)
    r2 = oracles.random_hermitian(rng, h.dim)
    combined = lindblad_rhs(h, channels, 0.3 * r1 + 0.7 * r2)
    split = 0.3 * lindblad_rhs(h, channels, r1) + 0.7 * lindblad_rhs(h, channels, r2)
    npt.assert_allclose(combined, split, atol=1e-12)


def test_rhs_matches_dense_reference():
    params, h, channels = _model(g_cr=0.07, g_rot=0.13, cutoff=5,
                                 gamma=0.3, kappa=0.2)
    h_ref, ch_ref = _dense_model(params, 0.3, 0.2)
    m_ref = oracles.dense_liouvillian(h_ref, ch_ref)
    rng = np.random.default_rng(31)
    for _ in range(3):
        rho = oracles.random_density(rng, h.dim)
        ours = lindblad_rhs(h, channels, rho)
        ref = oracles.unvec(m_ref @ oracles.vec(rho))
        npt.assert_allclose(ours, ref, atol=1e-12)


def test_liouvillian_matches_rhs():
    _, h, channels = _model(cutoff=4)
    liou = build_liouvillian(h, channels)
    rng = np.random.default_rng(41)
    rho = oracles.random_density(rng, h.dim)
    npt.assert_allclose(liou.apply(rho), lindblad_rhs(h, channels, rho),
                        atol=1e-12)


def test_liouvillian_single_qubit_closed_form():
    # H = 0, one decay channel at rate 1, column-stacking convention
    h = LinOp.from_entries(2, [])
    channels = [JumpChannel(operator=sigma_minus(), rate=1.0)]
    expected = np.array(
        [
            [0.0, 0.0, 0.0, 1.0],
            [0.0, -0.5, 0.0, 0.0],
            [0.0, 0.0, -0.5, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ],
        dtype=complex,
    )
    npt.assert_array_equal(build_liouvillian(h, channels).matrix, expected)


def test_liouvillian_annihilates_trace():
    # the trace functional is a left null vector: total probability is
    # conserved by construction
    _, h, channels = _model(cutoff=5)
    liou = build_liouvillian(h, channels)
    d = liou.hilbert_dim
    tau = np.zeros(d * d)
    tau[np.arange(d) * (d + 1)] = 1.0
    assert np.abs(tau @ liou.matrix).max() <= 1e-12


def test_liouvillian_spectrum_in_left_half_plane():
    _, h, channels = _model(cutoff=4)
    evals = np.linalg.eigvals(build_liouvillian(h, channels).matrix)
    assert evals.real.max() <= 1e-10


def test_evolve_pure_decay_against_exact_solution():
    params, h, channels = _model(g_cr=0.0, g_rot=0.0, cutoff=2,
                                 gamma=1.0, kappa=0.0)
    rho0 = basis_ket(4, params.space().index(1, 0)).to_density()
    res = evolve(h, channels, rho0, 2.0, sample_times=[0.5, 1.0, 2.0])
    for t, state in zip(res.times, res.states):
        excited = state.matrix[2, 2].real
        assert excited == pytest.approx(np.exp(-t), abs=1e-6)


def test_evolve_dark_vacuum_is_stationary():
    _, h, channels = _model(g_cr=0.0)
    rho0 = basis_ket(h.dim, 0).to_density()
    res = evolve(h, channels, rho0, 50.0, sample_times=[10.0, 50.0])
    for state in res.states:
        assert np.abs(state.matrix - rho0.matrix).max() <= 1e-10


def test_evolve_matches_exact_exponential():
    params, h, channels = _model(cutoff=4, g_cr=0.2, g_rot=0.15,
                                 gamma=0.3, kappa=0.2)
    h_ref, ch_ref = _dense_model(params, 0.3, 0.2)
    m_ref = oracles.dense_liouvillian(h_ref, ch_ref)
    rho0 = basis_ket(h.dim, params.space().index(1, 1)).to_density()
    res = evolve(h, channels, rho0, 5.0, sample_times=[1.0, 5.0])
    for t, state in zip(res.times, res.states):
        exact = oracles.expm_state(m_ref, rho0.matrix, t)
        assert np.abs(state.matrix - exact).max() <= 1e-6


def test_evolve_records_every_accepted_step_by_default():
    _, h, channels = _model(cutoff=3)
    rho0 = basis_ket(h.dim, 0).to_density()
    res = evolve(h, channels, rho0, 1.0)
    assert res.times[0] == 0.0
    assert res.times[-1] == pytest.approx(1.0, abs=0.0)
    assert len(res.states) == res.steps_accepted + 1
    assert res.steps_accepted > 0
    assert res.steps_rejected >= 0


def test_evolve_sampling_grid_is_exact():
    _, h, channels = _model(cutoff=3)
    rho0 = basis_ket(h.dim, 0).to_density()
    samples = [0.0, 0.25, 1.0 / 3.0, 0.999, 1.0]
    res = evolve(h, channels, rho0, 1.0, sample_times=samples)
    npt.assert_array_equal(res.times, samples)


def test_evolve_trace_stays_at_roundoff():
    _, h, channels = _model()
    rho0 = basis_ket(h.dim, 0).to_density()
    res = evolve(h, channels, rho0, 30.0)
    worst = max(s.trace_error() for s in res.states)
    assert worst <= 1e-10


def test_evolve_hermiticity_stays_at_roundoff():
    # long quiescent runs must not let the integrator amplify rounding
    # noise in the fast modes
    _, h, channels = _model()
    rho0 = basis_ket(h.dim, 0).to_density()
    res = evolve(h, channels, rho0, 100.0, sample_times=[90.0, 100.0])
    for state in res.states:
        assert state.hermiticity_defect() <= 1e-12


def test_evolve_validates_arguments():
    _, h, channels = _model(cutoff=3)
    rho0 = basis_ket(h.dim, 0).to_density()
    with pytest.raises(ValueError):
        evolve(h, channels, rho0, 0.0)
    with pytest.raises(ValueError):
        evolve(h, channels, rho0, 1.0, rel_tol=1e-2)
    with pytest.raises(ValueError):
        evolve(h, channels, rho0, 1.0, abs_tol=0.0)
    with pytest.raises(ValueError):
        evolve(h, channels, rho0, 1.0, sample_times=[0.5, 0.5])
    with pytest.raises(ValueError):
        evolve(h, channels, rho0, 1.0, sample_times=[0.5, 2.0])


def test_steady_state_of_pure_decay_is_vacuum():
    _, h, channels = _model(g_cr=0.0, g_rot=0.2, gamma=0.5, kappa=0.5)
    rho = steady_state(h, channels)
    expected = np.zeros((h.dim, h.dim), dtype=complex)
    expected[0, 0] = 1.0
    assert np.abs(rho.matrix - expected).max() <= 1e-10


def test_steady_state_matches_time_marching_oracle():
    params, h, channels = _model(cutoff=6, g_cr=0.2, g_rot=0.15,
                                 gamma=0.5, kappa=0.5)
    rho = steady_state(h, channels)
    h_ref, ch_ref = _dense_model(params, 0.5, 0.5)
    m_ref = oracles.dense_liouvillian(h_ref, ch_ref)
    rho0 = np.zeros((h.dim, h.dim), dtype=complex)
    rho0[0, 0] = 1.0
    # 2^22 fixed RK4 steps of h = 0.05: t_total ~ 2e5 damping times
    marched = oracles.rk4_power_steady(m_ref, rho0, 0.05, 22)
    assert np.abs(rho.matrix - marched).max() <= 1e-8


def test_steady_state_matches_nullspace_oracle():
    params, h, channels = _model(cutoff=5)
    rho = steady_state(h, channels)
    h_ref, ch_ref = _dense_model(params, 0.1, 0.1)
    ref = oracles.nullspace_steady(oracles.dense_liouvillian(h_ref, ch_ref))
    assert np.abs(rho.matrix - ref).max() <= 1e-9


def test_steady_state_residual_is_small():
    _, h, channels = _model()
    rho = steady_state(h, channels)
    residual = np.abs(lindblad_rhs(h, channels, rho)).max()
    assert residual <= 1e-8


def test_steady_state_reached_from_any_initial_state():
    params, h, channels = _model(cutoff=5, g_cr=0.25, g_rot=0.15,
                                 gamma=1.0, kappa=1.0)
    target = steady_state(h, channels)
    rng = np.random.default_rng(55)
    for _ in range(3):
        rho0 = DensityOp(h.dim, oracles.random_density(rng, h.dim))
        res = evolve(h, channels, rho0, 200.0, sample_times=[200.0])
        final = res.states[-1].matrix
        trace_distance = 0.5 * np.abs(
            np.linalg.eigvalsh(final - target.matrix)
        ).sum()
        assert trace_distance <= 1e-5


def test_steady_state_requires_dissipation():
    _, h, _ = _model(cutoff=3)
    silent = [JumpChannel(operator=sigma_minus(), rate=0.0)]
    with pytest.raises(ValueError):
        steady_state(LinOp.from_entries(2, []), silent)


def test_steady_state_detects_nonunique_solutions():
    # H = 0 and a diagonal (dephasing-like) channel leave every diagonal
    # ensemble stationary: the bordered solve must refuse to pick one
    dephase = LinOp.from_entries(2, [(0, 0, 1.0), (1, 1, -1.0)])
    with pytest.raises(SteadyStateError):
        steady_state(LinOp.from_entries(2, []),
                     [JumpChannel(operator=dephase, rate=1.0)])


def test_dark_state_has_zero_steady_emission():
    _, h, channels = _model(g_cr=0.0, g_rot=0.1)
    rho = steady_state(h, channels)
    for ch in channels:
        op = (ch.operator.dag() @ ch.operator).to_dense()
        rate = ch.rate * np.trace(op @ rho.matrix).real
        assert abs(rate) <= 1e-12
