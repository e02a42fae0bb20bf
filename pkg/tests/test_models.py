import numpy as np
import numpy.testing as npt
import pytest

from crheat import (
    DissipationSpec,
    JumpChannel,
    LinOp,
    RabiParams,
    SidebandParams,
    SpaceSpec,
    build_rabi,
    build_sideband,
    dag,
    destroy,
    identity,
    jump_channels,
    kron,
    sigma_minus,
)

from oracles import dense_rabi, dense_sideband


def test_rabi_matches_dense_reference():
    params = RabiParams(
        omega_a=1.0, omega_b=0.8, g_rot=0.12, g_cr=0.07, fock_cutoff=6
    )
    h = build_rabi(params).to_dense()
    ref = dense_rabi(1.0, 0.8, 0.12, 0.07, 6)
    npt.assert_allclose(h, ref, atol=1e-14)


def test_sideband_matches_dense_reference():
    params = SidebandParams(
        delta=-10.0, nu=10.0, omega_rabi=1.0, eta=0.1,
        include_cr=True, fock_cutoff=5,
    )
    h = build_sideband(params).to_dense()
    ref = dense_sideband(-10.0, 10.0, 1.0, 0.1, True, 5)
    npt.assert_allclose(h, ref, atol=1e-14)


def test_rabi_is_exactly_hermitian():
    for g_rot, g_cr in [(0.0, 0.0), (0.3, 0.0), (0.0, 0.2), (0.15, 0.25)]:
        params = RabiParams(
            omega_a=1.0, omega_b=1.0, g_rot=g_rot, g_cr=g_cr, fock_cutoff=7
        )
        assert build_rabi(params).hermiticity_defect() == 0.0


def test_sideband_is_exactly_hermitian():
    for include_cr in (False, True):
        params = SidebandParams(
            delta=-10.0, nu=10.0, omega_rabi=1.0, eta=0.1,
            include_cr=include_cr, fock_cutoff=6,
        )
        assert build_sideband(params).hermiticity_defect() == 0.0


def _total_excitation(cutoff: int) -> LinOp:
    # integer diagonal q + n, assembled exactly
    space = SpaceSpec(fock_cutoff=cutoff)
    entries = [
        (space.index(q, n), space.index(q, n), float(q + n))
        for q in (0, 1)
        for n in range(cutoff)
    ]
    return LinOp.from_entries(space.total_dim, entries)


def test_rotating_coupling_conserves_total_excitation():
    # With g_cr = 0 the commutator with N_tot vanishes identically,
    # truncation included, because the rotating terms move one quantum
    # between factors.
    params = RabiParams(omega_a=1.0, omega_b=1.0, g_rot=0.2, g_cr=0.0,
                        fock_cutoff=8)
    h = build_rabi(params)
    n_tot = _total_excitation(params.fock_cutoff)
    assert (h @ n_tot - n_tot @ h).nnz == 0


def test_counter_rotating_coupling_breaks_conservation():
    params = RabiParams(omega_a=1.0, omega_b=1.0, g_rot=0.2, g_cr=0.1,
                        fock_cutoff=8)
    h = build_rabi(params)
    n_tot = _total_excitation(params.fock_cutoff)
    assert (h @ n_tot - n_tot @ h).nnz > 0


def test_rabi_coupling_matrix_elements():
    # N = 2: rotating term links |0,1> (index 1) and |1,0> (index 2);
    # the counter-rotating term links |0,0> (0) and |1,1> (3).
    params = RabiParams(omega_a=1.0, omega_b=1.0, g_rot=0.3, g_cr=0.05,
                        fock_cutoff=2)
    h = build_rabi(params).to_dense()
    assert h[2, 1] == pytest.approx(0.3, abs=0.0)
    assert h[3, 0] == pytest.approx(0.05, abs=0.0)
    assert h[0, 0] == 0.0


def test_sideband_include_cr_difference():
    base = dict(delta=-10.0, nu=10.0, omega_rabi=1.0, eta=0.1, fock_cutoff=5)
    h_rot = build_sideband(SidebandParams(include_cr=False, **base))
    h_full = build_sideband(SidebandParams(include_cr=True, **base))
    n = base["fock_cutoff"]
    cr = kron(dag(sigma_minus()), dag(destroy(n)))
    expected = (cr + dag(cr)) * (0.5 * base["eta"] * base["omega_rabi"])
    assert h_full - h_rot == expected


def test_builders_are_deterministic():
    params = RabiParams(omega_a=1.0, omega_b=1.0, g_rot=0.1, g_cr=0.1,
                        fock_cutoff=5)
    assert build_rabi(params) == build_rabi(params)


def test_jump_channels_operators_and_rates():
    space = RabiParams(omega_a=1.0, omega_b=1.0, g_rot=0.0, g_cr=0.0,
                       fock_cutoff=3).space()
    channels = jump_channels(DissipationSpec(gamma_a=0.25, kappa_b=0.5), space)
    assert [c.rate for c in channels] == [0.25, 0.5]
    assert channels[0].operator == kron(sigma_minus(), identity(3))
    assert channels[1].operator == kron(identity(2), destroy(3))


def test_jump_channels_keep_zero_rate_entries():
    # channel indices stay stable even when one rate is switched off
    space = RabiParams(omega_a=1.0, omega_b=1.0, g_rot=0.0, g_cr=0.0,
                       fock_cutoff=3).space()
    channels = jump_channels(DissipationSpec(gamma_a=1.0, kappa_b=0.0), space)
    assert len(channels) == 2
    assert channels[1].rate == 0.0


@pytest.mark.parametrize(
    "kwargs,field",
    [
        (dict(omega_a=0.0, omega_b=1.0, g_rot=0.1, g_cr=0.0, fock_cutoff=5),
         "omega_a"),
        (dict(omega_a=1.0, omega_b=-1.0, g_rot=0.1, g_cr=0.0, fock_cutoff=5),
         "omega_b"),
        (dict(omega_a=1.0, omega_b=1.0, g_rot=-0.1, g_cr=0.0, fock_cutoff=5),
         "g_rot"),
        (dict(omega_a=1.0, omega_b=1.0, g_rot=0.1, g_cr=-0.2, fock_cutoff=5),
         "g_cr"),
        (dict(omega_a=1.0, omega_b=1.0, g_rot=0.1, g_cr=0.0, fock_cutoff=1),
         "fock_cutoff"),
    ],
)
def test_rabi_params_validation_names_field(kwargs, field):
    with pytest.raises(ValueError, match=field):
        RabiParams(**kwargs)


def test_rabi_params_reject_nonfinite():
    with pytest.raises(ValueError):
        RabiParams(omega_a=np.nan, omega_b=1.0, g_rot=0.1, g_cr=0.0,
                   fock_cutoff=5)


@pytest.mark.parametrize(
    "kwargs,field",
    [
        (dict(delta=-10.0, nu=0.0, omega_rabi=1.0, eta=0.1, include_cr=True,
              fock_cutoff=5), "nu"),
        (dict(delta=-10.0, nu=10.0, omega_rabi=-1.0, eta=0.1, include_cr=True,
              fock_cutoff=5), "omega_rabi"),
        (dict(delta=-10.0, nu=10.0, omega_rabi=1.0, eta=0.0, include_cr=True,
              fock_cutoff=5), "eta"),
        (dict(delta=-10.0, nu=10.0, omega_rabi=1.0, eta=1.0, include_cr=True,
              fock_cutoff=5), "eta"),
        (dict(delta=-10.0, nu=10.0, omega_rabi=1.0, eta=0.1, include_cr=1,
              fock_cutoff=5), "include_cr"),
    ],
)
def test_sideband_params_validation_names_field(kwargs, field):
    with pytest.raises(ValueError, match=field):
        SidebandParams(**kwargs)


def test_dissipation_spec_validation():
    with pytest.raises(ValueError):
        DissipationSpec(gamma_a=-0.1, kappa_b=0.1)
    with pytest.raises(ValueError):
        DissipationSpec(gamma_a=0.0, kappa_b=0.0)
    spec = DissipationSpec(gamma_a=0.0, kappa_b=0.3)
    assert spec.gamma_a == 0.0


def test_jump_channel_validation():
    with pytest.raises(ValueError):
        JumpChannel(operator=sigma_minus(), rate=-1.0)


def test_params_space_helpers():
    rabi = RabiParams(omega_a=1.0, omega_b=1.0, g_rot=0.1, g_cr=0.0,
                      fock_cutoff=9)
    assert rabi.space().total_dim == 18
    side = SidebandParams(delta=-10.0, nu=10.0, omega_rabi=1.0, eta=0.1,
                          include_cr=True, fock_cutoff=15)
    assert side.space().fock_cutoff == 15
