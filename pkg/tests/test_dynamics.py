import numpy as np
import pytest

from rydgate import (
    DecayModel,
    DriveParams,
    InteractionGraph,
    IntegrationError,
    IntegratorConfig,
    ProcessMap,
    SystemModel,
    build_space,
    computational_subspace,
    default_step,
    evolve_density,
    evolve_ket,
    extract_channel,
    full_hamiltonian_terms,
    gate_time,
    hamiltonian_effective,
    interaction_frame_phases,
    jump_operators,
    rotated_hamiltonian_terms,
    transition_op,
)

WP = 2 * np.pi


@pytest.fixture(scope="module")
def paper_model():
    return SystemModel(
        space=build_space(3),
        drives=DriveParams(omega_prime=WP, omega1=0.05 * WP, omega2=-0.05 * WP, delta=50 * WP),
        interactions=InteractionGraph.from_pairs(
            3, {(0, 1): 50 * WP / 8, (0, 2): 50 * WP, (1, 2): 50 * WP}
        ),
    )


def test_gate_time_values():
    assert gate_time(0.05 * WP, -0.05 * WP) == pytest.approx(7.0710678, abs=1e-6)
    assert gate_time(0.3, 0.0) == pytest.approx(np.pi / 0.3)
    assert gate_time(0.1, -0.1) == pytest.approx(2 * gate_time(0.2, -0.2))
    with pytest.raises(ValueError):
        gate_time(0.0, 0.0)


def test_evolve_zero_hamiltonian_is_identity():
    psi0 = np.zeros(4, dtype=complex)
    psi0[2] = 1.0
    res = evolve_ket(np.zeros((4, 4)), psi0, t_final=3.0, cfg=IntegratorConfig(dt=0.1))
    assert np.allclose(res.final, psi0)
    assert res.drift < 1e-14


def test_two_level_rabi_oscillation():
    omega = 0.8
    h = np.array([[0.0, omega], [omega, 0.0]], dtype=complex)
    psi0 = np.array([1.0, 0.0], dtype=complex)
    cfg = IntegratorConfig(dt=1e-3, store_every=100)
    res = evolve_ket(h, psi0, t_final=4.0, cfg=cfg)
    for t, state in zip(res.times, res.states):
        assert abs(state[1]) ** 2 == pytest.approx(np.sin(omega * t) ** 2, abs=1e-8)


def test_effective_gate_flips_target(paper_model):
    h = hamiltonian_effective(paper_model)
    tg = gate_time(paper_model.drives.omega1, paper_model.drives.omega2)
    space = paper_model.space
    res = evolve_ket(h, space.basis_ket("110"), tg, IntegratorConfig(dt=1e-3))
    overlap = abs(np.vdot(space.basis_ket("111"), res.final)) ** 2
    assert overlap > 1.0 - 1e-8


def test_full_model_population_transfer(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    tg = gate_time(paper_model.drives.omega1, paper_model.drives.omega2)
    space = paper_model.space
    res = evolve_ket(terms, space.basis_ket("110"), tg)
    assert abs(np.vdot(space.basis_ket("111"), res.final)) ** 2 >= 0.99
    assert res.drift < 1e-6


def test_evolve_ket_rejects_unnormalized():
    with pytest.raises(ValueError):
        evolve_ket(np.zeros((2, 2)), np.array([1.0, 1.0]), 1.0, IntegratorConfig(dt=0.1))


def test_step_enforcement(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    psi0 = paper_model.space.basis_ket("000")
    # (2 pi / delta) / 40 is the legal limit for this drive
    with pytest.raises(IntegrationError):
        evolve_ket(terms, psi0, 0.1, IntegratorConfig(dt=0.002))


def test_default_step_matches_drive_phase(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    assert default_step(terms) == pytest.approx((2 * np.pi / (50 * WP)) / 50)


def test_callable_hamiltonian_requires_dt():
    fn = lambda t: np.zeros((2, 2), dtype=complex)
    with pytest.raises(IntegrationError):
        evolve_ket(fn, np.array([1.0, 0.0]), 1.0)
    res = evolve_ket(fn, np.array([1.0, 0.0]), 1.0, IntegratorConfig(dt=0.1))
    assert np.allclose(res.final, [1.0, 0.0])


def test_lindblad_reduces_to_schroedinger(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    space = paper_model.space
    psi0 = space.basis_ket("110")
    t = 0.8
    res_k = evolve_ket(terms, psi0, t)
    rho0 = np.outer(psi0, psi0.conj())
    res_d = evolve_density(terms, [], rho0, t)
    expected = np.outer(res_k.final, res_k.final.conj())
    assert np.max(np.abs(res_d.final - expected)) < 1e-6


def test_single_atom_decay_closed_form():
    space = build_space(3)
    gamma = 0.4
    model = SystemModel(
        space=space,
        drives=DriveParams(omega_prime=WP, omega1=0.0, omega2=0.05 * WP, delta=50 * WP),
        interactions=InteractionGraph.from_pairs(3, {}),
        decay=DecayModel(gamma=gamma, channels="two"),
    )
    jumps = jump_operators(model)
    ket = space.basis_ket("r00")
    rho0 = np.outer(ket, ket.conj())
    t = 2.5
    res = evolve_density(np.zeros((27, 27)), jumps, rho0, t, IntegratorConfig(dt=0.01))
    p_r = res.final[space.basis_index("r00"), space.basis_index("r00")].real
    p_0 = res.final[space.basis_index("000"), space.basis_index("000")].real
    p_1 = res.final[space.basis_index("100"), space.basis_index("100")].real
    assert p_r == pytest.approx(np.exp(-gamma * t), abs=1e-8)
    assert p_0 == pytest.approx((1 - np.exp(-gamma * t)) / 2, abs=1e-8)
    assert p_1 == pytest.approx((1 - np.exp(-gamma * t)) / 2, abs=1e-8)
    assert res.drift < 1e-10


def test_maximally_mixed_computational_state_is_stationary():
    space = build_space(3)
    model = SystemModel(
        space=space,
        drives=DriveParams(omega_prime=WP, omega1=0.05 * WP, omega2=-0.05 * WP, delta=50 * WP),
        interactions=InteractionGraph.from_pairs(3, {}),
        decay=DecayModel(gamma=0.3, channels="two"),
    )
    jumps = jump_operators(model)
    cmap = computational_subspace(space)
    rho0 = np.zeros((27, 27), dtype=complex)
    for idx in cmap.indices:
        rho0[idx, idx] = 1.0 / 8.0
    res = evolve_density(np.zeros((27, 27)), jumps, rho0, 2.0, IntegratorConfig(dt=0.01))
    assert np.max(np.abs(res.final - rho0)) < 1e-12


def test_hermitize_keeps_density_hermitian(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    space = paper_model.space
    ket = (space.basis_ket("110") + space.basis_ket("000")) / np.sqrt(2)
    rho0 = np.outer(ket, ket.conj())
    res = evolve_density(terms, [], rho0, 0.5)
    assert np.max(np.abs(res.final - res.final.conj().T)) < 1e-12


def test_zero_time_channel_is_identity(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    cmap = computational_subspace(paper_model.space)
    chan = extract_channel(terms, [], cmap, 0.0)
    assert np.allclose(chan.superoperator, np.eye(64), atol=1e-12)


def test_channel_density_path_matches_ket_path(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    cmap = computational_subspace(paper_model.space)
    t = 0.9
    chan_ket = extract_channel(terms, [], cmap, t)
    # empty-but-present jump list forces the matrix-unit path at zero rate
    chan_rho = extract_channel(terms, [(0.0, np.zeros((27, 27)))], cmap, t)
    assert np.max(np.abs(chan_ket.superoperator - chan_rho.superoperator)) < 1e-6


def test_channel_linearity_and_hermiticity_preservation(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    cmap = computational_subspace(paper_model.space)
    chan = extract_channel(terms, [], cmap, 0.7)
    rng = np.random.default_rng(21)
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    b = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    al, be = 0.3 - 0.2j, 1.1 + 0.7j
    lhs = chan.apply(al * a + be * b)
    rhs = al * chan.apply(a) + be * chan.apply(b)
    assert np.max(np.abs(lhs - rhs)) < 1e-8
    assert np.max(np.abs(chan.apply(a.conj().T) - chan.apply(a).conj().T)) < 1e-8


def test_channel_trace_behaviour(paper_model):
    space = paper_model.space
    cmap = computational_subspace(space)
    # no drive, two-channel decay: computational states are dark, so the
    # induced channel is exactly trace preserving
    dark = SystemModel(
        space=space,
        drives=paper_model.drives,
        interactions=paper_model.interactions,
        decay=DecayModel(gamma=0.01, channels="two"),
    )
    chan0 = extract_channel(
        np.zeros((27, 27)), jump_operators(dark), cmap, 1.0, IntegratorConfig(dt=0.01)
    )
    rho = np.eye(8) / 8.0
    assert np.trace(chan0.apply(rho)).real == pytest.approx(1.0, abs=1e-9)
    # with the drives on, transient rydberg population is projected away,
    # so the trace can only shrink
    terms = full_hamiltonian_terms(dark)
    chan1 = extract_channel(terms, jump_operators(dark), cmap, 0.05)
    tr = np.trace(chan1.apply(rho)).real
    assert tr <= 1.0 + 1e-9
    assert tr >= 0.99


def test_monodromy_equals_direct_stepping(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    cmap = computational_subspace(paper_model.space)
    t = 0.02 * 7.4  # 7.4 drive periods
    direct = IntegratorConfig(dt=(2 * np.pi / (50 * WP)) / 50)
    chan_a = extract_channel(terms, [], cmap, t)
    chan_b = extract_channel(terms, [], cmap, t, direct)
    assert np.max(np.abs(chan_a.superoperator - chan_b.superoperator)) < 1e-10
    model = SystemModel(
        space=paper_model.space,
        drives=paper_model.drives,
        interactions=paper_model.interactions,
        decay=DecayModel(gamma=0.01, channels="two"),
    )
    jumps = jump_operators(model)
    chan_c = extract_channel(terms, jumps, cmap, t)
    chan_d = extract_channel(terms, jumps, cmap, t, direct)
    assert np.max(np.abs(chan_c.superoperator - chan_d.superoperator)) < 1e-10


def test_adaptive_matches_fixed_step(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    space = paper_model.space
    psi0 = space.basis_ket("110")
    t = 1.3
    res_fixed = evolve_ket(terms, psi0, t)
    res_adapt = evolve_ket(
        terms, psi0, t, IntegratorConfig(method="adaptive", rel_tol=1e-10, abs_tol=1e-12)
    )
    assert np.max(np.abs(res_fixed.final - res_adapt.final)) < 1e-6


def test_frame_consistency(paper_model):
    # propagating in the lab-like frame then rotating equals propagating
    # with the interaction-rotated Hamiltonian
    terms_full = full_hamiltonian_terms(paper_model)
    terms_rot = rotated_hamiltonian_terms(paper_model)
    space = paper_model.space
    kets = [space.basis_ket(lbl) for lbl in ("000", "110", "011")]
    psi0 = sum(kets) / np.sqrt(3)
    t = 1.1
    cfg = IntegratorConfig(dt=1e-4)  # resolve both frames well below the tolerance
    res_full = evolve_ket(terms_full, psi0, t, cfg)
    res_rot = evolve_ket(terms_rot, psi0, t, cfg)
    rotated = interaction_frame_phases(paper_model, t) * res_full.final
    assert np.max(np.abs(rotated - res_rot.final)) < 1e-6


def test_step_doubling_convergence(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    space = paper_model.space
    psi0 = space.basis_ket("110")
    t = 1.0
    base = (2 * np.pi / (50 * WP)) / 50
    res_1 = evolve_ket(terms, psi0, t, IntegratorConfig(dt=base))
    res_2 = evolve_ket(terms, psi0, t, IntegratorConfig(dt=base / 2))
    assert np.max(np.abs(res_1.final - res_2.final)) < 1e-7


def test_store_every_sampling(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    psi0 = paper_model.space.basis_ket("000")
    cfg = IntegratorConfig(dt=1e-4, store_every=200)
    res = evolve_ket(terms, psi0, 0.2, cfg)
    assert len(res.times) == 11  # 2000 steps: 0, 200, ..., 1800, 2000
    assert res.times[0] == 0.0
    assert res.times[-1] == pytest.approx(0.2)


def test_population_tracking(paper_model):
    terms = full_hamiltonian_terms(paper_model)
    space = paper_model.space
    psi0 = space.basis_ket("110")
    tg = gate_time(paper_model.drives.omega1, paper_model.drives.omega2)
    res = evolve_ket(
        terms, psi0, tg,
        IntegratorConfig(store_every=2000),
        track={"start": space.basis_ket("110"), "end": space.basis_ket("111")},
    )
    assert res.populations["start"][0] == pytest.approx(1.0)
    assert res.populations["end"][-1] >= 0.99
    assert len(res.populations["end"]) == len(res.times)


def test_process_map_output_phases():
    rng = np.random.default_rng(3)
    w = np.linalg.qr(rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))[0]
    chan = ProcessMap.from_block_unitary(w, t_gate=1.0)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, 8))
    shifted = chan.with_output_phases(phases)
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    c = np.diag(phases)
    assert np.allclose(shifted.apply(a), c @ chan.apply(a) @ c.conj().T)
