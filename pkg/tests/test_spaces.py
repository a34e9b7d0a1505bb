import numpy as np
import pytest

from rydgate import (
    build_space,
    computational_subspace,
    embed_comp,
    pauli_basis,
    project_comp,
    transition_op,
)


def test_build_space_dimensions():
    assert build_space(3, False).dim == 27
    assert build_space(4, False).dim == 81
    assert build_space(3, True).dim == 64


@pytest.mark.parametrize("n", [1, 2, 5])
def test_build_space_rejects_unsupported_counts(n):
    with pytest.raises(ValueError):
        build_space(n)


def test_basis_index_label_round_trip():
    space = build_space(3, True)
    for idx in range(space.dim):
        assert space.basis_index(space.basis_label(idx)) == idx
    assert space.basis_index("00r") == 2
    assert space.basis_index("rrr") == 2 * 16 + 2 * 4 + 2


def test_transition_op_structure():
    space = build_space(3)
    op = transition_op(space, 0, 0, 2)
    nz = np.nonzero(op)
    assert len(nz[0]) == 9
    assert np.all(op[nz] == 1.0)
    # adjoint symmetry
    assert np.array_equal(op.conj().T, transition_op(space, 0, 2, 0))
    # projector trace: identity on the two spectator atoms
    proj = transition_op(space, 0, 0, 0)
    assert np.isclose(np.trace(proj), 9.0)


def test_transition_op_completeness():
    space = build_space(3)
    for atom in range(3):
        total = sum(transition_op(space, atom, a, a) for a in range(space.n_levels))
        assert np.allclose(total, np.eye(space.dim))


def test_transition_op_index_errors():
    space = build_space(3)
    with pytest.raises(ValueError):
        transition_op(space, 3, 0, 1)
    with pytest.raises(ValueError):
        transition_op(space, 0, 0, 3)


def test_computational_subspace_indices():
    space = build_space(3)
    cmap = computational_subspace(space)
    assert cmap.indices == (0, 1, 3, 4, 9, 10, 12, 13)
    leak = computational_subspace(build_space(3, True))
    assert leak.indices == (0, 1, 4, 5, 16, 17, 20, 21)


def test_embed_identity_gives_projector():
    space = build_space(3)
    cmap = computational_subspace(space)
    proj = embed_comp(np.eye(8), cmap)
    assert np.isclose(np.trace(proj), 8.0)
    assert np.allclose(proj @ proj, proj)


def test_embed_project_round_trip():
    space = build_space(3)
    cmap = computational_subspace(space)
    rng = np.random.default_rng(7)
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    assert np.allclose(project_comp(embed_comp(a, cmap), cmap), a)


def test_embed_basis_projector_lands_on_labelled_state():
    space = build_space(3)
    cmap = computational_subspace(space)
    small = np.zeros((8, 8))
    small[0b110, 0b110] = 1.0
    full = embed_comp(small, cmap)
    idx = space.basis_index("110")
    assert full[idx, idx] == 1.0
    assert np.isclose(np.trace(full), 1.0)


def test_project_full_identity():
    space = build_space(3)
    cmap = computational_subspace(space)
    assert np.allclose(project_comp(np.eye(space.dim), cmap), np.eye(8))


def test_project_kills_rydberg_projector():
    space = build_space(3)
    cmap = computational_subspace(space)
    ket = space.basis_ket("r0r")
    assert np.allclose(project_comp(np.outer(ket, ket.conj()), cmap), 0.0)


def test_embed_preserves_products():
    space = build_space(3)
    cmap = computational_subspace(space)
    rng = np.random.default_rng(11)
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    b = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    lhs = project_comp(embed_comp(a, cmap) @ embed_comp(b, cmap), cmap)
    assert np.allclose(lhs, a @ b)


def test_embed_dimension_mismatch():
    cmap = computational_subspace(build_space(3))
    with pytest.raises(ValueError):
        embed_comp(np.eye(7), cmap)
    with pytest.raises(ValueError):
        project_comp(np.eye(26), cmap)


def test_pauli_basis_count_and_identity():
    basis = pauli_basis(3)
    assert len(basis) == 64
    assert basis[0].labels == "III"
    assert np.allclose(basis[0].matrix, np.eye(8))
    assert len(pauli_basis(4)) == 256


def test_pauli_basis_orthogonality():
    basis = pauli_basis(3)
    mats = np.stack([p.matrix for p in basis])
    gram = np.einsum("aij,bji->ab", mats, mats)
    assert np.allclose(gram, 8.0 * np.eye(64), atol=1e-12)


def test_pauli_strings_hermitian_unitary():
    for p in pauli_basis(3)[::7]:
        m = p.matrix
        assert np.allclose(m, m.conj().T)
        assert np.allclose(m @ m, np.eye(8))


def test_pauli_expansion_reconstructs_hermitian_matrix():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    a = a + a.conj().T
    recon = np.zeros_like(a)
    for p in pauli_basis(3):
        recon += (np.trace(p.matrix @ a) / 8.0) * p.matrix
    assert np.max(np.abs(recon - a)) < 1e-10


def test_pauli_basis_lexicographic_order():
    basis = pauli_basis(3)
    labels = [p.labels for p in basis]
    assert labels == sorted(labels, key=lambda s: ["IXYZ".index(c) for c in s])
    assert labels[1] == "IIX"
    assert labels[-1] == "ZZZ"
