"""Basis construction and structure constant extraction."""

import numpy as np
import pytest

from oqsident import build_basis, pauli_words, structure_constants, verify_sparsity
from oqsident.liealg import LieBasis


def levi_civita():
    eps = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[i, j, k] = 1.0
        eps[i, k, j] = -1.0
    return eps


def test_word_order_two_qubits():
    words = pauli_words(2)
    assert words[:6] == ["Ix", "Iy", "Iz", "xI", "xx", "xy"]
    assert words[-1] == "zz"
    assert len(words) == 15


def test_word_count_three_qubits():
    assert len(pauli_words(3)) == 63


def test_basis_orthonormality():
    for q in (1, 2, 3):
        basis = build_basis(q)
        gram = np.einsum("mab,nba->mn", basis.generators, basis.generators)
        assert np.allclose(gram, np.eye(basis.n), atol=1e-12)
        assert abs(np.trace(basis.identity @ basis.identity) - 1.0) < 1e-12


def test_build_basis_range_guard():
    with pytest.raises(ValueError):
        build_basis(0)
    with pytest.raises(ValueError):
        build_basis(5)


def test_raw_one_qubit_f_is_two_epsilon_exact():
    # Plain Pauli words close under [s_j, s_k] = 2i eps_jkl s_l; the
    # entries are small integers, so the comparison is exact.
    basis = build_basis(1, normalized=False)
    tensors = structure_constants(basis)
    assert np.array_equal(tensors.f_dense(), 2.0 * levi_civita())
    assert len(tensors.g_val) == 0


def test_normalized_one_qubit_f_is_sqrt2_epsilon():
    basis = build_basis(1)
    tensors = structure_constants(basis)
    assert np.allclose(tensors.f_dense(), np.sqrt(2.0) * levi_civita(), atol=1e-14)
    assert len(tensors.g_val) == 0


def test_reconstruction_identities_one_qubit():
    # f and g must reproduce the product decomposition they came from:
    # [F_j, F_k] = i sum_l f_jkl F_l and
    # {F_j, F_k} = (2/N) delta_jk I + sum_l g_jkl F_l.
    basis = build_basis(1)
    tensors = structure_constants(basis)
    F = basis.generators
    f = tensors.f_dense()
    g = tensors.g_dense()
    N = basis.dim
    eye = np.eye(N)
    for j in range(basis.n):
        for k in range(basis.n):
            comm = F[j] @ F[k] - F[k] @ F[j]
            assert np.allclose(comm, 1j * np.einsum("l,lab->ab", f[j, k], F), atol=1e-12)
            anti = F[j] @ F[k] + F[k] @ F[j]
            expect = (2.0 / N) * (j == k) * eye + np.einsum("l,lab->ab", g[j, k], F)
            assert np.allclose(anti, expect, atol=1e-12)


def test_reconstruction_identities_two_qubits_sampled():
    basis = build_basis(2)
    tensors = structure_constants(basis)
    F = basis.generators
    f = tensors.f_dense()
    g = tensors.g_dense()
    N = basis.dim
    rng = np.random.default_rng(42)
    for _ in range(40):
        j, k = rng.integers(0, basis.n, size=2)
        comm = F[j] @ F[k] - F[k] @ F[j]
        assert np.allclose(comm, 1j * np.einsum("l,lab->ab", f[j, k], F), atol=1e-12)
        anti = F[j] @ F[k] + F[k] @ F[j]
        expect = (2.0 / N) * (j == k) * np.eye(N) + np.einsum("l,lab->ab", g[j, k], F)
        assert np.allclose(anti, expect, atol=1e-12)


def test_tensor_symmetries_two_qubits():
    tensors = structure_constants(build_basis(2))
    f = tensors.f_dense()
    g = tensors.g_dense()
    # total antisymmetry of f: swap of the first pair and cyclic shifts
    assert np.allclose(f, -f.transpose(1, 0, 2), atol=1e-12)
    assert np.allclose(f, f.transpose(1, 2, 0), atol=1e-12)
    # g symmetric in the first pair, zero on the diagonal
    assert np.allclose(g, g.transpose(1, 0, 2), atol=1e-12)
    idx = np.arange(tensors.n)
    assert np.allclose(g[idx, idx, :], 0.0, atol=1e-12)


def test_sparsity_one_per_pair():
    for q in (1, 2):
        rep = verify_sparsity(structure_constants(build_basis(q)))
        assert rep.max_f <= 1
        assert rep.max_g <= 1
        assert rep.one_per_pair


def test_f_lookup_matches_dense():
    tensors = structure_constants(build_basis(2))
    table = tensors.f_lookup()
    f = tensors.f_dense()
    for (j, k), entries in table.items():
        for l, v in entries:
            assert f[j, k, l] == v
    assert sum(len(v) for v in table.values()) == len(tensors.f_val)


def test_broken_basis_rejected():
    basis = build_basis(1)
    gens = basis.generators.copy()
    gens[0] = gens[0] + 0.01j * np.eye(2)  # not Hermitian
    broken = LieBasis(
        num_qubits=1,
        dim=2,
        n=3,
        words=basis.words,
        generators=gens,
        identity=basis.identity,
        normalized=True,
    )
    with pytest.raises(ValueError):
        broken.validate()
    with pytest.raises(ValueError):
        structure_constants(broken)


def test_validate_catches_scale_error():
    basis = build_basis(1, normalized=False)
    basis.normalized = True  # lie about the scaling
    with pytest.raises(ValueError):
        basis.validate()
