import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnd.core import (
    CompletenessError,
    CpMap,
    DimensionError,
    Observable,
    QuantumInstrument,
    apply_cp_map,
    density_operator,
    discard_flag,
    fidelity,
    infinity_norm,
    instrument_channel,
    ket,
    kron,
    maximally_entangled,
    partial_trace,
    projector,
    stinespring_dilate,
)
from qnd.zoo import luders, pauli_observable, random_channel, random_density_matrix, random_instrument, rng_from_seed, trivial_instrument


def rand_matrix(rng, r, c):
    return rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))


def test_kron_identity_and_blocks():
    assert np.allclose(kron(np.eye(2), np.eye(2)), np.eye(4))
    rng = rng_from_seed(1)
    a, b = rand_matrix(rng, 2, 2), rand_matrix(rng, 3, 3)
    out = kron(a, b)
    assert out.shape == (6, 6)
    for i in range(2):
        for j in range(2):
            assert np.allclose(out[3 * i:3 * i + 3, 3 * j:3 * j + 3], a[i, j] * b)


def test_kron_index_oracle():
    rng = rng_from_seed(2)
    a, b = rand_matrix(rng, 2, 2), rand_matrix(rng, 2, 2)
    out = kron(a, b)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    assert out[2 * i + k, 2 * j + l] == pytest.approx(a[i, j] * b[k, l], abs=1e-15)


def test_partial_trace_product_state():
    rng = rng_from_seed(3)
    rho, sigma = random_density_matrix(2, rng), random_density_matrix(3, rng)
    assert np.allclose(partial_trace(kron(rho, sigma), (2, 3), [0]), rho, atol=1e-12)
    assert np.allclose(partial_trace(kron(rho, sigma), (2, 3), [1]), sigma, atol=1e-12)


def test_partial_trace_double_sum_oracle():
    rng = rng_from_seed(4)
    rho = random_density_matrix(6, rng)
    expected = np.zeros((3, 3), dtype=complex)
    for k in range(3):
        for l in range(3):
            expected[k, l] = sum(rho[3 * i + k, 3 * i + l] for i in range(2))
    assert np.abs(partial_trace(rho, (2, 3), [1]) - expected).max() < 1e-12


def test_partial_trace_three_factors_keeps_order():
    rng = rng_from_seed(5)
    a, b, c = (random_density_matrix(d, rng) for d in (2, 3, 2))
    assert np.allclose(partial_trace(kron(a, b, c), (2, 3, 2), [0, 2]), kron(a, c))


def test_partial_trace_shape_mismatch():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(5), (2, 3), [0])


@pytest.mark.parametrize("d", [2, 3, 4])
def test_maximally_entangled_marginals(d):
    phi = maximally_entangled(d)
    rho = projector(phi)
    assert np.abs(partial_trace(rho, (d, d), [0]) - np.eye(d) / d).max() < 1e-12
    assert np.abs(partial_trace(rho, (d, d), [1]) - np.eye(d) / d).max() < 1e-12


def test_maximally_entangled_qubit():
    assert np.allclose(maximally_entangled(2), np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_ricochet_property():
    d = 3
    rng = rng_from_seed(6)
    phi = projector(maximally_entangled(d))
    for _ in range(20):
        a = rand_matrix(rng, d, d)
        lhs = partial_trace(kron(a.T, np.eye(d)) @ phi, (d, d), [1])
        assert np.abs(lhs - a / d).max() < 1e-12


def test_cp_map_identity_and_unitary():
    rng = rng_from_seed(7)
    rho = random_density_matrix(2, rng)
    assert np.allclose(CpMap(np.eye(2)[None])(rho), rho)
    u = np.array([[0, 1], [1j, 0]])
    assert np.allclose(apply_cp_map(CpMap(u[None]), rho), u @ rho @ u.conj().T)


def test_dephasing_plus_state():
    z = pauli_observable("z")
    plus = projector(np.array([1, 1]) / np.sqrt(2))
    out = CpMap(z.projectors)(plus)
    assert np.allclose(out, np.eye(2) / 2, atol=1e-15)


def test_cp_map_rejects_trace_increase():
    with pytest.raises(CompletenessError):
        CpMap(np.array([np.eye(2), np.eye(2)]))


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply_cp_map(CpMap(np.eye(2)[None]), np.eye(3))


def test_instrument_completeness_residual():
    bad = [np.sqrt(0.55) * np.eye(2)[None], np.sqrt(0.55) * np.eye(2)[None]]
    with pytest.raises(CompletenessError) as err:
        QuantumInstrument.from_kraus(bad)
    assert err.value.residual == pytest.approx(0.1, abs=1e-12)


def test_instrument_duplicate_labels():
    with pytest.raises(ValueError):
        QuantumInstrument(("a", "a"), tuple(CpMap(p[None]) for p in pauli_observable("z").projectors))


def test_identity_instrument_channel_attaches_flag():
    rng = rng_from_seed(8)
    rho = random_density_matrix(2, rng)
    out = trivial_instrument(2).channel()(rho)
    assert np.allclose(out, kron(rho, np.array([[1.0]])))


def test_luders_channel_flag_diagonal():
    rho = random_density_matrix(2, rng_from_seed(9))
    out = luders(pauli_observable("x")).channel()(rho)
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
    flag = partial_trace(out, (2, 2), [1])
    assert abs(flag[0, 1]) < 1e-15


def test_instrument_channel_discarding_flag_sums_branches():
    inst = random_instrument(3, 2, 2, seed=10)
    rng = rng_from_seed(11)
    ch = instrument_channel(inst)
    for _ in range(20):
        rho = random_density_matrix(3, rng)
        direct = sum(b(rho) for b in inst.branches)
        assert np.abs(partial_trace(ch(rho), (3, 2), [0]) - direct).max() < 1e-12
        assert np.abs(discard_flag(3, 2)(ch(rho)) - direct).max() < 1e-12


def test_dilation_identity_instrument():
    v = stinespring_dilate(trivial_instrument(2))
    assert v.factor_dims == (2, 1, 1, 1)
    assert np.array_equal(v.matrix, np.eye(2))


def test_dilation_luders_shape():
    v = stinespring_dilate(luders(pauli_observable("z")))
    assert v.matrix.shape == (16, 2)
    assert np.abs(v.matrix.conj().T @ v.matrix - np.eye(2)).max() < 1e-12


def test_dilation_choi_matches_channel():
    inst = random_instrument(2, 3, 1, seed=12)
    v = stinespring_dilate(inst)
    d = inst.dim_in
    # reduced map rho -> Tr_{E Mbar} V rho V^dagger, Choi assembled on basis elements
    choi = np.zeros((d * 2 * 3, d * 2 * 3), dtype=complex)
    for i in range(d):
        for j in range(d):
            e_ij = np.zeros((d, d))
            e_ij[i, j] = 1
            choi += kron(e_ij, v.reduced(e_ij, (0, 1)))
    assert np.abs(choi - inst.channel().choi()).max() < 1e-10


def test_fidelity_cases():
    rng = rng_from_seed(13)
    rho = random_density_matrix(3, rng)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)
    assert fidelity(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(0.0, abs=1e-12)
    u = np.array([1, 1j, -1]) / np.sqrt(3)
    sigma = random_density_matrix(3, rng)
    assert fidelity(projector(u), sigma) == pytest.approx((u.conj() @ sigma @ u).real, abs=1e-10)


def test_infinity_norm_cases():
    assert infinity_norm(np.eye(3)) == pytest.approx(1.0)
    rng = rng_from_seed(14)
    u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert infinity_norm(np.outer(u / np.linalg.norm(u), v.conj() / np.linalg.norm(v))) == pytest.approx(1.0)


def test_infinity_norm_random_vector_oracle():
    rng = rng_from_seed(15)
    a = rand_matrix(rng, 3, 3)
    vs = rng.standard_normal((10_000, 3)) + 1j * rng.standard_normal((10_000, 3))
    vs /= np.linalg.norm(vs, axis=1, keepdims=True)
    sampled = np.linalg.norm(vs @ a.T, axis=1).max()
    norm = infinity_norm(a)
    assert sampled <= norm + 1e-3
    # independent closed form: sqrt of the top eigenvalue of A^dagger A
    assert norm == pytest.approx(np.sqrt(np.linalg.eigvalsh(a.conj().T @ a).max()), rel=1e-12)


def test_ket_and_density_validation():
    with pytest.raises(ValueError):
        ket([1, 1])
    with pytest.raises(ValueError):
        density_operator(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        density_operator(np.array([[0.5, 1], [0, 0.5]]))
    assert np.allclose(density_operator(np.eye(2) / 2), np.eye(2) / 2)


def test_observable_validation():
    with pytest.raises(ValueError):
        Observable([0, 0], pauli_observable("z").projectors)
    with pytest.raises(ValueError):
        Observable([0, 1], np.array([np.eye(2), np.zeros((2, 2))]) * 0.5)
    obs = Observable.from_hermitian(np.diag([1.0, 1.0, 2.0]))
    assert list(obs.degeneracies) == [2, 1]
    assert not obs.is_nondegenerate


def test_observable_matrix_roundtrip():
    rng = rng_from_seed(16)
    h = rand_matrix(rng, 3, 3)
    h = h + h.conj().T
    assert np.allclose(Observable.from_hermitian(h).matrix(), h)


def test_cp_map_compose_and_dual():
    a = random_channel(2, 3, 2, seed=1)
    b = random_channel(3, 2, 3, seed=2)
    rho = random_density_matrix(2, rng_from_seed(17))
    assert np.allclose(b.compose(a)(rho), b(a(rho)))
    y = np.diag([1.0, 2.0, 3.0])
    assert np.trace(y @ a(rho)) == pytest.approx(np.trace(a.dual(y) @ rho))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), d=st.integers(2, 4), n=st.integers(1, 4), k=st.integers(1, 2))
def test_random_instrument_channel_is_trace_preserving(seed, d, n, k):
    inst = random_instrument(d, n, k, seed=seed)
    rho = random_density_matrix(d, rng_from_seed(seed, 99))
    out = inst.channel()(rho)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.linalg.eigvalsh(out).min() > -1e-12
