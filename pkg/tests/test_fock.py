import itertools
import math

import numpy as np
import pytest
import scipy.linalg

from swaplab.errors import (
    DimensionCapError,
    InvalidDimensionError,
    NonFiniteError,
    NotUnitaryError,
    SlotMismatchError,
    SystemMismatchError,
)
from swaplab.fock import (
    DensityMatrix,
    LocalOperator,
    ModeSystem,
    StateVector,
    annihilation_matrix,
    apply_local,
    apply_local_density,
    apply_swap,
    creation_matrix,
    embed_operator,
    fidelity,
    identity,
    inner_product,
    matrix_exponential,
    number_matrix,
    partial_trace,
    random_density,
    random_state,
    random_unitary,
    swap_operator,
    trace_distance,
)


def loop_embedding(matrix, slots, dims):
    """Reference full matrix built entry by entry from the index definition."""
    n = math.prod(dims)
    full = np.zeros((n, n), dtype=complex)
    sub_dims = [dims[s] for s in slots]
    for out_idx in itertools.product(*[range(d) for d in dims]):
        for in_idx in itertools.product(*[range(d) for d in dims]):
            if any(out_idx[k] != in_idx[k] for k in range(len(dims)) if k not in slots):
                continue
            r = np.ravel_multi_index([out_idx[s] for s in slots], sub_dims)
            c = np.ravel_multi_index([in_idx[s] for s in slots], sub_dims)
            full[np.ravel_multi_index(out_idx, dims), np.ravel_multi_index(in_idx, dims)] = matrix[r, c]
    return full


def test_annihilation_d2():
    assert np.array_equal(annihilation_matrix(2).matrix, [[0, 1], [0, 0]])


def test_annihilation_ladder_action():
    psi = StateVector.basis(ModeSystem.modes(1, 5), [3])
    out = annihilation_matrix(5).matrix @ psi.amplitudes
    expected = np.zeros(5)
    expected[2] = math.sqrt(3)
    assert np.allclose(out, expected, atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 5, 9])
def test_number_eigenvalue(d):
    a, ad = annihilation_matrix(d).matrix, creation_matrix(d).matrix
    n = ad @ a
    assert abs(n[1, 1] - 1.0) < 1e-15
    assert np.allclose(n, number_matrix(d).matrix)


def test_invalid_dimension():
    with pytest.raises(InvalidDimensionError):
        annihilation_matrix(1)
    with pytest.raises(InvalidDimensionError):
        ModeSystem((3, 1))


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_swap_is_exact_involution(d):
    S = swap_operator(d).matrix
    assert np.array_equal(S @ S, np.eye(d * d))
    assert np.array_equal(S, S.T)


def test_swap_basis_action():
    system = ModeSystem.modes(2, 3)
    out = apply_local(StateVector.basis(system, [0, 1]), swap_operator(3), (0, 1))
    assert np.array_equal(out.amplitudes, StateVector.basis(system, [1, 0]).amplitudes)


def test_swap_conjugates_ladder():
    d = 4
    S = swap_operator(d).matrix
    a = annihilation_matrix(d).matrix
    assert np.max(np.abs(S @ np.kron(a, np.eye(d)) @ S - np.kron(np.eye(d), a))) < 1e-15


def test_apply_identity_bit_for_bit(rng):
    system = ModeSystem.modes(3, 3)
    psi = random_state(system, rng)
    out = apply_local(psi, identity((3, 3)), (0, 2))
    assert np.array_equal(out.amplitudes, psi.amplitudes)


def test_apply_swap_three_modes():
    system = ModeSystem.modes(3, 2)
    out = apply_local(StateVector.basis(system, [0, 1, 0]), swap_operator(2), (0, 1))
    assert np.array_equal(out.amplitudes, StateVector.basis(system, [1, 0, 0]).amplitudes)


SLOT_ARRANGEMENTS = [(0,), (1,), (2,), (0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1),
                     (0, 1, 2), (2, 0, 1), (1, 2, 0)]


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("slots", SLOT_ARRANGEMENTS)
def test_apply_local_matches_full_matrix(d, slots, rng):
    system = ModeSystem.modes(3, d)
    psi = random_state(system, rng)
    U = random_unitary(d ** len(slots), rng)
    op = LocalOperator((d,) * len(slots), U, unitary=True)
    got = apply_local(psi, op, slots).amplitudes
    ref = loop_embedding(U, slots, system.dims) @ psi.amplitudes
    assert np.max(np.abs(got - ref)) < 1e-12
    assert abs(np.linalg.norm(got) - 1.0) < 1e-10


@pytest.mark.parametrize("slots", [(0, 2), (2, 1)])
def test_embed_operator_matches_loop(slots, rng):
    dims = (2, 3, 3) if slots == (2, 1) else (3, 2, 3)
    system = ModeSystem(dims)
    sub = tuple(dims[s] for s in slots)
    U = random_unitary(math.prod(sub), rng)
    op = LocalOperator(sub, U)
    assert np.allclose(embed_operator(op, slots, system), loop_embedding(U, slots, dims), atol=1e-14)


def test_apply_local_mixed_dims_with_ancilla(rng):
    system = ModeSystem((2, 3, 3), ("ancilla-qubit", "mode", "mode"))
    psi = random_state(system, rng)
    U = random_unitary(18, rng)
    op = LocalOperator((2, 3, 3), U, unitary=True)
    got = apply_local(psi, op, (0, 2, 1)).amplitudes
    assert np.max(np.abs(got - loop_embedding(U, (0, 2, 1), system.dims) @ psi.amplitudes)) < 1e-12


def test_apply_local_errors(rng):
    system = ModeSystem.modes(2, 3)
    psi = random_state(system, rng)
    with pytest.raises(SlotMismatchError):
        apply_local(psi, swap_operator(2), (0, 1))
    with pytest.raises(SlotMismatchError):
        apply_local(psi, swap_operator(3), (0, 0))
    with pytest.raises(SlotMismatchError):
        apply_local(psi, swap_operator(3), (0, 5))
    with pytest.raises(NotUnitaryError):
        apply_local(psi, annihilation_matrix(3), (0,))
    with pytest.raises(NotUnitaryError):
        LocalOperator((3,), annihilation_matrix(3).matrix, unitary=True)


def test_norm_preserved_over_many_unitaries(rng):
    system = ModeSystem.modes(3, 4)
    psi = random_state(system, rng)
    for _ in range(50):
        slots = tuple(rng.permutation(3)[:2])
        psi = apply_local(psi, LocalOperator((4, 4), random_unitary(16, rng), unitary=True), slots)
    assert abs(psi.norm() - 1.0) < 1e-10


def test_apply_swap_matches_operator(rng):
    system = ModeSystem.modes(3, 3)
    psi = random_state(system, rng)
    assert np.allclose(apply_swap(psi, 0, 2).amplitudes,
                       apply_local(psi, swap_operator(3), (0, 2)).amplitudes, atol=1e-15)


def test_states_are_immutable(rng):
    psi = random_state(ModeSystem.modes(2, 2), rng)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0


def test_dimension_cap(monkeypatch):
    with pytest.raises(DimensionCapError):
        ModeSystem.modes(21, 2)
    monkeypatch.setenv("SWAPLAB_DIM_CAP", "100")
    with pytest.raises(DimensionCapError):
        ModeSystem.modes(7, 2)
    monkeypatch.setenv("SWAPLAB_DIM_CAP", str(2**22))
    assert ModeSystem.modes(21, 2).total == 2**21


def test_expm_of_zero_is_identity():
    H = np.arange(16, dtype=complex).reshape(4, 4)
    assert np.array_equal(matrix_exponential(H, 0.0).matrix, np.eye(4))


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("theta", [0.0, 0.3, 1.1, math.pi / 2, -2.5])
def test_expm_swap_closed_form(d, theta):
    S = swap_operator(d)
    E = matrix_exponential(S, 1j * theta).matrix
    ref = math.cos(theta) * np.eye(d * d) + 1j * math.sin(theta) * S.matrix
    assert np.max(np.abs(E - ref)) < 1e-12


@pytest.mark.parametrize("scale", [1e-3, 0.5, 3.0, 40.0])
def test_expm_matches_scipy_and_inverts(scale, rng):
    H = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    H = (H - H.conj().T) / 2  # anti-Hermitian keeps exp bounded
    E = matrix_exponential(H, scale).matrix
    assert np.max(np.abs(E - scipy.linalg.expm(scale * H))) < 1e-11
    assert np.max(np.abs(E @ matrix_exponential(H, -scale).matrix - np.eye(8))) < 1e-12


def test_expm_general_matrix_relative(rng):
    H = rng.standard_normal((6, 6)) * 3
    E = matrix_exponential(H).matrix
    ref = scipy.linalg.expm(H)
    assert np.max(np.abs(E - ref)) / np.max(np.abs(ref)) < 1e-12


def test_expm_rejects_nonfinite():
    with pytest.raises(NonFiniteError):
        matrix_exponential(np.array([[np.nan, 0], [0, 1]]))


def test_beam_splitter_splits_single_photon():
    # in the one-photon sector {|10>, |01>} the generator a b^dag - a^dag b is
    # [[0, -1], [1, 0]], so exp(pi/4 G) |10> = (|10> + |01>)/sqrt 2
    d = 3
    a = annihilation_matrix(d).matrix
    G = np.kron(a, a.conj().T) - np.kron(a.conj().T, a)
    U = matrix_exponential(G, math.pi / 4).matrix
    system = ModeSystem.modes(2, d)
    out = U @ StateVector.basis(system, [1, 0]).amplitudes
    ref = (StateVector.basis(system, [1, 0]).amplitudes + StateVector.basis(system, [0, 1]).amplitudes) / math.sqrt(2)
    assert abs(abs(np.vdot(ref, out)) - 1.0) < 1e-12


def test_partial_trace_product_state(rng):
    a = random_state(ModeSystem.modes(1, 3), rng)
    b = random_state(ModeSystem.modes(1, 2), rng)
    rho = DensityMatrix.from_state(a.tensor(b))
    assert np.allclose(partial_trace(rho, [0]).matrix, np.outer(a.amplitudes, a.amplitudes.conj()))
    assert np.allclose(partial_trace(rho, [1]).matrix, np.outer(b.amplitudes, b.amplitudes.conj()))


def test_partial_trace_bell_analog():
    system = ModeSystem.modes(2, 2)
    psi = StateVector(system, (StateVector.basis(system, [0, 1]).amplitudes
                               + StateVector.basis(system, [1, 0]).amplitudes) / math.sqrt(2))
    rho = DensityMatrix.from_state(psi)
    for keep in ([0], [1]):
        assert np.allclose(partial_trace(rho, keep).matrix, np.eye(2) / 2, atol=1e-15)


@pytest.mark.parametrize("keep", [[0], [1], [2], [0, 1], [0, 2], [1, 2], [0, 1, 2]])
def test_partial_trace_preserves_trace_and_hermiticity(keep, rng):
    rho = random_density(ModeSystem((2, 3, 2)), rng)
    red = partial_trace(rho, keep)
    assert abs(red.trace() - 1.0) < 1e-12
    assert red.violations() == []


def test_partial_trace_matches_einsum(rng):
    rho = random_density(ModeSystem((2, 3, 2)), rng)
    t = rho.matrix.reshape(2, 3, 2, 2, 3, 2)
    assert np.allclose(partial_trace(rho, [0, 2]).matrix.reshape(2, 2, 2, 2),
                       np.einsum("abcdbf->acdf", t), atol=1e-14)


def test_partial_trace_errors(rng):
    rho = random_density(ModeSystem((2, 2)), rng)
    with pytest.raises(SlotMismatchError):
        partial_trace(rho, [])
    with pytest.raises(SlotMismatchError):
        partial_trace(rho, [3])


def test_inner_products(rng):
    system = ModeSystem.modes(2, 3)
    psi = random_state(system, rng)
    assert abs(inner_product(psi, psi) - 1.0) < 1e-12
    assert inner_product(StateVector.basis(system, [0, 1]), StateVector.basis(system, [1, 0])) == 0
    with pytest.raises(SystemMismatchError):
        inner_product(psi, random_state(ModeSystem.modes(2, 2), rng))


def test_coherent_overlap_series():
    # oracle: <a|-a> = sum_n e^{-|a|^2} (-|a|^2)^n / n!
    alpha, d = 1.5, 40
    n = np.arange(d)
    amp = np.exp(-alpha**2 / 2) * alpha**n / np.sqrt([float(math.factorial(k)) for k in n])
    system = ModeSystem.modes(1, d)
    plus = StateVector(system, amp)
    minus = StateVector(system, amp * (-1.0) ** n)
    series = sum(math.exp(-alpha**2) * (-alpha**2) ** k / math.factorial(k) for k in range(d))
    assert abs(inner_product(plus, minus) - series) < 1e-12
    assert abs(abs(inner_product(plus, minus)) - math.exp(-4.5)) < 1e-6


def test_fidelity_and_trace_distance(rng):
    system = ModeSystem.modes(2, 2)
    psi = random_state(system, rng)
    rho = DensityMatrix.from_state(psi)
    assert abs(fidelity(rho, psi) - 1.0) < 1e-12
    assert trace_distance(rho, rho) < 1e-14
    phi = random_state(system, rng)
    ov = abs(inner_product(psi, phi)) ** 2
    assert abs(trace_distance(rho, DensityMatrix.from_state(phi)) - math.sqrt(1 - ov)) < 1e-12


def test_apply_local_density_matches_state_evolution(rng):
    system = ModeSystem.modes(3, 2)
    psi = random_state(system, rng)
    op = LocalOperator((2, 2), random_unitary(4, rng), unitary=True)
    rho = apply_local_density(DensityMatrix.from_state(psi), op, (2, 0))
    ref = DensityMatrix.from_state(apply_local(psi, op, (2, 0)))
    assert np.allclose(rho.matrix, ref.matrix, atol=1e-14)


def test_density_violations_detected():
    system = ModeSystem.modes(1, 2)
    assert "trace" in DensityMatrix(system, np.eye(2)).violations()
    assert "positive" in DensityMatrix(system, np.diag([1.5, -0.5])).violations()
    assert "hermitian" in DensityMatrix(system, [[0.5, 1], [0, 0.5]]).violations()
