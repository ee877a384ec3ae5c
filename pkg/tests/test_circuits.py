import math

import numpy as np
import pytest

from swaplab.circuits import (
    NoiseSpec,
    PrimitiveGate,
    PrimitiveKind,
    apply_collective_noise,
    beam_splitter,
    controlled_swap_circuit,
    controlled_swap_report,
    eswap_via_circuit,
    eswap_via_circuit_with_fidelity,
    transient_leakage,
)
from swaplab.errors import NotUnitaryError, SlotMismatchError
from swaplab.fock import ModeSystem, StateVector, number_matrix, random_state
from swaplab.logical import eswap2, eswap4, ideal_cswap


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_cswap_circuit_matches_ideal(d):
    rep = controlled_swap_report(d)
    assert rep.ideal_error < 1e-10
    assert rep.block_leakage < 1e-10
    assert rep.working_truncation == 2 * d - 1


def test_cswap_needs_working_truncation():
    # at the bare truncation the beam splitter is cut and the composition is wrong
    assert controlled_swap_report(3, working_truncation=3).ideal_error > 1e-3
    with pytest.raises(ValueError):
        controlled_swap_report(3, working_truncation=2)


def test_cswap_operator_basis_action():
    op = controlled_swap_circuit(3).matrix.reshape(2, 3, 3, 2, 3, 3)
    # control |1>: |1,2> -> |2,1>; control |0>: unchanged
    assert abs(op[1, 2, 1, 1, 1, 2] - 1) < 1e-10
    assert abs(op[0, 1, 2, 0, 1, 2] - 1) < 1e-10


@pytest.mark.parametrize("d", [2, 4])
def test_beam_splitter_conserves_photon_number(d):
    bs = beam_splitter(d, 0.37).matrix
    N = np.kron(number_matrix(d).matrix, np.eye(d)) + np.kron(np.eye(d), number_matrix(d).matrix)
    assert np.max(np.abs(bs @ N - N @ bs)) < 1e-12


def test_transient_leakage_positive_at_bare_cutoff():
    system = ModeSystem.modes(2, 3)
    assert transient_leakage(StateVector.basis(system, [0, 0]), (0, 1)) < 1e-15
    assert transient_leakage(StateVector.basis(system, [2, 2]), (0, 1)) > 0.1


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("npairs", [1, 2])
def test_eswap_via_circuit_matches_direct(seed, npairs):
    rng = np.random.Generator(np.random.PCG64(seed))
    d = 3
    theta = float(rng.uniform(-math.pi, math.pi))
    psi = random_state(ModeSystem.modes(4, d), rng)
    if npairs == 1:
        out, fid = eswap_via_circuit_with_fidelity(psi, theta, [(1, 3)])
        ref = eswap2(psi, theta, (1, 3))
    else:
        out, fid = eswap_via_circuit_with_fidelity(psi, theta, [(0, 2), (1, 3)])
        ref = eswap4(psi, theta, ((0, 2), (1, 3)))
    assert np.max(np.abs(out.amplitudes - ref.amplitudes)) < 1e-10
    assert fid >= 1 - 1e-10


def test_eswap_via_beam_splitter_circuit(rng):
    psi = random_state(ModeSystem.modes(2, 2), rng)
    out = eswap_via_circuit(psi, 0.8, [(0, 1)], use_circuit_cswap=True)
    assert np.max(np.abs(out.amplitudes - eswap2(psi, 0.8, (0, 1)).amplitudes)) < 1e-10


def test_eswap_via_circuit_rejects_overlapping_pairs(rng):
    psi = random_state(ModeSystem.modes(3, 2), rng)
    with pytest.raises(SlotMismatchError):
        eswap_via_circuit(psi, 0.1, [(0, 1), (1, 2)])


def test_primitive_gate_ideal_cswap(rng):
    system = ModeSystem((2, 3, 3), ("ancilla-qubit", "mode", "mode"))
    psi = random_state(system, rng)
    out = PrimitiveGate(PrimitiveKind.IDEAL_CSWAP, (0, 1, 2)).apply(psi)
    assert np.allclose(out.amplitudes, ideal_cswap(3).matrix @ psi.amplitudes)


def test_noise_unitaries():
    U = NoiseSpec(generator="number_phase", theta=0.9).unitary(4)
    assert np.allclose(np.diag(U), np.exp(0.9j * np.arange(4)))
    R = NoiseSpec(generator="random_hermitian", theta=0.9, seed=7).unitary(4)
    assert np.max(np.abs(R.conj().T @ R - np.eye(4))) < 1e-12
    assert np.array_equal(R, NoiseSpec(generator="random_hermitian", theta=0.9, seed=7).unitary(4))
    assert np.array_equal(NoiseSpec.none().unitary(3), np.eye(3))
    with pytest.raises(NotUnitaryError):
        NoiseSpec(generator="matrix", matrix=np.ones((2, 2)))
    with pytest.raises(ValueError):
        NoiseSpec(generator="thermal")


def test_noise_json_roundtrip():
    n = NoiseSpec(generator="matrix", matrix=np.diag([1, 1j]), modes=(0, 2))
    back = NoiseSpec.from_json(n.to_json())
    assert np.array_equal(back.matrix, n.matrix) and back.modes == (0, 2)
    assert NoiseSpec.from_json({"kind": "none"}).kind.value == "none"


def test_collective_noise_matches_kron(rng):
    psi = random_state(ModeSystem.modes(3, 3), rng)
    noise = NoiseSpec(generator="random_hermitian", theta=0.5, seed=1)
    U = noise.unitary(3)
    ref = np.kron(np.kron(U, U), U) @ psi.amplitudes
    assert np.allclose(apply_collective_noise(psi, noise).amplitudes, ref, atol=1e-13)
    sub = NoiseSpec(generator="random_hermitian", theta=0.5, seed=1, modes=(1,))
    ref1 = np.kron(np.kron(np.eye(3), U), np.eye(3)) @ psi.amplitudes
    assert np.allclose(apply_collective_noise(psi, sub).amplitudes, ref1, atol=1e-13)


def test_collective_noise_commutes_with_swap(rng):
    psi = random_state(ModeSystem.modes(2, 4), rng)
    noise = NoiseSpec(generator="random_hermitian", theta=1.1, seed=3)
    a = eswap2(apply_collective_noise(psi, noise), 0.4, (0, 1))
    b = apply_collective_noise(eswap2(psi, 0.4, (0, 1)), noise)
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-13
