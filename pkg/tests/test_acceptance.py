"""Acceptance criteria, one test each, at their stated tolerances and time budgets."""

import math
import time

import numpy as np
import pytest
from scipy.stats import unitary_group

from swaplab.circuits import NoiseSpec, controlled_swap_circuit, eswap_via_circuit_with_fidelity
from swaplab.compiler import GateKind, lower_to_native, random_circuit
from swaplab.encodings import EncodingSpec, overlap
from swaplab.experiments import dfs, init_yield, phase_scaling
from swaplab.fock import LocalOperator, ModeSystem, matrix_exponential, random_state, swap_operator
from swaplab.logical import (
    LogicalLayout,
    Scheme,
    project_swap_test,
    subspace_commutator_norm,
    swap_test,
    swap_test_probabilities,
)
from swaplab.ops import ESwap4
from swaplab.runtime import compare_with_oracle
from swaplab.verify import gate_identity_errors


def report(n, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")


def perm_swap(n, d, i, j):
    """Dense permutation exchanging modes i and j, from index arithmetic alone."""
    N = d**n
    P = np.zeros((N, N))
    for idx in range(N):
        digits = list(np.unravel_index(idx, (d,) * n))
        digits[i], digits[j] = digits[j], digits[i]
        P[np.ravel_multi_index(digits, (d,) * n), idx] = 1
    return P


def test_criterion_01_operator_algebra():
    t0 = time.perf_counter()
    worst_sq = worst_exp = worst_comm = 0.0
    for d in (2, 3, 4, 6):
        S = swap_operator(d).matrix
        assert np.array_equal(S, perm_swap(2, d, 0, 1))
        worst_sq = max(worst_sq, float(np.max(np.abs(S @ S - np.eye(d * d)))))
        for theta in np.linspace(-math.pi, math.pi, 13):
            E = matrix_exponential(LocalOperator((d, d), S), 1j * theta).matrix
            closed = math.cos(theta) * np.eye(d * d) + 1j * math.sin(theta) * S
            worst_exp = max(worst_exp, float(np.max(np.abs(E - closed))))
        for seed in range(20):
            U = unitary_group.rvs(d, random_state=1000 * d + seed)
            UU = np.kron(U, U)
            worst_comm = max(worst_comm, float(np.max(np.abs(UU @ S - S @ UU))))
    elapsed = time.perf_counter() - t0
    ok = worst_sq == 0.0 and worst_exp < 1e-12 and worst_comm < 1e-12 and elapsed < 10
    report(1, ok, f"S^2-I={worst_sq:.1e} expm={worst_exp:.1e} comm={worst_comm:.1e} in {elapsed:.2f}s")
    assert worst_sq == 0.0
    assert worst_exp < 1e-12
    assert worst_comm < 1e-12
    assert elapsed < 10


GATE_SPECS = [EncodingSpec.fock(4), EncodingSpec.coherent(2.0, 14), EncodingSpec.cat(2.0, 14),
              EncodingSpec.gkp(0.35, 14)]


def test_criterion_02_gate_identities():
    t0 = time.perf_counter()
    failures, lines = [], []
    for spec in GATE_SPECS:
        ov = abs(overlap(spec))
        tol = 1e-8 if spec.kind.value == "fock" else 1e-8 + 10 * ov
        worst = 0.0
        for name, err, _ in gate_identity_errors(spec):
            worst = max(worst, err)
            if not err < tol:
                failures.append((spec.kind.value, name, err, tol))
        lines.append(f"{spec.kind.value}: {worst:.2e} < {tol:.2e}")
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 120
    report(2, ok, "; ".join(lines) + f" in {elapsed:.1f}s")
    assert not failures, failures
    assert elapsed < 120


def test_criterion_03_controlled_swap_decomposition():
    t0 = time.perf_counter()
    worst = 0.0
    for d in (2, 3, 4, 6):
        n = d * d
        ideal = np.zeros((2 * n, 2 * n))
        ideal[:n, :n] = np.eye(n)
        ideal[n:, n:] = perm_swap(2, d, 0, 1)
        worst = max(worst, float(np.max(np.abs(controlled_swap_circuit(d).matrix - ideal))))
    elapsed = time.perf_counter() - t0
    report(3, worst < 1e-10 and elapsed < 30, f"max |C_circuit - C| = {worst:.2e} in {elapsed:.2f}s")
    assert worst < 1e-10
    assert elapsed < 30


def test_criterion_04_eswap_circuit():
    t0 = time.perf_counter()
    d, n = 3, 4
    S02, S13 = perm_swap(n, d, 0, 2), perm_swap(n, d, 1, 3)
    worst, min_fid = 0.0, 1.0
    for seed in range(10):
        rng = np.random.Generator(np.random.PCG64(seed))
        psi = random_state(ModeSystem.modes(n, d), rng)
        theta = float(rng.uniform(-math.pi, math.pi))
        for pairs, P in (([(0, 2)], S02), ([(0, 2), (1, 3)], S02 @ S13)):
            closed = math.cos(theta) * psi.amplitudes + 1j * math.sin(theta) * (P @ psi.amplitudes)
            for use_circuit in (False, True):
                out, fid = eswap_via_circuit_with_fidelity(psi, theta, pairs, use_circuit_cswap=use_circuit)
                worst = max(worst, float(np.max(np.abs(out.amplitudes - closed))))
                min_fid = min(min_fid, fid)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and min_fid >= 1 - 1e-10 and elapsed < 60
    report(4, ok, f"max error {worst:.2e}, min ancilla fidelity 1-{1 - min_fid:.1e} in {elapsed:.2f}s")
    assert worst < 1e-10
    assert min_fid >= 1 - 1e-10
    assert elapsed < 60


def test_criterion_05_phase_gate_scaling():
    t0 = time.perf_counter()
    r = phase_scaling((0.16, 0.08, 0.04, 0.02, 0.01), math.pi / 4, EncodingSpec.fock())
    eps = [row[0] for row in r.rows]
    tds = [row[2] for row in r.rows]
    slope = float(np.polyfit(np.log(eps), np.log(tds), 1)[0])
    monotone = all(b < a for a, b in zip(tds, tds[1:]))
    elapsed = time.perf_counter() - t0
    ok = 0.85 <= slope <= 1.15 and monotone and elapsed < 120
    report(5, ok, f"slope {slope:.4f}, monotone={monotone}, trace distances {[f'{t:.2e}' for t in tds]}")
    assert eps == [0.16, 0.08, 0.04, 0.02, 0.01]
    assert 0.85 <= slope <= 1.15
    assert monotone
    assert elapsed < 120


def test_criterion_06_swap_test_statistics():
    born_err = repeat_err = 0.0
    for d, seed in ((2, 0), (3, 1), (4, 2)):
        rng = np.random.Generator(np.random.PCG64(seed))
        psi = random_state(ModeSystem.modes(2, d), rng)
        S = perm_swap(2, d, 0, 1)
        p_plus = (1 + np.vdot(psi.amplitudes, S @ psi.amplitudes).real) / 2
        probs = swap_test_probabilities(psi, (0, 1))
        born_err = max(born_err, abs(probs[1] - p_plus), abs(probs[-1] - (1 - p_plus)))
        for outcome in (1, -1):
            _, post = project_swap_test(psi, (0, 1), outcome)
            repeat_err = max(repeat_err, abs(swap_test_probabilities(post, (0, 1))[outcome] - 1))
    rng = np.random.Generator(np.random.PCG64(7))
    psi = random_state(ModeSystem.modes(2, 3), rng)
    p = swap_test_probabilities(psi, (0, 1))[1]
    shots = 4000
    sampler = np.random.Generator(np.random.PCG64(2024))
    hits = sum(swap_test(psi, (0, 1), sampler)[0].outcome == 1 for _ in range(shots))
    z = abs(hits / shots - p) / math.sqrt(p * (1 - p) / shots)
    ok = born_err < 1e-10 and repeat_err < 1e-10 and z <= 3
    report(6, ok, f"Born error {born_err:.1e}, repeat error {repeat_err:.1e}, "
                  f"frequency {hits / shots:.4f} vs p={p:.4f} ({z:.2f} sigma)")
    assert born_err < 1e-10
    assert repeat_err < 1e-10
    assert z <= 3


def test_criterion_07_quad_initialization():
    r = init_yield(num_qubits=1, min_tests=2000, seed=0, spec=EncodingSpec.fock())
    tests = sum(row[1] for row in r.rows)
    plus = sum(row[2] for row in r.rows)
    frac = plus / tests
    sigma = math.sqrt(0.25 / tests)
    fid = next(c.value for c in r.checks if c.name == "formed_fidelity")
    ok = tests >= 2000 and abs(frac - 0.5) <= 3 * sigma and abs(fid - 1) < 1e-10
    report(7, ok, f"+1 fraction {frac:.4f} over {tests} tests (3 sigma = {3 * sigma:.4f}), "
                  f"fidelity 1-{1 - fid:.1e}")
    assert tests >= 2000
    assert abs(frac - 0.5) <= 3 * sigma
    assert abs(fid - 1) < 1e-10


def test_criterion_08_mixed_encoding():
    layout = LogicalLayout(Scheme.DUAL, (EncodingSpec.fock(14), EncodingSpec.coherent(2.0, 14)))
    comm = subspace_commutator_norm(ESwap4(math.pi / 4, layout.z_pair(0), layout.z_pair(1)), layout, [0, 1])
    tol = 1e-8 + 10 * math.exp(-8)
    report(8, comm < tol, f"commutator norm {comm:.2e} < {tol:.2e}")
    assert comm < tol


def test_criterion_09_decoherence_free_subspace():
    noises = [NoiseSpec(generator="number_phase", theta=0.9),
              NoiseSpec(generator="random_hermitian", theta=0.9, seed=7)]
    r = dfs(noises, GATE_SPECS, epsilon=0.05)
    kinds = {row[0] for row in r.rows}
    worst = max(row[5] for row in r.rows)
    trivial = min(row[4] for row in r.rows)
    ok = kinds == {"fock", "coherent", "cat", "gkp"} and worst < 1e-8 and trivial > 0.1
    report(9, ok, f"max deviation {worst:.2e} over {len(r.rows)} encoding/noise pairs "
                  f"(noise distance from identity >= {trivial:.2f})")
    assert kinds == {"fock", "coherent", "cat", "gkp"}
    assert trivial > 0.1  # the noise is not a global phase
    for row in r.rows:
        assert row[5] < 1e-8, row


def test_criterion_10_compiler_equivalence():
    t0 = time.perf_counter()
    eps = 0.01
    rng = np.random.Generator(np.random.PCG64(2024))
    worst_ratio, failures, count = 0.0, [], 0
    for k in range(25):
        circuit = random_circuit(rng, max_qubits=2, max_gates=5)
        assert circuit.num_qubits <= 2 and len(circuit.gates) - len(circuit.measured_qubits) <= 5
        for scheme in Scheme:
            layout = LogicalLayout.uniform(scheme, circuit.num_qubits, EncodingSpec.fock())
            r = compare_with_oracle(circuit, layout, eps)
            phis = [g.angle for g in lower_to_native(circuit, scheme) if g.kind is GateKind.RZ]
            # dual rz runs through the repeated-ancilla channel; c = 1.5 * sum(phi^2)
            tol = 1e-8 + (1.5 * sum(p * p for p in phis) * eps if scheme is Scheme.DUAL else 0.0)
            worst_ratio = max(worst_ratio, r.error / tol)
            count += 1
            if not r.error < tol:
                failures.append((k, scheme.value, r.error, tol))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 300
    report(10, ok, f"{count} comparisons, worst error/tolerance {worst_ratio:.3f} in {elapsed:.1f}s")
    assert not failures, failures
    assert elapsed < 300
