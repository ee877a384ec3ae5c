"""Parameter sweeps that check the scheme's headline properties."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .circuits import NoiseSpec
from .compiler import LogicalCircuit, compile_circuit, measure, random_circuit, rx, rz, xx
from .encodings import EncodingSpec, overlap
from .fock import DensityMatrix, StateVector, apply_swap, fidelity, trace_distance
from .logical import (
    LogicalLayout,
    Scheme,
    dual_phase_gate,
    dual_plus_minus,
    init_quad_register,
    logical_matrix,
    prepare_dual,
    subspace_commutator_norm,
)
from .ops import ESwap4
from .reports import Report
from .runtime import compare_with_oracle, simulate

EXPERIMENTS = ("phase-scaling", "dfs", "mixed-encoding", "init-yield", "circuit-equivalence")

PHASE_SCALING_EPS = (0.16, 0.08, 0.04, 0.02, 0.01)
SLOPE_WINDOW = (0.85, 1.15)
DFS_TOL = 1e-8
DFS_ENCODINGS = (
    EncodingSpec.fock(4),
    EncodingSpec.coherent(2.0, 14),
    EncodingSpec.cat(2.0, 14),
    EncodingSpec.gkp(0.35, 14),
)
DFS_NOISES = (
    NoiseSpec(generator="number_phase", theta=0.9),
    NoiseSpec(generator="random_hermitian", theta=0.9, seed=7),
)


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def phase_scaling(eps: Sequence[float] = PHASE_SCALING_EPS, phi: float = math.pi / 4,
                  spec: EncodingSpec | None = None) -> Report:
    """Trace distance of the repeated-ancilla phase gate to exp(i phi Z) on |+_D>."""
    spec = spec or EncodingSpec.fock()
    plus, _ = dual_plus_minus(spec)
    z0, z1 = prepare_dual(spec, 0), prepare_dual(spec, 1)
    target = StateVector(plus.system, (np.exp(1j * phi) * z0.amplitudes
                                       + np.exp(-1j * phi) * z1.amplitudes) / math.sqrt(2)).normalized()
    rho0 = DensityMatrix.from_state(plus)
    rows = []
    for e in sorted(eps, reverse=True):
        rho, steps = dual_phase_gate(rho0, phi, e, spec)
        td = trace_distance(rho, DensityMatrix.from_state(target))
        rows.append([float(e), steps, td, 1.0 - fidelity(rho, target)])
    report = Report("phase-scaling", {"phi": phi, "eps": [r[0] for r in rows], "encoding": spec.to_json()},
                    ["epsilon", "steps", "trace_distance", "infidelity"], rows,
                    plot={"x": "epsilon", "y": ["trace_distance"], "logx": True, "logy": True})
    tds = [r[2] for r in rows]
    if len(rows) >= 2:
        report.check("loglog_slope", loglog_slope([r[0] for r in rows], tds), "in", list(SLOPE_WINDOW))
    report.check("monotone_decreasing", all(b < a for a, b in zip(tds, tds[1:])), "==", True)
    return report


def dfs_circuit() -> LogicalCircuit:
    return LogicalCircuit(2, (rx(0.7, 0), xx(math.pi / 4, 0, 1), rz(0.4, 1), measure(0), measure(1)))


def noise_nontriviality(U: np.ndarray) -> float:
    """Distance of a single-mode unitary from the nearest multiple of the identity."""
    return float(np.max(np.abs(U - U[0, 0] * np.eye(U.shape[0]))))


def dfs(noises: Sequence[NoiseSpec] = DFS_NOISES, encodings: Sequence[EncodingSpec] = DFS_ENCODINGS,
        epsilon: float = 0.05, noise_point: str = "before",
        circuit: LogicalCircuit | None = None) -> Report:
    """Outcome distributions of one compiled dual program with and without collective noise."""
    circuit = circuit or dfs_circuit()
    rows = []
    for spec in encodings:
        layout = LogicalLayout.uniform(Scheme.DUAL, circuit.num_qubits, spec)
        clean = simulate(compile_circuit(circuit, layout, epsilon)).outcome_probabilities()
        for noise in noises:
            noisy_prog = compile_circuit(circuit, layout, epsilon, noise=noise, noise_point=noise_point)
            noisy = simulate(noisy_prog).outcome_probabilities()
            dev = max(abs(noisy[k] - clean[k]) for k in clean)
            rows.append([spec.kind.value, spec.truncation, noise.generator, noise.theta,
                         noise_nontriviality(noise.unitary(spec.truncation)), dev,
                         clean["00"], clean["01"], clean["10"], clean["11"]])
    params = {"noises": [n.to_json() for n in noises], "encodings": [s.to_json() for s in encodings],
              "epsilon": epsilon, "noise_point": noise_point, "circuit": circuit.to_json()}
    report = Report("dfs", params,
                    ["encoding", "truncation", "generator", "theta", "noise_size", "max_deviation",
                     "p00", "p01", "p10", "p11"], rows)
    for row in rows:
        report.check(f"max_deviation[{row[0]},{row[2]}]", row[5], "<", DFS_TOL)
    return report


def mixed_encoding(enc1: EncodingSpec, enc2: EncodingSpec,
                   thetas: Sequence[float] = (0.3, math.pi / 4, 1.2)) -> Report:
    """Subspace preservation of the four-mode E-swap between differently encoded dual qubits."""
    layout = LogicalLayout(Scheme.DUAL, (enc1, enc2))
    ov = abs(overlap(enc1)) + abs(overlap(enc2))
    tol = 1e-8 + 10 * ov
    X = np.array([[0, 1], [1, 0]])
    XX = np.kron(X, X)
    rows = []
    for th in sorted(thetas):
        op = ESwap4(th, layout.z_pair(0), layout.z_pair(1))
        comm = subspace_commutator_norm(op, layout, [0, 1])
        target = math.cos(th) * np.eye(4) + 1j * math.sin(th) * XX
        err = float(np.max(np.abs(logical_matrix(op, layout, [0, 1]).matrix - target)))
        rows.append([th, comm, err, ov, tol])
    report = Report("mixed-encoding", {"enc1": enc1.to_json(), "enc2": enc2.to_json(), "thetas": list(thetas)},
                    ["theta", "commutator_norm", "logical_error", "overlap_sum", "tolerance"], rows)
    for th, comm, err, _, t in rows:
        report.check(f"commutator_norm[theta={th:.4g}]", comm, "<", t)
        report.check(f"logical_error[theta={th:.4g}]", err, "<", t)
    return report


def init_yield(num_qubits: int = 1, min_tests: int = 2000, seed: int = 0,
               spec: EncodingSpec | None = None) -> Report:
    """+1 fraction of initialization swap tests and the fidelity of the formed register."""
    spec = spec or EncodingSpec.fock()
    rng = np.random.Generator(np.random.PCG64(seed))
    rows = []
    plus = total = 0
    formed_fidelity = z_expectation = None
    trial = 0
    while total < min_tests:
        state, rep = init_quad_register(num_qubits, spec, rng, build_state=trial == 0)
        if trial == 0:
            p, m = dual_plus_minus(spec)
            direct = StateVector.product(*([p, m] * num_qubits))
            formed_fidelity = abs(np.vdot(direct.amplitudes, state.amplitudes)) ** 2
            z_expectation = float(np.vdot(state.amplitudes, apply_swap(state, 0, 1).amplitudes).real)
        rows.append([trial, rep.swap_tests, rep.plus_count, rep.minus_count, rep.retries,
                     rep.first_pass_shortfall])
        plus += rep.plus_count
        total += rep.swap_tests
        trial += 1
    frac = plus / total
    sigma = math.sqrt(0.25 / total)
    report = Report("init-yield", {"num_qubits": num_qubits, "min_tests": min_tests,
                                   "encoding": spec.to_json()},
                    ["trial", "swap_tests", "plus", "minus", "retries", "first_pass_shortfall"], rows,
                    seed=seed)
    report.check("plus_fraction", frac, "in", [0.5 - 3 * sigma, 0.5 + 3 * sigma],
                 note=f"{total} swap tests")
    report.check("formed_fidelity", float(formed_fidelity), ">=", 1 - 1e-10)
    report.check("logical_z_expectation", z_expectation, "in", [1 - 1e-10, 1 + 1e-10])
    shortfall = float(np.mean([r[5] for r in rows]))
    exact = 1 - math.comb(2 * num_qubits, num_qubits) / 4**num_qubits if num_qubits == 1 else None
    report.params["mean_first_pass_shortfall"] = shortfall
    report.params["exact_single_qubit_shortfall"] = exact
    return report


def circuit_equivalence(count: int = 25, seed: int = 2024, epsilon: float = 0.01,
                        max_qubits: int = 2, max_gates: int = 5,
                        spec: EncodingSpec | None = None) -> Report:
    """Random circuits compiled to both schemes against the 2^N oracle."""
    spec = spec or EncodingSpec.fock()
    rng = np.random.Generator(np.random.PCG64(seed))
    rows = []
    for k in range(count):
        circuit = random_circuit(rng, max_qubits, max_gates)
        for scheme in Scheme:
            layout = LogicalLayout.uniform(scheme, circuit.num_qubits, spec)
            r = compare_with_oracle(circuit, layout, epsilon)
            rows.append([k, scheme.value, r.num_qubits, r.num_gates, r.phase_channels, r.metric,
                         r.error, r.tolerance, r.leakage])
    report = Report("circuit-equivalence", {"count": count, "epsilon": epsilon, "max_qubits": max_qubits,
                                            "max_gates": max_gates, "encoding": spec.to_json()},
                    ["circuit", "scheme", "qubits", "gates", "phase_channels", "metric", "error",
                     "tolerance", "leakage"], rows, seed=seed)
    for row in rows:
        report.check(f"error[{row[0]},{row[1]}]", row[6], "<", row[7])
    return report
