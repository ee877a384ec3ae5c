"""Execution of physical programs and an independent qubit-level oracle.

States are carried as a factor ``L`` with ``rho = L L^dag``: a tensor of
shape ``(d,)*M + (r,)``. Pure states have ``r = 1``; the dual-rail phase
channel adds one column per Kraus operator, and columns are recompressed to
the numerical rank after every channel.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .compiler import GateKind, LogicalCircuit, PhysicalProgram, compile_circuit, lower_to_native
from .errors import InternalConsistencyError
from .fock import ModeSystem, apply_to_axes, check_dimension
from .logical import (
    LogicalLayout,
    encoding_kets,
    logical_basis_vectors,
    loewdin,
    phase_channel_kraus,
)
from .ops import UNITARY_OPS, NoiseLayer, PhaseChannel, PrepareBasis, SwapTest

RANK_CUTOFF = 1e-15
ORACLE_MAX_QUBITS = 10
EXACT_TOL = 1e-8
# trace-distance error of one dual phase channel is at most ~eps * phi^2
PHASE_ERROR_COEFF = 1.5


def _compress(t: np.ndarray) -> np.ndarray:
    r = t.shape[-1]
    if r == 1:
        return t
    mat = t.reshape(-1, r)
    w, v = np.linalg.eigh(mat.conj().T @ mat)
    keep = w > RANK_CUTOFF * max(w.max(), 1e-300)
    return (mat @ v[:, keep]).reshape(t.shape[:-1] + (int(keep.sum()),))


def _swap_project(t: np.ndarray, i: int, j: int, sign: int) -> np.ndarray:
    # (I + sign S_ij)/2: the X_A-outcome branch of a swap test
    return 0.5 * (t + sign * np.swapaxes(t, i, j))


@dataclass(frozen=True, eq=False)
class SimulationResult:
    program: PhysicalProgram
    factor: np.ndarray = field(repr=False)
    readout: tuple[SwapTest, ...]
    herald_probability: float

    @property
    def rank(self) -> int:
        return self.factor.shape[-1]

    def factor_matrix(self) -> np.ndarray:
        return self.factor.reshape(-1, self.rank)

    def trace(self) -> float:
        f = self.factor_matrix()
        return float(np.vdot(f, f).real)

    def outcome_probabilities(self) -> dict[str, float]:
        """Exact joint distribution of the readout swap tests.

        Bit 0 is swap-test outcome +1; bits follow ascending qubit index.
        """
        if not self.readout:
            return {"": 1.0}
        tests = sorted(self.readout, key=lambda s: s.qubit)
        probs = {}
        for signs in itertools.product((1, -1), repeat=len(tests)):
            t = self.factor
            for test, s in zip(tests, signs):
                t = _swap_project(t, test.i, test.j, s)
            key = "".join("0" if s == 1 else "1" for s in signs)
            probs[key] = float(np.vdot(t, t).real)
        total = sum(probs.values())
        return {k: v / total for k, v in probs.items()}

    def logical_density(self, layout: LogicalLayout | None = None) -> tuple[np.ndarray, float]:
        """Density matrix on the orthonormalized logical basis and the weight outside it."""
        layout = layout or self.program.layout
        B = loewdin(logical_basis_vectors(layout))
        C = B.conj().T @ self.factor_matrix()
        rho = C @ C.conj().T
        return rho, float(max(0.0, self.trace() - np.trace(rho).real))

    def pure_logical_amplitudes(self, layout: LogicalLayout | None = None) -> np.ndarray:
        if self.rank != 1:
            raise ValueError("state is mixed; use logical_density")
        layout = layout or self.program.layout
        B = loewdin(logical_basis_vectors(layout))
        return B.conj().T @ self.factor_matrix()[:, 0]


def _initial_factor(program: PhysicalProgram) -> np.ndarray:
    layout = program.layout
    n = layout.num_modes
    check_dimension(layout.truncation ** n)
    preps = {op.mode: op.which for op in program.ops if isinstance(op, PrepareBasis)}
    if sorted(preps) != list(range(n)):
        raise InternalConsistencyError("every mode needs exactly one basis preparation")
    out = np.ones(1, dtype=np.complex128)
    for mode in range(n):
        kets = encoding_kets(layout.encoding_of_mode(mode))
        out = np.kron(out, kets[preps[mode]].amplitudes)
    return out.reshape((layout.truncation,) * n + (1,))


def simulate(program: PhysicalProgram, stop: str = "end") -> SimulationResult:
    """Run the program's state evolution.

    ``stop="readout"`` halts at the start of the readout section (the
    pre-measurement logical state). ``stop="end"`` also runs the readout
    basis changes, leaving only the readout swap tests for probability
    evaluation.
    """
    if stop not in ("end", "readout"):
        raise ValueError("stop is 'end' or 'readout'")
    layout = program.layout
    ModeSystem.modes(layout.num_modes, layout.truncation)  # dimension-cap check
    t = _initial_factor(program)
    d = layout.truncation
    noise_unitaries: dict[int, np.ndarray] = {}
    herald = 1.0
    kraus_cache: dict = {}
    ops = program.computation if stop == "readout" else program.ops
    readout: list[SwapTest] = []
    for op in ops:
        if isinstance(op, PrepareBasis):
            continue
        if isinstance(op, UNITARY_OPS):
            t = op.apply_tensor(t)
        elif isinstance(op, NoiseLayer):
            U = op.noise.unitary(d)
            for m in op.modes:
                t = apply_to_axes(t, U, (m,))
                noise_unitaries[m] = U @ noise_unitaries.get(m, np.eye(d))
        elif isinstance(op, PhaseChannel):
            # the ancilla is prepared like the qubit's own |0_L>, including any
            # collective noise already applied to that qubit's modes
            anc = encoding_kets(layout.encoding_of_mode(op.mode))[0].amplitudes
            anc = noise_unitaries.get(op.mode, np.eye(d)) @ anc
            key = (op.phi, op.epsilon, anc.tobytes())
            if key not in kraus_cache:
                kraus_cache[key] = phase_channel_kraus(op.phi, op.epsilon, anc)
            branches = [apply_to_axes(t, K, (op.mode,)) for K in kraus_cache[key]]
            t = _compress(np.concatenate(branches, axis=-1))
        elif isinstance(op, SwapTest):
            if op.role == "init":
                t = _swap_project(t, op.i, op.j, op.herald)
                p = float(np.vdot(t, t).real)
                if p <= 1e-300:
                    raise InternalConsistencyError("heralded initialization outcome has zero probability")
                herald *= p
                t = t / math.sqrt(p)
            else:
                readout.append(op)
        else:
            raise TypeError(f"unknown physical op {op!r}")
    return SimulationResult(program, t, tuple(readout), herald)


@dataclass(frozen=True, eq=False)
class ShotResults:
    bitstrings: tuple[str, ...] = field(repr=False)
    frequencies: dict[str, float]
    probabilities: dict[str, float]
    shots: int
    seed: int
    phase_gate_reps: int
    measured_qubits: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "frequencies": self.frequencies,
            "shots": self.shots,
            "seed": self.seed,
            "phase_gate_reps": self.phase_gate_reps,
            "measured_qubits": list(self.measured_qubits),
            "probabilities": self.probabilities,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def execute(program: PhysicalProgram, shots: int, seed: int) -> ShotResults:
    """Sample ``shots`` readout records from the exact outcome distribution.

    No mid-circuit feedback exists, so the final state is computed once and
    only the measurement record is sampled (PCG64 seeded with ``seed``).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    sim = simulate(program)
    probs = sim.outcome_probabilities()
    keys = sorted(probs)
    p = np.array([probs[k] for k in keys])
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    draws = rng.choice(len(keys), size=shots, p=p)
    counts = np.bincount(draws, minlength=len(keys))
    freqs = {k: int(c) / shots for k, c in zip(keys, counts) if c}
    return ShotResults(
        bitstrings=tuple(keys[i] for i in draws),
        frequencies=freqs,
        probabilities={k: float(v) for k, v in zip(keys, p)},
        shots=shots,
        seed=int(seed),
        phase_gate_reps=int(program.metadata["phase_gate_reps"]),
        measured_qubits=program.measured_qubits,
    )


# --- independent qubit-level reference -------------------------------------

_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def _on(n: int, factors: dict[int, np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for q in range(n):
        out = np.kron(out, factors.get(q, _I2))
    return out


@dataclass(frozen=True, eq=False)
class OracleResult:
    amplitudes: np.ndarray
    probabilities: dict[str, float]
    measured_qubits: tuple[int, ...]


def logical_oracle(circuit: LogicalCircuit) -> OracleResult:
    """Simulate the circuit as plain 2^N qubit algebra (no bosonic content)."""
    n = circuit.num_qubits
    if n > ORACLE_MAX_QUBITS:
        raise ValueError(f"the oracle handles at most {ORACLE_MAX_QUBITS} qubits")
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = 1.0
    eye = np.eye(2**n)
    for g in circuit.gates:
        k = g.kind
        if k is GateKind.MEASURE:
            continue
        if k is GateKind.U3:
            U = _on(n, {g.qubits[0]: g.matrix})
        else:
            pauli = _X if k in (GateKind.RX, GateKind.XX) else _Z
            P = _on(n, {q: pauli for q in g.qubits})
            U = math.cos(g.angle) * eye + 1j * math.sin(g.angle) * P
        psi = U @ psi
    measured = circuit.measured_qubits or tuple(range(n))
    hadamard = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
    xs = {q: hadamard for q, b in circuit.measurement_bases.items() if b == "x"}
    full = np.abs(_on(n, xs) @ psi) ** 2 if xs else np.abs(psi) ** 2
    probs: dict[str, float] = {}
    for idx, p in enumerate(full):
        bits = format(idx, f"0{n}b")
        key = "".join(bits[q] for q in measured)
        probs[key] = probs.get(key, 0.0) + float(p)
    return OracleResult(psi, dict(sorted(probs.items())), tuple(measured))


def align_global_phase(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a`` multiplied by the phase that best matches it to ``b``."""
    ov = np.vdot(a, b)
    if abs(ov) < 1e-300:
        return a
    return a * (ov / abs(ov))


@dataclass(frozen=True)
class EquivalenceResult:
    scheme: str
    num_qubits: int
    num_gates: int
    phase_channels: int
    error: float
    tolerance: float
    leakage: float
    metric: str

    @property
    def passed(self) -> bool:
        return self.error < self.tolerance


def phase_error_bound(circuit: LogicalCircuit, layout: LogicalLayout, epsilon: float) -> float:
    """Allowed logical error: EXACT_TOL plus c * eps * sum(phi^2) over dual phase channels."""
    if layout.scheme.value != "dual":
        return EXACT_TOL
    gates = lower_to_native(circuit, layout.scheme)
    total = sum(g.angle ** 2 for g in gates if g.kind is GateKind.RZ)
    return EXACT_TOL + PHASE_ERROR_COEFF * epsilon * total


def compare_with_oracle(circuit: LogicalCircuit, layout: LogicalLayout,
                        epsilon: float = 0.01) -> EquivalenceResult:
    """Pre-measurement logical state of the CV simulation against logical_oracle.

    Pure results compare amplitudes (max abs difference after global-phase
    alignment); mixed results (dual phase channels) compare trace distance.
    """
    program = compile_circuit(circuit, layout, epsilon)
    sim = simulate(program, stop="readout")
    psi = logical_oracle(circuit).amplitudes
    channels = sum(isinstance(op, PhaseChannel) for op in program.computation)
    if sim.rank == 1 and channels == 0:
        amps = sim.pure_logical_amplitudes()
        leak = float(max(0.0, 1.0 - np.vdot(amps, amps).real))
        err = float(np.max(np.abs(align_global_phase(amps, psi) - psi)))
        metric = "max_amplitude_error"
    else:
        rho, leak = sim.logical_density()
        diff = rho - np.outer(psi, psi.conj())
        # the trace deficit of the projected state (leakage) enters through diff's eigenvalues
        err = float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())
        metric = "trace_distance"
    return EquivalenceResult(layout.scheme.value, circuit.num_qubits, len(circuit.gates), channels,
                             err, phase_error_bound(circuit, layout, epsilon), leak, metric)
