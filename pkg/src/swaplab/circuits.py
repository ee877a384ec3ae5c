"""Controlled-swap and E-swap from beam splitters, controlled phase shifts and
ancilla rotations, plus collective-noise layers.

Slot convention for three-body operators: ``(ancilla, mode_i, mode_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InternalConsistencyError, NotUnitaryError, SlotMismatchError
from .fock import (
    ANCILLA,
    MODE,
    LocalOperator,
    ModeSystem,
    StateVector,
    annihilation_matrix,
    apply_local,
    apply_to_axes,
    matrix_exponential,
    number_matrix,
    random_hermitian,
    unitarity_error,
)
from .logical import eswap_tensor, ideal_cswap

ANCILLA_TOL = 1e-10


class PrimitiveKind(str, Enum):
    BEAM_SPLITTER = "beam_splitter"
    PHASE_SHIFT = "phase_shift"
    CONTROLLED_PHASE = "controlled_phase"
    ANCILLA_ROTATION = "ancilla_rotation"
    IDEAL_CSWAP = "ideal_cswap"
    IDEAL_ESWAP2 = "ideal_eswap2"
    IDEAL_ESWAP4 = "ideal_eswap4"


def beam_splitter(d: int, xi: float) -> LocalOperator:
    """exp(xi (a_i a_j^dag - a_i^dag a_j)) on two d-level modes."""
    a = annihilation_matrix(d).matrix
    eye = np.eye(d)
    ai, aj = np.kron(a, eye), np.kron(eye, a)
    gen = ai @ aj.conj().T - ai.conj().T @ aj
    op = matrix_exponential(LocalOperator((d, d), gen), xi)
    return LocalOperator((d, d), op.matrix, unitary=True, name=f"BS({xi:g})")


def phase_shift(d: int, phi: float) -> LocalOperator:
    """exp(i phi n)."""
    return LocalOperator((d,), np.diag(np.exp(1j * phi * np.arange(d))), unitary=True,
                         name=f"P({phi:g})")


def controlled_phase(d: int, phi: float) -> LocalOperator:
    """exp(i (phi/2) (I_A - Z_A) n) on (ancilla, mode), built diagonally.

    Ancilla |0> leaves the mode alone; ancilla |1> imprints exp(i phi n).
    """
    n = np.arange(d)
    diag = np.concatenate([np.ones(d), np.exp(1j * phi * n)])
    return LocalOperator((2, d), np.diag(diag), unitary=True, name=f"CP({phi:g})")


def ancilla_rotation(theta: float) -> LocalOperator:
    """R_A(theta) = exp(i theta X_A)."""
    c, s = math.cos(theta), math.sin(theta)
    return LocalOperator((2,), np.array([[c, 1j * s], [1j * s, c]]), unitary=True,
                         name=f"R_A({theta:g})")


@dataclass(frozen=True)
class PrimitiveGate:
    kind: PrimitiveKind
    slots: tuple[int, ...]
    param: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PrimitiveKind(self.kind))
        arity = {PrimitiveKind.BEAM_SPLITTER: 2, PrimitiveKind.PHASE_SHIFT: 1,
                 PrimitiveKind.CONTROLLED_PHASE: 2, PrimitiveKind.ANCILLA_ROTATION: 1,
                 PrimitiveKind.IDEAL_CSWAP: 3, PrimitiveKind.IDEAL_ESWAP2: 2,
                 PrimitiveKind.IDEAL_ESWAP4: 4}[self.kind]
        if len(self.slots) != arity:
            raise SlotMismatchError(f"{self.kind.value} takes {arity} slots, got {len(self.slots)}")

    def check(self, system: ModeSystem) -> None:
        labels = [system.labels[s] for s in self.slots]
        if self.kind is PrimitiveKind.CONTROLLED_PHASE and labels != [ANCILLA, MODE]:
            raise SlotMismatchError("controlled_phase targets one ancilla qubit then one mode")
        if self.kind is PrimitiveKind.BEAM_SPLITTER:
            i, j = self.slots
            if labels != [MODE, MODE] or system.dims[i] != system.dims[j]:
                raise SlotMismatchError("beam_splitter targets two equal-dimension modes")
        if self.kind is PrimitiveKind.ANCILLA_ROTATION and labels != [ANCILLA]:
            raise SlotMismatchError("ancilla_rotation targets an ancilla qubit")

    def operator(self, system: ModeSystem) -> LocalOperator:
        self.check(system)
        d = system.dims[self.slots[-1]]
        k = self.kind
        if k is PrimitiveKind.BEAM_SPLITTER:
            return beam_splitter(d, self.param)
        if k is PrimitiveKind.PHASE_SHIFT:
            return phase_shift(d, self.param)
        if k is PrimitiveKind.CONTROLLED_PHASE:
            return controlled_phase(d, self.param)
        if k is PrimitiveKind.ANCILLA_ROTATION:
            return ancilla_rotation(self.param)
        if k is PrimitiveKind.IDEAL_CSWAP:
            return ideal_cswap(d)
        raise ValueError(f"{k.value} is applied through the ideal E-swap kernel")

    def apply(self, state: StateVector) -> StateVector:
        if self.kind in (PrimitiveKind.IDEAL_ESWAP2, PrimitiveKind.IDEAL_ESWAP4):
            s = self.slots
            pairs = [(s[0], s[1])] if len(s) == 2 else [(s[0], s[1]), (s[2], s[3])]
            out = eswap_tensor(state.as_tensor(), self.param, pairs)
            return StateVector(state.system, out.reshape(-1))
        return apply_local(state, self.operator(state.system), self.slots)


def cswap_sequence() -> list[PrimitiveGate]:
    """BS(pi/4), controlled phase pi, BS(-pi/4) on (ancilla=0, i=1, j=2), in time order."""
    return [
        PrimitiveGate(PrimitiveKind.BEAM_SPLITTER, (1, 2), math.pi / 4),
        PrimitiveGate(PrimitiveKind.CONTROLLED_PHASE, (0, 1), math.pi),
        PrimitiveGate(PrimitiveKind.BEAM_SPLITTER, (1, 2), -math.pi / 4),
    ]


def _block_indices(d: int, work: int) -> np.ndarray:
    a, i, j = np.meshgrid(np.arange(2), np.arange(d), np.arange(d), indexing="ij")
    return np.ravel_multi_index((a.ravel(), i.ravel(), j.ravel()), (2, work, work))


def _compose(sequence: Sequence[PrimitiveGate], system: ModeSystem) -> np.ndarray:
    total = np.eye(system.total, dtype=np.complex128)
    t = total.reshape(system.dims + (system.total,))
    for gate in sequence:
        t = apply_to_axes(t, gate.operator(system).matrix, gate.slots)
    return t.reshape(system.total, system.total)


@dataclass(frozen=True, eq=False)
class CswapCircuitReport:
    operator: LocalOperator
    working_truncation: int
    block_leakage: float
    ideal_error: float


def controlled_swap_report(d: int, working_truncation: int | None = None) -> CswapCircuitReport:
    """Compose the beam-splitter controlled swap and compare it with the ideal one.

    Beam splitters conserve total photon number but move photons between the
    two modes, so intermediate states need up to 2d-2 photons in one mode.
    The factors are built at ``working_truncation`` (default 2d-1, where every
    photon-number sector of the d-level block is complete) and the product is
    restricted back to the d-level block.
    """
    work = 2 * d - 1 if working_truncation is None else working_truncation
    if work < d:
        raise ValueError("working truncation must be >= d")
    system = ModeSystem((2, work, work), (ANCILLA, MODE, MODE))
    full = _compose(cswap_sequence(), system)
    idx = _block_indices(d, work)
    block = full[np.ix_(idx, idx)]
    outside = np.setdiff1d(np.arange(system.total), idx)
    leak = float(np.linalg.norm(full[np.ix_(outside, idx)], 2)) if outside.size else 0.0
    err = float(np.max(np.abs(block - ideal_cswap(d).matrix)))
    ok = unitarity_error(block) < 1e-10
    op = LocalOperator((2, d, d), block, unitary=ok, name="cswap_circuit")
    return CswapCircuitReport(op, work, leak, err)


def controlled_swap_circuit(d: int) -> LocalOperator:
    """Controlled swap on (ancilla, mode_i, mode_j) from the primitive-gate sequence."""
    report = controlled_swap_report(d)
    if not report.operator.unitary:
        raise NotUnitaryError("composed controlled-swap circuit is not unitary on the d-level block")
    return report.operator


def transient_leakage(state: StateVector, modes: tuple[int, int]) -> float:
    """Weight pushed above the d-level cutoff by the first beam splitter of a
    controlled swap (ancilla in |1>, worst case), for a state on the given modes."""
    d = state.system.dims[modes[0]]
    work = 2 * d - 1
    t = state.as_tensor()
    t = np.moveaxis(t, modes, (0, 1)).reshape(d, d, -1)
    padded = np.zeros((work, work, t.shape[-1]), dtype=np.complex128)
    padded[:d, :d] = t
    after = apply_to_axes(padded, beam_splitter(work, math.pi / 4).matrix, (0, 1))
    inside = np.sum(np.abs(after[:d, :d]) ** 2)
    return float(max(0.0, np.sum(np.abs(after) ** 2) - inside))


_PLUS = np.array([1.0, 1.0]) / math.sqrt(2)


def eswap_via_circuit_with_fidelity(state: StateVector, theta: float,
                                    pairs: Sequence[tuple[int, int]],
                                    use_circuit_cswap: bool = False) -> tuple[StateVector, float]:
    """Run C R_A(theta) C on |+>_A |Psi>; return the mode register and <+|rho_A|+>."""
    pairs = [tuple(p) for p in pairs]
    if len(pairs) not in (1, 2):
        raise SlotMismatchError("E-swap circuits use one or two mode pairs")
    flat = [m for p in pairs for m in p]
    if len(set(flat)) != len(flat):
        raise SlotMismatchError("E-swap pairs must be disjoint")
    d = state.system.dims[flat[0]]
    cswap = controlled_swap_circuit(d) if use_circuit_cswap else ideal_cswap(d)
    anc = StateVector(ModeSystem((2,), (ANCILLA,)), _PLUS)
    joint = anc.tensor(state)
    for i, j in pairs:
        joint = apply_local(joint, cswap, (0, i + 1, j + 1))
    joint = apply_local(joint, ancilla_rotation(theta), (0,))
    for i, j in pairs:
        joint = apply_local(joint, cswap, (0, i + 1, j + 1))
    t = joint.amplitudes.reshape(2, -1)
    branch = _PLUS @ t
    fid = float(np.vdot(branch, branch).real)
    if fid < 1 - ANCILLA_TOL:
        raise InternalConsistencyError(f"ancilla left entangled: <+|rho_A|+> = {fid:.12f}")
    return StateVector(state.system, branch), fid


def eswap_via_circuit(state: StateVector, theta: float, pairs: Sequence[tuple[int, int]],
                      use_circuit_cswap: bool = False) -> StateVector:
    return eswap_via_circuit_with_fidelity(state, theta, pairs, use_circuit_cswap)[0]


# --- collective noise -----------------------------------------------------

class NoiseKind(str, Enum):
    COLLECTIVE_UNITARY = "collective_unitary"
    NONE = "none"


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Identical single-mode unitary on a set of modes.

    ``generator`` is "number_phase" (exp(i theta n)), "random_hermitian"
    (exp(i theta H) for a seeded random Hermitian H) or "matrix" (explicit U).
    ``modes=None`` means every bosonic mode.
    """

    kind: NoiseKind = NoiseKind.COLLECTIVE_UNITARY
    generator: str = "number_phase"
    theta: float = 0.0
    seed: int = 0
    modes: tuple[int, ...] | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.generator not in ("number_phase", "random_hermitian", "matrix"):
            raise ValueError(f"unknown noise generator {self.generator!r}")
        if self.generator == "matrix":
            if self.matrix is None:
                raise ValueError("matrix noise needs an explicit unitary")
            m = np.array(self.matrix, dtype=np.complex128)
            if unitarity_error(m) >= 1e-10:
                raise NotUnitaryError("noise matrix is not unitary")
            object.__setattr__(self, "matrix", m)
        if self.modes is not None:
            object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(NoiseKind.NONE)

    def unitary(self, d: int) -> np.ndarray:
        if self.kind is NoiseKind.NONE:
            return np.eye(d, dtype=np.complex128)
        if self.generator == "number_phase":
            return np.diag(np.exp(1j * self.theta * np.arange(d)))
        if self.generator == "random_hermitian":
            H = random_hermitian(d, np.random.Generator(np.random.PCG64(self.seed)))
            return matrix_exponential(LocalOperator((d,), H), 1j * self.theta).matrix
        if self.matrix.shape != (d, d):
            raise SlotMismatchError(f"noise unitary is {self.matrix.shape[0]}-dimensional, modes have d={d}")
        return self.matrix

    def to_json(self) -> dict:
        if self.kind is NoiseKind.NONE:
            return {"kind": "none"}
        out = {"kind": self.kind.value, "generator": self.generator, "theta": self.theta,
               "seed": self.seed}
        if self.modes is not None:
            out["modes"] = list(self.modes)
        if self.generator == "matrix":
            out["matrix"] = [[[z.real, z.imag] for z in row] for row in self.matrix]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "NoiseSpec":
        if obj.get("kind", "collective_unitary") == "none":
            return cls.none()
        matrix = obj.get("matrix")
        if matrix is not None:
            matrix = np.array([[complex(re, im) for re, im in row] for row in matrix])
        return cls(obj.get("kind", "collective_unitary"), obj.get("generator", "number_phase"),
                   float(obj.get("theta", 0.0)), int(obj.get("seed", 0)), obj.get("modes"), matrix)


def apply_collective_noise(state: StateVector, noise: NoiseSpec) -> StateVector:
    """Apply the noise unitary to every listed bosonic mode; ancilla qubits are skipped."""
    if noise.kind is NoiseKind.NONE:
        return state
    system = state.system
    targets = noise.modes
    if targets is None:
        targets = tuple(s for s, lab in enumerate(system.labels) if lab == MODE)
    dims = {system.dims[m] for m in targets}
    if len(dims) > 1:
        raise SlotMismatchError("collective noise needs all listed modes to share one dimension")
    if any(system.labels[m] != MODE for m in targets):
        raise SlotMismatchError("collective noise acts on bosonic modes only")
    if not targets:
        return state
    U = noise.unitary(dims.pop())
    t = state.as_tensor()
    for m in targets:
        t = apply_to_axes(t, U, (m,))
    return StateVector(system, t.reshape(-1))
