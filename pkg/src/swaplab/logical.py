"""Dual-rail and quad-rail logical qubits built from swap-based operations.

Mode indices are 0-based: dual qubit ``n`` owns modes ``(2n, 2n+1)`` and quad
qubit ``n`` owns ``(4n, ..., 4n+3)``. Logical conventions:

* dual:  |0_D> = |0_L 1_L>, |1_D> = |1_L 0_L>; S on the pair is logical X.
* quad:  |0_Q> = |+_D -_D>, |1_Q> = |-_D +_D>; S on the first pair is logical Z
  and S_{4n,4n+2} S_{4n+1,4n+3} is logical X.

Rotation gates use the ``exp(+i theta P)`` sign convention throughout.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .encodings import EncodingSpec, basis_states
from .errors import (
    IllConditionedBasisError,
    InternalConsistencyError,
    RetryCapExceeded,
    SlotMismatchError,
    SystemMismatchError,
    TruncationWarning,
)
from .fock import (
    ANCILLA,
    DensityMatrix,
    LocalOperator,
    ModeSystem,
    StateVector,
    apply_local,
    apply_local_density,
    partial_trace,
    swap_operator,
)

GRAM_CONDITION_LIMIT = 1e6


class Scheme(str, Enum):
    DUAL = "dual"
    QUAD = "quad"

    @property
    def modes_per_qubit(self) -> int:
        return 2 if self is Scheme.DUAL else 4


@dataclass(frozen=True)
class LogicalLayout:
    scheme: Scheme
    encodings: tuple[EncodingSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        encs = tuple(self.encodings)
        if not encs:
            raise ValueError("a layout needs at least one logical qubit")
        if len({e.truncation for e in encs}) != 1:
            raise ValueError("all encodings in one run must share the truncation d")
        object.__setattr__(self, "encodings", encs)

    @classmethod
    def uniform(cls, scheme: Scheme | str, num_qubits: int, spec: EncodingSpec) -> "LogicalLayout":
        return cls(Scheme(scheme), (spec,) * num_qubits)

    @property
    def num_qubits(self) -> int:
        return len(self.encodings)

    @property
    def truncation(self) -> int:
        return self.encodings[0].truncation

    @property
    def num_modes(self) -> int:
        return self.num_qubits * self.scheme.modes_per_qubit

    def modes(self, qubit: int) -> tuple[int, ...]:
        if not 0 <= qubit < self.num_qubits:
            raise SlotMismatchError(f"qubit {qubit} out of range for {self.num_qubits} qubits")
        k = self.scheme.modes_per_qubit
        return tuple(range(k * qubit, k * qubit + k))

    def z_pair(self, qubit: int) -> tuple[int, int]:
        """Mode pair whose swap is the scheme's readout observable (X dual, Z quad)."""
        m = self.modes(qubit)
        return (m[0], m[1])

    def x_pairs(self, qubit: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """Quad only: the two pair swaps whose product is logical X."""
        m = self.modes(qubit)
        return ((m[0], m[2]), (m[1], m[3]))

    def mode_system(self) -> ModeSystem:
        return ModeSystem.modes(self.num_modes, self.truncation)

    def encoding_of_mode(self, mode: int) -> EncodingSpec:
        return self.encodings[mode // self.scheme.modes_per_qubit]

    def to_json(self) -> dict:
        return {"scheme": self.scheme.value, "qubits": self.num_qubits,
                "encodings": [e.to_json() for e in self.encodings]}


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    qubit: int | None
    basis: str
    outcome: int
    probability: float
    state: StateVector | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.outcome not in (1, -1):
            raise ValueError("swap-test outcomes are +1 or -1")
        if not -1e-12 <= self.probability <= 1 + 1e-12:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


def _quiet_basis(spec: EncodingSpec) -> tuple[np.ndarray, np.ndarray]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        k0, k1 = basis_states(spec)
    return k0.amplitudes, k1.amplitudes


def encoding_kets(spec: EncodingSpec) -> tuple[StateVector, StateVector]:
    system = ModeSystem((spec.truncation,))
    k0, k1 = _quiet_basis(spec)
    return StateVector(system, k0), StateVector(system, k1)


def prepare_dual(spec: EncodingSpec, bit: int) -> StateVector:
    """|0_D> = |0_L 1_L> or |1_D> = |1_L 0_L>."""
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    k0, k1 = encoding_kets(spec)
    return k0.tensor(k1) if bit == 0 else k1.tensor(k0)


def dual_plus_minus(spec: EncodingSpec) -> tuple[StateVector, StateVector]:
    """|+_D>, |-_D> normalized with their exact norms (they are S eigenstates)."""
    z0, z1 = prepare_dual(spec, 0), prepare_dual(spec, 1)
    plus = StateVector(z0.system, z0.amplitudes + z1.amplitudes).normalized()
    minus = StateVector(z0.system, z0.amplitudes - z1.amplitudes).normalized()
    return plus, minus


def prepare_quad(spec: EncodingSpec, bit: int) -> StateVector:
    plus, minus = dual_plus_minus(spec)
    return plus.tensor(minus) if bit == 0 else minus.tensor(plus)


# --- E-swap kernels -------------------------------------------------------

def _check_modes(ndim: int, modes: Sequence[int], shape: Sequence[int]) -> None:
    if len(set(modes)) != len(modes):
        raise SlotMismatchError(f"E-swap modes must be distinct, got {tuple(modes)}")
    for m in modes:
        if not 0 <= m < ndim:
            raise SlotMismatchError(f"mode {m} out of range")


def eswap_tensor(tensor: np.ndarray, theta: float, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """``cos(theta) t + i sin(theta) (prod S_pair) t`` on raw mode axes.

    Trailing axes beyond the mode axes are carried along untouched.
    """
    flat = [m for p in pairs for m in p]
    _check_modes(tensor.ndim, flat, tensor.shape)
    swapped = tensor
    for i, j in pairs:
        if tensor.shape[i] != tensor.shape[j]:
            raise SlotMismatchError("swapped modes need equal dimension")
        swapped = np.swapaxes(swapped, i, j)
    return math.cos(theta) * tensor + 1j * math.sin(theta) * swapped


def _mode_tensor(state: StateVector) -> np.ndarray:
    return state.as_tensor()


def eswap2(state: StateVector, theta: float, modes: tuple[int, int]) -> StateVector:
    """Two-mode exponential swap exp(i theta S_ij)."""
    i, j = modes
    out = eswap_tensor(_mode_tensor(state), theta, [(i, j)])
    return StateVector(state.system, out.reshape(-1))


def eswap4(state: StateVector, theta: float,
           pairs: tuple[tuple[int, int], tuple[int, int]]) -> StateVector:
    """Four-mode exponential swap exp(i theta S_ij S_kl)."""
    if len(pairs) != 2:
        raise SlotMismatchError("eswap4 takes exactly two mode pairs")
    out = eswap_tensor(_mode_tensor(state), theta, list(pairs))
    return StateVector(state.system, out.reshape(-1))


def eswap_operator(d: int, theta: float) -> LocalOperator:
    """Dense exp(i theta S) on two d-level modes (S^2 = I closed form)."""
    S = swap_operator(d).matrix
    mat = math.cos(theta) * np.eye(d * d) + 1j * math.sin(theta) * S
    return LocalOperator((d, d), mat, unitary=True, name=f"eswap2({theta:g})")


def ideal_cswap(d: int) -> LocalOperator:
    """|0><0|_A (x) I + |1><1|_A (x) S on (ancilla, mode_i, mode_j)."""
    S = swap_operator(d).matrix
    n = d * d
    mat = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    mat[:n, :n] = np.eye(n)
    mat[n:, n:] = S
    return LocalOperator((2, d, d), mat, unitary=True, name="cswap")


# --- swap test ------------------------------------------------------------

_PLUS = np.array([1.0, 1.0]) / math.sqrt(2)
_MINUS = np.array([1.0, -1.0]) / math.sqrt(2)


def _swap_test_branches(state: StateVector, modes: tuple[int, int],
                        cswap: LocalOperator | None = None) -> dict[int, np.ndarray]:
    """Unnormalized mode-register branches for each X_A outcome."""
    i, j = modes
    if i == j:
        raise SlotMismatchError("swap test needs two distinct modes")
    d = state.system.dims[i]
    if state.system.dims[j] != d:
        raise SlotMismatchError("swap test needs equal-dimension modes")
    anc = StateVector(ModeSystem((2,), (ANCILLA,)), _PLUS)
    joint = anc.tensor(state)
    cswap = cswap or ideal_cswap(d)
    joint = apply_local(joint, cswap, (0, i + 1, j + 1))
    t = joint.amplitudes.reshape(2, -1)
    return {1: _PLUS @ t, -1: _MINUS @ t}


def swap_test_probabilities(state: StateVector, modes: tuple[int, int]) -> dict[int, float]:
    branches = _swap_test_branches(state, modes)
    return {k: float(np.vdot(v, v).real) for k, v in branches.items()}


def project_swap_test(state: StateVector, modes: tuple[int, int], outcome: int
                      ) -> tuple[float, StateVector]:
    """Herald a given outcome: return its probability and the collapsed state."""
    branch = _swap_test_branches(state, modes)[outcome]
    p = float(np.vdot(branch, branch).real)
    if p <= 1e-300:
        raise InternalConsistencyError(f"swap-test outcome {outcome:+d} has zero probability")
    return p, StateVector(state.system, branch / math.sqrt(p))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def swap_test(state: StateVector, modes: tuple[int, int], rng_seed=None, *,
              qubit: int | None = None, basis: str = "S") -> tuple[MeasurementRecord, StateVector]:
    """Ancilla-assisted swap test on ``modes``.

    Outcome +1 is the symmetric (S = +1) subspace. ``rng_seed`` is an int
    seed for a PCG64 generator or an existing ``numpy.random.Generator``.
    """
    rng = _rng(rng_seed)
    branches = _swap_test_branches(state, modes)
    probs = {k: float(np.vdot(v, v).real) for k, v in branches.items()}
    outcome = 1 if rng.random() < probs[1] / (probs[1] + probs[-1]) else -1
    p = probs[outcome]
    if p <= 1e-300:
        raise InternalConsistencyError("sampled a zero-probability swap-test branch")
    collapsed = StateVector(state.system, branches[outcome] / math.sqrt(p))
    return MeasurementRecord(qubit, basis, outcome, p, collapsed), collapsed


# --- dual-rail phase channel ----------------------------------------------

def phase_repetitions(epsilon: float) -> int:
    """Number of ancilla interactions for a full phase gate: round(2 / epsilon)."""
    return int(math.floor(2.0 / epsilon + 0.5))


def phase_step_angles(phi: float, epsilon: float) -> list[float]:
    """Per-step imprinted phases; the last step absorbs the rounding residual."""
    if not 0 < epsilon <= 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5], got {epsilon}")
    if phi == 0:
        return []
    m = phase_repetitions(epsilon)
    angles = [epsilon * phi] * (m - 1)
    angles.append(2 * phi - (m - 1) * epsilon * phi)
    return angles


def phase_channel_steps(rho: DensityMatrix, phi: float, epsilon: float, spec: EncodingSpec,
                        ancilla: StateVector | None = None) -> Iterator[DensityMatrix]:
    """Yield the dual-qubit density matrix after every ancilla interaction.

    Each step adjoins an ancilla mode in ``|0_L>``, applies exp(-i a S) with the
    qubit's second mode and traces the ancilla out.
    """
    if len(rho.system.dims) != 2:
        raise SystemMismatchError("the phase channel acts on one dual-rail qubit (two modes)")
    if abs(rho.trace() - 1.0) > 1e-10:
        raise ValueError("input density matrix is not normalized")
    d = spec.truncation
    if ancilla is None:
        ancilla = encoding_kets(spec)[0]
    anc = DensityMatrix.from_state(ancilla)
    for angle in phase_step_angles(phi, epsilon):
        joint = rho.tensor(anc)
        joint = apply_local_density(joint, eswap_operator(d, -angle), (2, 1))
        rho = partial_trace(joint, [0, 1])
        yield rho


def dual_phase_gate(rho: DensityMatrix, phi: float, epsilon: float, spec: EncodingSpec,
                    ancilla: StateVector | None = None) -> tuple[DensityMatrix, int]:
    """Approximate exp(i phi Z_D), up to the global phase exp(-i phi)."""
    steps = 0
    for rho in phase_channel_steps(rho, phi, epsilon, spec, ancilla):
        steps += 1
    return rho, steps


def _step_kraus(ancilla: np.ndarray, angle: float) -> list[np.ndarray]:
    d = ancilla.size
    U = eswap_operator(d, -angle).matrix.reshape(d, d, d, d)  # (c', m', c, m)
    block = np.einsum("xyzw,z->xyw", U, ancilla)  # (c', m', m)
    return [block[k] for k in range(d)]


def phase_channel_kraus(phi: float, epsilon: float, ancilla: np.ndarray,
                        cutoff: float = 1e-15) -> list[np.ndarray]:
    """Kraus operators of the whole repeated channel on the target mode alone."""
    d = ancilla.size
    total = np.eye(d * d, dtype=np.complex128)
    cache: dict[float, np.ndarray] = {}
    for angle in phase_step_angles(phi, epsilon):
        if angle not in cache:
            cache[angle] = sum(np.kron(K, K.conj()) for K in _step_kraus(ancilla, angle))
        total = cache[angle] @ total
    choi = total.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)
    w, v = np.linalg.eigh((choi + choi.conj().T) / 2)
    keep = w > cutoff * max(w.max(), 1.0)
    return [math.sqrt(lam) * v[:, k].reshape(d, d).T for k, lam in zip(np.nonzero(keep)[0], w[keep])]


# --- quad-rail initialization ---------------------------------------------

@dataclass(frozen=True)
class InitReport:
    num_qubits: int
    plus_count: int
    minus_count: int
    swap_tests: int
    retries: int
    formed: bool
    first_pass_shortfall: float
    outcomes: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "num_qubits": self.num_qubits, "plus": self.plus_count, "minus": self.minus_count,
            "swap_tests": self.swap_tests, "retries": self.retries, "formed": self.formed,
            "first_pass_shortfall": self.first_pass_shortfall,
        }


def init_quad_register(num_qubits: int, specs: EncodingSpec | Sequence[EncodingSpec],
                       rng_seed=None, retry_cap: int | None = None,
                       build_state: bool = True) -> tuple[StateVector | None, InitReport]:
    """Probabilistic |0_Q>^N preparation from 2N swap-tested |0_L 1_L> pairs.

    Pairs are pooled per encoding and matched first-come-first-served; slots
    left unmatched are re-prepared and re-tested, at most ``retry_cap`` times
    in total (default 20 N).
    """
    if num_qubits < 1:
        raise ValueError("need at least one logical qubit")
    if isinstance(specs, EncodingSpec):
        specs = [specs] * num_qubits
    specs = list(specs)
    if len(specs) != num_qubits:
        raise ValueError("one encoding per logical qubit")
    rng = _rng(rng_seed)
    cap = 20 * num_qubits if retry_cap is None else retry_cap

    groups: dict[EncodingSpec, list[int]] = {}
    for q, s in enumerate(specs):
        groups.setdefault(s, []).append(q)

    outcomes: list[int] = []
    retries = 0
    formable_first = 0
    pair_states: dict[int, tuple[StateVector, StateVector]] = {}
    for spec, qubits in groups.items():
        fresh = prepare_dual(spec, 0)
        need = len(qubits)
        plus: list[StateVector] = []
        minus: list[StateVector] = []
        pending = 2 * need
        first = True
        while len(plus) < need or len(minus) < need:
            if not first:
                if retries + pending > cap:
                    raise RetryCapExceeded(f"quad initialization needed more than {cap} retries")
                retries += pending
            for _ in range(pending):
                rec, collapsed = swap_test(fresh, (0, 1), rng)
                outcomes.append(rec.outcome)
                (plus if rec.outcome == 1 else minus).append(collapsed)
            if first:
                formable_first += min(len(plus), len(minus), need)
                first = False
            # surplus of one sign is discarded and those slots are re-tested
            pending = max(need - len(plus), 0) + max(need - len(minus), 0)
        for k, q in enumerate(qubits):
            pair_states[q] = (plus[k], minus[k])

    state = None
    if build_state:
        factors = [f for q in range(num_qubits) for f in pair_states[q]]
        state = StateVector.product(*factors)
    report = InitReport(
        num_qubits=num_qubits,
        plus_count=outcomes.count(1),
        minus_count=outcomes.count(-1),
        swap_tests=len(outcomes),
        retries=retries,
        formed=True,
        first_pass_shortfall=1.0 - formable_first / num_qubits,
        outcomes=tuple(outcomes),
    )
    return state, report


# --- logical-subspace extraction ------------------------------------------

def qubit_blocks(layout: LogicalLayout, qubit: int) -> list[tuple[tuple[int, int], tuple[np.ndarray, np.ndarray]]]:
    """Mode pairs of a qubit with each pair's ket for logical 0 and 1."""
    spec = layout.encodings[qubit]
    m = layout.modes(qubit)
    if layout.scheme is Scheme.DUAL:
        z0, z1 = prepare_dual(spec, 0), prepare_dual(spec, 1)
        return [((m[0], m[1]), (z0.amplitudes, z1.amplitudes))]
    plus, minus = dual_plus_minus(spec)
    return [((m[0], m[1]), (plus.amplitudes, minus.amplitudes)),
            ((m[2], m[3]), (minus.amplitudes, plus.amplitudes))]


def _kron_all(vectors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=np.complex128)
    for v in vectors:
        out = np.kron(out, v)
    return out


def logical_basis_vectors(layout: LogicalLayout, qubits: Sequence[int] | None = None) -> np.ndarray:
    """Columns are |b> over all modes of ``qubits`` (first qubit most significant)."""
    qubits = list(range(layout.num_qubits)) if qubits is None else list(qubits)
    blocks = [(q, b) for q in qubits for b in qubit_blocks(layout, q)]
    cols = []
    for bits in itertools.product((0, 1), repeat=len(qubits)):
        bit_of = dict(zip(qubits, bits))
        cols.append(_kron_all([kets[bit_of[q]] for q, (_, kets) in blocks]))
    return np.stack(cols, axis=1)


def _inv_sqrt(G: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((G + G.conj().T) / 2)
    if w.min() <= 0 or w.max() / w.min() > GRAM_CONDITION_LIMIT:
        raise IllConditionedBasisError(
            f"logical Gram matrix condition number {w.max() / max(w.min(), 1e-300):.3g} "
            f"exceeds {GRAM_CONDITION_LIMIT:g}; encoding overlap too large"
        )
    return v @ np.diag(w ** -0.5) @ v.conj().T


def loewdin(B: np.ndarray) -> np.ndarray:
    """Symmetric orthonormalization of the columns of B."""
    return B @ _inv_sqrt(B.conj().T @ B)


@dataclass(frozen=True, eq=False)
class LogicalMatrix:
    matrix: np.ndarray
    leakage: float
    gram_condition: float


def logical_matrix(op, layout: LogicalLayout, qubits: Sequence[int]) -> LogicalMatrix:
    """Matrix of a physical operation on the (Loewdin-orthonormalized) logical basis.

    ``op`` exposes ``modes``, ``remap(mapping)`` and ``apply(state)``. Only the
    mode pairs the op touches are simulated; every untouched pair is replaced
    by coordinates in an orthonormal basis of the span of its two kets, which
    is exact because the op acts as identity there. ``leakage`` is the
    spectral norm of (I - P) op P.
    """
    qubits = list(qubits)
    owned = {m for q in qubits for m in layout.modes(q)}
    if not set(op.modes) <= owned:
        raise SlotMismatchError(f"op acts on modes {sorted(set(op.modes) - owned)} outside qubits {qubits}")
    blocks = [(q, modes, kets) for q in qubits for modes, kets in qubit_blocks(layout, q)]
    touched = [k for k, blk in enumerate(blocks) if set(blk[1]) & set(op.modes)]
    if not touched:
        raise SlotMismatchError("op touches no modes")
    support = [blocks[k] for k in touched]
    rest = []
    for k, (q, _, kets) in enumerate(blocks):
        if k in touched:
            continue
        Q, _ = np.linalg.qr(np.stack(kets, axis=1))
        rest.append((q, tuple(Q.conj().T @ v for v in kets)))
    local_modes = [m for _, modes, _ in support for m in modes]
    local_op = op.remap({m: k for k, m in enumerate(local_modes)})
    system = ModeSystem.modes(len(local_modes), layout.truncation)
    pos = {q: k for k, q in enumerate(qubits)}

    V, OV = [], []
    op_cache: dict[tuple, np.ndarray] = {}
    for bits in itertools.product((0, 1), repeat=len(qubits)):
        supp = _kron_all([kets[bits[pos[q]]] for q, _, kets in support])
        key = tuple(bits[pos[q]] for q, _, _ in support)
        if key not in op_cache:
            op_cache[key] = local_op.apply(StateVector(system, supp)).amplitudes
        coords = _kron_all([kets[bits[pos[q]]] for q, kets in rest])
        V.append(np.kron(supp, coords))
        OV.append(np.kron(op_cache[key], coords))
    V = np.stack(V, axis=1)
    OV = np.stack(OV, axis=1)
    G = V.conj().T @ V
    W = _inv_sqrt(G)
    B, OB = V @ W, OV @ W
    L = B.conj().T @ OB
    residual = OB - B @ L
    leak = float(np.linalg.norm(residual, 2)) if residual.size else 0.0
    w = np.linalg.eigvalsh((G + G.conj().T) / 2)
    return LogicalMatrix(L, leak, float(w.max() / w.min()))


def subspace_commutator_norm(op, layout: LogicalLayout, qubits: Sequence[int]) -> float:
    """Spectral norm of [op, P] with P the computational-subspace projector.

    [op, P] = (I-P) op P - P op (I-P), whose norm is the larger of the
    leakages of op and op^dagger.
    """
    a = logical_matrix(op, layout, qubits).leakage
    b = logical_matrix(op.dagger(), layout, qubits).leakage
    return max(a, b)


def logical_amplitudes(state: StateVector, layout: LogicalLayout) -> tuple[np.ndarray, float]:
    """Coordinates of ``state`` in the orthonormalized logical basis and the weight outside it."""
    B = loewdin(logical_basis_vectors(layout))
    c = B.conj().T @ state.amplitudes
    return c, float(max(0.0, 1.0 - np.vdot(c, c).real))
