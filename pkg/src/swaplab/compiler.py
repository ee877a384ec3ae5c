"""Logical circuit IR and its lowering to swap-based physical programs.

Gate semantics (``exp(+i angle P)`` convention):

    rx(t) = exp(i t X)      rz(p) = exp(i p Z)
    xx(t) = exp(i t X X)    zz(p) = exp(i p Z Z)
    u3(U) = arbitrary 2x2 unitary
    measure = Z-basis readout (or X with basis="x"), bit 0 <-> eigenvalue +1

Dual rail lowers rx/xx to E-swaps and rz to the repeated-ancilla phase
channel; quad rail lowers rz/zz to E-swaps on first pairs and rx to the
cross-pair four-mode E-swap. The missing two-qubit gate of each scheme (zz
for dual, xx for quad) is conjugated into the native one unless ``strict``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import jsonschema
import numpy as np

from .circuits import NoiseSpec
from .encodings import EncodingSpec
from .errors import CircuitSchemaError, NotUnitaryError, UnsupportedGateError
from .fock import unitarity_error
from .logical import LogicalLayout, Scheme, phase_repetitions
from .ops import ESwap2, ESwap4, NoiseLayer, PhaseChannel, PrepareBasis, SwapTest

ANGLE_TOL = 1e-12
DEFAULT_EPSILON = 0.01


class GateKind(str, Enum):
    RX = "rx"
    RZ = "rz"
    XX = "xx"
    ZZ = "zz"
    U3 = "u3"
    MEASURE = "measure"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.XX, GateKind.ZZ) else 1


@dataclass(frozen=True, eq=False)
class LogicalGate:
    kind: GateKind
    qubits: tuple[int, ...]
    angle: float = 0.0
    matrix: np.ndarray | None = field(default=None, repr=False)
    basis: str = "z"

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.basis not in ("z", "x"):
            raise ValueError(f"measurement basis is 'z' or 'x', got {self.basis!r}")
        qubits = tuple(int(q) for q in self.qubits)
        if len(qubits) != kind.arity:
            raise ValueError(f"{kind.value} acts on {kind.arity} qubit(s), got {qubits}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"{kind.value} operands must be distinct")
        object.__setattr__(self, "qubits", qubits)
        if not math.isfinite(self.angle):
            raise ValueError("gate angles must be finite")
        object.__setattr__(self, "angle", float(self.angle))
        if kind is GateKind.U3:
            if self.matrix is None:
                raise ValueError("u3 needs a 2x2 matrix")
            m = np.array(self.matrix, dtype=np.complex128)
            if m.shape != (2, 2) or unitarity_error(m) >= 1e-10:
                raise NotUnitaryError("u3 matrix must be a 2x2 unitary")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    def __repr__(self) -> str:
        arg = "" if self.kind in (GateKind.MEASURE, GateKind.U3) else f"{self.angle:.6g}, "
        return f"{self.kind.value}({arg}q={list(self.qubits)})"

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value, "q": list(self.qubits)}
        if self.kind is GateKind.U3:
            out["matrix"] = [[[z.real, z.imag] for z in row] for row in self.matrix]
        elif self.kind is GateKind.MEASURE:
            if self.basis != "z":
                out["basis"] = self.basis
        else:
            out["theta"] = self.angle
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "LogicalGate":
        kind = GateKind(obj["kind"])
        matrix = None
        if kind is GateKind.U3:
            matrix = np.array([[complex(re, im) for re, im in row] for row in obj["matrix"]])
        angle = obj.get("theta", obj.get("phi", 0.0))
        return cls(kind, tuple(obj["q"]), angle, matrix, obj.get("basis", "z"))


def rx(theta: float, q: int) -> LogicalGate:
    return LogicalGate(GateKind.RX, (q,), theta)


def rz(phi: float, q: int) -> LogicalGate:
    return LogicalGate(GateKind.RZ, (q,), phi)


def xx(theta: float, a: int, b: int) -> LogicalGate:
    return LogicalGate(GateKind.XX, (a, b), theta)


def zz(phi: float, a: int, b: int) -> LogicalGate:
    return LogicalGate(GateKind.ZZ, (a, b), phi)


def u3(matrix, q: int) -> LogicalGate:
    return LogicalGate(GateKind.U3, (q,), matrix=matrix)


def measure(q: int, basis: str = "z") -> LogicalGate:
    return LogicalGate(GateKind.MEASURE, (q,), basis=basis)


@dataclass(frozen=True, eq=False)
class LogicalCircuit:
    num_qubits: int
    gates: tuple[LogicalGate, ...] = ()

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        gates = tuple(self.gates)
        measured: set[int] = set()
        for g in gates:
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"{g!r} references qubit {q} outside 0..{self.num_qubits - 1}")
                if q in measured:
                    raise ValueError(f"{g!r} acts on qubit {q} after it was measured "
                                     "(mid-circuit feedback is not supported)")
            if g.kind is GateKind.MEASURE:
                measured.add(g.qubits[0])
        object.__setattr__(self, "gates", gates)

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        return tuple(sorted(g.qubits[0] for g in self.gates if g.kind is GateKind.MEASURE))

    @property
    def measurement_bases(self) -> dict[int, str]:
        return {g.qubits[0]: g.basis for g in self.gates if g.kind is GateKind.MEASURE}

    def with_terminal_measurements(self) -> "LogicalCircuit":
        """The same circuit, measuring every qubit if it measures none."""
        if self.measured_qubits:
            return self
        return LogicalCircuit(self.num_qubits, self.gates + tuple(measure(q) for q in range(self.num_qubits)))

    def to_json(self) -> dict:
        return {"qubits": self.num_qubits, "gates": [g.to_json() for g in self.gates]}


# --- circuit file ---------------------------------------------------------

CIRCUIT_SCHEMA = {
    "type": "object",
    "required": ["scheme", "qubits", "gates"],
    "properties": {
        "scheme": {"enum": ["dual", "quad"]},
        "qubits": {"type": "integer", "minimum": 1},
        "encodings": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind"],
                "properties": {
                    "kind": {"enum": ["fock", "coherent", "cat", "gkp"]},
                    "alpha": {"oneOf": [{"type": "number"},
                                        {"type": "array", "items": {"type": "number"},
                                         "minItems": 2, "maxItems": 2}]},
                    "delta": {"type": "number", "exclusiveMinimum": 0},
                    "truncation": {"type": "integer", "minimum": 2},
                },
            },
        },
        "gates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind", "q"],
                "properties": {
                    "kind": {"enum": [k.value for k in GateKind]},
                    "q": {"type": "array", "items": {"type": "integer", "minimum": 0},
                          "minItems": 1, "maxItems": 2},
                    "theta": {"type": "number"},
                    "phi": {"type": "number"},
                    "matrix": {"type": "array"},
                    "basis": {"enum": ["z", "x"]},
                },
            },
        },
        "epsilon": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
        "strict": {"type": "boolean"},
        "noise": {"type": "object"},
    },
}


@dataclass(frozen=True, eq=False)
class CircuitFile:
    circuit: LogicalCircuit
    layout: LogicalLayout
    epsilon: float = DEFAULT_EPSILON
    strict: bool = False
    noise: NoiseSpec | None = None


def parse_circuit_file(obj) -> CircuitFile:
    """Validate and load a circuit JSON object; CircuitSchemaError on any problem."""
    try:
        jsonschema.validate(obj, CIRCUIT_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise CircuitSchemaError(f"circuit schema violation at {path}: {exc.message}") from None
    try:
        n = obj["qubits"]
        encs = [EncodingSpec.from_json(e) for e in obj.get("encodings", [{"kind": "fock"}])]
        if len(encs) == 1:
            encs = encs * n
        if len(encs) != n:
            raise ValueError(f"{len(encs)} encodings for {n} qubits")
        gates = [LogicalGate.from_json(g) for g in obj["gates"]]
        circuit = LogicalCircuit(n, tuple(gates))
        layout = LogicalLayout(Scheme(obj["scheme"]), tuple(encs))
        noise = NoiseSpec.from_json(obj["noise"]) if "noise" in obj else None
    except (ValueError, KeyError, TypeError) as exc:
        raise CircuitSchemaError(f"invalid circuit: {exc}") from exc
    return CircuitFile(circuit, layout, float(obj.get("epsilon", DEFAULT_EPSILON)),
                       bool(obj.get("strict", False)), noise)


# --- single-qubit synthesis -----------------------------------------------

def _wrap_half_pi(angle: float) -> tuple[float, int]:
    """Reduce an angle modulo pi into (-pi/2, pi/2]; exp(i(a + k pi)P) = (-1)^k exp(i a P)."""
    k = math.floor(angle / math.pi + 0.5)
    reduced = angle - k * math.pi
    if reduced <= -math.pi / 2:
        reduced += math.pi
        k -= 1
    return reduced, k


def zxz_angles(U: np.ndarray) -> tuple[float, float, float]:
    """(a, b, c) with U = e^{i g} rz(a) rx(b) rz(c), b in [0, pi/2]."""
    U = np.asarray(U, dtype=np.complex128)
    V = U / cmath.sqrt(np.linalg.det(U))
    p, q = V[0, 0], V[0, 1]
    b = math.atan2(abs(q), abs(p))
    if abs(q) < 1e-14:
        return cmath.phase(p), 0.0, 0.0
    if abs(p) < 1e-14:
        return cmath.phase(q) - math.pi / 2, b, 0.0
    s = cmath.phase(p)
    t = cmath.phase(q) - math.pi / 2
    return (s + t) / 2, b, (s - t) / 2


def synthesize_single_qubit(U, scheme: Scheme | str | None = None, qubit: int = 0,
                            tol: float = 1e-10) -> list[LogicalGate]:
    """Time-ordered native gates rz(c), rx(b), rz(a) equal to U up to global phase.

    Angles that reduce to zero (mod pi) are elided. Both schemes share the
    same Z-X-Z sequence; what differs is how rz is realised at lowering time.
    """
    U = np.asarray(U, dtype=np.complex128)
    if U.shape != (2, 2) or unitarity_error(U) >= 1e-10:
        raise NotUnitaryError("synthesis needs a 2x2 unitary")
    a, b, c = zxz_angles(U)
    seq = []
    for kind, angle in ((GateKind.RZ, c), (GateKind.RX, b), (GateKind.RZ, a)):
        reduced, _ = _wrap_half_pi(angle)
        if abs(reduced) > tol:
            seq.append(LogicalGate(kind, (qubit,), reduced))
    return seq


# --- lowering -------------------------------------------------------------

_QUARTER = math.pi / 4


def _basis_change_z_to_x(q: int) -> list[LogicalGate]:
    # V = rz(pi/4) rx(pi/4) satisfies V Z V^dag = X
    return [rx(_QUARTER, q), rz(_QUARTER, q)]


def _basis_change_x_to_z(q: int) -> list[LogicalGate]:
    # V^dag = rx(-pi/4) rz(-pi/4) satisfies V^dag X V = Z
    return [rz(-_QUARTER, q), rx(-_QUARTER, q)]


def lower_to_native(circuit: LogicalCircuit, scheme: Scheme | str, strict: bool = False) -> list[LogicalGate]:
    """Rewrite u3 and the scheme's non-native two-qubit gate into native gates."""
    scheme = Scheme(scheme)
    out: list[LogicalGate] = []
    for g in circuit.gates:
        if g.kind is GateKind.U3:
            out.extend(synthesize_single_qubit(g.matrix, scheme, g.qubits[0]))
        elif g.kind is GateKind.ZZ and scheme is Scheme.DUAL:
            if strict:
                raise UnsupportedGateError("zz is not native to the dual-rail scheme (strict mode)")
            a, b = g.qubits
            # exp(i p ZZ) = (W x W) exp(i p XX) (W x W)^dag with W = V^dag
            out += _basis_change_z_to_x(a) + _basis_change_z_to_x(b)
            out.append(xx(g.angle, a, b))
            out += _basis_change_x_to_z(a) + _basis_change_x_to_z(b)
        elif g.kind is GateKind.XX and scheme is Scheme.QUAD:
            if strict:
                raise UnsupportedGateError("xx is not native to the quad-rail scheme (strict mode)")
            a, b = g.qubits
            # exp(i t XX) = (V x V) exp(i t ZZ) (V x V)^dag
            out += _basis_change_x_to_z(a) + _basis_change_x_to_z(b)
            out.append(zz(g.angle, a, b))
            out += _basis_change_z_to_x(a) + _basis_change_z_to_x(b)
        else:
            out.append(g)
    return out


@dataclass(frozen=True, eq=False)
class PhysicalProgram:
    layout: LogicalLayout
    ops: tuple
    readout_start: int
    metadata: dict

    @property
    def computation(self) -> tuple:
        return self.ops[: self.readout_start]

    @property
    def readout(self) -> tuple:
        return self.ops[self.readout_start:]

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        return tuple(self.metadata["measured_qubits"])

    def to_json(self) -> dict:
        return {"layout": self.layout.to_json(), "readout_start": self.readout_start,
                "metadata": self.metadata, "ops": [op.to_json() for op in self.ops]}


def _lower_gate(g: LogicalGate, layout: LogicalLayout, epsilon: float, meta: dict) -> list:
    scheme = layout.scheme
    if scheme is Scheme.DUAL:
        if g.kind is GateKind.RX:
            return [ESwap2(g.angle, *layout.z_pair(g.qubits[0]))]
        if g.kind is GateKind.XX:
            return [ESwap4(g.angle, layout.z_pair(g.qubits[0]), layout.z_pair(g.qubits[1]))]
        if g.kind is GateKind.RZ:
            q = g.qubits[0]
            if g.angle == 0.0:
                return []
            steps = phase_repetitions(epsilon)
            meta["phase_gate_reps"] += steps
            meta["global_phase"] -= g.angle
            meta["ancilla_modes"] = 1
            return [PhaseChannel(g.angle, epsilon, q, layout.modes(q)[1], steps)]
    else:
        if g.kind is GateKind.RZ:
            return [ESwap2(g.angle, *layout.z_pair(g.qubits[0]))]
        if g.kind is GateKind.ZZ:
            return [ESwap4(g.angle, layout.z_pair(g.qubits[0]), layout.z_pair(g.qubits[1]))]
        if g.kind is GateKind.RX:
            return [ESwap4(g.angle, *layout.x_pairs(g.qubits[0]))]
    raise UnsupportedGateError(f"{g!r} has no {scheme.value}-rail lowering")


def compile_circuit(circuit: LogicalCircuit, layout: LogicalLayout, epsilon: float = DEFAULT_EPSILON,
                    strict: bool = False, noise: NoiseSpec | None = None,
                    noise_point: str = "before") -> PhysicalProgram:
    """Lower a logical circuit to a physical program for ``layout``.

    Measurements are deferred to a readout section at the end (legal because
    nothing acts on a qubit after it is measured). ``noise`` inserts one
    collective-unitary layer over all modes, right after state preparation
    (``noise_point="before"``) or right before readout (``"after"``).
    """
    if circuit.num_qubits != layout.num_qubits:
        raise ValueError(f"circuit has {circuit.num_qubits} qubits, layout has {layout.num_qubits}")
    if not 0 < epsilon <= 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5], got {epsilon}")
    if noise_point not in ("before", "after"):
        raise ValueError("noise_point is 'before' or 'after'")
    scheme = layout.scheme
    meta = {"scheme": scheme.value, "epsilon": epsilon, "phase_gate_reps": 0, "global_phase": 0.0,
            "ancilla_modes": 0, "measured_qubits": list(circuit.measured_qubits),
            "measurement_bases": {str(q): b for q, b in sorted(circuit.measurement_bases.items())}}

    ops: list = []
    for q in range(layout.num_qubits):
        m = layout.modes(q)
        for k, mode in enumerate(m):
            ops.append(PrepareBasis(mode, k % 2))
    all_modes = tuple(range(layout.num_modes))
    if noise is not None and noise.modes is not None:
        all_modes = noise.modes
    if noise is not None and noise_point == "before":
        ops.append(NoiseLayer(noise, all_modes))
    if scheme is Scheme.QUAD:
        for q in range(layout.num_qubits):
            m = layout.modes(q)
            ops.append(SwapTest(m[0], m[1], q, role="init", herald=+1))
            ops.append(SwapTest(m[2], m[3], q, role="init", herald=-1))

    natives = lower_to_native(circuit, scheme, strict)
    readout_gates: list[LogicalGate] = []
    for g in natives:
        if g.kind is GateKind.MEASURE:
            readout_gates.append(g)
            continue
        ops.extend(_lower_gate(g, layout, epsilon, meta))
    if noise is not None and noise_point == "after":
        ops.append(NoiseLayer(noise, all_modes))

    readout_start = len(ops)
    measured = sorted(g.qubits[0] for g in readout_gates)
    bases = circuit.measurement_bases
    # the native swap-test readout is X for dual and Z for quad
    native = "x" if scheme is Scheme.DUAL else "z"
    for q in measured:
        if bases[q] == native:
            continue
        change = _basis_change_z_to_x(q) if scheme is Scheme.DUAL else _basis_change_x_to_z(q)
        for g in change:
            ops.extend(_lower_gate(g, layout, epsilon, meta))
    for q in measured:
        i, j = layout.z_pair(q)
        ops.append(SwapTest(i, j, q, role="readout"))
    return PhysicalProgram(layout, tuple(ops), readout_start, meta)


def random_circuit(rng: np.random.Generator, max_qubits: int = 2, max_gates: int = 5,
                   kinds: Sequence[GateKind] = (GateKind.RX, GateKind.RZ, GateKind.XX,
                                                GateKind.ZZ, GateKind.U3),
                   measure_all: bool = True) -> LogicalCircuit:
    """A seeded random circuit with angles in (-pi/2, pi/2] and Haar-random u3 matrices."""
    n = int(rng.integers(1, max_qubits + 1))
    allowed = [k for k in kinds if k.arity <= n]
    gates = []
    for _ in range(int(rng.integers(1, max_gates + 1))):
        kind = allowed[int(rng.integers(len(allowed)))]
        qubits = tuple(int(q) for q in rng.permutation(n)[: kind.arity])
        if kind is GateKind.U3:
            z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            q_, r = np.linalg.qr(z)
            gates.append(LogicalGate(kind, qubits, matrix=q_ * (np.diag(r) / np.abs(np.diag(r)))))
        else:
            gates.append(LogicalGate(kind, qubits, float(rng.uniform(-math.pi / 2, math.pi / 2))))
    if measure_all:
        gates += [measure(q) for q in range(n)]
    return LogicalCircuit(n, tuple(gates))
