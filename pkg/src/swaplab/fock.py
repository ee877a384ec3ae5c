"""Truncated Fock-space linear algebra.

Subsystems are ordered row-major: slot 0 is the slowest-varying index of a
flattened amplitude vector. Bosonic modes are truncated to ``d`` levels and
ancilla qubits have dimension 2. All value types are immutable once built;
operations return new objects.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionCapError,
    InvalidDimensionError,
    NotUnitaryError,
    SlotMismatchError,
    SystemMismatchError,
)
from .expm import expm

MODE = "mode"
ANCILLA = "ancilla-qubit"

DEFAULT_DIM_CAP = 2**20
DIM_CAP_ENV = "SWAPLAB_DIM_CAP"
UNITARY_TOL = 1e-10


def dimension_cap() -> int:
    """Largest permitted total dimension; override with ``SWAPLAB_DIM_CAP``."""
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InvalidDimensionError(f"{DIM_CAP_ENV}={raw!r} is not an integer") from exc
    if cap < 2:
        raise InvalidDimensionError(f"{DIM_CAP_ENV} must be >= 2")
    return cap


def check_dimension(total: int) -> None:
    cap = dimension_cap()
    if total > cap:
        raise DimensionCapError(
            f"total dimension {total} exceeds the cap of {cap} amplitudes "
            f"(set {DIM_CAP_ENV} to raise it)"
        )


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ModeSystem:
    """Ordered subsystem dimensions plus a role label for each slot."""

    dims: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise InvalidDimensionError("a ModeSystem needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise InvalidDimensionError(f"all subsystem dimensions must be >= 2, got {dims}")
        labels = tuple(self.labels) if self.labels else tuple(MODE for _ in dims)
        if len(labels) != len(dims):
            raise InvalidDimensionError("one label per subsystem is required")
        for label, d in zip(labels, dims):
            if label not in (MODE, ANCILLA):
                raise InvalidDimensionError(f"unknown subsystem label {label!r}")
            if label == ANCILLA and d != 2:
                raise InvalidDimensionError("ancilla qubits have dimension 2")
        check_dimension(math.prod(dims))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def modes(cls, count: int, d: int) -> "ModeSystem":
        return cls((d,) * count)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.dims)

    def join(self, other: "ModeSystem") -> "ModeSystem":
        return ModeSystem(self.dims + other.dims, self.labels + other.labels)

    def append(self, dim: int, label: str = MODE) -> "ModeSystem":
        return ModeSystem(self.dims + (dim,), self.labels + (label,))

    def select(self, slots: Sequence[int]) -> "ModeSystem":
        return ModeSystem(tuple(self.dims[s] for s in slots),
                          tuple(self.labels[s] for s in slots))

    def without(self, slots: Iterable[int]) -> "ModeSystem":
        drop = set(slots)
        keep = [s for s in range(len(self.dims)) if s not in drop]
        return self.select(keep)


@dataclass(frozen=True, eq=False)
class StateVector:
    system: ModeSystem
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != self.system.total:
            raise SystemMismatchError(
                f"{amps.size} amplitudes for a system of dimension {self.system.total}"
            )
        object.__setattr__(self, "amplitudes", _freeze(amps))

    @classmethod
    def basis(cls, system: ModeSystem, levels: Sequence[int]) -> "StateVector":
        amps = np.zeros(system.total, dtype=np.complex128)
        amps[np.ravel_multi_index(tuple(levels), system.dims)] = 1.0
        return cls(system, amps)

    @classmethod
    def product(cls, *factors: "StateVector") -> "StateVector":
        out = factors[0]
        for f in factors[1:]:
            out = out.tensor(f)
        return out

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(self.system.join(other.system),
                           np.kron(self.amplitudes, other.amplitudes))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.system, self.amplitudes / n)

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.system.dims)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    system: ModeSystem
    matrix: np.ndarray

    def __post_init__(self):
        n = self.system.total
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.shape != (n, n):
            raise SystemMismatchError(f"density matrix shape {mat.shape} for dimension {n}")
        object.__setattr__(self, "matrix", _freeze(mat))

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityMatrix":
        return cls(psi.system, np.outer(psi.amplitudes, psi.amplitudes.conj()))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(self.system.join(other.system), np.kron(self.matrix, other.matrix))

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def violations(self, tol: float = 1e-10) -> list[str]:
        """Names of the density-matrix invariants this matrix breaks."""
        bad = []
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
            bad.append("hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            bad.append("trace")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -tol:
            bad.append("positive")
        return bad


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """Matrix acting on a few subsystems (identity elsewhere).

    Claiming ``unitary=True`` is checked at construction.
    """

    dims: tuple[int, ...]
    matrix: np.ndarray
    slots: tuple[int, ...] | None = None
    unitary: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 2 for d in dims):
            raise InvalidDimensionError(f"operator dims must be >= 2, got {dims}")
        n = math.prod(dims)
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.shape != (n, n):
            raise SlotMismatchError(f"matrix shape {mat.shape} does not match dims {dims}")
        if self.slots is not None and len(self.slots) != len(dims):
            raise SlotMismatchError("one slot per operator factor is required")
        if self.unitary and unitarity_error(mat) >= UNITARY_TOL:
            raise NotUnitaryError(f"operator {self.name or dims} is not unitary")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", _freeze(mat))
        if self.slots is not None:
            object.__setattr__(self, "slots", tuple(int(s) for s in self.slots))

    def on(self, *slots: int) -> "LocalOperator":
        return LocalOperator(self.dims, self.matrix, tuple(slots), self.unitary, self.name)

    def dagger(self) -> "LocalOperator":
        return LocalOperator(self.dims, self.matrix.conj().T, self.slots, self.unitary, self.name)

    def __matmul__(self, other: "LocalOperator") -> "LocalOperator":
        if self.dims != other.dims:
            raise SlotMismatchError("cannot compose operators on different dims")
        return LocalOperator(self.dims, self.matrix @ other.matrix, self.slots,
                             self.unitary and other.unitary)

    def kron(self, other: "LocalOperator") -> "LocalOperator":
        return LocalOperator(self.dims + other.dims, np.kron(self.matrix, other.matrix),
                             unitary=self.unitary and other.unitary)

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return unitarity_error(self.matrix) < tol


def unitarity_error(matrix: np.ndarray) -> float:
    n = matrix.shape[0]
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(n))))


def _check_truncation(d: int) -> int:
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"truncation must be an integer >= 2, got {d}")
    return int(d)


def identity(dims: Sequence[int]) -> LocalOperator:
    return LocalOperator(tuple(dims), np.eye(math.prod(dims)), unitary=True, name="I")


def annihilation_matrix(d: int) -> LocalOperator:
    d = _check_truncation(d)
    return LocalOperator((d,), np.diag(np.sqrt(np.arange(1, d)), k=1), name="a")


def creation_matrix(d: int) -> LocalOperator:
    a = annihilation_matrix(d)
    return LocalOperator((d,), a.matrix.T, name="a_dag")


def number_matrix(d: int) -> LocalOperator:
    d = _check_truncation(d)
    return LocalOperator((d,), np.diag(np.arange(d, dtype=float)), name="n")


def swap_operator(d: int) -> LocalOperator:
    """Two-mode permutation ``|m>|n> -> |n>|m>``."""
    d = _check_truncation(d)
    perm = np.zeros((d * d, d * d))
    m, n = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    perm[(n * d + m).ravel(), (m * d + n).ravel()] = 1.0
    return LocalOperator((d, d), perm, unitary=True, name="S")


def _validate_slots(system: ModeSystem, op: LocalOperator, slots) -> tuple[int, ...]:
    if slots is None:
        slots = op.slots
    if slots is None:
        raise SlotMismatchError("no target slots given")
    slots = tuple(int(s) for s in slots)
    if len(set(slots)) != len(slots):
        raise SlotMismatchError(f"repeated slot in {slots}")
    if len(slots) != len(op.dims):
        raise SlotMismatchError(f"{len(slots)} slots for an operator on {len(op.dims)} factors")
    for s, d in zip(slots, op.dims):
        if not 0 <= s < len(system.dims):
            raise SlotMismatchError(f"slot {s} out of range for {len(system.dims)} subsystems")
        if system.dims[s] != d:
            raise SlotMismatchError(f"slot {s} has dimension {system.dims[s]}, operator expects {d}")
    return slots


def apply_to_axes(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract ``matrix`` into the given axes of ``tensor`` (other axes untouched)."""
    axes = list(axes)
    tdims = [tensor.shape[a] for a in axes]
    moved = np.moveaxis(tensor, axes, range(len(axes)))
    rest_shape = moved.shape[len(axes):]
    flat = moved.reshape(math.prod(tdims), -1)
    out = (matrix @ flat).reshape(tuple(tdims) + rest_shape)
    return np.moveaxis(out, range(len(axes)), axes)


def apply_local(state: StateVector, op: LocalOperator, slots: Sequence[int] | None = None,
                require_unitary: bool = True) -> StateVector:
    """Apply ``op`` to the named subsystems without building the full matrix."""
    slots = _validate_slots(state.system, op, slots)
    if require_unitary and not op.unitary and not op.is_unitary():
        raise NotUnitaryError(f"operator {op.name or op.dims} is not unitary")
    out = apply_to_axes(state.as_tensor(), op.matrix, slots)
    return StateVector(state.system, out.reshape(-1))


def apply_local_density(rho: DensityMatrix, op: LocalOperator,
                        slots: Sequence[int] | None = None) -> DensityMatrix:
    """``op rho op^dagger`` on the named subsystems."""
    slots = _validate_slots(rho.system, op, slots)
    n = len(rho.system.dims)
    t = rho.matrix.reshape(rho.system.dims * 2)
    t = apply_to_axes(t, op.matrix, slots)
    t = apply_to_axes(t, op.matrix.conj(), [s + n for s in slots])
    return DensityMatrix(rho.system, t.reshape(rho.system.total, rho.system.total))


def apply_swap(state: StateVector, i: int, j: int) -> StateVector:
    """Exchange the full states of subsystems ``i`` and ``j`` (exact, by transposition)."""
    dims = state.system.dims
    if i == j or not (0 <= i < len(dims) and 0 <= j < len(dims)):
        raise SlotMismatchError(f"invalid swap slots ({i}, {j})")
    if dims[i] != dims[j]:
        raise SlotMismatchError("swap needs equal-dimension subsystems")
    return StateVector(state.system, np.swapaxes(state.as_tensor(), i, j).reshape(-1))


def matrix_exponential(H: LocalOperator | np.ndarray, scale: complex = 1.0) -> LocalOperator:
    """``exp(scale * H)``; the result keeps H's dims and slots."""
    if not isinstance(H, LocalOperator):
        H = np.asarray(H)
        H = LocalOperator((H.shape[0],), H)
    mat = expm(scale * H.matrix)
    return LocalOperator(H.dims, mat, H.slots, unitary=unitarity_error(mat) < UNITARY_TOL)


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    keep = sorted({int(k) for k in keep})
    n = len(rho.system.dims)
    if not keep:
        raise SlotMismatchError("partial_trace needs at least one kept subsystem")
    if keep[0] < 0 or keep[-1] >= n:
        raise SlotMismatchError(f"kept subsystems {keep} out of range for {n}")
    t = rho.matrix.reshape(rho.system.dims * 2)
    traced = [s for s in range(n) if s not in keep]
    current = n
    for s in reversed(traced):
        t = np.trace(t, axis1=s, axis2=s + current)
        current -= 1
    sub = rho.system.select(keep)
    return DensityMatrix(sub, t.reshape(sub.total, sub.total))


def inner_product(a: StateVector, b: StateVector) -> complex:
    if a.system != b.system:
        raise SystemMismatchError("inner product of states on different systems")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(rho: DensityMatrix, psi: StateVector) -> float:
    """``<psi|rho|psi>`` clipped into [0, 1]."""
    if rho.system != psi.system:
        raise SystemMismatchError("fidelity of objects on different systems")
    f = np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes).real
    return float(min(1.0, max(0.0, f)))


def trace_distance(rho: DensityMatrix | np.ndarray, sigma: DensityMatrix | np.ndarray) -> float:
    a = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    diff = a - b
    return float(0.5 * np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


def embed_operator(op: LocalOperator, slots: Sequence[int], system: ModeSystem) -> np.ndarray:
    """Dense full-system matrix of ``op`` on ``slots``; a reference for small systems."""
    slots = _validate_slots(system, op, slots)
    rest = [s for s in range(len(system.dims)) if s not in slots]
    order = list(slots) + rest
    full = np.kron(op.matrix, np.eye(math.prod(system.dims[s] for s in rest)))
    # permutation taking the (slots, rest) ordering back to the system ordering
    idx = np.indices(system.dims).reshape(len(system.dims), -1)
    permuted_dims = tuple(system.dims[s] for s in order)
    src = np.ravel_multi_index(tuple(idx[s] for s in order), permuted_dims)
    P = np.zeros((system.total, system.total))
    P[np.arange(system.total), src] = 1.0
    return P @ full @ P.T


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (z + z.conj().T) / 2


def random_state(system: ModeSystem, rng: np.random.Generator) -> StateVector:
    z = rng.standard_normal(system.total) + 1j * rng.standard_normal(system.total)
    return StateVector(system, z / np.linalg.norm(z))


def random_density(system: ModeSystem, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    rank = rank or system.total
    z = rng.standard_normal((system.total, rank)) + 1j * rng.standard_normal((system.total, rank))
    m = z @ z.conj().T
    return DensityMatrix(system, m / np.trace(m))
