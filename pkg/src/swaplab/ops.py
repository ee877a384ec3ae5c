"""Executable physical operations: the target instruction set of the compiler."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .fock import LocalOperator, StateVector, apply_local, apply_to_axes
from .logical import eswap_tensor


def _remap_pairs(pairs, mapping: Mapping[int, int]):
    return tuple((mapping[i], mapping[j]) for i, j in pairs)


@dataclass(frozen=True)
class PrepareBasis:
    mode: int
    which: int

    kind = "prepare_basis"

    def to_json(self) -> dict:
        return {"op": self.kind, "mode": self.mode, "which": self.which}


@dataclass(frozen=True)
class SwapProduct:
    """Product of mode swaps; the logical Pauli operators."""

    pairs: tuple[tuple[int, int], ...]

    kind = "swaps"

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(m for p in self.pairs for m in p)

    def apply_tensor(self, t: np.ndarray) -> np.ndarray:
        for i, j in self.pairs:
            t = np.swapaxes(t, i, j)
        return t

    def apply(self, state: StateVector) -> StateVector:
        return StateVector(state.system, self.apply_tensor(state.as_tensor()).reshape(-1))

    def remap(self, mapping):
        return SwapProduct(_remap_pairs(self.pairs, mapping))

    def dagger(self):
        return self

    def to_json(self) -> dict:
        return {"op": self.kind, "pairs": [list(p) for p in self.pairs]}


@dataclass(frozen=True)
class ESwap:
    """exp(i theta prod S_pair) over one pair (two-mode) or two pairs (four-mode)."""

    theta: float
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        if len(pairs) not in (1, 2):
            raise ValueError("E-swaps act on one or two mode pairs")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def kind(self) -> str:
        return "eswap2" if len(self.pairs) == 1 else "eswap4"

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(m for p in self.pairs for m in p)

    def apply_tensor(self, t: np.ndarray) -> np.ndarray:
        return eswap_tensor(t, self.theta, self.pairs)

    def apply(self, state: StateVector) -> StateVector:
        return StateVector(state.system, self.apply_tensor(state.as_tensor()).reshape(-1))

    def remap(self, mapping):
        return ESwap(self.theta, _remap_pairs(self.pairs, mapping))

    def dagger(self):
        return ESwap(-self.theta, self.pairs)

    def to_json(self) -> dict:
        return {"op": self.kind, "theta": self.theta, "pairs": [list(p) for p in self.pairs]}


def ESwap2(theta: float, i: int, j: int) -> ESwap:
    return ESwap(theta, ((i, j),))


def ESwap4(theta: float, pair_a: tuple[int, int], pair_b: tuple[int, int]) -> ESwap:
    return ESwap(theta, (tuple(pair_a), tuple(pair_b)))


@dataclass(frozen=True, eq=False)
class LocalGate:
    op: LocalOperator
    targets: tuple[int, ...]

    kind = "local"

    @property
    def modes(self) -> tuple[int, ...]:
        return self.targets

    def apply_tensor(self, t: np.ndarray) -> np.ndarray:
        return apply_to_axes(t, self.op.matrix, self.targets)

    def apply(self, state: StateVector) -> StateVector:
        return apply_local(state, self.op, self.targets)

    def remap(self, mapping):
        return LocalGate(self.op, tuple(mapping[m] for m in self.targets))

    def dagger(self):
        return LocalGate(self.op.dagger(), self.targets)

    def to_json(self) -> dict:
        return {"op": self.kind, "name": self.op.name, "targets": list(self.targets)}


@dataclass(frozen=True)
class PhaseChannel:
    """Repeated ancilla E-swaps on a dual-rail qubit's second mode."""

    phi: float
    epsilon: float
    qubit: int
    mode: int
    steps: int

    kind = "phase_channel"

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.mode,)

    def to_json(self) -> dict:
        return {"op": self.kind, "phi": self.phi, "epsilon": self.epsilon,
                "qubit": self.qubit, "mode": self.mode, "steps": self.steps}


@dataclass(frozen=True)
class SwapTest:
    """Swap test on a mode pair.

    ``role`` is "readout" (outcome recorded for qubit ``qubit``) or "init"
    (heralded on ``herald`` during quad-rail initialization).
    """

    i: int
    j: int
    qubit: int
    role: str = "readout"
    herald: int | None = None

    kind = "swap_test"

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.i, self.j)

    def to_json(self) -> dict:
        out = {"op": self.kind, "modes": [self.i, self.j], "qubit": self.qubit, "role": self.role}
        if self.herald is not None:
            out["herald"] = self.herald
        return out


@dataclass(frozen=True, eq=False)
class NoiseLayer:
    noise: Any  # circuits.NoiseSpec
    modes: tuple[int, ...]

    kind = "noise"

    def to_json(self) -> dict:
        return {"op": self.kind, "noise": self.noise.to_json(), "modes": list(self.modes)}


UNITARY_OPS = (ESwap, SwapProduct, LocalGate)
