"""Single-mode encoding basis states |0_L>, |1_L> at finite truncation.

Four families are supported: the two lowest Fock states, coherent states
``|alpha>, |-alpha>``, even cat states and finite-energy square-lattice GKP
combs. Truncated kets are renormalized inside the ``d``-level space; the
weight lost above the cutoff is reported as leakage.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammainc

from .errors import InvalidDimensionError, TruncationError, TruncationWarning
from .fock import ModeSystem, StateVector

LEAKAGE_WARN = 0.01
LEAKAGE_FAIL = 0.2
GKP_ENVELOPE_CUTOFF = 1e-8

DEFAULT_TRUNCATION = {"fock": 4, "coherent": 12, "cat": 12, "gkp": 12}


class EncodingKind(str, Enum):
    FOCK = "fock"
    COHERENT = "coherent"
    CAT = "cat"
    GKP = "gkp"


@dataclass(frozen=True)
class EncodingSpec:
    kind: EncodingKind
    alpha: complex | None = None
    delta: float | None = None
    truncation: int = 4

    def __post_init__(self):
        kind = EncodingKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if int(self.truncation) != self.truncation or self.truncation < 2:
            raise InvalidDimensionError(f"truncation must be an integer >= 2, got {self.truncation}")
        object.__setattr__(self, "truncation", int(self.truncation))
        if kind in (EncodingKind.COHERENT, EncodingKind.CAT):
            if self.alpha is None:
                raise ValueError(f"{kind.value} encoding needs alpha")
            alpha = complex(self.alpha)
            if not np.isfinite(alpha):
                raise ValueError("alpha must be finite")
            object.__setattr__(self, "alpha", alpha)
            if self.delta is not None:
                raise ValueError(f"{kind.value} encoding takes no delta")
        elif kind is EncodingKind.GKP:
            if self.delta is None or not (float(self.delta) > 0 and math.isfinite(self.delta)):
                raise ValueError("gkp encoding needs a finite delta > 0")
            object.__setattr__(self, "delta", float(self.delta))
            if self.alpha is not None:
                raise ValueError("gkp encoding takes no alpha")
        elif self.alpha is not None or self.delta is not None:
            raise ValueError("fock encoding takes no parameters")

    @classmethod
    def fock(cls, truncation: int = DEFAULT_TRUNCATION["fock"]) -> "EncodingSpec":
        return cls(EncodingKind.FOCK, truncation=truncation)

    @classmethod
    def coherent(cls, alpha: complex, truncation: int = DEFAULT_TRUNCATION["coherent"]) -> "EncodingSpec":
        return cls(EncodingKind.COHERENT, alpha=alpha, truncation=truncation)

    @classmethod
    def cat(cls, alpha: complex, truncation: int = DEFAULT_TRUNCATION["cat"]) -> "EncodingSpec":
        return cls(EncodingKind.CAT, alpha=alpha, truncation=truncation)

    @classmethod
    def gkp(cls, delta: float, truncation: int = DEFAULT_TRUNCATION["gkp"]) -> "EncodingSpec":
        return cls(EncodingKind.GKP, delta=delta, truncation=truncation)

    def with_truncation(self, d: int) -> "EncodingSpec":
        return EncodingSpec(self.kind, self.alpha, self.delta, d)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value, "truncation": self.truncation}
        if self.alpha is not None:
            out["alpha"] = [self.alpha.real, self.alpha.imag]
        if self.delta is not None:
            out["delta"] = self.delta
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "EncodingSpec":
        alpha = obj.get("alpha")
        if alpha is not None:
            alpha = complex(alpha[0], alpha[1]) if isinstance(alpha, (list, tuple)) else complex(alpha)
        kind = obj["kind"]
        d = obj.get("truncation", DEFAULT_TRUNCATION.get(kind, 4))
        return cls(kind, alpha=alpha, delta=obj.get("delta"), truncation=d)

    @classmethod
    def parse(cls, text: str, truncation: int | None = None) -> "EncodingSpec":
        """Parse ``fock``, ``coherent:2.0``, ``cat:1.5`` or ``gkp:0.35``."""
        kind, _, param = text.partition(":")
        kind = kind.strip().lower()
        d = truncation or DEFAULT_TRUNCATION.get(kind)
        if kind == "fock":
            return cls.fock(d)
        if not param:
            raise ValueError(f"encoding {kind!r} needs a parameter, e.g. {kind}:1.5")
        if kind == "gkp":
            return cls.gkp(float(param), d)
        if kind in ("coherent", "cat"):
            return cls(kind, alpha=complex(param.replace("i", "j")), truncation=d)
        raise ValueError(f"unknown encoding kind {kind!r}")


@dataclass(frozen=True)
class EncodingReport:
    spec: EncodingSpec
    overlap: complex
    norms: tuple[float, float]
    leakage: float
    status: str

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "overlap": [self.overlap.real, self.overlap.imag],
            "abs_overlap": abs(self.overlap),
            "norms": list(self.norms),
            "leakage": self.leakage,
            "status": self.status,
        }


def coherent_amplitudes(alpha: complex, n: int) -> np.ndarray:
    """Fock amplitudes ``exp(-|a|^2/2) a^k / sqrt(k!)`` for k < n."""
    amps = np.empty(n, dtype=np.complex128)
    amps[0] = np.exp(-abs(alpha) ** 2 / 2)
    for k in range(1, n):
        amps[k] = amps[k - 1] * alpha / np.sqrt(k)
    return amps


def hermite_functions(q: np.ndarray, n: int) -> np.ndarray:
    """Oscillator eigenfunctions psi_k(q), k < n, for ``q = (a + a^dag)/sqrt(2)``."""
    out = np.zeros((n, q.size))
    out[0] = np.pi ** -0.25 * np.exp(-q * q / 2)
    if n > 1:
        out[1] = np.sqrt(2.0) * q * out[0]
    for k in range(1, n - 1):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * q * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def _gkp_raw(delta: float, d: int, bit: int) -> tuple[np.ndarray, float]:
    # Gaussian peaks of width delta at q = (2s + bit) sqrt(pi), weighted by exp(-delta^2 q^2 / 2).
    # Each peak is a q-displaced vacuum squeezed by r = -ln(delta).
    spacing = math.sqrt(math.pi)
    q_max = math.sqrt(-2.0 * math.log(GKP_ENVELOPE_CUTOFF)) / delta
    s_max = int(math.ceil(q_max / (2 * spacing))) + 1
    centres = [(2 * s + bit) * spacing for s in range(-s_max, s_max + 1)]
    centres = [c for c in centres if math.exp(-(delta * c) ** 2 / 2) >= GKP_ENVELOPE_CUTOFF]
    reach = max(abs(c) for c in centres) + 12 * delta + math.sqrt(2 * d) + 10
    step = min(delta, 1.0) / 40
    q = np.arange(-reach, reach + step, step)
    psi = np.zeros_like(q)
    for c in centres:
        psi += math.exp(-(delta * c) ** 2 / 2) * np.exp(-((q - c) ** 2) / (2 * delta**2))
    total = float(np.sum(psi**2) * step)
    amps = hermite_functions(q, d) @ psi * step
    return amps.astype(np.complex128), total


def _raw_kets(spec: EncodingSpec) -> tuple[list[np.ndarray], list[float]]:
    """Unnormalized truncated kets and their untruncated squared norms."""
    d = spec.truncation
    if spec.kind is EncodingKind.FOCK:
        e0 = np.zeros(d, dtype=np.complex128)
        e1 = np.zeros(d, dtype=np.complex128)
        e0[0] = 1.0
        e1[1] = 1.0
        return [e0, e1], [1.0, 1.0]
    if spec.kind is EncodingKind.COHERENT:
        a = spec.alpha
        return [coherent_amplitudes(a, d), coherent_amplitudes(-a, d)], [1.0, 1.0]
    if spec.kind is EncodingKind.CAT:
        a = spec.alpha
        k0 = coherent_amplitudes(a, d) + coherent_amplitudes(-a, d)
        k1 = coherent_amplitudes(1j * a, d) + coherent_amplitudes(-1j * a, d)
        full = 2.0 * (1.0 + math.exp(-2.0 * abs(a) ** 2))
        return [k0, k1], [full, full]
    kets, totals = zip(*(_gkp_raw(spec.delta, d, bit) for bit in (0, 1)))
    return list(kets), list(totals)


def _leakages(spec: EncodingSpec, kets: list[np.ndarray], totals: list[float]) -> list[float]:
    if spec.kind is EncodingKind.FOCK:
        return [0.0, 0.0]
    if spec.kind is EncodingKind.COHERENT:
        # P(N >= d) for Poisson(|alpha|^2), exact and monotone in d
        leak = float(gammainc(spec.truncation, abs(spec.alpha) ** 2))
        return [leak, leak]
    return [float(min(1.0, max(0.0, 1.0 - np.vdot(k, k).real / t))) for k, t in zip(kets, totals)]


def _loewdin(k0: np.ndarray, k1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    B = np.stack([k0, k1], axis=1)
    w, v = np.linalg.eigh(B.conj().T @ B)
    B = B @ (v @ np.diag(w ** -0.5) @ v.conj().T)
    return B[:, 0], B[:, 1]


def _kets_and_leakage(spec: EncodingSpec):
    kets, totals = _raw_kets(spec)
    leaks = _leakages(spec, kets, totals)
    norms = tuple(float(np.linalg.norm(k)) for k in kets)
    if min(norms) < 1e-150:
        raise TruncationError(f"{spec.kind.value} basis state vanishes at truncation {spec.truncation}")
    kets = [k / n for k, n in zip(kets, norms)]
    return kets, norms, max(leaks)


def basis_states(spec: EncodingSpec, orthogonalize: bool = False) -> tuple[StateVector, StateVector]:
    """Normalized |0_L>, |1_L> on a single ``d``-level mode.

    Raises TruncationError when more than 20% of either state's weight lies
    above the cutoff and warns above 1%. ``orthogonalize`` applies symmetric
    orthogonalization, which changes the physical states; it is off by default.
    """
    kets, _, leak = _kets_and_leakage(spec)
    if leak > LEAKAGE_FAIL:
        raise TruncationError(
            f"{spec.kind.value} encoding loses {leak:.3f} of its weight at truncation "
            f"{spec.truncation}; increase d"
        )
    if leak > LEAKAGE_WARN:
        warnings.warn(
            f"{spec.kind.value} encoding leaks {leak:.3g} above truncation {spec.truncation}",
            TruncationWarning, stacklevel=2,
        )
    if orthogonalize:
        kets = list(_loewdin(*kets))
    system = ModeSystem((spec.truncation,))
    return StateVector(system, kets[0]), StateVector(system, kets[1])


def overlap(spec: EncodingSpec) -> complex:
    """<0_L|1_L> of the truncated, normalized kets."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        k0, k1 = basis_states(spec)
    return complex(np.vdot(k0.amplitudes, k1.amplitudes))


def validate_encoding(spec: EncodingSpec, tol: float = 1e-3) -> EncodingReport:
    """Diagnostic report: 'pass' iff both |overlap| and leakage are below ``tol``."""
    kets, norms, leak = _kets_and_leakage(spec)
    ov = complex(np.vdot(kets[0], kets[1]))
    status = "pass" if abs(ov) < tol and leak < tol else "warn"
    return EncodingReport(spec, ov, norms, leak, status)
