"""Invariant suites behind ``swaplab verify``; each returns a Report."""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .circuits import controlled_swap_report, eswap_via_circuit_with_fidelity
from .encodings import EncodingKind, EncodingSpec, basis_states, overlap, validate_encoding
from .errors import IllConditionedBasisError
from .experiments import circuit_equivalence
from .fock import (
    LocalOperator,
    ModeSystem,
    annihilation_matrix,
    apply_local,
    embed_operator,
    matrix_exponential,
    partial_trace,
    random_density,
    random_state,
    random_unitary,
    swap_operator,
)
from .logical import (
    LogicalLayout,
    Scheme,
    eswap2,
    eswap4,
    ideal_cswap,
    logical_matrix,
    project_swap_test,
    swap_test_probabilities,
)
from .ops import ESwap2, ESwap4
from .reports import Report

SCOPES = ("all", "fock-core", "encodings", "logical", "physical", "compiler")
ADMISSIBLE_OVERLAP = 1e-3
GATE_THETAS = (0.3, math.pi / 4, 1.2)

_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def _rot(P: np.ndarray, theta: float) -> np.ndarray:
    return math.cos(theta) * np.eye(P.shape[0]) + 1j * math.sin(theta) * P


def fock_core_suite(d: int = 4, seed: int = 0, tol: float = 1e-12) -> Report:
    rng = np.random.Generator(np.random.PCG64(seed))
    report = Report("verify-fock-core", {"d": d, "tol": tol}, seed=seed)
    S = swap_operator(d).matrix
    report.check("swap_squared_minus_identity", float(np.max(np.abs(S @ S - np.eye(d * d)))), "==", 0.0)
    a = annihilation_matrix(d).matrix
    relation = S @ np.kron(a, np.eye(d)) @ S - np.kron(np.eye(d), a)
    report.check("swap_conjugates_ladder", float(np.max(np.abs(relation))), "<", tol)
    worst = 0.0
    for theta in np.linspace(-math.pi, math.pi, 9):
        E = matrix_exponential(LocalOperator((d, d), S), 1j * theta).matrix
        worst = max(worst, float(np.max(np.abs(E - _rot(S, theta)))))
    report.check("eswap_closed_form", worst, "<", tol)
    comm = 0.0
    for _ in range(20):
        U = random_unitary(d, rng)
        UU = np.kron(U, U)
        comm = max(comm, float(np.max(np.abs(UU @ S - S @ UU))))
    report.check("collective_unitary_commutes_with_swap", comm, "<", tol)
    small = min(d, 4)
    system = ModeSystem.modes(3, small)
    kernel = 0.0
    for slots in ((0,), (1,), (2,), (0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)):
        psi = random_state(system, rng)
        op = LocalOperator((small,) * len(slots), random_unitary(small ** len(slots), rng), unitary=True)
        got = apply_local(psi, op, slots).amplitudes
        want = embed_operator(op, slots, system) @ psi.amplitudes
        kernel = max(kernel, float(np.max(np.abs(got - want))))
    report.check("apply_local_matches_embedded_matrix", kernel, "<", tol)
    H = rng.normal(size=(d * d, d * d)) + 1j * rng.normal(size=(d * d, d * d))
    ours = matrix_exponential(H, 0.3).matrix
    ref = scipy.linalg.expm(0.3 * H)
    report.check("expm_matches_reference", float(np.max(np.abs(ours - ref)) / np.max(np.abs(ref))), "<", tol)
    residual = ours @ matrix_exponential(H, -0.3).matrix - np.eye(d * d)
    report.check("expm_inverse_residual", float(np.max(np.abs(residual))), "<", tol)
    rho = random_density(ModeSystem.modes(3, small), rng)
    tr = 0.0
    for keep in ((0,), (1,), (2,), (0, 2), (1, 2)):
        tr = max(tr, abs(partial_trace(rho, keep).trace() - rho.trace()))
    report.check("partial_trace_preserves_trace", float(tr), "<", tol)
    return report


def _encoding_grid() -> list[EncodingSpec]:
    return [EncodingSpec.fock(4), EncodingSpec.coherent(1.5, 40), EncodingSpec.coherent(2.0, 30),
            EncodingSpec.cat(2.0, 30), EncodingSpec.gkp(0.35, 40)]


def encodings_suite(spec: EncodingSpec | None = None, tol: float = 1e-3) -> Report:
    specs = [spec] if spec is not None else _encoding_grid()
    report = Report("verify-encodings", {"encodings": [s.to_json() for s in specs], "tol": tol})
    for s in specs:
        tag = f"{s.kind.value}[d={s.truncation}]"
        k0, k1 = basis_states(s)
        report.check(f"{tag}:norm_error", max(abs(k0.norm() - 1), abs(k1.norm() - 1)), "<", 1e-12)
        rep = validate_encoding(s, tol)
        report.check(f"{tag}:leakage", rep.leakage, "<", tol)
        ov = abs(overlap(s))
        if s.kind is EncodingKind.FOCK:
            report.check(f"{tag}:overlap", ov, "==", 0.0)
        elif s.kind is EncodingKind.COHERENT:
            # <alpha|-alpha> = exp(-2|alpha|^2), less the weight lost to truncation
            exact = math.exp(-2 * abs(s.alpha) ** 2)
            report.check(f"{tag}:overlap_vs_series", abs(ov - exact), "<", 1e-6 + rep.leakage)
        elif s.kind is EncodingKind.CAT:
            odd = max(float(np.max(np.abs(k0.amplitudes[1::2]))), float(np.max(np.abs(k1.amplitudes[1::2]))))
            report.check(f"{tag}:odd_parity_weight", odd, "<", 1e-12)
    if spec is None:
        coh = [abs(overlap(EncodingSpec.coherent(a, 40))) for a in (1.0, 2.0, 3.0)]
        report.check("coherent_overlap_decreasing_in_alpha", all(b < a for a, b in zip(coh, coh[1:])), "==", True)
        gkp = [abs(overlap(EncodingSpec.gkp(dl, 40))) for dl in (0.5, 0.4, 0.3)]
        report.check("gkp_overlap_decreasing_in_delta", all(b < a for a, b in zip(gkp, gkp[1:])), "==", True)
        leaks = [validate_encoding(EncodingSpec.coherent(2.0, d)).leakage for d in (12, 20, 30, 40)]
        report.check("leakage_nonincreasing_in_d", all(b <= a for a, b in zip(leaks, leaks[1:])), "==", True)
    else:
        report.check(f"{specs[0].kind.value}:validate_status_pass", rep.status, "==", "pass")
    return report


def _gate_cases(spec: EncodingSpec):
    dual1 = LogicalLayout.uniform(Scheme.DUAL, 1, spec)
    dual2 = LogicalLayout.uniform(Scheme.DUAL, 2, spec)
    quad1 = LogicalLayout.uniform(Scheme.QUAD, 1, spec)
    quad2 = LogicalLayout.uniform(Scheme.QUAD, 2, spec)
    XX, ZZ = np.kron(_X, _X), np.kron(_Z, _Z)
    for th in GATE_THETAS:
        yield f"dual_rx[{th:.4g}]", ESwap2(th, *dual1.z_pair(0)), dual1, [0], _rot(_X, th)
        yield (f"dual_xx[{th:.4g}]", ESwap4(th, dual2.z_pair(0), dual2.z_pair(1)), dual2, [0, 1],
               _rot(XX, th))
        yield f"quad_rz[{th:.4g}]", ESwap2(th, *quad1.z_pair(0)), quad1, [0], _rot(_Z, th)
        yield (f"quad_zz[{th:.4g}]", ESwap4(th, quad2.z_pair(0), quad2.z_pair(1)), quad2, [0, 1],
               _rot(ZZ, th))
        yield f"quad_rx[{th:.4g}]", ESwap4(th, *quad1.x_pairs(0)), quad1, [0], _rot(_X, th)


def gate_identity_errors(spec: EncodingSpec) -> list[tuple[str, float, float]]:
    """(case, max matrix error, leakage) for the native gate set of both schemes."""
    out = []
    for name, op, layout, qubits, target in _gate_cases(spec):
        lm = logical_matrix(op, layout, qubits)
        out.append((name, float(np.max(np.abs(lm.matrix - target))), lm.leakage))
    return out


def logical_suite(spec: EncodingSpec | None = None, tol: float = 1e-8) -> Report:
    spec = spec or EncodingSpec.fock()
    ov = abs(overlap(spec))
    bound = tol + 10 * ov
    report = Report("verify-logical", {"encoding": spec.to_json(), "tol": tol, "overlap": ov,
                                       "gate_tolerance": bound})
    # identities are only claimed for near-orthogonal encodings
    report.check("admissible_overlap", ov, "<", ADMISSIBLE_OVERLAP,
                 note="overlap-dominated: identities assume <0_L|1_L> ~ 0" if ov >= ADMISSIBLE_OVERLAP else "")
    try:
        errors = gate_identity_errors(spec)
    except IllConditionedBasisError as exc:
        report.check("logical_basis_conditioned", str(exc), "<", 0)
        return report
    for name, err, leak in errors:
        report.check(f"{name}:matrix_error", err, "<", bound)
        report.check(f"{name}:leakage", leak, "<", bound)
    layout = LogicalLayout.uniform(Scheme.DUAL, 1, spec)
    rng = np.random.Generator(np.random.PCG64(1))
    psi = random_state(layout.mode_system(), rng)
    p = swap_test_probabilities(psi, (0, 1))
    _, collapsed = project_swap_test(psi, (0, 1), 1)
    report.check("swap_test_repeatable", abs(swap_test_probabilities(collapsed, (0, 1))[1] - 1.0), "<", 1e-10)
    report.check("swap_test_total_probability", abs(p[1] + p[-1] - 1.0), "<", 1e-10)
    return report


def physical_suite(d: int = 4, seed: int = 0, tol: float = 1e-10) -> Report:
    rng = np.random.Generator(np.random.PCG64(seed))
    report = Report("verify-physical", {"d": d, "tol": tol}, seed=seed)
    for dd in sorted({2, 3, 4, d}):
        rep = controlled_swap_report(dd)
        report.check(f"cswap_circuit_error[d={dd}]", rep.ideal_error, "<", tol)
    C = ideal_cswap(d).matrix
    comm = 0.0
    for _ in range(5):
        U = random_unitary(d, rng)
        UU = np.kron(np.eye(2), np.kron(U, U))
        comm = max(comm, float(np.max(np.abs(UU @ C - C @ UU))))
    report.check("collective_unitary_commutes_with_cswap", comm, "<", 1e-12)
    system = ModeSystem.modes(4, min(d, 3))
    worst, fid = 0.0, 1.0
    for k in range(3):
        psi = random_state(system, rng)
        for pairs in (((0, 1),), ((0, 1), (2, 3))):
            out, f = eswap_via_circuit_with_fidelity(psi, 0.7, pairs, use_circuit_cswap=True)
            ref = eswap2(psi, 0.7, pairs[0]) if len(pairs) == 1 else eswap4(psi, 0.7, pairs)
            worst = max(worst, float(np.max(np.abs(out.amplitudes - ref.amplitudes))))
            fid = min(fid, f)
    report.check("eswap_circuit_error", worst, "<", tol)
    report.check("ancilla_return_fidelity", fid, ">=", 1 - tol)
    return report


def compiler_suite(count: int = 10, seed: int = 2024, epsilon: float = 0.01) -> Report:
    report = circuit_equivalence(count=count, seed=seed, epsilon=epsilon)
    report.name = "verify-compiler"
    return report


def run_scope(scope: str, d: int = 4, spec: EncodingSpec | None = None, tol: float | None = None) -> list[Report]:
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}; choose from {', '.join(SCOPES)}")
    runs = []
    if scope in ("all", "fock-core"):
        runs.append(fock_core_suite(d, tol=tol or 1e-12))
    if scope in ("all", "encodings"):
        runs.append(encodings_suite(spec, tol=tol or 1e-3))
    if scope in ("all", "logical"):
        runs.append(logical_suite(spec, tol=tol or 1e-8))
    if scope in ("all", "physical"):
        runs.append(physical_suite(d, tol=tol or 1e-10))
    if scope in ("all", "compiler"):
        runs.append(compiler_suite())
    return runs
