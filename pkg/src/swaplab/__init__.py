"""Encoding-agnostic logical qubits built from swaps between simulated bosonic modes."""

from .circuits import (
    NoiseSpec,
    apply_collective_noise,
    controlled_swap_circuit,
    eswap_via_circuit,
)
from .compiler import (
    LogicalCircuit,
    LogicalGate,
    PhysicalProgram,
    compile_circuit,
    measure,
    parse_circuit_file,
    rx,
    rz,
    synthesize_single_qubit,
    u3,
    xx,
    zz,
)
from .encodings import EncodingSpec, basis_states, overlap, validate_encoding
from .fock import (
    DensityMatrix,
    LocalOperator,
    ModeSystem,
    StateVector,
    annihilation_matrix,
    apply_local,
    fidelity,
    inner_product,
    matrix_exponential,
    partial_trace,
    swap_operator,
)
from .logical import (
    LogicalLayout,
    Scheme,
    dual_phase_gate,
    eswap2,
    eswap4,
    init_quad_register,
    logical_matrix,
    prepare_dual,
    prepare_quad,
    swap_test,
)
from .runtime import ShotResults, execute, logical_oracle, simulate

__version__ = "0.1.0"
