"""Dense matrix exponential by scaling and squaring with Pade approximants.

Follows Higham (2005), "The scaling and squaring method for the matrix
exponential revisited": pick the lowest Pade degree whose backward-error
bound covers ``||A||_1``, otherwise scale ``A`` by ``2**-s`` so that the
degree-13 approximant applies, then square ``s`` times.
"""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteError

_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}

_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}


def _pade_low(A: np.ndarray, m: int) -> np.ndarray:
    b = _PADE[m]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    U = b[1] * ident
    V = b[0] * ident
    power = ident
    for k in range(1, m // 2 + 1):
        power = power @ A2
        U = U + b[2 * k + 1] * power
        V = V + b[2 * k] * power
    U = A @ U
    return np.linalg.solve(V - U, V + U)


def _pade13(A: np.ndarray) -> np.ndarray:
    b = _PADE[13]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    return np.linalg.solve(V - U, V + U)


def expm(A: np.ndarray) -> np.ndarray:
    """Return ``exp(A)`` for a square (real or complex) matrix."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteError("matrix exponential of a matrix with non-finite entries")
    A = A.astype(np.result_type(A.dtype, np.float64))
    if A.shape[0] == 0:
        return A.copy()
    norm = np.linalg.norm(A, 1)
    for m in (3, 5, 7, 9):
        if norm <= _THETA[m]:
            return _pade_low(A, m)
    s = max(0, int(np.ceil(np.log2(norm / _THETA[13]))))
    X = _pade13(A / 2.0**s)
    for _ in range(s):
        X = X @ X
    return X
