"""Dense matrix kernel: eigenvalues, pseudo-inverse, Kronecker products,
definiteness tests, and the real embedding of Hermitian matrices.

All routines operate on plain float64 ``numpy`` arrays.  Matrices stay small
(closed-loop dimensions of a dozen or so), so everything is dense and the
eigensolver is capped at dimension 64.
"""

import numpy as np

from .errors import (
    ConvergenceFailureError,
    NonSquareError,
    NotHermitianError,
    NotSymmetricError,
)

EIG_DIM_CAP = 64

# Singular values below this fraction of the largest are treated as zero.
PINV_RCOND = 1e-10


def as_matrix(m, name="matrix"):
    """Coerce to a 2-D float64 array and check every entry is finite."""
    a = np.asarray(m, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def require_square(m, name="matrix"):
    a = as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise NonSquareError(f"{name} is {a.shape[0]}x{a.shape[1]}, not square")
    return a


def eig_general(m):
    """All eigenvalues (with multiplicity) of a square real matrix.

    Returns a complex array sorted by (real, imag) so the ordering is
    deterministic for a fixed input.
    """
    a = require_square(m)
    n = a.shape[0]
    if n > EIG_DIM_CAP:
        raise ValueError(f"dimension {n} exceeds eigensolver cap {EIG_DIM_CAP}")
    if n == 0:
        return np.zeros(0, dtype=complex)
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailureError(str(exc)) from exc
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def pinv(m):
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``PINV_RCOND`` times the largest are zeroed, so
    rank-deficient inputs are handled.
    """
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    return np.linalg.pinv(a, rcond=PINV_RCOND)


def kron(a, b):
    """Kronecker product of two matrices."""
    return np.kron(as_matrix(a), as_matrix(b))


def is_positive_definite(m, margin=0.0):
    """True iff ``m - margin*I`` admits a Cholesky factorization.

    The input must be symmetric up to round-off (tolerance scales with the
    matrix norm); it is projected onto its symmetric part before the test so
    that accumulated round-off from LMI assembly does not flip the answer.
    Negative definiteness is tested as ``is_positive_definite(-m, margin)``.
    """
    a = require_square(m)
    n = a.shape[0]
    if n == 0:
        return True
    scale = 1.0 + np.abs(a).max()
    if np.abs(a - a.T).max() > 1e-10 * scale:
        raise NotSymmetricError("matrix is not symmetric within tolerance")
    sym = 0.5 * (a + a.T) - margin * np.eye(n)
    try:
        np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        return False
    return True


def hermitian_real_embedding(p):
    """Real symmetric 2n x 2n embedding of a Hermitian matrix.

    For ``p = X + iY`` returns ``[[X, -Y], [Y, X]]``; the embedding is
    positive definite exactly when ``p`` is, and carries each eigenvalue of
    ``p`` with doubled multiplicity.
    """
    a = np.asarray(p, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquareError("embedding requires a square matrix")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = 1.0 + (np.abs(a).max() if a.size else 0.0)
    if a.size and np.abs(a - a.conj().T).max() > 1e-10 * scale:
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    x = a.real
    y = a.imag
    return np.block([[x, -y], [y, x]])


def sym(m):
    """Symmetric part ``(m + m.T) / 2``."""
    a = require_square(m)
    return 0.5 * (a + a.T)


def max_eig_symmetric(m):
    """Largest eigenvalue of a (numerically) symmetric matrix."""
    a = sym(m)
    if a.shape[0] == 0:
        return -np.inf
    return float(np.linalg.eigvalsh(a)[-1])
