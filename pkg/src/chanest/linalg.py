"""Dense complex linear algebra sized for qubit-pair and qudit-pair operators.

Everything here operates on plain ``complex128`` numpy arrays.  Matrices stay
tiny (at most d^2 x d^2 with d <= 5), so dense LAPACK routines are used
throughout; there is no sparse or symbolic path.
"""

from __future__ import annotations

import numpy as np

# Validation tolerances, chosen to sit far above accumulated rounding for
# dimensions up to 25 while still catching genuinely broken operators.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_SLACK = 1e-10


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two square complex matrices."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a, dtype=complex).conj().T


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    a = np.asarray(a, dtype=complex)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def partial_transpose(rho: np.ndarray, subsystem_dim: int) -> np.ndarray:
    """Transpose the second tensor factor of a bipartite operator.

    ``rho`` must act on two subsystems of equal dimension ``subsystem_dim``,
    i.e. have shape (subsystem_dim^2, subsystem_dim^2).
    """
    rho = np.asarray(rho, dtype=complex)
    d = int(subsystem_dim)
    if rho.shape != (d * d, d * d):
        raise ValueError(
            f"expected a {d * d}x{d * d} matrix for subsystem dimension {d}, "
            f"got shape {rho.shape}"
        )
    blocks = rho.reshape(d, d, d, d)
    return blocks.transpose(0, 3, 2, 1).reshape(d * d, d * d)


def min_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    Raises ValueError if the input is not Hermitian to within
    ``HERMITICITY_TOL``; eigenvalues of nearly-defective non-Hermitian input
    would be silently wrong otherwise.
    """
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a):
        raise ValueError("matrix is not Hermitian within tolerance")
    return float(np.linalg.eigvalsh(a)[0])


def check_density(rho: np.ndarray, name: str = "rho") -> np.ndarray:
    """Validate a density operator (Hermitian, unit trace, PSD) and return it.

    Positivity allows a slack of ``PSD_SLACK`` below zero to absorb rounding
    from eigenvalue computation on boundary states.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError(f"{name} contains non-finite entries")
    if not is_hermitian(rho):
        raise ValueError(f"{name} is not Hermitian within {HERMITICITY_TOL}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} has trace {tr}, expected 1")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -PSD_SLACK:
        raise ValueError(f"{name} has negative eigenvalue {lo}")
    return rho
